"""How many RF chains does the hybrid design need?

At 5 dB SNR the gap between AltMin+BD and the fully digital ceiling
shrinks quickly once N_RF^t exceeds the K*N_s = 4 streams.
"""

import sys

from dps_hybrid import DESK, sweep

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100
cfg = DESK.replace(n_trials=trials, n_rf_tx_grid=(4, 5, 6, 7, 8),
                   algorithms=("fully_digital", "altmin_bd", "omp"))
res = sweep(cfg, "n_rf_tx")

snr = cfg.rf_sweep_snr_db
print(f"mean SE at {snr:g} dB, {trials} trials")
print(f"{'N_RF^t':>6}{'fully_digital':>15}{'altmin_bd':>12}{'omp':>10}{'gap %':>9}")
for n in cfg.n_rf_tx_grid:
    fd, am, omp = (res.mean(a, snr, n) for a in cfg.algorithms)
    print(f"{n:6d}{fd:15.3f}{am:12.3f}{omp:10.3f}{100 * (fd - am) / fd:9.2f}")
