"""Spectral efficiency versus SNR for the four designs at desk scale.

Fully digital BD is the ceiling.  AltMin with the BD stage tracks it,
AltMin without BD saturates at high SNR where leakage dominates noise,
and the dictionary-based OMP design trails throughout.
"""

import sys

from dps_hybrid import DESK, sweep

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100
cfg = DESK.replace(n_trials=trials, snr_grid_db=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0))
res = sweep(cfg, "snr")

print(f"mean SE [bit/s/Hz], {trials} trials, N_RF^t = {cfg.n_rf_tx}")
print("snr_db " + "".join(f"{a:>14}" for a in cfg.algorithms))
for snr in cfg.snr_grid_db:
    print(f"{snr:6.0f} " + "".join(f"{res.mean(a, snr):14.3f}" for a in cfg.algorithms))
