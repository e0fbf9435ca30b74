"""Residual interuser interference and the baseband BD stage.

The AltMin hybrid precoder only approximates the fully digital one, so
some interference leaks between users.  Running BD on the effective
channel (after analog and digital combining) removes it to machine
precision; power is then renormalized to the budget.
"""

import numpy as np

from dps_hybrid import DESK, bd_fully_digital, generate_channel_set
from dps_hybrid.evaluation import (altmin_combiners, altmin_designs, snr_to_noise,
                                   spectral_efficiency)

cfg = DESK
rng = np.random.default_rng(2)
cs = generate_channel_set(cfg, rng)
fd = bd_fully_digital(cs, cfg)
comb = altmin_combiners(fd, cfg, rng)
designs = altmin_designs(cs.H, fd, cfg, cfg.n_rf_tx, rng, comb)


def leakage(d):
    worst = 0.0
    for f in range(cfg.n_subcarriers):
        for j in range(cfg.n_users):
            for k in range(cfg.n_users):
                if j != k:
                    G = d.W_BB[j, f].conj().T @ d.W_RF[j].conj().T @ cs.H[j, f] @ d.F_RF @ d.F_BB[k, f]
                    worst = max(worst, np.linalg.norm(G))
    return worst


sigma2 = snr_to_noise([-10.0, 20.0])
for bd, d in designs.items():
    rate = spectral_efficiency(cs.H, d.F_RF, d.F_BB, d.W_RF, d.W_BB, sigma2)
    power = np.linalg.norm(d.F_RF @ d.F_BB) ** 2
    print(f"{'with BD   ' if bd else 'without BD'}: max leakage {leakage(d):.2e}, "
          f"power {power:.6f} (budget {cfg.budget:g}), SE at -10/20 dB = {rate[0]:.2f}/{rate[1]:.2f}")
