"""Spectral efficiency and seeded Monte Carlo sweeps over SNR or RF-chain count."""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .altmin import HybridPrecoder, design_hybrid_combiner, lasso_altmin, normalize_power
from .channel import generate_channel_set
from .config import SystemConfig
from .digital import bd_fully_digital, split_blocks
from .errors import (DegenerateChannel, InsufficientNullSpace, RankDeficient,
                     SingularCovarianceWarning)
from .interference import cancel_interference
from .omp import build_dictionary, omp_hybrid

DEGENERATE_ERRORS = (DegenerateChannel, InsufficientNullSpace, RankDeficient)


# --------------------------------------------------------------------------
# rate computation
# --------------------------------------------------------------------------
def link_gains(H, F_RF, F_B, W_RF, W_BB) -> Tuple[np.ndarray, np.ndarray]:
    """Per-link gains and combiner Gram matrices.

    Returns ``G`` of shape ``(K, F, K, N_s, N_s)`` with
    ``G[k, f, j] = W_kf^H H_kf F_RF F_B[j, f]`` (``W_kf = W_RF[k] @ W_BB[k, f]``)
    and ``N`` of shape ``(K, F, N_s, N_s)`` with ``N[k, f] = W_kf^H W_kf``.
    """
    W = np.einsum("kra,kfas->kfrs", W_RF, W_BB)
    P = np.einsum("ta,jfas->jfts", F_RF, F_B)
    WH = np.einsum("kfrs,kfrt->kfst", W.conj(), H)
    G = np.einsum("kfst,jftu->kfjsu", WH, P)
    N = np.einsum("kfrs,kfru->kfsu", W.conj(), W)
    return G, N


def _logdet_hermitian(M: np.ndarray) -> np.ndarray:
    return np.linalg.slogdet(M)[1] / np.log(2.0)


def spectral_efficiency(H, F_RF, F_B, W_RF, W_BB, sigma2):
    """Sum rate in bits/s/Hz, averaged over subcarriers, interference treated as noise.

    Each stream gets power ``1 / (K * N_s * F)``.  `sigma2` may be a scalar
    or an array; the result has the same shape.
    """
    G, N = link_gains(H, F_RF, F_B, W_RF, W_BB)
    K, F, _, ns, _ = G.shape
    scale = 1.0 / (K * ns * F)
    outer = np.einsum("kfjsu,kfjtu->kfjst", G, G.conj()) * scale
    idx = np.arange(K)
    signal = outer[idx, :, idx]                       # (K, F, N_s, N_s)
    interference = outer.sum(axis=2) - signal

    sig2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    rates = np.empty(sig2.shape)
    eye = np.eye(ns)
    for i, s2 in enumerate(sig2):
        C = interference + s2 * N
        C = 0.5 * (C + np.swapaxes(C.conj(), -1, -2))
        trace = np.real(np.trace(C, axis1=-2, axis2=-1))
        min_eig = np.linalg.eigvalsh(C)[..., 0]
        singular = min_eig <= 1e-12 * np.maximum(trace, np.finfo(float).tiny)
        if np.any(singular):
            warnings.warn(f"{int(singular.sum())} singular covariance(s) regularized",
                          SingularCovarianceWarning, stacklevel=2)
            reg = 1e-12 * np.where(trace > 0, trace, 1.0)
            C = C + singular[..., None, None] * reg[..., None, None] * eye
        per_link = _logdet_hermitian(C + signal) - _logdet_hermitian(C)
        rates[i] = max(float(per_link.sum() / F), 0.0)
    return rates.reshape(np.shape(sigma2)) if np.ndim(sigma2) else float(rates[0])


def snr_to_noise(snr_db) -> np.ndarray:
    return 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)


# --------------------------------------------------------------------------
# per-draw precoder designs
# --------------------------------------------------------------------------
def trial_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of one trial, derived from the master seed only."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def fully_digital_design(fd, n_tx: int, n_rx: int) -> HybridPrecoder:
    K = fd.blocks.shape[0]
    return HybridPrecoder(F_RF=np.eye(n_tx, dtype=complex), F_BB=fd.blocks,
                          W_RF=np.broadcast_to(np.eye(n_rx, dtype=complex), (K, n_rx, n_rx)),
                          W_BB=fd.combiners)


def altmin_combiners(fd, config: SystemConfig, rng: np.random.Generator):
    """Per-user DPS hybrid combiners; returns ``(W_RF, W_BB)`` stacks."""
    K, F = config.n_users, config.n_subcarriers
    W_RF = np.empty((K, config.n_rx, config.n_rf_rx), dtype=complex)
    W_BB = np.empty((K, F, config.n_rf_rx, config.n_streams), dtype=complex)
    for k in range(K):
        W_RF[k], W_cat, _ = design_hybrid_combiner(
            fd.user_combiner_target(k), config.n_rf_rx, rng,
            tol=config.altmin_tol, max_iter=config.altmin_max_iter)
        W_BB[k] = split_blocks(W_cat, 1, F)[0]
    return W_RF, W_BB


def altmin_designs(H, fd, config: SystemConfig, n_rf: int, rng, combiners,
                   with_bd: Iterable[bool] = (True, False)) -> Dict[bool, HybridPrecoder]:
    """AltMin precoder, optionally followed by the interference-cancelling BD stage."""
    F_RF, F_BB_cat, _ = lasso_altmin(fd.F_opt, n_rf, rng, tol=config.altmin_tol,
                                     max_iter=config.altmin_max_iter)
    F_BB = split_blocks(F_BB_cat, config.n_users, config.n_subcarriers)
    W_RF, W_BB = combiners
    out = {}
    for bd in with_bd:
        F_B = cancel_interference(H, F_RF, F_BB, W_RF, W_BB) if bd else F_BB
        F_B = normalize_power(F_RF, F_B, config.budget, only_if_exceeded=False)
        out[bd] = HybridPrecoder(F_RF, F_B, W_RF, W_BB)
    return out


def omp_design(H, fd, config: SystemConfig, n_rf: int) -> HybridPrecoder:
    K, F = config.n_users, config.n_subcarriers
    dict_t = build_dictionary(config.n_tx, config.omp_grid_factor * config.n_tx)
    dict_r = build_dictionary(config.n_rx, config.omp_grid_factor * config.n_rx)
    F_RF, F_BB_cat, _ = omp_hybrid(fd.F_opt, dict_t, n_rf)
    W_RF = np.empty((K, config.n_rx, config.n_rf_rx), dtype=complex)
    W_BB = np.empty((K, F, config.n_rf_rx, config.n_streams), dtype=complex)
    for k in range(K):
        W_RF[k], W_cat, _ = omp_hybrid(fd.user_combiner_target(k), dict_r, config.n_rf_rx)
        W_BB[k] = split_blocks(W_cat, 1, F)[0]
    F_B = split_blocks(F_BB_cat, K, F)
    if config.omp_with_bd:
        F_B = cancel_interference(H, F_RF, F_B, W_RF, W_BB)
    F_B = normalize_power(F_RF, F_B, config.budget, only_if_exceeded=False)
    return HybridPrecoder(F_RF, F_B, W_RF, W_BB)


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------
@dataclass
class TrialOutcome:
    """Rates of one channel draw: ``rates[(algorithm, n_rf_tx)]`` over the SNR points."""

    trial_index: int
    seed: int
    snr_db: Tuple[float, ...]
    rates: Dict[Tuple[str, int], np.ndarray] = field(default_factory=dict)
    degenerate: Optional[str] = None


def run_trial(config: SystemConfig, trial_index: int,
              snr_db: Optional[Sequence[float]] = None,
              n_rf_values: Optional[Sequence[int]] = None) -> TrialOutcome:
    """Evaluate every configured algorithm on one seeded channel draw.

    Precoders are designed once per draw (they do not depend on noise) and
    reused across the SNR points.  Degenerate draws come back with
    ``degenerate`` set and no rates.
    """
    snr_db = tuple(config.snr_grid_db if snr_db is None else snr_db)
    n_rf_values = tuple((config.n_rf_tx,) if n_rf_values is None else n_rf_values)
    seed = trial_seed(config.master_seed, trial_index)
    out = TrialOutcome(trial_index, seed, snr_db)
    sigma2 = snr_to_noise(snr_db)
    algos = config.algorithms
    try:
        channels = generate_channel_set(config, _rng(seed, 0))
        H = channels.H
        fd = bd_fully_digital(channels, config)
        designs: Dict[Tuple[str, int], HybridPrecoder] = {}
        if "fully_digital" in algos:
            d = fully_digital_design(fd, config.n_tx, config.n_rx)
            for n_rf in n_rf_values:
                designs["fully_digital", n_rf] = d
        wanted = [bd for bd, name in ((True, "altmin_bd"), (False, "altmin_no_bd")) if name in algos]
        if wanted:
            combiners = altmin_combiners(fd, config, _rng(seed, 1))
            for n_rf in n_rf_values:
                result = altmin_designs(H, fd, config, n_rf, _rng(seed, 2, n_rf), combiners, wanted)
                for bd, d in result.items():
                    designs["altmin_bd" if bd else "altmin_no_bd", n_rf] = d
        if "omp" in algos:
            for n_rf in n_rf_values:
                designs["omp", n_rf] = omp_design(H, fd, config, n_rf)
    except DEGENERATE_ERRORS as exc:
        out.degenerate = f"{type(exc).__name__}: {exc}"
        return out

    cache = {}
    for key, d in designs.items():
        if id(d) not in cache:
            cache[id(d)] = np.atleast_1d(spectral_efficiency(H, d.F_RF, d.F_BB, d.W_RF, d.W_BB, sigma2))
        out.rates[key] = cache[id(d)]
    return out


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    snr_db: float
    n_rf_tx: int
    mean_se_bps_hz: float
    stderr: float
    trials: int


@dataclass
class ExperimentResult:
    axis: str
    config: SystemConfig
    rows: List[ResultRow]
    trial_seeds: List[int]
    degenerate_draws: int
    outcomes: List[TrialOutcome]

    def mean(self, algorithm: str, snr_db: Optional[float] = None,
             n_rf_tx: Optional[int] = None) -> float:
        for r in self.rows:
            if r.algorithm == algorithm and (snr_db is None or r.snr_db == snr_db) \
                    and (n_rf_tx is None or r.n_rf_tx == n_rf_tx):
                return r.mean_se_bps_hz
        raise KeyError((algorithm, snr_db, n_rf_tx))

    def raw_records(self):
        """``(trial, algorithm, snr_db, n_rf_tx, se)`` tuples in trial order."""
        for o in self.outcomes:
            for (algo, n_rf), rates in o.rates.items():
                for snr, se in zip(o.snr_db, rates):
                    yield o.trial_index, algo, snr, n_rf, float(se)


def _run_trial_args(args):
    return run_trial(*args)


def sweep(config: SystemConfig, axis: str = "snr", workers: int = 1,
          progress: Optional[Callable[[int, int], None]] = None) -> ExperimentResult:
    """Aggregate :func:`run_trial` over ``config.n_trials`` draws.

    ``axis="snr"`` evaluates ``config.snr_grid_db`` at ``config.n_rf_tx``;
    ``axis="n_rf_tx"`` evaluates ``config.n_rf_tx_grid`` at
    ``config.rf_sweep_snr_db``.  Results do not depend on `workers`.
    """
    if axis == "snr":
        snr, n_rf = tuple(config.snr_grid_db), (config.n_rf_tx,)
    elif axis == "n_rf_tx":
        snr, n_rf = (config.rf_sweep_snr_db,), tuple(config.n_rf_tx_grid)
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")

    jobs = [(config, t, snr, n_rf) for t in range(config.n_trials)]
    outcomes: List[TrialOutcome] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, o in enumerate(pool.map(_run_trial_args, jobs, chunksize=4)):
                outcomes.append(o)
                if progress:
                    progress(i + 1, len(jobs))
    else:
        for i, job in enumerate(jobs):
            outcomes.append(run_trial(*job))
            if progress:
                progress(i + 1, len(jobs))

    good = [o for o in outcomes if o.degenerate is None]
    rows = []
    for algo in config.algorithms:
        for nrf in n_rf:
            if not good:
                continue
            stack = np.array([o.rates[algo, nrf] for o in good])      # (trials, snr)
            n = stack.shape[0]
            means = stack.mean(axis=0)
            errs = stack.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(means)
            for s, m, e in zip(snr, means, errs):
                rows.append(ResultRow(algo, float(s), int(nrf), float(m), float(e), n))
    return ExperimentResult(axis=axis, config=config, rows=rows,
                            trial_seeds=[o.seed for o in outcomes],
                            degenerate_draws=len(outcomes) - len(good), outcomes=outcomes)
