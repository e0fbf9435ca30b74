"""Hybrid precoder decomposition under the double-phase-shifter (DPS) constraint.

With two phase shifters summed per RF-chain/antenna route, every analog
entry satisfies ``|F_RF[i, j]| <= 2``.  The decomposition

    minimize ||F_opt - F_RF @ F_BB||_F   s.t.  |F_RF[i, j]| <= 2,  F_BB @ F_BB^H = I

is solved by alternating two closed-form block updates: a semi-orthogonal
Procrustes step for ``F_BB`` and an entrywise modulus clip of
``F_opt @ F_BB^H`` for ``F_RF`` (the closed form of the LASSO dual when
``F_BB`` has orthonormal rows).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import NonConvergence, RankDeficient, ZeroMatrix, ZeroProduct

DPS_BOUND = 2.0


@dataclass
class AltMinHistory:
    objective: List[float] = field(default_factory=list)
    reason: str = ""

    @property
    def iterations(self) -> int:
        return max(len(self.objective) - 1, 0)


@dataclass
class HybridPrecoder:
    """Shared analog precoder plus per-(user, subcarrier) digital blocks.

    ``F_RF``: ``(N_t, N_RF^t)``; ``F_BB``: ``(K, F, N_RF^t, N_s)`` (after the
    BD cascade and power step when used for evaluation).  The combiner fields
    are ``W_RF`` ``(K, N_r, N_RF^r)`` and ``W_BB`` ``(K, F, N_RF^r, N_s)``.
    The fully digital design fits the same container with identity analog
    parts.
    """

    F_RF: np.ndarray
    F_BB: np.ndarray
    W_RF: Optional[np.ndarray] = None
    W_BB: Optional[np.ndarray] = None


def decomposition_error(F_opt, F_RF, F_BB) -> float:
    return float(np.linalg.norm(F_opt - F_RF @ F_BB))


def project_modulus(Z: np.ndarray, bound: float = DPS_BOUND) -> np.ndarray:
    """Clip the modulus of every entry of `Z` to `bound`, keeping its phase.

    Same as ``Z - exp(j*angle(Z)) * max(|Z| - bound, 0)``: the Euclidean
    projection onto ``{W : |W[i, j]| <= bound}``.
    """
    Z = np.asarray(Z)
    mag = np.abs(Z)
    scale = np.ones_like(mag)
    over = mag > bound
    scale[over] = bound / mag[over]
    return Z * scale


def solve_analog_oracle(F_opt: np.ndarray, F_BB: np.ndarray, bound: float = DPS_BOUND,
                        tol: float = 1e-8, max_iter: int = 100_000,
                        F_RF0: Optional[np.ndarray] = None) -> np.ndarray:
    """Projected gradient descent on ``0.5 * ||F_opt - F_RF @ F_BB||_F^2``.

    General-purpose reference for the analog subproblem (`F_BB` need not be
    semi-orthogonal).  Step size ``1 / ||F_BB||_2^2``; stops when the
    gradient-mapping norm drops below `tol`.

    Raises
    ------
    NonConvergence
        If `max_iter` iterations pass without reaching `tol`.
    """
    lipschitz = np.linalg.norm(F_BB, 2) ** 2
    if lipschitz == 0:
        return np.zeros((F_opt.shape[0], F_BB.shape[0]), dtype=complex)
    step = 1.0 / lipschitz
    X = np.zeros((F_opt.shape[0], F_BB.shape[0]), dtype=complex) if F_RF0 is None \
        else np.array(F_RF0, dtype=complex)
    cross = F_opt @ F_BB.conj().T
    gram = F_BB @ F_BB.conj().T
    for _ in range(max_iter):
        grad = X @ gram - cross
        X_new = project_modulus(X - step * grad, bound)
        if lipschitz * np.linalg.norm(X_new - X) < tol:
            return X_new
        X = X_new
    raise NonConvergence(f"projected gradient did not reach {tol:g} in {max_iter} iterations")


def opp_digital_update(F_opt: np.ndarray, F_RF: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Semi-orthogonal Procrustes step: ``F_BB = V @ U1^H`` from ``F_opt^H F_RF = U1 S V^H``.

    Raises
    ------
    RankDeficient
        When ``F_opt^H @ F_RF`` has fewer than ``N_RF`` nonzero singular values.
    """
    n_rf = F_RF.shape[1]
    if F_opt.shape[1] < n_rf:
        raise ValueError("need at least as many target columns as RF chains")
    U1, s, Vh = np.linalg.svd(F_opt.conj().T @ F_RF, full_matrices=False)
    if s[0] == 0 or s[-1] <= rtol * s[0]:
        raise RankDeficient(f"cross product rank < {n_rf}")
    return Vh.conj().T @ U1.conj().T


def random_feasible_analog(n_rows: int, n_rf: int, rng: np.random.Generator,
                           bound: float = DPS_BOUND) -> np.ndarray:
    """Entries ``bound * exp(j*U)``, ``U ~ Uniform[0, 2*pi)``: on the feasible boundary."""
    return bound * np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(n_rows, n_rf)))


def lasso_altmin(F_opt: np.ndarray, n_rf: int, rng: np.random.Generator, *,
                 tol: float = 1e-4, max_iter: int = 500, bound: float = DPS_BOUND,
                 max_restarts: int = 3) -> Tuple[np.ndarray, np.ndarray, AltMinHistory]:
    """Alternating minimization of ``||F_opt - F_RF @ F_BB||_F``.

    Returns ``(F_RF, F_BB, history)`` where ``F_BB`` has orthonormal rows and
    ``history.objective[i]`` is the residual after ``i`` full sweeps.  Stops
    when the relative decrease falls below `tol` or after `max_iter` sweeps.
    A rank-deficient Procrustes step triggers a fresh random start, up to
    `max_restarts` times.
    """
    for attempt in range(max_restarts + 1):
        F_RF = random_feasible_analog(F_opt.shape[0], n_rf, rng, bound)
        try:
            return _altmin_loop(F_opt, F_RF, tol, max_iter, bound)
        except RankDeficient:
            if attempt == max_restarts:
                raise


def _altmin_loop(F_opt, F_RF, tol, max_iter, bound):
    history = AltMinHistory()
    F_BB = opp_digital_update(F_opt, F_RF)
    F_RF = project_modulus(F_opt @ F_BB.conj().T, bound)
    history.objective.append(decomposition_error(F_opt, F_RF, F_BB))
    while True:
        if history.objective[-1] == 0.0:
            history.reason = "tolerance"
            break
        if history.iterations >= max_iter:
            history.reason = "max_iter"
            break
        F_BB = opp_digital_update(F_opt, F_RF)
        F_RF = project_modulus(F_opt @ F_BB.conj().T, bound)
        prev = history.objective[-1]
        history.objective.append(decomposition_error(F_opt, F_RF, F_BB))
        if (prev - history.objective[-1]) < tol * prev:
            history.reason = "tolerance"
            break
    return F_RF, F_BB, history


def exact_decompose_single_carrier(F_opt: np.ndarray, bound: float = DPS_BOUND):
    """Exact factorization with ``N_RF = columns of F_opt``.

    ``F_RF = F_opt / c`` and ``F_BB = c * I`` with ``c = max|F_opt| / bound``,
    so every analog entry has modulus at most `bound`.
    """
    peak = np.max(np.abs(F_opt)) if F_opt.size else 0.0
    if peak == 0:
        raise ZeroMatrix("cannot decompose an all-zero precoder")
    c = peak / bound
    return F_opt / c, c * np.eye(F_opt.shape[1], dtype=complex)


def normalize_power(F_RF: np.ndarray, F_B: np.ndarray, budget: float,
                    only_if_exceeded: bool = True) -> np.ndarray:
    """Rescale `F_B` so that ``||F_RF @ F_B||_F^2 == budget``.

    `F_B` may be a concatenated matrix or a stack of blocks whose second to
    last axis matches ``F_RF.shape[1]``.  With ``only_if_exceeded`` the
    rescaling happens only when the budget is violated.
    """
    power = float(np.sum(np.abs(F_RF @ F_B) ** 2))
    if power == 0:
        raise ZeroProduct("F_RF @ F_B is zero")
    if only_if_exceeded and power <= budget * (1 + 1e-12):
        return F_B
    return F_B * np.sqrt(budget / power)


def design_hybrid_combiner(W_target: np.ndarray, n_rf: int, rng: np.random.Generator, *,
                           tol: float = 1e-4, max_iter: int = 500, bound: float = DPS_BOUND):
    """Decompose one user's ``N_r x (F*N_s)`` combiner target; no power step.

    Returns ``(W_RF, W_BB_concat, history)``.
    """
    return lasso_altmin(W_target, n_rf, rng, tol=tol, max_iter=max_iter, bound=bound)
