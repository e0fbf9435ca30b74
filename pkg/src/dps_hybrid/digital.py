"""Fully digital block-diagonalization (BD) precoder and combiners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .config import SystemConfig
from .errors import DegenerateChannel

RANK_RTOL = 1e-10


def null_space(A: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the right null space of `A` (columns).

    Singular values below ``rtol * s_max`` count as zero.
    """
    n = A.shape[1]
    if A.size == 0:
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return Vh[rank:].conj().T


def concat_blocks(blocks: np.ndarray) -> np.ndarray:
    """``(K, F, rows, N_s)`` blocks -> ``rows x (K*F*N_s)``, ordered ``(k, f, stream)``."""
    K, F, rows, ns = blocks.shape
    return blocks.transpose(2, 0, 1, 3).reshape(rows, K * F * ns)


def split_blocks(M: np.ndarray, n_users: int, n_subcarriers: int) -> np.ndarray:
    """Inverse of :func:`concat_blocks`."""
    rows, cols = M.shape
    ns = cols // (n_users * n_subcarriers)
    return M.reshape(rows, n_users, n_subcarriers, ns).transpose(1, 2, 0, 3)


@dataclass(frozen=True)
class FullyDigitalPrecoder:
    """BD target.  ``blocks``: ``(K, F, N_t, N_s)``; ``combiners``: ``(K, F, N_r, N_s)``."""

    blocks: np.ndarray
    combiners: np.ndarray

    @property
    def F_opt(self) -> np.ndarray:
        return concat_blocks(self.blocks)

    def user_combiner_target(self, k: int) -> np.ndarray:
        """User `k`'s combiners across subcarriers, ``N_r x (F*N_s)``."""
        return concat_blocks(self.combiners[k:k + 1])


def bd_precoder_for_user(H_user: np.ndarray, H_others: np.ndarray, n_streams: int):
    """BD precoder and combiner for one user on one subcarrier.

    Returns ``(F, W)`` with ``F = V0 @ V_s`` and ``W = U_s`` where ``V0`` spans
    the null space of `H_others` and ``U_s, V_s`` are the leading singular
    vectors of ``H_user @ V0``.
    """
    V0 = null_space(H_others)
    if V0.shape[1] < n_streams:
        raise DegenerateChannel(f"null space dimension {V0.shape[1]} < {n_streams} streams")
    U, s, Vh = np.linalg.svd(H_user @ V0, full_matrices=False)
    if s.size < n_streams or s[n_streams - 1] <= RANK_RTOL * max(s[0], np.finfo(float).tiny):
        raise DegenerateChannel("projected channel rank below the number of streams")
    return V0 @ Vh[:n_streams].conj().T, U[:, :n_streams]


def bd_fully_digital(channels: ChannelSet, config: SystemConfig) -> FullyDigitalPrecoder:
    """Classical BD with equal power per stream (unit-norm precoder columns)."""
    H = channels.H if isinstance(channels, ChannelSet) else np.asarray(channels)
    K, F, n_rx, n_tx = H.shape
    ns = config.n_streams
    blocks = np.empty((K, F, n_tx, ns), dtype=complex)
    combiners = np.empty((K, F, n_rx, ns), dtype=complex)
    for f in range(F):
        for k in range(K):
            others = np.concatenate([H[j, f] for j in range(K) if j != k], axis=0) \
                if K > 1 else np.zeros((0, n_tx), dtype=complex)
            blocks[k, f], combiners[k, f] = bd_precoder_for_user(H[k, f], others, ns)
    return FullyDigitalPrecoder(blocks=blocks, combiners=combiners)
