"""Baseband BD stage that cancels residual interuser interference of a hybrid precoder."""

from __future__ import annotations

import numpy as np

from .digital import RANK_RTOL, null_space
from .errors import InsufficientNullSpace


def effective_channel(W_BB: np.ndarray, W_RF: np.ndarray, H: np.ndarray,
                      F_RF: np.ndarray, F_BB_f: np.ndarray) -> np.ndarray:
    """``W_BB^H W_RF^H H F_RF F_BB_f``; `F_BB_f` is the ``N_RF^t x (K*N_s)`` composite."""
    return W_BB.conj().T @ (W_RF.conj().T @ (H @ (F_RF @ F_BB_f)))


def composite_digital(F_BB: np.ndarray, f: int) -> np.ndarray:
    """Stack the digital blocks of all users on subcarrier `f` side by side."""
    return np.concatenate(list(F_BB[:, f]), axis=1)


def bd_cancel(H_eff: np.ndarray, n_streams: int) -> np.ndarray:
    """BD precoders for one subcarrier.

    Parameters
    ----------
    H_eff : np.ndarray
        Effective channels, shape ``(K, N_s, K*N_s)``.
    n_streams : int
        Streams per user.

    Returns
    -------
    np.ndarray
        ``(K, K*N_s, N_s)``; block ``k`` spans the null space of the other
        users' effective channels, rotated onto the leading right singular
        vectors of user ``k``'s projected channel.
    """
    K, _, dim = H_eff.shape
    out = np.empty((K, dim, n_streams), dtype=complex)
    for k in range(K):
        others = np.concatenate([H_eff[j] for j in range(K) if j != k], axis=0) \
            if K > 1 else np.zeros((0, dim), dtype=complex)
        V0 = null_space(others, RANK_RTOL)
        if V0.shape[1] < n_streams:
            raise InsufficientNullSpace(
                f"user {k}: null space dimension {V0.shape[1]} < {n_streams}")
        _, _, Vh = np.linalg.svd(H_eff[k] @ V0, full_matrices=True)
        out[k] = V0 @ Vh[:n_streams].conj().T
    return out


def cascade(F_BB_f: np.ndarray, F_BD_kf: np.ndarray) -> np.ndarray:
    """Final digital block ``F_BB_f @ F_BD_kf`` of shape ``N_RF^t x N_s``."""
    return F_BB_f @ F_BD_kf


def cancel_interference(H: np.ndarray, F_RF: np.ndarray, F_BB: np.ndarray,
                        W_RF: np.ndarray, W_BB: np.ndarray) -> np.ndarray:
    """Run the effective-channel / BD / cascade chain on every subcarrier.

    Shapes: `H` ``(K, F, N_r, N_t)``, `F_BB` ``(K, F, N_RF^t, N_s)``, `W_RF`
    ``(K, N_r, N_RF^r)``, `W_BB` ``(K, F, N_RF^r, N_s)``.  Returns the
    cascaded digital blocks ``(K, F, N_RF^t, N_s)``.
    """
    K, F = H.shape[:2]
    ns = F_BB.shape[-1]
    F_B = np.empty_like(F_BB)
    for f in range(F):
        F_BB_f = composite_digital(F_BB, f)
        H_eff = np.stack([effective_channel(W_BB[k, f], W_RF[k], H[k, f], F_RF, F_BB_f)
                          for k in range(K)])
        F_BD = bd_cancel(H_eff, ns)
        for k in range(K):
            F_B[k, f] = cascade(F_BB_f, F_BD[k])
    return F_B
