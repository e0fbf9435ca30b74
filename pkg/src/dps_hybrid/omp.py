"""Spatially sparse OMP hybrid precoding over a ULA steering dictionary.

This is the conventional single-phase-shifter baseline: every analog column
is an array response, so all its entries share the same modulus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .channel import array_response_ula


@dataclass(frozen=True)
class Dictionary:
    columns: np.ndarray
    angles: np.ndarray


def build_dictionary(n_elements: int, size: int) -> Dictionary:
    """Steering vectors on a uniform grid in sine space, ``sin = -1 + 2g/G``."""
    angles = np.arcsin(-1.0 + 2.0 * np.arange(size) / size)
    return Dictionary(columns=array_response_ula(angles, n_elements).T, angles=angles)


def omp_hybrid(F_opt: np.ndarray, dictionary: Dictionary, n_rf: int,
               budget: Optional[float] = None, residual_log: Optional[List[float]] = None):
    """Greedy atom selection with least-squares digital weights.

    Parameters
    ----------
    F_opt : np.ndarray
        Target matrix, ``N x M``.
    dictionary : Dictionary
        Candidate analog columns.
    n_rf : int
        Number of atoms (RF chains) to pick.
    budget : float, optional
        If given, the digital part is scaled so ``||F_RF F_BB||_F^2 == budget``.
    residual_log : list, optional
        Receives the residual Frobenius norm before and after every pick.

    Returns
    -------
    (F_RF, F_BB, selected) : (np.ndarray, np.ndarray, list of int)
    """
    A = dictionary.columns
    if n_rf > A.shape[1]:
        raise ValueError("n_rf exceeds the dictionary size")
    selected: List[int] = []
    residual = F_opt
    F_BB = np.zeros((0, F_opt.shape[1]), dtype=complex)
    if residual_log is not None:
        residual_log.append(float(np.linalg.norm(residual)))
    for _ in range(n_rf):
        score = np.sum(np.abs(A.conj().T @ residual) ** 2, axis=1)
        score[selected] = -np.inf
        selected.append(int(np.argmax(score)))
        F_RF = A[:, selected]
        F_BB = np.linalg.lstsq(F_RF, F_opt, rcond=None)[0]
        residual = F_opt - F_RF @ F_BB
        if residual_log is not None:
            residual_log.append(float(np.linalg.norm(residual)))
    F_RF = A[:, selected]
    if budget is not None:
        power = np.linalg.norm(F_RF @ F_BB) ** 2
        if power > 0:
            F_BB = F_BB * np.sqrt(budget / power)
    return F_RF, F_BB, selected
