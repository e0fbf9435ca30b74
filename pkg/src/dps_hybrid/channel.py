"""Frequency-selective clustered (Saleh-Valenzuela) mmWave channels for ULAs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig


@dataclass(frozen=True)
class RayParameters:
    """Per-user ray parameters.  Angles in radians.

    Array shapes: cluster means ``(K, N_cl)``; ray angles and gains
    ``(K, N_cl, N_ray)``; ``gamma`` ``(K,)``.
    """

    cluster_mean_aod: np.ndarray
    cluster_mean_aoa: np.ndarray
    ray_aod: np.ndarray
    ray_aoa: np.ndarray
    gains: np.ndarray
    gamma: np.ndarray


@dataclass(frozen=True)
class ChannelSet:
    """Channel matrices ``H`` of shape ``(K, F, N_r, N_t)`` and their rays."""

    H: np.ndarray
    rays: RayParameters

    def __getitem__(self, key):
        return self.H[key]


def array_response_ula(angle, n_elements: int) -> np.ndarray:
    """Half-wavelength ULA response ``exp(j*pi*m*sin(angle)) / sqrt(N)``.

    `angle` may be an array, in which case the element index becomes the
    trailing axis.
    """
    m = np.arange(n_elements)
    phase = np.pi * np.multiply.outer(np.sin(angle), m)
    return np.exp(1j * phase) / np.sqrt(n_elements)


def normalization_gain(path_loss: float, n_tx: int, n_rx: int,
                       n_clusters: int, n_rays: int) -> float:
    return float(np.sqrt(path_loss * n_tx * n_rx / (n_clusters * n_rays)))


def laplacian_scale(config: SystemConfig) -> float:
    spread = np.deg2rad(config.angular_spread_deg)
    return spread / np.sqrt(2.0) if config.spread_convention == "std" else spread


def sample_ray_parameters(config: SystemConfig, rng: np.random.Generator) -> RayParameters:
    """Draw cluster means, Laplacian ray offsets and complex Gaussian gains."""
    K, n_cl, n_ray = config.n_users, config.n_clusters, config.n_rays
    b = laplacian_scale(config)

    mean_aod = rng.uniform(0.0, 2 * np.pi, size=(K, n_cl))
    mean_aoa = rng.uniform(0.0, 2 * np.pi, size=(K, n_cl))
    if b > 0:
        off_aod = rng.laplace(0.0, b, size=(K, n_cl, n_ray))
        off_aoa = rng.laplace(0.0, b, size=(K, n_cl, n_ray))
    else:
        off_aod = off_aoa = np.zeros((K, n_cl, n_ray))
    gains = (rng.standard_normal((K, n_cl, n_ray))
             + 1j * rng.standard_normal((K, n_cl, n_ray))) / np.sqrt(2.0)
    gamma = np.array([normalization_gain(rho, config.n_tx, config.n_rx, n_cl, n_ray)
                      for rho in config.path_loss])
    return RayParameters(
        cluster_mean_aod=mean_aod,
        cluster_mean_aoa=mean_aoa,
        ray_aod=mean_aod[..., None] + off_aod,
        ray_aoa=mean_aoa[..., None] + off_aoa,
        gains=gains,
        gamma=gamma,
    )


def build_channel(rays: RayParameters, k: int, f: int, config: SystemConfig) -> np.ndarray:
    """Channel of user `k` on subcarrier `f`; cluster ``i`` acts as delay tap ``i``."""
    a_r = array_response_ula(rays.ray_aoa[k], config.n_rx)    # (N_cl, N_ray, N_r)
    a_t = array_response_ula(rays.ray_aod[k], config.n_tx)    # (N_cl, N_ray, N_t)
    taps = np.exp(-2j * np.pi * np.arange(config.n_clusters) * f / config.n_subcarriers)
    weights = rays.gains[k] * taps[:, None]
    return rays.gamma[k] * np.einsum("cr,cri,crj->ij", weights, a_r, a_t.conj())


def generate_channel_set(config: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    rays = sample_ray_parameters(config, rng)
    H = np.empty((config.n_users, config.n_subcarriers, config.n_rx, config.n_tx), dtype=complex)
    for k in range(config.n_users):
        # one einsum per user over all subcarriers
        a_r = array_response_ula(rays.ray_aoa[k], config.n_rx)
        a_t = array_response_ula(rays.ray_aod[k], config.n_tx)
        taps = np.exp(-2j * np.pi * np.outer(np.arange(config.n_subcarriers),
                                             np.arange(config.n_clusters)) / config.n_subcarriers)
        weights = taps[:, :, None] * rays.gains[k][None]               # (F, N_cl, N_ray)
        H[k] = rays.gamma[k] * np.einsum("fcr,cri,crj->fij", weights, a_r, a_t.conj())
    return ChannelSet(H=H, rays=rays)
