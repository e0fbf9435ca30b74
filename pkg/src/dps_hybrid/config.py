"""Scenario configuration, presets and the flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple

import numpy as np

from .errors import ConfigError

ALGORITHMS = ("fully_digital", "altmin_bd", "altmin_no_bd", "omp")

# Keys that may appear in a run manifest but are not scenario parameters.
MANIFEST_ONLY_KEYS = frozenset({
    "artifact_version", "created_utc", "finished_utc", "mode", "trial_seeds",
    "results_csv", "raw_csv", "manifest", "trajectory_csv", "degenerate_draws",
    "workers",
})


@dataclass(frozen=True)
class SystemConfig:
    """All dimensions, channel statistics and Monte Carlo settings of a scenario.

    Angles are in degrees, SNR in dB.  ``path_loss`` holds one value per user.
    ``spread_convention`` selects how ``angular_spread_deg`` maps to the
    Laplacian scale ``b``: ``"std"`` gives ``b = spread / sqrt(2)`` (the
    offset standard deviation equals the spread), ``"scale"`` uses
    ``b = spread`` directly.
    """

    n_tx: int = 32
    n_rx: int = 4
    n_users: int = 2
    n_subcarriers: int = 8
    n_streams: int = 2
    n_rf_tx: int = 4
    n_rf_rx: int = 2
    n_clusters: int = 3
    n_rays: int = 8
    angular_spread_deg: float = 10.0
    path_loss: Tuple[float, ...] = (1.0, 1.0)
    snr_grid_db: Tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    n_trials: int = 100
    master_seed: int = 1
    altmin_tol: float = 1e-4
    altmin_max_iter: int = 500
    spread_convention: str = "std"
    n_rf_tx_grid: Tuple[int, ...] = (4, 6, 8)
    rf_sweep_snr_db: float = 5.0
    omp_grid_factor: int = 2
    omp_with_bd: bool = True
    algorithms: Tuple[str, ...] = ALGORITHMS

    def __post_init__(self):
        validate(self)

    @property
    def budget(self) -> float:
        """Transmit power budget ``K * N_s * F``."""
        return float(self.n_users * self.n_streams * self.n_subcarriers)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def validate(cfg: SystemConfig) -> None:
    """Raise :class:`ConfigError` on the first violated constraint."""
    for name in ("n_tx", "n_rx", "n_users", "n_subcarriers", "n_streams",
                 "n_rf_tx", "n_rf_rx", "n_clusters", "n_rays", "n_trials",
                 "altmin_max_iter", "omp_grid_factor"):
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
            raise ConfigError(name, f"must be a positive integer, got {value!r}")
    if cfg.angular_spread_deg < 0:
        raise ConfigError("angular_spread_deg", "must be nonnegative")
    if len(cfg.path_loss) != cfg.n_users:
        raise ConfigError("path_loss", f"needs {cfg.n_users} entries, got {len(cfg.path_loss)}")
    if any(p <= 0 for p in cfg.path_loss):
        raise ConfigError("path_loss", "entries must be positive")
    if not cfg.snr_grid_db:
        raise ConfigError("snr_grid_db", "must not be empty")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
    if not cfg.altmin_tol > 0:
        raise ConfigError("altmin_tol", "must be positive")
    if cfg.spread_convention not in ("std", "scale"):
        raise ConfigError("spread_convention", "must be 'std' or 'scale'")

    kns = cfg.n_users * cfg.n_streams
    if not kns <= cfg.n_rf_tx <= cfg.n_tx:
        raise ConfigError("n_rf_tx", f"RF-chain bound K*N_s <= N_RF^t <= N_t violated "
                                     f"({kns} <= {cfg.n_rf_tx} <= {cfg.n_tx})")
    if not cfg.n_streams <= cfg.n_rf_rx <= cfg.n_rx:
        raise ConfigError("n_rf_rx", f"RF-chain bound N_s <= N_RF^r <= N_r violated "
                                     f"({cfg.n_streams} <= {cfg.n_rf_rx} <= {cfg.n_rx})")
    if not cfg.n_tx > (cfg.n_users - 1) * cfg.n_rx:
        raise ConfigError("n_tx", "must exceed (K-1)*N_r for a nonempty BD null space")
    if cfg.n_tx - (cfg.n_users - 1) * cfg.n_rx < cfg.n_streams:
        raise ConfigError("n_streams", "BD null space is smaller than the number of streams")
    if cfg.n_streams > cfg.n_rx:
        raise ConfigError("n_streams", "cannot exceed N_r")
    for n_rf in cfg.n_rf_tx_grid:
        if not kns <= n_rf <= cfg.n_tx:
            raise ConfigError("n_rf_tx_grid", f"value {n_rf} outside [K*N_s, N_t] = [{kns}, {cfg.n_tx}]")
    unknown = set(cfg.algorithms) - set(ALGORITHMS)
    if unknown or not cfg.algorithms:
        raise ConfigError("algorithms", f"choose from {', '.join(ALGORITHMS)}")


DESK = SystemConfig()

PAPER = SystemConfig(
    n_tx=256, n_rx=16, n_users=3, n_subcarriers=128, n_streams=3,
    n_rf_tx=9, n_rf_rx=3, n_clusters=3, n_rays=8, angular_spread_deg=10.0,
    path_loss=(1.0, 1.0, 1.0), n_trials=5000,
    n_rf_tx_grid=(9, 10, 11, 12, 13, 14, 15),
)

PRESETS = {"desk": DESK, "paper": PAPER}


# --------------------------------------------------------------------------
# flat key = value text format
# --------------------------------------------------------------------------
def _field_kinds():
    return {f.name: f.type for f in fields(SystemConfig)}


def _parse_value(name: str, text: str) -> Any:
    kind = _field_kinds()[name]
    text = text.strip()
    try:
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            return float(text)
        if kind == "bool":
            lowered = text.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return lowered in ("true", "1", "yes")
        if kind == "str":
            return text
        items = [t.strip() for t in text.split(",") if t.strip()]
        if kind == "Tuple[int, ...]":
            return tuple(int(t, 0) for t in items)
        if kind == "Tuple[float, ...]":
            return tuple(float(t) for t in items)
        return tuple(items)
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as {kind}") from None


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(format_value(v) for v in value)
    return str(value)


def read_key_values(path: Path) -> dict:
    """Read a ``key = value`` file; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}", "expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def config_to_text(cfg: SystemConfig) -> str:
    return "".join(f"{f.name} = {format_value(getattr(cfg, f.name))}\n"
                   for f in fields(SystemConfig))


def parse_config(path: Optional[Path] = None, preset: str = "desk",
                 overrides: Optional[Mapping[str, Any]] = None) -> SystemConfig:
    """Build a validated configuration.

    Values are layered: preset defaults, then the file at `path` (if given),
    then `overrides` (already-typed values, typically from CLI flags).
    String values in `overrides` are parsed like file values.  A scalar
    ``path_loss`` is broadcast to all users.
    """
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}")
    kinds = _field_kinds()
    merged = {f.name: getattr(PRESETS[preset], f.name) for f in fields(SystemConfig)}
    explicit = set()

    layers = []
    if path is not None:
        layers.append(read_key_values(Path(path)))
    if overrides:
        layers.append(dict(overrides))
    for layer in layers:
        for key, value in layer.items():
            if key in MANIFEST_ONLY_KEYS:
                continue
            if key not in kinds:
                raise ConfigError(key, "unknown configuration key")
            merged[key] = _parse_value(key, value) if isinstance(value, str) else value
            explicit.add(key)

    for key in ("path_loss", "snr_grid_db", "n_rf_tx_grid", "algorithms"):
        if isinstance(merged[key], (list, np.ndarray)):
            merged[key] = tuple(merged[key])
        elif not isinstance(merged[key], tuple):
            merged[key] = (merged[key],)
    if len(merged["path_loss"]) == 1 and merged["n_users"] != 1:
        merged["path_loss"] = merged["path_loss"] * merged["n_users"]
    elif "path_loss" not in explicit and len(merged["path_loss"]) != merged["n_users"]:
        merged["path_loss"] = (1.0,) * merged["n_users"]
    if "n_rf_tx_grid" not in explicit:
        kns = merged["n_users"] * merged["n_streams"]
        grid = tuple(n for n in merged["n_rf_tx_grid"] if kns <= n <= merged["n_tx"])
        merged["n_rf_tx_grid"] = grid or (max(kns, merged["n_rf_tx"]),)
    return SystemConfig(**merged)


def parse_range(text: str) -> Tuple[float, ...]:
    """Parse ``start:step:stop`` (stop inclusive) or a comma list into floats."""
    if ":" not in text:
        return tuple(float(t) for t in text.split(",") if t.strip())
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError("snr_grid_db", f"expected start:step:stop, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError("snr_grid_db", f"empty or invalid range {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))
