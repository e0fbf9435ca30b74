"""Command-line experiment runner: configuration, sweeps, CSV output and manifests.

Usage::

    python -m dps_hybrid --preset desk --mode snr_sweep --out runs/desk
    python -m dps_hybrid --config runs/desk/manifest.txt --out runs/replay
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .altmin import lasso_altmin
from .channel import generate_channel_set
from .config import (ALGORITHMS, SystemConfig, config_to_text, parse_config, parse_range,
                     read_key_values)
from .digital import bd_fully_digital
from .errors import ConfigError
from .evaluation import ExperimentResult, _rng, sweep, trial_seed

log = logging.getLogger("dps_hybrid")

MODES = ("snr_sweep", "rf_sweep", "decompose_only")
RESULTS_HEADER = ["algorithm", "snr_db", "n_rf_tx", "mean_se_bps_hz", "stderr", "trials"]
RAW_HEADER = ["trial", "algorithm", "snr_db", "se_bps_hz"]


def _num(x: float) -> str:
    return repr(float(x))


@dataclass
class RunManifest:
    config: SystemConfig
    mode: str
    created_utc: str
    finished_utc: str = ""
    trial_seeds: List[int] = field(default_factory=list)
    degenerate_draws: int = 0
    outputs: Dict[str, str] = field(default_factory=dict)
    artifact_version: str = __version__

    def to_text(self) -> str:
        lines = [
            f"artifact_version = {self.artifact_version}",
            f"mode = {self.mode}",
            f"created_utc = {self.created_utc}",
            f"finished_utc = {self.finished_utc}",
            f"degenerate_draws = {self.degenerate_draws}",
            f"trial_seeds = {','.join(str(s) for s in self.trial_seeds)}",
        ]
        lines += [f"{k} = {v}" for k, v in self.outputs.items()]
        return "\n".join(lines) + "\n" + config_to_text(self.config)


def write_results_csv(result: ExperimentResult, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in result.rows:
            w.writerow([r.algorithm, _num(r.snr_db), r.n_rf_tx, _num(r.mean_se_bps_hz),
                        _num(r.stderr), r.trials])


def write_raw_csv(result: ExperimentResult, path: Path) -> None:
    # rf sweeps add the RF-chain count as a trailing column
    with_nrf = result.axis == "n_rf_tx"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER + (["n_rf_tx"] if with_nrf else []))
        for trial, algo, snr, n_rf, se in result.raw_records():
            w.writerow([trial, algo, _num(snr), _num(se)] + ([n_rf] if with_nrf else []))


def format_table(result: ExperimentResult) -> str:
    head = f"{'algorithm':<14}{'snr_db':>8}{'n_rf_tx':>9}{'mean SE':>12}{'stderr':>10}{'trials':>8}"
    lines = [head, "-" * len(head)]
    for r in result.rows:
        lines.append(f"{r.algorithm:<14}{r.snr_db:>8.1f}{r.n_rf_tx:>9d}"
                     f"{r.mean_se_bps_hz:>12.4f}{r.stderr:>10.4f}{r.trials:>8d}")
    return "\n".join(lines)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(config: SystemConfig, mode: str, out_dir: Path, workers: int = 1,
        raw: bool = False) -> RunManifest:
    """Run one experiment and write its files under `out_dir`."""
    if mode not in MODES:
        raise ConfigError("mode", f"choose from {', '.join(MODES)}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    manifest = RunManifest(config=config, mode=mode, created_utc=_now())

    if mode == "decompose_only":
        seed = trial_seed(config.master_seed, 0)
        channels = generate_channel_set(config, _rng(seed, 0))
        F_opt = bd_fully_digital(channels, config).F_opt
        _, _, hist = lasso_altmin(F_opt, config.n_rf_tx, _rng(seed, 2, config.n_rf_tx),
                                  tol=config.altmin_tol, max_iter=config.altmin_max_iter)
        path = out_dir / "trajectory.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "objective"])
            for i, obj in enumerate(hist.objective):
                w.writerow([i, _num(obj)])
        norm = np.linalg.norm(F_opt)
        print(f"iterations={hist.iterations} reason={hist.reason} "
              f"residual={hist.objective[-1]:.6g} relative={hist.objective[-1] / norm:.6g}")
        manifest.trial_seeds = [seed]
        manifest.outputs["trajectory_csv"] = str(path)
    else:
        axis = "snr" if mode == "snr_sweep" else "n_rf_tx"

        def progress(done, total):
            if done == total or done % max(total // 10, 1) == 0:
                log.info("%s: %d/%d trials", mode, done, total)

        result = sweep(config, axis, workers=workers, progress=progress)
        results_path = out_dir / "results.csv"
        write_results_csv(result, results_path)
        manifest.outputs["results_csv"] = str(results_path)
        if raw:
            raw_path = out_dir / "raw.csv"
            write_raw_csv(result, raw_path)
            manifest.outputs["raw_csv"] = str(raw_path)
        manifest.trial_seeds = result.trial_seeds
        manifest.degenerate_draws = result.degenerate_draws
        print(format_table(result))
        if result.degenerate_draws:
            log.warning("%d degenerate draws skipped", result.degenerate_draws)

    manifest.finished_utc = _now()
    manifest_path = out_dir / "manifest.txt"
    manifest.outputs["manifest"] = str(manifest_path)
    manifest_path.write_text(manifest.to_text(), encoding="utf-8")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dps-hybrid", description=__doc__.split("\n")[0])
    p.add_argument("--config", type=Path, help="key = value configuration or manifest file")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--mode", choices=MODES, help="default: from the config file, else snr_sweep")
    p.add_argument("--snr", help="SNR grid in dB as start:step:stop (inclusive) or a comma list")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nrf-tx", help="comma list; sets n_rf_tx (snr_sweep) or the rf_sweep grid")
    p.add_argument("--algorithms", help=f"comma list from {','.join(ALGORITHMS)}")
    p.add_argument("--out", type=Path, default=Path("runs"))
    p.add_argument("--threads", type=int, default=1, help="worker processes")
    p.add_argument("--raw", action="store_true", help="also write per-trial raw.csv")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are configuration errors
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        file_mode = None
        if args.config is not None:
            file_mode = read_key_values(args.config).get("mode")
        mode = args.mode or file_mode or "snr_sweep"
        overrides = {}
        if args.snr:
            overrides["snr_grid_db"] = parse_range(args.snr)
        if args.trials is not None:
            overrides["n_trials"] = args.trials
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.algorithms:
            overrides["algorithms"] = args.algorithms
        if args.nrf_tx:
            values = tuple(int(v) for v in args.nrf_tx.split(","))
            if mode == "rf_sweep":
                overrides["n_rf_tx_grid"] = values
            else:
                overrides["n_rf_tx"] = values[0]
        config = parse_config(args.config, args.preset, overrides)
        if mode not in MODES:
            raise ConfigError("mode", f"choose from {', '.join(MODES)}")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except (OSError, ValueError) as exc:
        log.error("config error: %s", exc)
        return 1

    try:
        manifest = run(config, mode, args.out, workers=args.threads, raw=args.raw)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return 2
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        log.error("runtime failure: %s", exc)
        return 2
    log.info("wrote %s", ", ".join(manifest.outputs.values()))
    return 0
