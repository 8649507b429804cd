"""Command line: ``twostage {se-vs-time,se-vs-snr,selftest} [options]``.

Experiments write ``results.csv`` and ``manifest.txt`` to ``--out``. The
manifest starts with ``#`` metadata lines followed by the fully resolved
configuration, so ``--config manifest.txt`` reproduces a run exactly.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .config import ConfigError, ScenarioConfig, format_config, parse_config, parse_grid
from .errors import ConfigurationError
from .results import write_results
from .scenario import run_se_vs_snr, run_se_vs_time

__all__ = ["build_parser", "run_cli", "write_manifest", "main"]

_RUNNERS = {"se-vs-time": run_se_vs_time, "se-vs-snr": run_se_vs_snr}


class _Parser(argparse.ArgumentParser):
    # report usage errors through run_cli's return code instead of exiting
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twostage", description="Two-stage digital combining experiments.")
    parser.add_argument("experiment", choices=[*_RUNNERS, "selftest"])
    parser.add_argument("--config", type=Path, help="key = value config file; defaults when omitted")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit master seed")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    parser.add_argument("--trials", type=int, help="override the number of Monte Carlo trials")
    parser.add_argument("--snr-grid", help='SNR grid in dB, "start:stop:step" or a comma list')
    return parser


def write_manifest(path: Path, cfg: ScenarioConfig, source: str, wall_time_s: float) -> None:
    lines = [
        f"# config_source = {source}",
        f"# seed = {cfg.seed}",
        f"# tool_version = {__version__}",
        f"# wall_time_s = {wall_time_s:.3f}",
        f"# rho = {cfg.rho!r} (pilot-overhead factor applied to every reported SE)",
        "# snr_definition = P_t - PL_LOS - noise_power (dB), P_r fixed",
    ]
    path.write_text("\n".join(lines) + "\n" + format_config(cfg))


def _resolve_config(args) -> tuple[ScenarioConfig, str]:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.snr_grid is not None:
        try:
            overrides["snr_grid_dB"] = parse_grid(args.snr_grid)
        except ValueError as exc:
            raise ConfigError(f"--snr-grid: {exc}") from None
    if args.config is None:
        return parse_config(None, overrides), "defaults"
    if not args.config.is_file():
        raise ConfigError(f"config file not found: {args.config}")
    return parse_config(args.config, overrides), str(args.config)


def _join_grid_value(argv):
    # "--snr-grid -10:20:5" would otherwise read the grid as an option
    argv = list(argv)
    for i, token in enumerate(argv[:-1]):
        if token == "--snr-grid":
            argv[i : i + 2] = [f"--snr-grid={argv[i + 1]}"]
            break
    return argv


def run_cli(argv=None, out=print) -> int:
    """Run one command; returns the process exit code."""
    argv = _join_grid_value(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.experiment == "selftest":
            from .selftest import run_selftest

            return 0 if run_selftest(out=out) else 1

        cfg, source = _resolve_config(args)
        args.out.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        result = _RUNNERS[args.experiment](cfg)
        elapsed = time.perf_counter() - started
        write_results(result.records, args.out / "results.csv")
        write_manifest(args.out / "manifest.txt", cfg, source, elapsed)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out(f"wrote {args.out / 'results.csv'} and {args.out / 'manifest.txt'} ({elapsed:.1f} s)")
    return 0


def main() -> None:
    sys.exit(run_cli())
