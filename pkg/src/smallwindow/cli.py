"""Command-line front end.

    smallwindow simulate     --regime monotonic --seed 7 --out data/
    smallwindow one-step     --data debutanizer.csv --preset debutanizer --out runs/deb
    smallwindow sweep-window --sim drifting --models pls,rf --windows 2..10,15,20,25 --out runs/w
    smallwindow sweep-delay  --data sru.csv --y-col y1 --exclude y2 --preset sru-h2s \
                             --mode delayed --delays 1..9 --out runs/d

Exit status: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .dataset import Dataset, DatasetLoadError, SplitSpec, jitter_duplicate_y, lag_align, load_csv, write_csv
from .ensemble import ForestConfig
from .harness import (
    STANDARD_DELAY_GRID, STANDARD_WINDOW_GRID, Kind, SweepRow, UpdatePolicy, atomic_write,
    records_csv, summary_csv, summary_dict, sweep_delay, sweep_window_size, write_json,
)
from .numeric import ContractError
from .simulator import REGIMES, SimConfig, generate


@dataclass(frozen=True)
class Preset:
    y_lag: int = 0
    jitter: float | None = None
    lam: float = 0.05
    validation_fraction: float | None = None


PRESETS = {
    "debutanizer": Preset(y_lag=8, lam=0.01, validation_fraction=0.040),
    "sru": Preset(jitter=1e-6, lam=0.05, validation_fraction=0.046),
    "sru-h2s": Preset(jitter=1e-6, lam=0.05, validation_fraction=0.046),
    "sru-so2": Preset(jitter=1e-6, lam=0.05, validation_fraction=0.046),
    "penicillin": Preset(lam=0.10, validation_fraction=0.141),
}


def parse_int_list(text: str) -> list[int]:
    """``"2..10,15,20"`` -> ``[2, ..., 10, 15, 20]``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def parse_models(text: str) -> list[Kind]:
    try:
        return [Kind.parse(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="CSV file (header row, numeric columns)")
    src.add_argument("--sim", choices=REGIMES, help="use a simulated regime instead of a file")
    p.add_argument("--y-col", default=None, help="property column name or index (default: last)")
    p.add_argument("--exclude", default="", help="comma list of columns to leave out of X")
    p.add_argument("--preset", choices=sorted(PRESETS), help="benchmark preprocessing and defaults")
    p.add_argument("--y-lag", type=int, default=None, help="pair y[t] with X[t - lag]")
    p.add_argument("--jitter", type=float, default=None, help="offset for repeated y values")
    p.add_argument("--validation-fraction", type=float, default=None,
                   help="score RMSEP only after this leading fraction of the series")
    p.add_argument("--sim-seed", type=u64, default=0)
    p.add_argument("--n", type=int, default=None, help="simulated sample count")
    p.add_argument("--models", type=parse_models, default=list(Kind),
                   help="comma list from {mmw, pls, rpls, rf, rfpls}")
    p.add_argument("--seed", type=u64, default=0, help="base seed for forest models")
    p.add_argument("--trees", type=int, default=1000)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--min-leaf", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="RPLS forgetting factor")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallwindow", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic dataset as CSV")
    p.add_argument("--regime", choices=REGIMES, required=True)
    p.add_argument("--seed", type=u64, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--variables", type=int, default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--drift-period", type=int, default=240)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")

    p = sub.add_parser("sweep-window", help="RMSEP against window size")
    _add_source(p)
    p.add_argument("--windows", type=parse_int_list, default=list(STANDARD_WINDOW_GRID))
    p.add_argument("--mode", choices=("continuous", "delayed"), default="continuous")
    p.add_argument("--delays", type=parse_int_list, default=[1], help="a single delay")

    p = sub.add_parser("sweep-delay", help="RMSEP against update delay")
    _add_source(p)
    p.add_argument("--delays", type=parse_int_list, default=list(STANDARD_DELAY_GRID))
    p.add_argument("--mode", choices=("continuous", "delayed"), default="delayed")
    p.add_argument("--window", type=int, default=4)

    p = sub.add_parser("one-step", help="one-step-ahead table for all requested models")
    _add_source(p)
    p.add_argument("--window", type=int, default=4)
    return parser


def _load(args) -> tuple[Dataset, dict]:
    preset = PRESETS.get(args.preset, Preset())
    if args.data is not None:
        y_col = args.y_col
        if y_col is None:
            y_col = -1
        elif y_col.lstrip("-").isdigit():
            y_col = int(y_col)
        exclude = [c.strip() for c in args.exclude.split(",") if c.strip()]
        d = load_csv(args.data, y_col, exclude=exclude)
    else:
        d = generate(SimConfig(regime=args.sim, n_samples=args.n, seed=args.sim_seed))
    y_lag = args.y_lag if args.y_lag is not None else preset.y_lag
    jitter = args.jitter if args.jitter is not None else preset.jitter
    if y_lag:
        d = lag_align(d, y_lag)
    if jitter:
        d = jitter_duplicate_y(d, jitter)
    frac = args.validation_fraction
    if frac is None:
        frac = preset.validation_fraction
    score_from = 0
    if frac:
        SplitSpec(frac)
        score_from = math.ceil(frac * d.n_samples - 1e-9)
    lam = args.lam if args.lam is not None else preset.lam
    settings = {
        "source": str(args.data) if args.data is not None else f"sim:{args.sim}",
        "y_col": args.y_col, "exclude": args.exclude, "preset": args.preset, "y_lag": y_lag, "jitter": jitter,
        "validation_fraction": frac, "score_from": score_from, "sim_seed": args.sim_seed,
        "n_samples": d.n_samples, "lambda": lam,
    }
    return d, settings


def _model_kw(args, lam: float) -> dict:
    return {
        "lam": lam, "seed": args.seed,
        "forest": ForestConfig(n_trees=args.trees, mtry=args.mtry, min_leaf=args.min_leaf),
    }


def _emit(out: Path, d: Dataset, rows: list[SweepRow], reports, config: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rec_dir = out / "records"
    rec_dir.mkdir(exist_ok=True)
    for row, rep in zip(rows, reports):
        if rep is not None:
            name = f"{row.model}_w{row.window}_{row.mode}_d{row.delay}.csv"
            atomic_write(rec_dir / name, records_csv(rep.records))
    atomic_write(out / "summary.csv", summary_csv(rows))
    write_json(out / "summary.json", [summary_dict(r, d.name) for r in rows])
    write_json(out / "config.json", config)
    width = max(len(r.model) for r in rows)
    for r in rows:
        rm = "nan" if math.isnan(r.rmsep) else f"{r.rmsep:.6g}"
        tail = f"  ({r.error})" if r.error else ""
        print(f"{r.model:<{width}}  w={r.window:<3d} {r.mode:<10s} d={r.delay:<2d} "
              f"rmsep={rm}  n={r.n}  flagged={r.flagged}{tail}")


def _config(args, settings: dict, **extra) -> dict:
    return {
        "version": __version__, "command": args.command, **settings,
        "models": [k.value for k in args.models], "seed": args.seed, "trees": args.trees,
        "mtry": args.mtry, "min_leaf": args.min_leaf, "out": str(args.out), **extra,
    }


def cmd_simulate(args) -> int:
    cfg = SimConfig(regime=args.regime, n_samples=args.n, n_variables=args.variables,
                    noise_sd=args.noise, seed=args.seed, drift_period=args.drift_period)
    d = generate(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"sim_{args.regime}_seed{args.seed}.csv"
    tmp = path.with_name(f".{path.name}.tmp")
    write_csv(d, tmp)
    tmp.replace(path)
    print(f"{path}\t{d.n_samples} rows")
    return 0


def cmd_sweep_window(args) -> int:
    d, settings = _load(args)
    if len(args.delays) != 1:
        raise ContractError("sweep-window takes a single --delays value")
    need = max(args.windows) + args.delays[0]
    if d.n_samples < need:
        raise ContractError(
            f"dataset has {d.n_samples} samples; window {max(args.windows)} "
            f"needs at least {need}"
        )
    policy = UpdatePolicy(args.mode, args.delays[0])
    rows, reports = sweep_window_size(
        d, args.models, args.windows, policy, settings["score_from"], keep_reports=True,
        **_model_kw(args, settings["lambda"]),
    )
    _emit(args.out, d, rows, reports, _config(args, settings, windows=args.windows,
                                              mode=args.mode, delay=args.delays[0]))
    return 0


def cmd_sweep_delay(args) -> int:
    d, settings = _load(args)
    need = args.window + (max(args.delays) if args.mode == "continuous" else 1)
    if d.n_samples < need:
        raise ContractError(f"dataset has {d.n_samples} samples; needs at least {need}")
    rows, reports = sweep_delay(
        d, args.models, args.delays, args.mode, args.window, settings["score_from"],
        keep_reports=True, **_model_kw(args, settings["lambda"]),
    )
    _emit(args.out, d, rows, reports, _config(args, settings, delays=args.delays,
                                              mode=args.mode, window=args.window))
    return 0


def cmd_one_step(args) -> int:
    d, settings = _load(args)
    if d.n_samples < args.window + 1:
        raise ContractError(f"dataset has {d.n_samples} samples; needs at least {args.window + 1}")
    rows, reports = sweep_window_size(
        d, args.models, [args.window], UpdatePolicy("continuous", 1), settings["score_from"],
        keep_reports=True, **_model_kw(args, settings["lambda"]),
    )
    _emit(args.out, d, rows, reports, _config(args, settings, window=args.window,
                                              mode="continuous", delay=1))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-window": cmd_sweep_window,
    "sweep-delay": cmd_sweep_delay,
    "one-step": cmd_one_step,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DatasetLoadError, ContractError, OSError) as exc:
        print(f"smallwindow: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
