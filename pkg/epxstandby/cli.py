"""
command-line interface: simulate data, estimate system reliability, run the
goodness-of-fit tests and replication studies, and plot estimated curves
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .distributions import Exponential, Weibull
from .estimation import HotSample, WarmSample, estimate_all
from .gof import HYPOTHESES, GofData, run_test
from .model import ScaleAFT, StandbyModel, SystemConfig, make_rng, simulate_system
from .montecarlo import McConfig, mc_power, mc_significance
from .plotting import curve_figure, write_figure
from .utils import (
    default_seed,
    json_safe,
    load_config,
    read_curves,
    read_times,
    write_json,
    write_times,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ERROR = 2


def _progress_bar(done: int, total: int) -> None:
    n = int(50 * done / total)
    bar = "".join(("=" * n, " " * (50 - n)))
    per = 100 * done / total
    sys.stderr.write(f"\r\tprogress: [{bar}] {per:.2f}% done.")
    if done == total:
        sys.stderr.write("\n")
    sys.stderr.flush()


def _merge(args: argparse.Namespace, config: Dict, key: str, default=None):
    """
    command-line value if given, else the config file value, else `default`
    """
    val = getattr(args, key, None)
    if val is not None:
        return val
    return config.get(key, default)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _hot_dist(family: str, rate: float, shape: float):
    if family == "weibull":
        return Weibull(shape, 1.0 / rate)
    return Exponential(rate)


def cmd_simulate(args: argparse.Namespace) -> int:
    """
    Simulate hot, warm and system samples and write them with a manifest.
    """
    config = load_config(args.config) if args.config else {}
    n = int(_merge(args, config, "n", 100))
    n1 = int(_merge(args, config, "n1", n))
    n2 = int(_merge(args, config, "n2", n))
    m = int(_merge(args, config, "m", 2))
    rate = float(_merge(args, config, "rate", 1.0))
    r = float(_merge(args, config, "r", 0.5))
    p = float(_merge(args, config, "p", 0.0))
    t1 = _merge(args, config, "t1", None)
    t1 = math.inf if t1 is None else float(t1)
    family = _merge(args, config, "family", "exponential")
    shape = float(_merge(args, config, "shape", 1.0))
    seed = default_seed(seed=_merge(args, config, "seed"))
    if min(n, n1, n2) < 1:
        msg = f"sample sizes must be positive, got n={n}, n1={n1}, n2={n2}"
        raise ValueError(msg)

    model = StandbyModel(_hot_dist(family, rate, shape), ScaleAFT(r), damage_p=p)
    rng = make_rng(seed)
    hot = model.hot.sample(rng, n1)
    warm = model.warm.sample(rng, n2)
    warm = warm[warm <= t1]
    systems = simulate_system(rng, SystemConfig(m, model), size=n)

    out = _out_dir(args.out)
    write_times(out / "hot.csv", hot)
    write_times(out / "warm.csv", warm)
    write_times(out / "systems.csv", systems)
    manifest = {
        "version": __version__,
        "seed": seed,
        "m": m,
        "n": n,
        "n1": n1,
        "n2": n2,
        "t1": t1,
        "m2": int(warm.size),
        "damage_p": p,
        "r": r,
        "hot": model.hot.to_dict(),
        "warm": model.warm.to_dict(),
    }
    write_json(out / "manifest.json", manifest)
    print(f"wrote {n1} hot, {warm.size} warm and {n} system lifetimes to {out}")
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    """
    Estimate r, the unit distributions, K_2..K_m and the mean lifetime.
    """
    manifest = {}
    if args.manifest:
        with open(args.manifest) as f:
            manifest = json.load(f)
    hot = HotSample(read_times(args.hot, allow_empty=False))
    warm_times = read_times(args.warm)
    t1 = _merge(args, manifest, "t1", None)
    t1 = math.inf if t1 is None else float(t1)
    n2 = _merge(args, manifest, "n2", None)
    if n2 is None or math.isinf(t1):
        n2 = warm_times.size
    warm = WarmSample(warm_times, n2=int(n2), t1=t1)

    result = estimate_all(hot, warm, args.m)

    out = _out_dir(args.out)
    report = result.to_dict()
    report.update(n1=hot.n1, n2=warm.n2, m2=warm.m2, t1=warm.t1)
    write_json(out / "report.json", report)
    result.curves().to_csv(out / "curves.csv", index=False, lineterminator="\n")
    print(json.dumps(json_safe(report)))
    return EXIT_OK


def cmd_gof(args: argparse.Namespace) -> int:
    """
    Run a goodness-of-fit test; the exit code is 1 when it rejects.
    """
    data = GofData(
        read_times(args.systems, allow_empty=False),
        read_times(args.hot, allow_empty=False),
        read_times(args.warm, allow_empty=False),
    )
    result = run_test(data, args.hypothesis, args.alpha)
    if args.out:
        write_json(args.out, result.to_dict())
    print(json.dumps(result.to_dict()))
    return EXIT_REJECTED if result.reject else EXIT_OK


def _mc_config(args: argparse.Namespace):
    config = load_config(args.config) if args.config else {}
    params = dict(config)
    overrides = {
        "replications": args.reps,
        "n1": args.n1,
        "n2": args.n2,
        "rate": args.rate,
        "r": args.r,
        "alpha": args.alpha,
        "hypothesis": args.hypothesis,
        "master_seed": args.seed,
        "parallelism": args.parallelism,
        "family": args.family,
        "shape": args.shape,
    }
    params.update({key: val for key, val in overrides.items() if val is not None})
    params["master_seed"] = default_seed(seed=params.get("master_seed"))
    n_grid = args.n or config.get("n_grid") or [params.get("n", 100)]
    params["n"] = n_grid[0]
    return McConfig.from_dict(params), n_grid, config


def _write_report(report, args: argparse.Namespace) -> None:
    out = _out_dir(args.out)
    report.to_csv(out / "report.csv")
    report.to_json(out / "report.json")
    if report.trace is not None:
        report.trace.to_csv(out / "trace.csv", index=False, lineterminator="\n")
    sys.stderr.write(f"finished in {report.elapsed_seconds:.1f} s\n")
    print(report.to_frame().to_string(index=False))


def cmd_mc_level(args: argparse.Namespace) -> int:
    """
    Estimate the significance level of a test over a grid of sample sizes.
    """
    config, n_grid, _ = _mc_config(args)
    progress = None if args.quiet else _progress_bar
    report = mc_significance(config, n_grid, trace=args.trace, progress=progress)
    _write_report(report, args)
    return EXIT_OK


def cmd_mc_power(args: argparse.Namespace) -> int:
    """
    Estimate the power of a test over a grid of sample sizes and damage
    probabilities.
    """
    config, n_grid, file_config = _mc_config(args)
    p_grid = args.p or file_config.get("p_grid") or [0.1, 0.25, 0.5, 0.75]
    progress = None if args.quiet else _progress_bar
    report = mc_power(config, n_grid, p_grid, trace=args.trace, progress=progress)
    _write_report(report, args)
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    """
    Plot curves written by ``estimate``.
    """
    curves = read_curves(args.curves)
    if args.columns:
        missing = [col for col in args.columns if col not in curves.columns]
        if missing:
            msg = f"columns {missing} are not in {args.curves}"
            raise ValueError(msg)
        curves = curves[["time"] + args.columns]
    fig = curve_figure(curves, title=args.title)
    fname = write_figure(fig, args.out)
    print(f"wrote {fname}")
    return EXIT_OK


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rate", type=float, help="failure rate of a hot unit (default 1)")
    parser.add_argument("--r", type=float, help="warm to hot time scale ratio (default 0.5)")
    parser.add_argument(
        "--family",
        choices=["exponential", "weibull"],
        help="hot lifetime family (default exponential)",
    )
    parser.add_argument("--shape", type=float, help="Weibull shape (default 1)")
    parser.add_argument("--seed", type=int, help="master seed (default $EPX_STANDBY_SEED)")


def _add_mc_args(parser: argparse.ArgumentParser) -> None:
    _add_model_args(parser)
    parser.add_argument("--config", help="JSON study config, or a bundled name such as level_study")
    parser.add_argument("--reps", type=int, help="replications per cell (default 3000)")
    parser.add_argument("--n", type=int, nargs="+", help="system sample sizes")
    parser.add_argument("--n1", type=int, help="hot sample size (default n)")
    parser.add_argument("--n2", type=int, help="warm sample size (default n)")
    parser.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    parser.add_argument("--hypothesis", choices=HYPOTHESES, help="default h0star")
    parser.add_argument("--parallelism", type=int, help="worker processes (default 1)")
    parser.add_argument("--trace", action="store_true", help="also write trace.csv")
    parser.add_argument("--quiet", action="store_true", help="no progress bar")
    parser.add_argument("--out", default=".", help="output directory")


def _get_cli_parser() -> argparse.ArgumentParser:
    """
    build the parser with one sub-command per task
    """
    parser = argparse.ArgumentParser(
        prog="epx-standby",
        description=(
            "Simulate, estimate and test redundant systems with warm stand-by units."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate hot, warm and system samples")
    _add_model_args(p)
    p.add_argument("--config", help="JSON config, or a bundled name such as estimation_n100")
    p.add_argument("--n", type=int, help="number of systems (default 100)")
    p.add_argument("--n1", type=int, help="hot sample size (default n)")
    p.add_argument("--n2", type=int, help="warm sample size (default n)")
    p.add_argument("--m", type=int, help="units per system (default 2)")
    p.add_argument("--p", type=float, help="switch damage probability (default 0)")
    p.add_argument("--t1", type=float, help="warm censoring time (default inf)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate system reliability and mean lifetime")
    p.add_argument("--hot", required=True, help="csv of hot failure times")
    p.add_argument("--warm", required=True, help="csv of warm failure times")
    p.add_argument("--manifest", help="manifest.json written by simulate, for n2 and t1")
    p.add_argument("--t1", type=float, help="warm censoring time (default inf)")
    p.add_argument("--n2", type=int, help="warm units on test (default: observed count)")
    p.add_argument("--m", type=int, default=2, help="units per system (default 2)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("gof", help="goodness-of-fit test; exit 1 when rejected")
    p.add_argument("--systems", required=True, help="csv of system lifetimes")
    p.add_argument("--hot", required=True, help="csv of hot failure times")
    p.add_argument("--warm", required=True, help="csv of warm failure times")
    p.add_argument("--hypothesis", choices=HYPOTHESES, default="h0star")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", help="also write the result to this JSON file")
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("mc-level", help="replication study of the significance level")
    _add_mc_args(p)
    p.set_defaults(func=cmd_mc_level)

    p = sub.add_parser("mc-power", help="replication study of the power")
    _add_mc_args(p)
    p.add_argument("--p", type=float, nargs="+", help="switch damage probabilities")
    p.set_defaults(func=cmd_mc_power)

    p = sub.add_parser("plot", help="plot curves written by estimate")
    p.add_argument("--curves", required=True, help="curves.csv written by estimate")
    p.add_argument("--out", required=True, help="output .svg or .html file")
    p.add_argument("--title", help="figure title")
    p.add_argument("--columns", nargs="+", help="subset of curves, e.g. F1 K2 K3 K4")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line and return its exit code.

    Errors are written to stderr and give exit code 2.
    """
    parser = _get_cli_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as err:
        sys.stderr.write(f"epx-standby {args.command}: error: {err}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
