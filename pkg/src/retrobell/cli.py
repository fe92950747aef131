"""Command-line entry point: propertime, simulate, chsh, validate.

All numeric output is serialized with 17 significant digits so every double
round-trips exactly; re-running with the same config and seed reproduces
byte-identical data files regardless of worker count.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import __version__
from .config import ConfigError, RunSettings, echo_dict, load_settings
from .ensemble import EnsembleResult, run_experiment
from .packets import EARTH, ROCKET
from .relativity import scenario_proper_times
from .selfcheck import run_all
from .stats import NoOutcomesError, chsh_details, correlation_estimate, plate_histogram, spot_widths

USAGE_EXIT = 2
FAILURE_EXIT = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _to_json(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits (bools before ints!)."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {_to_json(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(str(obj))


def _write_json(path: Path, obj) -> None:
    path.write_text(_to_json(obj) + "\n")


def _write_trials_csv(path: Path, result: EnsembleResult) -> None:
    lines = ["trial,i1,i2,x_r0,x_e0,x_rf,x_ef,o_r,o_e,fail_r,fail_e"]
    for r in result.records:
        lines.append(
            ",".join(
                [
                    str(r.index),
                    str(r.i1),
                    str(r.i2),
                    _fmt(r.x_r0),
                    _fmt(r.x_e0),
                    _fmt(r.x_rf),
                    _fmt(r.x_ef),
                    "" if r.o_r is None else str(r.o_r),
                    "" if r.o_e is None else str(r.o_e),
                    "1" if r.fail_r else "0",
                    "1" if r.fail_e else "0",
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_plate_csv(path: Path, result: EnsembleResult, wing: str, bins: int) -> None:
    lines = ["bin_lo,bin_hi,count"]
    if not result.failed(wing):
        hist = plate_histogram(result.records, wing, bins)
        for lo, hi, count in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
            lines.append(f"{_fmt(lo)},{_fmt(hi)},{int(count)}")
    path.write_text("\n".join(lines) + "\n")


def _summary_dict(settings: RunSettings, result: EnsembleResult) -> dict:
    summary: dict = {
        "settings": echo_dict(settings),
        "delta_tau": {
            "earth": result.tau_e,
            "rocket": result.tau_r,
            "ratio": result.tau_r / result.tau_e if result.tau_e else None,
        },
        "overlap": {
            ROCKET: result.overlap[ROCKET],
            EARTH: result.overlap[EARTH],
            "threshold": result.config.overlap_threshold,
            "failed": {ROCKET: result.failed(ROCKET), EARTH: result.failed(EARTH)},
        },
        "counts": {
            f"{'+' if a > 0 else '-'}{'+' if b > 0 else '-'}": result.counts.get((a, b), 0)
            for a in (1, -1)
            for b in (1, -1)
        }
        if result.counts
        else {},
    }
    try:
        est = correlation_estimate(result.records)
        summary["correlation"] = {
            "value": est.value,
            "stderr": est.stderr,
            "count": est.count,
        }
    except NoOutcomesError as exc:
        summary["correlation"] = None
        summary["correlation_note"] = str(exc)
    wings = {}
    for wing in (ROCKET, EARTH):
        if result.failed(wing):
            wings[wing] = None
            continue
        hist = plate_histogram(result.records, wing, settings.bins)
        wings[wing] = {
            "spot_centers": {str(k): v for k, v in sorted(hist.spot_centers.items())},
            "separation": hist.separation,
            "spot_widths": {str(k): v for k, v in sorted(spot_widths(result.records, wing).items())},
            "plate_count": hist.total,
        }
    summary["plates"] = wings
    return summary


def _manifest(settings: RunSettings, command: str, result, elapsed: float) -> dict:
    tau_e = tau_r = None
    if result is not None:
        tau_e, tau_r = result.tau_e, result.tau_r
    else:
        pt = scenario_proper_times(settings.experiment.scenario)
        tau_e, tau_r = pt.delta_tau_e, pt.delta_tau_r
    return {
        "command": command,
        "version": __version__,
        "seed": settings.experiment.seed,
        "trials": settings.experiment.trials,
        "delta_tau": {"earth": tau_e, "rocket": tau_r},
        "config": echo_dict(settings),
        "wall_clock_s": elapsed,
    }


def _cmd_propertime(settings: RunSettings, out: Optional[Path], quiet: bool) -> int:
    pt = scenario_proper_times(settings.experiment.scenario)
    print(f"delta_tau_e = {_fmt(pt.delta_tau_e)}")
    print(f"delta_tau_r = {_fmt(pt.delta_tau_r)}")
    print(f"ratio       = {_fmt(pt.ratio)}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "propertime.json",
            {
                "delta_tau_e": pt.delta_tau_e,
                "delta_tau_r": pt.delta_tau_r,
                "ratio": pt.ratio,
                "scenario": echo_dict(settings)["scenario"],
            },
        )
        if not quiet:
            print(f"wrote {out / 'propertime.json'}")
    return 0


def _cmd_simulate(settings: RunSettings, out: Path, quiet: bool) -> int:
    start = time.perf_counter()
    result = run_experiment(
        settings.experiment,
        dt=settings.dt,
        workers=settings.workers,
        keep_every=settings.keep_every,
    )
    out.mkdir(parents=True, exist_ok=True)
    _write_trials_csv(out / "trials.csv", result)
    _write_plate_csv(out / "plate_rocket.csv", result, ROCKET, settings.bins)
    _write_plate_csv(out / "plate_earth.csv", result, EARTH, settings.bins)
    summary = _summary_dict(settings, result)
    _write_json(out / "summary.json", summary)
    _write_json(
        out / "manifest.json",
        _manifest(settings, "simulate", result, time.perf_counter() - start),
    )
    if not quiet:
        print(f"trials          : {settings.experiment.trials}")
        print(f"delta_tau (e, r): ({_fmt(result.tau_e)}, {_fmt(result.tau_r)})")
        corr = summary["correlation"]
        if corr is not None:
            print(f"correlation     : {_fmt(corr['value'])} +/- {_fmt(corr['stderr'])}")
        else:
            print("correlation     : unavailable (resolution failure)")
        for wing in (ROCKET, EARTH):
            plate = summary["plates"][wing]
            if plate is None:
                print(f"{wing:6s} plate    : resolution failure")
            else:
                print(f"{wing:6s} separation: {_fmt(plate['separation'])}")
        print(f"wrote {out / 'trials.csv'}")
    return 0


def _cmd_chsh(settings: RunSettings, out: Optional[Path], quiet: bool) -> int:
    if settings.chsh_directions is None:
        raise ConfigError(
            "chsh requires the four angles a_deg, a_prime_deg, b_deg, b_prime_deg "
            "in the [spin] section"
        )
    a, a_prime, b, b_prime = settings.chsh_directions
    res = chsh_details(
        settings.experiment, a, a_prime, b, b_prime,
        dt=settings.dt, workers=settings.workers,
    )
    for label, est in zip(res.labels, res.estimates):
        print(f"{label:9s} = {_fmt(est.value)} +/- {_fmt(est.stderr)}  (n={est.count})")
    print(f"S         = {_fmt(res.s_value)}")
    print(f"|S|       = {_fmt(abs(res.s_value))}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "chsh.json",
            {
                "estimates": {
                    label: {"value": est.value, "stderr": est.stderr, "count": est.count}
                    for label, est in zip(res.labels, res.estimates)
                },
                "s_value": res.s_value,
            },
        )
    return 0


def _cmd_validate(quiet: bool) -> int:
    results = run_all()
    ok = True
    for name, passed, detail in results:
        ok &= passed
        if not quiet or not passed:
            print(f"[{'ok' if passed else 'FAIL'}] {name}: {detail}")
    if not ok:
        failed = ", ".join(name for name, passed, _ in results if not passed)
        print(f"validate failed: {failed}", file=sys.stderr)
        return FAILURE_EXIT
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrobell",
        description=(
            "Retrocausal hidden-variable Bell experiment with per-wing "
            "proper-time dynamics"
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, needs_config: bool) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        if needs_config:
            p.add_argument("--config", required=True, help="run configuration file")
            p.add_argument("--seed", type=int, default=None, help="override master seed")
            p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress progress chatter")
        return p

    add("propertime", "print the scenario's elapsed proper times", True)
    add("simulate", "run the experiment and write trial/plate/summary files", True)
    add("chsh", "estimate the CHSH composite over four setting pairs", True)
    add("validate", "run the fast invariant self-checks", False)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args.quiet)
        settings = load_settings(args.config).with_overrides(
            seed=args.seed, trials=args.trials
        )
        out = Path(args.out) if args.out is not None else None
        if args.command == "propertime":
            return _cmd_propertime(settings, out, args.quiet)
        if args.command == "simulate":
            if out is None:
                print("simulate requires --out DIR", file=sys.stderr)
                return USAGE_EXIT
            return _cmd_simulate(settings, out, args.quiet)
        if args.command == "chsh":
            return _cmd_chsh(settings, out, args.quiet)
        raise RuntimeError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (OSError, ValueError, NoOutcomesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


if __name__ == "__main__":
    sys.exit(main())
