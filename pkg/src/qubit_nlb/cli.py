"""``qubit-nlb`` command line: analyze, sweep, volume and verify-paper."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import checks, nlbreak, volume
from .channel import ChannelError, QubitChannel

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- argument parsing ---------------------------------------------------------

def _count(text: str) -> int:
    """Accept ``1000000`` as well as ``1e6``."""
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x.is_integer() or x < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(x)


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubit-nlb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"),
                        help="output format (default: table on a terminal, json otherwise)")
    common.add_argument("--out", type=Path, help="write output to this file instead of stdout")

    chan = argparse.ArgumentParser(add_help=False)
    chan.add_argument("--channel", help="preset name, inline JSON, or path to a channel JSON file")
    chan.add_argument("--family", choices=sorted(nlbreak.FAMILIES))
    for name in ("p", "q", "u", "v"):
        chan.add_argument(f"--{name}", type=float)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--angle-step", type=_positive, default=0.1)
    grid.add_argument("--lambda-step", type=_positive, default=0.05)
    grid.add_argument("--workers", type=_count, default=1)

    sub.add_parser("analyze", parents=[common, chan], help="classify one channel")

    sw = sub.add_parser("sweep", parents=[common, chan, grid],
                        help="maximal M over pure inputs for a channel or along a family")
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--step", type=_positive, default=0.05)

    vol = sub.add_parser("volume", parents=[common], help="Monte Carlo volumes of channel classes")
    vol.add_argument("--samples", type=_count, default=10**6)
    vol.add_argument("--seed", type=int, default=0)
    vol.add_argument("--unital", action="store_true")
    vol.add_argument("--workers", type=_count, default=None)

    ver = sub.add_parser("verify-paper", parents=[common], help="run the golden acceptance checks")
    ver.add_argument("--fast", action="store_true", help="1e6 volume samples and smaller property suites")
    ver.add_argument("--json", action="store_true", help="shorthand for --format json")
    ver.add_argument("--workers", type=_count, default=1)
    return parser


# --- channel resolution -----------------------------------------------------------

def _presets_dir():
    return resources.files("qubit_nlb").joinpath("presets")


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in _presets_dir().iterdir()
                  if p.name.endswith(".json"))


def load_channel(spec: str) -> QubitChannel:
    text = spec.strip()
    if text.startswith("{"):
        source = text
    elif text in preset_names():
        source = _presets_dir().joinpath(f"{text}.json").read_text()
    else:
        path = Path(text)
        if not path.is_file():
            raise UsageError(f"--channel {spec!r} is neither a preset, inline JSON, nor a file")
        source = path.read_text()
    try:
        return QubitChannel.from_json(source)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"malformed channel spec: {exc}") from None


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--family {args.family} needs --{name}")
    return value


def family_channel(args) -> QubitChannel:
    if args.family == "ampdamp":
        return nlbreak.amplitude_damping(_need(args, "p"))
    if args.family == "qfamily":
        return nlbreak.genuine_hidden_family(_need(args, "q"))
    return nlbreak.extremal_channel(_need(args, "u"), _need(args, "v"))


def resolve_channel(args) -> QubitChannel:
    if (args.channel is None) == (args.family is None):
        raise UsageError("give exactly one of --channel or --family")
    return load_channel(args.channel) if args.channel else family_channel(args)


# --- output -------------------------------------------------------------------

def _format(args) -> str:
    if getattr(args, "json", False):
        return "json"
    if args.format:
        return args.format
    return "table" if args.out is None and sys.stdout.isatty() else "json"


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _yes(flag) -> str:
    return "yes" if flag else "no"


# --- subcommands -------------------------------------------------------------------

def cmd_analyze(args) -> int:
    ch = resolve_channel(args)
    report = {"channel": ch.to_dict(), **nlbreak.classify(ch)}
    fmt = _format(args)
    if fmt == "json":
        _emit(args, json.dumps(report, indent=2))
        return EXIT_OK
    flat = [(k, v) for k, v in report.items() if k not in ("channel", "transfer_matrix")]
    if fmt == "csv":
        _emit(args, _csv([("key", "value")] + [(k, json.dumps(v)) for k, v in flat]))
        return EXIT_OK
    lines = [f"channel: t={ch.t.tolist()} lambda={ch.lam.tolist()}"]
    if not report["cp"]:
        lines.append("completely positive: no (nothing else to report)")
    else:
        labels = [("cp", "completely positive"), ("unital", "unital"),
                  ("entanglement_breaking", "entanglement breaking"),
                  ("nlb_mes", "breaks MES nonlocality"), ("strongly_nlb", "strongly NLB")]
        lines += [f"{label:<24}{_yes(report[key])}" for key, label in labels]
        spectrum = ", ".join(f"{x:.6g}" for x in report["c_spectrum"])
        lines += [
            f"{'M(Choi)':<24}{report['choi_M']:.6g}",
            f"{'Choi C-spectrum':<24}[{spectrum}]",
            f"{'C-ratio':<24}{report['c_ratio']:.6g}",
            f"{'filtered violation':<24}{report['filtered_optimal_violation']:.6g}",
        ]
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _sweep_values(args, lo, hi):
    start = lo if args.start is None else args.start
    stop = hi if args.stop is None else args.stop
    if stop < start:
        raise UsageError("--stop must not be below --start")
    n = int(math.floor((stop - start) / args.step + 1e-9))
    return [round(start + k * args.step, 12) for k in range(n + 1)]


def _first_crossing(factory, rows, args):
    for lo, hi in zip(rows, rows[1:]):
        if lo.best_M <= 1 + 1e-9 < hi.best_M:
            return nlbreak.estimate_crossing(factory, lo.parameter, hi.parameter,
                                             angle_step=args.angle_step, lambda_step=args.lambda_step)
    return None


def cmd_sweep(args) -> int:
    crossing = None
    if args.channel is not None:
        if args.family is not None:
            raise UsageError("give exactly one of --channel or --family")
        ch = load_channel(args.channel)
        if not ch.is_canonical:
            # local unitaries do not change the maximum over all pure inputs
            print("note: sweeping the canonical part of the channel", file=sys.stderr)
            ch = ch.canonical()
        res = nlbreak.max_M_over_pure_inputs(ch, args.angle_step, args.lambda_step)
        rows, param = [nlbreak.SweepRow(float("nan"), res.best_M, res.best_spec)], "channel"
    elif args.family is None:
        raise UsageError("sweep needs --channel or --family")
    else:
        if args.family == "ampdamp":
            param, factory, values = "p", nlbreak.amplitude_damping, _sweep_values(args, 0.0, 1.0)
        elif args.family == "qfamily":
            param, factory, values = "q", nlbreak.genuine_hidden_family, _sweep_values(args, 0.0, 1.0)
        elif (args.u is None) == (args.v is None):
            raise UsageError("extremal sweep needs exactly one of --u or --v held fixed")
        elif args.u is not None:
            u = args.u
            param, values = "v", _sweep_values(args, 0.0, math.pi - args.step)
            factory = _ExtremalV(u)
        else:
            param, values = "u", _sweep_values(args, 0.0, 2 * math.pi - args.step)
            factory = _ExtremalU(args.v)
        rows = nlbreak.sweep_family(factory, values, args.angle_step, args.lambda_step, args.workers)
        if args.family == "qfamily":
            crossing = _first_crossing(factory, rows, args)
    return _emit_sweep(args, param, rows, crossing)


class _ExtremalU:
    # picklable partials for the process pool
    def __init__(self, v):
        self.v = v

    def __call__(self, u):
        return nlbreak.extremal_channel(u, self.v)


class _ExtremalV:
    def __init__(self, u):
        self.u = u

    def __call__(self, v):
        return nlbreak.extremal_channel(self.u, v)


def _emit_sweep(args, param, rows, crossing) -> int:
    fmt = _format(args)
    if fmt == "json":
        out = {
            "parameter": param,
            "rows": [{param: None if np.isnan(r.parameter) else r.parameter, "best_M": r.best_M,
                      "best_spec": r.best_spec.to_dict()} for r in rows],
            "crossing": crossing,
            "grid": {"angle_step": args.angle_step, "lambda_step": args.lambda_step},
        }
        _emit(args, json.dumps(out, indent=2))
    elif fmt == "csv":
        table = [(param, "best_M", "lambda", "alpha", "beta", "gamma")]
        for r in rows:
            table.append((repr(r.parameter), repr(r.best_M), repr(r.best_spec.schmidt_lambda),
                          *(repr(a) for a in r.best_spec.euler)))
        _emit(args, _csv(table))
    else:
        lines = [f"{param:>8}  {'best_M':>12}  {'lambda':>7}  euler (alpha, beta, gamma)"]
        for r in rows:
            e = ", ".join(f"{a:.3f}" for a in r.best_spec.euler)
            lines.append(f"{r.parameter:>8.4g}  {r.best_M:>12.8f}  {r.best_spec.schmidt_lambda:>7.3f}  ({e})")
        if crossing is not None:
            lines.append(f"max M crosses 1 near {param} = {crossing:.4f}")
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_volume(args) -> int:
    report = volume.estimate_volumes(args.samples, args.seed, "unital" if args.unital else "full",
                                     args.workers)
    fmt = _format(args)
    if fmt == "json":
        _emit(args, report.to_json())
    elif fmt == "csv":
        d = report.to_dict()
        rows = [("key", "value")] + [(k, d[k]) for k in ("mode", "seed", "samples_drawn", "cp_accepted",
                                                         "eb_count", "nlb_mes_count", "snlb_count")]
        rows += [(f"fraction_{k}", "" if v is None else repr(v)) for k, v in report.fractions.items()]
        _emit(args, _csv(rows))
    else:
        _emit(args, report.table())
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    results = checks.run_all(fast=args.fast, workers=args.workers,
                             progress=lambda msg: print(f"running {msg}", file=sys.stderr, flush=True))
    ok = checks.all_passed(results)
    fmt = _format(args)
    if fmt == "json":
        _emit(args, json.dumps({"passed": ok, "checks": [r.to_dict() for r in results]}, indent=2))
    elif fmt == "csv":
        rows = [("name", "expected", "computed", "tol", "passed", "seconds", "informational")]
        rows += [tuple(r.to_dict().values()) for r in results]
        _emit(args, _csv(rows))
    else:
        failed = sum(not r.passed for r in results if not r.informational)
        summary = f"{failed} acceptance check(s) failed" if failed else "all acceptance checks passed"
        _emit(args, checks.format_table(results) + "\n\n" + summary)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "volume": cmd_volume,
    "verify-paper": cmd_verify_paper,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ChannelError, ValueError) as exc:
        print(f"qubit-nlb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
