"""Command-line front end.

Exit codes: 0 success, 1 a reported check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

from .config import DEFAULT_SEED, FIG1D_RATIOS, FORMATS, MODELS, RunConfig
from .errors import ConfigurationError, HomSimError, ModelMismatchError
from .experiments import ExperimentReport, run_experiment

OUTPUT_ENV = "HOMSIM_OUTPUT"
CURVE_HEADER = ("tau", "coincidence", "std_error", "model", "bandwidth_ratio")
MAP_HEADER = ("delta_f", "tau", "coincidence", "weight")

COMMANDS = {
    "scan": "one coincidence curve for the chosen model",
    "sweep-bandwidth": "filtered-bandwidth family of dip curves",
    "contrast": "dip with the pi/2 shift versus no dip without it",
    "fringe": "correlation fringe from a nonzero mean detuning",
    "witness": "product versus path-entangled input (Fock oracle)",
    "compare": "coherence closed form versus Fock oracle",
    "born-rule": "mean port intensities of an antithetic ensemble",
    "detuning-map": "per-detuning coincidence table before averaging",
}


def _ratio_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _parents():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("spectrum and delay grid")
    g.add_argument("--sigma", type=float, default=1.0, help="detuning std, rad/s (default 1)")
    g.add_argument("--mean-offset", type=float, default=0.0, help="mean detuning, rad/s (default 0)")
    g.add_argument("--bandwidth-ratio", type=float, default=1.0,
                   help="spectral filter factor in (0, 1] (default 1)")
    g.add_argument("--tau-max", type=float, default=None,
                   help="largest delay, s (default 4/sigma; 10/sigma for witness)")
    g.add_argument("--tau-steps", type=int, default=65, help="delay grid points (default 65)")
    g = common.add_argument_group("sampling and output")
    g.add_argument("--n-pairs", type=int, default=100_000, help="ensemble size, even (default 100000)")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"seed (default {DEFAULT_SEED})")
    g.add_argument("--analytic", action="store_true", help="closed form instead of Monte Carlo")
    g.add_argument("--format", dest="output_format", choices=FORMATS, default="csv")
    g.add_argument("--output", dest="output_path", default=None,
                   help=f"output file (default ${OUTPUT_ENV} or stdout)")

    fock_opts = argparse.ArgumentParser(add_help=False)
    g = fock_opts.add_argument_group("two-photon state")
    g.add_argument("--center-split", type=float, default=0.0,
                   help="signal/idler centre offset from degeneracy, rad/s (default 0)")
    g.add_argument("--psi-rel", type=float, default=0.0,
                   help="relative phase of the entangled superposition, rad (default 0)")
    g.add_argument("--ridge-width", type=float, default=None,
                   help="sum-frequency std of the correlated state (default: separable for "
                        "witness, sigma/4 for compare and fock scans)")
    g.add_argument("--grid-points", type=int, default=257, help="frequency grid points (default 257)")
    return common, fock_opts


def build_parser() -> argparse.ArgumentParser:
    common, fock_opts = _parents()
    parser = argparse.ArgumentParser(
        prog="homsim", description="Hong-Ou-Mandel coincidence simulator."
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, help_text in COMMANDS.items():
        parents = [common]
        if name in ("scan", "witness", "compare"):
            parents.append(fock_opts)
        p = sub.add_parser(name, parents=parents, help=help_text, description=help_text)
        if name == "scan":
            p.add_argument("--model", choices=MODELS, default="coherence",
                           help="coherence (pi/2-shifted), coherence-unshifted or fock")
        if name == "sweep-bandwidth":
            p.add_argument("--ratios", type=_ratio_list, default=FIG1D_RATIOS,
                           help="comma-separated filter ratios (default 1,0.75,0.5,0.25)")
    return parser


def parse_args(argv=None) -> RunConfig:
    """Parse and validate; usage errors exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    kwargs = vars(ns)
    if kwargs.get("output_path") is None and os.environ.get(OUTPUT_ENV):
        kwargs["output_path"] = os.environ[OUTPUT_ENV]
    try:
        return RunConfig(**kwargs)
    except ConfigurationError as exc:
        sub = parser.prog + " " + ns.command
        for problem in getattr(exc, "problems", [str(exc)]):
            print(f"{sub}: error: {problem}", file=sys.stderr)
        raise SystemExit(2)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def render_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    if "detuning_map" in report.tables:
        t = report.tables["detuning_map"]
        buf.write(",".join(MAP_HEADER) + "\n")
        for row in zip(*(t[c] for c in MAP_HEADER)):
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()
    buf.write(",".join(CURVE_HEADER) + "\n")
    for curve in report.curves:
        ratio = _fmt(curve.bandwidth_ratio)
        for tau, val, err in zip(curve.tau_grid, curve.values, curve.std_errors):
            buf.write(f"{_fmt(tau)},{_fmt(val)},{_fmt(err)},{curve.model_tag},{ratio}\n")
    return buf.getvalue()


def render_json(report: ExperimentReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def write_report(report: ExperimentReport, config: RunConfig) -> None:
    text = render_csv(report) if config.output_format == "csv" else render_json(report)
    if config.output_path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(config: RunConfig) -> int:
    try:
        report = run_experiment(config)
    except ModelMismatchError as exc:
        print(f"homsim {config.command}: check failed: {exc}", file=sys.stderr)
        return 1
    except HomSimError as exc:
        print(f"homsim {config.command}: error: {exc}", file=sys.stderr)
        return 2
    write_report(report, config)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: measured={c.measured:.6g} tolerance={c.tolerance:.6g}",
              file=sys.stderr)
    return 0 if report.passed else 1


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
