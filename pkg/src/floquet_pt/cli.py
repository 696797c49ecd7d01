"""Command-line front end.

Exit codes: ``classify`` returns 0/1/2 for PTSP/PTBP/EP. Usage errors exit
with 64, unwritable outputs with 73, and ``validate-three-level`` with 3
when the elimination ratios are out of range.

A ``--config FILE`` of ``key = value`` lines (``#`` comments) supplies
defaults for any option of the chosen subcommand; flags on the command line
win.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, artifacts
from .dynamics import (
    ReductionWarning,
    has_interior_minimum,
    monotone_after,
    resolved_run,
    stroboscopic_run,
    validate_reduction,
)
from .floquet import DEFAULT_TOL, classify, discriminant
from .models import (
    ContinuousModel,
    DimensionlessPoint,
    EmptyProtocolError,
    PhaseLabel,
    ThreeLevelModel,
    canonical_protocol,
    mhz_to_rad_s,
    square_wave_protocol,
    static_classify,
    us_to_s,
)
from .sweeps import Axis, GridSpec, boundary_curve, decay_map, phase_diagram

EXIT_USAGE = 64
EXIT_CANTCREAT = 73
EXIT_VALIDITY = 3
_PHASE_EXIT = {PhaseLabel.PTSP: 0, PhaseLabel.PTBP: 1, PhaseLabel.EP: 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonneg(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(x) and x >= 0):
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text!r}")
    return x


def _positive(text: str) -> float:
    x = _nonneg(text)
    if x == 0:
        raise argparse.ArgumentTypeError("expected a positive value")
    return x


def _count(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError("expected a non-negative integer")
    return n


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` file; dashes in keys are folded to underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_output(p: argparse.ArgumentParser, formats: Sequence[str]) -> None:
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega-t0-min", type=_nonneg, default=0.0)
    p.add_argument("--omega-t0-max", type=_nonneg, default=math.pi)
    p.add_argument("--omega-t0-count", type=_count, default=256)
    p.add_argument("--gamma-t1-min", type=_nonneg, default=0.0)
    p.add_argument("--gamma-t1-max", type=_nonneg, default=2.0)
    p.add_argument("--gamma-t1-count", type=_count, default=256)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--workers", type=_count, default=None, help="threads (default: $FPT_THREADS or CPU count)")
    p.add_argument("--tol", type=_positive, default=DEFAULT_TOL, help="relative EP tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floquet-pt", description="Floquet PT-symmetry under repeated measurement.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value file supplying option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="phase of a (omega_t0, gamma_t1) point")
    p.add_argument("--omega-t0", type=_nonneg)
    p.add_argument("--gamma-t1", type=_nonneg)
    p.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    p.add_argument("--compare-static", action="store_true", help="also classify the continuous model")
    p.add_argument("--gamma-over-omega", type=_nonneg, default=None, help="ratio for --compare-static")

    p = sub.add_parser("simulate", help="stroboscopic survival probability of the pulsed protocol")
    dim = p.add_argument_group("dimensionless parameters")
    dim.add_argument("--omega-t0", type=_nonneg)
    dim.add_argument("--gamma-t1", type=_nonneg)
    dim.add_argument("--omega", type=_positive, default=None, help="rad/s used to set t0 (default 1)")
    dim.add_argument("--gamma-over-omega", type=_positive, default=None, help="gamma/omega (default 1)")
    phys = p.add_argument_group("physical parameters")
    phys.add_argument("--omega-mhz", type=_nonneg)
    phys.add_argument("--gamma-mhz", type=_nonneg)
    phys.add_argument("--t0-us", type=_nonneg)
    phys.add_argument("--t1-us", type=_nonneg)
    p.add_argument("--n-periods", type=_count, default=100)
    p.add_argument("--normalization", choices=("raw", "normalized", "both"), default="raw")
    _add_output(p, ("csv", "json"))

    for name, text in (("phase-diagram", "phase diagram over a grid"), ("decay-map", "decay-rate map over a grid")):
        p = sub.add_parser(name, help=text)
        _add_grid(p)
        _add_output(p, ("csv", "json", "svg"))
        p.add_argument("--svg", help="additionally write an SVG heatmap here")

    p = sub.add_parser("boundary", help="EP curve gamma_t1*(omega_t0)")
    p.add_argument("--omega-t0-min", type=_nonneg, default=0.01)
    p.add_argument("--omega-t0-max", type=_nonneg, default=3.0)
    p.add_argument("--count", type=_count, default=1000)
    _add_output(p, ("csv",))

    p = sub.add_parser("validate-three-level", help="check adiabatic elimination of |P>")
    p.add_argument("--omega-mhz", type=_nonneg, default=0.1, help="Omega / 2pi in MHz")
    p.add_argument("--omega-prime-mhz", type=_nonneg, default=1.0, help="Omega' / 2pi in MHz")
    p.add_argument("--gamma-linewidth", type=_positive, default=22.0, help="Gamma in 1/us")
    p.add_argument("--t-max-us", type=_positive, default=None, help="default: one Rabi period")
    p.add_argument("--bound", type=_positive, default=0.05)

    p = sub.add_parser("square-wave", help="anti-phase square-wave protocol, time resolved")
    p.add_argument("--omega-mhz", type=_positive, default=0.1)
    p.add_argument("--gamma-over-omega", type=_nonneg, default=2.0)
    p.add_argument("--freq-ratio", type=_positive, default=0.5, help="2 pi omega_sq / Omega")
    p.add_argument("--n-periods", type=_count, default=50)
    p.add_argument("--samples-per-period", type=_count, default=20)
    p.add_argument("--normalization", choices=("raw", "normalized", "both"), default="both")
    _add_output(p, ("csv", "json"))
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config(args.config)
        except (OSError, UsageError) as exc:
            parser.error(str(exc))
        # re-parse with the file as defaults so explicit flags still win
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
        for key in cfg:
            action = next(a for a in subparser._actions if a.dest == key)
            value = getattr(args, key)
            if action.const is True and isinstance(value, str):
                setattr(args, key, value.lower() in ("1", "true", "yes", "on"))
    return args


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        artifacts.atomic_write(output, text)


def _params(args: argparse.Namespace, **extra) -> dict:
    d = {"command": args.command}
    d.update({k: v for k, v in vars(args).items() if k not in ("command",) and v is not None})
    d.update(extra)
    return d


def cmd_classify(args: argparse.Namespace) -> int:
    if args.omega_t0 is None or args.gamma_t1 is None:
        raise UsageError("classify needs --omega-t0 and --gamma-t1")
    point = DimensionlessPoint(args.omega_t0, args.gamma_t1)
    d = discriminant(point)
    label = classify(point, args.tol)
    line = f"D={artifacts.fmt(d)} {label.value}"
    if args.compare_static:
        if args.gamma_over_omega is None:
            raise UsageError("--compare-static needs --gamma-over-omega")
        static = static_classify(ContinuousModel(1.0, args.gamma_over_omega))
        verdict = "agree" if static is label else "DISAGREE"
        line += f" static(gamma/omega={artifacts.fmt(args.gamma_over_omega)})={static.value} floquet={label.value} {verdict}"
    print(line)
    return _PHASE_EXIT[label]


def _simulate_protocol(args: argparse.Namespace):
    physical = [args.omega_mhz, args.gamma_mhz, args.t0_us, args.t1_us]
    dimensionless = [args.omega_t0, args.gamma_t1, args.omega, args.gamma_over_omega]
    if any(v is not None for v in physical):
        if any(v is not None for v in dimensionless):
            raise UsageError("physical and dimensionless parameters are mutually exclusive")
        if any(v is None for v in physical):
            raise UsageError("physical mode needs --omega-mhz, --gamma-mhz, --t0-us and --t1-us")
        omega, gamma = mhz_to_rad_s(args.omega_mhz), mhz_to_rad_s(args.gamma_mhz)
        point = DimensionlessPoint(omega * us_to_s(args.t0_us), gamma * us_to_s(args.t1_us))
    else:
        if args.omega_t0 is None or args.gamma_t1 is None:
            raise UsageError("need --omega-t0 and --gamma-t1 (or the physical parameters)")
        omega = args.omega if args.omega is not None else 1.0
        gamma = omega * (args.gamma_over_omega if args.gamma_over_omega is not None else 1.0)
        point = DimensionlessPoint(args.omega_t0, args.gamma_t1)
    return point, canonical_protocol(point, omega, gamma)


def _shape_summary(traj, which: str) -> str:
    parts = []
    columns = {"raw": traj.p0_raw, "normalized": traj.p0_norm}
    for name in (("raw", "normalized") if which == "both" else (which,)):
        p0 = columns[name]
        shape = "oscillating" if has_interior_minimum(p0) else "monotone" if monotone_after(p0, 0) else "other"
        parts.append(f"p0_{name}: {shape}")
    return ", ".join(parts)


def cmd_simulate(args: argparse.Namespace) -> int:
    point, protocol = _simulate_protocol(args)
    traj = stroboscopic_run(protocol, n_periods=args.n_periods)
    params = _params(
        args,
        period_s=protocol.period,
        segments=[(s.omega, s.gamma, s.duration) for s in protocol.segments],
        phase=classify(point).value,
    )
    text = artifacts.trajectory_csv(traj, params) if args.format == "csv" else artifacts.trajectory_json(traj, params)
    _emit(text, args.output)
    if args.output is not None:
        print(f"{classify(point).value}; {_shape_summary(traj, args.normalization)}; wrote {args.output}")
    return 0


def _grid_spec(args: argparse.Namespace) -> GridSpec:
    try:
        return GridSpec(
            Axis(args.omega_t0_min, args.omega_t0_max, args.omega_t0_count),
            Axis(args.gamma_t1_min, args.gamma_t1_max, args.gamma_t1_count),
            args.spacing,
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_grid(args: argparse.Namespace) -> int:
    spec = _grid_spec(args)
    run = phase_diagram if args.command == "phase-diagram" else decay_map
    diagram = run(spec, workers=args.workers, tol=args.tol)
    params = _params(args)
    curve = None
    if args.format == "svg" or args.svg:
        lo, hi = spec.omega_t0.min, min(spec.omega_t0.max, math.pi)
        curve = boundary_curve(np.linspace(lo, hi, 400))
    if args.format == "csv":
        text = artifacts.grid_csv(diagram, params)
    elif args.format == "json":
        text = artifacts.grid_json(diagram, params)
    else:
        text = artifacts.phase_svg(diagram, curve)
    _emit(text, args.output)
    if args.svg:
        artifacts.atomic_write(args.svg, artifacts.phase_svg(diagram, curve))
    return 0


def cmd_boundary(args: argparse.Namespace) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    curve = boundary_curve(np.linspace(args.omega_t0_min, args.omega_t0_max, args.count))
    if curve.skipped:
        print(f"skipped {len(curve.skipped)} samples outside (0, pi)", file=sys.stderr)
    _emit(artifacts.boundary_csv(curve, _params(args)), args.output)
    return 0


def cmd_validate_three_level(args: argparse.Namespace) -> int:
    model = ThreeLevelModel(
        mhz_to_rad_s(args.omega_mhz), mhz_to_rad_s(args.omega_prime_mhz), args.gamma_linewidth * 1e6
    )
    t_max = us_to_s(args.t_max_us) if args.t_max_us is not None else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReductionWarning)
        report = validate_reduction(model, t_max)
    r1, r2 = report.ratios
    print(
        f"gamma_eff={artifacts.fmt(report.gamma_eff)} 1/s sup_error={artifacts.fmt(report.sup_error)} "
        f"omega_prime/omega={artifacts.fmt(r1)} Gamma/omega={artifacts.fmt(r2)} "
        f"valid={'yes' if report.valid else 'no'}"
    )
    if not report.valid:
        print("warning: elimination ratios below 10", file=sys.stderr)
        return EXIT_VALIDITY
    return 0 if report.sup_error <= args.bound else 1


def cmd_square_wave(args: argparse.Namespace) -> int:
    omega = mhz_to_rad_s(args.omega_mhz)
    gamma = args.gamma_over_omega * omega
    # 2 pi w / Omega = ratio
    freq = args.freq_ratio * omega / (2.0 * math.pi)
    protocol = square_wave_protocol(omega, gamma, freq)
    traj = resolved_run(protocol, n_periods=args.n_periods, samples_per_period=max(1, args.samples_per_period))
    params = _params(args, freq_rad_s=freq, period_s=protocol.period)
    text = artifacts.trajectory_csv(traj, params) if args.format == "csv" else artifacts.trajectory_json(traj, params)
    _emit(text, args.output)
    if args.output is not None:
        print(f"{_shape_summary(traj, args.normalization)}; wrote {args.output}")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "phase-diagram": cmd_grid,
    "decay-map": cmd_grid,
    "boundary": cmd_boundary,
    "validate-three-level": cmd_validate_three_level,
    "square-wave": cmd_square_wave,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if not isinstance(exc.code, str) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, EmptyProtocolError) as exc:
        print(f"floquet-pt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"floquet-pt: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT


if __name__ == "__main__":
    sys.exit(main())
