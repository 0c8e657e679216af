"""Command-line front end: ``kgwave {eval,synth,verify,inner,scan}``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import json
import sys

import numpy as np

from . import harness
from . import momentum_rep as mr
from .errors import DomainError, QuadratureError, UnsupportedError
from .wavepacket import PacketParams, SpinPacketParams, eval_psi, eval_psi_spin

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
AXES = ("x", "y", "z")


class UsageError(Exception):
    pass


def _num(v):
    return format(float(v), ".17g")


def parse_vector(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse vector {text!r}") from exc
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(parts)


def parse_grid(specs):
    """Axis values from "axis:lo:hi:count" specs; unspecified axes are {0}."""
    axes = {a: np.array([0.0]) for a in AXES}
    for spec in specs or []:
        parts = spec.split(":")
        if len(parts) != 4 or parts[0] not in AXES:
            raise UsageError(f"grid spec must be axis:lo:hi:count, got {spec!r}")
        try:
            lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise UsageError(f"bad numbers in grid spec {spec!r}") from exc
        if n < 1:
            raise UsageError("grid count must be >= 1")
        axes[parts[0]] = np.unique(np.linspace(lo, hi, n)) if n > 1 else np.array([lo])
    return axes


def parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"values must be lo:hi:count, got {text!r}")
    try:
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc


def parse_nodes(text):
    try:
        a, b = (int(p) for p in text.split(","))
    except ValueError as exc:
        raise UsageError(f"nodes must be two integers like 64,64, got {text!r}") from exc
    return a, b


def _grid_points(axes, times):
    t = np.array(sorted(set(times)))
    T, X, Y, Z = np.meshgrid(t, axes["x"], axes["y"], axes["z"], indexing="ij")
    return T.ravel(), np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)


def _params(args):
    v = parse_vector(args.velocity)
    try:
        return PacketParams(args.mass, v)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _write(args, data):
    if isinstance(data, str):
        data = data.encode()
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "dump_config")}


def cmd_eval(args):
    params = _params(args)
    axes = parse_grid(args.grid)
    t, x = _grid_points(axes, args.t or [0.0])
    if args.spin:
        psi = eval_psi_spin(SpinPacketParams(params, args.spin), t, x)
    else:
        psi = eval_psi(params, t, x)
    if args.format == "json":
        rows = [{"t": ti, "x": xi[0], "y": xi[1], "z": xi[2], "re": p.real, "im": p.imag,
                 "abs": abs(p)} for ti, xi, p in zip(t.tolist(), x.tolist(), psi.tolist())]
        _write(args, json.dumps(rows, separators=(",", ":")) + "\n")
        return EXIT_OK
    lines = ["t,x,y,z,re,im,abs"]
    for ti, xi, p in zip(t, x, np.atleast_1d(psi)):
        lines.append(",".join(_num(c) for c in (ti, *xi, p.real, p.imag, abs(p))))
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_synth(args):
    params = _params(args)
    if params.speed == 0.0:
        raise UsageError("synthesis needs a nonzero velocity")
    n_polar, n_azimuth = parse_nodes(args.nodes)
    try:
        q = mr.ShellQuadrature(n_polar, n_azimuth)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    axes = parse_grid(args.grid) if args.grid else {a: np.array([-5.0, 0.0, 5.0]) for a in AXES}
    t, x = _grid_points(axes, args.t or [0.0])
    try:
        val = mr.synthesize_psi(params, t, x, q, tol=args.refine_tol)
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    err = np.abs(np.atleast_1d(val) - np.atleast_1d(eval_psi(params, t, x)))
    lines = ["t,x,y,z,abs_err"]
    for ti, xi, e in zip(t, x, err):
        lines.append(",".join(_num(c) for c in (ti, *xi, e)))
    max_err = float(np.max(err))
    lines.append(f"max_err,{_num(max_err)}")
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK if max_err < args.tol else EXIT_FAIL


def cmd_verify(args):
    try:
        specs = harness.suite_specs(args.suite)
    except harness.ConfigError as exc:
        raise UsageError(str(exc)) from exc
    reports = harness.run_suite(specs, args.seed, args.tol, args.timings)
    _write(args, harness.emit_report(reports, args.format))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_inner(args):
    centers = [float(c) for c in args.centers.split(",")]
    if len(centers) == 1:
        centers = centers * 2
    if len(centers) != 2:
        raise UsageError("--centers takes one or two speeds")
    axes = [parse_vector(a) for a in (args.axis or ["0,0,1"])]
    if len(axes) == 1:
        axes = axes * 2
    try:
        f = mr.bump_profile(centers[0], args.width, axis=axes[0])
        g = mr.bump_profile(centers[1], args.width, axis=axes[1])
        val = mr.weighted_inner_smeared(f, g, args.mass)
        pred = mr.density_prediction(f, g, args.mass)
    except (UnsupportedError, DomainError) as exc:
        raise UsageError(str(exc)) from exc
    dev = abs(val - pred) / abs(pred) if pred != 0 else abs(val - pred)
    out = {"inner": [val.real, val.imag], "prediction": [pred.real, pred.imag],
           "relative_deviation": dev}
    if args.format == "json":
        _write(args, json.dumps(out, separators=(",", ":")) + "\n")
    else:
        _write(args, f"inner,{_num(val.real)},{_num(val.imag)}\n"
                     f"prediction,{_num(pred.real)},{_num(pred.imag)}\n"
                     f"relative_deviation,{_num(dev)}\n")
    return EXIT_OK


def cmd_scan(args):
    spec = harness.REGISTRY.get(args.check)
    if spec is None:
        raise UsageError(f"unknown check id {args.check!r}")
    if args.param not in spec.defaults:
        known = ", ".join(sorted(spec.defaults)) or "none"
        raise UsageError(f"check {args.check} has no parameter {args.param!r} (scannable: {known})")
    cast = type(spec.defaults[args.param])
    lines = ["value,residual,tolerance,pass"]
    all_pass = True
    for value in parse_range(args.values):
        r = harness.run_check(spec, args.seed, args.tol, {args.param: cast(value)})
        all_pass &= r.passed
        lines.append(f"{_num(value)},{_num(r.residual)},{_num(r.tolerance)},"
                     f"{'true' if r.passed else 'false'}")
    _write(args, "\n".join(lines) + "\n")
    return EXIT_OK if all_pass else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="kgwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("csv", "json"), default="csv"):
        p.add_argument("--mass", type=float, default=1.0)
        p.add_argument("--velocity", default="0,0,0.6", help="three comma-separated components")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--dump-config", action="store_true",
                       help="print the resolved configuration as JSON and exit")

    p = sub.add_parser("eval", help="evaluate the closed-form packet on a grid")
    common(p)
    p.add_argument("--grid", action="append", help="axis:lo:hi:count (repeatable)")
    p.add_argument("--t", action="append", type=float, help="time value (repeatable)")
    p.add_argument("--spin", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="compare shell-quadrature synthesis with the closed form")
    common(p)
    p.add_argument("--grid", action="append")
    p.add_argument("--t", action="append", type=float)
    p.add_argument("--nodes", default="64,64", help="polar,azimuth node counts")
    p.add_argument("--refine-tol", type=float, default=None,
                   help="also run at doubled nodes and fail if the runs differ by more")
    p.set_defaults(func=cmd_synth, tol=1e-6)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p, ("json", "csv", "text"), "text")
    p.add_argument("--suite", default="all")
    p.add_argument("--timings", action="store_true", help="record wall-clock runtimes")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("inner", help="weighted inner product of smeared packets")
    common(p, ("text", "json"), "text")
    p.add_argument("--centers", default="0.6", help="one or two bump centre speeds")
    p.add_argument("--width", type=float, default=0.025, help="bump half-width")
    p.add_argument("--axis", action="append", help="profile axis (give twice for two axes)")
    p.set_defaults(func=cmd_inner)

    p = sub.add_parser("scan", help="sweep one parameter of a registered check")
    common(p)
    p.add_argument("--check", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="lo:hi:count")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth" and args.tol is None:
        args.tol = 1e-6
    try:
        if args.dump_config:
            _write(args, json.dumps(_config(args), sort_keys=True) + "\n")
            return EXIT_OK
        return args.func(args)
    except (UsageError, harness.ConfigError, DomainError) as exc:
        print(f"kgwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
