"""``qcm``: design, simulate and check optimal qubit cloning machines.

Angles are radians unless ``--degrees`` is given. Exit codes: 0 success,
2 bad usage, 3 request outside a design's domain, 4 verification failure.

JSON records have the keys ``case``, ``params``, ``p``, ``weight``,
``omega`` (six named angles), ``copy_a`` / ``copy_b`` (``eta_x``, ``eta_y``,
``eta_z``, ``delta_z``), ``f_a``, ``f_b``, ``objective``, ``residual``,
``channel_id``, ``classification`` and ``diagnostics``. Floats are written
with Python's shortest round-trip repr, so parsing them back is exact.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict

import numpy as np

from qcm import design
from qcm.bloch import StateAngles, UnphysicalStateError, bloch_from_density, pure_density
from qcm.channels import reduce
from qcm.cloner import NAMES, ParamSet, evolve
from qcm.design import DEFAULT_SEED, DesignCase, DesignDomainError, DesignResult, classify
from qcm.ensembles import EnsembleError, EnsembleMoments, EnsembleSpec, moments_closed_form, moments_quadrature
from qcm.verify import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4

FORMATS = ("text", "json", "csv")
SWEEP_CASES = ("fixed-theta", "phase-covariant", "universal")
MAP_KEYS = ("eta_x", "eta_y", "eta_z", "delta_z")


class UsageError(Exception):
    pass


def _floats(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what}: expected {n} finite comma-separated numbers, got {text!r}")
    return vals


def _angle(value, degrees: bool):
    if value is None:
        return None
    return math.radians(value) if degrees else value


def _jsonable(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return str(v)


def record(res: DesignResult, params: dict) -> dict:
    """Flat JSON-ready description of a design result."""
    return {
        "case": res.case,
        "params": _jsonable(params),
        "p": res.p,
        "weight": res.weight,
        "omega": dict(zip(NAMES, map(float, res.omega.as_array()))),
        "copy_a": dict(zip(MAP_KEYS, res.map_a.as_tuple())),
        "copy_b": dict(zip(MAP_KEYS, res.map_b.as_tuple())),
        "f_a": res.f_a,
        "f_b": res.f_b,
        "objective": res.objective,
        "residual": res.residual,
        "channel_id": res.channel_id,
        "classification": classify(res.map_a, res.map_b).label,
        "diagnostics": _jsonable(res.diagnostics),
    }


def _flatten(rec: dict) -> dict:
    flat = {}
    for key, val in rec.items():
        if key == "diagnostics":
            continue
        if isinstance(val, dict):
            for sub, x in val.items():
                flat[f"{key}.{sub}"] = x
        else:
            flat[key] = val
    return flat


def _emit(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 else rows
        out.write(json.dumps(payload, indent=2) + "\n")
    elif fmt == "csv":
        flat = [_flatten(r) for r in rows]
        w = csv.DictWriter(out, fieldnames=list(flat[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(flat)
    else:
        for i, r in enumerate(rows):
            if i:
                out.write("\n")
            for key, val in _flatten(r).items():
                out.write(f"{key:<20} {val!r}\n" if isinstance(val, float) else f"{key:<20} {val}\n")


# -- subcommands ------------------------------------------------------------


def _moments_arg(args) -> EnsembleMoments | None:
    if args.moments:
        return EnsembleMoments.from_sequence(_floats(args.moments, 4, "--moments"))
    if args.ensemble:
        return moments_closed_form(_load_ensemble(args.ensemble))
    return None


def _load_ensemble(path: str) -> EnsembleSpec:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read ensemble file: {exc}") from None
    try:
        return EnsembleSpec.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed ensemble JSON: {exc}") from None


def cmd_design(args, out) -> int:
    theta = _angle(args.theta, args.degrees)
    params = {"p": args.p}
    reflected = False
    if args.case in ("fixed-theta", "mirror-pc"):
        if theta is None:
            raise UsageError(f"--case {args.case} needs --theta")
        params["theta_tilde"] = theta
        if args.case == "fixed-theta" and math.pi / 2 < theta <= math.pi:
            # states below the equator: relabel up <-> down and design on the reflection
            theta, reflected = math.pi - theta, True
    if args.case == "two-state":
        if args.overlap is None:
            raise UsageError("--case two-state needs --overlap")
        params["overlap"] = args.overlap
    if args.case == "two-state-weighted":
        if args.k is None:
            raise UsageError("--case two-state-weighted needs --k")
        params["k"] = args.k
    moments = _moments_arg(args)
    if args.case in ("centered-symmetric", "numeric"):
        if moments is None:
            raise UsageError(f"--case {args.case} needs --moments or --ensemble")
        params["moments"] = list(moments.as_tuple())
    if args.case == "numeric":
        params.update(budget=args.budget, seed=args.seed)

    case = DesignCase(
        kind=args.case,
        p=args.p,
        theta_tilde=theta,
        moments=moments,
        overlap=args.overlap,
        weight=args.k,
        budget=args.budget,
        seed=args.seed,
    )
    res = case.run()
    rec = record(res, params)
    if args.case == "fixed-theta":
        rec["diagnostics"]["reflected"] = reflected
    _emit([rec], args.format, out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    vals = _floats(args.omega, 6, "--omega")
    th, ph = _floats(args.state, 2, "--state")
    if args.degrees:
        vals = [math.radians(v) for v in vals]
        th, ph = math.radians(th), math.radians(ph)
    omega = ParamSet(*vals)
    angles = StateAngles(th, ph)
    rho = pure_density(angles)
    state = evolve(omega, rho)
    rows = []
    for copy in ("A", "B"):
        red = reduce(state, copy)
        fid = float(np.real(np.trace(rho @ red)))
        r = bloch_from_density(red)
        rows.append({"copy": copy, "r_x": float(r[0]), "r_y": float(r[1]), "r_z": float(r[2]), "fidelity": fid})
    _emit(rows, args.format, out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    n = args.p_grid
    if n < 1:
        raise UsageError("--p-grid must be >= 1")
    theta = _angle(args.theta, args.degrees)
    if args.case == "fixed-theta":
        if theta is None:
            raise UsageError("--case fixed-theta needs --theta")
        if math.pi / 2 < theta <= math.pi:
            theta = math.pi - theta
    rows = []
    for i in range(n + 1):
        p = i / n
        res = DesignCase(kind=args.case, p=p, theta_tilde=theta).run()
        rows.append({"p": p, "f_a": res.f_a, "f_b": res.f_b, "residual": res.residual})
    if args.format == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
    elif args.format == "csv":
        w = csv.DictWriter(out, fieldnames=["p", "f_a", "f_b", "residual"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    else:
        out.write(f"{'p':>6} {'f_a':>20} {'f_b':>20} {'residual':>12}\n")
        for r in rows:
            out.write(f"{r['p']:>6.3f} {r['f_a']:>20.16f} {r['f_b']:>20.16f} {r['residual']:>12.3e}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    results = run_suite(args.suite)
    if args.format == "json":
        out.write(json.dumps([asdict(r) for r in results], indent=2) + "\n")
    elif args.format == "csv":
        w = csv.DictWriter(out, fieldnames=["name", "passed", "worst", "tol", "seconds"], lineterminator="\n")
        w.writeheader()
        w.writerows(asdict(r) for r in results)
    else:
        for r in results:
            mark = "PASS" if r.passed else "FAIL"
            out.write(f"{mark}  {r.name:<34} worst={r.worst:.3e}  tol={r.tol:.0e}  ({r.seconds:.2f}s)\n")
        n_ok = sum(r.passed for r in results)
        out.write(f"{n_ok}/{len(results)} checks passed\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_moments(args, out) -> int:
    spec = _load_ensemble(args.ensemble)
    closed = moments_closed_form(spec)
    quad = moments_quadrature(spec, args.resolution)
    names = ("nz_bar", "nx2_bar", "ny2_bar", "nz2_bar")
    rows = [
        {"moment": k, "closed_form": a, "quadrature": b, "abs_diff": abs(a - b)}
        for k, a, b in zip(names, closed.as_tuple(), quad.as_tuple())
    ]
    if args.format == "text":
        out.write(f"{'moment':<9} {'closed_form':>22} {'quadrature':>22} {'abs_diff':>10}\n")
        for r in rows:
            out.write(f"{r['moment']:<9} {r['closed_form']:>22.17g} {r['quadrature']:>22.17g} {r['abs_diff']:>10.2e}\n")
    else:
        _emit(rows, args.format, out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log optimiser diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--degrees", action="store_true", help="read angles in degrees")

    d = sub.add_parser("design", parents=[common], help="optimal machine for one case")
    d.add_argument("--case", required=True, choices=design.CASES)
    d.add_argument("--p", type=float, default=0.5, help="weight of copy A (default 0.5)")
    d.add_argument("--theta", type=float, help="polar angle for fixed-theta and mirror-pc")
    d.add_argument("--overlap", type=float, help="overlap s for two-state")
    d.add_argument("--k", type=float, help="probability of the first state for two-state-weighted")
    d.add_argument("--moments", help="nz,nx2,ny2,nz2 for centered-symmetric and numeric")
    d.add_argument("--ensemble", help="ensemble JSON file ('-' for stdin) in place of --moments")
    d.add_argument("--budget", type=int, default=32, help="multi-start count for numeric")
    d.add_argument("--seed", type=int, default=DEFAULT_SEED)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", parents=[common], help="clone one pure state with given angles")
    s.add_argument("--omega", required=True, help="alpha,alpha_tilde,beta,beta_tilde,gamma,gamma_tilde")
    s.add_argument("--state", required=True, help="theta,phi of the input state")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", parents=[common], help="fidelity trade-off over p")
    w.add_argument("--case", required=True, choices=SWEEP_CASES)
    w.add_argument("--p-grid", type=int, default=10, help="number of intervals in [0, 1]")
    w.add_argument("--theta", type=float, help="polar angle for fixed-theta")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", parents=[common], help="run the self-check suite")
    v.add_argument("--suite", choices=SUITES, default="quick")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("moments", parents=[common], help="ensemble moments, closed form vs quadrature")
    m.add_argument("--ensemble", required=True, help="ensemble JSON file ('-' for stdin)")
    m.add_argument("--resolution", type=int, default=64)
    m.set_defaults(func=cmd_moments)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"qcm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DesignDomainError, EnsembleError, UnphysicalStateError, ValueError) as exc:
        print(f"qcm: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def run(argv: list[str]) -> tuple[int, str]:
    """Invoke the CLI in-process and capture stdout."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
