"""Command-line front end.

Subcommands: degree, index, classify, verify, catalog, suite. Every run
writes one JSON report (stdout, or ``--out``) and a one-line summary on
stderr. Exit codes: 0 success, 1 verification failed, 2 numerical failure,
3 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import __version__
from .block import TANGENT, DegenerateTangencyError, classify_boundary, isolation_check, tangency_components_2d
from .config import DEFAULTS
from .degree import degree, point_index
from .errors import InputError, IsoblockError, NumericalError
from .field import CATALOG_NAMES, catalog, parse_field
from .region import parse_region
from . import verify as V

log = logging.getLogger("isoblock")

EXIT_OK, EXIT_FAIL, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2, 3

# config keys accepted by --config; these mirror the flag destinations
TOLERANCE_KEYS = ("loop_samples", "surface_samples", "sphere_grid", "newton_tol", "tangency_tol",
                  "quadrature_agreement", "max_refinements", "antipodal_tol", "isolation_horizon")
CONFIG_KEYS = ("field", "catalog", "dim", "param", "region", "method", "seed", "point", "radius",
               "chiK", "chiS", "chiSstar", "chiA", "chiR", "chiL", "mode", "reverse", "resolution",
               "samples", "dump", "isolation") + TOLERANCE_KEYS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p):
    g = p.add_argument_group("field and region")
    g.add_argument("--field", help="comma-separated components, e.g. \"x,-y\"")
    g.add_argument("--catalog", help="built-in field name, e.g. lorenz or attractor(3)")
    g.add_argument("--dim", type=int, help="dimension for --field (default: number of components)")
    g.add_argument("--param", action="append", metavar="K=V", help="parameter value (repeatable)")
    g.add_argument("--region", help="ball:c1,..:r | box:lo1,..:hi1,.. | shell:c1,..:rin:rout")
    o = p.add_argument_group("run")
    o.add_argument("--method", choices=("auto", "winding", "kronecker", "zeros"))
    o.add_argument("--out", help="write the JSON report here instead of stdout")
    o.add_argument("--seed", type=int, help="random seed recorded in the report")
    o.add_argument("--config", help="JSON file with the same keys as the flags")
    o.add_argument("--resolution", type=float, help="cubical grid width for Euler characteristics")
    o.add_argument("-v", "--verbose", action="store_true")
    t = p.add_argument_group("tolerances")
    t.add_argument("--loop-samples", dest="loop_samples", type=int)
    t.add_argument("--surface-samples", dest="surface_samples", type=int)
    t.add_argument("--sphere-grid", dest="sphere_grid", type=int, nargs=2, metavar=("NTHETA", "NPHI"))
    t.add_argument("--newton-tol", dest="newton_tol", type=float)
    t.add_argument("--tangency-tol", dest="tangency_tol", type=float)
    t.add_argument("--agreement", dest="quadrature_agreement", type=float)
    t.add_argument("--max-refinements", dest="max_refinements", type=int)
    t.add_argument("--antipodal-tol", dest="antipodal_tol", type=float)
    t.add_argument("--isolation-horizon", dest="isolation_horizon", type=float)


def _chis(p):
    for name in ("chiK", "chiS", "chiSstar", "chiA", "chiR", "chiL"):
        p.add_argument(f"--{name}", type=int, help=f"supplied Euler characteristic {name}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="isoblock", description="Degree, index and Euler characteristic checks for vector fields.")
    p.add_argument("--version", action="version", version=f"isoblock {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("degree", help="Brouwer degree over a region")
    _common(d)

    i = sub.add_parser("index", help="index of an isolated zero")
    _common(i)
    i.add_argument("--point", required=False, help="comma-separated coordinates of the zero")
    i.add_argument("--radius", type=float, help="radius of the ball around the zero")

    c = sub.add_parser("classify", help="exit/entrance/tangent decomposition of the boundary")
    _common(c)
    c.add_argument("--samples", type=int, help="boundary samples (per loop in 2D, per surface in 3D)")
    c.add_argument("--reverse", action="store_true", help="classify for the reversed field")
    c.add_argument("--dump", help="write labelled boundary points as CSV")
    c.add_argument("--isolation", action="store_true", help="also run the sampled isolation check")

    v = sub.add_parser("verify", help="check one identity")
    v.add_argument("check", choices=V.CHECK_IDS)
    _common(v)
    _chis(v)
    v.add_argument("--mode", choices=("same", "opposite"), help="antipodal direction")
    v.add_argument("--reverse", action="store_true", help="use -F (poincare-hopf)")
    v.add_argument("--samples", type=int)

    sub.add_parser("catalog", help="list built-in fields")

    s = sub.add_parser("suite", help="run the catalog verification matrix")
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--quick", action="store_true", help="skip the Lorenz cases")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


# -- config -----------------------------------------------------------------

def _load_config(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise InputError(f"unknown config keys {sorted(unknown)}")
    return data


def _merge(args, config):
    """Flags win over the config file; the config fills what the flags left unset."""
    for key, value in config.items():
        if getattr(args, key, None) in (None, False):
            setattr(args, key, value)


def _params(items) -> dict:
    out = {}
    if isinstance(items, dict):
        items = [f"{k}={v}" for k, v in items.items()]
    for item in items or []:
        key, sep, value = str(item).partition("=")
        if not sep or not key.strip():
            raise InputError(f"--param expects K=V, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise InputError(f"--param {key}: {value!r} is not a number") from None
    return out


def _field(args):
    if bool(args.field) == bool(args.catalog):
        raise InputError("give exactly one of --field and --catalog")
    params = _params(args.param)
    if args.catalog:
        return catalog(args.catalog, params)
    n = args.dim or args.field.count(",") + 1
    return parse_field(args.field, n, params)


def _region(args, f):
    if not args.region:
        raise InputError("--region is required")
    region = parse_region(args.region)
    if region.n != f.n:
        raise InputError(f"field has dimension {f.n} but region {args.region!r} has {region.n}")
    return region


def _tolerances(args):
    changes = {k: getattr(args, k, None) for k in TOLERANCE_KEYS}
    if changes.get("sphere_grid") is not None:
        changes["sphere_grid"] = tuple(int(v) for v in changes["sphere_grid"])
    return DEFAULTS.updated(**changes)


def _config_echo(args, tol) -> dict:
    keys = [k for k in CONFIG_KEYS if k not in TOLERANCE_KEYS]
    echo = {k: getattr(args, k) for k in keys if getattr(args, k, None) not in (None, False)}
    echo["tolerances"] = tol.to_dict()
    return echo


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


# -- commands ---------------------------------------------------------------

def _cmd_degree(args, f, region, tol):
    rep = degree(f, region, args.method or "auto", tol)
    body = rep.to_dict()
    summary = f"degree {rep.degree} (method {rep.method}, raw {rep.raw:.9g})"
    return EXIT_OK, body, summary


def _cmd_index(args, f, region_unused, tol):
    if not args.point or args.radius is None:
        raise InputError("index needs --point and --radius")
    try:
        z = [float(v) for v in str(args.point).split(",")]
    except ValueError:
        raise InputError(f"bad --point {args.point!r}") from None
    if len(z) != f.n:
        raise InputError(f"--point has {len(z)} coordinates, field has dimension {f.n}")
    idx = point_index(f, z, args.radius)
    residual = float(np.linalg.norm(f.eval(np.asarray(z))))
    body = {"method": "boundary", "point": z, "radius": args.radius, "index": idx, "degree": idx,
            "residual_at_point": residual}
    if residual > 1e-6 * max(1.0, float(np.linalg.norm(z))):
        body.setdefault("warnings", []).append(f"|F(point)| = {residual:.3g}; the point may not be a zero")
    return EXIT_OK, body, f"index {idx} at {z}"


def _cmd_classify(args, f, region, tol):
    samples = args.samples
    b = classify_boundary(f, region, samples, tol.tangency_tol, reverse=args.reverse)
    g = f.reversed() if args.reverse else f
    topo = V.block_topology(g, region, boundary=b, resolution=args.resolution, tol=tol.tangency_tol)
    boundary = b.summary()
    warnings = []
    if region.n == 2:
        try:
            boundary["tangency_count"] = tangency_components_2d(b)
        except DegenerateTangencyError as exc:
            boundary["tangency_count"] = None
            warnings.append(str(exc))
    boundary["component_chi"] = topo.component_chi
    euler = V.EulerData()
    euler.set("chi_N", topo.chi_N, f"computed (h={topo.resolution:g})")
    if topo.chi_L is not None:
        euler.set("chi_L", topo.chi_L, topo.chi_L_source)
    body = {"boundary": boundary, "euler": euler.to_dict(), "warnings": warnings}
    if args.isolation:
        iso = isolation_check(g, region, T=tol.isolation_horizon,
                              resolution=args.resolution or V.default_resolution(region))
        body["isolation"] = iso.__dict__
    if args.dump:
        with open(args.dump, "w") as fh:
            fh.write(",".join([f"x{i + 1}" for i in range(region.n)] + ["label", "alignment"]) + "\n")
            for p, c, a in zip(b.points, b.classes, b.alignment):
                fh.write(",".join(f"{v:.12g}" for v in p) + f",{c},{a:.6g}\n")
    tang = boundary.get("tangency_count")
    summary = f"components {b.verdicts()}, exit {b.count('exit')}, entrance {b.count('entrance')}, " \
              f"tangent {b.count(TANGENT)}" + (f", tangency count {tang}" if tang is not None else "")
    return EXIT_OK, body, summary


def check_args(**kw) -> argparse.Namespace:
    """Arguments for :func:`run_check` with everything optional left unset."""
    ns = argparse.Namespace(method=None, resolution=None, samples=None, reverse=False,
                            **{k: None for k in ("chiK", "chiS", "chiSstar", "chiA", "chiR", "chiL", "mode")})
    for k, v in kw.items():
        setattr(ns, k, v)
    return ns


def run_check(check, f, region, tol, args) -> V.VerifyReport:
    """Dispatch one check id with CLI-style arguments."""
    res = args.resolution
    get = lambda k: getattr(args, k, None)  # noqa: E731
    deg = None
    if check in ("conley", "eq1", "planar-bound", "nonsaddle", "connection"):
        deg = degree(f, region, args.method or "auto", tol)
    if check == "conley":
        return V.check_degree_conley(f, region, get("chiL"), res, deg=deg)
    if check == "eq1":
        return V.check_eq1(f, region, get("chiK"), get("chiS"), res, deg=deg)
    if check == "planar-bound":
        return V.check_planar_bound(f, region, get("chiK"), res, deg=deg)
    if check == "poincare-hopf":
        return V.check_poincare_hopf(f, region, bool(get("reverse")), res)
    if check == "tangency":
        return V.check_tangency(f, region, get("samples") or tol.loop_samples, res)
    if check == "nonsaddle":
        return V.check_nonsaddle(f, region, get("chiS"), get("chiSstar"), res, deg=deg)
    if check == "connection":
        return V.detect_connection(f, region, get("chiA"), get("chiR"), get("chiS"), get("chiK"), deg=deg)
    if check == "antipodal":
        return V.check_antipodal(f, region, get("mode"), get("chiK"), get("chiS"), tol.antipodal_tol)
    raise InputError(f"unknown check {check!r}")


def _cmd_verify(args, f, region, tol):
    rep = run_check(args.check, f, region, tol, args)
    code = EXIT_FAIL if rep.verdict == "fail" else EXIT_OK
    body = rep.to_dict()
    body["method"] = args.method or "auto"
    return code, body, rep.line()


def _cmd_catalog(args):
    rows = []
    for name in CATALOG_NAMES:
        f = catalog(name.replace("(n)", "(2)"))
        rows.append({"name": name, "dim": "n" if "(n)" in name else f.n, "source": f.source,
                     "params": f.param_map})
    return EXIT_OK, {"catalog": rows}, ", ".join(CATALOG_NAMES)


# -- suite ------------------------------------------------------------------

def suite_cases(quick: bool = False):
    """The catalog verification matrix: (label, check, field, region, kwargs)."""
    b2, b3 = "ball:0,0:1", "ball:0,0,0:1"
    sq = "box:-1,-1:1,1"
    shell = "shell:0,0:0.5:1.5"
    seg = "box:-2,-1:2,1"
    cases = [
        ("attractor(2)", "conley", b2, {}), ("attractor(3)", "conley", b3, {}),
        ("repeller(2)", "conley", b2, {}), ("repeller(3)", "conley", b3, {}),
        ("saddle2", "conley", sq, {}), ("limit_cycle", "conley", shell, {}),
        ("saddle2", "eq1", sq, {"chiK": 1, "chiS": 2}),
        ("segment_flow", "eq1", seg, {"chiK": 1, "chiS": 1}),
        ("attractor(3)", "eq1", b3, {}), ("repeller(3)", "eq1", b3, {}),
        ("attractor(2)", "planar-bound", b2, {}), ("repeller(2)", "planar-bound", b2, {}),
        ("saddle2", "planar-bound", sq, {"chiK": 1}), ("limit_cycle", "planar-bound", shell, {}),
        ("segment_flow", "planar-bound", seg, {"chiK": 1}),
        ("repeller(2)", "poincare-hopf", b2, {}), ("repeller(3)", "poincare-hopf", b3, {}),
        ("attractor(3)", "poincare-hopf", b3, {"reverse": True}),
        ("limit_cycle", "poincare-hopf", shell, {"reverse": True}),
        ("saddle2", "tangency", sq, {}), ("saddle2", "tangency", b2, {}),
        ("attractor(2)", "tangency", b2, {}), ("limit_cycle", "tangency", shell, {}),
        ("repeller(3)", "nonsaddle", b3, {}), ("attractor(3)", "nonsaddle", b3, {}),
        ("attractor(2)", "nonsaddle", b2, {}), ("limit_cycle", "nonsaddle", shell, {}),
        ("segment_flow", "connection", seg, {"chiA": 1, "chiR": 1, "chiS": 1, "chiK": 1}),
        ("attractor(2)", "antipodal", b2, {"mode": "opposite"}),
        ("even_field", "antipodal", b2, {"mode": "same"}),
        ("saddle2", "antipodal", sq, {"chiK": 1, "chiS": 2}),
    ]
    if not quick:
        big = "ball:0,0,0:60"
        cases += [
            ("lorenz", "connection", big, {"chiA": 2, "chiR": -1, "chiS": 0, "chiK": 1}),
            ("lorenz", "antipodal", big, {"chiK": 1, "chiS": 0}),
            ("lorenz", "eq1", "box:-6,-6,-6:6,6,6", {"chiK": -1, "chiS": 0}),
        ]
    return cases


def _cmd_suite(args):
    rows, worst = [], EXIT_OK
    for name, check, region_spec, kw in suite_cases(args.quick):
        ns = check_args(**kw)
        f = catalog(name)
        region = parse_region(region_spec)
        t0 = time.perf_counter()
        try:
            rep = run_check(check, f, region, DEFAULTS, ns)
            verdict, line = rep.verdict, rep.line()
            body = rep.to_dict()
        except NumericalError as exc:
            verdict, line, body = "error", f"{check}: {exc}", {"error": str(exc)}
        elapsed = time.perf_counter() - t0
        if verdict in ("fail", "error"):
            worst = EXIT_FAIL
        rows.append({"field": name, "region": region_spec, "check": check, "verdict": verdict,
                     "seconds": round(elapsed, 3), "report": body})
        print(f"{name:<14} {region_spec:<22} {line}", file=sys.stderr)
    counts = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    summary = "suite: " + ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
    return worst, {"rows": rows, "counts": counts}, summary


# -- entry ------------------------------------------------------------------

def _emit(report, out):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def run(argv=None) -> int:
    """Run one command; returns the process exit code."""
    t0 = time.perf_counter()
    report = {"tool-version": __version__}
    args = None
    try:
        args = build_parser().parse_args(argv)
        report["command"] = args.command
        logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "catalog":
            code, body, summary = _cmd_catalog(args)
        elif args.command == "suite":
            report["config"] = {"seed": args.seed, "quick": args.quick, "tolerances": DEFAULTS.to_dict()}
            code, body, summary = _cmd_suite(args)
        else:
            _merge(args, _load_config(args))
            tol = _tolerances(args)
            report["config"] = _config_echo(args, tol)
            f = _field(args)
            region = None if args.command == "index" else _region(args, f)
            handler = {"degree": _cmd_degree, "index": _cmd_index, "classify": _cmd_classify,
                       "verify": _cmd_verify}[args.command]
            code, body, summary = handler(args, f, region, tol)
        report.update(body)
        report.setdefault("warnings", [])
        if "verdict" not in report:
            report["verdict"] = "fail" if code == EXIT_FAIL else "ok"
    except InputError as exc:
        code, summary = EXIT_INPUT, f"input error: {exc}"
        report.update({"verdict": "input-error", "error": str(exc)})
    except NumericalError as exc:
        code, summary = EXIT_NUMERICAL, f"numerical failure ({type(exc).__name__}): {exc}"
        report.update({"verdict": "numerical-failure", "error": str(exc), "error_type": type(exc).__name__})
        for attr in ("point", "det", "magnitude", "t", "subexpression"):
            if getattr(exc, attr, None) is not None:
                report[attr] = getattr(exc, attr)
    except IsoblockError as exc:  # pragma: no cover - every subclass is handled above
        code, summary = EXIT_NUMERICAL, str(exc)
        report.update({"verdict": "error", "error": str(exc)})
    report["timing"] = {"seconds": round(time.perf_counter() - t0, 6)}
    _emit(report, getattr(args, "out", None) if args is not None else None)
    print(summary, file=sys.stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
