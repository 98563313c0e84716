"""Command-line front end: ``gnt-lab {gnt,verify,classical,integrate,kappa-table}``.

Every command writes a JSON report (schema ``gnt-lab-report/1``) that embeds
the configuration that produced it, so ``--replay report.json`` reruns it
exactly.  Exit codes: 0 all checks pass, 1 some check exceeds its tolerance,
2 the input could not be parsed, 3 a combinatorial cap or a too-coarse
grid was refused.
"""

from __future__ import annotations

import os

_THREADS = os.environ.get("GNT_LAB_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse
import csv
import io
import json
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .classical import check_R_identities, classical_direct, compare_families, even_family
from .fiber import rule_from_spec, vanishing_by_symmetry
from .gnt import variation_rhs, identity_sweep, newton_family_recurrence
from .invariants import EndoSystem, newton_polynomial, sigma_derivative_exact_table, sigma_kronecker
from .multiindex import EnumerationCapError, MultiIndex, MultiIndexError, multi_indices_upto
from .torus import checks as tc
from .torus.frames import NAMED, frame_from_config
from .torus.geometry import ResolutionError, build_geometry
from .torus.kappa import codim_one_value, kappa_recurrence, kappa_table

SCHEMA = "gnt-lab-report/1"
EXIT_OK, EXIT_TOLERANCE, EXIT_PARSE, EXIT_CAP = 0, 1, 2, 3

DEFAULT_TOLERANCES = {
    "exact": 0.0,
    "float_algebra": 1e-10,
    "integral": 1e-3,
    "pointwise_identity": 1e-10,
    "pointwise_fd": 5e-2,
    "order": 1.8,
}


class InputError(ValueError):
    """Configuration or input file that cannot be used."""


# ---------------------------------------------------------------------------
# report rows


def _jsonable(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, MultiIndex):
        return x.to_json()
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _abs(x: Any) -> Any:
    return abs(x) if isinstance(x, Fraction) else float(abs(x))


def make_row(check: str, u: Any, lhs: Any, rhs: Any, residual: Any, tolerance: float, **extra) -> dict:
    row = {"check": check, "u": u, "lhs": lhs, "rhs": rhs, "residual": residual,
           "tolerance": tolerance, "pass": bool(residual <= tolerance)}
    row.update(extra)
    return _jsonable(row)


def difference_row(check: str, u: Any, lhs: Any, rhs: Any, tolerance: float, **extra) -> dict:
    return make_row(check, u, lhs, rhs, _abs(lhs - rhs), tolerance, **extra)


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_report(config: dict, rows: list[dict], extra: dict | None = None) -> dict:
    failed = [r for r in rows if not r["pass"]]
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "config": config,
        "status": "ok" if not failed else "tolerance_failure",
        "summary": {"checks": len(rows), "failed": len(failed)},
        "checks": rows,
    }
    if extra:
        report.update(_jsonable(extra))
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_csv(path: Path, rows: list[dict], fields: Sequence[str]) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (json.dumps(v) if isinstance(v, list) else v) for k, v in r.items()})
    write_atomic(path, buf.getvalue())


# ---------------------------------------------------------------------------
# inputs


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _parse_u(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise InputError(f"bad multi-index {text!r}; use comma-separated integers like 1,1") from exc


def _systems(config: dict) -> list[tuple[dict, EndoSystem]]:
    """``(log entry, system)`` pairs for a ``gnt``/``verify``/``classical`` config."""
    exact = not config.get("float", False)
    source = config["system"]
    if source == "random":
        p, q = config["p"], config["q"]
        if p is None or q is None:
            raise InputError("--system random needs --p and --q")
        out = []
        for t in range(config["trials"]):
            seed = [config["seed"], t]
            sys_ = EndoSystem.random_integer(p, q, np.random.default_rng(seed), config["lo"], config["hi"])
            if not exact:
                sys_ = EndoSystem(sys_.matrices.astype(float))
            out.append(({"trial": t, "rng_seed": seed}, sys_))
        return out
    data = _load_json(source)
    try:
        return [({"trial": 0, "source": source}, EndoSystem.from_json(data, exact=exact))]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{source}: not an endomorphism system ({exc})") from exc


# ---------------------------------------------------------------------------
# gnt / verify / classical


def run_gnt(config: dict) -> tuple[list[dict], dict]:
    (log, sys_), = _systems(config)
    max_len = sys_.p if config["max_len"] is None else config["max_len"]
    fam = newton_family_recurrence(sys_, max_len)
    family = fam.to_json()
    tol = DEFAULT_TOLERANCES["exact" if sys_.exact else "float_algebra"]
    u0 = MultiIndex.zero(sys_.q)
    defect = max(_abs(v) for v in (fam.T(u0) - sys_.identity()).flat)
    rows = [make_row("T_zero_is_identity", u0, defect, 0, defect, tol)]
    return rows, {"family": family, "trial": log}


def _verify_system(sys_: EndoSystem, rng: np.random.Generator | None, config: dict) -> list[dict]:
    tol = DEFAULT_TOLERANCES["exact" if sys_.exact else "float_algebra"]
    rows = []
    for r in identity_sweep(sys_, explicit_max=config["explicit_max"]):
        rows.append(difference_row(r["check"], r["u"], r["lhs"], r["rhs"], tol))
    if config["kronecker"]:
        sigma = newton_polynomial(sys_)
        for u in multi_indices_upto(sys_.q, sys_.p):
            axes = [a for a in range(1, sys_.q + 1) for _ in range(u[a])]
            rows.append(difference_row("sigma_kronecker_vs_det", u, sigma_kronecker(sys_, axes), sigma[u], tol))
    if sys_.exact and rng is not None:
        direction = EndoSystem.random_integer(sys_.p, sys_.q, rng, config["lo"], config["hi"])
        deriv = sigma_derivative_exact_table(sys_, direction)
        fam = newton_family_recurrence(sys_, sys_.p)
        for u in multi_indices_upto(sys_.q, sys_.p)[1:]:
            rows.append(difference_row("variational", u, deriv.get(u, Fraction(0)),
                                       variation_rhs(direction, fam.T, u), tol))
    if config["classical"] is not None:
        rows.extend(_classical_rows(sys_, config["classical"], tol, direction=None))
    return rows


def _classical_rows(sys_: EndoSystem, r_max: int, tol: float, direction: EndoSystem | None) -> list[dict]:
    ev = even_family(sys_, r_max)
    rows = [difference_row(f"classical_{r['check']}", r.get("alpha"), r["lhs"], r["rhs"], tol, r=r["r"])
            for r in compare_families(classical_direct(sys_, r_max), ev)]
    rows += [difference_row(r["check"], None, r["lhs"], r["rhs"], tol, r=r["r"])
             for r in check_R_identities(ev, direction=direction)]
    return rows


def run_verify(config: dict) -> tuple[list[dict], dict]:
    rows, trials = [], []
    for log, sys_ in _systems(config):
        seed = log.get("rng_seed", [config["seed"], log["trial"]])
        rng = np.random.default_rng(seed + [1])
        for r in _verify_system(sys_, rng, config):
            r["trial"] = log["trial"]
            rows.append(r)
        trials.append({**log, "p": sys_.p, "q": sys_.q})
    return rows, {"trials": trials}


def run_classical(config: dict) -> tuple[list[dict], dict]:
    rows, trials = [], []
    for log, sys_ in _systems(config):
        tol = DEFAULT_TOLERANCES["exact" if sys_.exact else "float_algebra"]
        seed = log.get("rng_seed", [config["seed"], log["trial"]])
        direction = (EndoSystem.random_integer(sys_.p, sys_.q, np.random.default_rng(seed + [2]),
                                               config["lo"], config["hi"]) if sys_.exact else None)
        for r in _classical_rows(sys_, config["r_max"], tol, direction):
            r["trial"] = log["trial"]
            rows.append(r)
        trials.append(log)
    return rows, {"trials": trials}


# ---------------------------------------------------------------------------
# integrate


INTEGRATE_CHECKS = ("main", "stokes", "walczak", "vanishing", "extrinsic", "one_operator", "codazzi",
                    "div_lemma", "lem_loc")


def _geometry_config(config: dict) -> dict:
    src = config["geometry"]
    if src in NAMED:
        geo = {"frame": {"name": src}}
    else:
        geo = _load_json(src)
        if not isinstance(geo, dict) or "frame" not in geo:
            raise InputError(f"{src}: geometry config needs a 'frame' entry")
    if config.get("m") is not None:
        geo["m"] = config["m"]
    if config.get("u"):
        geo["u"] = config["u"]
    if config.get("checks"):
        geo["checks"] = config["checks"]
    geo.setdefault("m", 64)
    geo.setdefault("deriv", "fd")
    geo.setdefault("checks", ["main"])
    unknown = sorted(set(geo["checks"]) - set(INTEGRATE_CHECKS))
    if unknown:
        raise InputError(f"unknown checks {unknown}; choose from {list(INTEGRATE_CHECKS)}")
    return geo


def _tolerances(geo: dict) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(geo.get("tolerances", {}))
    return tol


def _integrate_once(geo: dict, m: int) -> list[dict]:
    """Every requested check at resolution ``m``; rows carry a ``metric`` used for refinement."""
    try:
        frame = frame_from_config(geo["frame"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad frame config ({exc})") from exc
    tol = _tolerances(geo)
    geom = build_geometry(frame, m, geo["deriv"], geo.get("smooth_tol", 1e-4))
    q, p = frame.q, frame.p
    fiber = dict(geo.get("fiber", {}))
    fiber.setdefault("group", "SO")
    if q >= 3:
        fiber.setdefault("kind", "mc")
        fiber.setdefault("seed", 0)
    rule = rule_from_spec(fiber, q)
    us = [MultiIndex(tuple(u)) for u in geo.get("u", [[1] * q])]
    for u in us:
        if u.q != q:
            raise InputError(f"multi-index {u.entries} has length {u.q}, geometry has q={q}")
    checks = geo["checks"]
    rows = []
    base = {"m": m}
    if "main" in checks or "stokes" in checks:
        res = tc.check_main_theorems(geom, rule, us)
        for u, r in res.items():
            if "main" in checks:
                rows.append(make_row("main", u, r.lhs, r.rhs, r.relative, tol["integral"],
                                     terms=r.terms, metric=r.residual, **base))
            if "stokes" in checks:
                rows.append(make_row("stokes", u, 0.0, r.rhs - r.lhs, abs(r.rhs - r.lhs), tol["integral"],
                                     metric=abs(r.rhs - r.lhs), **base))
    if "walczak" in checks:
        w = tc.check_walczak(geom)
        rows.append(make_row("walczak", None, 0.0, w.integral.rhs, w.integral.residual, tol["integral"],
                             terms=w.integral.terms, metric=w.integral.residual, **base))
        for name, val in w.pointwise.items():
            rows.append(make_row(f"walczak_{name}", None, val, 0.0, val, tol["pointwise_identity"], **base))
    if "vanishing" in checks or "extrinsic" in checks:
        ext = tc.extrinsic_curvatures(geom, rule, us)
        for u, e in ext.items():
            if "extrinsic" in checks:
                rows.append(make_row("extrinsic", u, e.sigma_M, None, 0.0, 0.0, error=e.error, **base))
            if "vanishing" in checks and vanishing_by_symmetry(u, rule.group):
                bound = max(1e-6, 3 * e.error)
                rows.append(make_row("vanishing", u, e.sigma_M, 0.0, abs(e.sigma_M), bound, **base))
    if "one_operator" in checks:
        for u in us:
            k = u[1]
            if any(u[a] for a in range(2, q + 1)):
                continue
            sphere = tc.one_operator_reduction(geom, k, fiber.get("n", 64), rule.group)
            group = tc.extrinsic_curvature(geom, rule, u).sigma_M
            rows.append(difference_row("one_operator", u, sphere, group, tol["integral"], **base))
    if "codazzi" in checks:
        if q != 1:
            raise InputError("the codazzi check needs codimension one")
        r = tc.codazzi_residual(geom)
        rows.append(make_row("codazzi", None, r.max_residual, 0.0, r.relative, tol["pointwise_fd"],
                             metric=r.max_residual, **base))
    if "div_lemma" in checks:
        for u in us:
            r = tc.check_div_lemma(geom, np.eye(q), u)
            rows.append(make_row("div_lemma", u, r.max_residual, 0.0, r.relative, tol["pointwise_fd"],
                                 metric=r.max_residual, **base))
    if "lem_loc" in checks:
        r = tc.lem_loc_residual(geom)
        rows.append(make_row("lem_loc", None, r.max_residual, 0.0, r.relative, tol["pointwise_fd"],
                             metric=r.max_residual, **base))
    return rows


def run_integrate(config: dict) -> tuple[list[dict], dict]:
    geo = _geometry_config(config)
    if not config.get("refine"):
        rows = _integrate_once(geo, geo["m"])
        for r in rows:
            r.pop("metric", None)
        return rows, {"geometry": geo}
    ms = sorted(config["refine"])
    tol = _tolerances(geo)
    per_m = {m: _integrate_once(geo, m) for m in ms}
    table, rows = [], []
    keys = [(r["check"], json.dumps(r["u"])) for r in per_m[ms[0]] if "metric" in r]
    for check, ukey in keys:
        series = [next(r for r in per_m[m] if r["check"] == check and json.dumps(r["u"]) == ukey) for m in ms]
        study = tc.RefinementStudy(ms, [s["metric"] for s in series])
        for row in study.rows():
            table.append({"check": check, "u": json.loads(ukey), **row})
        orders = study.orders
        finest = study.values[-1]
        floor = finest <= tc.ROUNDOFF_FLOOR
        worst = min(orders) if orders else float("inf")
        rows.append(make_row(f"{check}_order", json.loads(ukey), worst, tol["order"],
                             0.0 if (floor or worst >= tol["order"]) else tol["order"] - worst, 0.0,
                             ms=ms, values=study.values, orders=orders, roundoff_floor=floor))
    return rows, {"geometry": geo, "refinement": table}


# ---------------------------------------------------------------------------
# kappa table


def run_kappa(config: dict) -> tuple[list[dict], dict]:
    p, q = config["p"], config["q"]
    if p is None or q is None:
        raise InputError("kappa-table needs --p and --q")
    rs = [config["r"]] if config["r"] is not None else list(range(0, p + 1, 2))
    if any(r % 2 for r in rs):
        raise InputError("r must be even")
    rows, table = [], []
    for r in rs:
        row = [x for x in kappa_table(p, q, r) if x.r == r][0]
        table.append(row.to_json())
        if r >= 2:
            rc = kappa_recurrence(p, q, r)
            rows.append(difference_row("kappa_ratio", None, rc.ratio if rc.ratio is not None else Fraction(0),
                                       rc.expected, 0.0, p=p, q=q, r=r))
            rows.append(difference_row("kappa_unrolled", None, row.from_sigma, row.unrolled, 0.0, p=p, q=q, r=r))
            if q == 1:
                rows.append(difference_row("kappa_codim_one", None, row.value, codim_one_value(p, r), 0.0,
                                           p=p, q=q, r=r))
    return rows, {"table": table}


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnt-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="report path (default: print to stdout)")
        sp.add_argument("--replay", help="rerun the configuration embedded in an earlier report")

    def system_args(sp, default_system: str | None = None):
        sp.add_argument("--system", default=default_system, help="system JSON file or 'random'")
        sp.add_argument("--p", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--lo", type=int, default=-3)
        sp.add_argument("--hi", type=int, default=3)
        sp.add_argument("--float", action="store_true", help="binary floats instead of exact rationals")

    sp = sub.add_parser("gnt", help="dump the sigma and T tables of a system")
    system_args(sp)
    sp.add_argument("--max-len", type=int, dest="max_len")
    common(sp)

    sp = sub.add_parser("verify", help="run the algebraic identity suite")
    system_args(sp)
    sp.add_argument("--classical", type=int, metavar="R_MAX", help="also compare classical operators up to R_MAX")
    sp.add_argument("--kronecker", action="store_true", help="include the Kronecker-delta oracle")
    sp.add_argument("--explicit-max", type=int, default=4, dest="explicit_max")
    common(sp)

    sp = sub.add_parser("classical", help="classical operators: direct vs reduction, (R1)-(R3)")
    system_args(sp)
    sp.add_argument("--r-max", type=int, default=2, dest="r_max")
    common(sp)

    sp = sub.add_parser("integrate", help="integral formulas on a torus geometry")
    sp.add_argument("--geometry", help="geometry JSON file or a named frame field")
    sp.add_argument("--u", action="append", type=_parse_u, help="multi-index, e.g. 1,1 (repeatable)")
    sp.add_argument("--check", action="append", dest="checks", choices=INTEGRATE_CHECKS)
    sp.add_argument("--m", type=int, help="grid resolution override")
    sp.add_argument("--refine", type=_int_list, help="comma-separated resolutions for a convergence study")
    sp.add_argument("--csv", help="CSV path for the refinement table")
    common(sp)

    sp = sub.add_parser("kappa-table", help="total curvatures in constant curvature (formal kappa)")
    sp.add_argument("--p", type=int)
    sp.add_argument("--q", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--csv", help="CSV path for the table")
    common(sp)
    return parser


RUNNERS = {"gnt": run_gnt, "verify": run_verify, "classical": run_classical,
           "integrate": run_integrate, "kappa-table": run_kappa}

_NOT_CONFIG = {"out", "replay", "csv"}


def config_from_args(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if config["command"] in ("gnt", "verify", "classical") and config.get("system") is None:
        raise InputError("--system is required")
    if config["command"] == "integrate" and config.get("geometry") is None:
        raise InputError("--geometry is required")
    return config


def run(config: dict) -> tuple[int, dict, list[dict]]:
    """Execute one configuration; returns ``(exit code, report, csv rows)``."""
    rows, extra = RUNNERS[config["command"]](config)
    report = build_report(config, rows, extra)
    code = EXIT_OK if report["status"] == "ok" else EXIT_TOLERANCE
    table = extra.get("refinement") or extra.get("table") or []
    return code, report, table


def _error_report(config: dict | None, status: str, message: str) -> dict:
    return {"schema": SCHEMA, "version": __version__, "config": config, "status": status,
            "error": message, "summary": {"checks": 0, "failed": 0}, "checks": []}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = None
    try:
        if args.replay:
            original = _load_json(args.replay)
            if not isinstance(original, dict) or original.get("schema") != SCHEMA:
                raise InputError(f"{args.replay}: not a {SCHEMA} report")
            config = original["config"]
        else:
            config = config_from_args(args)
        code, report, table = run(config)
        if args.replay:
            same = dump_report({**report, "checks": report["checks"]}) == dump_report(original)
            report["replay"] = {"source": args.replay, "identical": same}
    except (InputError, MultiIndexError) as exc:
        code, report, table = EXIT_PARSE, _error_report(config, "parse_error", str(exc)), []
    except (EnumerationCapError, ResolutionError) as exc:
        code, report, table = EXIT_CAP, _error_report(config, "cap_refusal", str(exc)), []
    text = dump_report(report)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    if getattr(args, "csv", None) and table:
        fields = list(table[0].keys())
        write_csv(Path(args.csv), table, fields)
    if code != EXIT_OK:
        print(f"gnt-lab: {report['status']}" + (f": {report.get('error')}" if report.get("error") else ""),
              file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
