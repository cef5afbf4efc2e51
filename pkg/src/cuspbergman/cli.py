"""Command-line entry point ``cuspbergman``.

Exit codes: 0 success, 2 validation error, 3 numeric-tolerance failure (or an
unsatisfied bound under ``--strict``). Data goes to ``--out``, to
``$CUSPBERGMAN_OUT_DIR/<command>.<format>`` when that variable is set, or to
stdout; diagnostics go to stderr. Option values resolve as
flags > ``--config`` JSON file > built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import asymptotics, bounds, forms, orbits
from ._io import dumps, rows_to_csv
from .exceptions import (
    BoxOutsideDomainError,
    BoxTooLargeError,
    CapExceededError,
    ConvergenceError,
    DivergenceError,
    EmptyOrbitError,
    GramNotPositiveDefiniteError,
    HypothesisViolationError,
    InvalidPointError,
    TailTooLargeError,
    ToleranceNotMetError,
)
from .hyperbolic import UhpPoint
from .quadfield import QuadraticField, fundamental_unit

OUT_DIR_ENV = "CUSPBERGMAN_OUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_TOLERANCE = 0, 2, 3

DEFAULTS: dict[str, dict[str, Any]] = {
    "bergman": {"k": None, "series": None, "point": "i", "scan": False, "grid": 200, "basis_json": False},
    "bounds.heat-integral": {"rho": "0"},
    "bounds.hkeqn": {"k": "2", "rho": "0"},
    "bounds.type1": {"k": "2", "rinj": 2.0},
    "bounds.type2": {"k": "2", "rinj": 2.0, "y_mode": "sup", "y": None, "c": 1.0},
    "bounds.auxlemma": {"D": 5, "k": "2,2", "trials": 20, "seed": 0, "radius": 10.0},
    "bounds.unit-sum": {"D": 5, "y": None, "n_max": 10, "trials": 20, "seed": 0},
    "bounds.t-terms": {"rinj": 1.0, "delta": None},
    "bounds.gamma": {"k": "1:20:1"},
    "orbits.enum": {"group": "gamma3", "point": "i", "radius": 6.0, "exclude_cusp": False},
    "orbits.inj": {"group": "gamma3", "radius": 6.0, "exclude_cusp": True},
    "orbits.count": {"group": "gamma3", "point": "i", "radius": 6.0, "rho": "1,2,3,4,5,6", "exclude_cusp": False},
    "orbits.jl": {"group": "gamma3", "point": "i", "radius": 8.0, "rinj": None, "exclude_cusp": True},
    "que": {"box": "-0.5,0.5,1.2,2", "full_domain": False, "k": "12,24,36,48,60"},
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    fmt: str = "json"
    out: str | None = None
    workers: int = 1
    strict: bool = False


class ValidationError(ValueError):
    pass


# --- parsing helpers -----------------------------------------------------------------

def parse_point(s: str) -> UhpPoint:
    """'i', '2i', '0.3+1.5i' or 'x,y'."""
    s = str(s).strip().replace(" ", "")
    try:
        if "," in s:
            x, y = s.split(",")
            return UhpPoint(float(x), float(y))
        if not s.endswith("i"):
            raise ValueError
        t = s[:-1]
        if t == "" or t[-1] in "+-":
            t += "1"
        z = complex(t + "j")
    except ValueError as exc:
        raise ValidationError(f"cannot parse point {s!r}; use 'x,y' or 'a+bi'") from exc
    return UhpPoint(z.real, z.imag)


def parse_int_list(s) -> list[int]:
    """'12,24' or 'a:b:step' (inclusive) or a JSON list."""
    if isinstance(s, (list, tuple)):
        return [int(v) for v in s]
    if isinstance(s, int):
        return [s]
    s = str(s).strip()
    if ":" in s:
        parts = [int(p) for p in s.split(":")]
        if len(parts) == 2:
            parts.append(1)
        a, b, st = parts
        if st <= 0:
            raise ValidationError("range step must be positive")
        return list(range(a, b + 1, st))
    return [int(p) for p in s.split(",") if p]


def parse_float_list(s) -> list[float]:
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    if isinstance(s, (int, float)):
        return [float(s)]
    s = str(s).strip()
    if ":" in s:
        a, b, st = (float(p) for p in s.split(":"))
        n = int(round((b - a) / st))
        return [a + i * st for i in range(n + 1)]
    return [float(p) for p in s.split(",") if p]


def _check_weights(ks: list[int]) -> None:
    for k in ks:
        if k % 2 or k < 4:
            raise ValidationError(f"weight k={k} must be an even integer >= 4 (parity constraint)")


# --- commands ------------------------------------------------------------------------

def cmd_bergman(cfg: RunConfig) -> tuple[list[dict], dict]:
    p = cfg.params
    z = parse_point(p["point"])
    if p.get("series"):
        ks = parse_int_list(p["series"])
    elif p.get("k") is not None:
        ks = parse_int_list(p["k"])
    else:
        raise ValidationError("give --k or --series")
    _check_weights(ks)
    rows = []
    meta: dict = {"point": [z.x, z.y]}
    for k in ks:
        row = {"k": k, "dim": forms.dim_cusp_forms(k)}
        B = forms.bergman_kernel(k, z)
        row.update({"B": B, "ratio": B / k})
        if p.get("scan"):
            s = asymptotics.supnorm_scan(k, int(p["grid"]), int(p["grid"]))
            row.update({"sup": s.value, "sup_x": s.point.x, "sup_y": s.point.y, "sup_over_k32": s.ratio})
        rows.append(row)
        if p.get("basis_json"):
            meta.setdefault("bases", []).append(forms.basis_to_dict(forms.orthonormal_basis(k)))
    return rows, meta


def _random_unit(field_: QuadraticField, rng) -> tuple:
    e0 = fundamental_unit(field_)
    n = int(rng.integers(-3, 4))
    sign = 1 if rng.integers(0, 2) else -1
    return sign * (e0 ** n), n, sign


def cmd_bounds(cfg: RunConfig) -> tuple[list[dict], dict]:
    sub = cfg.command.split(".", 1)[1]
    p = cfg.params
    rows: list[dict] = []
    if sub == "heat-integral":
        for rho in parse_float_list(p["rho"]):
            if rho < 0:
                raise ValidationError("rho must be >= 0")
            v = bounds.heat_integral(rho)
            c = bounds.heat_integral_ceiling(rho)
            rows.append({"rho": rho, "truncated_value": v, "tail_bound": 0.0, "ceiling": c, "satisfied": v <= c})
    elif sub == "hkeqn":
        ks = parse_int_list(p["k"])
        for k in ks:
            if k <= 0 or k % 2:
                raise ValidationError(f"k={k} must be even and positive")
            for rho in parse_float_list(p["rho"]):
                a = bounds.heat_upper_hkeqn1(k, rho)
                b = bounds.heat_upper_hkeqn4(k, rho)
                rows.append({"k": k, "rho": rho, "hkeqn1": a, "hkeqn4": b, "satisfied": a <= b})
    elif sub == "type1":
        ks = parse_int_list(p["k"])
        rows.append({"k": ks, "r_inj": float(p["rinj"]), "value": bounds.type1_bound(ks, float(p["rinj"]))})
    elif sub == "type2":
        ks = parse_int_list(p["k"])
        y = parse_float_list(p["y"]) if p.get("y") else None
        t = bounds.type2_bound(ks, float(p["rinj"]), p["y_mode"], y, float(p["c"]))
        rows.append({"k": ks, "r_inj": float(p["rinj"]), "y_mode": p["y_mode"], "type1": t.type1,
                     "cusp": t.cusp, "total": t.total, "total_over_k32": t.total / math.prod(ks) ** 1.5})
    elif sub == "auxlemma":
        F = QuadraticField(int(p["D"]))
        ks = parse_int_list(p["k"])
        rng = np.random.default_rng(int(p["seed"]))
        for trial in range(int(p["trials"])):
            eps, n, sign = _random_unit(F, rng)
            z = [UhpPoint(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.5, 4.0))) for _ in range(2)]
            rep = bounds.auxlemma_lhs(F, z, eps, ks, float(p["radius"]))
            d = rep.to_dict()
            d["parameters"].update({"trial": trial, "unit_power": n, "unit_sign": sign})
            rows.append(d)
    elif sub == "unit-sum":
        F = QuadraticField(int(p["D"]))
        if p.get("y"):
            samples = [parse_float_list(p["y"])]
        else:
            rng = np.random.default_rng(int(p["seed"]))
            samples = [[float(rng.uniform(0.5, 4.0)), float(rng.uniform(0.5, 4.0))] for _ in range(int(p["trials"]))]
        for y in samples:
            rows.append(bounds.unit_sum(F, y, int(p["n_max"])).to_dict())
    elif sub == "t-terms":
        t = bounds.t_terms(float(p["rinj"]), None if p.get("delta") is None else float(p["delta"]))
        rows.append({"r_inj": float(p["rinj"]), "T1": t.T1, "T2": t.T2, "T3": t.T3,
                     "T2_ceiling": t.T2_ceiling, "T3_ceiling": t.T3_ceiling, "satisfied": t.satisfied})
    elif sub == "gamma":
        for k in parse_int_list(p["k"]):
            if k < 1:
                raise ValidationError("k must be >= 1")
            a = bounds.gamma_ratio_integral(k)
            b = bounds.gamma_ratio_quadrature(k)
            rows.append({"k": k, "closed_form": a, "quadrature": b, "abs_diff": abs(a - b),
                         "satisfied": abs(a - b) <= 1e-10})
    else:
        raise ValidationError(f"unknown bounds command {sub!r}")
    return rows, {}


def _group(p) -> orbits.GroupSpec:
    return orbits.GroupSpec.parse(str(p["group"]), bool(p.get("exclude_cusp")))


def cmd_orbits(cfg: RunConfig) -> tuple[list[dict], dict]:
    sub = cfg.command.split(".", 1)[1]
    p = cfg.params
    spec = _group(p)
    R = float(p["radius"])
    if R > orbits.RADIUS_CAP:
        raise ValidationError(f"radius {R} exceeds the cap {orbits.RADIUS_CAP}")
    meta = {"group": spec.label, "exclude_cusp_stabilizers": spec.exclude_cusp_stabilizers, "radius": R}
    if sub == "enum":
        z = parse_point(p["point"])
        recs = orbits.enumerate_orbit(spec, z, R, workers=cfg.workers)
        rows = [dict(zip("abcd", r.gamma.key()), rho=r.rho) for r in recs]
        meta["point"] = [z.x, z.y]
        return rows, meta
    if sub == "inj":
        sample = orbits.default_sample_grid()
        r = orbits.injectivity_radius(spec, sample, R, workers=cfg.workers)
        return [{"r_inj_measured": r, "r_inj_safe": orbits.SAFETY_FACTOR * r, "samples": len(sample)}], meta
    if sub == "count":
        z = parse_point(p["point"])
        data = orbits.counting_data(spec, z, R, workers=cfg.workers)
        rows = []
        for rho in parse_float_list(p["rho"]):
            if rho > R:
                raise ValidationError(f"rho={rho} beyond the enumeration radius {R}")
            rows.append({"rho": rho, "count": orbits.counting_function(data, rho)})
        meta["point"] = [z.x, z.y]
        return rows, meta
    if sub == "jl":
        z = parse_point(p["point"])
        r = p.get("rinj")
        if r is None:
            r = orbits.SAFETY_FACTOR * orbits.injectivity_radius(spec, orbits.default_sample_grid(), min(R, 6.0),
                                                                   workers=cfg.workers)
        r = float(r)
        s = orbits.orbit_exp_sum(spec, z, R, r_inj=r, workers=cfg.workers)
        data = orbits.counting_data(spec, z, R, workers=cfg.workers)
        jl = orbits.jl_upper_bound(lambda t: math.exp(-2 * t), 0.75 * r, r, data)
        lhs = 1.0 + s.value + s.tail
        ceiling = 9.0 + 1.0 / (4 * math.sinh(r / 4) ** 2)
        meta["point"] = [z.x, z.y]
        return [{"identity": 1.0, "orbit_sum": s.value, "tail_bound": s.tail, "total": lhs, "jl_bound": jl,
                 "ceiling": ceiling, "r_inj": r, "records": s.count,
                 "satisfied": lhs <= jl and lhs <= ceiling}], meta
    raise ValidationError(f"unknown orbits command {sub!r}")


def parse_box(s) -> asymptotics.MassBox:
    try:
        vals = parse_float_list(s)
    except ValueError as exc:
        raise ValidationError(f"malformed box {s!r}") from exc
    if len(vals) != 4:
        raise ValidationError(f"box needs x0,x1,y0,y1, got {s!r}")
    try:
        return asymptotics.MassBox(*vals, in_domain=False)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_que(cfg: RunConfig) -> tuple[list[dict], dict]:
    p = cfg.params
    ks = parse_int_list(p["k"])
    _check_weights(ks)
    box = None if p.get("full_domain") else parse_box(p["box"])
    rows = []
    for k in ks:
        if forms.dim_cusp_forms(k) == 0:
            raise ValidationError(f"S_{k} is zero; choose k with cusp forms")
        q = asymptotics.que_mass(box, k)
        row = {"k": k, "mass": q.mass, "target": q.target, "abs_error": q.error,
               "volume_quadrature": q.volume_quadrature, "volume_exact": q.volume_exact}
        if box is None:
            row["satisfied"] = q.error <= 1e-3
        rows.append(row)
    meta = {"box": None if box is None else [box.x0, box.x1, box.y0, box.y1]}
    return rows, meta


DISPATCH = {"bergman": cmd_bergman, "bounds": cmd_bounds, "orbits": cmd_orbits, "que": cmd_que}


# --- argument handling -----------------------------------------------------------------

def _add_globals(ap: argparse.ArgumentParser, default) -> None:
    ap.add_argument("--config", default=default, help="JSON file with parameter values")
    ap.add_argument("--format", dest="fmt", choices=["json", "csv"], default=default)
    ap.add_argument("--out", default=default, help="output file (default: $%s/<command>.<format> or stdout)" % OUT_DIR_ENV)
    ap.add_argument("--workers", type=int, default=default)
    ap.add_argument("--strict", action="store_true", default=default,
                    help="exit 3 when a reported bound is not satisfied")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cuspbergman", description=__doc__.splitlines()[0])
    _add_globals(ap, None)
    # the same options are accepted after the subcommand as well
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, argparse.SUPPRESS)
    sp = ap.add_subparsers(dest="command", required=True)

    def leaf(group, name, **kw):
        return group.add_parser(name, parents=[common], **kw)

    b = leaf(sp, "bergman", help="Bergman kernel values, series and sup-norm scans")
    b.add_argument("--k")
    b.add_argument("--series", help="a:b:step, inclusive")
    b.add_argument("--point")
    b.add_argument("--scan", action="store_true", default=None)
    b.add_argument("--grid", type=int)
    b.add_argument("--basis-json", dest="basis_json", action="store_true", default=None)

    bd = leaf(sp, "bounds", help="heat-kernel chain and lattice/unit bounds")
    bsp = bd.add_subparsers(dest="sub", required=True)
    x = leaf(bsp, "heat-integral")
    x.add_argument("--rho")
    x = leaf(bsp, "hkeqn")
    x.add_argument("--k")
    x.add_argument("--rho")
    x = leaf(bsp, "type1")
    x.add_argument("--k")
    x.add_argument("--rinj", type=float)
    x = leaf(bsp, "type2")
    x.add_argument("--k")
    x.add_argument("--rinj", type=float)
    x.add_argument("--y-mode", dest="y_mode", choices=["sup", "fixed"])
    x.add_argument("--y")
    x.add_argument("--c", type=float)
    x = leaf(bsp, "auxlemma")
    x.add_argument("--D", type=int)
    x.add_argument("--k")
    x.add_argument("--trials", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--radius", type=float)
    x = leaf(bsp, "unit-sum")
    x.add_argument("--D", type=int)
    x.add_argument("--y")
    x.add_argument("--n-max", dest="n_max", type=int)
    x.add_argument("--trials", type=int)
    x.add_argument("--seed", type=int)
    x = leaf(bsp, "t-terms")
    x.add_argument("--rinj", type=float)
    x.add_argument("--delta", type=float)
    x = leaf(bsp, "gamma")
    x.add_argument("--k")

    ob = leaf(sp, "orbits", help="orbit enumeration, counting and injectivity radius")
    osp = ob.add_subparsers(dest="sub", required=True)
    for name in ("enum", "inj", "count", "jl"):
        x = leaf(osp, name)
        x.add_argument("--group")
        x.add_argument("--radius", type=float)
        x.add_argument("--exclude-cusp", dest="exclude_cusp", action="store_true", default=None)
        if name != "inj":
            x.add_argument("--point")
        if name == "count":
            x.add_argument("--rho")
        if name == "jl":
            x.add_argument("--rinj", type=float)

    q = leaf(sp, "que", help="mass equidistribution and dimension consistency")
    q.add_argument("--box")
    q.add_argument("--full-domain", dest="full_domain", action="store_true", default=None)
    q.add_argument("--k")
    return ap


GLOBAL_KEYS = ("fmt", "out", "workers", "strict", "config", "command", "sub")


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    name = ns.command if getattr(ns, "sub", None) is None else f"{ns.command}.{ns.sub}"
    params = dict(DEFAULTS[name])
    file_cfg: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
    # file values: top-level globals, then a section named after the command
    section = file_cfg.get(name, {})
    for k, v in section.items():
        if k not in params:
            raise ValidationError(f"unknown parameter {k!r} for {name}")
        params[k] = v
    for k, v in vars(ns).items():
        if k in GLOBAL_KEYS or v is None:
            continue
        params[k] = v

    def pick(key, default):
        v = getattr(ns, key, None)
        if v is not None:
            return v
        if key == "fmt" and "format" in file_cfg:
            return file_cfg["format"]
        return file_cfg.get(key, default)

    fmt = pick("fmt", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError("format must be json or csv")
    workers = int(pick("workers", 1))
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    return RunConfig(name, params, fmt, pick("out", None), workers, bool(pick("strict", False)))


def render(cfg: RunConfig, rows: list[dict], meta: dict) -> str:
    if cfg.fmt == "csv":
        return rows_to_csv(rows)
    payload = {"command": cfg.command, "parameters": cfg.params, "metadata": meta, "results": rows}
    return dumps(payload) + "\n"


def _destination(cfg: RunConfig) -> str | None:
    if cfg.out:
        return cfg.out
    d = os.environ.get(OUT_DIR_ENV)
    if d:
        return os.path.join(d, f"{cfg.command.replace('.', '_')}.{cfg.fmt}")
    return None


def run(cfg: RunConfig) -> int:
    rows, meta = DISPATCH[cfg.command.split(".")[0]](cfg)
    text = render(cfg, rows, meta)
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(dest)), exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {dest}", file=sys.stderr)
    if cfg.strict and any(r.get("satisfied") is False for r in rows):
        print("some reported bounds are not satisfied", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


VALIDATION_ERRORS = (ValidationError, InvalidPointError, HypothesisViolationError, CapExceededError,
                     BoxOutsideDomainError, BoxTooLargeError, DivergenceError, EmptyOrbitError, ValueError)
TOLERANCE_ERRORS = (ToleranceNotMetError, ConvergenceError, GramNotPositiveDefiniteError, TailTooLargeError)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(ns)
        return run(cfg)
    except TOLERANCE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
