"""Command-line front end: ``check``, ``validate`` and ``eval`` jobs driven by a JSON config."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .criteria import Verdict, custom_verdict, transcendence_verdict
from .divisors import sigma_translate
from .exactgroup import EPS, GENS, Monomial, RelationLattice, case_lattice
from .thetafield import NotEllipticError, custom_quotient, tq_divisor
from . import numerics as nm

EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_VALIDATION = 3
EXIT_CONFIG = 4

REFERENCE_NOME = 0.3 + 0.1j


class ConfigError(ValueError):
    pass


# --- config parsing ---------------------------------------------------------------------

def _monomial(data: Any, where: str) -> Monomial:
    try:
        if isinstance(data, str):
            return Monomial.parse(data)
        if isinstance(data, dict):
            return Monomial.from_json(data)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"field {where}: {e}") from None
    raise ConfigError(f"field {where}: expected a monomial string or exponent map")


def _complex(data: Any, where: str) -> complex:
    if isinstance(data, (int, float)):
        return complex(data)
    if isinstance(data, list) and len(data) == 2 and all(isinstance(x, (int, float)) for x in data):
        return complex(data[0], data[1])
    raise ConfigError(f"field {where}: expected a number or a [re, im] pair")


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def parse_lattice(cfg: dict, case: str) -> RelationLattice:
    gens = cfg.get("gens", list(GENS))
    if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
        raise ConfigError("field gens: expected a list of generator names")
    if "lattice" in cfg:
        rows = cfg["lattice"]
        if not isinstance(rows, list):
            raise ConfigError("field lattice: expected a list of integer rows")
        for i, r in enumerate(rows):
            if not isinstance(r, list) or not all(isinstance(x, int) for x in r):
                raise ConfigError(f"field lattice[{i}]: expected a list of integers")
            if len(r) != len(gens):
                raise ConfigError(f"field lattice[{i}]: {len(r)} entries for {len(gens)} generators")
        try:
            lat = RelationLattice(tuple(gens), tuple(tuple(r) for r in rows))
        except ValueError as e:
            raise ConfigError(f"field lattice: {e}") from None
    elif case in ("A", "B"):
        lat = case_lattice(case)
    else:
        lat = RelationLattice(tuple(gens))
    rels = cfg.get("relations", [])
    if rels:
        try:
            lat = lat.with_relations([_monomial(r, f"relations[{i}]") for i, r in enumerate(rels)])
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"field relations: {e}") from None
    return lat


def parse_epsilons(cfg: dict) -> list[Monomial]:
    eps = cfg.get("epsilons")
    if eps is None:
        return [Monomial.gen(e) for e in EPS]
    if not isinstance(eps, list) or len(eps) != 8:
        raise ConfigError("field epsilons: expected 8 monomials")
    return [_monomial(e, f"epsilons[{i}]") for i, e in enumerate(eps)]


def parse_numeric(cfg: dict, trunc: int | None = None, nodes: int | None = None) -> nm.NumericParams:
    num = cfg.get("numeric")
    if num is None or num == "demo" or (isinstance(num, dict) and num.get("demo")):
        base = nm.demo_params()
        extra = num if isinstance(num, dict) else {}
    else:
        if not isinstance(num, dict):
            raise ConfigError("field numeric: expected an object or \"demo\"")
        for k in ("p", "q", "epsilons"):
            if k not in num:
                raise ConfigError(f"field numeric.{k}: missing")
        eps = num["epsilons"]
        if not isinstance(eps, list) or len(eps) != 8:
            raise ConfigError("field numeric.epsilons: expected 8 complex numbers")
        try:
            base = nm.NumericParams(_complex(num["p"], "numeric.p"), _complex(num["q"], "numeric.q"),
                                    tuple(_complex(e, f"numeric.epsilons[{i}]") for i, e in enumerate(eps)))
        except ValueError as e:
            raise ConfigError(f"field numeric: {e}") from None
        extra = num
    scale = extra.get("scale_e1")
    kw: dict[str, Any] = {}
    if scale is not None:
        e = list(base.epsilons)
        e[0] *= _complex(scale, "numeric.scale_e1")
        kw["epsilons"] = tuple(e)
    kw["N"] = trunc if trunc is not None else int(cfg.get("trunc", extra.get("trunc", base.N)))
    kw["M"] = nodes if nodes is not None else int(cfg.get("nodes", extra.get("nodes", base.M)))
    try:
        return base.replace(**kw)
    except ValueError as e:
        raise ConfigError(f"numeric settings: {e}") from None


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Monomial):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


# --- jobs -------------------------------------------------------------------------------------

def _verdict_report(v: Verdict, lattice: RelationLattice) -> dict:
    rep = {
        "outcome": v.outcome.value,
        "reasons": v.reason_kinds(),
        "reason_details": [r.to_json() for r in v.reasons],
        "candidates": [c.to_json() for c in v.candidates],
        "collisions": v.telescoper.to_json()["collisions"] if v.telescoper else [],
        "telescoper": v.telescoper.to_json() if v.telescoper else None,
        "nu_status": "zero" if v.nu_zero else ("nonzero" if v.data is not None else "unknown"),
        "lattice": lattice.to_json(),
    }
    if v.data is not None:
        d = v.data
        rep["divisors"] = {
            "p2": tq_divisor(d.p2, lattice).to_json(),
            "sigma_inv_p3": sigma_translate(tq_divisor(d.p3, lattice), -1).to_json(),
            "b": tq_divisor(d.b, lattice).to_json(),
        }
        rep["nu_factors"] = [str(x) for x in d.nu_factors]
    return rep


def run_check(cfg: dict, case: str | None = None) -> tuple[dict, int]:
    case = case or cfg.get("case")
    if case not in ("A", "B", "custom"):
        raise ConfigError("field case: expected A, B or custom")
    lattice = parse_lattice(cfg, case)
    if case == "custom" and "b" in cfg:
        bspec = cfg["b"]
        if not isinstance(bspec, dict):
            raise ConfigError("field b: expected an object with zeros/poles")
        level = bspec.get("level", 1)
        if not isinstance(level, int) or level < 1:
            raise ConfigError("field b.level: expected a positive integer")
        zeros = [_monomial(x, f"b.zeros[{i}]") for i, x in enumerate(bspec.get("zeros", []))]
        poles = [_monomial(x, f"b.poles[{i}]") for i, x in enumerate(bspec.get("poles", []))]
        b = custom_quotient(level, zeros, poles)
        nu = cfg.get("nu_factors")
        nu = None if nu is None else [_monomial(x, f"nu_factors[{i}]") for i, x in enumerate(nu)]
        v = custom_verdict(b, lattice, nu_factors=nu)
    else:
        eps = parse_epsilons(cfg)
        generic_case = cfg.get("generic_case", case if case in ("A", "B") else "A")
        try:
            v = transcendence_verdict(eps, generic_case, lattice)
        except NotEllipticError as e:
            raise ConfigError(str(e)) from None
    rep = _verdict_report(v, lattice)
    return rep, EXIT_OK if v.outcome.value == "transcendental" else EXIT_INCONCLUSIVE


@dataclass
class Check:
    name: str
    value: float | None
    tol: float
    relation: str = "<"
    error: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.error is not None or self.value is None or not math.isfinite(self.value):
            return False
        return self.value < self.tol if self.relation == "<" else self.value > self.tol

    def to_json(self):
        d = {"name": self.name, "value": self.value, "tol": self.tol, "relation": self.relation,
             "pass": self.passed}
        if self.error:
            d["error"] = self.error
        d.update(self.extra)
        return d


def _guard(name: str, tol: float, fn, relation: str = "<") -> Check:
    try:
        value, extra = fn()
        return Check(name, float(value), tol, relation, extra=extra)
    except (ArithmeticError, ValueError) as e:
        return Check(name, None, tol, relation, error=f"{type(e).__name__}: {e}")


def theta_functional_residual(p: complex, N: int, zs) -> float:
    zs = np.asarray(zs)
    lhs = nm.theta_eval(p * zs, p, N) + nm.theta_eval(zs, p, N) / zs
    return float(np.max(np.abs(lhs) / np.abs(nm.theta_eval(zs, p, N))))


def gamma_shift_residuals(p: complex, q: complex, N: int, zs) -> tuple[float, float]:
    zs = np.asarray(zs)
    g = nm.elliptic_gamma_eval(zs, p, q, N)
    gq = nm.elliptic_gamma_eval(q * zs, p, q, N)
    gp = nm.elliptic_gamma_eval(p * zs, p, q, N)
    rq = np.abs(gq - nm.theta_eval(zs, p, N) * g) / np.abs(gq)
    rp = np.abs(gp - nm.theta_eval(zs, q, N) * g) / np.abs(gp)
    return float(rq.max()), float(rp.max())


def ellipticity_residual(params: nm.NumericParams, zs) -> float:
    zs = np.asarray(zs)
    a = nm.A_eval(zs, params)
    return float(np.max(np.abs(nm.A_eval(params.p * zs, params) - a) / np.abs(a)))


def run_validate(cfg: dict, trunc: int | None = None, nodes: int | None = None,
                 seed: int | None = None) -> tuple[dict, int]:
    params = parse_numeric(cfg, trunc, nodes)
    seed = int(cfg.get("seed", 0)) if seed is None else seed
    samples = int(cfg.get("samples", 16))
    rng = np.random.default_rng(seed)
    ann = nm.sample_annulus(100, int(rng.integers(2 ** 31)))
    N = params.N
    checks = []
    checks.append(_guard("theta_functional_equation", 1e-10,
                         lambda: (theta_functional_residual(REFERENCE_NOME, N, ann), {"p": REFERENCE_NOME})))
    checks.append(_guard("theta_functional_equation_config_p", 1e-10,
                         lambda: (theta_functional_residual(params.p, N, ann), {})))
    zs50 = ann[:50]
    checks.append(_guard("gamma_q_shift", 1e-8,
                         lambda: (gamma_shift_residuals(params.p, params.q, N, zs50)[0], {})))
    checks.append(_guard("gamma_p_shift", 1e-8,
                         lambda: (gamma_shift_residuals(params.p, params.q, N, zs50)[1], {})))
    checks.append(_guard("theta_zero_set", 1e-10, lambda: (max(
        abs(nm.theta_eval(REFERENCE_NOME ** k, REFERENCE_NOME, N)) for k in range(-2, 3)), {"p": REFERENCE_NOME})))
    checks.append(_guard("ellipticity_of_A", 1e-8, lambda: (ellipticity_residual(params, ann[:32]), {
        "balancing_residual": params.balancing_residual()})))
    zc = nm.sample_contour(samples, int(rng.integers(2 ** 31)))

    def ab_identity():
        out = 0.0
        nu = nm.nu_eval(params)
        for z in zc:
            Aq, Ai = nm.A_eval(params.q * z, params), nm.A_eval(1 / (params.q * z), params)
            a = nm.hypergeo_a_eval(z, params)
            out = max(out, abs(a * Aq + Aq + Ai - nu) / (abs(Aq) + abs(Ai) + abs(nu)))
        return out, {}
    checks.append(_guard("a_coefficient_identity", 1e-10, ab_identity))

    def hyp():
        errs = []

        def f(z):
            val, err = nm.f_eval(params, z, with_error=True)
            errs.append(err / max(abs(val), 1e-300))
            return val
        r = nm.hypergeo_residual(f, params, zc)
        return r.max, {"quadrature_error": max(errs), "degenerate": r.degenerate}
    c = _guard("hypergeometric_residual", 1e-4, hyp)
    checks.append(c)
    if c.error is None:
        checks.append(Check("quadrature_convergence", c.extra["quadrature_error"], 1e-6))
    ok = all(ch.passed for ch in checks)
    rep = {"residuals": [ch.to_json() for ch in checks], "outcome": "pass" if ok else "fail",
           "reasons": [ch.name for ch in checks if not ch.passed],
           "settings": {"N": params.N, "M": params.M, "seed": seed, "samples": samples}}
    return rep, EXIT_OK if ok else EXIT_VALIDATION


def run_eval(cfg: dict, points_cfg: dict) -> tuple[dict, int]:
    params = parse_numeric(cfg)
    pts = points_cfg.get("points")
    if not isinstance(pts, list):
        raise ConfigError("points file: field points must be a list of [re, im] pairs")
    zs = [_complex(z, f"points[{i}]") for i, z in enumerate(pts)]
    funcs = points_cfg.get("functions", ["theta", "gamma", "A", "f"])
    known = {"theta", "gamma", "A", "V", "f"}
    bad = [f for f in funcs if f not in known]
    if bad:
        raise ConfigError(f"points file: unknown functions {bad}; choose from {sorted(known)}")
    p, q, N = params.p, params.q, params.N

    def v_at(z):
        t, _ = nm._f_arguments(params, z)
        r = nm.v_integral_eval(t, p, q, params.M, N, balance_tol=1e-8)
        return r.value, r.error

    table = []
    for z in zs:
        row: dict[str, Any] = {"z": z}
        for name in funcs:
            try:
                if name == "theta":
                    val, err = nm.theta_with_bound(z, p, N)
                    row[name] = {"value": complex(val), "error": float(err)}
                elif name == "gamma":
                    row[name] = {"value": nm.elliptic_gamma_eval(z, p, q, N)}
                elif name == "A":
                    row[name] = {"value": nm.A_eval(z, params)}
                elif name == "V":
                    val, err = v_at(z)
                    row[name] = {"value": val, "error": err}
                else:
                    val, err = nm.f_eval(params, z, with_error=True)
                    row[name] = {"value": val, "error": err}
            except (ArithmeticError, ValueError) as e:
                row[name] = {"error_kind": type(e).__name__, "message": str(e)}
        table.append(row)
    rep = {"values": table, "nu": nm.nu_eval(params), "reasons": [],
           "settings": {"N": params.N, "M": params.M}}
    return rep, EXIT_OK


# --- entry point -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="difftrans", description=(
        "Differential transcendence checks for elliptic hypergeometric difference equations."))
    sub = ap.add_subparsers(dest="mode", required=True)
    c = sub.add_parser("check", help="exact transcendence verdict")
    c.add_argument("--case", choices=["A", "B", "custom"], required=True)
    c.add_argument("--params", required=True, help="JSON config")
    c.add_argument("--out", help="report path (default: stdout)")
    v = sub.add_parser("validate", help="numeric residual suite")
    v.add_argument("--params", required=True)
    v.add_argument("--trunc", type=int)
    v.add_argument("--nodes", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    e = sub.add_parser("eval", help="tabulate special functions")
    e.add_argument("--params", required=True)
    e.add_argument("--points", required=True)
    e.add_argument("--out")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.params)
        if args.mode == "check":
            inputs = {"mode": "check", "case": args.case, "config": cfg}
            rep, code = run_check(cfg, args.case)
        elif args.mode == "validate":
            inputs = {"mode": "validate", "config": cfg, "trunc": args.trunc, "nodes": args.nodes,
                      "seed": args.seed}
            rep, code = run_validate(cfg, args.trunc, args.nodes, args.seed)
        else:
            pts = load_config(args.points)
            inputs = {"mode": "eval", "config": cfg, "points": pts}
            rep, code = run_eval(cfg, pts)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    rep.update(mode=args.mode, inputs_digest=digest(inputs), tool_version=__version__)
    rep.setdefault("residuals", [])
    text = dumps(rep)
    if args.out:
        Path(args.out).write_text(text)
        summary = rep.get("outcome", "ok")
        print(f"{args.mode}: {summary} (report written to {args.out})")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
