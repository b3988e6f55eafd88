"""Riccati candidate search, telescoper obstruction and the combined transcendence verdict."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from .divisors import Divisor, degree, sigma_translate, weight
from .exactgroup import (ONE, P, Q, Monomial, RelationLattice, default_epsilons, is_generic,
                         member_with_exponents)
from .thetafield import (Hypergeometric, ThetaQuotient, build_hypergeometric, tq_divisor, tq_lift,
                         tq_sigma)


class NonGenericLatticeError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass


class EmptyDivisorError(ValueError):
    pass


@dataclass(frozen=True)
class RiccatiCandidate:
    """Counts describing one admissible (r1, r2, deg r0) shape.

    ``alpha`` / ``alpha_prime`` count chosen points of r1 / r2 per parameter
    group (points sharing a class up to p-powers and roots of unity);
    ``gamma`` counts chosen points whose class only involves p and q.
    """

    deg_r1: int
    alpha: tuple[int, ...]
    alpha_prime: tuple[int, ...]
    gamma: int
    deg_r2: int
    deg_r0: int
    m: int = field(default=0, compare=False)
    witness: Any = field(default=None, compare=False, repr=False)

    def sort_key(self):
        return (self.deg_r1, self.alpha, self.alpha_prime, self.gamma, self.deg_r2, self.deg_r0)

    def is_trivial(self) -> bool:
        return self.deg_r1 == 0 and self.deg_r2 == 0 and self.deg_r0 == 0

    def to_json(self) -> dict:
        return {"deg_r1": self.deg_r1, "alpha": list(self.alpha), "alpha_prime": list(self.alpha_prime),
                "gamma": self.gamma, "deg_r2": self.deg_r2, "deg_r0": self.deg_r0}


# --- grouping -------------------------------------------------------------------

@dataclass
class _Group:
    key: Monomial
    order: tuple
    points: list  # (canonical point, multiplicity)

    @property
    def pi_zero(self) -> bool:
        return set(self.key.generators) <= {Q}

    @property
    def size(self) -> int:
        return sum(n for _, n in self.points)


def _strip(m: Monomial) -> Monomial:
    return Monomial(tuple((g, a) for g, a in m.exponents if g != P))


def _groups(d: Divisor) -> list[_Group]:
    """Positive part of ``d`` grouped by class modulo p-powers and roots of unity."""
    reps = dict(zip((k for k, _ in d.canonical_items()), (r for r, _ in d.items())))
    by: dict[Monomial, _Group] = {}
    for x, n in d.canonical_items():
        if n <= 0:
            continue
        key = _strip(x)
        g = by.setdefault(key, _Group(key, _strip(reps[x]).sort_key(), []))
        g.order = min(g.order, _strip(reps[x]).sort_key())
        g.points.append((x, n))
    gs = list(by.values())
    gs.sort(key=lambda g: (g.pi_zero, g.order, g.key.sort_key()))
    for g in gs:
        g.points.sort(key=lambda t: t[0].sort_key())
    return gs


def _signature(g1: list[_Group], g2: list[_Group], c1: Sequence[int], c2: Sequence[int], level: int,
               qexp: Fraction, m: int, witness) -> RiccatiCandidate:
    alpha = tuple(c for g, c in zip(g1, c1) if not g.pi_zero)
    alpha_p = tuple(c for g, c in zip(g2, c2) if not g.pi_zero)
    gamma = sum(c for g, c in zip(g1, c1) if g.pi_zero) + sum(c for g, c in zip(g2, c2) if g.pi_zero)
    d0 = qexp * level
    return RiccatiCandidate(sum(c1), alpha, alpha_p, gamma, sum(c2), int(d0), m, witness)


# --- linear feasibility ----------------------------------------------------------

class _LinearSystem:
    """Integer box-constrained system E x = 0, h . x >= 0 with an LP relaxation for pruning."""

    def __init__(self, vectors: list[dict[str, Fraction]], signs: list[int], upper: list[int]):
        coords = sorted({g for v in vectors for g in v if g not in (P, Q)})
        rows = [[s * v.get(g, Fraction(0)) for v, s in zip(vectors, signs)] for g in coords]
        rows.append([Fraction(s) for s in signs])  # degree balance
        self.eq = [r for r in rows if any(r)]
        self.h = [s * v.get(Q, Fraction(0)) for v, s in zip(vectors, signs)]
        self.upper = list(upper)
        self.n = len(vectors)
        self._Aeq = np.array([_int_row(r) for r in self.eq], dtype=float).reshape(len(self.eq), self.n)
        self._Aub = -np.array([_int_row(self.h)], dtype=float)
        self._ub = np.array(self.upper, dtype=float)

    def exact_ok(self, x: Sequence[int]) -> bool:
        if any(sum(a * xi for a, xi in zip(r, x)) != 0 for r in self.eq):
            return False
        return sum(a * xi for a, xi in zip(self.h, x)) >= 0

    def qexp(self, x: Sequence[int]) -> Fraction:
        return sum((a * xi for a, xi in zip(self.h, x)), Fraction(0))

    def _range(self, row: np.ndarray, fixed: Sequence[int]) -> tuple[float, float]:
        k = len(fixed)
        base = float(np.dot(row[:k], fixed)) if k else 0.0
        rest = row[k:] * self._ub[k:]
        return base + rest[rest < 0].sum(), base + rest[rest > 0].sum()

    def _interval_ok(self, fixed: Sequence[int]) -> bool:
        for row in self._Aeq:
            lo, hi = self._range(row, fixed)
            if lo > 1e-9 or hi < -1e-9:
                return False
        return self._range(-self._Aub[0], fixed)[1] >= -1e-9

    def feasible(self, fixed: Sequence[int]) -> bool:
        """Relaxation check with the first ``len(fixed)`` variables pinned; never prunes a real solution."""
        if not self._interval_ok(fixed):
            return False
        k = len(fixed)
        if k == self.n:
            return True
        bounds = [(v, v) for v in fixed] + [(0, u) for u in self.upper[k:]]
        res = linprog(np.zeros(self.n), A_ub=self._Aub, b_ub=[1e-9], A_eq=self._Aeq if len(self.eq) else None,
                      b_eq=np.zeros(len(self.eq)) if len(self.eq) else None, bounds=bounds, method="highs")
        return res.status != 2


def _int_row(r: Sequence[Fraction]) -> list[int]:
    den = 1
    for a in r:
        den = lcm(den, Fraction(a).denominator)
    return [int(Fraction(a) * den) for a in r]


def _dfs(system: _LinearSystem, max_nodes: int | None):
    """All integer points of the box satisfying the exact system, with relaxation pruning."""
    out = []
    nodes = 0
    stack: list[list[int]] = [[]]
    while stack:
        fixed = stack.pop()
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise ResourceError(f"search exceeded {max_nodes} nodes")
        if not system.feasible(fixed):
            continue
        if len(fixed) == system.n:
            if system.exact_ok(fixed):
                out.append(tuple(fixed))
            continue
        k = len(fixed)
        for v in range(system.upper[k], -1, -1):
            stack.append(fixed + [v])
    return out


# --- residues of p-exponents -------------------------------------------------------

def _subset_residues(fracs: list[tuple[Fraction, int]], count: int) -> dict[Fraction, tuple[int, ...]]:
    """Achievable sums (mod 1) of ``count`` points chosen with multiplicity caps, with one witness each."""
    states: dict[tuple[int, Fraction], tuple[int, ...]] = {(0, Fraction(0)): ()}
    for f, cap in fracs:
        nxt: dict[tuple[int, Fraction], tuple[int, ...]] = {}
        for (c, r), pick in states.items():
            for take in range(0, min(cap, count - c) + 1):
                key = (c + take, (r + take * f) % 1)
                nxt.setdefault(key, pick + (take,))
        states = nxt
    return {r: pick for (c, r), pick in states.items() if c == count}


def _combine_residues(options: list[dict[Fraction, tuple]], signs: list[int]):
    """A choice per group whose signed residues sum to 0 mod 1, or None."""
    states: dict[Fraction, tuple] = {Fraction(0): ()}
    for opts, s in zip(options, signs):
        nxt = {}
        for r, picks in states.items():
            for r2, pick in opts.items():
                nxt.setdefault((r + s * r2) % 1, picks + (pick,))
        states = nxt
    return states.get(Fraction(0))


# --- Riccati searches ----------------------------------------------------------------

def _require_multiplicity_one(d: Divisor, name: str):
    for _, n in d.canonical_items():
        if n != 1:
            raise ValueError(f"{name} has a point of multiplicity {n}; the constraint search needs "
                             "multiplicity one (use general_riccati_enumerator)")


def riccati_constraint_search(p2_div: Divisor, sigma_inv_p3_div: Divisor, lattice: RelationLattice,
                              case: str | None = None, max_nodes: int | None = 200_000) -> list[RiccatiCandidate]:
    """All count signatures admitted by conditions (i)-(iv) of the Riccati structure theorem.

    Works on per-group counts: the linear part of (iv) (parameter exponents
    cancel, q-exponent is a nonnegative multiple of 1/level) and (iii) are
    solved by branch and bound; the p-exponent integrality is then decided
    exactly by a residue dynamic program inside the groups.
    """
    if p2_div.level != sigma_inv_p3_div.level:
        raise ValueError("divisors must share a level")
    level = p2_div.level
    if case is not None and not is_generic(default_epsilons(), lattice, case):
        raise NonGenericLatticeError(f"lattice carries relations beyond those of case {case}")
    return _group_search(p2_div, sigma_inv_p3_div, lattice, max_nodes)


def _group_search(p2_div: Divisor, sigma_inv_p3_div: Divisor, lattice: RelationLattice,
                  max_nodes: int | None, simple: bool = True) -> list[RiccatiCandidate]:
    level = p2_div.level
    if simple:
        _require_multiplicity_one(p2_div, "div(p2)")
        _require_multiplicity_one(sigma_inv_p3_div, "div(sigma^-1 p3)")
    g1, g2 = _groups(p2_div), _groups(sigma_inv_p3_div)
    vectors = [g.key.as_dict() for g in g1] + [g.key.as_dict() for g in g2]
    signs = [1] * len(g1) + [-1] * len(g2)
    system = _LinearSystem(vectors, signs, [g.size for g in g1 + g2])
    found = {}
    for x in _dfs(system, max_nodes):
        qexp = system.qexp(x)
        if (qexp * level).denominator != 1:
            continue
        opts = [_subset_residues([(pt.exponent(P), n) for pt, n in g.points], c) for g, c in zip(g1 + g2, x)]
        choice = _combine_residues(opts, signs)
        if choice is None:
            continue
        r1, r2, m = _witness(g1, g2, choice, lattice, level)
        cand = _signature(g1, g2, x[:len(g1)], x[len(g1):], level, qexp, m, (r1, r2))
        found.setdefault(cand, cand)
    return sorted(found.values(), key=RiccatiCandidate.sort_key)


def _witness(g1, g2, choice, lattice, level):
    terms1, terms2 = [], []
    for i, (g, pick) in enumerate(zip(g1 + g2, choice)):
        pts = [(pt, t) for (pt, _), t in zip(g.points, pick) if t]
        (terms1 if i < len(g1) else terms2).extend(pts)
    m = sum(pt.exponent(P) * t for pt, t in terms1) - sum(pt.exponent(P) * t for pt, t in terms2)
    return Divisor(level, lattice, terms1), Divisor(level, lattice, terms2), int(m)


def riccati_divisor_enumerator(d1: Divisor, d2: Divisor, lattice: RelationLattice, budget: int = 48,
                               max_nodes: int | None = 200_000) -> list[RiccatiCandidate]:
    """Exhaustive search over effective sub-divisors r1 <= d1, r2 <= d2 point by point.

    Condition (iv) is checked at each leaf from the exact weight of the chosen
    divisors and a membership test in <p, q>.
    """
    if d1.level != d2.level:
        raise ValueError("divisors must share a level")
    level = d1.level
    pos1 = [(x, n) for x, n in d1.canonical_items() if n > 0]
    pos2 = [(x, n) for x, n in d2.canonical_items() if n > 0]
    if sum(n for _, n in pos1) > budget or sum(n for _, n in pos2) > budget:
        raise ResourceError(f"divisor degree exceeds the budget {budget}")
    g1, g2 = _groups(d1), _groups(d2)
    index1 = {pt: i for i, g in enumerate(g1) for pt, _ in g.points}
    index2 = {pt: i for i, g in enumerate(g2) for pt, _ in g.points}
    pts = pos1 + pos2
    vectors = [_strip(x).as_dict() for x, _ in pts]
    signs = [1] * len(pos1) + [-1] * len(pos2)
    system = _LinearSystem(vectors, signs, [n for _, n in pts])
    found = {}
    for x in _dfs(system, max_nodes):
        r1 = Divisor(level, lattice, ((pt, c) for (pt, _), c in zip(pos1, x[:len(pos1)]) if c))
        r2 = Divisor(level, lattice, ((pt, c) for (pt, _), c in zip(pos2, x[len(pos1):]) if c))
        if degree(r1) != degree(r2):
            continue
        w = (weight(r1).value / weight(r2).value).free_part()
        ex = member_with_exponents(w, [P, Q], lattice)
        if ex is None or ex[P].denominator != 1:
            continue
        d0 = ex[Q] * level
        if d0.denominator != 1 or d0 < 0:
            continue
        c1 = [0] * len(g1)
        c2 = [0] * len(g2)
        for (pt, _), c in zip(pos1, x[:len(pos1)]):
            c1[index1[pt]] += c
        for (pt, _), c in zip(pos2, x[len(pos1):]):
            c2[index2[pt]] += c
        m = int(sum(pt.exponent(P) * c * s for (pt, _), c, s in zip(pts, x, signs)))
        cand = _signature(g1, g2, c1, c2, level, ex[Q], m, (r1, r2))
        found.setdefault(cand, cand)
    return sorted(found.values(), key=RiccatiCandidate.sort_key)


def general_riccati_enumerator(p2: ThetaQuotient, p3: ThetaQuotient, lattice: RelationLattice,
                               budget: int = 48, max_nodes: int | None = 200_000) -> list[RiccatiCandidate]:
    """Candidates for arbitrary theta-quotient data ``sigma^-1(b) = p2 / p3``.

    Cost grows exponentially with the number of support points; ``budget``
    caps the divisor degrees and ``max_nodes`` the search tree.
    """
    d1 = tq_divisor(p2, lattice)
    d2 = sigma_translate(tq_divisor(p3, lattice), -1)
    return riccati_divisor_enumerator(d1, d2, lattice, budget, max_nodes)


# --- constants and telescopers ---------------------------------------------------------

def nu_vanishes(nu_factors: Sequence[Monomial], lattice: RelationLattice) -> list[int]:
    """Indices j with e_j e8 / q in p^Z (theta vanishes exactly there)."""
    out = []
    for j, x in enumerate(nu_factors):
        r = lattice.reduce(x)
        if r.torsion == 0 and set(r.generators) <= {P} and r.exponent(P).denominator == 1:
            out.append(j)
    return out


def constant_solution_eliminated(nu_factors: Sequence[Monomial], lattice: RelationLattice) -> bool:
    """True iff nu != 0, which rules out constant Riccati solutions.

    A constant v would need (v^2 - v) A(z) + v nu = (v - 1) A(1/z); comparing the
    poles at q^-1/2 and q^1/2 forces v^2 - v = v - 1 = v nu = 0.
    """
    return not nu_vanishes(nu_factors, lattice)


@dataclass(frozen=True)
class TelescoperResult:
    obstructed: bool
    collisions: tuple[tuple[Monomial, Monomial, int], ...]
    unpaired: tuple[Monomial, ...]

    def to_json(self) -> dict:
        return {"obstructed": self.obstructed,
                "collisions": [[str(a), str(b), l] for a, b, l in self.collisions],
                "unpaired": [str(x) for x in self.unpaired]}


def orbit_shift(a: Monomial, b: Monomial, lattice: RelationLattice, level: int) -> int | None:
    """l with b = a q_level**l mod p^Z, or None."""
    ex = member_with_exponents(b / a, [P, Q], lattice)
    if ex is None or ex[P].denominator != 1:
        return None
    l = ex[Q] * level
    return int(l) if l.denominator == 1 else None


def telescoper_obstruction(b: ThetaQuotient, lattice: RelationLattice) -> TelescoperResult:
    """Orbit test on the zeros and poles of b.

    A telescoper would force every zero or pole w to have a partner w q_k**l
    (l != 0) in the support. ``obstructed`` is True when some support point has
    no such partner; all colliding pairs are reported either way.
    """
    d = tq_divisor(b, lattice)
    if not d:
        raise EmptyDivisorError("b has no zeros or poles; the zero operator is a telescoper")
    pts = d.support()
    collisions = []
    partnered = set()
    for i, w in enumerate(pts):
        for j, w2 in enumerate(pts):
            if i == j:
                continue
            l = orbit_shift(w, w2, lattice, d.level)
            if l:
                collisions.append((w, w2, l))
                partnered.add(i)
    unpaired = tuple(w for i, w in enumerate(pts) if i not in partnered)
    return TelescoperResult(bool(unpaired), tuple(collisions), unpaired)


# --- verdict ------------------------------------------------------------------------------

class Outcome(str, enum.Enum):
    TRANSCENDENTAL = "transcendental"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Reason:
    kind: str
    detail: Any = None

    def to_json(self):
        d = self.detail
        if hasattr(d, "to_json"):
            d = d.to_json()
        elif isinstance(d, tuple) and d and isinstance(d[0], Monomial):
            d = [str(x) if isinstance(x, Monomial) else x for x in d]
        return {"kind": self.kind, "detail": d}


@dataclass(frozen=True)
class Verdict:
    reasons: tuple[Reason, ...]
    candidates: tuple[RiccatiCandidate, ...] = ()
    telescoper: TelescoperResult | None = None
    nu_zero: bool = False
    data: Hypergeometric | None = field(default=None, repr=False)

    @property
    def outcome(self) -> Outcome:
        return Outcome.INCONCLUSIVE if self.reasons else Outcome.TRANSCENDENTAL

    def reason_kinds(self) -> list[str]:
        return sorted({r.kind for r in self.reasons})


def _riccati_part(p2, p3, lattice, case, reasons, max_nodes):
    p2_div = tq_divisor(p2, lattice)
    sp3_div = sigma_translate(tq_divisor(p3, lattice), -1)
    try:
        if case is not None:
            cands = riccati_constraint_search(p2_div, sp3_div, lattice, case, max_nodes)
        else:
            # the group-count search is exact for any lattice and any multiplicities
            # (caps enter the residue step); only the public entry point insists on
            # the generic, multiplicity-one setting
            cands = _group_search(p2_div, sp3_div, lattice, max_nodes, simple=False)
    except ResourceError:
        reasons.append(Reason("riccati_search_incomplete"))
        cands = []
    for c in cands:
        if not c.is_trivial():
            reasons.append(Reason("riccati_candidate", c))
    return cands


def _telescoper_part(b, lattice, reasons):
    try:
        tel = telescoper_obstruction(b, lattice)
    except EmptyDivisorError:
        reasons.append(Reason("empty_divisor_b"))
        return None
    if not tel.obstructed:
        for a, c, l in tel.collisions:
            reasons.append(Reason("telescoper_orbit_collision", (a, c, l)))
    return tel


def transcendence_verdict(epsilons: Sequence[Monomial], case: str, lattice: RelationLattice,
                          max_nodes: int = 20_000) -> Verdict:
    """Both transcendence criteria for the elliptic hypergeometric equation.

    Only ever certifies transcendence; any gap is reported as a reason.
    """
    data = build_hypergeometric(epsilons, lattice)
    reasons: list[Reason] = []
    generic = is_generic(epsilons, lattice, case)
    if not generic:
        reasons.append(Reason("non_generic_lattice", case))
    cands = _riccati_part(data.p2, data.p3, lattice, case if generic else None, reasons, max_nodes)
    zeros = nu_vanishes(data.nu_factors, lattice)
    if zeros:
        reasons.append(Reason("nu_zero", tuple(data.nu_factors[j] for j in zeros)))
        reasons.append(Reason("constant_solution_possible"))
    tel = _telescoper_part(data.b, lattice, reasons)
    return Verdict(tuple(reasons), tuple(cands), tel, bool(zeros), data)


def custom_verdict(b: ThetaQuotient, lattice: RelationLattice, p2: ThetaQuotient | None = None,
                   p3: ThetaQuotient | None = None, nu_factors: Sequence[Monomial] | None = None,
                   max_nodes: int = 20_000) -> Verdict:
    """Verdict for a user-supplied coefficient b (and optionally p2, p3, nu).

    Without nu the constant solutions cannot be excluded, so the outcome stays
    inconclusive; the telescoper test still runs and reports collisions.
    """
    reasons: list[Reason] = []
    if p2 is None or p3 is None:
        lifted = tq_lift(tq_sigma(b, -1), 2) if b.level == 1 else tq_sigma(b, -1)
        p2, p3 = lifted.numerator(), lifted.denominator()
    cands = _riccati_part(p2, p3, lattice, None, reasons, max_nodes)
    nu_zero = False
    if nu_factors is None:
        reasons.append(Reason("constant_solution_possible"))
    elif not constant_solution_eliminated(nu_factors, lattice):
        nu_zero = True
        reasons.append(Reason("nu_zero"))
        reasons.append(Reason("constant_solution_possible"))
    tel = _telescoper_part(b, lattice, reasons)
    return Verdict(tuple(reasons), tuple(cands), tel, nu_zero, None)
