"""Exact multiplicative arithmetic in the group generated by p, q and the parameters.

A :class:`Monomial` is a word ``zeta * prod g**a_g`` with rational exponents
(the divisible hull) and a root of unity ``zeta = exp(2*pi*i*torsion)``.
A :class:`RelationLattice` lists the integer exponent vectors declared to be
trivial; every equality of points modulo ``p**Z`` is decided against it.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from ._intlinalg import clear_denominators, hnf, integer_kernel, solve_rational

P = "p"
Q = "q"

Rational = int | Fraction | str


def _frac(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[tuple[str, Fraction], ...] = ()
    torsion: Fraction = Fraction(0)

    def __post_init__(self):
        exps = {}
        for g, a in self.exponents:
            a = _frac(a)
            exps[g] = exps.get(g, Fraction(0)) + a
        object.__setattr__(self, "exponents",
                           tuple(sorted((g, a) for g, a in exps.items() if a != 0)))
        object.__setattr__(self, "torsion", _frac(self.torsion) % 1)

    @classmethod
    def of(cls, exponents: Mapping[str, Rational] | None = None, torsion: Rational = 0) -> "Monomial":
        return cls(tuple((g, _frac(a)) for g, a in (exponents or {}).items()), _frac(torsion))

    @classmethod
    def gen(cls, name: str, exponent: Rational = 1) -> "Monomial":
        return cls(((name, _frac(exponent)),))

    @classmethod
    def root_of_unity(cls, torsion: Rational) -> "Monomial":
        return cls((), _frac(torsion))

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        """Parse ``"-q^(1/2)*e1^-1"``-style words.

        Factors are separated by ``*``; ``-1`` and ``i`` are accepted as
        roots of unity, ``zeta(1/3)`` for a general one.
        """
        text = text.replace(" ", "")
        torsion = Fraction(0)
        if text.startswith("-"):
            torsion += Fraction(1, 2)
            text = text[1:]
        exps: dict[str, Fraction] = {}
        if text in ("", "1"):
            return cls.of(exps, torsion)
        for tok in text.split("*"):
            if tok in ("1", ""):
                continue
            if tok == "-1":
                torsion += Fraction(1, 2)
                continue
            if tok == "i":
                torsion += Fraction(1, 4)
                continue
            m = re.fullmatch(r"zeta\(([-0-9/]+)\)", tok)
            if m:
                torsion += Fraction(m.group(1))
                continue
            m = re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)(?:\^\(?([-0-9/]+)\)?)?", tok)
            if not m:
                raise ValueError(f"cannot parse monomial factor {tok!r}")
            g, a = m.group(1), Fraction(m.group(2) or 1)
            exps[g] = exps.get(g, Fraction(0)) + a
        return cls.of(exps, torsion)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.exponents)

    def exponent(self, g: str) -> Fraction:
        for h, a in self.exponents:
            if h == g:
                return a
        return Fraction(0)

    @property
    def generators(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.exponents)

    def is_one(self) -> bool:
        return not self.exponents and self.torsion == 0

    def free_part(self) -> "Monomial":
        return Monomial(self.exponents)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial(self.exponents + other.exponents, self.torsion + other.torsion)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other ** -1

    def __pow__(self, k: Rational) -> "Monomial":
        k = _frac(k)
        return Monomial(tuple((g, a * k) for g, a in self.exponents), self.torsion * k)

    def root(self, k: int) -> "Monomial":
        """The branch of the k-th root obtained by dividing every exponent and the angle by k."""
        return Monomial(tuple((g, a / k) for g, a in self.exponents), self.torsion / k)

    def sort_key(self):
        return (self.exponents, self.torsion)

    def evaluate(self, values: Mapping[str, complex]) -> complex:
        """Numeric value, principal branch per generator."""
        out = cmath.exp(2j * math.pi * self.torsion) if self.torsion else 1.0 + 0j
        for g, a in self.exponents:
            x = complex(values[g])
            out *= x ** int(a) if a.denominator == 1 else cmath.exp(float(a) * cmath.log(x))
        return out

    def to_json(self) -> dict:
        d = {"exponents": {g: str(a) for g, a in self.exponents}}
        if self.torsion:
            d["torsion"] = str(self.torsion)
        return d

    @classmethod
    def from_json(cls, data) -> "Monomial":
        if isinstance(data, str):
            return cls.parse(data)
        if "exponents" in data:
            return cls.of(data["exponents"], data.get("torsion", 0))
        return cls.of(data)

    def __str__(self) -> str:
        parts = []
        t = self.torsion
        if t == Fraction(1, 2):
            parts.append("-1")
        elif t == Fraction(1, 4):
            parts.append("i")
        elif t == Fraction(3, 4):
            parts.append("-i")
        elif t:
            parts.append(f"zeta({t})")
        for g, a in self.exponents:
            if a == 1:
                parts.append(g)
            elif a.denominator == 1:
                parts.append(f"{g}^{a}")
            else:
                parts.append(f"{g}^({a})")
        return "*".join(parts) if parts else "1"

    __repr__ = __str__


ONE = Monomial()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return a * b


@dataclass(frozen=True)
class RelationLattice:
    """Integer exponent vectors over ``generators`` declared to multiply to 1.

    The basis is kept in Hermite normal form, so two lattices are equal iff
    their bases are. Relations are applied in the rational hull: ``x`` is
    trivial iff some positive power of it lies in the lattice.
    """

    generators: tuple[str, ...]
    basis: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate generator names")
        rows = [tuple(int(x) for x in r) for r in self.basis]
        for r in rows:
            if len(r) != len(gens):
                raise ValueError(f"relation {r} has {len(r)} entries, expected {len(gens)}")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "basis", tuple(tuple(r) for r in hnf(rows)))
        self._check_pq_free()

    @classmethod
    def from_monomials(cls, generators: Sequence[str], relations: Iterable[Monomial]) -> "RelationLattice":
        rows = []
        for m in relations:
            extra = set(m.generators) - set(generators)
            if extra:
                raise ValueError(f"relation uses unknown generators {sorted(extra)}")
            rows.append(clear_denominators([m.exponent(g) for g in generators]))
        return cls(tuple(generators), tuple(tuple(r) for r in rows))

    def with_relations(self, relations: Iterable[Monomial]) -> "RelationLattice":
        extra = RelationLattice.from_monomials(self.generators, relations)
        return RelationLattice(self.generators, self.basis + extra.basis)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def relation_monomials(self) -> list[Monomial]:
        return [Monomial(tuple(zip(self.generators, map(Fraction, r)))) for r in self.basis]

    @cached_property
    def _reducer(self) -> list[tuple[str, dict[str, Fraction]]]:
        gens = self.generators
        others = [i for i, g in enumerate(gens) if g not in (P, Q)][::-1]
        tail = [i for i, g in enumerate(gens) if g == Q] + [i for i, g in enumerate(gens) if g == P]
        rows = [list(map(Fraction, r)) for r in self.basis]
        out = []
        while rows:
            # prefer a unit pivot on a parameter so reduction stays integral
            # whenever the lattice allows it (no spurious square-root branches)
            pick = next(((r, c) for c in others for r in range(len(rows)) if abs(rows[r][c]) == 1), None)
            if pick is None:
                pick = next(((r, c) for c in others + tail for r in range(len(rows)) if rows[r][c]), None)
            if pick is None:
                break
            r, c = pick
            piv = rows.pop(r)
            piv = [x / piv[c] for x in piv]
            rows = [[a - row[c] * b for a, b in zip(row, piv)] for row in rows]
            rows = [row for row in rows if any(row)]
            out = [(oc, [a - row[c] * b for a, b in zip(row, piv)]) for oc, row in out]
            out.append((c, piv))
        return [(gens[c], {gens[i]: x for i, x in enumerate(row) if x}) for c, row in out]

    def _check_pq_free(self):
        for g, _ in self._reducer:
            if g in (P, Q):
                raise ValueError("lattice forces a relation between p and q alone; "
                                 "p and q must stay multiplicatively independent")

    def reduce(self, m: Monomial) -> Monomial:
        """Canonical representative of ``m`` modulo the rational span of the lattice."""
        exps = m.as_dict()
        for g, row in self._reducer:
            a = exps.get(g)
            if a:
                for h, x in row.items():
                    exps[h] = exps.get(h, Fraction(0)) - a * x
        return Monomial.of(exps, m.torsion)

    def is_trivial(self, m: Monomial) -> bool:
        return self.reduce(m).is_one()

    def to_json(self) -> dict:
        return {"gens": list(self.generators), "lattice": [list(r) for r in self.basis]}


def p_floor(m: Monomial) -> Monomial:
    """Shift ``m`` by an integer power of p so its p-exponent lies in [0, 1)."""
    a = m.exponent(P)
    n = math.floor(a)
    return m * Monomial.gen(P, -n) if n else m


def canonical_point(m: Monomial, lattice: RelationLattice) -> Monomial:
    """Canonical representative of the class of ``m`` in C*/p^Z modulo the lattice."""
    return p_floor(lattice.reduce(m))


@dataclass(frozen=True)
class PointClass:
    level: int
    value: Monomial = field(default=ONE)

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be a positive integer")

    def __mul__(self, other: "PointClass") -> "PointClass":
        if self.level != other.level:
            raise LevelMismatchError(self.level, other.level)
        return PointClass(self.level, self.value * other.value)

    def __str__(self):
        return f"[{self.value}]_{self.level}"


class LevelMismatchError(ValueError):
    def __init__(self, a: int, b: int):
        super().__init__(f"incomparable levels {a} and {b}")


def member_with_exponents(m: Monomial, subgroup_gens: Sequence[str],
                          lattice: RelationLattice) -> dict[str, Fraction] | None:
    """Rational exponents ``a`` with ``m == prod g**a_g`` modulo the lattice, or None.

    A nonzero torsion part is never a member. When the generators stay
    independent modulo the lattice the answer is unique.
    """
    if m.torsion:
        return None
    target = lattice.reduce(m)
    cols = [lattice.reduce(Monomial.gen(g)) for g in subgroup_gens]
    coords = sorted(set(target.generators).union(*(c.generators for c in cols)))
    x = solve_rational([[c.exponent(h) for h in coords] for c in cols],
                       [target.exponent(h) for h in coords])
    if x is None:
        return None
    return dict(zip(subgroup_gens, x))


def point_eq(a: PointClass, b: PointClass, lattice: RelationLattice) -> bool:
    if a.level != b.level:
        raise LevelMismatchError(a.level, b.level)
    r = lattice.reduce(a.value / b.value)
    return r.torsion == 0 and r.generators in ((), (P,)) and r.exponent(P).denominator == 1


def kernel_lattice(substitution: Mapping[str, Monomial], target: RelationLattice) -> RelationLattice:
    """All integer relations among the source generators induced by the substitution.

    ``substitution`` maps each source generator to a monomial in the target
    generators (rational exponents allowed). A source vector ``v`` is in the
    kernel iff ``prod substitution[s]**v_s`` is trivial modulo ``target``.
    Torsion in the substitution is ignored.
    """
    sources = tuple(substitution)
    cols = [target.reduce(substitution[s].free_part()) for s in sources]
    coords = sorted(set().union(*(c.generators for c in cols))) if cols else []
    matrix = [[c.exponent(h) for c in cols] for h in coords]
    if not sources:
        return RelationLattice(())
    if not matrix:
        matrix = [[Fraction(0)] * len(sources)]
    return RelationLattice(sources, tuple(tuple(r) for r in integer_kernel(matrix, len(sources))))


# Generators of the elliptic hypergeometric setting.
EPS = tuple(f"e{j}" for j in range(1, 9))
GENS = (P, Q) + EPS


def default_epsilons() -> list[Monomial]:
    return [Monomial.gen(e) for e in EPS]


def case_lattice(case: str) -> RelationLattice:
    """The generic lattice of case A (balancing) or case B (e8 = e7*q plus special balancing)."""
    e = {g: Monomial.gen(g) for g in GENS}
    p, q = e[P], e[Q]
    prod = ONE
    for g in EPS:
        prod = prod * e[g]
    if case == "A":
        rels = [prod / (p ** 2 * q ** 2)]
    elif case == "B":
        prod6 = ONE
        for g in EPS[:6]:
            prod6 = prod6 * e[g]
        rels = [e["e8"] / (e["e7"] * q), prod6 * e["e7"] ** 2 / (p ** 2 * q)]
    else:
        raise ValueError(f"unknown case {case!r}; expected 'A' or 'B'")
    return RelationLattice.from_monomials(GENS, rels)


def parameter_relations(epsilons: Sequence[Monomial], lattice: RelationLattice) -> RelationLattice:
    """Lattice of integer vectors (alpha_1..alpha_8, m, n) with prod eps**alpha * p**m * q**n == 1."""
    sub = {f"eps{j + 1}": m for j, m in enumerate(epsilons)}
    sub["p"] = Monomial.gen(P)
    sub["q"] = Monomial.gen(Q)
    return kernel_lattice(sub, lattice)


def induced_relations(case: str) -> RelationLattice:
    """What :func:`parameter_relations` returns under the genericity hypothesis of ``case``."""
    return parameter_relations(default_epsilons(), case_lattice(case))


def is_generic(epsilons: Sequence[Monomial], lattice: RelationLattice, case: str) -> bool:
    """Whether every relation among the epsilons, p and q is induced by the case's balancing."""
    return parameter_relations(epsilons, lattice) == induced_relations(case)
