"""Theta quotients ``c * z_k**n * prod theta(xi * z_k; p)**m`` and the hypergeometric builder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .divisors import Divisor
from .exactgroup import ONE, P, Q, LevelMismatchError, Monomial, RelationLattice

_MINUS_ONE = Monomial.root_of_unity(Fraction(1, 2))


class NotEllipticError(ValueError):
    pass


@dataclass(frozen=True)
class ThetaQuotient:
    """``constant * z_k**zpow * prod theta(xi * z_k; p)**mult`` at level ``k``.

    ``factors`` holds ``(xi, mult)`` pairs with distinct shifts and nonzero
    multiplicities, sorted. Construction merges but does not reduce p-exponents;
    use :func:`tq_normalize` for the canonical form.
    """

    level: int
    constant: Monomial = ONE
    factors: tuple[tuple[Monomial, int], ...] = ()
    zpow: int = 0

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be a positive integer")
        acc: dict[Monomial, int] = {}
        for xi, n in self.factors:
            acc[xi] = acc.get(xi, 0) + int(n)
        object.__setattr__(self, "factors",
                           tuple(sorted(((x, n) for x, n in acc.items() if n), key=lambda t: t[0].sort_key())))

    @classmethod
    def theta(cls, xi: Monomial = ONE, level: int = 1, power: int = 1) -> "ThetaQuotient":
        return cls(level, ONE, ((xi, power),))

    @classmethod
    def const(cls, c: Monomial, level: int = 1) -> "ThetaQuotient":
        return cls(level, c)

    def shifts(self) -> dict[Monomial, int]:
        return dict(self.factors)

    def numerator(self) -> "ThetaQuotient":
        """Positive-multiplicity factors together with the constant and z-power."""
        return ThetaQuotient(self.level, self.constant, tuple((x, n) for x, n in self.factors if n > 0), self.zpow)

    def denominator(self) -> "ThetaQuotient":
        return ThetaQuotient(self.level, ONE, tuple((x, -n) for x, n in self.factors if n < 0))

    def is_constant(self) -> bool:
        return not self.factors and self.zpow == 0

    def __mul__(self, other):
        return tq_mul(self, other)

    def __truediv__(self, other):
        return tq_div(self, other)

    def __str__(self):
        parts = [] if self.constant.is_one() else [f"({self.constant})"]
        if self.zpow:
            parts.append(f"z_{self.level}^{self.zpow}")
        for x, n in self.factors:
            parts.append(f"theta({x}*z_{self.level})" + ("" if n == 1 else f"^{n}"))
        return " * ".join(parts) or "1"

    def to_json(self) -> dict:
        return {"level": self.level, "constant": str(self.constant), "zpow": self.zpow,
                "factors": [[str(x), n] for x, n in self.factors]}


def tq_normalize(f: ThetaQuotient) -> ThetaQuotient:
    """Move every shift's p-exponent into [0, 1).

    Uses theta(p**n w) = (-1)**n p**(-n(n-1)/2) w**(-n) theta(w); the w**(-n)
    splits into a monomial for the constant and a power of z_k.
    """
    const = f.constant
    zpow = f.zpow
    out: dict[Monomial, int] = {}
    for xi, m in f.factors:
        n = math.floor(xi.exponent(P))
        if n:
            base = xi * Monomial.gen(P, -n)
            unit = _MINUS_ONE ** n * Monomial.gen(P, Fraction(-n * (n - 1), 2)) * base ** -n
            const = const * unit ** m
            zpow -= n * m
        else:
            base = xi
        out[base] = out.get(base, 0) + m
    return ThetaQuotient(f.level, const, tuple(out.items()), zpow)


def _check_level(f: ThetaQuotient, g: ThetaQuotient):
    if f.level != g.level:
        raise LevelMismatchError(f.level, g.level)


def tq_mul(f: ThetaQuotient, g: ThetaQuotient) -> ThetaQuotient:
    _check_level(f, g)
    return tq_normalize(ThetaQuotient(f.level, f.constant * g.constant, f.factors + g.factors, f.zpow + g.zpow))


def tq_inv(f: ThetaQuotient) -> ThetaQuotient:
    return ThetaQuotient(f.level, f.constant ** -1, tuple((x, -n) for x, n in f.factors), -f.zpow)


def tq_div(f: ThetaQuotient, g: ThetaQuotient) -> ThetaQuotient:
    return tq_mul(f, tq_inv(g))


def tq_pow(f: ThetaQuotient, n: int) -> ThetaQuotient:
    return tq_normalize(ThetaQuotient(f.level, f.constant ** n, tuple((x, m * n) for x, m in f.factors), f.zpow * n))


def tq_sigma(f: ThetaQuotient, direction: int) -> ThetaQuotient:
    """``f(q_k**direction * z_k)``."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    qk = Monomial.gen(Q, Fraction(direction, f.level))
    return tq_normalize(ThetaQuotient(f.level, f.constant * qk ** f.zpow,
                                      tuple((x * qk, n) for x, n in f.factors), f.zpow))


def tq_reflect(f: ThetaQuotient) -> ThetaQuotient:
    """``f(1 / z_k)``, using theta(xi / z) = theta(p z / xi)."""
    p = Monomial.gen(P)
    return tq_normalize(ThetaQuotient(f.level, f.constant, tuple((p / x, n) for x, n in f.factors), -f.zpow))


def split_square(xi: Monomial, mult: int = 1) -> list[tuple[Monomial, int]]:
    """Factors of theta(xi * z**2) as a product of four theta(s * z) at the same level."""
    r = xi.root(2)
    sp = Monomial.gen(P, Fraction(1, 2))
    return [(r, mult), (r * _MINUS_ONE, mult), (r * sp, mult), (r * sp * _MINUS_ONE, mult)]


def tq_lift(f: ThetaQuotient, k: int) -> ThetaQuotient:
    """Rewrite ``f`` at level ``f.level * k`` through ``z_level = z_{level*k}**k``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return f
    out = []
    for xi, n in f.factors:
        r = xi.root(k)
        for i in range(k):
            for j in range(k):
                out.append((r * Monomial.root_of_unity(Fraction(i, k)) * Monomial.gen(P, Fraction(j, k)), n))
    return tq_normalize(ThetaQuotient(f.level * k, f.constant, tuple(out), f.zpow * k))


def tq_divisor(f: ThetaQuotient, lattice: RelationLattice) -> Divisor:
    """Each theta(xi z_k)**n contributes n [xi**-1]_k; constants and z-powers have none."""
    return Divisor(f.level, lattice, ((x ** -1, n) for x, n in f.factors))


@dataclass(frozen=True)
class Hypergeometric:
    epsilons: tuple[Monomial, ...]
    lattice: RelationLattice
    A: ThetaQuotient
    sinv_b: ThetaQuotient
    b: ThetaQuotient
    p2: ThetaQuotient
    p3: ThetaQuotient
    nu_factors: tuple[Monomial, ...]
    A_num_shifts: tuple[Monomial, ...] = field(default=())
    A_den_shifts: tuple[Monomial, ...] = field(default=())


def balancing_defect(epsilons: Sequence[Monomial], lattice: RelationLattice) -> Monomial:
    prod = ONE
    for e in epsilons:
        prod = prod * e
    return lattice.reduce(prod / Monomial.of({P: 2, Q: 2}))


def build_hypergeometric(epsilons: Sequence[Monomial], lattice: RelationLattice) -> Hypergeometric:
    """Exact coefficient data of the elliptic hypergeometric equation.

    ``A(z) = prod theta(e_j z) / (theta(z**2) theta(q z**2))`` with the squares split
    at level 1, ``sinv_b = A(1/z) / A(z)``, ``b = sigma(sinv_b)``, and the level-2
    numerator/denominator ``p2``, ``p3`` of ``sinv_b``.
    """
    eps = tuple(epsilons)
    if len(eps) != 8:
        raise ValueError(f"expected 8 parameters, got {len(eps)}")
    if not balancing_defect(eps, lattice).is_one():
        raise NotEllipticError("not elliptic: A(pz) != A(z); the product of the parameters "
                               "must equal p^2 q^2 modulo the relation lattice")
    q = Monomial.gen(Q)
    num = [(e, 1) for e in eps]
    den = split_square(ONE, -1) + split_square(q, -1)
    A = tq_normalize(ThetaQuotient(1, ONE, tuple(num + den)))
    sinv_b = tq_div(tq_reflect(A), A)
    b = tq_sigma(sinv_b, 1)
    lifted = tq_lift(sinv_b, 2)
    p2, p3 = lifted.numerator(), lifted.denominator()
    nu = tuple(e * eps[7] / q for e in eps[:6])
    return Hypergeometric(eps, lattice, A, sinv_b, b, p2, p3, nu,
                          tuple(x for x, n in A.factors if n > 0),
                          tuple(x for x, n in A.factors if n < 0))


def custom_quotient(level: int, zeros: Iterable[Monomial] = (), poles: Iterable[Monomial] = (),
                    constant: Monomial = ONE) -> ThetaQuotient:
    """Theta quotient with the given zero and pole classes (each multiplicity one)."""
    facs = [(z ** -1, 1) for z in zeros] + [(x ** -1, -1) for x in poles]
    return tq_normalize(ThetaQuotient(level, constant, tuple(facs)))
