"""Divisors on C*_k / p^Z: degree, weight, sigma-translation and level pull-back."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator

from .exactgroup import (ONE, P, Q, LevelMismatchError, Monomial, PointClass, RelationLattice,
                         canonical_point)


class Divisor:
    """Finite Z-combination of points of C*_k / p^Z.

    Keys are canonical class representatives (reduced modulo the lattice, p-exponent
    in [0, 1)), so merging is a dictionary lookup. The first representative seen
    for each class is kept for display.
    """

    __slots__ = ("level", "lattice", "_terms", "_reps")

    def __init__(self, level: int, lattice: RelationLattice,
                 terms: Iterable[tuple[Monomial, int]] = ()):
        if level < 1:
            raise ValueError("level must be a positive integer")
        self.level = level
        self.lattice = lattice
        acc: dict[Monomial, int] = {}
        reps: dict[Monomial, Monomial] = {}
        for point, mult in terms:
            if not mult:
                continue
            key = canonical_point(point, lattice)
            acc[key] = acc.get(key, 0) + int(mult)
            reps.setdefault(key, point)
        self._terms = {k: v for k, v in acc.items() if v}
        self._reps = {k: reps[k] for k in self._terms}

    @classmethod
    def from_points(cls, level: int, lattice: RelationLattice, points: Iterable[Monomial]) -> "Divisor":
        return cls(level, lattice, ((x, 1) for x in points))

    def items(self) -> Iterator[tuple[Monomial, int]]:
        """(display representative, multiplicity) pairs."""
        for k, v in self._terms.items():
            yield self._reps[k], v

    def canonical_items(self) -> Iterator[tuple[Monomial, int]]:
        return iter(self._terms.items())

    def multiplicity(self, point: Monomial) -> int:
        return self._terms.get(canonical_point(point, self.lattice), 0)

    def support(self) -> list[Monomial]:
        return list(self._reps.values())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _check(self, other: "Divisor"):
        if self.level != other.level:
            raise LevelMismatchError(self.level, other.level)
        if self.lattice != other.lattice:
            raise ValueError("divisors live modulo different relation lattices")

    def __add__(self, other: "Divisor") -> "Divisor":
        self._check(other)
        return Divisor(self.level, self.lattice, list(self.items()) + list(other.items()))

    def __neg__(self) -> "Divisor":
        return Divisor(self.level, self.lattice, ((x, -n) for x, n in self.items()))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Divisor):
            return NotImplemented
        return (self.level, self.lattice, self._terms) == (other.level, other.lattice, other._terms)

    def __hash__(self):
        return hash((self.level, frozenset(self._terms.items())))

    def __le__(self, other: "Divisor") -> bool:
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return all(self._terms.get(k, 0) <= other._terms.get(k, 0) for k in keys)

    def is_effective(self) -> bool:
        return all(v > 0 for v in self._terms.values())

    def __repr__(self) -> str:
        if not self._terms:
            return f"Divisor(level={self.level}, 0)"
        body = " + ".join(f"{'' if n == 1 else n}[{x}]" for x, n in self.items())
        return f"Divisor(level={self.level}, {body})"

    def to_json(self) -> list:
        return [[str(x), n] for x, n in sorted(self.items(), key=lambda t: str(t[0]))]


def div_add(a: Divisor, b: Divisor) -> Divisor:
    return a + b


def degree(d: Divisor) -> int:
    return sum(n for _, n in d.canonical_items())


def weight(d: Divisor) -> PointClass:
    w = ONE
    for x, n in d.canonical_items():
        w = w * x ** n
    return PointClass(d.level, canonical_point(w, d.lattice))


def sigma_translate(d: Divisor, direction: int) -> Divisor:
    """Divisor of sigma**direction(f) given the divisor of f.

    sigma(f)(z_k) = f(q_k z_k), so zeros move by q_k**(-direction).
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    shift = Monomial.gen(Q, Fraction(-direction, d.level))
    return Divisor(d.level, d.lattice, ((x * shift, n) for x, n in d.items()))


def pullback(d: Divisor, k: int) -> Divisor:
    """Pull back along the k-power map C*_{level*k} -> C*_level."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k == 1:
        return d
    terms = []
    for x, n in d.items():
        root = x.root(k)
        for i in range(k):
            for j in range(k):
                terms.append((root * Monomial.root_of_unity(Fraction(i, k)) * Monomial.gen(P, Fraction(j, k)), n))
    return Divisor(d.level * k, d.lattice, terms)
