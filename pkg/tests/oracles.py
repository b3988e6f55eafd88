"""Hand-built reference data, written out independently of the library's builders."""

from fractions import Fraction

from hypothesis import strategies as st

from difftrans.exactgroup import EPS, GENS, Monomial, PointClass, point_eq

F = Fraction
P = Monomial.gen("p")
Q = Monomial.gen("q")
MINUS = Monomial.root_of_unity(F(1, 2))
I = Monomial.root_of_unity(F(1, 4))


def eps():
    return [Monomial.gen(e) for e in EPS]


def sqrt(m):
    return Monomial(tuple((g, a / 2) for g, a in m.exponents), m.torsion / 2)


def quarter(m):
    return Monomial(tuple((g, a / 4) for g, a in m.exponents), m.torsion / 4)


def _pm_sqrt(x):
    return [sqrt(x), MINUS * sqrt(x), sqrt(P * x), MINUS * sqrt(P * x)]


def _quarter_roots(x):
    # i^l * (x p^j)^(1/4), l, j = 0..3
    return [I ** l * quarter(x * P ** j) for j in range(4) for l in range(4)]


def div2_p2_points(e=None):
    """sum_j [+-sqrt(e_j)] + [+-sqrt(p e_j)] + sum_{j,l} [i^l (p^j/q)^(1/4)]."""
    e = e or eps()
    return [x for ej in e for x in _pm_sqrt(ej)] + _quarter_roots(Q ** -1)


def div2_p3_points(e=None):
    e = e or eps()
    return [x for ej in e for x in _pm_sqrt(ej ** -1)] + _quarter_roots(Q)


def div2_sinv_p3_points(e=None):
    """Every point of div2(p3) moved by q^(1/2)."""
    return [x * sqrt(Q) for x in div2_p3_points(e)]


def support_S(e=None):
    """Zeros and poles of b at level 1."""
    e = e or eps()
    sp = sqrt(P)
    out = [Q ** -1 * ej ** s for ej in e for s in (1, -1)]
    for base in (sqrt(Q) ** -1, sqrt(Q) ** -3):
        out += [base, MINUS * base, base * sp, MINUS * base * sp]
    return out


def matches_exactly(divisor, points, lattice, poles_allowed=False):
    """Every divisor class has multiplicity 1 (or -1 when poles are allowed) and is
    point_eq to exactly one listed point, and vice versa."""
    k = divisor.level
    items = list(divisor.items())
    ok = {1, -1} if poles_allowed else {1}
    if len(items) != len(points) or any(n not in ok for _, n in items):
        return False
    for x, _ in items:
        hits = [y for y in points if point_eq(PointClass(k, x), PointClass(k, y), lattice)]
        if len(hits) != 1:
            return False
    for y in points:
        hits = [x for x, _ in items if point_eq(PointClass(k, x), PointClass(k, y), lattice)]
        if len(hits) != 1:
            return False
    return True


# --- hypothesis strategies --------------------------------------------------------------

fractions = st.builds(F, st.integers(-8, 8), st.sampled_from([1, 2, 4]))
torsions = st.builds(F, st.integers(0, 7), st.just(8))


def monomials(gens=GENS, max_size=4):
    return st.builds(
        lambda d, t: Monomial.of(d, t),
        st.dictionaries(st.sampled_from(gens), fractions, max_size=max_size),
        torsions,
    )


def random_small_pair(rng, lattice, max_points=10):
    """Two effective multiplicity-one level-2 divisors with at most max_points support points in total.

    Points are drawn from a small grid over e1, e2, q, p with torsion, with some
    second-divisor points planted as q-shifts of first-divisor points so that
    nonzero candidates actually occur.
    """
    from difftrans.divisors import Divisor

    def draw():
        return Monomial.of({"e1": F(int(rng.integers(-1, 2)), 2), "e2": F(int(rng.integers(-1, 2)), 2),
                            "q": F(int(rng.integers(-2, 3)), 4), "p": F(int(rng.integers(0, 2)), 2)},
                           F(int(rng.integers(0, 2)), 2))

    n1 = int(rng.integers(1, max_points // 2 + 1))
    n2 = int(rng.integers(1, max_points - n1 + 1))
    d1 = Divisor(2, lattice, [])
    while len(d1) < n1:
        d1 = d1 + Divisor.from_points(2, lattice, [draw()])
        d1 = Divisor(2, lattice, [(x, 1) for x, _ in d1.items()])
    pts1 = d1.support()
    d2 = Divisor(2, lattice, [])
    while len(d2) < n2:
        if rng.random() < 0.4:
            x = pts1[int(rng.integers(len(pts1)))] * Q ** F(int(rng.integers(-1, 3)), 2)
        else:
            x = draw()
        d2 = d2 + Divisor.from_points(2, lattice, [x])
        d2 = Divisor(2, lattice, [(y, 1) for y, _ in d2.items()])
    return d1, d2
