from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from difftrans.divisors import Divisor, degree, div_add, pullback, sigma_translate, weight
from difftrans.exactgroup import ONE, LevelMismatchError, Monomial, PointClass, case_lattice, point_eq
from difftrans.thetafield import ThetaQuotient, build_hypergeometric, tq_divisor

from oracles import MINUS, P, Q, div2_p2_points, div2_p3_points, div2_sinv_p3_points, eps, matches_exactly, monomials

A = case_lattice("A")
e1 = Monomial.gen("e1")
h = F(1, 2)


def D(level, *terms):
    return Divisor(level, A, terms)


def same_class(a: PointClass, b: PointClass):
    return point_eq(a, b, A)


# --- examples ------------------------------------------------------------------------------

def test_div_add_examples():
    one = D(1, (ONE, 1))
    assert not (one + (-one))
    r = e1 ** h
    assert D(2, (r, 1)) + D(2, (P * r, 1)) == D(2, (r, 2))
    assert div_add(D(2, (r, 1)), D(2, (P * r, 1))).multiplicity(r) == 2
    with pytest.raises(LevelMismatchError):
        D(1, (ONE, 1)) + D(2, (ONE, 1))


def test_hypergeometric_p2_p3_merge_without_collisions():
    pts = div2_p2_points() + div2_p3_points()
    total = Divisor.from_points(2, A, div2_p2_points()) + Divisor.from_points(2, A, div2_p3_points())
    assert degree(total) == 96 and len(total) == 96
    assert matches_exactly(total, pts, A)


def test_degree_examples():
    assert degree(D(1)) == 0
    assert degree(Divisor.from_points(2, A, div2_p2_points())) == 8 * 4 + 4 * 4
    assert degree(tq_divisor(ThetaQuotient.theta(), A)) == 1


def test_weight_examples():
    assert same_class(weight(D(1)), PointClass(1, ONE))
    # the 48 displayed points multiply to p^18 before any reduction
    raw = ONE
    for x in div2_p2_points():
        raw = raw * x
    assert A.reduce(raw) == P ** 18
    w = weight(Divisor.from_points(2, A, div2_p2_points()))
    assert same_class(w, PointClass(2, ONE))
    d = D(1, (e1 / Q, 1), (e1 ** -1 / Q, 1))
    assert same_class(weight(d), PointClass(1, Q ** -2))


def test_sigma_translate_examples():
    d3 = Divisor.from_points(2, A, div2_p3_points())
    assert matches_exactly(sigma_translate(d3, -1), div2_sinv_p3_points(), A)
    assert not sigma_translate(D(2), 1)
    d = D(2, (e1, 2), (Q, -1))
    assert sigma_translate(sigma_translate(d, 1), -1) == d
    with pytest.raises(ValueError):
        sigma_translate(d, 2)


def test_pullback_examples():
    theta = tq_divisor(ThetaQuotient.theta(), A)
    expected = [ONE, MINUS, P ** h, MINUS * P ** h]
    assert matches_exactly(pullback(theta, 2), expected, A)
    d = D(1, (e1, 3), (Q, -2))
    assert pullback(d, 1) == d
    with pytest.raises(ValueError):
        pullback(d, 0)


def test_pullback_matches_level_lift_of_theta():
    # a level-1 theta quotient and its level-2 rewrite have the pulled-back divisor
    from difftrans.thetafield import tq_lift
    f = ThetaQuotient(1, ONE, ((e1, 1), (Q, -2)))
    assert tq_divisor(tq_lift(f, 2), A) == pullback(tq_divisor(f, A), 2)


def test_hypergeometric_divisors_all_simple():
    hyp = build_hypergeometric(eps(), A)
    for d in (tq_divisor(hyp.p2, A), tq_divisor(hyp.p3, A)):
        assert d.is_effective() and all(n == 1 for _, n in d.items())
    assert Divisor.from_points(2, A, []) <= tq_divisor(hyp.p2, A)


# --- properties ----------------------------------------------------------------------------

POOL = [ONE, e1, Monomial.gen("e2"), Q ** h, e1 ** h * Q, MINUS * P ** h, Monomial.parse("e3^-1*q^(1/4)"),
        Monomial.parse("i*e1^(1/2)*e2^(1/2)")]


def divisors(level=None):
    lv = st.just(level) if level else st.sampled_from([1, 2])
    return lv.flatmap(lambda k: st.builds(
        lambda terms: Divisor(k, A, terms),
        st.lists(st.tuples(st.one_of(st.sampled_from(POOL), monomials(max_size=3)), st.integers(-3, 3)),
                 max_size=6)))


def pairs():
    return st.sampled_from([1, 2]).flatmap(lambda k: st.tuples(divisors(k), divisors(k)))


@settings(max_examples=200)
@given(pairs())
def test_prop_degree_homomorphism(ab):
    a, b = ab
    assert degree(a + b) == degree(a) + degree(b)
    assert degree(-a) == -degree(a)


@settings(max_examples=200)
@given(pairs())
def test_prop_weight_homomorphism(ab):
    a, b = ab
    assert same_class(weight(a + b), weight(a) * weight(b))
    assert same_class(weight(a - a), PointClass(a.level, ONE))


@settings(max_examples=200)
@given(divisors())
def test_prop_weight_of_sigma_translate(d):
    k = d.level
    qk = Q ** F(1, k)
    # sigma^-1 moves every point by +q_k, so the weight gains q_k^deg
    assert same_class(weight(sigma_translate(d, -1)), PointClass(k, weight(d).value * qk ** degree(d)))
    assert same_class(weight(sigma_translate(d, 1)), PointClass(k, weight(d).value * qk ** -degree(d)))


@settings(max_examples=200)
@given(divisors())
def test_prop_sigma_translate_preserves_degree(d):
    assert degree(sigma_translate(d, 1)) == degree(d) == degree(sigma_translate(d, -1))
    assert sigma_translate(sigma_translate(d, -1), 1) == d


@settings(max_examples=200)
@given(st.tuples(divisors(1), divisors(1)), st.sampled_from([1, 2, 3]))
def test_prop_pullback_commutes_with_add(ab, k):
    a, b = ab
    assert pullback(a + b, k) == pullback(a, k) + pullback(b, k)
    assert degree(pullback(a, k)) == k * k * degree(a)
    assert pullback(a, k).level == k


@settings(max_examples=200)
@given(divisors())
def test_prop_keys_are_distinct_classes(d):
    pts = [PointClass(d.level, x) for x, _ in d.items()]
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            assert not same_class(x, y)
    assert all(n != 0 for _, n in d.items())
