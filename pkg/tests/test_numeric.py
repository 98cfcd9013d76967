from fractions import Fraction

import mpmath
import pytest
from helpers import polynomials, rationals, rf, u
from hypothesis import given
from hypothesis import strategies as st

from gaudin.numeric import (
    DomainError,
    Polynomial,
    RationalFunction,
    ZERO_DEGREE,
    interpolate,
    poly_gcd,
    poly_roots,
    rebuild_error,
    square_free_decomposition,
    to_float,
    wronskian,
)


def test_zero_polynomial_degree_sentinel():
    assert Polynomial([]).degree == ZERO_DEGREE
    assert Polynomial([0, 0]).is_zero()


def test_wronskian_single():
    p = u ** 3 + 2 * u
    assert wronskian([p]) == p


def test_wronskian_examples():
    assert wronskian([u ** 2, u]) == -(u ** 2)
    assert wronskian([u, u ** 2]) == u ** 2


def test_wronskian_empty_is_error():
    with pytest.raises(ValueError):
        wronskian([])


@pytest.mark.parametrize(
    "p, expected",
    [(u ** 2 - 1, [-1, 1]), (u, [0]), (u ** 2 - 2 * u + 1, [1, 1])],
)
def test_roots_examples(p, expected):
    roots = poly_roots(p)
    assert len(roots) == len(expected)
    for r, e in zip(roots, expected):
        assert abs(r - e) < 1e-12


def test_roots_of_zero_polynomial():
    with pytest.raises(ValueError):
        poly_roots(Polynomial([]))


def test_derivative_examples():
    assert rf([1]).derivative().is_zero()
    assert rf([1], u).derivative() == rf([-1], u ** 2)
    assert rf(u, u - 1).derivative() == rf([-1], (u - 1) ** 2)


def test_domains_do_not_mix():
    with pytest.raises(DomainError):
        Polynomial([Fraction(1), mpmath.mpc(1)])
    with pytest.raises(DomainError):
        Polynomial([Fraction(1, 2)]) + Polynomial([mpmath.mpc(1)])


def test_ratfun_is_reduced_and_monic():
    r = RationalFunction(2 * (u ** 2 - 1), 4 * (u - 1))
    assert r.den == Polynomial([1])
    assert r.num == (u + 1) * Fraction(1, 2)


def test_valuation_and_infinity():
    r = rf([3], u ** 2) + rf([1], u)
    assert r.valuation_at(0) == (-2, 3)
    assert rf(u ** 2, u - 1).degree_at_infinity() == 1


def test_square_free_multiplicities():
    p = (u - 1) ** 3 * (u + 2)
    parts = {m: f for f, m in square_free_decomposition(p)}
    assert parts[3] == u - 1 and parts[1] == u + 2


@given(rationals, rationals)
def test_exact_addition_roundtrip(a, b):
    assert (a + b) - b == a


@given(polynomials(), polynomials(nonzero=True))
def test_divmod_identity(p, q):
    quo, rem = p.divmod(q)
    assert quo * q + rem == p
    assert rem.degree < q.degree


@given(polynomials(nonzero=True), polynomials(nonzero=True))
def test_gcd_divides(p, q):
    g = poly_gcd(p, q)
    assert (p % g).is_zero() and (q % g).is_zero()


@given(st.lists(polynomials(max_degree=4, nonzero=True), min_size=2, max_size=3), rationals)
def test_wronskian_multilinear(gs, c):
    scaled = [gs[0] * c] + gs[1:]
    assert wronskian(scaled) == wronskian(gs) * c


@given(st.lists(st.integers(0, 7), min_size=1, max_size=4, unique=True), st.data())
def test_wronskian_degree_and_leading_coefficient(degs, data):
    degs = sorted(degs, reverse=True)
    gs = []
    for d in degs:
        low = data.draw(st.lists(rationals, min_size=d, max_size=d))
        gs.append(Polynomial(low + [1]))
    W = wronskian(gs)
    l = len(degs)
    lead = 1
    for i in range(l):
        for j in range(i + 1, l):
            lead *= degs[i] - degs[j]
    # sign convention: rows g_i, columns derivatives; leading term is a Vandermonde in the degrees
    assert W.degree == sum(degs) - l * (l - 1) // 2
    assert abs(W.lead) == abs(lead)


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=1, max_size=12))
def test_roots_rebuild_roundtrip(roots):
    with mpmath.workprec(106):
        p = Polynomial.from_roots([to_float(complex(round(r.real, 3), round(r.imag, 3))) for r in roots])
        found = poly_roots(p, 106)
        assert rebuild_error(p, found) < 2.0 ** -53


@given(st.lists(rationals, min_size=1, max_size=6, unique=True), st.data())
def test_interpolation_recovers_values(xs, data):
    ys = data.draw(st.lists(rationals, min_size=len(xs), max_size=len(xs)))
    p = interpolate(xs, ys)
    assert [p(x) for x in xs] == ys
    assert p.degree < len(xs)
