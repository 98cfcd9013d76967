from fractions import Fraction

import mpmath
import numpy as np
import pytest
from helpers import one, op, rf, u
from hypothesis import given, settings
from hypothesis import strategies as st

from gaudin.diffop import apply, exponents_at, operators_agree
from gaudin.schubert import (
    DegenerationMismatch,
    NotInCell,
    RootCoordinates,
    SchubertPoint,
    bae_residual,
    chi_operator,
    free_keys,
    is_generic,
    kernel_to_point,
    operator_from_kernel,
    root_coordinates,
    sample_curve,
    y_polynomials,
)
from gaudin.repn import Partition

D_EX = op(1, rf([-1], u), 0)
LAMBDAS = [(1, 0), (2, 0), (1, 1), (2, 1), (1, 0, 0), (1, 1, 0), (2, 1, 0), (2, 1, 1), (1, 1, 1), (3, 1)]


def point(lam, *polys):
    return SchubertPoint.from_basis(list(polys), lam)


def test_free_keys():
    assert free_keys(Partition((0, 0))) == []
    # f_1 = u^2 + f_11 u (degree 0 is in P)
    assert free_keys(Partition((1, 0))) == [(1, 1)]


def test_y_examples():
    X = point((1, 0), u ** 2, one)
    assert y_polynomials(X) == [u, one]
    assert y_polynomials(point((0, 0, 0), u ** 2, u, one)) == [one, one, one]
    ys = y_polynomials(point((1, 1, 0), u ** 3, u ** 2, one))
    assert [y.degree for y in ys] == [2, 1, 0] and ys[1] == u


def test_root_coordinate_examples():
    assert root_coordinates(point((1, 0), u ** 2, one)).level(0) == (0,)
    assert root_coordinates(point((0, 0), u, one)).levels == ((), ())
    t = root_coordinates(point((1, 1, 0), u ** 3, u ** 2, one))
    assert t.level(1) == (0,)


def test_cell_membership():
    with pytest.raises(NotInCell):
        point((1, 0), u ** 2, u)
    with pytest.raises(NotInCell):
        SchubertPoint((1, 0), {(1, 2): 1})


def test_genericity():
    assert is_generic(point((1, 0), u ** 2, one))
    assert not is_generic(point((2, 0), u ** 3, one))
    assert not is_generic(point((2, 0), u ** 3, one).to_float())


def test_bae_examples():
    assert bae_residual(RootCoordinates([[Fraction(0)], [], []])) == 0
    assert bae_residual(RootCoordinates([[Fraction(0), Fraction(2)], [Fraction(1)]])) == 0


def test_chi_and_kernel_examples():
    assert chi_operator(RootCoordinates([[], []])) == op(1, 0, 0)
    assert chi_operator(RootCoordinates([[Fraction(0)], []])) == D_EX
    assert operator_from_kernel(point((0, 0), u, one)) == op(1, 0, 0)
    assert operator_from_kernel(point((1, 0), u ** 2, one)) == D_EX
    D = operator_from_kernel(point((1, 1, 0), u ** 3, u ** 2, one))
    assert all(apply(D, f).is_zero() for f in (u ** 3, u ** 2, one))


def test_kernel_to_point_examples():
    assert kernel_to_point(op(1, 0, 0), (0, 0)) == point((0, 0), u, one)
    assert kernel_to_point(D_EX, (1, 0)) == point((1, 0), u ** 2, one)
    with pytest.raises(NotInCell):
        kernel_to_point(op(1, -1), (0,))


def test_rational_bae_instances():
    # X = span{u^2, u - 1}: y_0 = u(u - 2), y_1 = u - 1
    X = point((1, 1), u ** 2, u - 1)
    assert root_coordinates(X).levels == ((0, 2), (1,))
    t = RootCoordinates([[Fraction(0), Fraction(2)], [Fraction(1)]])
    assert bae_residual(t) == 0
    assert chi_operator(t) == operator_from_kernel(X)
    # the same roots for N = 3 give lambda = (1, 1, 0)
    t3 = RootCoordinates([[Fraction(0), Fraction(2)], [Fraction(1)], []])
    X3 = kernel_to_point(chi_operator(t3), (1, 1, 0))
    assert chi_operator(t3) == operator_from_kernel(X3)


@settings(max_examples=20)
@given(st.sampled_from(LAMBDAS), st.integers(0, 10 ** 6))
def test_flag_basis_unique(lam, seed):
    X = SchubertPoint.random(lam, np.random.default_rng(seed))
    f = X.flag_basis()
    rng = np.random.default_rng(seed + 1)
    while True:
        M = [[Fraction(int(x)) for x in row] for row in rng.integers(-3, 4, size=(len(f), len(f)))]
        if np.linalg.det(np.array(M, dtype=float)) != 0:
            break
    mixed = []
    for row in M:
        p = f[0] * 0
        for c, q in zip(row, f):
            p = p + q * c
        mixed.append(p)
    assert SchubertPoint.from_basis(mixed, lam) == X


@settings(max_examples=20)
@given(st.sampled_from(LAMBDAS), st.integers(0, 10 ** 6))
def test_y_degrees_and_monic(lam, seed):
    X = SchubertPoint.random(lam, np.random.default_rng(seed))
    for y, l in zip(y_polynomials(X), X.lam.level_sizes()):
        assert y.degree == l and y.lead == 1


@settings(max_examples=20)
@given(st.sampled_from(LAMBDAS), st.integers(0, 10 ** 6))
def test_kernel_roundtrip(lam, seed):
    X = SchubertPoint.random(lam, np.random.default_rng(seed))
    assert kernel_to_point(operator_from_kernel(X), lam) == X


@settings(max_examples=8)
@given(st.sampled_from([(1, 0), (2, 0), (1, 1), (2, 1, 0), (1, 1, 0)]), st.integers(0, 10 ** 6))
def test_generic_points_bae_and_factorization(lam, seed):
    X = SchubertPoint.random(lam, np.random.default_rng(seed))
    if not is_generic(X):
        return
    with mpmath.workprec(256):
        t = root_coordinates(X, 256)
        assert bae_residual(t) < 1e-9
        pts = [mpmath.mpc(k + 0.37, 0.51 * k - 1) for k in range(10)]
        assert operators_agree(chi_operator(t), operator_from_kernel(X).to_float(), pts) < 1e-8
        N = X.N
        for x in t.level(0):
            got = sorted(round(float(mpmath.re(e))) for e in exponents_at(operator_from_kernel(X).to_float(), x))
            assert got == list(range(N - 1)) + [N]


def test_sample_curve_single_group():
    X0 = point((1, 0), u ** 2, one)
    germ, samples = sample_curve(X0, [Fraction(0)], [1], seed=2)
    assert germ.at(0).flag_basis() == X0.flag_basis()
    mags = [abs(t.level(0)[0]) for _, t in samples]
    assert mags[-1] < mags[0] and mags[-1] < 1e-5


def test_sample_curve_two_groups():
    # kernel of a Delta member with n = (2, 1) at b = (0, 1)
    X0 = SchubertPoint((2, 1), {})  # span{u^4, u^2}: all roots at 0
    _, samples = sample_curve(X0, [Fraction(0), Fraction(1)], [3, 0], seed=1)
    t0 = samples[-1][1].level(0)
    assert len(t0) == 3 and all(abs(x) < 1e-2 for x in t0)
    with pytest.raises(DegenerationMismatch):
        sample_curve(X0, [Fraction(0), Fraction(1)], [2, 1], seed=1)


def test_sample_curve_sum_mismatch():
    with pytest.raises(DegenerationMismatch):
        sample_curve(point((1, 0), u ** 2, one), [Fraction(0)], [2], seed=0)


def test_point_json_roundtrip():
    X = SchubertPoint.random((2, 1, 0), np.random.default_rng(3))
    assert SchubertPoint.from_dict(X.to_dict()) == X
