from fractions import Fraction

import mpmath
import numpy as np
import pytest

from gaudin.bethe import (
    NotInvariant,
    apply_universal,
    commutativity_check,
    eigen_check,
    singular_subspace,
    spectrum,
    universal_operator,
    weight_subspace,
)
from gaudin.numeric import Polynomial, RationalFunction
from gaudin.repn import ModuleSpace, Subspace, WeightVector

u = Polynomial.u()


def e_of_u(space, i, j, x, power=1, sign=1):
    ws = [sign * Fraction(1) / (x - z) ** power for z in space.z]
    return lambda a: space.apply_e(i, j, a, ws)


def identity(n):
    return np.array([[Fraction(int(a == b)) for b in range(n)] for a in range(n)], dtype=object)


def test_rank_one():
    sp = ModuleSpace(1, [Fraction(0), Fraction(2)])
    x = Fraction(1, 3)
    B = apply_universal(sp, x, identity(1))
    assert B[1][0, 0] == -(1 / x + 1 / (x - 2))


def test_rank_two_hand_expansion():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1)])
    I = identity(4)
    for x in [Fraction(1, 2), Fraction(3), Fraction(-2, 7), Fraction(5, 3), Fraction(9)]:
        e = lambda i, j: e_of_u(sp, i, j, x)  # noqa: E731
        de22 = e_of_u(sp, 2, 2, x, power=2, sign=-1)
        B = apply_universal(sp, x, I)
        assert np.all(B[1] == -(e(1, 1)(I) + e(2, 2)(I)))
        assert np.all(B[2] == e(1, 1)(e(2, 2)(I)) - e(2, 1)(e(1, 2)(I)) - de22(I))


def test_trivial_module():
    sp = ModuleSpace(3, [])
    U = universal_operator(sp)
    rep = eigen_check(U, WeightVector(sp, np.array([Fraction(1)], dtype=object)))
    assert all(h.is_zero() for h in rep.h)
    assert rep.residual == 0


def test_eigen_examples():
    sp = ModuleSpace(1, [Fraction(0)])
    rep = eigen_check(universal_operator(sp), WeightVector(sp, sp.unit((1,))))
    assert rep.h == [RationalFunction(Polynomial([-1]), u)]
    sp2 = ModuleSpace(2, [Fraction(0)])
    U = universal_operator(sp2, weight_subspace(sp2, (1, 0)))
    rep = eigen_check(U, WeightVector(sp2, sp2.unit((1,))))
    assert rep.h == [RationalFunction(Polynomial([-1]), u), RationalFunction(Polynomial([]))]
    assert rep.is_eigenvector


def test_not_an_eigenvector_is_flagged():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1)])
    U = universal_operator(sp, weight_subspace(sp, (1, 1)))
    rep = eigen_check(U, WeightVector(sp, sp.unit((1, 2))))
    assert not rep.is_eigenvector


def test_leaking_subspace_rejected():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1)])
    with pytest.raises(NotInvariant):
        universal_operator(sp, Subspace(sp, [sp.unit((1, 2))]))


def test_matrix_blocks_preserve_weights():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1), Fraction(3)])
    B = apply_universal(sp, Fraction(7, 2), identity(sp.dim))
    for Bi in B[1:]:
        for a, b in zip(*np.nonzero(Bi)):
            assert sp.weight_of(sp.basis[a]) == sp.weight_of(sp.basis[b])


def test_pole_structure():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1), Fraction(-2)])
    U = universal_operator(sp, singular_subspace(sp, (2, 1)))
    M = U.matrix_op
    for i in range(1, 3):
        for row in M.coeffs[i]:
            for r in row:
                assert r.degree_at_infinity() <= -i or r.is_zero()
                for z in sp.z:
                    assert r.valuation_at(z)[0] >= -i


def test_matrix_op_matches_pointwise():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1), Fraction(-2)])
    U = universal_operator(sp, singular_subspace(sp, (2, 1)))
    x = Fraction(11, 7)
    for i, Bi in enumerate(U.matrices_at(x), start=1):
        assert all(U.matrix_op.coeffs[i][a][b](x) == Bi[a, b] for a in range(Bi.shape[0]) for b in range(Bi.shape[1]))


def test_spectrum_dim_one():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1)])
    res = spectrum(universal_operator(sp, singular_subspace(sp, (1, 1))))
    assert len(res) == 1
    v = res.reports[0].vector.coeffs
    assert v[sp.index((1, 2))] == -v[sp.index((2, 1))] != 0


def test_spectrum_two_two():
    sp = ModuleSpace(2, [Fraction(0), Fraction(1), Fraction(3), Fraction(-2)])
    res = spectrum(universal_operator(sp, singular_subspace(sp, (2, 2))), seed=4)
    assert len(res) == 2 and not res.degenerate
    assert all(r.residual < 1e-60 for r in res)
    with mpmath.workprec(256):
        x = mpmath.mpc("0.3", "0.7")
        assert abs(res.reports[0].h[1](x) - res.reports[1].h[1](x)) > 1e-6


def test_commutativity_exact():
    assert commutativity_check(ModuleSpace(1, [Fraction(0), Fraction(2)])) == 0
    assert commutativity_check(ModuleSpace(2, [Fraction(0), Fraction(1)]), samples=[Fraction(1, 2), Fraction(5)]) == 0


def test_commutativity_float():
    with mpmath.workprec(256):
        sp = ModuleSpace(3, [mpmath.mpc(0), mpmath.mpc(1), mpmath.mpc("2.5")])
        pts = [mpmath.mpc("0.5", "0.1"), mpmath.mpc(3)]
        res = commutativity_check(sp, samples=pts)
        scale = max(abs(x) for B in apply_universal(sp, pts[0], np.eye(27, dtype=object) * mpmath.mpc(1))[1:] for x in B.flat)
        assert res < 1e-10 * scale


def test_eigen_report_json():
    sp = ModuleSpace(2, [Fraction(0)])
    U = universal_operator(sp, weight_subspace(sp, (1, 0)))
    data = eigen_check(U, WeightVector(sp, sp.unit((1,)))).to_dict()
    assert list(data) == ["vector", "h", "residual", "is_eigenvector"]
    assert data["h"][0] == {"num": ["-1"], "den": ["0", "1"]}
