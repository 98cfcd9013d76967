"""Small builders shared by the tests."""
from fractions import Fraction

from hypothesis import strategies as st

from gaudin.diffop import ScalarDiffOp
from gaudin.numeric import Polynomial, RationalFunction

u = Polynomial.u()
one = Polynomial([1])


def rf(num, den=None) -> RationalFunction:
    return RationalFunction(num if isinstance(num, Polynomial) else Polynomial(num),
                            den if den is None or isinstance(den, Polynomial) else Polynomial(den))


def op(*coeffs) -> ScalarDiffOp:
    """Operator from leading-first coefficients (RationalFunction or constants)."""
    return ScalarDiffOp([c if isinstance(c, RationalFunction) else rf([c]) for c in coeffs])


def single_box_instance(N, points, weight, seed=0):
    return {
        "N": N,
        "factors": [{"partition": [1], "b": b, "n_s": 1} for b in points],
        "weight": list(weight),
        "seed": seed,
    }


MIXED_INSTANCE = {
    "N": 3,
    "factors": [
        {"partition": [1, 1, 0], "b": "0", "n_s": 2},
        {"partition": [2, 0, 0], "b": "1", "n_s": 2},
    ],
    "weight": [2, 1, 1],
}

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
small_ints = st.integers(min_value=-6, max_value=6)


@st.composite
def polynomials(draw, max_degree=5, nonzero=False):
    cs = draw(st.lists(rationals, min_size=1, max_size=max_degree + 1))
    p = Polynomial(cs)
    if nonzero and p.is_zero():
        p = Polynomial([Fraction(1)])
    return p
