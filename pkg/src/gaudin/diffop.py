"""Differential operators in d/du with rational-function coefficients.

An operator of order N is stored by its coefficients of ``d^N, ..., d^0``
(leading first).  The noncommutative product follows ``d o f = f o d + f'``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .linalg import nullspace, rref
from .numeric import (
    DEFAULT_TOL,
    FLOAT,
    DomainError,
    Polynomial,
    RationalFunction,
    as_rational_function,
    binomial,
    join_domains,
    poly_roots,
    scalar_domain,
    to_float,
)

log = logging.getLogger(__name__)


class IrregularSingularity(ValueError):
    """A coefficient has a pole beyond the Fuchsian bound."""


class ScalarDiffOp:
    """``sum_k coeffs[k] * d^(order - k)``."""

    def __init__(self, coeffs: Sequence):
        if not coeffs:
            raise ValueError("an operator needs at least one coefficient")
        self.coeffs: tuple[RationalFunction, ...] = tuple(as_rational_function(c) for c in coeffs)
        self.domain = join_domains(*(c.domain for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def d(cls, k: int = 1) -> "ScalarDiffOp":
        return cls([1] + [0] * k)

    @classmethod
    def multiplication(cls, f) -> "ScalarDiffOp":
        return cls([f])

    def coefficient(self, k: int) -> RationalFunction:
        """Coefficient of ``d^k``."""
        return self.coeffs[self.order - k]

    def h(self, i: int) -> RationalFunction:
        """Coefficient of ``d^(N-i)``, the ``h_i`` of a monic operator."""
        return self.coeffs[i]

    def is_monic(self) -> bool:
        return self.coeffs[0] == 1

    def __repr__(self) -> str:
        return f"ScalarDiffOp(order={self.order}, coeffs={[str(c) for c in self.coeffs]})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalarDiffOp):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __add__(self, other: "ScalarDiffOp") -> "ScalarDiffOp":
        n = max(self.order, other.order)
        out = []
        for k in range(n, -1, -1):
            a = self.coefficient(k) if k <= self.order else RationalFunction(0)
            b = other.coefficient(k) if k <= other.order else RationalFunction(0)
            out.append(a + b)
        return ScalarDiffOp(_strip_leading(out))

    def __neg__(self) -> "ScalarDiffOp":
        return ScalarDiffOp([-c for c in self.coeffs])

    def __sub__(self, other: "ScalarDiffOp") -> "ScalarDiffOp":
        return self + (-other)

    def __mul__(self, other: "ScalarDiffOp") -> "ScalarDiffOp":
        return compose(self, other)

    def to_float(self) -> "ScalarDiffOp":
        return ScalarDiffOp([c.to_float() for c in self.coeffs])

    def evaluate(self, x) -> list:
        """Coefficient values (leading first) at ``u = x``."""
        return [c(x) for c in self.coeffs]

    def to_dict(self) -> dict:
        from .serialize import encode_ratfun
        return {"order": self.order, "coeffs": [encode_ratfun(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data) -> "ScalarDiffOp":
        from .serialize import decode_ratfun
        if not isinstance(data, dict) or "order" not in data or "coeffs" not in data:
            raise ValueError("operator JSON needs 'order' and 'coeffs'")
        coeffs = [decode_ratfun(c) for c in data["coeffs"]]
        if len(coeffs) != int(data["order"]) + 1:
            raise ValueError("operator JSON: len(coeffs) must be order + 1")
        return cls(coeffs)


def _strip_leading(coeffs: list) -> list:
    while len(coeffs) > 1 and coeffs[0].is_zero():
        coeffs = coeffs[1:]
    return coeffs


class MatrixDiffOp:
    """Operator whose coefficients are square matrices of rational functions.

    ``coeffs[k]`` is the matrix multiplying ``d^(order - k)``, given as a list
    of rows.
    """

    def __init__(self, coeffs: Sequence[Sequence[Sequence]]):
        self.coeffs = [[[as_rational_function(x) for x in row] for row in m] for m in coeffs]
        dims = {len(m) for m in self.coeffs} | {len(r) for m in self.coeffs for r in m}
        if len(dims) > 1:
            raise ValueError("coefficient matrices must be square of one size")
        self.dim = dims.pop() if dims else 0

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, x) -> list:
        return [[[c(x) for c in row] for row in m] for m in self.coeffs]


def _leibniz(a_coeffs, b_coeffs, mul, add, deriv, zero):
    """Generic product of two operators given as ascending-power lists."""
    out = [zero() for _ in range(len(a_coeffs) + len(b_coeffs) - 1)]
    for i, a in enumerate(a_coeffs):
        for j, b in enumerate(b_coeffs):
            bm = b
            for m in range(i + 1):
                term = mul(a, bm)
                c = binomial(i, m)
                if c != 1:
                    term = mul(term, c)
                out[i - m + j] = add(out[i - m + j], term)
                if m < i:
                    bm = deriv(bm)
    return out


def compose(A, B):
    """The operator product ``A o B``."""
    if isinstance(A, ScalarDiffOp) and isinstance(B, ScalarDiffOp):
        join_domains(A.domain, B.domain)
        a = list(reversed(A.coeffs))
        b = list(reversed(B.coeffs))
        prod = _leibniz(
            a, b,
            mul=lambda x, y: x * y,
            add=lambda x, y: x + y,
            deriv=lambda x: x.derivative(),
            zero=lambda: RationalFunction(0),
        )
        return ScalarDiffOp(_strip_leading(list(reversed(prod))))
    if isinstance(A, MatrixDiffOp) and isinstance(B, MatrixDiffOp):
        if A.dim != B.dim:
            raise ValueError(f"dimension mismatch {A.dim} != {B.dim}")
        n = A.dim

        def mmul(x, y):
            if not isinstance(y, list):
                return [[e * y for e in row] for row in x]
            return [[sum((x[i][k] * y[k][j] for k in range(n)), RationalFunction(0))
                     for j in range(n)] for i in range(n)]

        prod = _leibniz(
            list(reversed(A.coeffs)), list(reversed(B.coeffs)),
            mul=mmul,
            add=lambda x, y: [[p + q for p, q in zip(r, s)] for r, s in zip(x, y)],
            deriv=lambda x: [[e.derivative() for e in row] for row in x],
            zero=lambda: [[RationalFunction(0)] * n for _ in range(n)],
        )
        return MatrixDiffOp(list(reversed(prod)))
    raise TypeError("compose needs two scalar or two matrix operators")


def from_factors(chis: Sequence) -> ScalarDiffOp:
    """``(d - chi_1) o (d - chi_2) o ... o (d - chi_N)``."""
    if not chis:
        raise ValueError("from_factors needs at least one factor")
    out = None
    for chi in chis:
        factor = ScalarDiffOp([1, -as_rational_function(chi)])
        out = factor if out is None else compose(out, factor)
    return out


def apply(D: ScalarDiffOp, f: Polynomial) -> RationalFunction:
    """``D f``."""
    total = RationalFunction(0)
    for k in range(D.order + 1):
        fk = f.derivative(k)
        if fk.is_zero():
            continue
        total = total + D.coefficient(k) * RationalFunction(fk)
    return total


def indicial_polynomial(leading: Sequence) -> Polynomial:
    """``sum_i leading[i] * r(r-1)...(r-N+i+1)`` for ``i = 0..N``."""
    N = len(leading) - 1
    total = Polynomial()
    for i, p in enumerate(leading):
        if p == 0:
            continue
        total = total + Polynomial.from_roots(range(N - i)) * p
    return total


def exponents_at(D: ScalarDiffOp, b, tol=DEFAULT_TOL, precision: int | None = None) -> list:
    """Roots of the indicial polynomial of ``D`` at ``u = b``.

    Exact operators with exact ``b`` return Fractions for rational exponents.
    """
    join_domains(D.domain, scalar_domain(b))
    N = D.order
    leading = [1]
    for i in range(1, N + 1):
        h = D.h(i)
        if h.is_zero():
            leading.append(0)
            continue
        v, c = h.valuation_at(b, tol)
        if v < -i:
            raise IrregularSingularity(f"pole of order {-v} in h_{i} at {b}")
        leading.append(c if v == -i else 0)
    return _indicial_roots(leading, precision)


def exponents_at_infinity(D: ScalarDiffOp, tol=DEFAULT_TOL, precision: int | None = None) -> list:
    """Exponents at infinity; a solution ``~ u^d`` contributes ``-d``."""
    N = D.order
    leading = [1]
    for i in range(1, N + 1):
        h = D.h(i)
        deg, c = h.leading_at_infinity(tol if D.domain == FLOAT else 0)
        if deg > -i:
            raise IrregularSingularity(f"h_{i} decays slower than u^-{i} at infinity")
        leading.append(c if deg == -i else 0)
    return [-d for d in _indicial_roots(leading, precision)]


def _indicial_roots(leading, precision) -> list:
    I = indicial_polynomial(leading)
    prec = precision or mpmath.mp.prec
    roots = poly_roots(I, prec)
    if I.domain == FLOAT:
        return _sorted(roots)
    out = []
    for r in roots:
        q = _snap_rational(r, I)
        out.append(q if q is not None else r)
    return _sorted(out)


def _snap_rational(r, I: Polynomial):
    approx = Fraction(float(mpmath.re(r))).limit_denominator(1000)
    if abs(mpmath.im(r)) < 1e-6 and I(approx) == 0:
        return approx
    return None


def _sorted(values):
    def key(x):
        if isinstance(x, (int, Fraction)):
            return (float(x), 0.0)
        return (float(mpmath.re(x)), float(mpmath.im(x)))
    return sorted(values, key=key)


def _denominator_product(D: ScalarDiffOp) -> Polynomial:
    L = Polynomial([1])
    for c in D.coeffs:
        L = L * c.den
    return L


def polynomial_kernel(D: ScalarDiffOp, degree_bound: int, tol=DEFAULT_TOL) -> list[Polynomial]:
    """Polynomial solutions of ``D f = 0`` with ``deg f <= degree_bound``.

    The basis is echelonised by descending degree (leading coefficients 1).
    ``D f`` is sampled at more points than the degree of its cleared
    numerator, so vanishing at the samples means vanishing identically.
    """
    if degree_bound < 0:
        return []
    is_float = D.domain == FLOAT
    L = _denominator_product(D)
    npts = degree_bound + L.degree + D.order + 2
    pts = _sample_points(L, npts, is_float)
    ncols = degree_bound + 1
    radius = max((abs(p) for p in pts), default=1) if is_float else 1
    matrix = []
    for x in pts:
        vals = D.evaluate(x)
        row = []
        for c in range(ncols):
            mono = Polynomial.monomial(c)
            acc = 0
            for k in range(D.order + 1):
                dk = mono.derivative(D.order - k)
                if dk.is_zero():
                    continue
                acc = acc + vals[k] * dk(x)
            row.append(acc / radius ** c if is_float else acc)
        if is_float:
            scale = max(abs(e) for e in row)
            if scale:
                row = [e / scale for e in row]
        matrix.append(row)
    null = nullspace(matrix, tol=tol if is_float else None)
    if not null:
        return []
    if is_float:
        null = [[x / radius ** c for c, x in enumerate(vec)] for vec in null]
    rows, _ = rref(null, tol if is_float else None, columns=range(ncols - 1, -1, -1))
    return [Polynomial(r) for r in rows]


def _sample_points(L: Polynomial, count: int, is_float: bool) -> list:
    if is_float:
        bound = 1 + max((abs(c / L.lead) for c in L.coeffs[:-1]), default=0)
        radius = 2 * bound
        return [
            radius * mpmath.expjpi(mpmath.mpf(2 * k + 1) / count) * (1 + mpmath.mpf(k % 3) / 7)
            for k in range(count)
        ]
    out = []
    x = Fraction(1, 2)
    while len(out) < count:
        if L(x) != 0:
            out.append(x)
        x = x + 1
    return out


# --- class Delta membership -------------------------------------------------


@dataclass
class ConditionResult:
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class DeltaMembershipReport:
    a: ConditionResult
    b: ConditionResult
    c: ConditionResult
    d: ConditionResult
    tolerance: float
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.a.passed and self.b.passed and self.c.passed and self.d.passed

    def to_dict(self) -> dict:
        from .serialize import encode_scalar, encode_polynomial

        def clean(obj):
            if isinstance(obj, dict):
                return {k: clean(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [clean(v) for v in obj]
            if isinstance(obj, Polynomial):
                return encode_polynomial(obj)
            if isinstance(obj, (Fraction, mpmath.mpc, mpmath.mpf)):
                return encode_scalar(obj)
            return obj

        return {
            "pass": self.passed,
            "reason": self.reason,
            "tolerance": self.tolerance,
            "conditions": {
                name: {"pass": cond.passed, **clean(cond.detail)}
                for name, cond in zip("abcd", (self.a, self.b, self.c, self.d))
            },
        }


def target_exponents_finite(lam: Sequence[int]) -> list[int]:
    """``lambda_N, lambda_{N-1} + 1, ..., lambda_1 + N - 1``."""
    N = len(lam)
    return sorted(lam[N - 1 - k] + k for k in range(N))


def target_exponents_infinity(lam: Sequence[int]) -> list[int]:
    """``1 - N - lambda_1, 2 - N - lambda_2, ..., -lambda_N``."""
    N = len(lam)
    return sorted(i - N - lam[i - 1] for i in range(1, N + 1))


def match_integer_multiset(values, targets, tol=1e-8) -> tuple[bool, list[int] | None]:
    """Round ``values`` to integers (within ``tol``) and compare to ``targets``."""
    ints = []
    for x in values:
        if isinstance(x, (int, Fraction)):
            if Fraction(x).denominator != 1:
                return False, None
            ints.append(int(x))
            continue
        k = int(mpmath.nint(mpmath.re(x)))
        if abs(x - k) > tol:
            return False, None
        ints.append(k)
    return sorted(ints) == sorted(targets), sorted(ints)


def extra_singular_points(D: ScalarDiffOp, points: Sequence, tol=DEFAULT_TOL) -> list:
    """Poles of the coefficients away from ``points``."""
    found = []
    if D.domain == FLOAT:
        points = [to_float(p) for p in points]
        for i in range(1, D.order + 1):
            h = D.h(i)
            if h.den.degree < 1:
                continue
            for r in poly_roots(h.den, mpmath.mp.prec):
                if any(abs(r - p) <= tol * max(1, abs(p)) for p in points):
                    continue
                if any(abs(r - f) <= tol * max(1, abs(f)) for f in found):
                    continue
                v, _ = h.valuation_at(r, tol)
                if v < 0:
                    found.append(r)
        return found
    for i in range(1, D.order + 1):
        den = D.h(i).den
        for p in points:
            lin = Polynomial([-p, 1])
            while den.degree > 0:
                q, rem = den.divmod(lin)
                if not rem.is_zero():
                    break
                den = q
        if den.degree > 0:
            found.extend(poly_roots(den, mpmath.mp.prec))
    return found


def delta_membership(D: ScalarDiffOp, Lambda: Sequence[Sequence[int]], lam: Sequence[int],
                     b: Sequence, tol=DEFAULT_TOL, exponent_tol=1e-8) -> DeltaMembershipReport:
    """Check conditions a)-d) of the class Delta for a monic operator ``D``."""
    N = D.order
    lam = _pad(lam, N)
    Lambda = [_pad(l, N) for l in Lambda]
    if len(Lambda) != len(b):
        raise ValueError("need one partition per point b_s")
    if len(set(map(str, b))) != len(b):
        raise ValueError("points b_s must be pairwise distinct")
    if D.domain == FLOAT:
        b = [to_float(x) if scalar_domain(x) != FLOAT else x for x in b]
    else:
        b = [x for x in b]
        if any(scalar_domain(x) == FLOAT for x in b):
            raise DomainError("exact operator with float points; convert the operator first")

    if sum(lam) != sum(sum(l) for l in Lambda):
        fail = ConditionResult(False, {"reason": "weight mismatch"})
        return DeltaMembershipReport(fail, fail, fail, fail, tol, reason="weight mismatch")
    if not D.is_monic():
        fail = ConditionResult(False, {"reason": "operator is not monic"})
        return DeltaMembershipReport(fail, fail, fail, fail, tol, reason="not monic")

    extra = extra_singular_points(D, b, tol)
    cond_a = ConditionResult(not extra, {"extra_singular_points": extra})

    b_detail, b_ok = [], True
    for point, part in zip(b, Lambda):
        target = target_exponents_finite(part)
        entry = {"point": point, "target": target}
        try:
            entry["exponents"] = exponents_at(D, point, tol)
            ok, _ = match_integer_multiset(entry["exponents"], target, exponent_tol)
        except IrregularSingularity as exc:
            ok = False
            entry["error"] = str(exc)
        entry["pass"] = ok
        b_ok = b_ok and ok
        b_detail.append(entry)
    cond_b = ConditionResult(b_ok, {"points": b_detail})

    target_inf = target_exponents_infinity(lam)
    try:
        exps_inf = exponents_at_infinity(D, tol)
        c_ok, _ = match_integer_multiset(exps_inf, target_inf, exponent_tol)
    except IrregularSingularity as exc:
        exps_inf, c_ok = [], False
        log.info("irregular at infinity: %s", exc)
    cond_c = ConditionResult(c_ok, {"exponents": exps_inf, "target": target_inf})

    kernel: list[Polynomial] = []
    d_detail: dict = {}
    degrees = _kernel_degree_bound(exps_inf, exponent_tol)
    if degrees is None:
        d_ok = False
        d_detail["reason"] = "exponents at infinity are not nonpositive integers"
    else:
        kernel = polynomial_kernel(D, degrees, tol)
        d_ok = len(kernel) == N
        d_detail["degree_bound"] = degrees
    d_detail["kernel"] = kernel
    cond_d = ConditionResult(d_ok, d_detail)
    return DeltaMembershipReport(cond_a, cond_b, cond_c, cond_d, tol)


def _kernel_degree_bound(exps_inf, tol) -> int | None:
    if not exps_inf:
        return None
    degs = []
    for e in exps_inf:
        if isinstance(e, (int, Fraction)):
            if Fraction(e).denominator != 1:
                return None
            k = int(e)
        else:
            k = int(mpmath.nint(mpmath.re(e)))
            if abs(e - k) > tol:
                return None
        if -k < 0:
            return None
        degs.append(-k)
    return max(degs)


def _pad(lam: Sequence[int], N: int) -> list[int]:
    lam = [int(x) for x in lam]
    while len(lam) > N and lam[-1] == 0:
        lam.pop()
    if len(lam) > N:
        raise ValueError(f"partition {lam} has more than {N} parts")
    return lam + [0] * (N - len(lam))


def operators_agree(A: ScalarDiffOp, B: ScalarDiffOp, points: Sequence) -> float:
    """Max relative difference of the coefficient values at ``points``."""
    if A.order != B.order:
        return float("inf")
    worst = mpmath.mpf(0)
    for x in points:
        va, vb = A.evaluate(x), B.evaluate(x)
        scale = max([abs(v) for v in va] + [abs(v) for v in vb] + [mpmath.mpf(1)])
        for p, q in zip(va, vb):
            diff = p - q
            if isinstance(diff, Fraction):
                diff = to_float(diff)
            worst = max(worst, abs(diff) / scale)
    return float(worst)


__all__ = [
    "ConditionResult",
    "DeltaMembershipReport",
    "IrregularSingularity",
    "MatrixDiffOp",
    "ScalarDiffOp",
    "apply",
    "compose",
    "delta_membership",
    "exponents_at",
    "exponents_at_infinity",
    "from_factors",
    "polynomial_kernel",
]
