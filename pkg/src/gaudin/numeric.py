"""Scalars, polynomials in ``u``, rational functions, Wronskians and roots.

Two scalar domains are supported and never mixed inside one computation:

* exact: ``int`` / ``fractions.Fraction``;
* float: ``mpmath.mpc`` at the ambient mpmath working precision.

Python ints are domain neutral literals.  Use :func:`to_float` (or the
``to_float`` methods) to move exact data into the float domain explicitly.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

EXACT = "exact"
FLOAT = "float"

# degree of the zero polynomial
ZERO_DEGREE = -1

DEFAULT_PRECISION = 53
PIPELINE_PRECISION = 256


class DomainError(TypeError):
    """Raised when exact and floating scalars meet in one computation."""


def scalar_domain(x) -> str | None:
    if isinstance(x, bool):
        raise DomainError(f"boolean is not a scalar: {x!r}")
    if isinstance(x, int):
        return None
    if isinstance(x, Fraction):
        return EXACT
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return FLOAT
    if isinstance(x, (float, complex)):
        return FLOAT
    raise DomainError(f"unsupported scalar type {type(x).__name__}")


def join_domains(*domains: str | None) -> str | None:
    found = {d for d in domains if d is not None}
    if len(found) > 1:
        raise DomainError("exact and float scalars mixed in one computation")
    return found.pop() if found else None


def domain_of_values(values: Iterable) -> str | None:
    return join_domains(*(scalar_domain(v) for v in values))


def to_float(x):
    """Convert a scalar to ``mpc`` at the current working precision."""
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    if isinstance(x, (int, float, complex, mpmath.mpf, mpmath.mpc)):
        return mpmath.mpc(x)
    raise DomainError(f"cannot convert {type(x).__name__} to float")


def _canon(x, domain):
    """Storage form: Fraction for exact, mpc for float, int for neutral."""
    if domain == FLOAT:
        return x if isinstance(x, mpmath.mpc) else to_float(x)
    if domain == EXACT:
        return x if isinstance(x, Fraction) else Fraction(x)
    return x


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {text!r}") from exc
    raise ValueError(f"not a rational number: {text!r}")


def div(a, b):
    """Division that keeps int / int exact."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def is_zero(x, tol=0) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol


class Polynomial:
    """Univariate polynomial in ``u`` with ascending coefficients.

    Instances are immutable.  Exact coefficients are stored as Fractions,
    float coefficients as ``mpc``; an all-int polynomial stays domain
    neutral.  Only exact zeros are stripped from the top; small float
    coefficients are kept (see :meth:`trim`).
    """

    __slots__ = ("coeffs", "domain")

    def __init__(self, coeffs: Iterable = ()):
        raw = list(coeffs)
        domain = domain_of_values(raw)
        cs = [_canon(c, domain) for c in raw]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple = tuple(cs)
        self.domain: str | None = domain

    # construction helpers
    @classmethod
    def u(cls) -> "Polynomial":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "Polynomial":
        return cls([0] * k + [c])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "Polynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    # basic properties
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0) if self.domain != FLOAT else mpmath.mpc(0)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Polynomial(0)"
        return f"Polynomial({list(self.coeffs)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in reversed(list(enumerate(self.coeffs))):
            if c == 0:
                continue
            mono = "" if k == 0 else ("u" if k == 1 else f"u^{k}")
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"({c})*{mono}")
            else:
                terms.append(f"({c})")
        return " + ".join(terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs) if self.domain != FLOAT else id(self)

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        join_domains(self.domain, other.domain)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] = out[k] + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            join_domains(self.domain, scalar_domain(other))
            return Polynomial([c * other for c in self.coeffs])
        join_domains(self.domain, other.domain)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Polynomial([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __call__(self, x):
        join_domains(self.domain, scalar_domain(x))
        if not self.coeffs:
            return mpmath.mpc(0) if scalar_domain(x) == FLOAT else Fraction(0)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self, k: int = 1) -> "Polynomial":
        cs = self.coeffs
        for _ in range(k):
            cs = [c * i for i, c in enumerate(cs)][1:]
        return Polynomial(cs)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        join_domains(self.domain, other.domain)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dl = other.lead
        dd = other.degree
        quo = [0] * max(len(rem) - dd, 0)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = div(rem[k], dl)
            quo[k - dd] = c
            if c == 0:
                continue
            for j, oc in enumerate(other.coeffs):
                rem[k - dd + j] = rem[k - dd + j] - c * oc
        rem = rem[:dd] if dd > 0 else []
        return Polynomial(quo), Polynomial(rem)

    def __floordiv__(self, other) -> "Polynomial":
        return self.divmod(self._coerce(other))[0]

    def __mod__(self, other) -> "Polynomial":
        return self.divmod(self._coerce(other))[1]

    def monic(self) -> "Polynomial":
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial has no monic form")
        lc = self.lead
        return Polynomial([div(c, lc) for c in self.coeffs])

    def to_float(self) -> "Polynomial":
        return Polynomial([to_float(c) for c in self.coeffs])

    def trim(self, tol) -> "Polynomial":
        """Drop leading coefficients with modulus <= tol * max modulus."""
        if self.domain != FLOAT or not self.coeffs:
            return self
        scale = max(abs(c) for c in self.coeffs)
        cs = list(self.coeffs)
        while cs and abs(cs[-1]) <= tol * scale:
            cs.pop()
        return Polynomial(cs)

    def taylor_shift(self, b) -> list:
        """Coefficients of ``self`` in powers of ``(u - b)``."""
        cs = list(self.coeffs)
        n = len(cs)
        # repeated synthetic division
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                cs[k] = cs[k] + b * cs[k + 1]
        return cs

    def norm(self):
        if not self.coeffs:
            return 0
        return max(abs(c) for c in self.coeffs)


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Monic gcd over the rationals (exact domain only)."""
    if FLOAT in (a.domain, b.domain):
        raise DomainError("polynomial gcd is only defined in the exact domain")
    while not b.is_zero():
        a, b = b, a % b
    if a.is_zero():
        return a
    return a.monic()


def square_free_decomposition(p: Polynomial) -> list[tuple[Polynomial, int]]:
    """Yun's algorithm: ``p = lc * prod(a_i ** i)`` over Q."""
    if p.domain == FLOAT:
        raise DomainError("square-free decomposition requires exact input")
    if p.degree < 1:
        return []
    out = []
    a = p.monic()
    b = a.derivative()
    c = poly_gcd(a, b)
    w = a // c
    y = b // c
    z = y - w.derivative()
    i = 1
    while w.degree > 0:
        g = poly_gcd(w, z) if not z.is_zero() else w
        if g.degree > 0:
            out.append((g, i))
        w = w // g
        y = z // g
        z = y - w.derivative()
        i += 1
    return out


class RationalFunction:
    """Quotient ``num / den`` with a monic denominator.

    Exact instances are reduced by the polynomial gcd; float instances are
    only normalised to a monic denominator.
    """

    __slots__ = ("num", "den", "domain")

    def __init__(self, num, den=None):
        num = num if isinstance(num, Polynomial) else Polynomial([num])
        if den is None:
            den = Polynomial([1])
        elif not isinstance(den, Polynomial):
            den = Polynomial([den])
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        domain = join_domains(num.domain, den.domain)
        if num.is_zero():
            den = Polynomial([1])
        elif domain != FLOAT and den.degree > 0:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num // g
                den = den // g
        lc = den.lead
        if lc != 1:
            num = Polynomial([div(c, lc) for c in num.coeffs])
            den = Polynomial([div(c, lc) for c in den.coeffs])
        self.num = num
        self.den = den
        self.domain = domain

    @classmethod
    def simple_pole(cls, t, weight=1) -> "RationalFunction":
        """``weight / (u - t)``."""
        return cls(Polynomial([weight]), Polynomial([-t, 1]))

    def __repr__(self) -> str:
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self) -> str:
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        return RationalFunction(Polynomial([other]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, (RationalFunction, Polynomial, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise ZeroDivisionError(f"rational function evaluated at a pole {x}")
        return div(self.num(x), d)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def to_float(self) -> "RationalFunction":
        return RationalFunction(self.num.to_float(), self.den.to_float())

    def degree_at_infinity(self) -> int:
        """``deg num - deg den``; the zero function gives ``-inf`` as a large negative."""
        if self.num.is_zero():
            return -(10 ** 9)
        return self.num.degree - self.den.degree

    def valuation_at(self, b, tol=0) -> tuple[int, object]:
        """Order of vanishing at ``u = b`` and the leading Laurent coefficient.

        A negative order is a pole.  In the float domain Taylor coefficients
        with modulus <= ``tol`` times the coefficient scale count as zero.
        """
        join_domains(self.domain, scalar_domain(b))
        if self.num.is_zero():
            return 10 ** 9, Fraction(0)
        vn, cn = _valuation(self.num, b, tol)
        vd, cd = _valuation(self.den, b, tol)
        return vn - vd, div(cn, cd)

    def leading_at_infinity(self, tol=0) -> tuple[int, object]:
        """(``deg num - deg den``, leading coefficient ratio) with float trimming."""
        num = self.num.trim(tol) if tol else self.num
        den = self.den.trim(tol) if tol else self.den
        if num.is_zero():
            return -(10 ** 9), Fraction(0)
        return num.degree - den.degree, div(num.lead, den.lead)


def _valuation(p: Polynomial, b, tol) -> tuple[int, object]:
    shifted = p.taylor_shift(b)
    scale = max(abs(c) for c in shifted) if shifted else 0
    for k, c in enumerate(shifted):
        if isinstance(c, Fraction):
            if c != 0:
                return k, c
        elif abs(c) > tol * scale:
            return k, c
    raise ValueError("valuation of the zero polynomial")


def wronskian(gs: Sequence[Polynomial]) -> Polynomial:
    """Determinant of the matrix with rows ``(g_i, g_i', ..., g_i^{(l-1)})``."""
    if not gs:
        raise ValueError("Wronskian of an empty list")
    gs = [g if isinstance(g, Polynomial) else Polynomial([g]) for g in gs]
    join_domains(*(g.domain for g in gs))
    l = len(gs)
    rows = [[g.derivative(k) for k in range(l)] for g in gs]
    return poly_det(rows)


def poly_det(rows: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Leibniz expansion of a small determinant with polynomial entries."""
    n = len(rows)
    total = Polynomial()
    for perm in itertools.permutations(range(n)):
        term = Polynomial([permutation_sign(perm)])
        for i, j in enumerate(perm):
            entry = rows[i][j]
            if entry.is_zero():
                term = Polynomial()
                break
            term = term * entry
        if not term.is_zero():
            total = total + term
    return total


def permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def cluster_tolerance(roots: Sequence, precision: int):
    scale = max([abs(r) for r in roots] + [1])
    return 1000 * mpmath.mpf(2) ** (-precision) * scale


def poly_roots(p: Polynomial, precision: int = DEFAULT_PRECISION) -> list:
    """All ``deg p`` complex roots with multiplicity, as ``mpc`` values.

    Exact input goes through a square-free decomposition first so that
    multiplicities are exact.  Float input is solved directly and roots
    closer than ``1000 * 2**-precision * max|root|`` are merged to their
    mean.  Roots are sorted by (real, imaginary) part.
    """
    if p.is_zero():
        raise ValueError("roots of the zero polynomial")
    with mpmath.workprec(precision):
        if p.domain == FLOAT:
            roots = _cluster(_simple_roots(p, precision), precision)
        else:
            roots = []
            for factor, mult in square_free_decomposition(p):
                for r in _simple_roots(factor.to_float(), precision):
                    roots.extend([r] * mult)
        return sorted((mpmath.mpc(r) for r in roots), key=lambda z: (z.real, z.imag))


def _simple_roots(p: Polynomial, precision: int) -> list:
    if p.degree < 1:
        return []
    cs = [to_float(c) for c in reversed(p.coeffs)]
    if p.degree == 1:
        return [-cs[1] / cs[0]]
    attempts = [(60, 20), (300, precision // 2), (2000, precision)]
    last_exc = None
    for maxsteps, extraprec in attempts:
        try:
            return list(mpmath.polyroots(cs, maxsteps=maxsteps, extraprec=extraprec, error=False))
        except mpmath.libmp.libhyper.NoConvergence as exc:
            last_exc = exc
    # random restart on stagnation: solve a shifted polynomial
    shift = mpmath.mpc("0.3183098861837907", "0.2718281828459045")
    shifted = Polynomial(p.taylor_shift(shift))
    try:
        rs = mpmath.polyroots(
            [to_float(c) for c in reversed(shifted.coeffs)], maxsteps=5000, extraprec=2 * precision
        )
    except mpmath.libmp.libhyper.NoConvergence:
        raise ArithmeticError("root finder did not converge") from last_exc
    return [r + shift for r in rs]


def _cluster(roots: list, precision: int) -> list:
    tol = cluster_tolerance(roots, precision)
    out = list(roots)
    used = [False] * len(out)
    for i in range(len(out)):
        if used[i]:
            continue
        group = [i]
        for j in range(i + 1, len(out)):
            if not used[j] and abs(out[j] - out[i]) <= tol:
                group.append(j)
        if len(group) > 1:
            mean = sum(out[g] for g in group) / len(group)
            for g in group:
                out[g] = mean
                used[g] = True
    return out


def rebuild_error(p: Polynomial, roots: Sequence) -> float:
    """Relative coefficient error between monic ``p`` and ``prod(u - r)``."""
    target = p.to_float().monic() if p.domain != FLOAT else p.monic()
    rebuilt = Polynomial.from_roots(roots)
    diff = target - rebuilt
    scale = max([abs(c) for c in target.coeffs] + [1])
    return float(diff.norm() / scale) if not diff.is_zero() else 0.0


def falling_factorial(r, k: int):
    out = 1
    for i in range(k):
        out = out * (r - i)
    return out


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)


# relative threshold for float-domain zero tests (singular points, ranks)
DEFAULT_TOL = 1e-9


def as_rational_function(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    return RationalFunction(Polynomial([x]))


def interpolate(xs: Sequence, ys: Sequence) -> Polynomial:
    """Newton interpolation through ``(xs[k], ys[k])``."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = div(coef[i] - coef[i - 1], xs[i] - xs[i - j])
    p = Polynomial([coef[-1]])
    for k in range(n - 2, -1, -1):
        p = p * Polynomial([-xs[k], 1]) + coef[k]
    return p
