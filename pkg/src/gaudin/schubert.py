"""Points of the Schubert cell, their root coordinates and curve germs.

A point X is stored by its flag basis ``f_i = u^{d_i} + sum_j f_ij u^{d_i - j}``
where ``d_i = lambda_i + N - i`` and the sum skips degrees in
``P = {d_1, ..., d_N}``.  The polynomials ``y_a`` are the monic
normalizations of ``Wr(f_{a+1}, ..., f_N)``; their roots are the root
coordinates ``t^{(a)}``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment

from .diffop import ScalarDiffOp, from_factors, polynomial_kernel
from .linalg import rref
from .numeric import (
    DEFAULT_TOL,
    FLOAT,
    PIPELINE_PRECISION,
    Polynomial,
    RationalFunction,
    domain_of_values,
    poly_det,
    poly_gcd,
    poly_roots,
    to_float,
    wronskian,
)
from .repn import Partition

log = logging.getLogger(__name__)


class NotInCell(ValueError):
    """The data do not describe a point of the cell."""


class DegenerateFlag(ArithmeticError):
    """A Wronskian has the wrong degree (float corruption)."""


class NonGeneric(ValueError):
    """Coincident root coordinates."""


class DegenerationMismatch(ValueError):
    """Roots at the end of the curve do not cluster at the prescribed points."""


def _exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def free_keys(lam: Partition) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` of the free flag coefficients, in order."""
    P = set(lam.degrees())
    keys = []
    for i, d in enumerate(lam.degrees(), start=1):
        keys.extend((i, j) for j in range(1, d + 1) if d - j not in P)
    return keys


@dataclass(frozen=True)
class SchubertPoint:
    lam: Partition
    coeffs: dict = field(default_factory=dict)
    d: int | None = None

    def __post_init__(self):
        lam = self.lam if isinstance(self.lam, Partition) else Partition(self.lam)
        object.__setattr__(self, "lam", lam)
        d = self.d if self.d is not None else lam[0] + lam.N
        if lam[0] > d - lam.N:
            raise NotInCell(f"lambda_1 = {lam[0]} exceeds d - N = {d - lam.N}")
        object.__setattr__(self, "d", d)
        # drop stored zeros so equality depends only on the subspace
        object.__setattr__(self, "coeffs", {k: v for k, v in self.coeffs.items() if v != 0 or not _exact(v)})
        allowed = set(free_keys(lam))
        bad = [k for k in self.coeffs if k not in allowed]
        if bad:
            raise NotInCell(f"flag coefficients {bad} are not free for lambda = {tuple(lam)}")
        domain_of_values(self.coeffs.values())

    @property
    def N(self) -> int:
        return self.lam.N

    @property
    def domain(self):
        return domain_of_values(self.coeffs.values())

    def keys(self) -> list[tuple[int, int]]:
        return free_keys(self.lam)

    def coefficient(self, i: int, j: int):
        return self.coeffs.get((i, j), 0)

    def flag_basis(self) -> list[Polynomial]:
        out = []
        for i, d in enumerate(self.lam.degrees(), start=1):
            cs = [0] * (d + 1)
            cs[d] = 1
            for (a, j), c in self.coeffs.items():
                if a == i:
                    cs[d - j] = c
            out.append(Polynomial(cs))
        return out

    def to_float(self) -> "SchubertPoint":
        return SchubertPoint(self.lam, {k: to_float(v) for k, v in self.coeffs.items()}, self.d)

    @classmethod
    def from_basis(cls, polys: Sequence[Polynomial], lam: Sequence[int], tol=None) -> "SchubertPoint":
        """Echelonize a basis of ``X`` into the flag basis."""
        lam = Partition(lam, len(polys))
        top = max(p.degree for p in polys)
        rows = [[p.coeff(k) for k in range(top + 1)] for p in polys]
        ech, piv = rref(rows, tol, columns=range(top, -1, -1))
        if len(ech) != lam.N:
            raise NotInCell("the polynomials are linearly dependent")
        if tuple(piv) != lam.degrees():
            raise NotInCell(f"degree set {tuple(piv)} != {lam.degrees()}: not in the cell of {tuple(lam)}")
        coeffs = {}
        for i, (row, d) in enumerate(zip(ech, piv), start=1):
            if any(row[k] != 0 for k in range(d + 1, top + 1)):
                raise NotInCell("echelon form has terms above the leading degree")
            for j in range(1, d + 1):
                if d - j not in piv and row[d - j] != 0:
                    coeffs[(i, j)] = row[d - j]
        return cls(lam, coeffs)

    @classmethod
    def random(cls, lam: Sequence[int], rng: np.random.Generator, bound: int = 5) -> "SchubertPoint":
        lam = Partition(lam)
        coeffs = {}
        for k in free_keys(lam):
            coeffs[k] = Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 4)))
        return cls(lam, coeffs)

    def to_dict(self) -> dict:
        from .serialize import encode_scalar

        return {
            "N": self.N,
            "lambda": list(self.lam),
            "d": self.d,
            "flag_coeffs": {f"{i},{j}": encode_scalar(c) for (i, j), c in sorted(self.coeffs.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SchubertPoint":
        from .serialize import decode_scalar

        lam = Partition(data["lambda"], data["N"])
        coeffs = {}
        for key, val in data.get("flag_coeffs", {}).items():
            i, j = (int(x) for x in key.split(","))
            coeffs[(i, j)] = decode_scalar(val)
        return cls(lam, coeffs, data.get("d"))


def y_polynomials(X: SchubertPoint) -> list[Polynomial]:
    """``y_0, ..., y_{N-1}``: monic Wronskians of the tails of the flag basis."""
    f = X.flag_basis()
    l = X.lam.level_sizes()
    out = []
    for a in range(X.N):
        W = wronskian(f[a:])
        if W.degree != l[a]:
            raise DegenerateFlag(f"deg Wr(f_{a + 1}..f_N) = {W.degree}, expected {l[a]}")
        out.append(W.monic())
    return out


@dataclass(frozen=True)
class RootCoordinates:
    """Root coordinates ``t^{(a)}_j``, ``a = 0..N-1``."""

    levels: tuple

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(tuple(x) for x in self.levels))

    @property
    def N(self) -> int:
        return len(self.levels)

    @property
    def l(self) -> tuple[int, ...]:
        return tuple(len(x) for x in self.levels)

    def level(self, a: int) -> tuple:
        return self.levels[a] if 0 <= a < self.N else ()

    @property
    def domain(self):
        return domain_of_values(x for lv in self.levels for x in lv)

    def to_dict(self) -> list[list[str]]:
        from .serialize import encode_scalar

        return [[encode_scalar(x) for x in lv] for lv in self.levels]


def root_coordinates(X: SchubertPoint, precision: int = PIPELINE_PRECISION) -> RootCoordinates:
    levels = []
    with mpmath.workprec(precision):
        for y in y_polynomials(X):
            levels.append(poly_roots(y, precision) if y.degree > 0 else [])
    return RootCoordinates(levels)


def _separation_tol(precision: int):
    return mpmath.mpf(2) ** (-(precision // 2))


def is_generic(X: SchubertPoint, precision: int = PIPELINE_PRECISION, tol=None) -> bool:
    """Simple roots of every ``y_a`` and no common roots of ``y_{a-1}, y_a``."""
    ys = y_polynomials(X)
    if X.domain != FLOAT:
        for a, y in enumerate(ys):
            if y.degree > 0 and poly_gcd(y, y.derivative()).degree > 0:
                return False
            if a > 0 and poly_gcd(ys[a - 1], y).degree > 0:
                return False
        return True
    with mpmath.workprec(precision):
        t = root_coordinates(X, precision)
        allroots = [x for lv in t.levels for x in lv]
        scale = max([abs(x) for x in allroots] + [mpmath.mpf(1)])
        cut = (tol if tol is not None else _separation_tol(precision)) * scale
        for a in range(X.N):
            lv = t.level(a)
            for i in range(len(lv)):
                for j in range(i + 1, len(lv)):
                    if abs(lv[i] - lv[j]) <= cut:
                        return False
            if a > 0:
                for x in lv:
                    for y in t.level(a - 1):
                        if abs(x - y) <= cut:
                            return False
    return True


def bae_residual(t: RootCoordinates):
    """Largest absolute left-hand side of the Bethe ansatz equations."""
    worst = 0
    for a in range(1, t.N):
        for j, x in enumerate(t.level(a)):
            total = 0
            try:
                for y in t.level(a - 1):
                    total = total + _inv(x - y)
                for k, y in enumerate(t.level(a)):
                    if k != j:
                        total = total - 2 * _inv(x - y)
                for y in t.level(a + 1):
                    total = total + _inv(x - y)
            except ZeroDivisionError as exc:
                raise NonGeneric("non-generic input: coincident coordinates") from exc
            worst = max(worst, abs(total))
    return worst


def _inv(x):
    if x == 0:
        raise ZeroDivisionError
    return Fraction(1) / x if isinstance(x, (int, Fraction)) else 1 / x


def chi_functions(t: RootCoordinates) -> list[RationalFunction]:
    """``chi^a = sum_j 1/(u - t^{(a-1)}_j) - sum_j 1/(u - t^{(a)}_j)``, ``a = 1..N``."""
    out = []
    for a in range(1, t.N + 1):
        chi = RationalFunction(Polynomial([]))
        for x in t.level(a - 1):
            chi = chi + RationalFunction.simple_pole(x)
        for x in t.level(a):
            chi = chi - RationalFunction.simple_pole(x)
        out.append(chi)
    return out


def chi_operator(t: RootCoordinates) -> ScalarDiffOp:
    """``(d - chi^1) ... (d - chi^N)``."""
    return from_factors(chi_functions(t))


def operator_from_kernel(X: SchubertPoint) -> ScalarDiffOp:
    """The monic operator with kernel X, from ``Wr(f_1..f_N, f) / Wr(f_1..f_N)``."""
    f = X.flag_basis()
    N = X.N
    derivs = [[p.derivative(r) for r in range(N + 1)] for p in f]
    minors = []
    for k in range(N + 1):
        rows = [[derivs[i][r] for i in range(N)] for r in range(N + 1) if r != k]
        minors.append(poly_det(rows))
    W = minors[N]
    # coefficient of d^k is (-1)^(N+k) M_k / W
    coeffs = [RationalFunction(minors[k] * (-1) ** (N + k), W) for k in range(N, -1, -1)]
    return ScalarDiffOp(coeffs)


def kernel_to_point(D: ScalarDiffOp, lam: Sequence[int], tol=DEFAULT_TOL) -> SchubertPoint:
    """The cell point spanned by the polynomial kernel of ``D``."""
    lam = Partition(lam, D.order)
    degs = lam.degrees()
    kernel = polynomial_kernel(D, degs[0], tol)
    if len(kernel) != D.order:
        raise NotInCell(f"not in the cell: kernel dimension {len(kernel)} != {D.order}")
    found = tuple(p.degree for p in kernel)
    if found != degs:
        raise NotInCell(f"not in the cell: kernel degrees {found} != {degs}")
    P = set(degs)
    coeffs = {}
    for i, (p, d) in enumerate(zip(kernel, degs), start=1):
        for j in range(1, d + 1):
            if d - j not in P:
                c = p.coeff(d - j)
                if c != 0:
                    coeffs[(i, j)] = c
    return SchubertPoint(lam, coeffs)


# --- curve germs ------------------------------------------------------------


def default_schedule(eps0=Fraction(1, 100), ratio=Fraction(1, 2), steps: int = 25) -> list[Fraction]:
    return [Fraction(eps0) * Fraction(ratio) ** m for m in range(steps)]


@dataclass
class CurveGerm:
    base: SchubertPoint
    direction: dict
    seed: int | None
    attempts: int = 1

    def at(self, eps) -> SchubertPoint:
        base = self.base.to_float() if self.base.domain != FLOAT else self.base
        e = to_float(eps)
        coeffs = {k: base.coeffs.get(k, mpmath.mpc(0)) + e * g for k, g in self.direction.items()}
        return SchubertPoint(base.lam, coeffs, base.d)

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "direction": {f"{i},{j}": int(g) for (i, j), g in sorted(self.direction.items())},
            "seed": self.seed,
            "attempts": self.attempts,
            "genericity": "checked at the sampled eps values only",
        }


def _track(prev: tuple, cur: list) -> list:
    if len(prev) < 2:
        return list(cur)
    cost = np.array([[float(abs(p - c)) for c in cur] for p in prev])
    _, cols = linear_sum_assignment(cost)
    return [cur[c] for c in cols]


def group_radius(b: Sequence) -> float:
    if len(b) < 2:
        return math.inf
    return min(abs(complex(to_float(x)) - complex(to_float(y))) for i, x in enumerate(b) for y in b[i + 1:]) / 2


def sample_curve(X0: SchubertPoint, b: Sequence, ns: Sequence[int], seed: int | None = 0,
                 schedule: Sequence | None = None, precision: int = PIPELINE_PRECISION,
                 max_retries: int = 10) -> tuple[CurveGerm, list[tuple]]:
    """Sample ``X(eps) = X0 + eps * g`` and return tracked, grouped root coordinates.

    ``t^{(0)}`` is ordered so that the first ``n_1`` roots tend to ``b_1``,
    the next ``n_2`` to ``b_2`` and so on; within a group roots are ordered
    by distance to ``b_s`` and then by angle, at the smallest ``eps``.
    """
    schedule = list(schedule) if schedule is not None else default_schedule()
    if sum(ns) != X0.lam.size:
        raise DegenerationMismatch(f"sum of n_s = {sum(ns)} != |lambda| = {X0.lam.size}")
    rng = np.random.default_rng(seed)
    keys = X0.keys()
    if not keys:
        raise NotInCell("the cell is a single point; there is no curve to sample")
    with mpmath.workprec(precision):
        for attempt in range(1, max_retries + 2):
            g = rng.integers(-10, 11, size=len(keys))
            while not g.any():
                g = rng.integers(-10, 11, size=len(keys))
            germ = CurveGerm(X0, {k: int(x) for k, x in zip(keys, g)}, seed, attempt)
            samples = []
            for eps in schedule:
                X = germ.at(eps)
                if not is_generic(X, precision):
                    log.info("curve direction %d not generic at eps=%s, resampling", attempt, eps)
                    break
                samples.append((eps, root_coordinates(X, precision)))
            else:
                break
        else:
            raise NonGeneric(f"no generic curve direction after {max_retries} retries")
        tracked = [samples[0][1].levels]
        for _, t in samples[1:]:
            tracked.append(tuple(_track(p, list(c)) for p, c in zip(tracked[-1], t.levels)))
        order = _group_order(tracked[-1][0], b, ns)
        out = []
        for (eps, _), lv in zip(samples, tracked):
            out.append((eps, RootCoordinates((tuple(lv[0][k] for k in order),) + tuple(lv[1:]))))
    return germ, out


def _group_order(roots: Sequence, b: Sequence, ns: Sequence[int]) -> list[int]:
    radius = group_radius(b)
    bf = [to_float(x) for x in b]
    groups: list[list[int]] = [[] for _ in b]
    for k, r in enumerate(roots):
        dists = [abs(r - x) for x in bf]
        s = min(range(len(bf)), key=lambda i: dists[i])
        if dists[s] >= radius:
            raise DegenerationMismatch(f"degeneration mismatch: root {mpmath.nstr(r, 8)} is not near any b_s")
        groups[s].append(k)
    for s, (grp, n_s) in enumerate(zip(groups, ns)):
        if len(grp) != n_s:
            raise DegenerationMismatch(
                f"degeneration mismatch: {len(grp)} roots tend to b_{s + 1}, expected {n_s}"
            )
        grp.sort(key=lambda k: (abs(roots[k] - bf[s]), mpmath.arg(roots[k] - bf[s])))
    return [k for grp in groups for k in grp]


__all__ = [
    "CurveGerm",
    "DegenerateFlag",
    "DegenerationMismatch",
    "NonGeneric",
    "NotInCell",
    "RootCoordinates",
    "SchubertPoint",
    "bae_residual",
    "chi_functions",
    "chi_operator",
    "default_schedule",
    "free_keys",
    "is_generic",
    "kernel_to_point",
    "operator_from_kernel",
    "root_coordinates",
    "sample_curve",
    "y_polynomials",
]
