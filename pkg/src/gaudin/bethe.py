"""The universal operator ``rdet(d delta_ij - e_ji(u))`` on a tensor product.

Coefficients ``B_i(u)`` are never expanded symbolically.  To apply them at a
point ``u0`` we push Taylor jets of ``e(u)`` at ``u0`` through the row
determinant, expanded along the first row with memoization over the set of
columns still unused.  A jet of order N is enough: the constant term of the
``d^{N-i}`` coefficient of the result is ``B_i(u0)`` applied to the input.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath
import numpy as np

from .diffop import MatrixDiffOp, ScalarDiffOp
from .numeric import (
    FLOAT,
    DEFAULT_TOL,
    Polynomial,
    RationalFunction,
    div,
    interpolate,
    to_float,
)
from .repn import ModuleSpace, Subspace, WeightVector, singular_basis, vector_norm

log = logging.getLogger(__name__)

MAX_RANK = 4


class NotInvariant(ValueError):
    """The declared subspace is not preserved by the Bethe algebra."""


def _jet_derivative(jet: list) -> list:
    # None marks a zero coefficient
    out = [None if jet[k] is None else jet[k] * k for k in range(1, len(jet))]
    return out + [None]


def _jet_add(a: list, b: list) -> list:
    return [y if x is None else x if y is None else x + y for x, y in zip(a, b)]


def apply_universal(space: ModuleSpace, u0, arr: np.ndarray) -> list[np.ndarray]:
    """``[B_0(u0) arr, B_1(u0) arr, ..., B_N(u0) arr]`` with ``B_0 = 1``.

    ``arr`` is a vector or a block of column vectors (axis 0 runs over the
    basis of ``space``).
    """
    N, K = space.N, space.N + 1
    if N > MAX_RANK:
        raise ValueError(f"rank {N} exceeds the supported cap {MAX_RANK}")
    zero = arr * 0
    # alpha[s][p]: coefficient of (u - u0)^p in 1/(u - z_s)
    alpha = []
    for z in space.z:
        d = u0 - z
        if d == 0:
            raise ZeroDivisionError(f"evaluation point {u0} coincides with z = {z}")
        inv = div(1, d)
        row, cur = [], inv
        for p in range(K):
            row.append(cur if p % 2 == 0 else -cur)
            cur = cur * inv
        alpha.append(row)

    def entry(r: int, c: int, sym: dict, length: int) -> dict:
        # (d delta_rc - e_cr(u)) applied to the symbol sum_m jet_m d^m;
        # only the first ``length`` jet orders are still needed afterwards
        out: dict[int, list] = {}

        def acc(m, jet):
            out[m] = _jet_add(out[m], jet) if m in out else jet

        for m, jet in sym.items():
            if r == c:
                acc(m, _jet_derivative(jet)[:length])
                acc(m + 1, list(jet[:length]))
            if space.n == 0:
                continue
            prod: list = [None] * length
            for s in range(space.n):
                ys = [None if x is None else space.apply_slot(s, c, r, x) for x in jet[:length]]
                a = alpha[s]
                for k in range(length):
                    for p in range(k + 1):
                        y = ys[k - p]
                        if y is None:
                            continue
                        term = y * a[p]
                        prod[k] = term if prod[k] is None else prod[k] + term
            acc(m, [None if x is None else -x for x in prod])
        return out

    memo: dict[tuple, dict] = {(): {0: [arr] + [None] * (K - 1)}}

    def rdet(cols: tuple) -> dict:
        if cols in memo:
            return memo[cols]
        row = N - len(cols) + 1
        length = N - len(cols) + 1
        total: dict[int, list] = {}
        for idx, c in enumerate(cols):
            rest = cols[:idx] + cols[idx + 1:]
            term = entry(row, c, rdet(rest), length)
            for m, jet in term.items():
                if idx % 2:
                    jet = [None if x is None else -x for x in jet]
                total[m] = _jet_add(total[m], jet) if m in total else jet
        memo[cols] = total
        return total

    sym = rdet(tuple(range(1, N + 1)))
    out = []
    for i in range(N + 1):
        jet = sym.get(N - i)
        out.append(zero if jet is None or jet[0] is None else jet[0])
    return out


def _as_subspace(space: ModuleSpace, subspace) -> Subspace:
    if subspace is None:
        eye = [space.unit(J) for J in space.basis]
        return Subspace(space, eye)
    if isinstance(subspace, Subspace):
        return subspace
    vecs = [v.coeffs if isinstance(v, WeightVector) else np.asarray(v, dtype=object) for v in subspace]
    return Subspace(space, vecs)


def weight_subspace(space: ModuleSpace, mu: Sequence[int]) -> Subspace:
    return Subspace(space, [space.unit(space.basis[k]) for k in space.weight_indices(mu)])


def singular_subspace(space: ModuleSpace, lam: Sequence[int]) -> Subspace:
    return Subspace(space, [b.coeffs for b in singular_basis(space, lam)])


class UniversalOperator:
    """``D^B`` restricted to an invariant subspace.

    Coefficient matrices act on coordinates with respect to the subspace's
    echelon basis.  The rational-function matrices are assembled lazily.
    """

    def __init__(self, space: ModuleSpace, subspace: Subspace, check: bool = True):
        self.space = space
        self.subspace = subspace
        self.N = space.N
        if check and subspace.dim:
            self._check_invariance()

    @property
    def domain(self):
        return FLOAT if self.space.domain == FLOAT or self.subspace.domain == FLOAT else None

    @cached_property
    def distinct_z(self) -> list:
        out = []
        for z in self.space.z:
            if z not in out:
                out.append(z)
        return out

    def _block(self) -> np.ndarray:
        return np.array([list(b) for b in self.subspace.basis], dtype=object).T

    def apply(self, u0, arr: np.ndarray) -> list[np.ndarray]:
        return apply_universal(self.space, u0, arr)

    def matrices_at(self, u0) -> list[np.ndarray]:
        """Restricted ``B_1(u0), ..., B_N(u0)`` as ``d x d`` arrays."""
        imgs = self.apply(u0, self._block())
        piv = self.subspace.pivots
        return [img[piv, :] for img in imgs[1:]]

    def _check_invariance(self) -> None:
        u0 = self._probe_point()
        imgs = self.apply(u0, self._block())
        is_float = self.domain == FLOAT
        for i, img in enumerate(imgs[1:], start=1):
            for col in range(img.shape[1]):
                v = img[:, col]
                leak = self.subspace.leakage(v)
                scale = max(vector_norm(v), 1)
                if (leak > DEFAULT_TOL * scale) if is_float else leak != 0:
                    raise NotInvariant(f"B_{i} leaks out of the subspace (residual {mpmath.nstr(leak, 5)})")

    def _probe_point(self):
        x = Fraction(7, 3)
        while any(x == z for z in self.space.z):
            x += 1
        if self.domain == FLOAT:
            return to_float(x) + mpmath.mpc(0, mpmath.mpf(1) / 5)
        return x

    def to_float(self) -> "UniversalOperator":
        if self.domain == FLOAT:
            return self
        out = UniversalOperator.__new__(UniversalOperator)
        out.space = self.space.to_float()
        out.subspace = self.subspace.to_float()
        out.N = self.N
        return out

    def sample_points(self, count: int) -> list:
        """Points away from the ``z``: half-integers (exact) or a circle (float)."""
        if self.domain == FLOAT:
            R = 2 * (1 + max((abs(z) for z in self.space.z), default=0))
            return [R * mpmath.expjpi(mpmath.mpf(2 * k + 1) / count) for k in range(count)]
        out, x = [], Fraction(1, 2)
        while len(out) < count:
            if all(x != z for z in self.space.z):
                out.append(x)
            x += 1
        return out

    @cached_property
    def denominator(self) -> Polynomial:
        return Polynomial.from_roots(self.distinct_z)

    @cached_property
    def matrix_op(self) -> MatrixDiffOp:
        """``D^B`` with RationalFunction matrix entries (exact interpolation)."""
        if self.domain == FLOAT:
            raise TypeError("assemble the matrix operator in the exact domain")
        k, d = len(self.distinct_z), self.subspace.dim
        Q = self.denominator
        coeffs = [[[RationalFunction(Polynomial([int(a == b)])) for b in range(d)] for a in range(d)]]
        npts = (k - 1) * self.N + 1 if k else 1
        pts = self.sample_points(max(npts, 1))
        mats = [self.matrices_at(x) for x in pts]
        for i in range(1, self.N + 1):
            m = (k - 1) * i + 1 if k else 1
            xs = pts[:m]
            qi = [Q(x) ** i for x in xs]
            rows = []
            for a in range(d):
                row = []
                for b in range(d):
                    ys = [mats[p][i - 1][a, b] * qi[p] for p in range(m)]
                    row.append(RationalFunction(interpolate(xs, ys), Q ** i))
                rows.append(row)
            coeffs.append(rows)
        return MatrixDiffOp(coeffs)


def universal_operator(space: ModuleSpace, subspace=None, check: bool = True) -> UniversalOperator:
    """``D^B`` on ``space`` restricted to ``subspace`` (default: everything)."""
    return UniversalOperator(space, _as_subspace(space, subspace), check)


# --- eigenvectors -----------------------------------------------------------


@dataclass
class EigenReport:
    vector: WeightVector
    h: list[RationalFunction]
    residual: mpmath.mpf
    tolerance: float
    operator: ScalarDiffOp = field(init=False)

    def __post_init__(self):
        self.operator = ScalarDiffOp([RationalFunction(Polynomial([1]))] + list(self.h))

    @property
    def is_eigenvector(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        from .serialize import encode_ratfun

        return {
            "vector": self.vector.to_dict(),
            "h": [encode_ratfun(r) for r in self.h],
            "residual": mpmath.nstr(self.residual, 6) if self.residual else "0",
            "is_eigenvector": self.is_eigenvector,
        }


def _fit_numerator(xs: list, ys: list, degree: int, is_float: bool) -> Polynomial:
    if not is_float:
        return interpolate(xs[: degree + 1], ys[: degree + 1])
    R = max(abs(x) for x in xs)
    A = mpmath.matrix([[(x / R) ** c for c in range(degree + 1)] for x in xs])
    sol, _ = mpmath.qr_solve(A, mpmath.matrix(ys))
    return Polynomial([sol[c] / R ** c for c in range(degree + 1)])


def eigen_check(U: UniversalOperator, v: WeightVector, tolerance=1e-8) -> EigenReport:
    """Fit ``h_i(u)`` from ``B_i(u) v = h_i(u) v`` and report the residual."""
    arr = v.coeffs
    if v.domain == FLOAT and U.domain != FLOAT:
        U = U.to_float()
    is_float = U.domain == FLOAT
    if is_float:
        arr = np.array([to_float(x) if not isinstance(x, mpmath.mpc) else x for x in arr], dtype=object)
    vnorm = vector_norm(arr)
    if vnorm == 0:
        raise ValueError("eigen_check needs a nonzero vector")
    J = max(range(len(arr)), key=lambda k: abs(arr[k]))
    k = len(U.distinct_z)
    N = U.N
    if is_float:
        npts = 3 * (k * N + 1)
    else:
        npts = max((k - 1) * N + 1, 1) + 3
    pts = U.sample_points(npts)
    images = [U.apply(x, arr) for x in pts]
    Q = U.denominator
    h = []
    for i in range(1, N + 1):
        deg = max((k - 1) * i, 0)
        ys = [div(img[i][J], arr[J]) * Q(x) ** i for x, img in zip(pts, images)]
        num = _fit_numerator(pts, ys, deg, is_float)
        h.append(RationalFunction(num, Q ** i))
    residual = mpmath.mpf(0)
    for x, img in zip(pts, images):
        for i in range(1, N + 1):
            diff = img[i] - arr * h[i - 1](x)
            r = vector_norm(diff) / vnorm
            residual = max(residual, r)
    vec = WeightVector(U.space if not is_float else U.space, arr)
    return EigenReport(vec, h, residual, tolerance)


# --- spectrum ---------------------------------------------------------------


@dataclass
class SpectrumResult:
    reports: list[EigenReport]
    degenerate: list[int]
    dimension: int

    def __iter__(self):
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)


def _clusters(values: list, tol) -> list[list[int]]:
    groups: list[list[int]] = []
    for k, x in enumerate(values):
        for g in groups:
            if abs(values[g[0]] - x) <= tol:
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def _normalize_phase(vec: np.ndarray) -> np.ndarray:
    J = max(range(len(vec)), key=lambda k: abs(vec[k]))
    ph = vec[J] / abs(vec[J])
    nrm = vector_norm(vec)
    return np.array([x / (ph * nrm) for x in vec], dtype=object)


def spectrum(U: UniversalOperator, tolerance=1e-8, seed: int | None = 0, precision: int = 256,
             cluster_tol=1e-8, attempts: int = 3) -> SpectrumResult:
    """Joint eigenvectors of the restricted Bethe algebra."""
    d = U.subspace.dim
    if d == 0:
        return SpectrumResult([], [], 0)
    if d == 1:
        v = WeightVector(U.space, U.subspace.basis[0])
        with mpmath.workprec(precision):
            return SpectrumResult([eigen_check(U, v, tolerance)], [], 1)
    rng = np.random.default_rng(seed)
    k = len(U.distinct_z)
    npts = max((k - 1) * U.N + 1, 1)
    with mpmath.workprec(precision):
        for attempt in range(attempts):
            pts = _random_points(rng, npts * (attempt + 1), U.space.z)
            M = np.zeros((d, d), dtype=object)
            M[:] = Fraction(0)
            for x in pts:
                for B in U.matrices_at(x):
                    c = Fraction(int(rng.integers(-9, 10)) or 1, int(rng.integers(1, 5)))
                    M = M + c * B
            A = mpmath.matrix([[to_float(M[a, b]) for b in range(d)] for a in range(d)])
            evals, evecs = mpmath.eig(A)
            scale = max([abs(e) for e in evals] + [mpmath.mpf(1)])
            groups = _clusters(list(evals), cluster_tol * scale)
            if all(len(g) == 1 for g in groups):
                break
            log.info("spectrum: degenerate clusters %s, retrying", [len(g) for g in groups])
        sub = U.subspace.to_float()
        Uf = U.to_float()
        reports, degenerate = [], []
        for g in groups:
            if len(g) > 1:
                degenerate.append(len(g))
                continue
            coords = [evecs[a, g[0]] for a in range(d)]
            full = _normalize_phase(sub.combine(coords))
            reports.append(eigen_check(Uf, WeightVector(Uf.space, full), tolerance))
        reports.sort(key=lambda r: _sort_key(r.vector.coeffs))
    return SpectrumResult(reports, degenerate, d)


def _sort_key(vec) -> tuple:
    return tuple((float(mpmath.re(x)), float(mpmath.im(x))) for x in vec)


def _random_points(rng, count: int, avoid) -> list:
    out = []
    while len(out) < count:
        x = Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 8)))
        if x not in out and all(x != z for z in avoid):
            out.append(x)
    return out


def commutativity_check(space: ModuleSpace, subspace=None, samples: Sequence | None = None,
                        tolerance=0) -> mpmath.mpf:
    """Max norm of ``[B_i(u1), B_j(u2)]`` and ``[B_i(u), e_kl]`` over the samples.

    Without a subspace the check runs on the whole space: the ``B`` matrices
    must be block diagonal across weights (off-block entries count towards
    the residual), commutators among them are taken blockwise, and
    commutators with ``e_kl`` use its sparse action.
    """
    U = universal_operator(space, subspace, check=False)
    if samples is None:
        samples = U.sample_points(2)
    block = U._block()
    piv = U.subspace.pivots
    mats = [[img[piv, :] for img in U.apply(x, block)[1:]] for x in samples]
    flat = [B for row in mats for B in row]
    worst = mpmath.mpf(0)

    def nrm(M):
        return max((abs(to_float(x)) for x in M.flat), default=mpmath.mpf(0))

    if subspace is None:
        blocks: dict[tuple, list[int]] = {}
        for k, J in enumerate(space.basis):
            blocks.setdefault(space.weight_of(J), []).append(k)
        pieces = []
        for B in flat:
            off = B.copy()
            cut = []
            for idx in blocks.values():
                sub = np.ix_(idx, idx)
                cut.append(B[sub])
                off[sub] = off[sub] * 0
            worst = max(worst, nrm(off))
            pieces.append(cut)
    else:
        pieces = [[B] for B in flat]
    for a in range(len(pieces)):
        for b in range(a + 1, len(pieces)):
            for X, Y in zip(pieces[a], pieces[b]):
                worst = max(worst, nrm(X.dot(Y) - Y.dot(X)))
    if subspace is None:
        for i in range(1, space.N + 1):
            for j in range(1, space.N + 1):
                for B in flat:
                    EB = space.apply_e(i, j, B)
                    BE = B * 0
                    for s in range(space.n):
                        src, dst = space._slot_map(s, i, j)
                        BE[:, src] = BE[:, src] + B[:, dst]
                    worst = max(worst, nrm(EB - BE))
    return worst


__all__ = [
    "EigenReport",
    "NotInvariant",
    "SpectrumResult",
    "UniversalOperator",
    "apply_universal",
    "commutativity_check",
    "eigen_check",
    "singular_subspace",
    "spectrum",
    "universal_operator",
    "weight_subspace",
]
