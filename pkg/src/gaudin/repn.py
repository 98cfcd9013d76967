"""Tensor powers of the vector representation of gl_N with evaluation points.

Basis vectors of ``V^{(x)n}`` are index tuples ``J = (j_1, ..., j_n)`` with
``1 <= j_s <= N``; ``J`` stands for ``e_{j_1,1} v_+ (x) ... (x) e_{j_n,1} v_+``.
Tuples are ordered lexicographically, which coincides with the Kronecker
ordering (slot 1 most significant), so a coefficient array reshapes to a
tensor of shape ``(N,) * n``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .linalg import nullspace, rref, solve
from .numeric import EXACT, FLOAT, domain_of_values, to_float

log = logging.getLogger(__name__)


class Partition(tuple):
    """Weakly decreasing nonnegative integers, padded with zeros to length N."""

    def __new__(cls, parts: Sequence[int], N: int | None = None):
        parts = [int(p) for p in parts]
        if N is None:
            N = len(parts)
        while len(parts) > N and parts[-1] == 0:
            parts.pop()
        if len(parts) > N:
            raise ValueError(f"partition {parts} has more than {N} parts")
        parts = parts + [0] * (N - len(parts))
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts of {parts} are not weakly decreasing")
        return super().__new__(cls, parts)

    @property
    def N(self) -> int:
        return len(self)

    @property
    def size(self) -> int:
        return sum(self)

    def degrees(self) -> tuple[int, ...]:
        """``d_i = lambda_i + N - i``."""
        N = len(self)
        return tuple(p + N - i for i, p in enumerate(self, start=1))

    def level_sizes(self) -> tuple[int, ...]:
        """``l_a = sum_{b > a} lambda_b`` for ``a = 0..N``."""
        return tuple(sum(self[a:]) for a in range(len(self) + 1))


def weyl_dimension(lam: Sequence[int]) -> int:
    N = len(lam)
    num, den = 1, 1
    for i in range(N):
        for j in range(i + 1, N):
            num *= lam[i] - lam[j] + j - i
            den *= j - i
    return num // den


def standard_tableaux_count(lam: Sequence[int]) -> int:
    """Hook length formula."""
    parts = [p for p in lam if p > 0]
    n = sum(parts)
    if n == 0:
        return 1
    conj = [sum(1 for p in parts if p > c) for c in range(parts[0])]
    hooks = 1
    for r, p in enumerate(parts):
        for c in range(p):
            hooks *= (p - c - 1) + (conj[c] - r - 1) + 1
    return math.factorial(n) // hooks


def weight_dimension(mu: Sequence[int]) -> int:
    """Multinomial count of basis vectors of weight ``mu``."""
    out = math.factorial(sum(mu))
    for m in mu:
        out //= math.factorial(m)
    return out


class ModuleSpace:
    """``V(z_1) (x) ... (x) V(z_n)`` for gl_N."""

    def __init__(self, N: int, z: Sequence = ()):
        if N < 1:
            raise ValueError("rank N must be positive")
        self.N = N
        self.z = tuple(z)
        self.n = len(self.z)
        self.domain = domain_of_values(self.z)
        self.dim = N ** self.n

    def __repr__(self) -> str:
        return f"ModuleSpace(N={self.N}, z={list(self.z)})"

    def to_float(self) -> "ModuleSpace":
        return ModuleSpace(self.N, [to_float(x) for x in self.z])

    @cached_property
    def basis(self) -> list[tuple[int, ...]]:
        return list(itertools.product(range(1, self.N + 1), repeat=self.n))

    def index(self, J: Sequence[int]) -> int:
        k = 0
        for j in J:
            k = k * self.N + (j - 1)
        return k

    def weight_of(self, J: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(1 for j in J if j == i) for i in range(1, self.N + 1))

    @cached_property
    def _weights(self) -> list[tuple[int, ...]]:
        return [self.weight_of(J) for J in self.basis]

    def weight_indices(self, mu: Sequence[int]) -> list[int]:
        mu = tuple(mu)
        return [k for k, w in enumerate(self._weights) if w == mu]

    def zero(self, shape=None) -> np.ndarray:
        z = mpmath.mpc(0) if self.domain == FLOAT else Fraction(0)
        return np.full(shape or (self.dim,), z, dtype=object)

    def unit(self, J: Sequence[int]) -> np.ndarray:
        v = self.zero()
        v[self.index(J)] = v[0] + 1
        return v

    # single-slot action of e_ij (1-based indices)
    @lru_cache(maxsize=None)
    def _slot_map(self, s: int, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        stride = self.N ** (self.n - 1 - s)
        src = [k for k, J in enumerate(self.basis) if J[s] == j]
        dst = [k + (i - j) * stride for k in src]
        return np.array(src, dtype=int), np.array(dst, dtype=int)

    def apply_slot(self, s: int, i: int, j: int, arr: np.ndarray) -> np.ndarray:
        """``e_ij`` acting on tensor factor ``s`` (0-based); works on vectors and column blocks."""
        src, dst = self._slot_map(s, i, j)
        out = np.zeros_like(arr)
        out[dst] = arr[src]
        return out

    def apply_e(self, i: int, j: int, arr: np.ndarray, weights: Sequence | None = None) -> np.ndarray:
        """``sum_s weights[s] * e_ij^{(s)}``; weights default to 1 (the gl_N action)."""
        out = None
        for s in range(self.n):
            w = 1 if weights is None else weights[s]
            if w == 0:
                continue
            term = self.apply_slot(s, i, j, arr)
            term = term if w == 1 else term * w
            out = term if out is None else out + term
        if out is None:
            out = arr * 0
        return out

    def e_matrix(self, i: int, j: int) -> np.ndarray:
        """Dense matrix of the gl_N generator ``e_ij`` on the whole space."""
        eye = np.array([[Fraction(int(a == b)) for b in range(self.dim)] for a in range(self.dim)], dtype=object)
        return self.apply_e(i, j, eye)


@dataclass
class WeightVector:
    space: ModuleSpace
    coeffs: np.ndarray

    @property
    def domain(self):
        return domain_of_values(self.coeffs)

    def norm(self):
        return vector_norm(self.coeffs)

    def weight(self, tol=0) -> tuple[int, ...] | None:
        weights = {self.space.weight_of(J) for J, c in zip(self.space.basis, self.coeffs) if abs(c) > tol}
        return weights.pop() if len(weights) == 1 else None

    def to_dict(self) -> dict[str, str]:
        from .serialize import encode_scalar
        return {
            ",".join(map(str, J)): encode_scalar(c)
            for J, c in zip(self.space.basis, self.coeffs)
            if c != 0
        }


def vector_norm(v) -> mpmath.mpf:
    total = mpmath.mpf(0)
    for c in np.asarray(v).ravel():
        if isinstance(c, Fraction):
            total += to_float(c * c).real
        else:
            total += abs(c) ** 2
    return mpmath.sqrt(total)


def act_eij(i: int, j: int, m: int, v: WeightVector, space: ModuleSpace | None = None) -> WeightVector:
    """``e_ij (x) t^m`` on ``(x)_s V(z_s)``: ``sum_s z_s^m e_ij^{(s)}``."""
    space = space or v.space
    if not (1 <= i <= space.N and 1 <= j <= space.N) or m < 0:
        raise ValueError("bad generator index")
    weights = [zs ** m for zs in space.z]
    return WeightVector(space, space.apply_e(i, j, v.coeffs, weights))


def admissible_indices(n: int, l: Sequence[int], N: int | None = None) -> list[tuple[int, ...]]:
    """Tuples J with ``#{s : j_s > i} = l_i`` for ``i = 1..len(l)``."""
    N = N if N is not None else len(l) + 1
    l = list(l) + [0] * max(0, N - 1 - len(l))
    out = []
    for J in itertools.product(range(1, N + 1), repeat=n):
        if all(sum(1 for j in J if j > i) == l[i - 1] for i in range(1, N)):
            out.append(J)
    return out


def singular_basis(space: ModuleSpace, lam: Sequence[int]) -> list[WeightVector]:
    """Echelon basis of the singular vectors of weight ``lam`` (exact)."""
    lam = tuple(lam)
    if len(lam) != space.N or sum(lam) != space.n:
        log.warning("weight %s does not occur in %s", lam, space)
        return []
    cols = space.weight_indices(lam)
    if not cols:
        return []
    eqs = []
    for i in range(1, space.N + 1):
        for j in range(i + 1, space.N + 1):
            images = []
            for k in cols:
                x = np.zeros(space.dim, dtype=object)
                x[:] = Fraction(0)
                x[k] = Fraction(1)
                images.append(space.apply_e(i, j, x))
            for row in range(space.dim):
                eq = [images[c][row] for c in range(len(cols))]
                if any(e != 0 for e in eq):
                    eqs.append(eq)
    null = nullspace(eqs, ncols=len(cols)) if eqs else nullspace([], ncols=len(cols))
    if not null:
        return []
    rows, _ = rref(null)
    out = []
    for r in rows:
        v = np.full(space.dim, Fraction(0), dtype=object)
        for c, k in enumerate(cols):
            v[k] = Fraction(r[c])
        out.append(WeightVector(space, v))
    return out


class Subspace:
    """Span of vectors in a ModuleSpace, kept in reduced row echelon form."""

    def __init__(self, space: ModuleSpace, vectors: Sequence[np.ndarray], tol=None):
        self.space = space
        self.tol = tol
        mat = [list(v) for v in vectors]
        if mat:
            rows, pivots = rref(mat, tol)
        else:
            rows, pivots = [], []
        self.pivots = pivots
        self.basis = [np.array(r, dtype=object) for r in rows]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def domain(self):
        return domain_of_values(c for b in self.basis for c in b)

    def coords(self, v: np.ndarray) -> list:
        return [v[p] for p in self.pivots]

    def combine(self, coords: Sequence) -> np.ndarray:
        out = self.space.zero()
        if coords and scalar_is_float(coords[0]) and self.domain != FLOAT:
            basis = [np.array([to_float(x) for x in b], dtype=object) for b in self.basis]
            out = np.array([mpmath.mpc(0)] * self.space.dim, dtype=object)
        else:
            basis = self.basis
        for c, b in zip(coords, basis):
            out = out + b * c
        return out

    def leakage(self, v: np.ndarray):
        """Norm of the component of ``v`` outside the span (via pivot coordinates)."""
        return vector_norm(v - self.combine(self.coords(v)))

    def to_float(self) -> "Subspace":
        out = Subspace.__new__(Subspace)
        out.space = self.space.to_float() if self.space.domain != FLOAT else self.space
        out.tol = self.tol
        out.pivots = list(self.pivots)
        out.basis = [np.array([to_float(x) for x in b], dtype=object) for b in self.basis]
        return out


def scalar_is_float(x) -> bool:
    return isinstance(x, (mpmath.mpc, mpmath.mpf, float, complex))


@dataclass
class Epimorphism:
    """Per-group orthogonal projections ``F_s`` onto a copy of ``L_{lambda^(s)}``."""

    N: int
    partitions: list[Partition]
    ns: list[int]
    projections: list[np.ndarray]
    generators: list[np.ndarray]
    seed: int | None
    _float_cache: dict = field(default_factory=dict, repr=False)

    def check(self) -> dict:
        """Rank and equivariance checks (exact)."""
        out = {"rank_ok": True, "commutes": True}
        for P, lam, n_s in zip(self.projections, self.partitions, self.ns):
            space = ModuleSpace(self.N, [0] * n_s)
            r = len(rref([list(row) for row in P])[1]) if n_s else 1
            if r != weyl_dimension(lam):
                out["rank_ok"] = False
            for i in range(1, self.N + 1):
                for j in range(1, self.N + 1):
                    E = space.e_matrix(i, j)
                    if np.any(P.dot(E) - E.dot(P) != 0):
                        out["commutes"] = False
        return out

    def float_projections(self) -> list[np.ndarray]:
        key = mpmath.mp.prec
        if key not in self._float_cache:
            self._float_cache[key] = [
                np.vectorize(to_float, otypes=[object])(P) if P.size else P for P in self.projections
            ]
        return self._float_cache[key]


def _span_closure(space: ModuleSpace, seed_vec: np.ndarray, bound: int) -> list[np.ndarray]:
    """Basis of ``U(n_-) * seed_vec`` by repeated lowering."""
    basis: list[np.ndarray] = []
    echelon: list[list] = []

    def add(v) -> bool:
        nonlocal echelon
        trial = echelon + [list(v)]
        rows, _ = rref(trial)
        if len(rows) > len(echelon):
            echelon = rows
            basis.append(v)
            return True
        return False

    add(seed_vec)
    queue = [seed_vec]
    while queue:
        v = queue.pop(0)
        for i in range(2, space.N + 1):
            for j in range(1, i):
                w = space.apply_e(i, j, v)
                if any(c != 0 for c in w) and add(w):
                    if len(basis) > bound:
                        raise RuntimeError("submodule closure exceeded the Weyl dimension")
                    queue.append(w)
    return basis


def _orthogonal_projection(cols: list[np.ndarray]) -> np.ndarray:
    A = np.array([list(c) for c in cols], dtype=object).T  # dim x d
    G = A.T.dot(A)
    d = G.shape[0]
    Ginv_cols = []
    for k in range(d):
        e = [Fraction(int(i == k)) for i in range(d)]
        Ginv_cols.append(solve([list(r) for r in G], e))
    Ginv = np.array(Ginv_cols, dtype=object).T
    return A.dot(Ginv).dot(A.T)


def build_epimorphism(Lambdas: Sequence[Sequence[int]], ns: Sequence[int], seed: int | None = 0,
                      N: int | None = None) -> Epimorphism:
    """Seeded generic projections ``F_s : V^{(x)n_s} -> L_{lambda^(s)}``."""
    N = N if N is not None else max(len(l) for l in Lambdas)
    parts = [Partition(l, N) for l in Lambdas]
    rng = np.random.default_rng(seed)
    projections, generators = [], []
    for lam, n_s in zip(parts, ns):
        if lam.size != n_s:
            raise ValueError(f"|{tuple(lam)}| != n_s = {n_s}")
        space = ModuleSpace(N, [0] * n_s)
        sing = singular_basis(space, lam)
        if not sing:
            raise ValueError(f"L{tuple(lam)} does not occur in V^{n_s}")
        coeffs = [Fraction(int(c)) for c in rng.integers(1, 10, size=len(sing))]
        u_s = sum((b.coeffs * c for c, b in zip(coeffs, sing)), space.zero())
        cols = _span_closure(space, u_s, weyl_dimension(lam))
        projections.append(_orthogonal_projection(cols))
        generators.append(u_s)
    return Epimorphism(N, parts, list(ns), projections, generators, seed)


def apply_F(F: Epimorphism, v: WeightVector) -> WeightVector:
    """``F_1 (x) ... (x) F_k`` applied to ``v`` in ``V^{(x)n}``, ``n = sum n_s``."""
    N = F.N
    if sum(F.ns) != v.space.n:
        raise ValueError("tensor degree of v does not match the epimorphism")
    is_float = v.domain == FLOAT
    projections = F.float_projections() if is_float else F.projections
    shape = [N ** n_s for n_s in F.ns]
    T = np.array(v.coeffs, dtype=object).reshape(shape)
    for axis, P in enumerate(projections):
        if F.ns[axis] == 0:
            continue
        T = np.tensordot(P, T, axes=([1], [axis]))
        T = np.moveaxis(T, 0, axis)
    return WeightVector(v.space, T.reshape(-1))


def realized_singular_subspace(F: Epimorphism, space: ModuleSpace, lam: Sequence[int]) -> Subspace:
    """``(tensor of L_{lambda^(s)})^sing_lam`` realized inside ``V^{(x)n}``."""
    sing = singular_basis(ModuleSpace(space.N, [0] * space.n), lam)
    images = [apply_F(F, WeightVector(space, b.coeffs)).coeffs for b in sing]
    images = [im for im in images if any(c != 0 for c in im)]
    return Subspace(space, images)


__all__ = [
    "EXACT",
    "Epimorphism",
    "ModuleSpace",
    "Partition",
    "Subspace",
    "WeightVector",
    "act_eij",
    "admissible_indices",
    "apply_F",
    "build_epimorphism",
    "realized_singular_subspace",
    "singular_basis",
    "standard_tableaux_count",
    "weight_dimension",
    "weyl_dimension",
]
