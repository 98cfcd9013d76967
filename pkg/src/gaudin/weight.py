"""The universal weight function ``omega(t) = sum_J omega_J(t) e_J v``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence


from .numeric import FLOAT, domain_of_values, to_float
from .repn import ModuleSpace, WeightVector, admissible_indices
from .schubert import NonGeneric, RootCoordinates

MAX_FAMILIES = 10 ** 6


@dataclass(frozen=True)
class AdmissibleIndexData:
    J: tuple[int, ...]
    N: int

    @property
    def S(self) -> list[int]:
        """Slots (0-based) with ``j_s > 1``."""
        return [s for s, j in enumerate(self.J) if j > 1]

    def S_i(self, i: int) -> list[int]:
        """Slots (0-based) with ``i < j_s``."""
        return [s for s, j in enumerate(self.J) if i < j]


def bijection_families(data: AdmissibleIndexData, l: Sequence[int],
                       cap: int = MAX_FAMILIES) -> Iterator[list[dict[int, int]]]:
    """All ``beta = (beta_1, ..., beta_{N-1})``, ``beta_i: S_i(J) -> {1..l_i}``.

    Permutations are enumerated per level in lexicographic order.
    """
    levels = []
    for i in range(1, data.N):
        S = data.S_i(i)
        if len(S) != l[i - 1]:
            raise ValueError(f"|S_{i}(J)| = {len(S)} != l_{i} = {l[i - 1]}")
        levels.append(S)
    count = math.prod(math.factorial(len(S)) for S in levels)
    if count > cap:
        raise ValueError(f"{count} bijection families exceed the cap {cap}")
    perms = [list(itertools.permutations(range(1, len(S) + 1))) for S in levels]
    for choice in itertools.product(*perms):
        yield [dict(zip(S, p)) for S, p in zip(levels, choice)]


def _recip(x):
    if x == 0:
        raise NonGeneric("non-generic t: vanishing denominator in the weight function")
    return Fraction(1) / x if isinstance(x, (int, Fraction)) else 1 / x


def omega_term(s: int, beta: Sequence[dict[int, int]], t: RootCoordinates, J: Sequence[int]):
    """``omega_{s,beta}(t)``; ``s`` is a 0-based slot with ``J[s] > 1``."""
    js = J[s]
    if js < 2:
        raise ValueError("omega_term needs j_s > 1")
    val = _recip(t.level(1)[beta[0][s] - 1] - t.level(0)[s])
    for i in range(2, js):
        val = val * _recip(t.level(i)[beta[i - 1][s] - 1] - t.level(i - 1)[beta[i - 2][s] - 1])
    return val


def omega_J(t: RootCoordinates, J: Sequence[int], cap: int = MAX_FAMILIES):
    data = AdmissibleIndexData(tuple(J), t.N)
    l = t.l[1:]
    total = 0
    for beta in bijection_families(data, l, cap):
        prod = 1
        for s in data.S:
            prod = prod * omega_term(s, beta, t, J)
        total = total + prod
    return total


def omega(t: RootCoordinates, N: int | None = None, cap: int = MAX_FAMILIES) -> WeightVector:
    """The weight function as a vector of ``V(t^{(0)}_1) (x) ... (x) V(t^{(0)}_n)``."""
    N = N if N is not None else t.N
    if t.N > N:
        raise ValueError("more levels than the rank")
    if t.N < N:
        t = RootCoordinates(tuple(t.levels) + ((),) * (N - t.N))
    space = ModuleSpace(N, t.level(0))
    is_float = domain_of_values(x for lv in t.levels for x in lv) == FLOAT
    vec = space.zero()
    for J in admissible_indices(space.n, t.l[1:], N):
        val = omega_J(t, J, cap)
        vec[space.index(J)] = to_float(val) if is_float else Fraction(val)
    return WeightVector(space, vec)


__all__ = [
    "AdmissibleIndexData",
    "bijection_families",
    "omega",
    "omega_J",
    "omega_term",
]
