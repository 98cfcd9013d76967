"""From a Fuchsian operator to a Bethe eigenvector, and back.

``construct_eigenvector`` degenerates a generic curve in the Schubert cell
onto the kernel of the given operator, evaluates the weight function along
it, extracts the leading direction and projects it with ``F``.
``verify_bijection`` closes the loop against the spectrum of the Bethe
algebra; ``completeness_report`` counts eigenvectors.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .bethe import EigenReport, UniversalOperator, eigen_check, spectrum, universal_operator
from .diffop import DeltaMembershipReport, ScalarDiffOp, delta_membership, operators_agree
from .linalg import nullspace, rref
from .numeric import FLOAT, PIPELINE_PRECISION, parse_rational, to_float
from .repn import (
    Epimorphism,
    ModuleSpace,
    Partition,
    Subspace,
    WeightVector,
    apply_F,
    build_epimorphism,
    realized_singular_subspace,
    standard_tableaux_count,
    vector_norm,
)
from .schubert import (
    SchubertPoint,
    bae_residual,
    chi_operator,
    default_schedule,
    is_generic,
    kernel_to_point,
    operator_from_kernel,
    root_coordinates,
    sample_curve,
)
from .weight import omega

log = logging.getLogger(__name__)

F_RETRIES = 5
F_CUTOFF = 1e-6


class InstanceError(ValueError):
    """Malformed problem instance."""


class ConstructionError(RuntimeError):
    """The construction could not be completed; ``details`` explains why."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class PuiseuxError(ConstructionError):
    pass


# --- problem instances ------------------------------------------------------


@dataclass
class Instance:
    N: int
    partitions: list[Partition]
    b: list[Fraction]
    ns: list[int]
    weight: Partition
    seed: int = 0
    precision: int = PIPELINE_PRECISION
    operator: ScalarDiffOp | None = None
    name: str = ""

    @property
    def z(self) -> list[Fraction]:
        return [x for x, n in zip(self.b, self.ns) for _ in range(n)]

    @property
    def space(self) -> ModuleSpace:
        return ModuleSpace(self.N, self.z)

    @classmethod
    def from_dict(cls, data) -> "Instance":
        if not isinstance(data, dict):
            raise InstanceError("instance must be a JSON object")
        try:
            N = int(data["N"])
            factors = data["factors"]
            weight = data["weight"]
        except KeyError as exc:
            raise InstanceError(f"missing field {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"bad field: {exc}") from exc
        if N < 1:
            raise InstanceError("N must be positive")
        if not isinstance(factors, list):
            raise InstanceError("'factors' must be a list")
        parts, b, ns = [], [], []
        for k, f in enumerate(factors):
            if not isinstance(f, dict):
                raise InstanceError(f"factor {k} must be an object")
            for key in ("partition", "b", "n_s"):
                if key not in f:
                    raise InstanceError(f"factor {k}: missing field {key!r}")
            try:
                lam = Partition(f["partition"], N)
                point = parse_rational(f["b"])
                n_s = int(f["n_s"])
            except (TypeError, ValueError) as exc:
                raise InstanceError(f"factor {k}: {exc}") from exc
            if lam.size != n_s:
                raise InstanceError(f"factor {k}: |partition| = {lam.size} != n_s = {n_s}")
            parts.append(lam)
            b.append(point)
            ns.append(n_s)
        if len(set(b)) != len(b):
            raise InstanceError("the points b_s must be distinct")
        try:
            lam = Partition(weight, N)
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"weight: {exc}") from exc
        op = None
        if data.get("operator") is not None:
            try:
                op = ScalarDiffOp.from_dict(data["operator"])
            except (TypeError, ValueError, KeyError) as exc:
                raise InstanceError(f"operator: {exc}") from exc
        try:
            seed = int(data.get("seed", 0))
            precision = int(data.get("precision", PIPELINE_PRECISION))
        except (TypeError, ValueError) as exc:
            raise InstanceError(f"bad seed/precision: {exc}") from exc
        return cls(N, parts, b, ns, lam, seed, precision, op, str(data.get("name", "")))

    def to_dict(self) -> dict:
        out = {
            "N": self.N,
            "factors": [
                {"partition": list(p), "b": str(x), "n_s": n} for p, x, n in zip(self.partitions, self.b, self.ns)
            ],
            "weight": list(self.weight),
            "seed": self.seed,
            "precision": self.precision,
        }
        if self.name:
            out["name"] = self.name
        if self.operator is not None:
            out["operator"] = self.operator.to_dict()
        return out


@dataclass(frozen=True)
class Seeds:
    curve: int
    F: int
    spectrum: int

    @classmethod
    def derive(cls, seed: int) -> "Seeds":
        rng = np.random.default_rng(seed)
        a, b, c = (int(x) for x in rng.integers(0, 2 ** 31, size=3))
        return cls(a, b, c)

    def to_dict(self) -> dict:
        return {"curve": self.curve, "F": self.F, "spectrum": self.spectrum}


# --- Puiseux limits ---------------------------------------------------------


@dataclass
class PuiseuxLimit:
    direction: np.ndarray
    exponent: float
    differences: list[float]
    converged: bool
    reference: int


def _hermitian(a, b):
    return sum((mpmath.conj(x) * y for x, y in zip(a, b)), mpmath.mpc(0))


def _normalized(vec: np.ndarray, ref: int) -> np.ndarray:
    nrm = vector_norm(vec)
    ph = vec[ref] / abs(vec[ref])
    return np.array([x / (ph * nrm) for x in vec], dtype=object)


def puiseux_leading(vectors: Sequence[tuple], tolerance=1e-7) -> PuiseuxLimit:
    """Limit direction of ``v(eps)`` as ``eps -> 0`` and the leading exponent.

    ``vectors`` are ``(eps, vector)`` pairs with decreasing ``eps``.  All
    vectors are phase-fixed at one reference component (the largest one at
    the smallest ``eps``) so the normalized sequence is comparable across
    steps.  The tail is accelerated geometrically before the Cauchy test.
    """
    if len(vectors) < 4:
        raise PuiseuxError("Puiseux limit not resolved; refine schedule/precision (need >= 4 samples)")
    arrs = [np.asarray(v.coeffs if isinstance(v, WeightVector) else v, dtype=object) for _, v in vectors]
    arrs = [np.array([to_float(x) for x in a], dtype=object) for a in arrs]
    epss = [to_float(e).real for e, _ in vectors]
    last = arrs[-1]
    ref = max(range(len(last)), key=lambda k: abs(last[k]))
    if any(a[ref] == 0 for a in arrs):
        raise PuiseuxError("Puiseux limit not resolved; refine schedule/precision (reference component vanishes)")
    xs = [_normalized(a, ref) for a in arrs]
    diffs = [float(vector_norm(xs[m] - xs[m - 1])) for m in range(1, len(xs))]
    accel = []
    for m in range(2, len(xs)):
        d1, d0 = diffs[m - 1], diffs[m - 2]
        y = xs[m]
        if d0 > 0 and 0 < d1 < d0:
            rho = d1 / d0
            y = _normalized(xs[m] + (xs[m] - xs[m - 1]) * (rho / (1 - rho)), ref)
        accel.append(y)
    adiffs = [float(vector_norm(accel[m] - accel[m - 1])) for m in range(1, len(accel))]
    tail = adiffs[-3:]
    converged = len(tail) == 3 and all(d < tolerance for d in tail)
    norms = [mpmath.log(vector_norm(a)) for a in arrs]
    logs = [mpmath.log(e) for e in epss]
    k = max(3, len(arrs) // 2)
    xl, yl = logs[-k:], norms[-k:]
    mx, my = sum(xl) / k, sum(yl) / k
    den = sum((x - mx) ** 2 for x in xl)
    slope = float(sum((x - mx) * (y - my) for x, y in zip(xl, yl)) / den) if den else 0.0
    result = PuiseuxLimit(accel[-1], slope, adiffs, converged, ref)
    if not converged:
        raise PuiseuxError(
            "Puiseux limit not resolved; refine schedule/precision",
            {"last_differences": tail, "exponent": slope},
        )
    return result


# --- construction -----------------------------------------------------------


@dataclass
class ConstructionResult:
    operator: ScalarDiffOp
    curve: dict
    schedule: list
    vector_norms: list
    limit: PuiseuxLimit
    F_seed: int
    F_attempts: int
    w: WeightVector
    eigen: EigenReport
    agreement: float
    singular_residual: float
    tolerance: float
    membership: DeltaMembershipReport | None = None

    @property
    def success(self) -> bool:
        return (
            self.eigen.is_eigenvector
            and self.agreement < self.tolerance
            and self.limit.converged
            and vector_norm(self.w.coeffs) > 0
        )

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "curve": self.curve,
            "schedule": [str(e) for e in self.schedule],
            "vector_norms": [mpmath.nstr(x, 10) for x in self.vector_norms],
            "puiseux": {
                "exponent": round(self.limit.exponent, 6),
                "reference_index": self.limit.reference,
                "last_differences": [float(f"{d:.3e}") for d in self.limit.differences[-3:]],
                "converged": self.limit.converged,
            },
            "F_seed": self.F_seed,
            "F_attempts": self.F_attempts,
            "w": self.w.to_dict(),
            "eigen": self.eigen.to_dict(),
            "operator_agreement": float(f"{self.agreement:.3e}"),
            "singular_residual": float(f"{self.singular_residual:.3e}"),
        }


def _singular_residual(space: ModuleSpace, vec: np.ndarray):
    nrm = vector_norm(vec)
    worst = mpmath.mpf(0)
    for i in range(1, space.N + 1):
        for j in range(i + 1, space.N + 1):
            worst = max(worst, vector_norm(space.apply_e(i, j, vec)) / nrm)
    return worst


def agreement_points(b: Sequence, count: int = 10) -> list:
    R = 2 * (1 + max((abs(to_float(x)) for x in b), default=0))
    return [R * mpmath.expjpi(mpmath.mpf(2 * k + 1) / (2 * count)) * (1 + mpmath.mpf(k) / 13) for k in range(count)]


def construct_eigenvector(D0: ScalarDiffOp, Lambdas: Sequence[Sequence[int]], lam: Sequence[int],
                          b: Sequence, seeds: Seeds | None = None, precision: int = PIPELINE_PRECISION,
                          schedule: Sequence | None = None, tolerance=1e-6,
                          F: Epimorphism | None = None, puiseux_tol=1e-7) -> ConstructionResult:
    """``w(D0) = F(v_0)`` where ``v_0`` leads the weight function along a curve."""
    seeds = seeds or Seeds.derive(0)
    N = D0.order
    lam = Partition(lam, N)
    parts = [Partition(l, N) for l in Lambdas]
    ns = [p.size for p in parts]
    b = [parse_rational(x) if isinstance(x, (str, int)) else x for x in b]
    schedule = list(schedule) if schedule is not None else default_schedule()
    with mpmath.workprec(precision):
        D = D0.to_float() if D0.domain != FLOAT else D0
        report = delta_membership(D, parts, lam, b)
        if not report.passed:
            raise ConstructionError("operator is not in the class Delta", {"membership": report.to_dict()})
        X0 = kernel_to_point(D0 if D0.domain != FLOAT else D, lam)
        germ, samples = sample_curve(X0, b, ns, seeds.curve, schedule, precision)
        vectors, sing = [], mpmath.mpf(0)
        for eps, t in samples:
            v = omega(t, N)
            vectors.append((eps, v))
            sing = max(sing, _singular_residual(v.space, v.coeffs))
        limit = puiseux_leading(vectors, puiseux_tol)
        space_b = ModuleSpace(N, [x for x, n in zip(b, ns) for _ in range(n)])
        v0 = WeightVector(space_b.to_float(), limit.direction)
        attempts, F_seed = 0, seeds.F
        while True:
            attempts += 1
            if F is None or attempts > 1:
                F = build_epimorphism(parts, ns, F_seed, N)
            w = apply_F(F, v0)
            if vector_norm(w.coeffs) > F_CUTOFF * vector_norm(v0.coeffs):
                break
            if attempts > F_RETRIES:
                raise ConstructionError("F(v0) vanishes for every tried F", {"F_attempts": attempts})
            log.info("F(v0) = 0 for F seed %s; retrying", F_seed)
            F_seed = int(np.random.default_rng(F_seed).integers(0, 2 ** 31))
        W = realized_singular_subspace(F, space_b, lam)
        U = universal_operator(space_b, W)
        w = WeightVector(w.space, _phase_fix(w.coeffs))
        eig = eigen_check(U.to_float(), w, tolerance)
        agreement = operators_agree(eig.operator, D, agreement_points(b))
    return ConstructionResult(
        operator=D0,
        curve=germ.to_dict(),
        schedule=schedule,
        vector_norms=[vector_norm(v.coeffs) for _, v in vectors],
        limit=limit,
        F_seed=F.seed,
        F_attempts=attempts,
        w=eig.vector,
        eigen=eig,
        agreement=agreement,
        singular_residual=float(sing),
        tolerance=tolerance,
        membership=report,
    )


def _phase_fix(vec: np.ndarray) -> np.ndarray:
    ref = max(range(len(vec)), key=lambda k: abs(vec[k]))
    return _normalized(vec, ref)


def cosine(a: np.ndarray, b: np.ndarray):
    """``|<a, b>| / (|a| |b|)``."""
    a = [to_float(x) for x in a]
    b = [to_float(x) for x in b]
    return abs(_hermitian(a, b)) / (vector_norm(np.array(a, dtype=object)) * vector_norm(np.array(b, dtype=object)))


# --- bijection and completeness ---------------------------------------------


def _assertion(name: str, passed: bool, residual=None, **extra) -> dict:
    out = {"name": name, "pass": bool(passed)}
    if residual is not None:
        out["residual"] = residual if isinstance(residual, (int, str)) else float(f"{float(residual):.3e}")
    out.update(extra)
    return out


@dataclass
class BetheSetup:
    space: ModuleSpace
    F: Epimorphism
    U: UniversalOperator
    dimension: int


def setup(instance: Instance, seeds: Seeds) -> BetheSetup:
    space = instance.space
    F = build_epimorphism(instance.partitions, instance.ns, seeds.F, instance.N)
    W = realized_singular_subspace(F, space, instance.weight)
    U = universal_operator(space, W)
    return BetheSetup(space, F, U, W.dim)


def expected_dimension(instance: Instance) -> int:
    """Dimension of the singular weight subspace, computed independently.

    Single-box factors: the standard tableaux count.  Otherwise: the
    nullspace of the raising operators on the image under ``F`` of the
    weight-``lambda`` space.
    """
    if all(p == Partition([1], instance.N) for p in instance.partitions):
        return standard_tableaux_count(instance.weight)
    sp = ModuleSpace(instance.N, [0] * sum(instance.ns))
    F = build_epimorphism(instance.partitions, instance.ns, 0, instance.N)
    images = [apply_F(F, WeightVector(sp, sp.unit(sp.basis[k]))).coeffs for k in sp.weight_indices(instance.weight)]
    rows, _ = rref([list(v) for v in images if any(c != 0 for c in v)])
    if not rows:
        return 0
    eqs = []
    for i in range(1, instance.N):
        imgs = [sp.apply_e(i, i + 1, np.array(r, dtype=object)) for r in rows]
        eqs.extend([[im[k] for im in imgs] for k in range(sp.dim)])
    return len(nullspace(eqs, ncols=len(rows)))


def verify_bijection(instance: Instance, tolerance=1e-6, seeds: Seeds | None = None,
                     schedule: Sequence | None = None, precision: int | None = None,
                     spectrum_result=None, bethe: BetheSetup | None = None) -> dict:
    """Spectrum, then ``D^B_v`` in Delta and ``w(D^B_v)`` parallel to ``v`` for every eigenvector."""
    seeds = seeds or Seeds.derive(instance.seed)
    precision = precision or instance.precision
    bethe = bethe or setup(instance, seeds)
    spec = spectrum_result or spectrum(bethe.U, 1e-8, seeds.spectrum, precision)
    assertions = []
    items = []
    for k, rep in enumerate(spec.reports):
        item = {"index": k, "eigen_residual": float(f"{float(rep.residual):.3e}")}
        with mpmath.workprec(precision):
            dm = delta_membership(rep.operator, instance.partitions, instance.weight, instance.b)
        item["delta_membership"] = dm.passed
        assertions.append(_assertion(f"eigenvector[{k}].delta_membership", dm.passed))
        if not dm.passed:
            item["membership"] = dm.to_dict()
            items.append(item)
            continue
        try:
            res = construct_eigenvector(
                rep.operator, instance.partitions, instance.weight, instance.b, seeds,
                precision, schedule, tolerance, F=bethe.F,
            )
            with mpmath.workprec(precision):
                cos = cosine(res.w.coeffs, rep.vector.coeffs)
            item["cosine_defect"] = float(f"{float(1 - cos):.3e}")
            item["construction"] = res.to_dict()
            ok = res.success and 1 - cos < tolerance
            assertions.append(_assertion(f"eigenvector[{k}].closes", ok, 1 - cos))
        except ConstructionError as exc:
            item["error"] = str(exc)
            item["details"] = exc.details
            assertions.append(_assertion(f"eigenvector[{k}].closes", False, error=str(exc)))
        items.append(item)
    with mpmath.workprec(precision):
        pts = agreement_points(instance.b, 5)
        distinct = all(
            operators_agree(spec.reports[i].operator, spec.reports[j].operator, pts) > 1e-8
            for i in range(len(spec.reports))
            for j in range(i + 1, len(spec.reports))
        )
    assertions.append(_assertion("count_equals_dimension", len(spec.reports) == bethe.dimension,
                                 count=len(spec.reports), dimension=bethe.dimension))
    assertions.append(_assertion("operators_pairwise_distinct", distinct))
    return {"assertions": assertions, "eigenvectors": items}


def completeness_report(instance: Instance, tolerance=1e-8, seeds: Seeds | None = None,
                        precision: int | None = None, verify: bool = False,
                        schedule: Sequence | None = None) -> dict:
    """Eigenvector count against the singular-space dimension."""
    seeds = seeds or Seeds.derive(instance.seed)
    precision = precision or instance.precision
    if sum(instance.ns) != instance.weight.size:
        return {
            "assertions": [_assertion("count_equals_dimension", True, count=0, dimension=0)],
            "note": "weight mismatch: the singular weight subspace is zero (vacuous)",
        }
    bethe = setup(instance, seeds)
    spec = spectrum(bethe.U, tolerance, seeds.spectrum, precision)
    oracle = expected_dimension(instance)
    real = all(isinstance(x, Fraction) for x in instance.b)
    out = {
        "assertions": [
            _assertion("count_equals_dimension", len(spec.reports) == bethe.dimension,
                       count=len(spec.reports), dimension=bethe.dimension),
            _assertion("dimension_matches_oracle", bethe.dimension == oracle, dimension=bethe.dimension,
                       oracle=oracle),
            _assertion("no_degenerate_eigenspaces", not spec.degenerate, degenerate=spec.degenerate),
            _assertion("all_eigen_residuals", all(r.is_eigenvector for r in spec.reports),
                       max((float(r.residual) for r in spec.reports), default=0.0)),
        ],
        "points": "real rational" if real else "generic complex",
        "eigenvectors": [r.to_dict() for r in spec.reports],
    }
    if verify:
        ver = verify_bijection(instance, 1e-6, seeds, schedule, precision, spec, bethe)
        out["assertions"].extend(a for a in ver["assertions"] if a["name"] != "count_equals_dimension")
        out["verification"] = ver["eigenvectors"]
    return out


def weight_function_checks(lam: Sequence[int], count: int = 3, seed: int = 0,
                           precision: int = PIPELINE_PRECISION, tolerance=1e-9) -> list[dict]:
    """Weight-function properties at ``count`` random generic points of the cell."""
    lam = Partition(lam)
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        X = SchubertPoint.random(lam, rng)
        tries = 0
        while not is_generic(X, precision):
            X = SchubertPoint.random(lam, rng)
            tries += 1
            if tries > 20:
                raise RuntimeError(f"no generic point found for {tuple(lam)}")
        out.extend(point_checks(X, precision, tolerance, label=f"X[{k}]"))
    return out


def point_checks(X: SchubertPoint, precision: int = PIPELINE_PRECISION, tolerance=1e-9,
                 label: str = "X") -> list[dict]:
    """BAE, singularity, eigenvector and operator identities for one cell point."""
    with mpmath.workprec(precision):
        t = root_coordinates(X, precision)
        w = omega(t, X.N)
        space = w.space
        bae = bae_residual(t)
        sing = _singular_residual(space, w.coeffs)
        sub = Subspace(space, [space.unit(space.basis[k]) for k in space.weight_indices(X.lam)])
        U = universal_operator(space, sub, check=False)
        eig = eigen_check(U, w, 1e-8)
        DX = operator_from_kernel(X)
        pts = agreement_points(t.level(0))
        agree = operators_agree(eig.operator, DX.to_float(), pts)
        chi_agree = operators_agree(chi_operator(t), DX.to_float(), pts)
        dm = delta_membership(DX.to_float(), [[1]] * space.n, X.lam, list(t.level(0)))
    return [
        _assertion(f"{label}.bae", bae < tolerance, bae),
        _assertion(f"{label}.singular", sing < tolerance, sing),
        _assertion(f"{label}.eigen_check", eig.residual < 1e-8, eig.residual),
        _assertion(f"{label}.operator_matches_kernel", agree < 1e-8, agree),
        _assertion(f"{label}.chi_factorization", chi_agree < 1e-8, chi_agree),
        _assertion(f"{label}.exponents", dm.passed),
    ]


__all__ = [
    "ConstructionError",
    "ConstructionResult",
    "Instance",
    "InstanceError",
    "PuiseuxError",
    "PuiseuxLimit",
    "Seeds",
    "completeness_report",
    "construct_eigenvector",
    "cosine",
    "puiseux_leading",
    "point_checks",
    "verify_bijection",
    "weight_function_checks",
]
