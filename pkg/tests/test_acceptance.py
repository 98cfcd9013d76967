"""Acceptance criteria 1-6; each test prints one PASS/FAIL line."""
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from helpers import MIXED_INSTANCE, single_box_instance

from gaudin.bethe import apply_universal, commutativity_check
from gaudin.pipeline import (
    Instance,
    Seeds,
    completeness_report,
    construct_eigenvector,
    cosine,
    point_checks,
    setup,
    verify_bijection,
)
from gaudin.bethe import spectrum
from gaudin.repn import ModuleSpace
from gaudin.schubert import (
    RootCoordinates,
    SchubertPoint,
    chi_operator,
    is_generic,
    kernel_to_point,
    operator_from_kernel,
)
from gaudin.serialize import dumps
from gaudin.weight import omega

F = Fraction
PRECISION = 256
INSTANCES = {
    "four_points": single_box_instance(2, ["0", "1", "3", "-2"], [2, 2], seed=7),
    "three_points": single_box_instance(3, ["0", "1", "5/2"], [1, 1, 1], seed=7),
    "mixed": dict(MIXED_INSTANCE, seed=7),
}
EXPECTED = {"four_points": 2, "three_points": 1, "mixed": 1}


@pytest.fixture
def verdict(capsys):
    def emit(number, passed, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())
        assert passed, detail
    return emit


@pytest.fixture(scope="module")
def bijection_runs():
    out = {}
    with mpmath.workprec(PRECISION):
        for name, data in INSTANCES.items():
            inst = Instance.from_dict(data)
            start = time.perf_counter()
            rep = verify_bijection(inst, 1e-6, precision=PRECISION)
            out[name] = (inst, rep, time.perf_counter() - start)
    return out


def test_criterion_1_worked_example(verdict):
    start = time.perf_counter()
    t = RootCoordinates([[F(0), F(1)], [F(3)], [F(7)]])
    w = omega(t)
    sp = w.space
    expected = sp.zero()
    expected[sp.index((3, 1))] = F(1, (7 - 3) * (3 - 0))
    expected[sp.index((1, 3))] = F(1, (7 - 3) * (3 - 1))
    elapsed = time.perf_counter() - start
    exact = all(isinstance(x, (int, F)) for x in w.coeffs)
    ok = exact and bool(np.all(w.coeffs == expected)) and elapsed < 1
    verdict(1, ok, f"omega = {w.to_dict()} in {elapsed:.3f}s")


LAMBDAS = [(1, 0), (2, 0), (1, 1), (2, 1), (3, 1), (2, 2), (3, 0), (4, 0),
           (1, 0, 0), (1, 1, 0), (2, 1, 0), (1, 1, 1), (2, 1, 1), (2, 2, 0), (3, 1, 0), (2, 0, 0)]


def test_criterion_2_random_points(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures, worst = [], {}
    for k in range(20):
        lam = LAMBDAS[k % len(LAMBDAS)]
        X = SchubertPoint.random(lam, rng)
        while not is_generic(X, PRECISION):
            X = SchubertPoint.random(lam, rng)
        for check in point_checks(X, PRECISION, 1e-9, label=f"X[{k}]"):
            key = check["name"].split(".", 1)[1]
            worst[key] = max(worst.get(key, 0.0), check.get("residual", 0.0))
            if not check["pass"]:
                failures.append(check["name"])
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 180
    detail = ", ".join(f"{k}<={v:.1e}" for k, v in worst.items() if v) + f" in {elapsed:.1f}s"
    verdict(2, ok, detail if ok else f"failed: {failures} {detail}")


def _identity(n):
    return np.array([[F(int(a == b)) for b in range(n)] for a in range(n)], dtype=object)


def test_criterion_3_exact_identities(verdict):
    start = time.perf_counter()
    results = {}
    sp = ModuleSpace(2, [F(0), F(1)])
    I = _identity(4)
    ok = True
    for x in [F(1, 2), F(3), F(-2, 7), F(5, 3), F(9)]:
        w1 = [1 / (x - z) for z in sp.z]
        w2 = [-1 / (x - z) ** 2 for z in sp.z]
        e = lambda i, j, a, ws=w1: sp.apply_e(i, j, a, ws)  # noqa: E731
        B = apply_universal(sp, x, I)
        ok &= bool(np.all(B[1] == -(e(1, 1, I) + e(2, 2, I))))
        ok &= bool(np.all(B[2] == e(1, 1, e(2, 2, I)) - e(2, 1, e(1, 2, I)) - e(2, 2, I, w2)))
    results["rank2_expansion"] = ok
    for N in (1, 2, 3):
        res = commutativity_check(ModuleSpace(N, [F(0), F(1), F(3)]), samples=[F(1, 2), F(-5, 3)])
        results[f"commutators_N{N}"] = res == 0
    roots = [
        [[F(0), F(2)], [F(1)]],
        [[F(0), F(2)], [F(1)], []],
        [[F(2), F(3), F(-6, 5)], [F(0)], []],
    ]
    lams = [(1, 1), (1, 1, 0), (2, 1, 0)]
    for t, lam in zip(roots, lams):
        D = chi_operator(RootCoordinates(t))
        results[f"chi_vs_kernel{lam}"] = D == operator_from_kernel(kernel_to_point(D, lam))
    rng = np.random.default_rng(3)
    results["kernel_roundtrip"] = all(
        kernel_to_point(operator_from_kernel(X), X.lam) == X
        for X in (SchubertPoint.random(lam, rng) for lam in LAMBDAS)
    )
    elapsed = time.perf_counter() - start
    failed = [k for k, v in results.items() if not v]
    verdict(3, not failed and elapsed < 120, f"{len(results)} identities in {elapsed:.1f}s {failed or ''}")


def test_criterion_4_bijection(verdict, bijection_runs):
    failed, total, worst = [], 0.0, 0.0
    for name, (inst, rep, elapsed) in bijection_runs.items():
        total += elapsed
        counts = [a for a in rep["assertions"] if a["name"] == "count_equals_dimension"][0]
        if counts["count"] != EXPECTED[name] or not all(a["pass"] for a in rep["assertions"]):
            failed.append(name)
        worst = max([worst] + [e.get("cosine_defect", 1.0) for e in rep["eigenvectors"]])
    ok = not failed and total < 600 and worst < 1e-6
    verdict(4, ok, f"max 1-|cos| = {worst:.1e} in {total:.1f}s {failed or ''}")


def test_criterion_5_completeness(verdict):
    failed, summary = [], []
    with mpmath.workprec(PRECISION):
        for name, data in INSTANCES.items():
            rep = completeness_report(Instance.from_dict(data), precision=PRECISION)
            by_name = {a["name"]: a for a in rep["assertions"]}
            count = by_name["count_equals_dimension"]["count"]
            oracle = by_name["dimension_matches_oracle"]["oracle"]
            summary.append(f"{name}={count}/{oracle}")
            if count != EXPECTED[name] or oracle != EXPECTED[name] or not all(a["pass"] for a in rep["assertions"]):
                failed.append(name)
    verdict(5, not failed, " ".join(summary) + (f" failed: {failed}" if failed else ""))


def test_criterion_6_robustness(verdict, bijection_runs):
    worst, same = 0.0, True
    with mpmath.workprec(PRECISION):
        for name, (inst, rep, _) in bijection_runs.items():
            spec = spectrum(setup(inst, Seeds.derive(inst.seed)).U, 1e-8, Seeds.derive(inst.seed).spectrum, PRECISION)
            for r in spec.reports:
                ws = [construct_eigenvector(r.operator, inst.partitions, inst.weight, inst.b, Seeds.derive(s),
                                            PRECISION).w.coeffs for s in (101, 202)]
                worst = max(worst, float(1 - cosine(ws[0], ws[1])), float(1 - cosine(ws[0], r.vector.coeffs)))
            same &= dumps(rep) == dumps(verify_bijection(inst, 1e-6, precision=PRECISION))
    verdict(6, worst < 1e-6 and same, f"max 1-|cos| across seeds = {worst:.1e}, byte-identical = {same}")
