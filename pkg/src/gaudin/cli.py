"""Batch command-line front end.

Exit codes: 0 when every assertion passes, 1 when one fails, 2 on bad input.
Only the report JSON goes to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .numeric import PIPELINE_PRECISION, parse_rational
from .serialize import dumps

log = logging.getLogger("gaudin")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
COMMANDS = ("spectrum", "construct", "verify", "completeness", "selftest")


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    command: str
    instance: str | None
    precision: int | None
    seed: int | None
    eps0: Fraction
    eps_ratio: Fraction
    eps_steps: int
    tol: float
    jobs: int
    out: str | None
    random_points: int

    @property
    def schedule(self) -> list[Fraction]:
        return [self.eps0 * self.eps_ratio ** m for m in range(self.eps_steps)]


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaudin", description="Bethe eigenvectors and Fuchsian operators.")
    p.add_argument("--instance", metavar="PATH")
    p.add_argument("--command", choices=COMMANDS, required=True)
    p.add_argument("--precision", type=int, metavar="BITS")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps0", type=_rational, default=Fraction(1, 100), metavar="RAT")
    p.add_argument("--eps-ratio", type=_rational, default=Fraction(1, 2), metavar="RAT")
    p.add_argument("--eps-steps", type=int, default=25, metavar="INT")
    p.add_argument("--tol", type=float, default=1e-6, metavar="FLOAT")
    p.add_argument("--jobs", type=int, default=1, metavar="INT")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--random-points", type=int, default=3, metavar="INT",
                   help="random cell points checked by 'verify'")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def make_config(args: argparse.Namespace) -> Config:
    precision = args.precision
    if precision is None and os.environ.get("GAUDIN_PRECISION"):
        try:
            precision = int(os.environ["GAUDIN_PRECISION"])
        except ValueError as exc:
            raise InputError(f"GAUDIN_PRECISION is not an integer: {os.environ['GAUDIN_PRECISION']!r}") from exc
    if precision is not None and precision < 53:
        raise InputError("precision must be at least 53 bits")
    if args.tol <= 0:
        raise InputError("--tol must be positive")
    if args.eps0 <= 0 or not (0 < args.eps_ratio < 1) or args.eps_steps < 1:
        raise InputError("need eps0 > 0, 0 < eps-ratio < 1 and eps-steps >= 1")
    if args.jobs < 1 or args.random_points < 0:
        raise InputError("--jobs must be positive and --random-points nonnegative")
    if args.command != "selftest" and not args.instance:
        raise InputError(f"--instance is required for '{args.command}'")
    return Config(args.command, args.instance, precision, args.seed, args.eps0, args.eps_ratio,
                  args.eps_steps, args.tol, args.jobs, args.out, args.random_points)


def load_instances(path: str) -> tuple[list[dict], bool]:
    """Instance dicts and whether the file held a single instance."""
    from .pipeline import Instance

    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    single = isinstance(data, dict) and "instances" not in data
    items = [data] if single else data.get("instances", []) if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise InputError("expected an instance object or a list of instances")
    for k, item in enumerate(items):
        Instance.from_dict(item)  # validate up front so bad input exits 2
    return items, single


def run_instance(item: dict, cfg: Config) -> dict:
    from .pipeline import Instance, Seeds

    inst = Instance.from_dict(item)
    if cfg.seed is not None:
        inst.seed = cfg.seed
    precision = cfg.precision or inst.precision or PIPELINE_PRECISION
    seeds = Seeds.derive(inst.seed)
    with mpmath.workprec(precision):
        body = COMMAND_TABLE[cfg.command](inst, cfg, seeds, precision)
    report = {"instance": inst.to_dict(), "assertions": body.pop("assertions")}
    report.update(body)
    report["seeds"] = {"instance": inst.seed, **seeds.to_dict()}
    report["precision"] = precision
    return report


def cmd_spectrum(inst, cfg: Config, seeds, precision: int) -> dict:
    from .bethe import spectrum
    from .pipeline import _assertion, setup

    bethe = setup(inst, seeds)
    spec = spectrum(bethe.U, cfg.tol, seeds.spectrum, precision)
    return {
        "assertions": [
            _assertion("count_equals_dimension", len(spec.reports) == bethe.dimension,
                       count=len(spec.reports), dimension=bethe.dimension),
            _assertion("no_degenerate_eigenspaces", not spec.degenerate, degenerate=spec.degenerate),
            _assertion("all_eigen_residuals", all(r.is_eigenvector for r in spec.reports),
                       max((float(r.residual) for r in spec.reports), default=0.0)),
        ],
        "eigenvectors": [r.to_dict() for r in spec.reports],
    }


def cmd_construct(inst, cfg: Config, seeds, precision: int) -> dict:
    from .pipeline import ConstructionError, _assertion, construct_eigenvector

    if inst.operator is None:
        raise InputError("'construct' needs an 'operator' field in the instance")
    try:
        res = construct_eigenvector(inst.operator, inst.partitions, inst.weight, inst.b, seeds,
                                    precision, cfg.schedule, cfg.tol)
    except ConstructionError as exc:
        return {"assertions": [_assertion("construction", False, error=str(exc))], "details": exc.details}
    return {
        "assertions": [
            _assertion("delta_membership", res.membership.passed),
            _assertion("puiseux_converged", res.limit.converged),
            _assertion("eigen_check", res.eigen.is_eigenvector, res.eigen.residual),
            _assertion("operator_agreement", res.agreement < cfg.tol, res.agreement),
        ],
        "construction": res.to_dict(),
    }


def cmd_verify(inst, cfg: Config, seeds, precision: int) -> dict:
    from .pipeline import verify_bijection, weight_function_checks

    ver = verify_bijection(inst, cfg.tol, seeds, cfg.schedule, precision)
    checks = weight_function_checks(inst.weight, cfg.random_points, inst.seed, precision) if inst.weight.size else []
    return {"assertions": ver["assertions"] + checks, "eigenvectors": ver["eigenvectors"]}


def cmd_completeness(inst, cfg: Config, seeds, precision: int) -> dict:
    from .pipeline import completeness_report

    return completeness_report(inst, 1e-8, seeds, precision, verify=False, schedule=cfg.schedule)


COMMAND_TABLE = {
    "spectrum": cmd_spectrum,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "completeness": cmd_completeness,
}


def selftest(cfg: Config) -> dict:
    """Small built-in checks that need no instance file."""
    import numpy as np

    from .bethe import apply_universal, commutativity_check
    from .pipeline import _assertion, point_checks
    from .repn import ModuleSpace
    from .schubert import RootCoordinates, SchubertPoint
    from .weight import omega

    out = []
    t = RootCoordinates([[Fraction(0), Fraction(1)], [Fraction(3)], [Fraction(7)]])
    w = omega(t).to_dict()
    out.append(_assertion("weight_function_example", w == {"1,3": "1/8", "3,1": "1/12"}))
    space = ModuleSpace(2, [Fraction(0), Fraction(1)])
    eye = np.array([[Fraction(int(a == b)) for b in range(4)] for a in range(4)], dtype=object)
    u = Fraction(5, 2)
    w1 = [1 / (u - z) for z in space.z]
    w2 = [-1 / (u - z) ** 2 for z in space.z]
    e = lambda i, j, a, ws=w1: space.apply_e(i, j, a, ws)  # noqa: E731
    B = apply_universal(space, u, eye)
    B2 = e(1, 1, e(2, 2, eye)) - e(2, 1, e(1, 2, eye)) - e(2, 2, eye, w2)
    out.append(_assertion("rank2_expansion", bool(np.all(B[2] == B2) and np.all(B[1] == -e(1, 1, eye) - e(2, 2, eye)))))
    res = commutativity_check(ModuleSpace(2, [Fraction(0), Fraction(1), Fraction(3)]))
    out.append(_assertion("commutativity_exact", res == 0, res))
    precision = cfg.precision or PIPELINE_PRECISION
    rng = np.random.default_rng(cfg.seed or 0)
    out.extend(point_checks(SchubertPoint.random((2, 1, 0), rng), precision, label="random_point"))
    return {"command": "selftest", "assertions": out, "precision": precision}


def _failed(report: dict) -> bool:
    if "reports" in report:
        return any(_failed(r) for r in report["reports"])
    return not all(a["pass"] for a in report.get("assertions", []))


def _run_one(args: tuple) -> dict:
    item, cfg = args
    return run_instance(item, cfg)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    from .pipeline import InstanceError

    try:
        cfg = make_config(args)
        if cfg.command == "selftest":
            report = selftest(cfg)
        else:
            items, single = load_instances(cfg.instance)
            if cfg.jobs > 1 and len(items) > 1:
                with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                    reports = list(pool.map(_run_one, [(it, cfg) for it in items]))
            else:
                reports = [run_instance(it, cfg) for it in items]
            report = reports[0] if single else {"command": cfg.command, "reports": reports}
    except (InputError, InstanceError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps(report) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if _failed(report):
        print("one or more assertions failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
