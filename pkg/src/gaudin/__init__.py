"""Bethe eigenvectors of the gl_N Gaudin model and Fuchsian operators with polynomial kernels."""
from .bethe import EigenReport, UniversalOperator, eigen_check, spectrum, universal_operator
from .diffop import ScalarDiffOp, delta_membership
from .numeric import Polynomial, RationalFunction
from .pipeline import Instance, completeness_report, construct_eigenvector, verify_bijection
from .repn import ModuleSpace, Partition, WeightVector
from .schubert import RootCoordinates, SchubertPoint
from .weight import omega

__version__ = "0.1.0"

__all__ = [
    "EigenReport",
    "Instance",
    "ModuleSpace",
    "Partition",
    "Polynomial",
    "RationalFunction",
    "RootCoordinates",
    "ScalarDiffOp",
    "SchubertPoint",
    "UniversalOperator",
    "WeightVector",
    "completeness_report",
    "construct_eigenvector",
    "delta_membership",
    "eigen_check",
    "omega",
    "spectrum",
    "universal_operator",
    "verify_bijection",
]
