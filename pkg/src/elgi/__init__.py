"""Entropic Leggett-Garg inequalities for driven spin-j systems.

Exact sequential-measurement statistics built on a numerically stable
Wigner rotation-matrix kernel, Shannon-cone inequality generation with
exact rational arithmetic, uniform semiclassical (Airy) asymptotics, and
reproducible scan drivers with a command-line front end.
"""

__version__ = "0.1.0"

from .wigner import DMatrix, Spin, d_element_series, d_matrix
from .temporal import (
    EntropyVector,
    InitialState,
    JointDistribution,
    Schedule,
    entropy_vector,
    joint_distribution,
    mixed_entropy_vector,
    shannon_entropy,
    wigner_entropy,
)
from .cone import (
    Inequality,
    InequalityFamily,
    ViolationReport,
    elemental_inequalities,
    evaluate,
    project_to_order,
    remove_redundant,
)
from .semiclassics import WkbElement, airy_ai, d_wkb, entropy_asymptotic

__all__ = [
    "__version__",
    "Spin",
    "DMatrix",
    "d_matrix",
    "d_element_series",
    "Schedule",
    "InitialState",
    "JointDistribution",
    "EntropyVector",
    "joint_distribution",
    "shannon_entropy",
    "wigner_entropy",
    "entropy_vector",
    "mixed_entropy_vector",
    "Inequality",
    "InequalityFamily",
    "ViolationReport",
    "elemental_inequalities",
    "project_to_order",
    "remove_redundant",
    "evaluate",
    "WkbElement",
    "airy_ai",
    "d_wkb",
    "entropy_asymptotic",
]
