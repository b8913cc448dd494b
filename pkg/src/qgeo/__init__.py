"""Chart-based numerical conformal submanifold geometry.

Jet (truncated Taylor) arithmetic, curvature of metrics given in
coordinates, extrinsic/intrinsic geometry of immersed submanifolds, the
scalar conformal invariants built from them, conformal-change verification,
Gauss–Bonnet-type integral checks, and renormalized area of explicit
hyperbolic models.
"""

from .conformal import (
    ConformalFactor,
    LinearizationReport,
    check_invariance,
    check_q_transformation,
    linear_independence_witness,
    linearize,
    rescale,
)
from .jets import BudgetError, Jets, compose, jet_of, max_jet_order
from .tensors import LabeledTensor, Slot, contract, sym_antisym

__all__ = [
    "BudgetError",
    "ConformalFactor",
    "Jets",
    "LabeledTensor",
    "LinearizationReport",
    "Slot",
    "check_invariance",
    "check_q_transformation",
    "compose",
    "contract",
    "jet_of",
    "linear_independence_witness",
    "linearize",
    "max_jet_order",
    "rescale",
    "sym_antisym",
]
