"""Decoherence of a charged particle on a noncommutative plane in a magnetic field."""

from .operators import HilbertSpec, NCParams, bopp_shift, build_canonical_ops
from .model import CouplingMatrices, FieldSchedule, build_effective_interaction, compute_effective_coefficients
from .dynamics import CompositeState, evolve, reduce_system
from .diagnostics import Regime, classify_regime, coherence_l1, extract_decoherence_time

__all__ = [
    "HilbertSpec",
    "NCParams",
    "bopp_shift",
    "build_canonical_ops",
    "CouplingMatrices",
    "FieldSchedule",
    "build_effective_interaction",
    "compute_effective_coefficients",
    "CompositeState",
    "evolve",
    "reduce_system",
    "Regime",
    "classify_regime",
    "coherence_l1",
    "extract_decoherence_time",
]
