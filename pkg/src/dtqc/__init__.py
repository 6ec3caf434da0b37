"""Exact simulation of Rydberg-blockaded chains under two incommensurate
Floquet kick trains, with the observables and spectral tools needed to
identify discrete time quasi-crystal response."""
from .basis import ConstrainedBasis, SiteConfiguration, enumerate_basis, named_state
from .errors import DTQCError
from .kernels import BACKEND as KERNEL_BACKEND
from .model import GOLDEN_RATIO, ChainParameters, build_kick_schedule, build_pxp, kick_phases
from .propagator import StateVector, Trajectory, decompose, run

__all__ = [
    "ChainParameters",
    "ConstrainedBasis",
    "DTQCError",
    "GOLDEN_RATIO",
    "KERNEL_BACKEND",
    "SiteConfiguration",
    "StateVector",
    "Trajectory",
    "build_kick_schedule",
    "build_pxp",
    "decompose",
    "enumerate_basis",
    "kick_phases",
    "named_state",
    "run",
]

__version__ = "0.1.0"
