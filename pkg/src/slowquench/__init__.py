"""Slow-quench two-level dynamics and quench-induced topological textures."""

from .config import ExperimentConfig, SingleRunSpec
from .errors import (AmbiguousTopologyError, ConfigError, ConvergenceError,
                     GeometryError, IllConditionedError, IntegrationError,
                     PreAsymptoticError, ScanError, SlowquenchError)
from .landau_zener import (LzParams, averaged_spin, canonicalize_axis,
                           final_amplitudes, transition_probability,
                           wavefunction_at)
from .models import BandField, BzGrid, expected_invariant
from .protocols import QuenchProtocol
from .texture import SpinTextureMap, compare_methods, scan
from .topology import (InvariantResult, ZeroSet, chern_2d,
                       chern_on_bis_sphere, find_zero_sets,
                       sis_locus_predict, winding_1d)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousTopologyError", "BandField", "BzGrid", "ConfigError",
    "ConvergenceError", "ExperimentConfig", "GeometryError",
    "IllConditionedError", "IntegrationError", "InvariantResult", "LzParams",
    "PreAsymptoticError", "QuenchProtocol", "ScanError", "SingleRunSpec",
    "SlowquenchError", "SpinTextureMap", "ZeroSet", "averaged_spin",
    "canonicalize_axis", "chern_2d", "chern_on_bis_sphere", "compare_methods",
    "expected_invariant", "final_amplitudes", "find_zero_sets", "scan",
    "sis_locus_predict", "transition_probability", "wavefunction_at",
    "winding_1d",
]
