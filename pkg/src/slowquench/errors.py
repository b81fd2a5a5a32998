"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, numerical failures
(IntegrationError, ConvergenceError, PreAsymptoticError, ScanError,
GeometryError, IllConditionedError) -> 3, AmbiguousTopologyError -> 4.
"""
from __future__ import annotations


class SlowquenchError(Exception):
    """Base class for package errors."""


class ConfigError(SlowquenchError):
    """Invalid or inconsistent configuration input."""


class ConvergenceError(SlowquenchError):
    """A series or iteration failed to reach its target accuracy."""


class PreAsymptoticError(SlowquenchError):
    """Asymptotic closed forms requested at a time before they apply."""


class IntegrationError(SlowquenchError):
    """Adaptive integration failed (step underflow, step budget, ...)."""


class ScanError(SlowquenchError):
    """Too many grid points failed during a texture scan."""

    def __init__(self, message: str, failures: list | None = None):
        super().__init__(message)
        self.failures = failures or []


class GeometryError(SlowquenchError):
    """A detected zero set has inconsistent geometry (open surface, ...)."""


class IllConditionedError(SlowquenchError):
    """An invariant extraction is ill conditioned (texture too small)."""


class AmbiguousTopologyError(SlowquenchError):
    """A zero set could not be classified as BIS or SIS."""
