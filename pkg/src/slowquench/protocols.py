"""Quench protocols: the time dependence of the control term.

Two families are supported. The Coulomb protocol adds g/t to the z component
of the driving field; it diverges at t = 0, so evolution starts at a small
t_start > 0 and the term decays on its own without any switch-off. The
linear protocol ramps beta*t for t < 0 and vanishes afterwards, so the
post-quench Hamiltonian is the bare band field.

Times are in units of 1/energy (hbar = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import ConfigError

COULOMB: Literal["coulomb"] = "coulomb"
LINEAR: Literal["linear"] = "linear"

# numeric codes used by the compiled kernels
KIND_CODES = {COULOMB: 0, LINEAR: 1}


def default_coulomb_t_start(g: float, eps: float) -> float:
    """Starting time for Coulomb evolution when the caller gives none.

    Small enough that the exact ground state of H(t_start) agrees with the
    adiabatic t -> 0 limit to ~1e-5 in any spin component: the admixture of
    the excited level scales like eps*sin(theta)*t_start/(2g), so t_start
    shrinks proportionally to g at small g.
    """
    if eps <= 0.0:
        raise ConfigError(f"field strength must be positive, got {eps}")
    t0 = 1e-3 * min(1.0, 1.0 / eps)
    if g > 0.0:
        t0 = min(t0, 6e-5 * g / eps)
    return t0


@dataclass(frozen=True)
class QuenchProtocol:
    """Quench term shape plus the evolution and averaging windows.

    t_start may be None for the Coulomb kind, meaning "resolve from the
    local field strength at integration time". The averaging window
    [t_avg_begin, t_avg_end] must start at or after t_quench_end; its
    length against the post-quench gap is checked at scan time, where the
    gap over the scanned grid is known. t_avg_end = inf is allowed for the
    linear kind only, where the post-quench evolution is free and the
    long-time average has a closed form.
    """

    kind: Literal["coulomb", "linear"]
    g: float = 0.0
    beta: float = 0.0
    t_start: float | None = None
    t_quench_end: float = 0.0
    t_avg_begin: float = 0.0
    t_avg_end: float = math.inf

    def __post_init__(self):
        if self.kind not in (COULOMB, LINEAR):
            raise ConfigError(f"unknown protocol kind {self.kind!r}")
        if self.kind == COULOMB:
            if self.g < 0.0:
                raise ConfigError(f"Coulomb strength g must be >= 0, got {self.g}")
            if self.t_start is not None and self.t_start <= 0.0:
                raise ConfigError(
                    f"Coulomb evolution must start at t > 0 (g/t diverges), got {self.t_start}"
                )
            if self.t_quench_end < 0.0:
                raise ConfigError("Coulomb t_quench_end must be >= 0")
            if not math.isfinite(self.t_avg_end):
                raise ConfigError(
                    "Coulomb averaging window must be finite (the quench term never switches off)"
                )
        else:
            if self.beta <= 0.0:
                raise ConfigError(f"linear ramp rate beta must be > 0, got {self.beta}")
            if self.t_start is None:
                raise ConfigError("linear protocol requires an explicit t_start < 0")
            if self.t_start >= 0.0:
                raise ConfigError(f"linear ramp starts at t < 0, got t_start={self.t_start}")
            if self.t_quench_end != 0.0:
                raise ConfigError("linear ramp ends at t = 0; set t_quench_end = 0")
        if self.t_avg_begin < self.t_quench_end:
            raise ConfigError(
                f"averaging must start after the quench: t_avg_begin={self.t_avg_begin} "
                f"< t_quench_end={self.t_quench_end}"
            )
        if self.t_avg_end <= self.t_avg_begin:
            raise ConfigError("empty averaging window")

    @classmethod
    def coulomb(
        cls,
        g: float,
        *,
        t_start: float | None = None,
        t_avg_begin: float = 200.0,
        t_avg_end: float = 400.0,
    ) -> "QuenchProtocol":
        return cls(
            kind=COULOMB,
            g=g,
            t_start=t_start,
            t_quench_end=t_avg_begin,
            t_avg_begin=t_avg_begin,
            t_avg_end=t_avg_end,
        )

    @classmethod
    def linear(
        cls,
        beta: float,
        t_start: float,
        *,
        t_avg_begin: float = 0.0,
        t_avg_end: float = math.inf,
    ) -> "QuenchProtocol":
        return cls(
            kind=LINEAR,
            beta=beta,
            t_start=t_start,
            t_quench_end=0.0,
            t_avg_begin=t_avg_begin,
            t_avg_end=t_avg_end,
        )

    @property
    def coupling(self) -> float:
        return self.g if self.kind == COULOMB else self.beta

    @property
    def kind_code(self) -> int:
        return KIND_CODES[self.kind]

    def resolve_t_start(self, eps: float) -> float:
        """Concrete starting time for a field of strength eps."""
        if self.t_start is not None:
            return self.t_start
        if self.kind == LINEAR:
            raise ConfigError("linear protocol requires an explicit t_start")
        return default_coulomb_t_start(self.g, eps)

    def with_t_start(self, t_start: float) -> "QuenchProtocol":
        return replace(self, t_start=t_start)

    def quench_term(self, t):
        """Control-field contribution at time t (scalar or array)."""
        if self.kind == COULOMB:
            if self.g == 0.0:
                return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
            return self.g / t
        return self.beta * np.minimum(t, 0.0)
