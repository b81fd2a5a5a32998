"""Closed-form solutions of the slow two-level quench problem.

The Hamiltonian is H(t) = (q(t) + eps cos(theta)) sigma_z
+ eps sin(theta) (cos(phi) sigma_x + sin(phi) sigma_y) with a Coulomb
quench term q(t) = g/t. Everything here is analytic: the transition
probability, the time-averaged spin, the exact spinor built from
confluent hypergeometric functions, and the asymptotic amplitudes with
their relative phase. The numeric integrators provide the independent
cross-check for each of these.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .errors import ConfigError, PreAsymptoticError
from .kummer import kummer_m, kummer_m_and_diff

__all__ = [
    "LzParams", "AmplitudePair", "AxisCanonicalization",
    "transition_probability", "averaged_spin", "kummer_m",
    "wavefunction_at", "final_amplitudes", "canonicalize_axis",
]

ASYMPTOTIC_TIME = 20.0

# canonical_field[j] = field[_TO_CANONICAL[axis][j]]; cyclic, so handedness
# is preserved and the quenched component always lands on canonical z
_TO_CANONICAL = {"z": (0, 1, 2), "y": (2, 0, 1), "x": (1, 2, 0)}


@dataclass(frozen=True)
class LzParams:
    """Parameters of the canonical-frame two-level quench."""

    g: float
    epsilon: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.g < 0.0:
            raise ConfigError(f"quench parameter g must be >= 0, got {self.g}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"field magnitude must be > 0, got {self.epsilon}")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"polar angle must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    @property
    def n(self) -> np.ndarray:
        """Unit vector of the final field."""
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi),
                         math.cos(self.theta)])


@dataclass(frozen=True)
class AmplitudePair:
    """Asymptotic band amplitudes |p+|, |p-| and their relative phase."""

    p_plus_mag: float
    p_minus_mag: float
    rel_phase: float
    phi0: float

    def __post_init__(self):
        total = self.p_plus_mag ** 2 + self.p_minus_mag ** 2
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"amplitudes must conserve probability, sum {total}")


@dataclass(frozen=True)
class AxisCanonicalization:
    """A quench along x or y rewritten as the canonical z-axis problem."""

    params: LzParams
    axis: str
    permutation: tuple

    def restore(self, vec):
        """Map a canonical-frame 3-vector back to the original frame."""
        v = np.asarray(vec)
        return np.stack([v[..., j] for j in self.permutation], axis=-1)


def transition_probability(g, theta):
    """Probability of ending in the other band after a Coulomb quench.

    Vectorized over g and theta. Written with expm1 so the small-g and
    small-angle regimes lose no precision; the g = 0 limit sin^2(theta/2)
    is taken analytically.
    """
    g_arr = np.asarray(g, dtype=float)
    th = np.asarray(theta, dtype=float)
    if np.any(g_arr < 0.0):
        raise ConfigError("quench parameter g must be >= 0")
    if np.any(th < 0.0) or np.any(th > math.pi):
        raise ConfigError("polar angle must lie in [0, pi]")
    g_b, th_b = np.broadcast_arrays(g_arr, th)
    sudden = g_b == 0.0
    safe_g = np.where(sudden, 1.0, g_b)
    a = 2.0 * math.pi * safe_g * (1.0 + np.cos(th_b))
    b = 4.0 * math.pi * safe_g
    p = 1.0 - np.expm1(-a) / np.expm1(-b)
    p = np.where(sudden, np.sin(0.5 * th_b) ** 2, p)
    p = np.clip(p, 0.0, 1.0)
    if p.ndim == 0:
        return float(p)
    return p


def averaged_spin(params: LzParams) -> np.ndarray:
    """Infinite-time average of the spin for the ground-state start:
    -(1 - 2P) n, antiparallel to the final field until P crosses 1/2."""
    p = transition_probability(params.g, params.theta)
    return -(1.0 - 2.0 * p) * params.n


def _kummer_args(g: float, theta: float, eps: float, t: float):
    a = -1j * g * (1.0 + math.cos(theta))
    b = -2j * g
    z = -2j * eps * t
    return a, b, z


def _spinor_components(params: LzParams, t: float):
    """Unnormalized (u, v) of the (1,0) start in the phi = 0 frame."""
    g, eps, theta = params.g, params.epsilon, params.theta
    prefactor = cmath.exp(-1j * g * math.log(t) + 1j * eps * t)
    if g == 0.0:
        # no quench term: plain rotation about the final field
        u = math.cos(eps * t) - 1j * math.sin(eps * t) * math.cos(theta)
        v = -1j * math.sin(eps * t) * math.sin(theta)
        return u, v
    if math.sin(theta) < 1e-15:
        # field parallel to the quench axis: the levels never couple
        if theta < math.pi / 2.0:
            return prefactor * cmath.exp(-2j * eps * t), 0.0 + 0.0j
        return prefactor, 0.0 + 0.0j
    a, b, z = _kummer_args(g, theta, eps, t)
    m, diff = kummer_m_and_diff(a, b, z)
    u = prefactor * m
    v = prefactor * diff / math.tan(0.5 * theta)
    return u, v


def wavefunction_at(params: LzParams, t: float, start: str = "excited") -> np.ndarray:
    """Exact state at time t > 0, as a normalized 2-spinor.

    start="excited" is the (1,0) state at t -> 0+ (the upper level of the
    diverging quench term); start="ground" is the (0,1) start, obtained
    from the excited solution at phi + pi through the antiunitary map
    (u, v) -> (v*, u*), which preserves the quench term.
    """
    if not t > 0.0:
        raise ConfigError(f"time must be > 0, got {t}")
    u0, v0 = _spinor_components(params, t)
    if start == "excited":
        psi = np.array([u0, v0 * cmath.exp(1j * params.phi)])
    elif start == "ground":
        psi = np.array([-cmath.exp(-1j * params.phi) * np.conj(v0), np.conj(u0)])
    else:
        raise ConfigError(f"start must be 'excited' or 'ground', got {start!r}")
    return psi / np.linalg.norm(psi)


def final_amplitudes(params: LzParams, t: float) -> AmplitudePair:
    """Band amplitudes and their relative phase deep in the asymptotic
    regime (eps t >= 20; earlier times raise PreAsymptoticError).

    The relative phase is -2 eps t - 2 g cos(theta) ln(t) + phi0 with the
    constant phi0 assembled from gamma-function arguments; phi0 vanishes
    when the levels are uncoupled (sin(theta) = 0) or for g = 0.
    """
    g, eps, theta = params.g, params.epsilon, params.theta
    if eps * t < ASYMPTOTIC_TIME:
        raise PreAsymptoticError(
            f"asymptotic amplitudes need eps*t >= {ASYMPTOTIC_TIME}, "
            f"got {eps * t:.6g}")
    p = transition_probability(g, theta)
    if g == 0.0 or math.sin(theta) < 1e-15:
        phi0 = 0.0
    else:
        a = -1j * g * (1.0 + math.cos(theta))
        b = -2j * g
        phi0 = (loggamma(1.0 + b).imag - loggamma(1.0 + a).imag
                - loggamma(b).imag + loggamma(b - a).imag
                - 2.0 * g * math.cos(theta) * math.log(2.0 * eps))
    rel = -2.0 * eps * t - 2.0 * g * math.cos(theta) * math.log(t) + phi0
    return AmplitudePair(p_plus_mag=math.sqrt(1.0 - p), p_minus_mag=math.sqrt(p),
                         rel_phase=rel, phi0=phi0)


def canonicalize_axis(field, quench_axis: str, g: float = 0.0) -> AxisCanonicalization:
    """Rewrite a quench along any Cartesian axis as the canonical z-axis
    problem via a cyclic component relabeling.

    The returned permutation maps canonical-frame vectors back to the
    original frame (AxisCanonicalization.restore), so averaged spins
    computed in the canonical frame can be compared componentwise.
    """
    if quench_axis not in _TO_CANONICAL:
        raise ConfigError(f"quench axis must be one of x, y, z, got {quench_axis!r}")
    f = np.asarray(field, dtype=float).reshape(-1)
    if f.shape[0] == 2:
        f = np.array([f[0], 0.0, f[1]])
    if f.shape[0] != 3:
        raise ConfigError(f"expected a 3-component field, got {f.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise ConfigError("static field must be finite")
    eps = float(np.linalg.norm(f))
    if eps == 0.0:
        raise ConfigError("zero static field leaves the final direction undefined")
    fwd = _TO_CANONICAL[quench_axis]
    canonical = f[list(fwd)]
    inverse = tuple(int(np.argwhere(np.array(fwd) == i)[0, 0]) for i in range(3))
    theta = math.acos(max(-1.0, min(1.0, canonical[2] / eps)))
    phi = math.atan2(canonical[1], canonical[0])
    params = LzParams(g=g, epsilon=eps, theta=theta, phi=phi)
    return AxisCanonicalization(params=params, axis=quench_axis, permutation=inverse)
