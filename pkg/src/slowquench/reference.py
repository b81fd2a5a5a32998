"""Independent brute-force invariants of post-quench Hamiltonians.

These never look at quench dynamics or textures: they integrate the
static band geometry directly and serve as the ground truth the
texture-based detectors are validated against.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .integrators import ground_state_two_level
from .models import BandField

__all__ = ["winding_oracle_1d", "chern_oracle_2d"]


def winding_oracle_1d(model: BandField, n: int = 10001) -> int:
    """Angle-accumulation winding of the post-quench (h_x, h_z) loop.

    Convention: the accumulated angle of atan2(h_z, h_x) as k runs from
    -pi to pi, divided by 2 pi. The m_z = 0 chain winds +1 under it.
    """
    if model.dim != 1 or model.bands != 2:
        raise ConfigError("winding oracle needs a 1D two-band model")
    k = np.linspace(-np.pi, np.pi, n)
    f = model.field(k)
    phi = np.unwrap(np.arctan2(f[..., 1], f[..., 0]))
    total = phi[-1] - phi[0]
    nu = total / (2.0 * np.pi)
    if abs(nu - round(nu)) > 1e-6:
        raise ConfigError(f"winding did not close: {nu}")
    return int(round(nu))


def _lower_band_states(model: BandField, n: int) -> np.ndarray:
    k = -np.pi + 2.0 * np.pi * np.arange(n) / n
    kx, ky = np.meshgrid(k, k, indexing="ij")
    pts = np.stack([kx, ky], axis=-1)
    f = model.field(pts)
    states = np.empty((n, n, 2), dtype=complex)
    for i in range(n):
        for j in range(n):
            states[i, j] = ground_state_two_level(*f[i, j])
    return states


def chern_oracle_2d(model: BandField, n: int = 101) -> int:
    """Lattice field-strength (plaquette Berry flux) Chern number of the
    post-quench lower band, on an n x n periodic grid.

    Sign pinned so the anomalous-Hall model at m_z = +t0 gives -1,
    matching the reference phase diagram; gauge-invariant by
    construction, exact integer for any gapped input.
    """
    if model.dim != 2 or model.bands != 2:
        raise ConfigError("Chern oracle needs a 2D two-band model")
    u = _lower_band_states(model, n)
    link_x = np.einsum("ijc,ijc->ij", u.conj(), np.roll(u, -1, axis=0))
    link_y = np.einsum("ijc,ijc->ij", u.conj(), np.roll(u, -1, axis=1))
    plaq = (link_x * np.roll(link_y, -1, axis=0)
            * np.roll(link_x, -1, axis=1).conj() * link_y.conj())
    flux = np.angle(plaq)
    # overall sign pins the Berry-connection convention to the phase
    # diagram (m_z = +t0 in the -1 phase)
    total = -flux.sum() / (2.0 * np.pi)
    if abs(total - round(total)) > 1e-6:
        raise ConfigError(f"plaquette fluxes did not quantize: {total}")
    return int(round(total))
