"""Shared synthetic texture maps for detector edge-case tests."""
import numpy as np

from slowquench.models import BandField, BzGrid
from slowquench.protocols import QuenchProtocol
from slowquench.texture import SpinTextureMap


def ambiguous_ring_map(n: int = 24) -> SpinTextureMap:
    """A 2D map whose single zero ring has BIS-like residuals on one half
    and SIS-like residuals on the other, with the two half-ring endpoints
    far apart: no consistent classification exists, so detection must
    report the ring as ambiguous and the Chern evaluation must refuse."""
    grid = BzGrid(2, n)
    pts = grid.points()
    kx, ky = pts[..., 0], pts[..., 1]
    values = np.zeros(pts.shape[:-1] + (3,))
    values[..., 0] = np.where(kx > 0.0, 0.3, 1e-4)
    values[..., 2] = kx * kx + ky * ky - 1.0
    return SpinTextureMap(grid=grid, values=values, method="analytic",
                          protocol=QuenchProtocol.coulomb(5.0),
                          model=BandField.qah_2d(m_z=1.0))


def synthetic_dephased_map(model: BandField, grid: BzGrid, g: float) -> SpinTextureMap:
    """Texture built directly from the closed-form dephased average
    -(1 - 2 P(g, theta)) h_hat, bypassing any integration; exact for the
    Coulomb protocol in the long-horizon limit for any band count."""
    from slowquench.landau_zener import transition_probability

    pts = grid.points()
    if grid.dim == 1:
        pts = pts[..., 0]
    f = np.asarray(model.field(pts), dtype=float)
    if f.shape[-1] == 2:
        wide = np.zeros(f.shape[:-1] + (3,))
        wide[..., 0] = f[..., 0]
        wide[..., 2] = f[..., 1]
        f = wide
    mag = np.sqrt(np.sum(f * f, axis=-1))
    if np.any(mag == 0.0):
        raise ValueError("synthetic map hit a gapless point")
    quench_idx = 0 if model.bands == 4 else {"x": 0, "y": 1, "z": 2}[model.quench_axis]
    cos_theta = np.clip(f[..., quench_idx] / mag, -1.0, 1.0)
    p = transition_probability(g, np.arccos(cos_theta))
    values = -(1.0 - 2.0 * np.asarray(p))[..., None] * f / mag[..., None]
    return SpinTextureMap(grid=grid, values=values, method="analytic",
                          protocol=QuenchProtocol.coulomb(g), model=model)
