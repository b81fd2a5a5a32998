"""Momentum-space band models, gamma-matrix algebra and Brillouin-zone grids.

Three families, all with t0 = 1 as the natural unit:

* 1D chiral chain: two bands, field (h_x, h_z) = (t_so sin k, m_z - t0 cos k).
* 2D anomalous-Hall model: (h_x, h_y, h_z) = (m_x + t_so_x sin k_x,
  m_y + t_so_y sin k_y, m_z - t0 cos k_x - t0 cos k_y).
* 3D four-band model: h0 = m_z - t0 sum cos k_i, h_i = t_so sin k_i.

The quench protocol adds its time-dependent term to the component named by
quench_axis (two-band) or to h0 (four-band).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError
from .protocols import QuenchProtocol

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_TX = _SX
_TZ = _SZ


@dataclass(frozen=True)
class GammaBasis:
    """Mutually anticommuting Hermitian generators of a band Hamiltonian."""

    dim: int
    matrices: tuple

    @classmethod
    def pauli(cls) -> "GammaBasis":
        return cls(dim=2, matrices=(_SX.copy(), _SY.copy(), _SZ.copy()))

    @classmethod
    def dirac(cls) -> "GammaBasis":
        # gamma0 = sz x tx, gamma1 = sx x 1, gamma2 = sy x 1, gamma3 = sz x tz
        return cls(
            dim=4,
            matrices=(
                np.kron(_SZ, _TX),
                np.kron(_SX, _I2),
                np.kron(_SY, _I2),
                np.kron(_SZ, _TZ),
            ),
        )

    def hamiltonian(self, components) -> np.ndarray:
        """H = sum_i h_i gamma_i for one field vector."""
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for c, gamma in zip(components, self.matrices):
            h += c * gamma
        return h


PAULI = GammaBasis.pauli()
DIRAC = GammaBasis.dirac()


@dataclass(frozen=True)
class BandField:
    """A lattice band model: dimensionality, band count and its constants.

    quench_axis names the field component the protocol term is added to;
    four-band models always drive h0 and ignore the setting.
    """

    dim: int
    bands: int
    t0: float = 1.0
    t_so: float = 0.0
    t_so_x: float = 0.0
    t_so_y: float = 0.0
    m_x: float = 0.0
    m_y: float = 0.0
    m_z: float = 0.0
    quench_axis: Literal["x", "y", "z"] = "z"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.bands not in (2, 4):
            raise ConfigError(f"bands must be 2 or 4, got {self.bands}")
        if self.dim == 3 and self.bands != 4:
            raise ConfigError("the 3D model is four-band")
        if self.dim in (1, 2) and self.bands != 2:
            raise ConfigError("the 1D and 2D models are two-band")
        if self.t0 <= 0.0:
            raise ConfigError(f"hopping t0 must be positive, got {self.t0}")
        for name in ("t_so", "t_so_x", "t_so_y"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"spin-orbit amplitude {name} must be >= 0")
        if self.quench_axis not in ("x", "y", "z"):
            raise ConfigError(f"quench_axis must be x, y or z, got {self.quench_axis!r}")
        if self.dim == 1 and self.quench_axis == "y":
            raise ConfigError("the 1D field has no y component to drive")

    @classmethod
    def chain_1d(cls, m_z: float = 0.0, t_so: float = 0.2, t0: float = 1.0,
                 quench_axis: Literal["x", "z"] = "z") -> "BandField":
        return cls(dim=1, bands=2, t0=t0, t_so=t_so, m_z=m_z, quench_axis=quench_axis)

    @classmethod
    def qah_2d(cls, m_z: float, t_so_x: float = 0.2, t_so_y: float = 0.2,
               m_x: float = 0.0, m_y: float = 0.0, t0: float = 1.0,
               quench_axis: Literal["x", "y", "z"] = "z") -> "BandField":
        return cls(dim=2, bands=2, t0=t0, t_so_x=t_so_x, t_so_y=t_so_y,
                   m_x=m_x, m_y=m_y, m_z=m_z, quench_axis=quench_axis)

    @classmethod
    def chiral_3d(cls, m_z: float, t_so: float = 0.2, t0: float = 1.0) -> "BandField":
        return cls(dim=3, bands=4, t0=t0, t_so=t_so, m_z=m_z)

    @property
    def gamma(self) -> GammaBasis:
        return PAULI if self.bands == 2 else DIRAC

    def field(self, k, t: float | None = None,
              protocol: QuenchProtocol | None = None) -> np.ndarray:
        if self.dim == 1:
            return field_1d(k, self, t, protocol)
        if self.dim == 2:
            return field_2d(k, self, t, protocol)
        return field_3d(k, self, t, protocol)


def _quench_value(model: BandField, t, protocol: QuenchProtocol | None):
    if t is None:
        return None
    if protocol is None:
        raise ConfigError("a time was given without a protocol to interpret it")
    return protocol.quench_term(t)


def field_1d(k, model: BandField, t: float | None = None,
             protocol: QuenchProtocol | None = None) -> np.ndarray:
    """(h_x, h_z) at momentum k (scalar or any array shape -> shape + (2,))."""
    k = np.asarray(k, dtype=float)
    q = _quench_value(model, t, protocol)
    hx = model.t_so * np.sin(k)
    hz = model.m_z - model.t0 * np.cos(k)
    if q is not None:
        if model.quench_axis == "z":
            hz = hz + q
        else:
            hx = hx + q
    return np.stack([hx, hz], axis=-1)


def field_2d(k, model: BandField, t: float | None = None,
             protocol: QuenchProtocol | None = None) -> np.ndarray:
    """(h_x, h_y, h_z) at k of shape (..., 2) -> (..., 3)."""
    k = np.asarray(k, dtype=float)
    q = _quench_value(model, t, protocol)
    kx = k[..., 0]
    ky = k[..., 1]
    hx = model.m_x + model.t_so_x * np.sin(kx)
    hy = model.m_y + model.t_so_y * np.sin(ky)
    hz = model.m_z - model.t0 * (np.cos(kx) + np.cos(ky))
    if q is not None:
        if model.quench_axis == "x":
            hx = hx + q
        elif model.quench_axis == "y":
            hy = hy + q
        else:
            hz = hz + q
    return np.stack([hx, hy, hz], axis=-1)


def field_3d(k, model: BandField, t: float | None = None,
             protocol: QuenchProtocol | None = None) -> np.ndarray:
    """(h0, h1, h2, h3) at k of shape (..., 3) -> (..., 4); the quench
    term drives h0."""
    k = np.asarray(k, dtype=float)
    q = _quench_value(model, t, protocol)
    h0 = model.m_z - model.t0 * np.cos(k).sum(axis=-1)
    if q is not None:
        h0 = h0 + q
    hso = model.t_so * np.sin(k)
    return np.concatenate([h0[..., None], hso], axis=-1)


@dataclass(frozen=True)
class BzGrid:
    """Uniform grid k_j = -pi + 2 pi j / N per axis, row-major ordering."""

    dim: int
    n_points: tuple

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigError(f"grid dim must be 1, 2 or 3, got {self.dim}")
        n = self.n_points
        if isinstance(n, int):
            n = (n,) * self.dim
        if len(n) != self.dim:
            raise ConfigError(f"need {self.dim} axis sizes, got {n}")
        if any(m < 4 for m in n):
            raise ConfigError(f"at least 4 points per axis required, got {n}")
        object.__setattr__(self, "n_points", tuple(int(m) for m in n))

    @property
    def shape(self) -> tuple:
        return self.n_points

    def axis(self, i: int) -> np.ndarray:
        n = self.n_points[i]
        return -np.pi + 2.0 * np.pi * np.arange(n) / n

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.dim)]

    def points(self) -> np.ndarray:
        """All momenta, shape n_points + (dim,), row-major."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def spacing(self, i: int = 0) -> float:
        return 2.0 * np.pi / self.n_points[i]


def expected_invariant(model: BandField) -> int:
    """Phase-diagram lookup for the post-quench model; test oracle only.

    Raises at gap closings, where no integer is defined.
    """
    m = model.m_z / model.t0
    if model.dim == 1:
        if abs(abs(m) - 1.0) < 1e-12:
            raise ConfigError(f"gap closes at m_z = +-t0 (m_z/t0 = {m})")
        return 1 if abs(m) < 1.0 else 0
    if model.dim == 2:
        if min(abs(m), abs(abs(m) - 2.0)) < 1e-12:
            raise ConfigError(f"gap closes at m_z in {{0, +-2 t0}} (m_z/t0 = {m})")
        if 0.0 < m < 2.0:
            return -1
        if -2.0 < m < 0.0:
            return 1
        return 0
    if min(abs(abs(m) - 1.0), abs(abs(m) - 3.0)) < 1e-12:
        raise ConfigError(f"gap closes at m_z in {{+-t0, +-3 t0}} (m_z/t0 = {m})")
    if abs(m) > 3.0:
        return 0
    if abs(m) < 1.0:
        return 2
    return -1
