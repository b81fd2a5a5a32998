"""Brillouin-zone sweeps assembling time-averaged spin-texture maps.

Each grid point is an independent quench problem: solved in closed form
for two-band Coulomb protocols, numerically otherwise. Numeric values
estimate the dephased long-time average: propagate through the quench,
then project onto the band subspaces (parallel-transported to the
post-quench frame), which removes the finite-horizon bias of a direct
windowed mean. Work is partitioned per point with a fixed reduction
order, so results are bit-identical for any thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .errors import ConfigError, IntegrationError, ScanError
from .integrators import (AXIS_INDEX, MAX_STEPS, _check_tol, _max_step,
                          ground_pair_four_level, ground_state_two_level)
from .landau_zener import transition_probability
from .models import DIRAC, BandField, BzGrid
from .protocols import COULOMB, QuenchProtocol

DEFAULT_GRID_POINTS = {1: 201, 2: 101, 3: 41}
MAX_FAILURE_FRACTION = 1e-3
_SUDDEN_FIELD = 1e12

# ordered transverse pair per quench axis: cyclic, handedness-preserving
_TRANSVERSE = {"z": (0, 1), "y": (2, 0), "x": (1, 2)}


@dataclass(frozen=True)
class SpinTextureMap:
    """Time-averaged polarization vector at every grid point.

    values has shape grid.shape + (3,) for two-band models (Pauli
    expectations) or + (4,) for the four-band model (gamma expectations);
    failed points hold NaN and are listed in failures as (index, message).
    """

    grid: BzGrid
    values: np.ndarray
    method: str
    protocol: QuenchProtocol
    model: BandField
    failures: tuple = dc_field(default_factory=tuple)

    @property
    def quench_index(self) -> int:
        if self.model.bands == 4:
            return 0
        return AXIS_INDEX[self.model.quench_axis]

    @property
    def transverse_indices(self) -> tuple:
        if self.model.bands == 4:
            return (1, 2, 3)
        return _TRANSVERSE[self.model.quench_axis]

    def quench_component(self) -> np.ndarray:
        """The averaged component along the quenched axis; its zeros are
        the BIS/SIS candidates."""
        return self.values[..., self.quench_index]

    def transverse_magnitude(self) -> np.ndarray:
        comps = self.values[..., list(self.transverse_indices)]
        return np.sqrt(np.sum(comps * comps, axis=-1))


@dataclass(frozen=True)
class MethodComparison:
    """Componentwise residuals between analytic and numeric scans."""

    max_residual: float
    mean_residual: float
    component_max: tuple
    flagged: bool


def _resolve_method(method: str, model: BandField, protocol: QuenchProtocol) -> str:
    analytic_ok = model.bands == 2 and protocol.kind == COULOMB
    if method == "auto":
        return "analytic" if analytic_ok else "numeric"
    if method == "analytic" and not analytic_ok:
        raise ConfigError(
            "analytic textures exist only for two-band models under the "
            "Coulomb protocol")
    if method not in ("analytic", "numeric"):
        raise ConfigError(f"method must be analytic, numeric or auto, got {method!r}")
    return method


def _widen(f: np.ndarray) -> np.ndarray:
    """1D model fields are (h_x, h_z); lift to (h_x, 0, h_z)."""
    if f.shape[-1] == 2:
        out = np.zeros(f.shape[:-1] + (3,))
        out[..., 0] = f[..., 0]
        out[..., 2] = f[..., 1]
        return out
    return f


def _scan_analytic(model: BandField, grid: BzGrid, protocol: QuenchProtocol):
    pts = grid.points()
    if grid.dim == 1:
        pts = pts[..., 0]
    f = _widen(model.field(pts))
    mag = np.sqrt(np.sum(f * f, axis=-1))
    bad = mag == 0.0
    safe = np.where(bad, 1.0, mag)
    cos_theta = np.clip(f[..., AXIS_INDEX[model.quench_axis]] / safe, -1.0, 1.0)
    p = transition_probability(protocol.g, np.arccos(cos_theta))
    values = -(1.0 - 2.0 * np.asarray(p))[..., None] * f / safe[..., None]
    failures = []
    if np.any(bad):
        values[bad] = np.nan
        failures = [(idx, "gapless point: field magnitude is zero")
                    for idx in np.argwhere(bad)]
    return values, [(tuple(int(i) for i in idx), msg) for idx, msg in failures]


def _band_projectors(h: np.ndarray):
    """Upper/lower projectors of sum_i h_i gamma_i; H^2 = |h|^2 by
    anticommutation, so P_pm = (1 pm H/|h|)/2."""
    e = float(np.linalg.norm(h))
    if e == 0.0:
        raise IntegrationError("gapless point: band projectors undefined")
    ham = DIRAC.hamiltonian(h)
    eye = np.eye(4, dtype=complex)
    upper = 0.5 * (eye + ham / e)
    return upper, eye - upper, e


def _transported_measure(rho: np.ndarray, h_end, h_post) -> np.ndarray:
    """Dephased <gamma_i> in the post-quench frame, with band subspaces of
    H(h_end) parallel-transported (polar factor) onto those of H(h_post).
    Second-order accurate in the residual quench term at the horizon."""
    p_up_e, p_dn_e, _ = _band_projectors(h_end)
    p_up_p, p_dn_p, _ = _band_projectors(h_post)
    out = np.zeros(4)
    for pe, pp in ((p_up_e, p_up_p), (p_dn_e, p_dn_p)):
        # polar factor of P_post P_end: unitary on the band subspace
        u, _, vh = np.linalg.svd(pp @ pe)
        w = (u[:, :2] * 1.0) @ vh[:2, :]
        block = w @ rho @ w.conj().T
        for i, gam in enumerate(DIRAC.matrices):
            out[i] += float(np.trace(pp @ block @ pp @ gam).real)
    return out


def _windowed_four_level(rho: np.ndarray, h_post, window) -> np.ndarray:
    """Exact finite-window average of <gamma_i> under the constant
    post-quench Hamiltonian, starting from rho at t = 0."""
    p_up, p_dn, e = _band_projectors(h_post)
    t1, t2 = float(window[0]), float(window[1])
    out = np.zeros(4)
    static_up = p_up @ rho @ p_up
    static_dn = p_dn @ rho @ p_dn
    cross = p_up @ rho @ p_dn
    w = 2.0 * e
    phase = (np.exp(-1j * w * t2) - np.exp(-1j * w * t1)) / (-1j * w * (t2 - t1))
    for i, gam in enumerate(DIRAC.matrices):
        out[i] = float(np.trace((static_up + static_dn) @ gam).real)
        out[i] += 2.0 * (phase * np.trace(gam @ cross)).real
    return out


def _sudden_axis_state(model: BandField) -> np.ndarray:
    """Two-level g = 0 start: ground of the diverging quench field."""
    unit = [0.0, 0.0, 0.0]
    unit[AXIS_INDEX[model.quench_axis]] = 1.0
    return ground_state_two_level(*unit)


def _point_two_band(model: BandField, protocol: QuenchProtocol, k, tol: float):
    f = np.asarray(model.field(np.asarray(k, dtype=float)), dtype=float).reshape(-1)
    if f.shape[0] == 2:
        f = np.array([f[0], 0.0, f[1]])
    hx, hy, hz = float(f[0]), float(f[1]), float(f[2])
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    if eps == 0.0:
        raise IntegrationError("gapless point: field magnitude is zero")
    axis = AXIS_INDEX[model.quench_axis]
    n = np.array([hx, hy, hz]) / eps

    if protocol.kind == COULOMB:
        if protocol.g == 0.0:
            psi = _sudden_axis_state(model)
        else:
            t0 = protocol.resolve_t_start(eps)
            start_field = [hx, hy, hz]
            start_field[axis] += protocol.quench_term(t0)
            psi = ground_state_two_level(*start_field)
            t_end = protocol.t_avg_end
            status, t, ur, ui, vr, vi = kernels.dp45_propagate2(
                protocol.kind_code, protocol.coupling, axis, hx, hy, hz,
                t0, t_end, psi[0].real, psi[0].imag, psi[1].real, psi[1].imag,
                tol, _max_step(eps, t_end - t0), MAX_STEPS)
            if status != kernels.STATUS_OK:
                raise IntegrationError(f"integration stalled at t = {t:.6g}")
            psi = np.array([complex(ur, ui), complex(vr, vi)])
        end_field = [hx, hy, hz]
        if protocol.g > 0.0:
            end_field[axis] += protocol.quench_term(protocol.t_avg_end)
        gnd = ground_state_two_level(*end_field)
        p_minus = min(1.0, abs(np.vdot(gnd, psi)) ** 2)
        return (1.0 - 2.0 * p_minus) * n

    # linear ramp: integrate to the quench end, then average in closed form
    t0 = protocol.resolve_t_start(eps)
    start_field = [hx, hy, hz]
    start_field[axis] += protocol.quench_term(t0)
    psi = ground_state_two_level(*start_field)
    status, t, ur, ui, vr, vi = kernels.dp45_propagate2(
        protocol.kind_code, protocol.coupling, axis, hx, hy, hz,
        t0, protocol.t_quench_end, psi[0].real, psi[0].imag,
        psi[1].real, psi[1].imag, tol,
        _max_step(max(eps, abs(protocol.beta * t0)), -t0), MAX_STEPS)
    if status != kernels.STATUS_OK:
        raise IntegrationError(f"integration stalled at t = {t:.6g}")
    psi = np.array([complex(ur, ui), complex(vr, vi)])
    gnd = ground_state_two_level(hx, hy, hz)
    p_minus = min(1.0, abs(np.vdot(gnd, psi)) ** 2)
    static = (1.0 - 2.0 * p_minus) * n
    if not math.isfinite(protocol.t_avg_end):
        return static
    exc = ground_state_two_level(-hx, -hy, -hz)
    c_minus = np.vdot(gnd, psi)
    c_plus = np.vdot(exc, psi)
    w = 2.0 * eps
    t1, t2 = protocol.t_avg_begin, protocol.t_avg_end
    phase = (np.exp(1j * w * t2) - np.exp(1j * w * t1)) / (1j * w * (t2 - t1))
    cross = np.conj(c_plus) * c_minus * phase
    sig = (np.array([[0, 1], [1, 0]], dtype=complex),
           np.array([[0, -1j], [1j, 0]]),
           np.array([[1, 0], [0, -1]], dtype=complex))
    out = static.copy()
    for i in range(3):
        out[i] += 2.0 * (cross * np.vdot(exc, sig[i] @ gnd)).real
    return out


def _point_four_band(model: BandField, protocol: QuenchProtocol, k, tol: float):
    h = np.asarray(model.field(np.asarray(k, dtype=float)), dtype=float).reshape(-1)
    scale = float(np.linalg.norm(h))
    if scale == 0.0:
        raise IntegrationError("gapless point: field magnitude is zero")
    h0, h1, h2, h3 = (float(c) for c in h)

    if protocol.kind == COULOMB:
        if protocol.g == 0.0:
            y = ground_pair_four_level(_SUDDEN_FIELD, h1, h2, h3)
            t_end = protocol.t_avg_end
        else:
            t0 = protocol.resolve_t_start(scale)
            t_end = protocol.t_avg_end
            y = ground_pair_four_level(h0 + protocol.quench_term(t0), h1, h2, h3)
            status, t = kernels.dp45_propagate16(
                protocol.kind_code, protocol.coupling, h0, h1, h2, h3,
                t0, t_end, y, tol, _max_step(scale, t_end - t0), MAX_STEPS)
            if status != kernels.STATUS_OK:
                raise IntegrationError(f"integration stalled at t = {t:.6g}")
        va = y[0:8:2] + 1j * y[1:8:2]
        vb = y[8::2] + 1j * y[9::2]
        rho = 0.5 * (np.outer(va, va.conj()) + np.outer(vb, vb.conj()))
        h_end = np.array([h0, h1, h2, h3])
        if protocol.g > 0.0:
            h_end[0] += protocol.quench_term(t_end)
        return _transported_measure(rho, h_end, np.array([h0, h1, h2, h3]))

    t0 = protocol.resolve_t_start(scale)
    y = ground_pair_four_level(h0 + protocol.quench_term(t0), h1, h2, h3)
    status, t = kernels.dp45_propagate16(
        protocol.kind_code, protocol.coupling, h0, h1, h2, h3,
        t0, protocol.t_quench_end, y, tol,
        _max_step(max(scale, abs(protocol.beta * t0)), -t0), MAX_STEPS)
    if status != kernels.STATUS_OK:
        raise IntegrationError(f"integration stalled at t = {t:.6g}")
    va = y[0:8:2] + 1j * y[1:8:2]
    vb = y[8::2] + 1j * y[9::2]
    rho = 0.5 * (np.outer(va, va.conj()) + np.outer(vb, vb.conj()))
    h_post = np.array([h0, h1, h2, h3])
    if not math.isfinite(protocol.t_avg_end):
        return _transported_measure(rho, h_post, h_post)
    return _windowed_four_level(rho, h_post, (protocol.t_avg_begin,
                                              protocol.t_avg_end))


def evaluate_point(model: BandField, protocol: QuenchProtocol, k,
                   tol: float = 1e-8) -> np.ndarray:
    """Numeric time-averaged texture at one momentum (no grid needed)."""
    tol = _check_tol(tol)
    point_fn = _point_four_band if model.bands == 4 else _point_two_band
    return point_fn(model, protocol, np.asarray(k, dtype=float), tol)


def scan_cross_section(model: BandField, protocol: QuenchProtocol,
                       plane_axis: int, plane_value: float, n: int = 61,
                       tol: float = 1e-8) -> tuple:
    """Numeric texture on a 2D slice of a 3D Brillouin zone.

    The plane fixes momentum component plane_axis at plane_value; the two
    remaining components run over an n x n uniform grid. Returns
    (axis_1, axis_2, values) with values of shape (n, n, 4).
    """
    if model.dim != 3:
        raise ConfigError("cross sections are defined for the 3D model only")
    if plane_axis not in (0, 1, 2):
        raise ConfigError(f"plane_axis must be 0, 1 or 2, got {plane_axis}")
    free = [a for a in range(3) if a != plane_axis]
    ax = -np.pi + 2.0 * np.pi * np.arange(n) / n
    values = np.empty((n, n, 4))
    k = np.empty(3)
    k[plane_axis] = plane_value
    for i in range(n):
        k[free[0]] = ax[i]
        for j in range(n):
            k[free[1]] = ax[j]
            values[i, j] = evaluate_point(model, protocol, k, tol)
    return ax.copy(), ax.copy(), values


def scan(model: BandField, grid: BzGrid, protocol: QuenchProtocol,
         method: str = "auto", tol: float = 1e-8, threads: int = 1) -> SpinTextureMap:
    """Assemble the texture map over a BZ grid.

    method auto picks the closed form when it exists (two-band Coulomb)
    and the integrator otherwise. Per-point numerical failures are
    recorded with their grid index; the scan aborts only if more than
    0.1% of points fail.
    """
    tol = _check_tol(tol)
    if grid.dim != model.dim:
        raise ConfigError(f"grid dimension {grid.dim} != model dimension {model.dim}")
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    chosen = _resolve_method(method, model, protocol)
    if chosen == "analytic":
        values, failures = _scan_analytic(model, grid, protocol)
    else:
        ncomp = 4 if model.bands == 4 else 3
        pts = grid.points().reshape(-1, grid.dim)
        values = np.empty((pts.shape[0], ncomp))
        fail_slots: list = [None] * pts.shape[0]
        point_fn = _point_four_band if model.bands == 4 else _point_two_band

        def run_range(lo: int, hi: int):
            for i in range(lo, hi):
                try:
                    values[i] = point_fn(model, protocol, pts[i], tol)
                except (IntegrationError, ConfigError) as exc:
                    values[i] = np.nan
                    fail_slots[i] = str(exc)

        n = pts.shape[0]
        if threads == 1:
            run_range(0, n)
        else:
            chunk = max(1, -(-n // threads))
            bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda b: run_range(*b), bounds))
        failures = [(np.unravel_index(i, grid.shape), msg)
                    for i, msg in enumerate(fail_slots) if msg is not None]
        failures = [(tuple(int(j) for j in idx), msg) for idx, msg in failures]
        values = values.reshape(grid.shape + (ncomp,))
    if len(failures) > MAX_FAILURE_FRACTION * values[..., 0].size:
        raise ScanError(
            f"{len(failures)} of {values[..., 0].size} grid points failed",
            failures=tuple(failures))
    return SpinTextureMap(grid=grid, values=values, method=chosen,
                          protocol=protocol, model=model,
                          failures=tuple(failures))


def compare_methods(model: BandField, grid: BzGrid, protocol: QuenchProtocol,
                    tol: float = 1e-8) -> MethodComparison:
    """Scan the same configuration both ways and report componentwise
    residuals; flagged when the maximum exceeds the 2e-3 contract."""
    analytic = scan(model, grid, protocol, method="analytic", tol=tol)
    numeric = scan(model, grid, protocol, method="numeric", tol=tol)
    diff = np.abs(analytic.values - numeric.values)
    finite = np.isfinite(diff)
    if not np.all(finite):
        diff = np.where(finite, diff, 0.0)
    comp_max = tuple(float(diff[..., i].max()) for i in range(diff.shape[-1]))
    max_res = float(diff.max())
    return MethodComparison(max_residual=max_res,
                            mean_residual=float(diff.mean()),
                            component_max=comp_max,
                            flagged=bool(max_res >= 2e-3))
