"""Time-evolution drivers built on the compiled stepper cores.

Everything here works at a single momentum point: evolve a state through a
quench protocol, record trajectories, and form time averages. The scan
layer composes these over Brillouin-zone grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, IntegrationError
from .models import DIRAC
from .protocols import QuenchProtocol

DEFAULT_TOL = 1e-8
MAX_STEPS = 20_000_000
AXIS_INDEX = {"x": 0, "y": 1, "z": 2}

_SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


@dataclass(frozen=True)
class TrajectorySample:
    """One recorded instant: time, state (vector or density operator) and
    the spin expectation vector."""

    t: float
    state: np.ndarray
    spin: np.ndarray


def _check_tol(tol: float) -> float:
    if not (1e-12 <= tol <= 1e-6):
        raise ConfigError(f"tolerance must lie in [1e-12, 1e-6], got {tol}")
    return float(tol)


def _field3(field) -> tuple[float, float, float]:
    f = np.asarray(field, dtype=float).reshape(-1)
    if f.shape[0] == 2:
        return float(f[0]), 0.0, float(f[1])
    if f.shape[0] == 3:
        return float(f[0]), float(f[1]), float(f[2])
    raise ConfigError(f"expected a 2- or 3-component field, got {f.shape[0]}")


def _raise_for_status(status: int, t: float):
    if status == kernels.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at t = {t:.9g}")
    if status == kernels.STATUS_STEP_BUDGET:
        raise IntegrationError(f"step budget exhausted at t = {t:.9g}")


def _max_step(eps: float, span: float) -> float:
    # keep >= 20 recorded samples per Larmor period 2 pi / (2 eps)
    if eps > 0.0:
        return math.pi / (20.0 * eps)
    return span / 50.0


def ground_state_two_level(hx: float, hy: float, hz: float) -> np.ndarray:
    """Exact lower eigenvector of h . sigma, branch chosen for stability."""
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    if eps == 0.0:
        raise ConfigError("zero field has no unique ground state")
    if hz >= 0.0:
        psi = np.array([-(hx - 1j * hy), hz + eps], dtype=complex)
    else:
        psi = np.array([hz - eps, hx + 1j * hy], dtype=complex)
    return psi / np.linalg.norm(psi)


def ground_pair_four_level(h0: float, h1: float, h2: float, h3: float) -> np.ndarray:
    """Orthonormal basis of the two-fold degenerate lower band, packed as
    16 reals (two spinors, re/im interleaved) for the compiled pair core."""
    ham = DIRAC.hamiltonian((h0, h1, h2, h3))
    _, vecs = np.linalg.eigh(ham)
    y = np.empty(16)
    for which in (0, 1):
        v = vecs[:, which]
        base = 8 * which
        y[base + 0:base + 8:2] = v.real
        y[base + 1:base + 8:2] = v.imag
    return y


def _pack2(psi) -> tuple[float, float, float, float]:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != 2:
        raise ConfigError("two-level state must have 2 components")
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > 1e-8:
        raise ConfigError(f"initial state must be normalized, |psi| = {n}")
    return float(psi[0].real), float(psi[0].imag), float(psi[1].real), float(psi[1].imag)


def _spin_from_rows(ys: np.ndarray) -> np.ndarray:
    """(n, 4) real spinor rows -> (n, 3) Pauli expectations."""
    ur, ui, vr, vi = ys[:, 0], ys[:, 1], ys[:, 2], ys[:, 3]
    sx = 2.0 * (ur * vr + ui * vi)
    sy = 2.0 * (ur * vi - ui * vr)
    sz = ur * ur + ui * ui - vr * vr - vi * vi
    return np.stack([sx, sy, sz], axis=-1)


def _gamma_from_rows(ys: np.ndarray) -> np.ndarray:
    """(n, 16) pair rows -> (n, 4) gamma expectations of the carried
    density operator."""
    out = np.zeros((ys.shape[0], 4))
    for base in (0, 8):
        p = ys[:, base + 0::2][:, :4] + 1j * ys[:, base + 1::2][:, :4]
        p0, p1, p2, p3 = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
        out[:, 0] += 2.0 * (np.conj(p0) * p1).real - 2.0 * (np.conj(p2) * p3).real
        out[:, 1] += 2.0 * (np.conj(p0) * p2).real + 2.0 * (np.conj(p1) * p3).real
        out[:, 2] += 2.0 * (np.conj(p0) * p2).imag + 2.0 * (np.conj(p1) * p3).imag
        out[:, 3] += (np.abs(p0) ** 2 - np.abs(p1) ** 2
                      - np.abs(p2) ** 2 + np.abs(p3) ** 2)
    return 0.5 * out


def integrate(protocol: QuenchProtocol, field, initial, tol: float = DEFAULT_TOL,
              quench_axis: str = "z") -> list:
    """Evolve a two-level state from the protocol start through the end of
    the averaging window, recording every accepted step.

    Returns a list of TrajectorySample dense enough for period-resolved
    averaging (sample spacing <= pi/(20 |field|)).
    """
    tol = _check_tol(tol)
    hx, hy, hz = _field3(field)
    axis = AXIS_INDEX[quench_axis]
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    t0 = protocol.resolve_t_start(eps)
    t1 = protocol.t_avg_end
    if not math.isfinite(t1):
        raise ConfigError("trajectory recording needs a finite t_avg_end")
    ur, ui, vr, vi = _pack2(initial)
    status, t, n, ts, ys = kernels.dp45_record2(
        protocol.kind_code, protocol.coupling, axis, hx, hy, hz, t0, t1,
        ur, ui, vr, vi, tol, _max_step(eps, t1 - t0), MAX_STEPS)
    _raise_for_status(status, t)
    ts = ts[:n]
    ys = ys[:n]
    spins = _spin_from_rows(ys)
    states = ys[:, 0::2] + 1j * ys[:, 1::2]
    return [TrajectorySample(t=float(ts[i]), state=states[i], spin=spins[i])
            for i in range(n)]


def bloch_trajectory(protocol: QuenchProtocol, field, tol: float = DEFAULT_TOL,
                     initial=None, quench_axis: str = "z") -> list:
    """Integrate ds/dt = -2 s x h(t) and record every accepted step.

    Default initial spin (0, 0, -1): the ground orientation under the
    diverging early-time +z quench field. Returns [(t, spin3), ...].
    """
    tol = _check_tol(tol)
    hx, hy, hz = _field3(field)
    axis = AXIS_INDEX[quench_axis]
    if initial is None:
        s = np.array([0.0, 0.0, -1.0])
    else:
        s = np.asarray(initial, dtype=float).reshape(3).copy()
        if abs(np.linalg.norm(s) - 1.0) > 1e-8:
            raise ConfigError("initial spin must be a unit vector")
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    t0 = protocol.resolve_t_start(eps)
    t1 = protocol.t_avg_end
    if not math.isfinite(t1):
        raise ConfigError("trajectory recording needs a finite t_avg_end")
    status, t, n, ts, ys = kernels.dp45_record3(
        protocol.kind_code, protocol.coupling, axis, hx, hy, hz, t0, t1,
        s[0], s[1], s[2], tol, _max_step(eps, t1 - t0), MAX_STEPS)
    _raise_for_status(status, t)
    return [(float(ts[i]), ys[i].copy()) for i in range(n)]


def integrate_four_level(protocol: QuenchProtocol, field, tol: float = DEFAULT_TOL,
                         mixture: bool = True) -> list:
    """Evolve the degenerate lower band of a four-band point.

    The initial condition is the maximally mixed density operator on the
    two-fold ground manifold of H(t_start); with mixture=False the first
    eigenvector alone is evolved as a pure state (comparison switch).
    Samples carry the 4x4 density operator and the <gamma_i> 4-vector.
    """
    tol = _check_tol(tol)
    f = np.asarray(field, dtype=float).reshape(-1)
    if f.shape[0] != 4:
        raise ConfigError(f"expected a 4-component field, got {f.shape[0]}")
    h0, h1, h2, h3 = (float(c) for c in f)
    scale = math.sqrt(h0 * h0 + h1 * h1 + h2 * h2 + h3 * h3)
    t0 = protocol.resolve_t_start(scale if scale > 0 else 1.0)
    t1 = protocol.t_avg_end
    if not math.isfinite(t1):
        raise ConfigError("trajectory recording needs a finite t_avg_end")
    hq0 = h0 + protocol.quench_term(t0)
    y = ground_pair_four_level(hq0, h1, h2, h3)
    if not mixture:
        y[8:] = y[:8]
    status, t, n, ts, ys = kernels.dp45_record16(
        protocol.kind_code, protocol.coupling, h0, h1, h2, h3, t0, t1,
        y, tol, _max_step(scale, t1 - t0), MAX_STEPS)
    _raise_for_status(status, t)
    ts = ts[:n]
    ys = ys[:n]
    gammas = _gamma_from_rows(ys)
    samples = []
    for i in range(n):
        va = ys[i, 0:8:2] + 1j * ys[i, 1:8:2]
        vb = ys[i, 8::2] + 1j * ys[i, 9::2]
        rho = 0.5 * (np.outer(va, va.conj()) + np.outer(vb, vb.conj()))
        samples.append(TrajectorySample(t=float(ts[i]), state=rho, spin=gammas[i]))
    return samples


def time_average_spin(trajectory, window, gap: float | None = None) -> np.ndarray:
    """Flat trapezoidal average of the spin expectation over a time window.

    trajectory: list of TrajectorySample or of (t, spin) pairs. The window
    must lie inside the sampled range; when the post-quench gap is supplied
    the window must cover at least 10 precession periods 2 pi / gap.
    """
    t1, t2 = float(window[0]), float(window[1])
    if t2 <= t1:
        raise ConfigError("empty averaging window")
    if gap is not None:
        required = 10.0 * 2.0 * math.pi / gap
        if t2 - t1 < required:
            raise ConfigError(
                f"window too short for averaging: length {t2 - t1:.6g}, "
                f"need at least {required:.6g}")
    if hasattr(trajectory[0], "t"):
        ts = np.array([s.t for s in trajectory])
        vals = np.array([s.spin for s in trajectory])
    else:
        ts = np.array([s[0] for s in trajectory])
        vals = np.array([np.asarray(s[1], dtype=float) for s in trajectory])
    if t1 < ts[0] or t2 > ts[-1]:
        raise ConfigError(
            f"window [{t1:.6g}, {t2:.6g}] outside sampled range "
            f"[{ts[0]:.6g}, {ts[-1]:.6g}]")
    inside = (ts > t1) & (ts < t2)
    tw = np.concatenate([[t1], ts[inside], [t2]])
    vw = np.empty((tw.shape[0], vals.shape[1]))
    vw[1:-1] = vals[inside]
    for j in range(vals.shape[1]):
        vw[0, j] = np.interp(t1, ts, vals[:, j])
        vw[-1, j] = np.interp(t2, ts, vals[:, j])
    return np.trapezoid(vw, tw, axis=0) / (t2 - t1)


def dephased_average_two_level(psi, field) -> np.ndarray:
    """Infinite-time average of the spin under a constant field: the
    coherences precess away and only the band populations survive."""
    hx, hy, hz = _field3(field)
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    psi = np.asarray(psi, dtype=complex).reshape(2)
    gnd = ground_state_two_level(hx, hy, hz)
    p_minus = abs(np.vdot(gnd, psi)) ** 2
    p_plus = 1.0 - p_minus
    n = np.array([hx, hy, hz]) / eps
    return (p_plus - p_minus) * n


def windowed_average_two_level(psi, field, window) -> np.ndarray:
    """Exact finite-window average of the spin under a constant field.

    Decomposes psi in the field eigenbasis; the coherence contributes
    through the window average of e^{2 i eps t}, everything else is static.
    The infinite-window limit reduces to dephased_average_two_level.
    """
    hx, hy, hz = _field3(field)
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    t1, t2 = float(window[0]), float(window[1])
    if not math.isfinite(t2):
        return dephased_average_two_level(psi, field)
    psi = np.asarray(psi, dtype=complex).reshape(2)
    gnd = ground_state_two_level(hx, hy, hz)
    exc = ground_state_two_level(-hx, -hy, -hz)
    c_minus = np.vdot(gnd, psi)
    c_plus = np.vdot(exc, psi)
    n = np.array([hx, hy, hz]) / eps
    static = (abs(c_plus) ** 2 - abs(c_minus) ** 2) * n
    # +/- coherence precesses as e^{+2 i eps t}; average that factor exactly
    w = 2.0 * eps
    phase = (np.exp(1j * w * t2) - np.exp(1j * w * t1)) / (1j * w * (t2 - t1))
    cross = np.conj(c_plus) * c_minus * phase
    out = static.astype(float)
    for i in range(3):
        mat = np.vdot(exc, _SIGMA[i] @ gnd)
        out[i] += 2.0 * (cross * mat).real
    return out


def hann_average_spin(protocol: QuenchProtocol, field, initial,
                      window=None, tol: float = DEFAULT_TOL,
                      quench_axis: str = "z") -> np.ndarray:
    """Propagate to the window start, then accumulate the raised-cosine
    weighted spin average across the window in a single pass.

    The tapered window suppresses the O(1/(omega T)) boundary leakage of
    a flat average, leaving the genuine protocol tail as the only
    finite-time bias.
    """
    tol = _check_tol(tol)
    hx, hy, hz = _field3(field)
    axis = AXIS_INDEX[quench_axis]
    eps = math.sqrt(hx * hx + hy * hy + hz * hz)
    t0 = protocol.resolve_t_start(eps)
    if window is None:
        window = (protocol.t_avg_begin, protocol.t_avg_end)
    t1, t2 = float(window[0]), float(window[1])
    if not (t0 <= t1 < t2 and math.isfinite(t2)):
        raise ConfigError(
            f"need a finite window with t_start <= begin < end, got "
            f"[{t1:.6g}, {t2:.6g}] from t_start {t0:.6g}")
    ur, ui, vr, vi = _pack2(initial)
    kind, coup = protocol.kind_code, protocol.coupling
    if t1 > t0:
        status, t, ur, ui, vr, vi = kernels.dp45_propagate2(
            kind, coup, axis, hx, hy, hz, t0, t1, ur, ui, vr, vi, tol,
            _max_step(eps, t1 - t0), MAX_STEPS)
        _raise_for_status(status, t)
    status, t, sx, sy, sz, ur, ui, vr, vi = kernels.dp45_average2(
        kind, coup, axis, hx, hy, hz, t1, t2, ur, ui, vr, vi, tol,
        _max_step(eps, t2 - t1), MAX_STEPS)
    _raise_for_status(status, t)
    return np.array([sx, sy, sz])


def transition_probability_numeric(g: float, eps: float, theta: float,
                                   phi: float = 0.0, tol: float = 1e-10,
                                   t_end: float | None = None) -> float:
    """Excited-band occupation after a Coulomb quench, by direct evolution.

    Starts in the exact ground state of H(t_start), evolves to t_end and
    projects on the instantaneous upper eigenstate there (the decaying g/t
    term is included in the projection axis, which removes the leading
    finite-time bias). Serves as the independent oracle for the
    closed-form transition probability.
    """
    protocol = QuenchProtocol.coulomb(g)
    hx = eps * math.sin(theta) * math.cos(phi)
    hy = eps * math.sin(theta) * math.sin(phi)
    hz = eps * math.cos(theta)
    t0 = protocol.resolve_t_start(eps)
    if t_end is None:
        t_end = max(50.0, 240.0 * math.sqrt(max(g, 1.0))) / eps
    if g > 0.0:
        psi0 = ground_state_two_level(hx, hy, hz + g / t0)
    else:
        # sudden limit: prepared in the ground state of the diverging
        # quench term itself, not of the static field
        psi0 = ground_state_two_level(0.0, 0.0, 1.0)
    ur, ui, vr, vi = _pack2(psi0)
    status, t, ur, ui, vr, vi = kernels.dp45_propagate2(
        0, g, 2, hx, hy, hz, t0, t_end, ur, ui, vr, vi, tol,
        math.pi / (4.0 * eps), MAX_STEPS)
    _raise_for_status(status, t)
    qz = hz + (g / t_end if g > 0 else 0.0)
    exc = ground_state_two_level(-hx, -hy, -qz)
    psi = np.array([complex(ur, ui), complex(vr, vi)])
    return float(abs(np.vdot(exc, psi)) ** 2)
