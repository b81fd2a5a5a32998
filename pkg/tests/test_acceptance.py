"""Acceptance suite: one test per criterion, each at its contracted
tolerance and runtime budget. Every test prints a single summary line;
the pytest -v report gives the pass/fail verdict."""
import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from slowquench.integrators import (ground_state_two_level, hann_average_spin,
                                    integrate, integrate_four_level,
                                    transition_probability_numeric)
from slowquench.landau_zener import (LzParams, averaged_spin,
                                     canonicalize_axis, final_amplitudes,
                                     transition_probability)
from slowquench.models import DIRAC, BandField, BzGrid
from slowquench.protocols import QuenchProtocol
from slowquench.reference import chern_oracle_2d, winding_oracle_1d
from slowquench.texture import scan, scan_cross_section
from slowquench.topology import (chern_2d, chern_on_bis_sphere,
                                 find_zero_sets, sis_locus_predict,
                                 winding_1d)

THETA = math.pi / 3.0


def _done(n: int, budget: float, t0: float, detail: str) -> None:
    elapsed = time.time() - t0
    print(f"criterion {n}: PASS in {elapsed:.1f}s (budget {budget:.0f}s) - {detail}")
    assert elapsed < budget


def _min_dist_periodic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """For each row of a, the min-image distance to the closest row of b."""
    d = a[:, None, :] - b[None, :, :]
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return np.sqrt(np.sum(d * d, axis=-1)).min(axis=1)


def test_criterion_1_probability_grid():
    t0 = time.time()
    gs = np.geomspace(0.01, 10.0, 10)
    thetas = np.linspace(0.1, math.pi - 0.1, 10)
    worst = 0.0
    for eps in (0.5, 2.0, 8.0):
        for g in gs:
            closed = transition_probability(g, thetas)
            for theta, p_ref in zip(thetas, closed):
                p_num = transition_probability_numeric(float(g), eps,
                                                       float(theta))
                worst = max(worst, abs(p_num - float(p_ref)))
    assert worst < 1e-4
    _done(1, 60.0, t0, f"300 points, max |P_num - P_closed| = {worst:.2e}")


def test_criterion_2_sweep_curves():
    t0 = time.time()
    window = (2000.0, 4000.0)
    field = (2.0 * math.sin(THETA), 0.0, 2.0 * math.cos(THETA))
    worst_p = 0.0
    worst_s = 0.0
    for g in np.linspace(0.0, 1.2, 25):
        g = float(g)
        params = LzParams(g=g, epsilon=2.0, theta=THETA)
        p_closed = transition_probability(g, THETA)
        p_num = transition_probability_numeric(g, 2.0, THETA)
        worst_p = max(worst_p, abs(p_num - p_closed))
        proto = QuenchProtocol.coulomb(g, t_avg_begin=window[0],
                                       t_avg_end=window[1])
        if g == 0.0:
            psi0 = ground_state_two_level(0.0, 0.0, 1.0)
        else:
            eps0 = proto.resolve_t_start(2.0)
            psi0 = ground_state_two_level(field[0], field[1],
                                          field[2] + g / eps0)
        s_num = hann_average_spin(proto, field, psi0, window, tol=1e-8)
        worst_s = max(worst_s, float(np.max(np.abs(s_num - averaged_spin(params)))))
    assert worst_p < 2e-3
    assert worst_s < 2e-3
    _done(2, 60.0, t0, f"25 couplings, max residual P {worst_p:.2e}, "
                       f"spin {worst_s:.2e}")


def test_criterion_3_1d_detection():
    t0 = time.time()
    model = BandField.chain_1d(m_z=0.0, t_so=0.2)
    grid = BzGrid(1, 201)
    cell = grid.spacing()
    details = []
    for g in (0.2, 1.0, 10.0):
        tex = scan(model, grid, QuenchProtocol.coulomb(g), method="analytic")
        sets = find_zero_sets(tex)
        bis_k = sorted(float(z.points[0, 0]) for z in sets if z.kind == "BIS")
        assert len(bis_k) == 2
        assert abs(bis_k[0] + math.pi / 2.0) < cell
        assert abs(bis_k[1] - math.pi / 2.0) < cell
        target = sis_locus_predict(g)

        def cos_angle_err(k):
            hx, hz = model.field(k)
            return hz / math.hypot(hx, hz) - target

        k_star = brentq(cos_angle_err, 0.05, math.pi / 2.0 - 1e-3, xtol=1e-12)
        sis_k = sorted(float(z.points[0, 0]) for z in sets if z.kind == "SIS")
        assert len(sis_k) == 2
        assert abs(sis_k[0] + k_star) < cell
        assert abs(sis_k[1] - k_star) < cell
        assert winding_1d(tex, sets).value == 1
        details.append(f"g={g:g} nu=1 SIS at +-{k_star:.3f}")
    assert winding_oracle_1d(model) == 1
    _done(3, 60.0, t0, "; ".join(details))


def test_criterion_4_2d_chern():
    t0 = time.time()
    details = []
    for m_z, want in ((1.0, -1), (-1.0, 1)):
        model = BandField.qah_2d(m_z=m_z, t_so_x=0.2, t_so_y=0.2)
        tex = scan(model, BzGrid(2, 101), QuenchProtocol.coulomb(5.0),
                   method="analytic")
        res = chern_2d(tex, find_zero_sets(tex))
        oracle = chern_oracle_2d(model)
        assert res.value == want
        assert res.value == oracle
        details.append(f"m_z={m_z:+g}: C={res.value} (oracle {oracle})")
    _done(4, 120.0, t0, "; ".join(details))


def test_criterion_5_y_quench():
    t0 = time.time()
    model = BandField.qah_2d(m_z=1.0, t_so_x=1.0, t_so_y=2.0, quench_axis="y")
    grid = BzGrid(2, 101)
    tex = scan(model, grid, QuenchProtocol.coulomb(1.0), method="analytic")
    sets = find_zero_sets(tex)
    bis = [z for z in sets if z.kind == "BIS"]
    edge = [z for z in bis if np.max(np.abs(z.points[:, 1] + math.pi)) < 1e-9]
    center = [z for z in bis if np.max(np.abs(z.points[:, 1])) < grid.spacing(1)]
    assert edge, "no BIS line at k_y = -pi"
    assert center, "no BIS line at k_y = 0"
    res = chern_2d(tex, sets)
    per_loop = res.diagnostics["contributions"]
    edge_pos = next(i for i, z in enumerate(bis) if z is edge[0])
    assert per_loop[edge_pos] == pytest.approx(0.0, abs=1e-9)
    assert res.value == -1
    _done(5, 120.0, t0, f"BIS lines at k_y = 0 and -pi, edge line "
                        f"contributes {per_loop[edge_pos]:g}, C = {res.value}")


def test_criterion_6_linear_protocol():
    t0 = time.time()
    model1 = BandField.chain_1d(m_z=0.0, t_so=0.2)
    grid1 = BzGrid(1, 201)
    tex1 = scan(model1, grid1, QuenchProtocol.linear(0.8, -20.0),
                method="numeric", tol=1e-8)
    sets1 = find_zero_sets(tex1)
    bis_k = sorted(float(z.points[0, 0]) for z in sets1 if z.kind == "BIS")
    assert len(bis_k) == 2
    assert abs(bis_k[0] + math.pi / 2.0) < grid1.spacing()
    assert abs(bis_k[1] - math.pi / 2.0) < grid1.spacing()
    assert winding_1d(tex1, sets1).value == 1

    grid2 = BzGrid(2, 101)
    cell = grid2.spacing()
    details = [f"1D nu=1, BIS at {bis_k[0]:.4f}/{bis_k[1]:.4f}"]
    for m_z, t_start, want in ((1.0, -10.0, -1), (-1.0, -12.0, 1)):
        model = BandField.qah_2d(m_z=m_z, t_so_x=0.2, t_so_y=0.2)
        tex = scan(model, grid2, QuenchProtocol.linear(0.8, t_start),
                   method="numeric", tol=1e-8)
        sets = find_zero_sets(tex)
        res = chern_2d(tex, sets)
        assert res.value == want
        ref = scan(model, grid2, QuenchProtocol.coulomb(5.0), method="analytic")
        ref_bis = np.concatenate([z.points for z in find_zero_sets(ref)
                                  if z.kind == "BIS"])
        lin_bis = np.concatenate([z.points for z in sets if z.kind == "BIS"])
        gap_ab = float(_min_dist_periodic(lin_bis, ref_bis).max())
        gap_ba = float(_min_dist_periodic(ref_bis, lin_bis).max())
        assert max(gap_ab, gap_ba) < cell
        details.append(f"m_z={m_z:+g}: C={res.value}, BIS offset "
                       f"{max(gap_ab, gap_ba):.4f} < {cell:.4f}")
    _done(6, 600.0, t0, "; ".join(details))


def test_criterion_7_3d_surface():
    t0 = time.time()
    model = BandField.chiral_3d(m_z=2.0, t_so=0.2)
    proto = QuenchProtocol.coulomb(1.0, t_start=0.015, t_avg_begin=600.0,
                                   t_avg_end=1000.0)
    tex = scan(model, BzGrid(3, 41), proto, tol=1e-8)
    sets = find_zero_sets(tex)
    bis = [z for z in sets if z.kind == "BIS"]
    assert len(bis) == 1
    assert bis[0].closed and bis[0].faces is not None
    res = chern_on_bis_sphere(tex, bis[0])
    assert res.value == -1
    assert res.diagnostics["closure_defect"] < 1e-2 * 4.0 * math.pi
    # cross-section smoke test on the standard three slices
    for axis, value in ((0, 0.0), (1, 0.0), (2, math.pi / 2.0)):
        _, _, vals = scan_cross_section(model, proto, axis, value, n=61,
                                        tol=1e-8)
        assert vals.shape == (61, 61, 4)
        assert np.all(np.isfinite(vals))
        assert np.max(np.abs(vals)) <= 1.0 + 1e-6
        assert vals[..., 0].min() < 0.0 < vals[..., 0].max()
    _done(7, 3600.0, t0,
          f"C = {res.value}, defect {res.diagnostics['closure_defect']:.3g}, "
          f"{res.diagnostics['n_faces']} faces, 3 cross sections")


def test_criterion_8_property_suite():
    t0 = time.time()
    # conserved norm along a long adaptive run
    tol = 1e-8
    field = (2.0 * math.sin(THETA), 0.0, 2.0 * math.cos(THETA))
    proto = QuenchProtocol.coulomb(1.0)
    eps0 = proto.resolve_t_start(2.0)
    psi0 = ground_state_two_level(field[0], field[1], field[2] + 1.0 / eps0)
    traj = integrate(proto, field, psi0, tol=tol)
    drift = max(abs(float(np.vdot(s.state, s.state).real) - 1.0) for s in traj)
    assert drift <= 100.0 * tol

    # the four-level mixture keeps unit trace
    four = integrate_four_level(
        QuenchProtocol.coulomb(1.0, t_start=0.015, t_avg_begin=60.0,
                               t_avg_end=100.0),
        (0.5, 0.1, -0.2, 0.4), tol=tol)
    trace_drift = max(abs(float(np.trace(s.state).real) - 1.0) for s in four)
    assert trace_drift <= 100.0 * tol

    # asymptotic amplitude conservation
    for g in (0.1, 1.0, 4.0):
        amp = final_amplitudes(LzParams(g=g, epsilon=2.0, theta=THETA), 200.0)
        assert abs(amp.p_plus_mag ** 2 + amp.p_minus_mag ** 2 - 1.0) < 1e-10

    # the probability depends on neither the gap scale nor the azimuth
    probes = [transition_probability_numeric(0.7, eps, THETA, phi)
              for eps in (0.5, 2.0, 8.0) for phi in (0.0, 1.1)]
    assert max(probes) - min(probes) < 1e-4

    # axis canonicalization round-trips exactly
    f = np.array([0.3, -1.1, 0.7])
    for axis in ("x", "y", "z"):
        canon = canonicalize_axis(f, axis, g=0.8)
        spin = averaged_spin(canon.params)
        assert abs(np.linalg.norm(spin)
                   - np.linalg.norm(spin[list(canon.permutation)])) < 1e-10
        assert canon.params.epsilon == pytest.approx(np.linalg.norm(f), abs=1e-12)

    # scans are deterministic to the bit, for any thread count
    model = BandField.chain_1d(m_z=0.5, t_so=0.2)
    a = scan(model, BzGrid(1, 64), proto, method="numeric", threads=1)
    b = scan(model, BzGrid(1, 64), proto, method="numeric", threads=1)
    c = scan(model, BzGrid(1, 64), proto, method="numeric", threads=3)
    assert a.values.tobytes() == b.values.tobytes() == c.values.tobytes()

    # the winding does not move under grid refinement
    for n in (201, 401):
        tex = scan(model, BzGrid(1, n), QuenchProtocol.coulomb(1.0))
        assert winding_1d(tex, find_zero_sets(tex)).value == 1

    # band fields are zone-periodic
    rng = np.random.default_rng(7)
    for m in (BandField.chain_1d(m_z=0.3), BandField.qah_2d(m_z=1.0),
              BandField.chiral_3d(m_z=2.0)):
        k = rng.uniform(-math.pi, math.pi, size=(40, m.dim))
        if m.dim == 1:
            k = k[:, 0]
        assert np.max(np.abs(m.field(k + 2.0 * math.pi) - m.field(k))) < 1e-12

    # the gamma matrices anticommute
    eye = np.eye(4)
    for i, gi in enumerate(DIRAC.matrices):
        for j, gj in enumerate(DIRAC.matrices):
            want = 2.0 * eye if i == j else np.zeros((4, 4))
            assert np.max(np.abs(gi @ gj + gj @ gi - want)) < 1e-14

    _done(8, 300.0, t0, f"norm drift {drift:.2e} <= 100 tol; determinism, "
                        "independence, round-trip, refinement, periodicity, "
                        "anticommutation all hold")
