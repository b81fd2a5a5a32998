"""Band models, gamma algebra, grids and the phase lookup."""
import math

import numpy as np
import pytest

from slowquench.errors import ConfigError
from slowquench.models import (DIRAC, PAULI, BandField, BzGrid, GammaBasis,
                               expected_invariant)
from slowquench.protocols import QuenchProtocol


def test_pauli_and_dirac_anticommutation():
    for basis in (PAULI, DIRAC):
        eye = np.eye(basis.dim)
        mats = basis.matrices
        for i, gi in enumerate(mats):
            assert np.allclose(gi, gi.conj().T, atol=1e-14)
            for j, gj in enumerate(mats):
                anti = gi @ gj + gj @ gi
                want = 2.0 * eye if i == j else np.zeros_like(eye)
                assert np.allclose(anti, want, atol=1e-14)


def test_dirac_kronecker_convention():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    want = (np.kron(sz, sx), np.kron(sx, eye), np.kron(sy, eye),
            np.kron(sz, sz))
    for got, ref in zip(DIRAC.matrices, want):
        assert np.array_equal(got, ref)


def test_two_band_eigenvalues_are_plus_minus_field_norm():
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = rng.normal(size=3)
        ham = PAULI.hamiltonian(h)
        vals = np.sort(np.linalg.eigvalsh(ham))
        r = np.linalg.norm(h)
        assert abs(vals[0] + r) < 1e-12 and abs(vals[1] - r) < 1e-12


def test_four_band_eigenvalues_doubly_degenerate():
    rng = np.random.default_rng(4)
    h = rng.normal(size=4)
    vals = np.sort(np.linalg.eigvalsh(DIRAC.hamiltonian(h)))
    r = np.linalg.norm(h)
    assert np.allclose(vals, [-r, -r, r, r], atol=1e-12)


@pytest.mark.parametrize("model", [
    BandField.chain_1d(m_z=0.3),
    BandField.qah_2d(m_z=1.0),
    BandField.qah_2d(m_z=-1.0, t_so_x=1.0, t_so_y=2.0, quench_axis="y"),
    BandField.chiral_3d(m_z=2.0),
])
def test_field_periodicity(model):
    rng = np.random.default_rng(11)
    for _ in range(10):
        k = rng.uniform(-math.pi, math.pi, size=model.dim)
        if model.dim == 1:
            k = float(k[0])
        base = model.field(k)
        for i in range(model.dim):
            shift = np.zeros(model.dim)
            shift[i] = 2.0 * math.pi
            k2 = k + (shift[0] if model.dim == 1 else shift)
            assert np.allclose(model.field(k2), base, atol=1e-12)


def test_1d_post_quench_values():
    model = BandField.chain_1d(m_z=0.0)
    assert np.allclose(model.field(0.0), [0.0, -1.0], atol=1e-15)
    # zeros of h_z sit at +-arccos(m_z / t0)
    m = BandField.chain_1d(m_z=0.5)
    k_star = math.acos(0.5)
    assert abs(m.field(k_star)[1]) < 1e-15
    assert abs(m.field(-k_star)[1]) < 1e-15


def test_1d_no_crossing_for_large_mass():
    model = BandField.chain_1d(m_z=1.5)
    k = np.linspace(-math.pi, math.pi, 1001)
    hz = model.field(k)[:, 1]
    assert hz.min() > 0.0


def test_2d_post_quench_values():
    model = BandField.qah_2d(m_z=1.0)
    assert np.allclose(model.field([0.0, 0.0]), [0.0, 0.0, -1.0], atol=1e-15)
    # the h_z = 0 ring solves cos kx + cos ky = m_z / t0
    k = np.array([math.acos(0.5), math.acos(0.5)])
    assert abs(model.field(k)[2]) < 1e-14


def test_3d_gap_closes_at_phase_boundary():
    model = BandField.chiral_3d(m_z=3.0)
    h = model.field([0.0, 0.0, 0.0])
    assert np.allclose(h, 0.0, atol=1e-15)


def test_coulomb_late_time_field_equals_post_quench():
    proto = QuenchProtocol.coulomb(2.0)
    model = BandField.qah_2d(m_z=1.0)
    k = np.array([0.4, -1.1])
    late = model.field(k, t=1e13, protocol=proto)
    assert np.allclose(late, model.field(k), atol=1e-12)


def test_quench_term_enters_declared_axis():
    proto = QuenchProtocol.coulomb(2.0)
    my = BandField.qah_2d(m_z=1.0, quench_axis="y")
    k = np.array([0.4, -1.1])
    diff = my.field(k, t=1.0, protocol=proto) - my.field(k)
    assert np.allclose(diff, [0.0, 2.0, 0.0], atol=1e-12)


def test_grid_nodes_and_spacing():
    grid = BzGrid(dim=2, n_points=(8, 10))
    ax0 = grid.axis(0)
    assert ax0[0] == -math.pi
    assert np.allclose(np.diff(ax0), grid.spacing(0), atol=1e-15)
    assert grid.shape == (8, 10)
    assert math.pi not in ax0  # half-open interval


def test_grid_validation():
    with pytest.raises(ConfigError):
        BzGrid(dim=4, n_points=5)
    with pytest.raises(ConfigError):
        BzGrid(dim=1, n_points=3)
    with pytest.raises(ConfigError):
        BzGrid(dim=2, n_points=(9,))


def test_model_validation():
    with pytest.raises(ConfigError):
        BandField.chain_1d(m_z=0.0, t0=0.0)
    with pytest.raises(ConfigError):
        BandField.chain_1d(m_z=0.0, t_so=-0.1)
    with pytest.raises(ConfigError):
        BandField.qah_2d(m_z=1.0, quench_axis="w")


@pytest.mark.parametrize("model,want", [
    (BandField.chain_1d(m_z=0.5), 1),
    (BandField.chain_1d(m_z=-0.5), 1),
    (BandField.chain_1d(m_z=1.5), 0),
    (BandField.qah_2d(m_z=1.0), -1),
    (BandField.qah_2d(m_z=-1.0), 1),
    (BandField.qah_2d(m_z=2.5), 0),
    (BandField.chiral_3d(m_z=2.0), -1),
    (BandField.chiral_3d(m_z=-2.0), -1),
    (BandField.chiral_3d(m_z=0.0), 2),
    (BandField.chiral_3d(m_z=4.0), 0),
])
def test_expected_invariant_lookup(model, want):
    assert expected_invariant(model) == want


@pytest.mark.parametrize("model", [
    BandField.chain_1d(m_z=1.0),
    BandField.qah_2d(m_z=0.0),
    BandField.qah_2d(m_z=2.0),
    BandField.chiral_3d(m_z=1.0),
])
def test_expected_invariant_rejects_gap_closing(model):
    with pytest.raises(ConfigError):
        expected_invariant(model)
