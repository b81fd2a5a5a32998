"""File formats: lossless round-trips, byte determinism, validation."""
import math

import numpy as np
import pytest

from _helpers import synthetic_dephased_map
from slowquench.errors import ConfigError
from slowquench.integrators import bloch_trajectory, ground_state_two_level, integrate
from slowquench.models import BandField, BzGrid
from slowquench.protocols import QuenchProtocol
from slowquench.storage import (fmt, invariant_from_dict, invariant_to_dict,
                                read_map_csv, read_report,
                                read_trajectory_csv, write_map_csv,
                                write_report, write_trajectory_csv,
                                zero_set_from_dict, zero_set_to_dict)
from slowquench.texture import scan
from slowquench.topology import InvariantResult, ZeroSet, find_zero_sets


def test_fmt_twelve_significant_digits():
    assert fmt(math.pi) == "3.14159265359"
    assert fmt(1.0) == "1"
    assert fmt(-2.5e-13) == "-2.5e-13"


def _map_2d():
    model = BandField.qah_2d(m_z=1.0, t_so_x=0.2, t_so_y=0.2)
    grid = BzGrid(2, 16)
    proto = QuenchProtocol.coulomb(5.0)
    return scan(model, grid, proto, method="analytic"), model, grid, proto


def test_map_csv_round_trip_2d(tmp_path):
    tex, model, grid, proto = _map_2d()
    path = tmp_path / "map.csv"
    write_map_csv(tex, path)
    header = path.read_text().splitlines()[0]
    assert header == "k_x,k_y,s_avg_0,s_avg_1,s_avg_2,method"
    back = read_map_csv(path, model, grid, proto)
    assert back.method == tex.method
    assert np.allclose(back.values, tex.values, atol=5e-13)
    again = tmp_path / "map2.csv"
    write_map_csv(back, again)
    assert path.read_bytes() == again.read_bytes()


def test_map_csv_round_trip_1d_widened(tmp_path):
    model = BandField.chain_1d(m_z=0.5, t_so=0.2)
    grid = BzGrid(1, 33)
    proto = QuenchProtocol.coulomb(1.0)
    tex = scan(model, grid, proto, method="analytic")
    path = tmp_path / "map.csv"
    write_map_csv(tex, path)
    assert path.read_text().splitlines()[0] == "k_x,s_avg_0,s_avg_1,method"
    back = read_map_csv(path, model, grid, proto)
    assert back.values.shape == (33, 3)
    assert np.all(back.values[:, 1] == 0.0)
    assert np.allclose(back.values, tex.values, atol=5e-13)


def test_map_csv_round_trip_four_band(tmp_path):
    model = BandField.chiral_3d(m_z=2.0, t_so=0.2)
    grid = BzGrid(3, 8)
    tex = synthetic_dephased_map(model, grid, g=1.0)
    path = tmp_path / "map.csv"
    write_map_csv(tex, path)
    cols = path.read_text().splitlines()[0].split(",")
    assert cols == ["k_x", "k_y", "k_z", "s_avg_0", "s_avg_1", "s_avg_2",
                    "s_avg_3", "method"]
    back = read_map_csv(path, model, grid, tex.protocol)
    assert np.allclose(back.values, tex.values, atol=5e-13)


def test_map_csv_validation(tmp_path):
    tex, model, grid, proto = _map_2d()
    path = tmp_path / "map.csv"
    write_map_csv(tex, path)
    with pytest.raises(ConfigError, match="header"):
        read_map_csv(path, BandField.chain_1d(), BzGrid(1, 16), proto)
    with pytest.raises(ConfigError, match="rows"):
        read_map_csv(path, model, BzGrid(2, 12), proto)
    lines = path.read_text().splitlines()
    cells = lines[1].split(",")
    cells[0] = fmt(float(cells[0]) + 0.1)
    shifted = tmp_path / "shifted.csv"
    shifted.write_text("\n".join([lines[0], ",".join(cells)] + lines[2:]) + "\n")
    with pytest.raises(ConfigError, match="momenta"):
        read_map_csv(shifted, model, grid, proto)
    cells = lines[1].split(",")
    cells[-1] = "numeric"
    mixed = tmp_path / "mixed.csv"
    mixed.write_text("\n".join([lines[0], ",".join(cells)] + lines[2:]) + "\n")
    with pytest.raises(ConfigError, match="mixes methods"):
        read_map_csv(mixed, model, grid, proto)


def test_trajectory_csv_wavefunction(tmp_path):
    proto = QuenchProtocol.coulomb(1.0, t_avg_begin=5.0, t_avg_end=12.0)
    field = (1.0, 0.0, 1.0)
    eps0 = proto.resolve_t_start(math.sqrt(2.0))
    psi0 = ground_state_two_level(field[0], field[1], field[2] + 1.0 / eps0)
    traj = integrate(proto, field, psi0, tol=1e-8)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    cols = read_trajectory_csv(path)
    assert list(cols) == ["t", "re_c0", "im_c0", "re_c1", "im_c1",
                          "s_x", "s_y", "s_z"]
    assert cols["t"][0] == pytest.approx(traj[0].t, abs=1e-12)
    i = len(traj) // 2
    assert cols["re_c0"][i] == pytest.approx(traj[i].state[0].real, abs=5e-13)
    assert cols["s_z"][-1] == pytest.approx(traj[-1].spin[2], abs=5e-13)


def test_trajectory_csv_bloch_pairs(tmp_path):
    proto = QuenchProtocol.coulomb(1.0, t_avg_begin=5.0, t_avg_end=12.0)
    traj = bloch_trajectory(proto, (1.0, 0.0, 1.0), tol=1e-8)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    cols = read_trajectory_csv(path)
    assert list(cols) == ["t", "s_x", "s_y", "s_z"]
    assert len(cols["t"]) == len(traj)
    assert cols["s_x"][3] == pytest.approx(traj[3][1][0], abs=5e-13)


def test_trajectory_read_rejects_empty(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ConfigError, match="empty"):
        read_trajectory_csv(empty)


def test_zero_set_round_trip():
    tex, *_ = _map_2d()
    sets = find_zero_sets(tex)
    assert sets
    for z in sets:
        back = zero_set_from_dict(zero_set_to_dict(z))
        assert back.kind == z.kind
        assert back.closed == z.closed
        assert back.orientation == z.orientation
        assert np.array_equal(back.points, z.points)
        assert np.array_equal(back.crossing_sign, z.crossing_sign)
        assert np.array_equal(back.index_points, z.index_points)
        assert (back.faces is None) == (z.faces is None)


def test_zero_set_round_trip_with_faces():
    model = BandField.chiral_3d(m_z=2.0, t_so=0.2)
    tex = synthetic_dephased_map(model, BzGrid(3, 16), g=1.0)
    z = next(s for s in find_zero_sets(tex) if s.faces is not None)
    back = zero_set_from_dict(zero_set_to_dict(z))
    assert np.array_equal(back.faces, z.faces)


def test_invariant_round_trip():
    r = InvariantResult(value=-1, kind="chern_2d",
                        diagnostics={"contributions": [-1.0],
                                     "closure_defect": 1.2e-4,
                                     "min_texture_magnitude": 0.31})
    back = invariant_from_dict(invariant_to_dict(r))
    assert back.value == r.value and back.kind == r.kind
    assert back.diagnostics == r.diagnostics


def test_report_json_handles_numpy_and_inf(tmp_path):
    report = {"window_end": math.inf,
              "tilt": -math.inf,
              "values": np.array([1.0, 2.5]),
              "count": np.int64(7),
              "nested": {"x": np.float64(0.25), "flags": (True, False)}}
    path = tmp_path / "report.json"
    write_report(report, path)
    back = read_report(path)
    assert back["window_end"] == "inf"
    assert back["tilt"] == "-inf"
    assert back["values"] == [1.0, 2.5]
    assert back["count"] == 7
    assert back["nested"] == {"x": 0.25, "flags": [True, False]}
    again = tmp_path / "report2.json"
    write_report(report, again)
    assert path.read_bytes() == again.read_bytes()


def test_report_read_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        read_report(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("} nope")
    with pytest.raises(ConfigError, match="not valid JSON"):
        read_report(bad)
