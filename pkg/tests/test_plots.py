"""Figure emission: valid SVG, byte determinism, input validation."""
import numpy as np
import pytest

from _helpers import ambiguous_ring_map
from slowquench.errors import ConfigError
from slowquench.landau_zener import (LzParams, averaged_spin,
                                     transition_probability)
from slowquench.models import BandField, BzGrid
from slowquench.plots import (plot_cross_sections_3d, plot_single_sweep,
                              plot_texture_1d, plot_texture_2d)
from slowquench.protocols import QuenchProtocol
from slowquench.texture import scan
from slowquench.topology import find_zero_sets


def _is_svg(path) -> bool:
    head = path.read_bytes()[:500]
    return b"<svg" in head


def test_texture_1d_plot(tmp_path):
    tex = scan(BandField.chain_1d(m_z=0.0, t_so=0.2), BzGrid(1, 64),
               QuenchProtocol.coulomb(1.0))
    sets = find_zero_sets(tex)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_texture_1d(tex, a, sets)
    plot_texture_1d(tex, b, sets)
    assert _is_svg(a)
    assert a.read_bytes() == b.read_bytes()
    with pytest.raises(ConfigError):
        plot_texture_1d(ambiguous_ring_map(), tmp_path / "x.svg")


def test_texture_2d_plot(tmp_path):
    tex = scan(BandField.qah_2d(m_z=1.0), BzGrid(2, 48),
               QuenchProtocol.coulomb(5.0))
    sets = find_zero_sets(tex)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_texture_2d(tex, a, sets)
    plot_texture_2d(tex, b, sets)
    assert _is_svg(a)
    assert a.read_bytes() == b.read_bytes()
    with pytest.raises(ConfigError):
        plot_texture_2d(scan(BandField.chain_1d(), BzGrid(1, 16),
                             QuenchProtocol.coulomb(1.0)), tmp_path / "x.svg")


def test_cross_section_plot(tmp_path):
    model = BandField.chiral_3d(m_z=2.0, t_so=0.2)
    proto = QuenchProtocol.coulomb(1.0, t_start=0.015, t_avg_begin=600.0,
                                   t_avg_end=1000.0)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    planes = ((2, np.pi / 2.0),)
    plot_cross_sections_3d(model, proto, a, n=7, planes=planes)
    plot_cross_sections_3d(model, proto, b, n=7, planes=planes)
    assert _is_svg(a)
    assert a.read_bytes() == b.read_bytes()


def test_single_sweep_plot(tmp_path):
    g = np.linspace(0.0, 1.2, 7)
    p = transition_probability(g, np.pi / 3.0)
    spins = np.array([averaged_spin(LzParams(g=gi, epsilon=2.0,
                                             theta=np.pi / 3.0)) for gi in g])
    jitter = spins + 1e-3
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_single_sweep(g, p, p + 1e-3, spins, jitter, a)
    plot_single_sweep(g, p, p + 1e-3, spins, jitter, b)
    assert _is_svg(a)
    assert a.read_bytes() == b.read_bytes()
