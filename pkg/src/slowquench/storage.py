"""Persistence: texture-map CSV, trajectory CSV and JSON reports.

All writers are deterministic (no timestamps, fixed key order, fixed
12-significant-digit decimals) so identical configs produce
byte-identical files, and every format is re-readable by the loaders
here.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ConfigError
from .models import BandField, BzGrid
from .protocols import QuenchProtocol
from .texture import SpinTextureMap
from .topology import InvariantResult, ZeroSet

_K_NAMES = ("k_x", "k_y", "k_z")


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _physical_columns(tex_map: SpinTextureMap):
    """Stored-component indices that carry data: the widened 1D map has
    an identically-zero y column that the file format omits."""
    if tex_map.model.bands == 2 and tex_map.grid.dim == 1:
        return (0, 2)
    return tuple(range(tex_map.values.shape[-1]))


def write_map_csv(tex_map: SpinTextureMap, path) -> None:
    dim = tex_map.grid.dim
    comps = _physical_columns(tex_map)
    header = list(_K_NAMES[:dim]) + [f"s_avg_{i}" for i in range(len(comps))]
    header.append("method")
    pts = tex_map.grid.points().reshape(-1, dim)
    vals = tex_map.values.reshape(-1, tex_map.values.shape[-1])[:, comps]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row_k, row_s in zip(pts, vals):
            writer.writerow([fmt(x) for x in row_k]
                            + [fmt(s) for s in row_s]
                            + [tex_map.method])


def read_map_csv(path, model: BandField, grid: BzGrid,
                 protocol: QuenchProtocol) -> SpinTextureMap:
    dim = grid.dim
    if model.bands == 4:
        n_comp = 4
    else:
        n_comp = 2 if dim == 1 else 3
    expected = list(_K_NAMES[:dim]) + [f"s_avg_{i}" for i in range(n_comp)] \
        + ["method"]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise ConfigError(
                f"map file {path} header {header} does not match the "
                f"configured model/grid (expected {expected})")
        rows = list(reader)
    n_total = int(np.prod(grid.shape))
    if len(rows) != n_total:
        raise ConfigError(
            f"map file {path} has {len(rows)} rows, grid needs {n_total}")
    data = np.array([[float(x) for x in row[:dim + n_comp]] for row in rows])
    methods = {row[dim + n_comp] for row in rows}
    if len(methods) != 1:
        raise ConfigError(f"map file {path} mixes methods {sorted(methods)}")
    k_file = data[:, :dim]
    k_grid = grid.points().reshape(-1, dim)
    if not np.allclose(k_file, k_grid, atol=1e-9, rtol=0.0):
        raise ConfigError(
            f"momenta in {path} do not match the configured grid")
    stored = data[:, dim:]
    if model.bands == 2 and dim == 1:
        vals = np.zeros((n_total, 3))
        vals[:, 0] = stored[:, 0]
        vals[:, 2] = stored[:, 1]
    else:
        vals = stored
    vals = vals.reshape(grid.shape + (vals.shape[-1],))
    return SpinTextureMap(grid=grid, values=vals, method=methods.pop(),
                          protocol=protocol, model=model)


def write_trajectory_csv(trajectory, path) -> None:
    """Dump a trajectory: TrajectorySample rows give t, the state's
    real/imaginary parts and the spin; (t, spin) pairs give t and the
    spin only (Bloch runs carry no wavefunction)."""
    first = trajectory[0]
    with_state = hasattr(first, "state")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if with_state:
            n = np.asarray(first.state).size
            names = []
            for i in range(n):
                names += [f"re_c{i}", f"im_c{i}"]
            spin_n = np.asarray(first.spin).size
            if spin_n == 3:
                spin_names = ["s_x", "s_y", "s_z"]
            else:
                spin_names = [f"g_{i}" for i in range(spin_n)]
            writer.writerow(["t"] + names + spin_names)
            for s in trajectory:
                st = np.asarray(s.state).reshape(-1)
                cells = [fmt(s.t)]
                for c in st:
                    cells += [fmt(c.real), fmt(c.imag)]
                cells += [fmt(x) for x in np.asarray(s.spin).reshape(-1)]
                writer.writerow(cells)
        else:
            writer.writerow(["t", "s_x", "s_y", "s_z"])
            for t, spin in trajectory:
                writer.writerow([fmt(t)] + [fmt(x) for x in
                                            np.asarray(spin).reshape(-1)])


def read_trajectory_csv(path):
    """Columns of a trajectory file as {name: array}."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ConfigError(f"trajectory file {path} is empty")
        rows = [[float(x) for x in row] for row in reader]
    arr = np.array(rows)
    return {name: arr[:, i] for i, name in enumerate(header)}


def zero_set_to_dict(z: ZeroSet) -> dict:
    d = {"kind": z.kind,
         "points": z.points.tolist(),
         "crossing_sign": z.crossing_sign.tolist(),
         "residual_inplane": z.residual_inplane.tolist(),
         "closed": z.closed,
         "orientation": z.orientation,
         "bis_fraction": z.bis_fraction}
    if z.index_points is not None:
        d["index_points"] = z.index_points.tolist()
    if z.faces is not None:
        d["faces"] = z.faces.tolist()
    return d


def zero_set_from_dict(d: dict) -> ZeroSet:
    return ZeroSet(points=np.array(d["points"], dtype=float),
                   kind=d["kind"],
                   crossing_sign=np.array(d["crossing_sign"], dtype=int),
                   residual_inplane=np.array(d["residual_inplane"]),
                   closed=bool(d["closed"]),
                   orientation=int(d["orientation"]),
                   faces=(np.array(d["faces"], dtype=int)
                          if "faces" in d else None),
                   index_points=(np.array(d["index_points"], dtype=float)
                                 if "index_points" in d else None),
                   bis_fraction=float(d["bis_fraction"]))


def invariant_to_dict(r: InvariantResult) -> dict:
    return {"value": r.value, "kind": r.kind,
            "diagnostics": _jsonable(r.diagnostics)}


def invariant_from_dict(d: dict) -> InvariantResult:
    return InvariantResult(value=int(d["value"]), kind=d["kind"],
                           diagnostics=dict(d.get("diagnostics", {})))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"report {path} is not valid JSON: {exc}") from None
