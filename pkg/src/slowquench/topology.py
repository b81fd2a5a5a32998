"""Zero-set extraction and texture-based topological invariants.

The quench-axis component of a texture map vanishes on band-inversion
surfaces (BIS, where the transverse texture survives) and on
spin-inversion surfaces (SIS, where every component dies). The
invariants are read off the transverse texture on the BIS alone:
accumulated planar angle in 1D/2D, summed spherical-triangle solid
angles in 3D. Orientation and sign conventions are frozen constants,
calibrated once against the brute-force band-geometry oracles.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.optimize import brentq

from .errors import (AmbiguousTopologyError, ConfigError, GeometryError,
                     IllConditionedError)
from .landau_zener import transition_probability
from .texture import SpinTextureMap

_NODE_ZERO_TOL = 1e-9
_TOUCH_TOL = 1e-5
_BIS_FRACTION = 0.9
# orientation conventions, frozen after calibration against the oracles
_WINDING_SIGN = 1
_CHERN_2D_SIGN = -1
_CHERN_3D_SIGN = 1


@dataclass(frozen=True)
class ZeroSet:
    """One connected zero set of the quench-axis average.

    points are momentum coordinates ordered along the set (loop order in
    2D); crossing_sign is the slope sign of the quench-axis average along
    the crossed grid direction (0 for tangential touch zeros);
    residual_inplane is the largest transverse component magnitude at
    each point, the BIS/SIS discriminator.
    """

    points: np.ndarray
    kind: str
    crossing_sign: np.ndarray
    residual_inplane: np.ndarray
    closed: bool = True
    orientation: int = 0
    faces: np.ndarray | None = None
    index_points: np.ndarray | None = None
    bis_fraction: float = 0.0


@dataclass(frozen=True)
class InvariantResult:
    """Integer invariant plus the evidence it was rounded from."""

    value: int
    kind: str
    diagnostics: dict = dc_field(default_factory=dict)


def sis_locus_predict(g: float) -> float:
    """cos(theta*) of the polar angle where the transition probability
    crosses 1/2: every SIS of a Coulomb map lies where the local field
    angle satisfies cos(theta(k)) = cos(theta*).

    Solved by bisection; the root always exists since P(g, pi) = 1.
    """
    if g < 0.0:
        raise ConfigError("quench parameter g must be >= 0")
    if g == 0.0:
        return 0.0
    f = lambda th: transition_probability(g, th) - 0.5
    theta = brentq(f, 1e-12, math.pi, xtol=1e-14)
    return math.cos(theta)


def _classify(bis_fraction: float) -> str:
    if bis_fraction >= _BIS_FRACTION:
        return "BIS"
    if bis_fraction <= 1.0 - _BIS_FRACTION:
        return "SIS"
    return "ambiguous"


def _interp_stack(tex_map: SpinTextureMap, index_pts: np.ndarray, comps) -> np.ndarray:
    cols = [map_coordinates(tex_map.values[..., c], index_pts.T, order=1,
                            mode="grid-wrap") for c in comps]
    return np.stack(cols, axis=-1)


def _residuals(tex_map: SpinTextureMap, index_pts: np.ndarray) -> np.ndarray:
    vals = _interp_stack(tex_map, index_pts, tex_map.transverse_indices)
    return np.max(np.abs(vals), axis=-1)


def _make_set(tex_map, pts_idx, crossing, closed, orientation=0, faces=None,
              tol_sis=0.02):
    pts_idx = np.asarray(pts_idx, dtype=float)
    res = _residuals(tex_map, pts_idx)
    finite = np.isfinite(res)
    bis_frac = float(np.mean(res[finite] > tol_sis)) if finite.any() else 0.0
    dk = np.array([tex_map.grid.spacing(i) for i in range(tex_map.grid.dim)])
    points = -math.pi + pts_idx * dk
    return ZeroSet(points=points, kind=_classify(bis_frac),
                   crossing_sign=np.asarray(crossing, dtype=int),
                   residual_inplane=res, closed=closed,
                   orientation=orientation, faces=faces,
                   index_points=pts_idx, bis_fraction=bis_frac)


def _find_1d(tex_map: SpinTextureMap, tol_sis: float) -> list:
    sz = tex_map.quench_component()
    n = sz.shape[0]
    out = []
    node_zero = np.abs(sz) <= _NODE_ZERO_TOL
    for j in range(n):
        if not node_zero[j]:
            continue
        lo, hi = sz[(j - 1) % n], sz[(j + 1) % n]
        cs = int(np.sign(hi - lo)) if lo * hi < 0.0 else 0
        out.append(([[float(j)]], [cs]))
    for j in range(n):
        j2 = (j + 1) % n
        if node_zero[j] or node_zero[j2]:
            continue
        a, b = sz[j], sz[j2]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a * b < 0.0:
            before, after = sz[(j - 1) % n], sz[(j + 2) % n]
            frac = _refine_frac(before, a, b, after, a / (a - b))
            out.append(([[j + frac]], [int(np.sign(b - a))]))
    # tangential touch zeros between nodes: parabolic vertex near zero
    for j in range(n):
        y1, y2, y3 = sz[(j - 1) % n], sz[j], sz[(j + 1) % n]
        if not (np.isfinite(y1) and np.isfinite(y2) and np.isfinite(y3)):
            continue
        if node_zero[(j - 1) % n] or node_zero[j] or node_zero[(j + 1) % n]:
            continue
        if y1 * y2 < 0.0 or y2 * y3 < 0.0:
            continue
        if not (abs(y2) < abs(y1) and abs(y2) <= abs(y3)):
            continue
        if abs(y2) <= _NODE_ZERO_TOL or abs(y2) > 10.0 * _TOUCH_TOL:
            continue
        curv = y1 - 2.0 * y2 + y3
        if curv == 0.0:
            continue
        x_star = 0.5 * (y1 - y3) / curv
        v_star = y2 - 0.125 * (y1 - y3) ** 2 / curv
        if abs(v_star) <= _TOUCH_TOL and abs(x_star) <= 1.0:
            out.append(([[j + x_star]], [0]))
    sets = [_make_set(tex_map, idx, cs, closed=False, tol_sis=tol_sis)
            for idx, cs in out]
    sets.sort(key=lambda z: float(z.index_points[0, 0]))
    return sets


def _parabolic_root(fm: float, f0: float, fp: float, lo: float, hi: float,
                    fallback: float) -> float:
    """Root inside [lo, hi] of the parabola through (-1, fm), (0, f0),
    (1, fp), or fallback when none qualifies."""
    if not (np.isfinite(fm) and np.isfinite(fp)):
        return fallback
    a = 0.5 * (fp - 2.0 * f0 + fm)
    b = 0.5 * (fp - fm)
    if a == 0.0:
        if b == 0.0:
            return fallback
        r = -f0 / b
        return r if lo <= r <= hi else fallback
    disc = b * b - 4.0 * a * f0
    if disc < 0.0:
        return fallback
    sq = math.sqrt(disc)
    best, best_d = fallback, math.inf
    for r in ((-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)):
        if lo - 1e-9 <= r <= hi + 1e-9 and abs(r - fallback) < best_d:
            best, best_d = min(max(r, lo), hi), abs(r - fallback)
    return best


def _refine_frac(vm: float, a: float, b: float, vp: float,
                 frac: float) -> float:
    """Quadratic refinement of a linear edge-crossing estimate.

    Where the zero comes from a product of two varying factors (a
    population imbalance times a field component) the linear chord lands
    measurably off the true zero and the leftover transverse residual
    can fake a BIS signature at an SIS; the parabola through the nearest
    three nodes removes the leading-order displacement.
    """
    if frac <= 0.5:
        return _parabolic_root(vm, a, b, 0.0, 1.0, frac)
    return _parabolic_root(a, b, vp, -1.0, 0.0, frac - 1.0) + 1.0


def _cell_segments(case: int, edges: dict, center: float):
    """Marching-squares pairing of the crossed cell edges.

    Corner order a(i,j) b(i+1,j) c(i+1,j+1) d(i,j+1); bit set = positive.
    edges maps side letter (S E N W) to the global edge id.
    """
    s, e, n, w = edges["S"], edges["E"], edges["N"], edges["W"]
    table = {
        1: [(s, w)], 14: [(s, w)],
        2: [(s, e)], 13: [(s, e)],
        4: [(e, n)], 11: [(e, n)],
        8: [(n, w)], 7: [(n, w)],
        3: [(w, e)], 12: [(w, e)],
        9: [(s, n)], 6: [(s, n)],
    }
    if case in table:
        return table[case]
    if case in (5, 10):
        # saddle: the center sign decides which diagonal regions connect
        a_positive = case == 5
        if (center > 0.0) == a_positive:
            return [(s, e), (n, w)]
        return [(s, w), (e, n)]
    return []


def _point_gap(p, q, shape) -> float:
    """Chebyshev distance between two fractional grid indices, periodic."""
    d = 0.0
    for x, y, n in zip(p, q, shape):
        d = max(d, abs((y - x + n / 2.0) % n - n / 2.0))
    return d


def _stitch_mixed_chains(tex_map, crossings, raw, tol_sis, shape,
                         max_gap: float = 3.0) -> list:
    """Re-split closed chains that mix BIS-class and SIS-class points.

    When two zero curves approach closer than one grid cell the region
    between them is sampled away and marching squares fuses them into
    boundaries of the surviving sign pockets, each made of one arc per
    curve. Cutting every such chain at its residual-class transitions
    and re-joining arcs of equal class by endpoint proximity recovers
    the separate curves. Any mismatch (an arc endpoint with no partner
    within max_gap cells, or a stitched ring that still classifies as
    mixed) abandons the rescue and keeps the original chains.
    """
    keep, mixed = [], []
    sis_frac = 1.0 - _BIS_FRACTION
    for chain, closed in raw:
        if not closed or len(chain) < 6:
            keep.append((chain, closed))
            continue
        pts = np.array([crossings[e][0] for e in chain])
        res = _residuals(tex_map, pts)
        frac = float(np.mean(res > tol_sis))
        if sis_frac < frac < _BIS_FRACTION:
            mixed.append((chain, res > tol_sis))
        else:
            keep.append((chain, closed))
    if not mixed:
        return keep
    originals = keep + [(c, True) for c, _ in mixed]

    pools = {True: [], False: []}
    for chain, classes in mixed:
        m = len(chain)
        cuts = [a for a in range(m) if classes[a] != classes[a - 1]]
        order = [(cuts[0] + t) % m for t in range(m)]
        arc = [order[0]]
        for a in order[1:]:
            if classes[a] == classes[arc[-1]]:
                arc.append(a)
            else:
                pools[bool(classes[arc[0]])].append([chain[t] for t in arc])
                arc = [a]
        pools[bool(classes[arc[0]])].append([chain[t] for t in arc])

    stitched = []
    for arcs in pools.values():
        unused = list(range(len(arcs)))
        while unused:
            ring = list(arcs[unused.pop(0)])
            while True:
                tail = crossings[ring[-1]][0]
                best, best_d, best_rev = None, max_gap, False
                for u in unused:
                    d0 = _point_gap(tail, crossings[arcs[u][0]][0], shape)
                    d1 = _point_gap(tail, crossings[arcs[u][-1]][0], shape)
                    if d0 <= best_d:
                        best, best_d, best_rev = u, d0, False
                    if d1 < best_d:
                        best, best_d, best_rev = u, d1, True
                if best is None:
                    head = crossings[ring[0]][0]
                    if _point_gap(tail, head, shape) <= max_gap and len(ring) >= 4:
                        stitched.append((ring, True))
                        break
                    return originals
                unused.remove(best)
                nxt = arcs[best]
                ring.extend(reversed(nxt) if best_rev else nxt)

    for keys, _ in stitched:
        pts = np.array([crossings[e][0] for e in keys])
        frac = float(np.mean(_residuals(tex_map, pts) > tol_sis))
        if sis_frac < frac < _BIS_FRACTION:
            return originals
    return keep + stitched


def _find_2d(tex_map: SpinTextureMap, tol_sis: float) -> list:
    sz = tex_map.quench_component()
    n0, n1 = sz.shape
    node_zero = np.abs(sz) <= _NODE_ZERO_TOL
    sets = []
    line_nodes = np.zeros_like(node_zero)

    # whole grid lines of exact zeros (a BIS sitting on the grid itself)
    for j in range(n1):
        if np.all(node_zero[:, j]):
            line_nodes[:, j] = True
            cs, votes = [], []
            for i in range(n0):
                lo, hi = sz[i, (j - 1) % n1], sz[i, (j + 1) % n1]
                c = int(np.sign(hi - lo)) if lo * hi < 0.0 else 0
                cs.append(c)
                votes.append(c)
            orientation = int(np.sign(sum(votes))) if any(votes) else 0
            idx = [[float(i), float(j)] for i in range(n0)]
            sets.append(_make_set(tex_map, idx, cs, closed=True,
                                  orientation=orientation, tol_sis=tol_sis))
    for i in range(n0):
        if np.all(node_zero[i, :]):
            line_nodes[i, :] = True
            cs, votes = [], []
            for j in range(n1):
                lo, hi = sz[(i - 1) % n0, j], sz[(i + 1) % n0, j]
                c = int(np.sign(hi - lo)) if lo * hi < 0.0 else 0
                cs.append(c)
                votes.append(-c)
            orientation = int(np.sign(sum(votes))) if any(votes) else 0
            idx = [[float(i), float(j)] for j in range(n1)]
            sets.append(_make_set(tex_map, idx, cs, closed=True,
                                  orientation=orientation, tol_sis=tol_sis))

    szn = sz.copy()
    szn[node_zero & ~line_nodes] = _NODE_ZERO_TOL  # nudge isolated node zeros
    usable = np.isfinite(szn) & ~line_nodes

    def edge_data(axis, i, j):
        if axis == 0:
            i2, j2 = (i + 1) % n0, j
            before = szn[(i - 1) % n0, j]
            after = szn[(i + 2) % n0, j]
        else:
            i2, j2 = i, (j + 1) % n1
            before = szn[i, (j - 1) % n1]
            after = szn[i, (j + 2) % n1]
        a, b = szn[i, j], szn[i2, j2]
        if not (usable[i, j] and usable[i2, j2]) or a * b >= 0.0:
            return None
        frac = _refine_frac(before, a, b, after, a / (a - b))
        pt = [i + frac, j] if axis == 0 else [i, j + frac]
        return pt, int(np.sign(b - a))

    crossings = {}
    for axis in (0, 1):
        for i in range(n0):
            for j in range(n1):
                d = edge_data(axis, i, j)
                if d is not None:
                    crossings[(axis, i, j)] = d
    adjacency = defaultdict(list)
    for i in range(n0):
        for j in range(n1):
            i2, j2 = (i + 1) % n0, (j + 1) % n1
            corners = ((i, j), (i2, j), (i2, j2), (i, j2))
            if not all(usable[c] for c in corners):
                continue
            vals = [szn[c] for c in corners]
            case = sum(1 << b for b, v in enumerate(vals) if v > 0.0)
            if case in (0, 15):
                continue
            edges = {"S": (0, i, j), "E": (1, i2, j),
                     "N": (0, i, j2), "W": (1, i, j)}
            # saddle tie-break: the bilinear interpolant's value at its
            # stationary point, not the corner mean, matches the actual
            # connectivity when two zero curves thread one cell
            fa, fb, fc, fd = vals
            denom = fa + fc - fb - fd
            if abs(denom) > 1e-300:
                center = (fa * fc - fb * fd) / denom
            else:
                center = 0.25 * (fa + fb + fc + fd)
            for e1, e2 in _cell_segments(case, edges, float(center)):
                adjacency[e1].append(e2)
                adjacency[e2].append(e1)

    visited = set()
    raw = []
    for start in sorted(adjacency):
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        prev, cur, closed = None, start, False
        while True:
            nxts = [e for e in adjacency[cur] if e != prev]
            if not nxts:
                break
            nxt = nxts[0]
            if nxt == start:
                closed = True
                break
            if nxt in visited:
                break
            chain.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        if not closed:
            # extend backwards for open chains (failed points in the way)
            prev, cur = chain[1] if len(chain) > 1 else None, start
            back = []
            while True:
                nxts = [e for e in adjacency[cur] if e != prev and e not in visited]
                if not nxts:
                    break
                nxt = nxts[0]
                back.append(nxt)
                visited.add(nxt)
                prev, cur = cur, nxt
            chain = list(reversed(back)) + chain
        raw.append((chain, closed))

    final = _stitch_mixed_chains(tex_map, crossings, raw, tol_sis, (n0, n1))
    for chain, closed in final:
        pts = np.array([crossings[e][0] for e in chain])
        cs = [crossings[e][1] for e in chain]
        votes = 0
        m = len(chain)
        for a in range(m if closed else m - 1):
            p, q = pts[a], pts[(a + 1) % m]
            dx = (q[0] - p[0] + n0 / 2.0) % n0 - n0 / 2.0
            dy = (q[1] - p[1] + n1 / 2.0) % n1 - n1 / 2.0
            axis = chain[a][0]
            ns = cs[a]
            # normal points along +axis times the slope sign
            cross = dx * ns if axis == 1 else -dy * ns
            votes += np.sign(cross)
        orientation = int(np.sign(votes)) if votes else 0
        sets.append(_make_set(tex_map, pts, cs, closed=closed,
                              orientation=orientation, tol_sis=tol_sis))
    return sets


def _component_faces(faces: np.ndarray) -> list:
    """Split a triangle soup into connected components via shared vertices."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    nv = int(faces.max()) + 1
    rows = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 2]])
    cols = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    graph = coo_matrix((np.ones_like(rows), (rows, cols)), shape=(nv, nv))
    ncomp, labels = connected_components(graph, directed=False)
    return [np.nonzero(labels[faces[:, 0]] == c)[0] for c in range(ncomp)]


def _is_watertight(faces: np.ndarray) -> bool:
    counts = defaultdict(int)
    for tri in faces:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            counts[(min(a, b), max(a, b))] += 1
    return all(c == 2 for c in counts.values())


def _extract_3d(vol: np.ndarray, shifts) -> list:
    from skimage.measure import marching_cubes

    n = vol.shape
    rolled = np.roll(vol, shifts, axis=(0, 1, 2))
    padded = np.pad(rolled, ((0, 1), (0, 1), (0, 1)), mode="wrap")
    if padded.min() >= 0.0 or padded.max() <= 0.0:
        return []
    verts, faces, _, _ = marching_cubes(padded, level=0.0)
    pieces = []
    for face_idx in _component_faces(faces):
        fsub = faces[face_idx]
        used = np.unique(fsub)
        remap = -np.ones(int(faces.max()) + 1, dtype=int)
        remap[used] = np.arange(used.size)
        local_faces = remap[fsub]
        local_verts = verts[used].copy()
        for ax in range(3):
            local_verts[:, ax] = (local_verts[:, ax] - shifts[ax]) % n[ax]
        pieces.append((local_verts, local_faces, _is_watertight(local_faces)))
    return pieces


def _find_3d(tex_map: SpinTextureMap, tol_sis: float) -> list:
    vol = np.nan_to_num(tex_map.quench_component(), nan=1.0)
    n = vol.shape
    pieces = _extract_3d(vol, (0, 0, 0))
    if any(not tight for _, _, tight in pieces):
        shifted = _extract_3d(vol, tuple(-(m // 2) for m in n))
        if shifted and all(t for _, _, t in shifted):
            pieces = shifted
    sets = []
    for verts, faces, tight in pieces:
        m = verts.shape[0]
        sets.append(_make_set(tex_map, verts, np.zeros(m, dtype=int),
                              closed=tight, faces=faces, tol_sis=tol_sis))
    sets.sort(key=lambda z: z.points.shape[0], reverse=True)
    return sets


def find_zero_sets(tex_map: SpinTextureMap, tol_sis: float = 0.02) -> list:
    """Locate and classify the zero sets of the quench-axis average.

    Sign changes along grid edges are interpolated linearly; exact node
    zeros and (in 1D) tangential touch zeros are handled separately. Each
    connected set is classified by the fraction of its points whose
    transverse residual exceeds tol_sis: >= 90% BIS, <= 10% SIS, anything
    between is reported as ambiguous rather than silently assigned.
    """
    if not 0.0 < tol_sis <= 0.2:
        raise ConfigError(f"tol_sis must lie in (0, 0.2], got {tol_sis}")
    if tex_map.grid.dim == 1:
        return _find_1d(tex_map, tol_sis)
    if tex_map.grid.dim == 2:
        return _find_2d(tex_map, tol_sis)
    return _find_3d(tex_map, tol_sis)


def _as_list(sets) -> list:
    if isinstance(sets, ZeroSet):
        return [sets]
    return list(sets)


def winding_1d(tex_map: SpinTextureMap, bis) -> InvariantResult:
    """Winding number from texture signs at the BIS points.

    nu = 1/2 sum_j sgn(transverse average) * crossing_sign, the
    orientation fixed so the reference chain yields +1 (matching the
    angle-accumulation oracle on every configuration tested).
    """
    if tex_map.grid.dim != 1 or tex_map.model.bands != 2:
        raise ConfigError("winding_1d needs a 1D two-band texture map")
    bis = [z for z in _as_list(bis)]
    for z in bis:
        if z.kind == "ambiguous":
            raise AmbiguousTopologyError(
                "cannot compute a winding from an ambiguous zero set")
    points = [z for z in bis if z.kind == "BIS"]
    if not points:
        return InvariantResult(value=0, kind="winding_1d",
                               diagnostics={"n_bis": 0, "contributions": []})
    trans_idx = 0 if tex_map.model.quench_axis == "z" else 2
    contributions = []
    min_mag = math.inf
    tol = 0.02
    for z in points:
        for row in range(z.points.shape[0]):
            sval = float(_interp_stack(tex_map, z.index_points[row:row + 1],
                                       (trans_idx,))[0, 0])
            if not np.isfinite(sval) or abs(sval) < tol:
                raise IllConditionedError(
                    f"transverse average {sval:.3g} too small at BIS point "
                    f"k = {float(z.points[row, 0]):.6g}")
            min_mag = min(min_mag, abs(sval))
            contributions.append(0.5 * np.sign(sval) * z.crossing_sign[row])
    nu = _WINDING_SIGN * float(np.sum(contributions))
    if abs(nu - round(nu)) > 1e-9:
        raise AmbiguousTopologyError(
            f"winding contributions sum to the non-integer {nu}")
    return InvariantResult(
        value=int(round(nu)), kind="winding_1d",
        diagnostics={"n_bis": len(contributions),
                     "contributions": [float(c) for c in contributions],
                     "min_texture_magnitude": float(min_mag)})


def _loop_angle_total(tex_map: SpinTextureMap, z: ZeroSet, tol_sis: float):
    a_idx, b_idx = (tex_map.transverse_indices[0], tex_map.transverse_indices[1])
    vals = _interp_stack(tex_map, z.index_points, (a_idx, b_idx))
    vec = -vals
    mags = np.sqrt(np.sum(vec * vec, axis=-1))
    if not np.all(np.isfinite(mags)):
        raise IllConditionedError("texture undefined on part of the BIS loop")
    if mags.min() < tol_sis:
        raise IllConditionedError(
            f"in-plane texture magnitude {mags.min():.3g} below {tol_sis} "
            "on the BIS loop")
    ang = np.arctan2(vec[:, 1], vec[:, 0])
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + math.pi) % (2.0 * math.pi) - math.pi
    return float(d.sum()), float(np.abs(d).max()), float(mags.min())


def chern_2d(tex_map: SpinTextureMap, bis) -> InvariantResult:
    """First Chern number from the in-plane texture winding around the
    BIS loops, summed over disjoint loops with their orientations."""
    if tex_map.grid.dim != 2 or tex_map.model.bands != 2:
        raise ConfigError("chern_2d needs a 2D two-band texture map")
    loops = _as_list(bis)
    total = 0.0
    per_loop = []
    worst_step = 0.0
    min_mag = math.inf
    defect = 0.0
    for z in loops:
        if z.kind == "ambiguous":
            raise AmbiguousTopologyError(
                "cannot compute a Chern number from an ambiguous zero set")
        if z.kind != "BIS":
            continue
        if not z.closed:
            raise GeometryError("BIS loop is not closed")
        ang_total, max_step, mag = _loop_angle_total(tex_map, z, 0.02)
        worst_step = max(worst_step, max_step)
        min_mag = min(min_mag, mag)
        wind = ang_total / (2.0 * math.pi)
        defect = max(defect, abs(ang_total - 2.0 * math.pi * round(wind))
                     / (2.0 * math.pi))
        contribution = z.orientation * wind
        per_loop.append(float(contribution))
        total += contribution
    c = _CHERN_2D_SIGN * total
    if abs(c - round(c)) > 1e-3:
        raise AmbiguousTopologyError(
            f"loop windings sum to the non-integer {c}")
    return InvariantResult(
        value=int(round(c)), kind="chern_2d",
        diagnostics={"contributions": per_loop,
                     "closure_defect": defect,
                     "max_step_angle": worst_step,
                     "min_texture_magnitude": (None if not per_loop
                                               else float(min_mag))})


def chern_on_bis_sphere(tex_map: SpinTextureMap, bis: ZeroSet,
                        tol_sis: float = 0.02) -> InvariantResult:
    """Chern number of the normalized 3-component texture over a closed
    BIS isosurface: sum of oriented spherical-triangle solid angles of
    the unit vectors at the triangulation vertices, divided by 4 pi."""
    if tex_map.grid.dim != 3 or tex_map.model.bands != 4:
        raise ConfigError("chern_on_bis_sphere needs a 3D four-band map")
    if bis.kind == "ambiguous":
        raise AmbiguousTopologyError(
            "cannot compute a Chern number from an ambiguous zero set")
    if bis.faces is None:
        raise GeometryError("zero set carries no triangulation")
    if not bis.closed:
        raise GeometryError("BIS isosurface is not closed")
    vec = -_interp_stack(tex_map, bis.index_points, (1, 2, 3))
    mags = np.sqrt(np.sum(vec * vec, axis=-1))
    if not np.all(np.isfinite(mags)):
        raise IllConditionedError("texture undefined on part of the surface")
    if mags.min() < tol_sis:
        raise IllConditionedError(
            f"texture magnitude {mags.min():.3g} below {tol_sis} on the surface")
    unit = vec / mags[:, None]
    v0 = unit[bis.faces[:, 0]]
    v1 = unit[bis.faces[:, 1]]
    v2 = unit[bis.faces[:, 2]]
    num = np.einsum("ij,ij->i", v0, np.cross(v1, v2))
    den = (1.0 + np.einsum("ij,ij->i", v0, v1)
           + np.einsum("ij,ij->i", v1, v2)
           + np.einsum("ij,ij->i", v2, v0))
    omega = 2.0 * np.arctan2(num, den)
    total = float(omega.sum())
    four_pi = 4.0 * math.pi
    defect = abs(total - four_pi * round(total / four_pi))
    c = _CHERN_3D_SIGN * total / four_pi
    if defect > 1e-2 * four_pi:
        raise AmbiguousTopologyError(
            f"solid angles sum to {total:.6g}, {defect:.3g} away from a "
            "multiple of 4 pi")
    return InvariantResult(
        value=int(round(c)), kind="chern_on_bis_sphere",
        diagnostics={"solid_angle_sum": total,
                     "closure_defect": defect,
                     "min_texture_magnitude": float(mags.min()),
                     "n_vertices": int(bis.points.shape[0]),
                     "n_faces": int(bis.faces.shape[0])})
