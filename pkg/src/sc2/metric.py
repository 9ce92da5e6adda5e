"""PL distance fields, level sets, sub/superlevel regions, balls and coarea.

Distances come from Dijkstra on the refined 1-skeleton augmented with
Steiner points on edges and straight chords across faces.  The distance
function on the complex is the linear interpolation of the vertex values
over each refined face, so level sets are unions of straight segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .complex import TwoComplex, refine

NUDGE = 1e-7
TIE = 1e-9


def refined(X, level):
    """Cached refinement of an unrefined complex."""
    cache = X.__dict__.setdefault("_refinements", {})
    if level not in cache:
        cache[level] = refine(X, level)
    return cache[level]


def sym_graph(n, rows, cols, weights):
    """Symmetric sparse graph keeping the minimum over parallel entries."""
    rows = np.concatenate([rows, cols])
    cols_ = np.concatenate([cols, rows[: len(cols)]])
    w = np.concatenate([weights, weights])
    keep = rows != cols_
    rows, cols_, w = rows[keep], cols_[keep], w[keep]
    order = np.lexsort((w, cols_, rows))
    rows, cols_, w = rows[order], cols_[order], w[order]
    first = np.ones(len(rows), dtype=bool)
    first[1:] = (rows[1:] != rows[:-1]) | (cols_[1:] != cols_[:-1])
    return coo_matrix((w[first], (rows[first], cols_[first])), shape=(n, n)).tocsr()


def steiner_graph(R, steiner=1):
    """Skeleton + Steiner points + face chords, as a sparse matrix."""
    nv, ne = R.n_vertices, R.n_edges
    s = int(steiner)
    n = nv + ne * s
    ts = np.arange(1, s + 1) / (s + 1)
    # points along each edge: src, steiner..., dst
    chain = np.empty((ne, s + 2), dtype=np.int64)
    chain[:, 0] = R.src
    chain[:, -1] = R.dst
    if s:
        chain[:, 1:-1] = nv + np.arange(ne)[:, None] * s + np.arange(s)[None, :]
    seg = R.lengths / (s + 1)
    rows = [chain[:, :-1].ravel()]
    cols = [chain[:, 1:].ravel()]
    wts = [np.repeat(seg, s + 1)]
    if R.n_faces:
        P = R.face_coords  # (F, 3, 2)
        pts, ids, side = [], [], []
        allt = np.concatenate([[0.0], ts])
        for k in range(3):
            a, b = P[:, k], P[:, (k + 1) % 3]
            e = R.face_edge[:, k]
            sg = R.face_sign[:, k]
            for j, t in enumerate(allt):
                pts.append(a + t * (b - a))
                # parameter along the side from corner k; map to the edge's chain
                if j == 0:
                    node = np.where(sg > 0, R.src[e], R.dst[e])
                else:
                    jj = np.where(sg > 0, j, s + 1 - j)
                    node = chain[e, jj]
                ids.append(node)
                side.append(np.full(R.n_faces, k))
        pts = np.stack(pts, axis=1)  # (F, m, 2)
        ids = np.stack(ids, axis=1)
        m = pts.shape[1]
        per = s + 1
        side_of = np.repeat(np.arange(3), per)
        ii, jj = np.triu_indices(m, 1)
        next_corner = (side_of + 1) % 3
        # skip pairs on the same side (collinear; handled by edge chain),
        # including the far corner of a side, which belongs to the next side
        same = (side_of[ii] == side_of[jj]) | (
            (jj % per == 0) & (side_of[jj] == next_corner[ii])
        ) | ((ii % per == 0) & (side_of[ii] == next_corner[jj]))
        ii, jj = ii[~same], jj[~same]
        d = np.linalg.norm(pts[:, ii] - pts[:, jj], axis=2)
        rows.append(ids[:, ii].ravel())
        cols.append(ids[:, jj].ravel())
        wts.append(d.ravel())
    return sym_graph(n, np.concatenate(rows), np.concatenate(cols), np.concatenate(wts))


def skeleton_graph(R):
    return sym_graph(R.n_vertices, R.src.copy(), R.dst.copy(), R.lengths.copy())


@dataclass
class DistanceField:
    base: TwoComplex
    complex: TwoComplex
    source: int
    level: int
    values: np.ndarray
    skel: np.ndarray
    skel_pred: np.ndarray  # predecessor edge on the skeleton tree, -1 at root
    steiner: int = 1

    @property
    def p(self):
        return self.source

    @cached_property
    def face_grad(self):
        """|grad f| per refined face (0 for flat faces)."""
        R = self.complex
        if not R.n_faces:
            return np.zeros(0)
        P = R.face_coords
        g = self.values[R.face_corners]
        d1 = P[:, 1] - P[:, 0]
        d2 = P[:, 2] - P[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        b1 = g[:, 1] - g[:, 0]
        b2 = g[:, 2] - g[:, 0]
        gx = (b1 * d2[:, 1] - b2 * d1[:, 1]) / det
        gy = (d1[:, 0] * b2 - d2[:, 0] * b1) / det
        return np.hypot(gx, gy)

    @cached_property
    def events(self):
        """Distinct vertex values (clustered within TIE), ascending."""
        v = np.sort(self.values)
        keep = np.ones(len(v), dtype=bool)
        keep[1:] = np.diff(v) > TIE
        return v[keep]

    @cached_property
    def event_rank(self):
        ev = self.events
        idx = np.searchsorted(ev, self.values - TIE, side="left")
        return np.minimum(idx, len(ev) - 1)

    @property
    def max_value(self):
        return float(self.values.max())


def distance_field(X, p, level=0, steiner=1):
    """Distance from vertex ``p`` on ``refine(X, level)``.

    ``p`` is a vertex name of X or an index into the refined complex;
    original vertices keep their indices under refinement.
    """
    if isinstance(p, str):
        p = X.vertex_index(p)
    R = refined(X, level)
    if not 0 <= p < R.n_vertices:
        raise KeyError(f"vertex {p} not in complex")
    G = R.__dict__.get("_steiner_graph", {}).get(steiner)
    if G is None:
        G = steiner_graph(R, steiner)
        R.__dict__.setdefault("_steiner_graph", {})[steiner] = G
    dist = dijkstra(G, indices=p)
    values = dist[: R.n_vertices]
    skel, pred = skeleton_tree(R, p)
    return DistanceField(X, R, int(p), int(level), values, skel, pred, steiner)


def _min_edge_keys(R):
    """Sorted vertex-pair keys and the shortest edge realizing each pair."""
    cached = R.__dict__.get("_min_edge")
    if cached is None:
        n = R.n_vertices
        lo = np.minimum(R.src, R.dst)
        hi = np.maximum(R.src, R.dst)
        keys = lo * n + hi
        order = np.lexsort((R.lengths, keys))
        keys = keys[order]
        first = np.ones(len(keys), dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        first &= R.src[order] != R.dst[order]  # loops never lie on a tree
        cached = (keys[first], order[first])
        R.__dict__["_min_edge"] = cached
    return cached


def _skel_graph(R):
    G = R.__dict__.get("_skel_graph")
    if G is None:
        G = skeleton_graph(R)
        R.__dict__["_skel_graph"] = G
    return G


def skeleton_trees(R, sources):
    """Skeleton distances and predecessor edges for several sources at once."""
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    dist, pred = dijkstra(_skel_graph(R), indices=sources, return_predecessors=True)
    dist, pred = np.atleast_2d(dist), np.atleast_2d(pred)
    keys, edge = _min_edge_keys(R)
    n = R.n_vertices
    v = np.broadcast_to(np.arange(n), pred.shape)
    has = pred >= 0
    q = np.minimum(pred, v) * n + np.maximum(pred, v)
    pe = np.full(pred.shape, -1, dtype=np.int64)
    pe[has] = edge[np.searchsorted(keys, q[has])]
    return dist, pe


def skeleton_tree(R, source):
    """Skeleton distances and predecessor edges from ``source``."""
    dist, pe = skeleton_trees(R, [source])
    return dist[0], pe[0]


# -- level sets ----------------------------------------------------------


def clear_level(values, r):
    """Nudge ``r`` upward off the vertex values; returns (r, nudged)."""
    nudged = False
    while np.any(np.abs(values - r) < TIE):
        r += NUDGE
        nudged = True
    return r, nudged


@dataclass
class LevelSet:
    value: float
    nudged: bool
    crossed: np.ndarray  # refined edge ids crossed by the level
    cross_t: np.ndarray  # parameter from src along each crossed edge
    edge_component: np.ndarray  # component id per crossed edge
    seg_face: np.ndarray
    seg_edges: np.ndarray  # (k, 2) crossed-edge positions (indices into crossed)
    seg_points: np.ndarray  # (k, 2, 2) endpoints in face-local coordinates
    seg_length: np.ndarray
    seg_weight: np.ndarray  # 1/|grad f| per segment
    n_components: int
    component_length: np.ndarray
    component_coarea: np.ndarray
    component_size: np.ndarray

    @property
    def length(self):
        return float(self.component_length.sum())

    @property
    def coarea_length(self):
        return float(self.component_coarea.sum())

    def component_of_edge(self, e):
        hit = np.nonzero(self.crossed == e)[0]
        return int(self.edge_component[hit[0]]) if len(hit) else -1

    def summary(self):
        return {
            "value": self.value,
            "nudged": self.nudged,
            "components": [
                {"length": float(l), "size": int(s)}
                for l, s in zip(self.component_length, self.component_size)
            ],
            "total_length": self.length,
        }


def level_set(F, r):
    R = F.complex
    r, nudged = clear_level(F.values, float(r))
    fs, fd = F.values[R.src], F.values[R.dst]
    crossed_mask = (fs - r) * (fd - r) < 0
    crossed = np.nonzero(crossed_mask)[0]
    t = (r - fs[crossed]) / (fd[crossed] - fs[crossed])
    pos = np.full(R.n_edges, -1, dtype=np.int64)
    pos[crossed] = np.arange(len(crossed))
    k = len(crossed)
    if R.n_faces and k:
        side_cross = crossed_mask[R.face_edge]
        faces = np.nonzero(side_cross.sum(axis=1) == 2)[0]
    else:
        faces = np.zeros(0, dtype=np.int64)
    if len(faces):
        sc = side_cross[faces]
        first = np.argmax(sc, axis=1)
        second = 2 - np.argmax(sc[:, ::-1], axis=1)
        P = R.face_coords[faces]
        pts = []
        epos = []
        for which in (first, second):
            e = R.face_edge[faces, which]
            sg = R.face_sign[faces, which]
            a = P[np.arange(len(faces)), which]
            b = P[np.arange(len(faces)), (which + 1) % 3]
            tt = t[pos[e]]
            start = np.where((sg > 0)[:, None], a, b)
            end = np.where((sg > 0)[:, None], b, a)
            pts.append(start + tt[:, None] * (end - start))
            epos.append(pos[e])
        seg_points = np.stack(pts, axis=1)
        seg_edges = np.stack(epos, axis=1)
        seg_len = np.linalg.norm(seg_points[:, 0] - seg_points[:, 1], axis=1)
        grad = F.face_grad[faces]
        seg_w = np.where(grad > 0, 1.0 / np.where(grad > 0, grad, 1.0), 0.0)
        G = coo_matrix((np.ones(len(faces)), (seg_edges[:, 0], seg_edges[:, 1])), shape=(k, k))
        ncomp, label = connected_components(G, directed=False)
    else:
        seg_points = np.zeros((0, 2, 2))
        seg_edges = np.zeros((0, 2), dtype=np.int64)
        seg_len = np.zeros(0)
        seg_w = np.zeros(0)
        ncomp, label = k, np.arange(k)
    # renumber components by first crossed edge for determinism
    order = {}
    for lab in label:
        order.setdefault(int(lab), len(order))
    label = np.array([order[int(l)] for l in label], dtype=np.int64)
    seg_comp = label[seg_edges[:, 0]] if len(faces) else np.zeros(0, dtype=np.int64)
    comp_len = np.bincount(seg_comp, weights=seg_len, minlength=ncomp)
    comp_coarea = np.bincount(seg_comp, weights=seg_len * seg_w, minlength=ncomp)
    comp_size = np.bincount(label, minlength=ncomp)
    return LevelSet(
        value=r,
        nudged=nudged,
        crossed=crossed,
        cross_t=t,
        edge_component=label,
        seg_face=faces,
        seg_edges=seg_edges,
        seg_points=seg_points,
        seg_length=seg_len,
        seg_weight=seg_w,
        n_components=int(ncomp),
        component_length=comp_len,
        component_coarea=comp_coarea,
        component_size=comp_size,
    )


# -- regions ---------------------------------------------------------------


@dataclass
class Region:
    vertices: np.ndarray
    level_components: list = field(default_factory=list)


def region_components(F, r, kind="superlevel", levelset=None):
    """Components of [f >= r] ('superlevel') or [f <= r] ('sublevel').

    Each region is represented by the vertices strictly on its side of the
    level; the closed region deformation retracts onto the full subcomplex
    they span.  ``level_components`` lists the components of f^-1(r) in
    its boundary.
    """
    R = F.complex
    L = levelset if levelset is not None else level_set(F, r)
    r = L.value
    inside = F.values > r if kind == "superlevel" else F.values < r
    if kind not in ("superlevel", "sublevel"):
        raise ValueError(kind)
    idx = np.nonzero(inside)[0]
    if not len(idx):
        return []
    keep = inside[R.src] & inside[R.dst]
    remap = np.full(R.n_vertices, -1, dtype=np.int64)
    remap[idx] = np.arange(len(idx))
    G = coo_matrix(
        (np.ones(int(keep.sum())), (remap[R.src[keep]], remap[R.dst[keep]])),
        shape=(len(idx), len(idx)),
    )
    n, lab = connected_components(G, directed=False)
    order = {}
    for l in lab:
        order.setdefault(int(l), len(order))
    lab = np.array([order[int(l)] for l in lab])
    regions = [Region(idx[lab == c]) for c in range(n)]
    for j, e in enumerate(L.crossed):
        u, v = int(R.src[e]), int(R.dst[e])
        w = u if inside[u] else v
        comp = int(L.edge_component[j])
        reg = regions[lab[remap[w]]]
        if comp not in reg.level_components:
            reg.level_components.append(comp)
    for reg in regions:
        reg.level_components.sort()
    return regions


def coalesce_count(F, r):
    """Number of level components bounding each superlevel component."""
    return [len(z.level_components) for z in region_components(F, r, "superlevel")]


def induced_subcomplex(R, vertices):
    """Full subcomplex on ``vertices`` (must be connected) as a TwoComplex."""
    vs = np.asarray(sorted(int(v) for v in vertices))
    inside = np.zeros(R.n_vertices, dtype=bool)
    inside[vs] = True
    remap = np.full(R.n_vertices, -1, dtype=np.int64)
    remap[vs] = np.arange(len(vs))
    emask = inside[R.src] & inside[R.dst]
    eids = np.nonzero(emask)[0]
    eremap = np.full(R.n_edges, -1, dtype=np.int64)
    eremap[eids] = np.arange(len(eids))
    fids = [f for f in range(R.n_faces) if emask[R.face_edge[f]].all()]
    return TwoComplex(
        [R.vertex_names[v] for v in vs],
        [(remap[R.src[e]], remap[R.dst[e]]) for e in eids],
        R.lengths[eids],
        [[(eremap[R.face_edge[f, k]], R.face_sign[f, k]) for k in range(3)] for f in fids],
        degenerate_tol=1e-12,
    )


# -- areas -----------------------------------------------------------------


def ball_area(F, r):
    """Exact area of {f <= r} by clipping each face's linear interpolant."""
    R = F.complex
    if not R.n_faces:
        return 0.0
    g = F.values[R.face_corners]
    A = R.face_areas
    lo = (g <= r).sum(axis=1)
    total = float(A[lo == 3].sum())
    one = np.nonzero(lo == 1)[0]
    if len(one):
        gg = g[one]
        k = np.argmin(gg, axis=1)
        a = gg[np.arange(len(one)), k]
        b = gg[np.arange(len(one)), (k + 1) % 3]
        c = gg[np.arange(len(one)), (k + 2) % 3]
        total += float(np.sum(A[one] * (r - a) / (b - a) * (r - a) / (c - a)))
    two = np.nonzero(lo == 2)[0]
    if len(two):
        gg = g[two]
        k = np.argmax(gg, axis=1)
        c = gg[np.arange(len(two)), k]
        a = gg[np.arange(len(two)), (k + 1) % 3]
        b = gg[np.arange(len(two)), (k + 2) % 3]
        total += float(np.sum(A[two] * (1.0 - (c - r) / (c - a) * (c - r) / (c - b))))
    return total


def _tent_integral(a, b, c, h, r0, r1):
    """Integral over [r0, r1] of the tent rising 0->h on [a,b], falling h->0 on [b,c]."""

    def part(x0, x1, y0, y1, lo, hi):
        lo, hi = np.maximum(lo, x0), np.minimum(hi, x1)
        width = x1 - x0
        ok = (hi > lo) & (width > 0)
        safe = np.where(width > 0, width, 1.0)
        ylo = y0 + (y1 - y0) * (lo - x0) / safe
        yhi = y0 + (y1 - y0) * (hi - x0) / safe
        return np.where(ok, 0.5 * (ylo + yhi) * (hi - lo), 0.0)

    zero = np.zeros_like(h)
    return part(a, b, zero, h, r0, r1) + part(b, c, h, zero, r0, r1)


def _face_tents(F):
    R = F.complex
    g = F.values[R.face_corners]
    P = R.face_coords
    order = np.argsort(g, axis=1, kind="stable")
    gs = np.take_along_axis(g, order, axis=1)
    a, b, c = gs[:, 0], gs[:, 1], gs[:, 2]
    n = R.n_faces
    rows = np.arange(n)
    Pa, Pb, Pc = P[rows, order[:, 0]], P[rows, order[:, 1]], P[rows, order[:, 2]]
    span = c - a
    safe = np.where(span > 0, span, 1.0)
    q = Pa + ((b - a) / safe)[:, None] * (Pc - Pa)  # point on the long side at level b
    mid_len = np.linalg.norm(Pb - q, axis=1)
    return a, b, c, mid_len


def coarea_integral(F, r0=0.0, r1=np.inf, weighted=True):
    """Integral of level-set length over [r0, r1], per face in closed form.

    With ``weighted`` (default) each segment is weighted by 1/|grad f|,
    which is the PL coarea density, and flat faces contribute their area
    as an atom at their common value; the full integral then equals the
    area.  ``weighted=False`` integrates raw geometric length.
    """
    R = F.complex
    if r1 <= r0 or not R.n_faces:
        return 0.0
    a, b, c, mid_len = _face_tents(F)
    grad = F.face_grad
    flat = (c - a) <= 0.0
    if weighted:
        h = np.where(grad > 0, mid_len / np.where(grad > 0, grad, 1.0), 0.0)
    else:
        h = mid_len
    total = float(np.sum(_tent_integral(a, b, c, h, r0, r1)))
    if weighted:
        # f >= 0, so an interval starting at 0 is closed there (f == 0 on a face happens)
        above = (a > r0) | ((a == r0) & (r0 <= 0.0))
        atom = flat & above & (a <= r1)
        total += float(R.face_areas[atom].sum())
    return total
