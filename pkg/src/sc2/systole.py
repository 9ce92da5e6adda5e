"""Systoles on the refined 1-skeleton (optionally with face chords), loop structure checks and looseness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import StructureViolation
from .group import DEFAULT_BUDGET, is_commutator_relator, is_contractible, make_loop, presentation
from .metric import sym_graph, level_set, refined
from .reeb import tree_path

TOL = 1e-9
CHUNK = 128  # basepoints per batched shortest-path call


@dataclass
class PointedSystole:
    basepoint: int
    lower: float
    upper: float
    witness: object = None  # EdgeLoop
    verdict: object = None
    unknown: bool = False
    candidates: int = 0


@dataclass
class SystoleResult:
    lower: float
    upper: float
    witness: object
    level: int
    basepoint: int
    table: dict = field(default_factory=dict)
    unknown: bool = False
    verdict: object = None
    steiner: int = 0

    @property
    def bracket(self):
        return (self.lower, self.upper)


@dataclass
class LoopGraph:
    """A graph whose edges carry skeleton paths of the refined complex.

    The plain skeleton is the case where each edge carries itself.  With
    Steiner points, nodes also sit inside edges and graph edges include
    straight chords across faces; every node is pushed to a skeleton vertex
    and every edge to a skeleton path homotopic to it rel the pushes.
    """

    R: object
    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    lengths: np.ndarray
    push: np.ndarray
    paths: list = None  # None means edge g carries [(g, 1)]
    steiner: int = 0

    def path(self, g):
        return [(int(g), 1)] if self.paths is None else list(self.paths[g])

    def skeleton_path(self, gpath):
        out = []
        for g, s in gpath:
            p = self.path(g)
            out.extend(p if s > 0 else [(e, -t) for e, t in reversed(p)])
        return out

    def _tree_data(self):
        cached = self.__dict__.get("_trees")
        if cached is None:
            n = self.n_nodes
            G = sym_graph(n, self.src.copy(), self.dst.copy(), self.lengths.copy())
            lo = np.minimum(self.src, self.dst)
            hi = np.maximum(self.src, self.dst)
            keys = lo * n + hi
            order = np.lexsort((self.lengths, keys))
            keys = keys[order]
            first = np.ones(len(keys), dtype=bool)
            first[1:] = keys[1:] != keys[:-1]
            first &= self.src[order] != self.dst[order]
            cached = (G, keys[first], order[first])
            self.__dict__["_trees"] = cached
        return cached

    def trees(self, sources, limit=math.inf):
        """Distances and predecessor edges from several sources at once.

        Nodes further than ``limit`` are left unreached (distance inf).
        """
        G, keys, edge = self._tree_data()
        sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        dist, pred = dijkstra(G, indices=sources, return_predecessors=True, limit=limit)
        dist, pred = np.atleast_2d(dist), np.atleast_2d(pred)
        n = self.n_nodes
        v = np.broadcast_to(np.arange(n), pred.shape)
        has = pred >= 0
        q = np.minimum(pred, v) * n + np.maximum(pred, v)
        pe = np.full(pred.shape, -1, dtype=np.int64)
        pe[has] = edge[np.searchsorted(keys, q[has])]
        return dist, pe


def _skeleton_loop_graph(R):
    return LoopGraph(R, R.n_vertices, R.src, R.dst, R.lengths, np.arange(R.n_vertices))


def _steiner_loop_graph(R, s):
    nv, ne, nf = R.n_vertices, R.n_edges, R.n_faces
    chain = np.empty((ne, s + 2), dtype=np.int64)
    chain[:, 0], chain[:, -1] = R.src, R.dst
    chain[:, 1:-1] = nv + np.arange(ne)[:, None] * s + np.arange(s)[None, :]
    push = np.concatenate([np.arange(nv), np.repeat(R.src, s)])
    src = [chain[:, :-1].ravel()]
    dst = [chain[:, 1:].ravel()]
    lens = [np.repeat(R.lengths / (s + 1), s + 1)]
    paths = [[(e, 1)] if c == s else [] for e in range(ne) for c in range(s + 1)]
    if nf:
        per = s + 1
        m = 3 * per
        side = np.repeat(np.arange(3), per)
        j = np.tile(np.arange(per), 3)
        ii, jj = np.triu_indices(m, 1)
        # a side's far corner is the next side's first point
        far_i = (side[ii] + 1) % 3
        far_j = (side[jj] + 1) % 3
        same = (side[ii] == side[jj]) | ((j[jj] == 0) & (side[jj] == far_i)) | ((j[ii] == 0) & (side[ii] == far_j))
        ii, jj = ii[~same], jj[~same]
        fe, fs = R.face_edge, R.face_sign
        # node id and pushed simplex corner of each boundary point
        e_pt = fe[:, side]
        s_pt = fs[:, side]
        jc = np.where(s_pt > 0, j[None, :], per - j[None, :])
        node = np.where(j[None, :] == 0, np.where(s_pt > 0, R.src[e_pt], R.dst[e_pt]), chain[e_pt, np.clip(jc, 0, s + 1)])
        corner = np.where((j[None, :] == 0) | (s_pt > 0), side[None, :], (side[None, :] + 1) % 3)
        Pc = R.face_coords
        t = (j / per)[None, :, None]
        pts = Pc[:, side] + t * (Pc[:, (side + 1) % 3] - Pc[:, side])
        src.append(node[:, ii].ravel())
        dst.append(node[:, jj].ravel())
        lens.append(np.linalg.norm(pts[:, ii] - pts[:, jj], axis=2).ravel())
        ca, cb = corner[:, ii], corner[:, jj]
        for f in range(nf):
            for a, b in zip(ca[f], cb[f]):
                if a == b:
                    paths.append([])
                elif b == (a + 1) % 3:
                    paths.append([(int(fe[f, a]), int(fs[f, a]))])
                else:
                    paths.append([(int(fe[f, b]), -int(fs[f, b]))])
    return LoopGraph(
        R, nv + ne * s, np.concatenate(src), np.concatenate(dst), np.concatenate(lens), push, paths, s
    )


def loop_graph(R, steiner=0):
    """Cached loop graph of a refined complex (``steiner`` points per edge)."""
    cache = R.__dict__.setdefault("_loop_graphs", {})
    if steiner not in cache:
        cache[steiner] = _steiner_loop_graph(R, steiner) if steiner else _skeleton_loop_graph(R)
    return cache[steiner]



class LoopClassifier:
    """Fast contractibility tests for tree-path + edge + tree-path loops.

    Node labels are accumulated along the shortest-path tree: abelian
    images always, coset indices when the group is finite.  Anything the
    labels cannot settle goes to the full oracle.
    """

    def __init__(self, P, G, budget=DEFAULT_BUDGET):
        if not isinstance(G, LoopGraph):
            G = loop_graph(G)
        self.P, self.G, self.R, self.budget = P, G, G.R, budget
        S = P.simplified
        self.n = S.ngens
        E = len(G.src)
        self.sw = [P.simplify_word(P.path_word(G.R, G.path(g))) for g in range(E)]
        A = P.abelian
        x = np.zeros((E, self.n), dtype=np.int64)
        for g, w in enumerate(self.sw):
            for l in w:
                x[g, abs(l) - 1] += 1 if l > 0 else -1
        V = np.array(A.V, dtype=np.int64).reshape(self.n, self.n)
        self.ab = x @ V if self.n else x
        self.diag = np.array(A.diag, dtype=np.int64)
        self.k = len(A.diag)
        self.ft = P.finite_table if not A.rank else None
        # abelian groups are detected by their abelianization alone
        rels = S.relators
        self.abelian_decides = (
            (self.ft is not None and self.ft[0].size == int(np.prod(self.diag, dtype=np.int64)))
            or (not rels and self.n <= 1)
            or (self.n == 2 and len(rels) == 1 and is_commutator_relator(rels[0]))
        )
        self._perm = None

    def _perms(self):
        """Action of each graph edge on the cosets, forward and backward."""
        if self._perm is None:
            table = self.ft[0]
            fwd = np.array([[table.trace(c, w) for c in range(table.size)] for w in self.sw], dtype=np.int64)
            self._perm = (fwd, np.argsort(fwd, axis=1))
        return self._perm

    def labels(self, pred):
        """Abelian images (and coset indices) of the tree paths, by pointer jumping."""
        G = self.G
        nv = G.n_nodes
        has = pred >= 0
        e = np.where(has, pred, 0)
        fwd = G.dst[e] == np.arange(nv)
        par = np.where(has, np.where(fwd, G.src[e], G.dst[e]), np.arange(nv))
        sign = np.where(fwd, 1, -1)[:, None]
        acc = np.where(has[:, None], sign * self.ab[e], 0)
        track = self.ft is not None and not self.abelian_decides
        if track:
            pf, pb = self._perms()
            g = np.where(fwd[:, None], pf[e], pb[e])
            g[~has] = np.arange(g.shape[1])
        # acc[v] sums the contributions from v up to anc[v], exclusive
        anc = par.copy()
        while np.any(anc != anc[anc]):
            acc = acc + acc[anc]
            if track:
                g = np.take_along_axis(g, g[anc], axis=1)
            anc = anc[anc]
        return acc, (g[:, 0] if track else None)

    def batch_abelian(self, PE):
        """Abelian tree labels for a stack of predecessor arrays (k x nodes)."""
        G = self.G
        k, nv = PE.shape
        has = PE >= 0
        e = np.where(has, PE, 0)
        ids = np.broadcast_to(np.arange(nv), PE.shape)
        fwd = G.dst[e] == ids
        anc = np.where(has, np.where(fwd, G.src[e], G.dst[e]), ids)
        acc = np.where(has[..., None], np.where(fwd, 1, -1)[..., None] * self.ab[e], 0)
        while np.any(anc != np.take_along_axis(anc, anc, axis=1)):
            acc = acc + np.take_along_axis(acc, anc[..., None], axis=1)
            anc = np.take_along_axis(anc, anc, axis=1)
        return acc

    def abelian_nonzero(self, img):
        if not self.n:
            return np.zeros(img.shape[:-1], dtype=bool)
        k = self.k
        tors = (img[..., :k] % self.diag) != 0
        free = img[..., k:] != 0
        return tors.any(axis=-1) | free.any(axis=-1)


def candidate_loop(P, G, pred, p, g):
    """Skeleton loop of the candidate tree path + graph edge ``g`` + tree path back."""
    if not isinstance(G, LoopGraph):
        G = loop_graph(G)
    u, v = int(G.src[g]), int(G.dst[g])
    back = [(f, -s) for f, s in reversed(tree_path(G, pred, v))]
    gpath = tree_path(G, pred, u) + [(int(g), 1)] + back
    return make_loop(P, G.R, int(G.push[p]), G.skeleton_path(gpath))


def pointed_systole(
    X, p, level=0, budget=DEFAULT_BUDGET, P=None, cutoff=math.inf, classifier=None, tree=None, steiner=0
):
    """Shortest noncontractible loop through node ``p`` of the loop graph.

    With ``steiner=0`` the loop graph is the refined 1-skeleton and ``p`` a
    refined vertex.  Candidates tree-path + edge + tree-path are scanned by
    length; the first noncontractible one is the upper bound.  The lower
    bound stays equal to it unless some shorter candidate got an Unknown
    verdict.  Candidates of length >= ``cutoff`` are not examined (lower
    bound then >= cutoff).
    """
    if isinstance(p, str):
        p = X.vertex_index(p)
    R = refined(X, level)
    G = loop_graph(R, steiner)
    P = P or presentation(X)
    C = classifier or LoopClassifier(P, G, budget)
    if tree is None:
        D, PE = G.trees([p])
        tree = (D[0], PE[0])
    d, pred = tree
    finite = np.isfinite(d)
    intree = np.zeros(len(G.src), dtype=bool)
    intree[pred[pred >= 0]] = True
    cand = np.nonzero(~intree & finite[G.src])[0]
    lens = d[G.src[cand]] + G.lengths[cand] + d[G.dst[cand]]
    keep = lens < cutoff
    cand, lens = cand[keep], lens[keep]
    order_c = np.argsort(lens, kind="stable")
    cand, lens = cand[order_c], lens[order_c]
    y, cos = C.labels(pred)
    img = y[G.src[cand]] + C.ab[cand] - y[G.dst[cand]]
    nonzero = C.abelian_nonzero(img)
    lower = None
    unknown = False
    for i, g in enumerate(cand):
        g = int(g)
        if nonzero[i]:
            kind = "Noncontractible"
        elif C.abelian_decides:
            kind = "Contractible"
        elif C.ft is not None:
            end = C.ft[0].trace(int(cos[G.src[g]]), C.sw[g])
            kind = "Contractible" if end == int(cos[G.dst[g]]) else "Noncontractible"
        else:
            kind = is_contractible(P, candidate_loop(P, G, pred, p, g), budget).kind
        if kind == "Unknown":
            if lower is None:
                lower = float(lens[i])
            unknown = True
            continue
        if kind == "Noncontractible":
            loop = candidate_loop(P, G, pred, p, g)
            v = is_contractible(P, loop, budget)
            up = float(lens[i])
            return PointedSystole(p, up if lower is None else lower, up, loop, v, unknown, i + 1)
    lo = cutoff if lower is None else lower
    return PointedSystole(p, lo, math.inf, None, None, unknown, len(cand))


def _basepoints(G, C):
    """Nodes that every noncontractible loop passes through.

    When abelian images decide contractibility, relabel the edges by a
    shortest-path tree from node 0: tree edges get image zero and a loop's
    image is the sum over its edges, so a noncontractible loop uses an edge
    of nonzero image and passes through one of its endpoints.
    """
    if C.abelian_decides:
        D, PE = G.trees([0])
        if np.all(np.isfinite(D[0])):
            y = C.batch_abelian(PE)[0]
            hit = C.abelian_nonzero(y[G.src] + C.ab - y[G.dst])
            return [int(v) for v in np.unique(np.concatenate([G.src[hit], G.dst[hit]]))]
    return list(range(G.n_nodes))  # original vertices come first


def systole(X, level=0, budget=DEFAULT_BUDGET, basepoints=None, steiner=0):
    """Minimum of pointed systoles over the nodes of the loop graph.

    With ``steiner > 0`` loops may cut straight across faces through
    ``steiner`` interior points per refined edge; the bracket is then for
    that graph and the witness is its skeleton push (which can be longer).
    """
    R = refined(X, level)
    G = loop_graph(R, steiner)
    P = presentation(X)
    C = LoopClassifier(P, G, budget)
    if basepoints is None:
        basepoints = _basepoints(G, C)
    best = None
    lower = math.inf
    unknown = False
    table = {}
    # the first chunk finds a short loop early, which bounds later searches
    first = min(CHUNK, R.n_vertices)
    for start in [0] + list(range(first, len(basepoints), CHUNK)):
        chunk = basepoints[start : start + (first if start == 0 else CHUNK)]
        if not chunk:
            continue
        if C.abelian_decides:
            # a shortest loop of length L through p stays within L/2 of p
            D, PE = G.trees(chunk, 0.5 * best.upper + TOL if best is not None else math.inf)
            # every candidate is settled by its abelian image: scan the chunk at once
            y = C.batch_abelian(PE)
            img = y[:, G.src] + C.ab[None] - y[:, G.dst]
            lens = np.where(C.abelian_nonzero(img), D[:, G.src] + G.lengths + D[:, G.dst], math.inf)
            arg = np.argmin(lens, axis=1)
            ups = lens[np.arange(len(chunk)), arg]
            bound = best.upper if best is not None else math.inf
            for p, up in zip(chunk, ups):
                table[int(p)] = (float(min(up, bound)), float(up))
            lower = min(lower, float(ups.min()))
            i = int(np.argmin(ups))
            if np.isfinite(ups[i]) and (best is None or ups[i] < best.upper - TOL):
                loop = candidate_loop(P, G, PE[i], chunk[i], int(arg[i]))
                best = PointedSystole(int(chunk[i]), float(ups[i]), float(ups[i]), loop, is_contractible(P, loop, budget))
            continue
        D, PE = G.trees(chunk)
        for p, d, pred in zip(chunk, D, PE):
            cut = best.upper + TOL if best is not None else math.inf
            ps = pointed_systole(X, int(p), level, budget, P, cut, C, (d, pred), steiner)
            table[int(p)] = (ps.lower, ps.upper)
            unknown |= ps.unknown
            lower = min(lower, ps.lower)
            if ps.witness is not None and (best is None or ps.upper < best.upper - TOL):
                best = ps
    if best is None:
        return SystoleResult(lower, math.inf, None, level, -1, table, unknown, steiner=steiner)
    return SystoleResult(
        min(lower, best.upper), best.upper, best.witness, level, best.basepoint, table, unknown, best.verdict, steiner
    )


# -- structure of pointed systolic loops --------------------------------------


def ball_systole(X, level=0, budget=DEFAULT_BUDGET, steiner=1):
    """Systole of the chord graph that ``distance_field`` measures in.

    Ball radii belong on this scale.  Skeleton loops can be much longer
    than chord loops, so half the skeleton systole may exceed the radius at
    which balls of the distance field already wrap around.
    """
    return systole(X, level, budget, steiner=steiner)


@dataclass
class StructureReport:
    length: float
    midpoint_distance: float
    arcs_minimizing: bool
    self_intersections: list
    max_intersection_distance: float
    intersection_bound: float
    ok: bool
    reason: str = ""


def _positions(R, loop):
    s = [0.0]
    for e, _ in loop.edges:
        s.append(s[-1] + float(R.lengths[e]))
    return s


def check_simple_structure(loop, F, sys_bracket=None, tol=1e-9):
    """Check the two-minimizing-arcs structure of a pointed systolic loop."""
    R = F.complex
    d = F.skel
    L = loop.length
    s = _positions(R, loop)
    verts = loop.vertices
    # midpoint on the edge containing arc-length L/2
    half = 0.5 * L
    k = max(i for i in range(len(loop.edges)) if s[i] <= half + tol)
    k = min(k, len(loop.edges) - 1)
    a, b = verts[k], verts[k + 1]
    x = half - s[k]
    le = float(R.lengths[loop.edges[k][0]])
    mid = min(d[a] + x, d[b] + le - x)
    minimizing = all(
        abs(d[v] - min(si, L - si)) <= tol * max(1.0, L) for v, si in zip(verts, s)
    )
    seen = {}
    inter = []
    for i, v in enumerate(verts[:-1]):
        if v in seen:
            inter.append(v)
        seen[v] = i
    inter = sorted(set(inter) - {loop.base})
    maxd = max((float(d[v]) for v in inter), default=0.0)
    lo = sys_bracket[0] if sys_bracket else L
    bound = 0.5 * (L - lo)
    rep = StructureReport(L, float(mid), minimizing, inter, maxd, bound, True)
    if mid < half - tol * max(1.0, L):
        rep.ok, rep.reason = False, "midpoint closer than L/2: loop is not a pointed systolic loop at this resolution"
    elif not minimizing:
        rep.ok, rep.reason = False, "an arc is not distance minimizing"
    elif inter and maxd > bound + tol:
        rep.ok, rep.reason = False, "self-intersection further than (L - sys)/2 from the basepoint"
    if not rep.ok:
        raise StructureViolation(rep.reason, rep)
    return rep


# -- loose loops --------------------------------------------------------------


@dataclass
class LooseReport:
    basepoint: int
    loop: object
    verdict: str  # "loose" | "not-loose" | "inconclusive"
    r: float = None
    components: list = field(default_factory=list)
    interval: tuple = ()
    exhaustive: bool = False
    scanned: int = 0


def components_met(loop, L):
    """Level-set components that the loop's edges cross."""
    crossed = {int(e): int(c) for e, c in zip(L.crossed, L.edge_component)}
    return sorted({crossed[e] for e, _ in loop.edges if e in crossed})


def detect_loose(loop, F, sys_bracket, samples=64):
    lo_sys, hi_sys = sys_bracket
    Lg = loop.length
    a = 0.5 * (Lg - hi_sys)
    b = 0.5 * Lg
    claim = 0.5 * (Lg - lo_sys)  # r must exceed this for a certain claim
    rep = LooseReport(F.source, loop, "inconclusive", interval=(a, b))
    if not b > a:
        rep.verdict, rep.exhaustive = "not-loose", True
        return rep
    ev = F.events
    inner = ev[(ev > a) & (ev < b)]
    cuts = np.concatenate([[a], inner, [b]])
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    extra = a + (b - a) * (np.arange(1, samples + 1) / (samples + 1))
    probes = np.unique(np.concatenate([mids, extra]))
    uncertain = False
    for r in probes:
        L = level_set(F, float(r))
        comps = components_met(loop, L)
        rep.scanned += 1
        if len(comps) >= 2:
            if L.value > claim + TOL and L.value < b:
                rep.verdict, rep.r, rep.components = "loose", float(L.value), comps
                return rep
            uncertain = True
    rep.exhaustive = True
    rep.verdict = "inconclusive" if uncertain else "not-loose"
    return rep
