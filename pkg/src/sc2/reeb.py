"""Reeb graphs of PL distance functions, ball trees, pruning, minimal models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CycleDetected
from .group import DEFAULT_BUDGET, is_contractible, make_loop, presentation
from .metric import clear_level, induced_subcomplex, level_set, region_components
from .trees import RootedTree, height_or_inf, root_decomposition, suppress_degree_two, tree_energy


class _UF:
    def __init__(self):
        self.p = {}

    def find(self, x):
        p = self.p
        p.setdefault(x, x)
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            if b < a:
                a, b = b, a
            self.p[b] = a


@dataclass
class ReebArc:
    id: int
    lower: int
    upper: int
    f0: float
    f1: float
    interval: int
    crossed: np.ndarray  # refined edges crossed by the arc's level components
    length_mid: float  # level length at the interval midpoint

    @property
    def length(self):
        return self.f1 - self.f0


@dataclass
class ReebGraph:
    field: object
    node_value: list
    node_event: list
    arcs: list
    vertex_node: np.ndarray
    root: int

    @property
    def n_nodes(self):
        return len(self.node_value)

    def cycle_rank(self, arcs=None, nodes=None):
        arcs = self.arcs if arcs is None else arcs
        nodes = set(range(self.n_nodes)) if nodes is None else set(nodes)
        uf = _UF()
        for n in nodes:
            uf.find(n)
        extra = 0
        for a in arcs:
            if uf.find(a.lower) == uf.find(a.upper):
                extra += 1
            else:
                uf.union(a.lower, a.upper)
        return extra

    def simplified(self):
        """Arcs merged through regular nodes (exactly one arc below and above)."""
        below = {}
        above = {}
        for a in self.arcs:
            above.setdefault(a.lower, []).append(a)
            below.setdefault(a.upper, []).append(a)
        regular = {
            n
            for n in range(self.n_nodes)
            if n != self.root and len(below.get(n, [])) == 1 and len(above.get(n, [])) == 1
        }
        chains = []
        for a in self.arcs:
            if a.lower in regular:
                continue
            lo, f0 = a.lower, a.f0
            cur = a
            while cur.upper in regular:
                cur = above[cur.upper][0]
            chains.append((lo, cur.upper, f0, cur.f1))
        nodes = sorted({n for c in chains for n in c[:2]} | {self.root})
        return nodes, chains

    def summary(self):
        nodes, chains = self.simplified()
        return {
            "nodes": len(nodes),
            "arcs": [{"len": f1 - f0, "f0": f0, "f1": f1} for _, _, f0, f1 in chains],
            "cycle_rank": self.cycle_rank(),
        }

    def to_dot(self):
        nodes, chains = self.simplified()
        out = ["graph reeb {"]
        for n in nodes:
            out.append(f'  n{n} [label="{self.node_value[n]:.4g}"];')
        for lo, hi, f0, f1 in chains:
            out.append(f'  n{lo} -- n{hi} [label="{f1 - f0:.4g}"];')
        out.append("}")
        return "\n".join(out) + "\n"


def reeb_graph(F):
    """Sweep the vertex values; arcs are level components between events."""
    R = F.complex
    ev = F.events
    rank = F.event_rank
    m = len(ev)
    src, dst = R.src, R.dst
    rs, rd = rank[src], rank[dst]
    lo_r = np.minimum(rs, rd)
    hi_r = np.maximum(rs, rd)
    lower_v = np.where(rs <= rd, src, dst)
    upper_v = np.where(rs <= rd, dst, src)
    # nodes: components of f^-1(ev[i])
    uf = _UF()
    for v in range(R.n_vertices):
        uf.find(("v", v))
    strict = [[] for _ in range(m)]  # edges crossed strictly at event i
    for e in range(R.n_edges):
        for i in range(int(lo_r[e]) + 1, int(hi_r[e])):
            strict[i].append(e)
            uf.find(("e", e, i))
        if lo_r[e] == hi_r[e]:
            uf.union(("v", int(src[e])), ("v", int(dst[e])))
    for f in range(R.n_faces):
        corners = R.face_corners[f]
        fr = rank[corners]
        sides = R.face_edge[f]
        for i in set(int(x) for x in fr) | {
            i for e in sides for i in range(int(lo_r[e]) + 1, int(hi_r[e]))
        }:
            elems = [("v", int(v)) for v, rv in zip(corners, fr) if rv == i]
            elems += [("e", int(e), i) for e in sides if lo_r[e] < i < hi_r[e]]
            for a in elems[1:]:
                uf.union(elems[0], a)
    node_id = {}
    node_value, node_event = [], []

    def node_of(elem, i):
        r = uf.find(elem)
        if r not in node_id:
            node_id[r] = len(node_value)
            node_value.append(float(ev[i]))
            node_event.append(i)
        return node_id[r]

    vertex_node = np.array([node_of(("v", v), int(rank[v])) for v in range(R.n_vertices)])
    arcs = []
    for i in range(m - 1):
        mid = 0.5 * (ev[i] + ev[i + 1])
        L = level_set(F, mid)
        if not len(L.crossed):
            continue
        for c in range(L.n_components):
            es = L.crossed[L.edge_component == c]
            e = int(es[0])
            u, w = int(lower_v[e]), int(upper_v[e])
            lower = node_of(("v", u), i) if rank[u] == i else node_of(("e", e, i), i)
            upper = node_of(("v", w), i + 1) if rank[w] == i + 1 else node_of(("e", e, i + 1), i + 1)
            arcs.append(
                ReebArc(len(arcs), lower, upper, float(ev[i]), float(ev[i + 1]), i, es, float(L.component_length[c]))
            )
    root = int(vertex_node[F.source])
    return ReebGraph(F, node_value, node_event, arcs, vertex_node, root)


# -- ball tree -------------------------------------------------------------


@dataclass
class BallTree:
    reeb: ReebGraph
    r: float
    tree: RootedTree  # nodes are Reeb nodes; leaves cut at r are ("cut", arc id)
    leaf_arc: dict  # tree node -> Reeb arc crossing r
    wrap_checked: int = 0
    pair_arc: dict = field(default_factory=dict)  # frozenset(node pair) -> arc id
    requested: float = None  # the metric radius; ``r`` is the PL radius standing in for it


def pl_radius(F, r):
    """PL sublevel radius standing in for the metric ball B(p, r).

    A loop in {f <= s} is homotopic to an edge loop through vertices with
    f <= s, and each of its edges (u, v) closes up with the shortest paths
    to u and v into a loop of length at most 2s + len(u, v).  Taking
    s = r - h/2, with h the longest edge inside the ball, keeps every such
    loop shorter than 2r, so r < sys/2 still forces a tree.  The plain
    sublevel set {f <= r} can hold a noncontractible loop once h exceeds
    sys - 2r, which at r close to sys/2 happens on any practical mesh.
    """
    R = F.complex
    f = F.values
    inside = (f[R.src] < r) & (f[R.dst] < r)
    h = float(R.lengths[inside].max()) if inside.any() else 0.0
    return max(float(r) - 0.5 * h, 0.0)


def _ball_arcs(G, r):
    return [a for a in G.arcs if a.f0 < r]


def ball_tree(G, r, presentation_=None, budget=DEFAULT_BUDGET, wrap_check=True):
    """The image of the ball B(p, r) in the Reeb graph, checked to be a tree.

    The ball is the PL sublevel set at ``pl_radius(F, r)``.  Raises
    CycleDetected if its Reeb image has a cycle, or if a skeleton loop of
    length < 2r is certified noncontractible (the ball wraps around a
    nontrivial class).
    """
    F = G.field
    requested = float(r)
    r = clear_level(F.values, pl_radius(F, requested))[0]
    arcs = _ball_arcs(G, r)
    adj = {}
    for a in arcs:
        adj.setdefault(a.lower, []).append(a)
        adj.setdefault(a.upper, []).append(a)
    # restrict to what is reachable from the root
    reach = {G.root}
    stack = [G.root]
    used = []
    seen_arcs = set()
    while stack:
        n = stack.pop()
        for a in adj.get(n, []):
            if a.id in seen_arcs:
                continue
            seen_arcs.add(a.id)
            used.append(a)
            if a.f1 < r:
                other = a.upper if a.lower == n else a.lower
                if other not in reach:
                    reach.add(other)
                    stack.append(other)
    internal = [a for a in used if a.f1 < r]
    rank = G.cycle_rank(internal, reach)
    if rank:
        raise CycleDetected(
            f"Reeb image of B(p,{r:g}) has cycle rank {rank}",
            {"kind": "reeb-cycle", "cycle_rank": rank, "r": r},
        )
    wrap = 0
    if wrap_check:
        wrap = _wrap_check(F, requested, presentation_, budget)
    edges, leaf_arc, pair_arc = [], {}, {}
    for a in used:
        if a.f1 < r:
            edges.append((a.lower, a.upper, a.length))
            pair_arc[frozenset((a.lower, a.upper))] = a.id
        else:
            cut = ("cut", a.id)
            edges.append((a.lower, cut, r - a.f0))
            leaf_arc[cut] = a.id
            pair_arc[frozenset((a.lower, cut))] = a.id
    tree = RootedTree.from_edges(G.root, edges)
    return BallTree(G, r, tree, leaf_arc, wrap, pair_arc, requested)


def _wrap_check(F, r, P, budget):
    """Certify that no short skeleton loop in the ball is noncontractible."""
    R = F.complex
    base = F.base
    if P is None:
        P = presentation(base)
    d = F.skel
    pred = F.skel_pred
    inside = d[R.src] + R.lengths + d[R.dst] < 2 * r
    tree_edges = set(int(e) for e in pred if e >= 0)
    checked = 0
    for e in np.nonzero(inside)[0]:
        e = int(e)
        if e in tree_edges:
            continue
        path = tree_path(R, pred, int(R.src[e])) + [(e, 1)] + _reverse(tree_path(R, pred, int(R.dst[e])))
        loop = make_loop(P, R, F.source, path)
        checked += 1
        v = is_contractible(P, loop, budget)
        if v.noncontractible:
            raise CycleDetected(
                f"ball of radius {r:g} contains a noncontractible loop of length {loop.length:.6g}",
                {"kind": "wrap", "loop": loop, "verdict": v, "r": r},
            )
    return checked


def tree_path(R, pred, v):
    """Edge path from the tree root to v, as (edge, sign) pairs."""
    out = []
    while pred[v] >= 0:
        e = int(pred[v])
        if R.dst[e] == v:
            out.append((e, 1))
            v = int(R.src[e])
        else:
            out.append((e, -1))
            v = int(R.dst[e])
    return list(reversed(out))


def _reverse(path):
    return [(e, -s) for e, s in reversed(path)]


# -- pruning -----------------------------------------------------------------


@dataclass
class PrunedTree:
    tree: RootedTree  # suppressed (no degree-2 non-root nodes)
    raw: RootedTree
    r: float
    retained: list  # indices into the superlevel region list
    pruned_simply_connected: list
    verdicts: dict  # region index -> "simply-connected" | "not" | "unknown"
    leaf_region: dict  # cut leaf -> region index
    ball: BallTree = None

    @property
    def energy(self):
        return tree_energy(self.tree)

    @property
    def height(self):
        return height_or_inf(self.tree)

    @property
    def root_length(self):
        return root_decomposition(self.tree)[0]

    def summary(self):
        return {
            "edges": len(self.tree.edges),
            "energy": self.energy,
            "height": self.height,
            "root_len": self.root_length,
        }


def region_simply_connected(F, region, budget=DEFAULT_BUDGET):
    sub = induced_subcomplex(F.complex, region.vertices)
    P = presentation(sub)
    S = P.simplified
    if S.ngens == 0:
        return "simply-connected"
    A = P.abelian
    if A.rank or A.torsion:
        return "not"
    ft = P._finite_table(min(budget.rows, 200_000))
    if ft is not None:
        return "simply-connected" if ft[0].size == 1 else "not"
    return "unknown"


def prune(G, r, presentation_=None, budget=DEFAULT_BUDGET, wrap_check=True):
    """T'_r: keep only root paths to superlevel components that carry topology."""
    bt = ball_tree(G, r, presentation_, budget, wrap_check)
    F = G.field
    r = bt.r
    L = level_set(F, r)
    regions = region_components(F, r, "superlevel", L)
    # map each cut leaf to the level component at r through a crossed edge
    comp_region = {}
    for zi, z in enumerate(regions):
        for c in z.level_components:
            comp_region[c] = zi
    leaf_region = {}
    for leaf, aid in bt.leaf_arc.items():
        arc = G.arcs[aid]
        c = L.component_of_edge(int(arc.crossed[0]))
        if c in comp_region:
            leaf_region[leaf] = comp_region[c]
    verdicts, pruned, retained = {}, [], []
    for zi, z in enumerate(regions):
        attached = sum(1 for l, zz in leaf_region.items() if zz == zi)
        if attached == 1:
            v = region_simply_connected(F, z, budget)
        else:
            v = "multi-leaf"
        verdicts[zi] = v
        if attached == 1 and v == "simply-connected":
            pruned.append(zi)
        elif attached >= 1:
            retained.append(zi)
    keep_leaves = {l for l, zi in leaf_region.items() if zi in retained}
    T = bt.tree
    keep = {T.root}
    parent = {}
    for u in T.children:
        for v in T.children[u]:
            parent[v] = u
    for leaf in keep_leaves:
        v = leaf
        while v not in keep:
            keep.add(v)
            v = parent[v]
    edges = [(parent[v], v, T.length[v]) for v in keep if v != T.root]
    raw = RootedTree.from_edges(T.root, edges)
    return PrunedTree(suppress_degree_two(raw), raw, bt.r, retained, pruned, verdicts, leaf_region, bt)


def edge_pieces(pt):
    """Reeb-arc pieces ``(arc id, f_lo, f_hi)`` behind each edge of the suppressed tree.

    Keys are the child node of the edge.
    """
    raw, bt = pt.raw, pt.ball
    G = bt.reeb
    parent = {v: u for u in raw.children for v in raw.children[u]}
    out = {}
    T = pt.tree
    for u in T.children:
        for v in T.children[u]:
            pieces = []
            w = v
            while w != u:
                a = G.arcs[bt.pair_arc[frozenset((parent[w], w))]]
                pieces.append((a.id, a.f0, min(a.f1, pt.r)))
                w = parent[w]
            out[v] = sorted(pieces, key=lambda p: p[1])
    return out


@dataclass
class MinimalModel:
    pruned: PrunedTree
    regions: list
    retained: list
    attachment: dict  # tree leaf -> retained region index


def minimal_model(G, r, presentation_=None, budget=DEFAULT_BUDGET):
    pt = prune(G, r, presentation_, budget)
    F = G.field
    regions = region_components(F, pt.r, "superlevel")
    attach = {l: zi for l, zi in pt.leaf_region.items() if zi in pt.retained}
    return MinimalModel(pt, regions, [regions[i] for i in pt.retained], attach)
