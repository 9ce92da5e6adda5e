"""Cut a complex along a level component, double it and fold the copies to trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complex import TwoComplex, area, homology
from .errors import NonContractibleCut, NoUnfreeComponentFound, PolygonalizationFailure
from .group import DEFAULT_BUDGET, classify_cat, fig_bounds, is_contractible, make_loop, presentation
from .metric import level_set

MERGE_TOL = 1e-12  # relative arc-length tolerance for matching mirror points


def cevian(l0, l1, l2, lam):
    """Distance from the point at fraction lam along side l0 to the opposite corner (Stewart)."""
    d2 = (1.0 - lam) * l2 * l2 + lam * l1 * l1 - lam * (1.0 - lam) * l0 * l0
    return math.sqrt(max(d2, 0.0))


class _Mesh:
    """Mutable Delta-complex used while splitting, cutting and folding."""

    def __init__(self, X, fvals):
        self.names = list(X.vertex_names)
        self.f = [float(x) for x in fvals]
        self.src = [int(x) for x in X.src]
        self.dst = [int(x) for x in X.dst]
        self.lens = [float(x) for x in X.lengths]
        self.alive = [True] * X.n_edges
        self.faces = [[(int(e), int(s)) for e, s in zip(X.face_edge[i], X.face_sign[i])] for i in range(X.n_faces)]
        self.face_origin = list(range(X.n_faces))
        self.edge_faces = [set() for _ in range(X.n_edges)]
        for i, fc in enumerate(self.faces):
            for e, _ in fc:
                self.edge_faces[e].add(i)

    def add_vertex(self, name, fval):
        self.names.append(name)
        self.f.append(fval)
        return len(self.names) - 1

    def add_edge(self, u, v, length):
        self.src.append(u)
        self.dst.append(v)
        self.lens.append(float(length))
        self.alive.append(True)
        self.edge_faces.append(set())
        return len(self.src) - 1

    def ends(self, e, s):
        return (self.src[e], self.dst[e]) if s > 0 else (self.dst[e], self.src[e])

    def _set_face(self, i, sides):
        for e, _ in self.faces[i]:
            self.edge_faces[e].discard(i)
        self.faces[i] = sides
        for e, _ in sides:
            self.edge_faces[e].add(i)

    def _new_face(self, sides, origin):
        self.faces.append([])
        self.face_origin.append(origin)
        self._set_face(len(self.faces) - 1, sides)

    def split_edge(self, e, tau, name, fval):
        """Insert a vertex at fraction ``tau`` from src; faces on e are fanned."""
        u, v, l = self.src[e], self.dst[e], self.lens[e]
        m = self.add_vertex(name, fval)
        lo = self.add_edge(u, m, tau * l)
        hi = self.add_edge(m, v, (1.0 - tau) * l)
        while self.edge_faces[e]:
            i = min(self.edge_faces[e])
            sides = self.faces[i]
            k = next(j for j, (x, _) in enumerate(sides) if x == e)
            s = sides[k][1]
            a, b, c = sides[k], sides[(k + 1) % 3], sides[(k + 2) % 3]
            lam = tau if s > 0 else 1.0 - tau
            opp = self.ends(*c)[0]
            g = self.add_edge(m, opp, cevian(self.lens[a[0]], self.lens[b[0]], self.lens[c[0]], lam))
            first = (lo, 1) if s > 0 else (hi, -1)
            second = (hi, 1) if s > 0 else (lo, -1)
            self._set_face(i, [first, (g, 1), c])
            self._new_face([second, b, (g, -1)], self.face_origin[i])
        self.alive[e] = False
        return m, lo, hi

    def vertex_edges(self):
        out = {}
        for e in range(len(self.src)):
            if self.alive[e]:
                out.setdefault(self.src[e], []).append(e)
                out.setdefault(self.dst[e], []).append(e)
        return out

    def build(self):
        used_v = sorted({x for e in range(len(self.src)) if self.alive[e] for x in (self.src[e], self.dst[e])})
        vmap = {v: i for i, v in enumerate(used_v)}
        emap = {}
        edges, lens, names = [], [], []
        for e in range(len(self.src)):
            if self.alive[e]:
                emap[e] = len(edges)
                edges.append((vmap[self.src[e]], vmap[self.dst[e]]))
                lens.append(self.lens[e])
                names.append(f"z{len(names)}")
        faces = [[(emap[e], s) for e, s in fc] for fc in self.faces]
        Z = TwoComplex(
            [self.names[v] for v in used_v],
            edges,
            lens,
            faces,
            edge_names=names,
            face_names=[f"zf{i}" for i in range(len(faces))],
            require_connected=False,
            degenerate_tol=1e-12,
        )
        return Z, vmap, emap


# -- specs and results ----------------------------------------------------------


@dataclass
class SurgerySpec:
    """Cut data: a Reeb arc of the distance field and a parameter strictly inside it."""

    complex: object
    field: object
    arc: object  # ReebArc
    t: float
    tol: float = MERGE_TOL
    require_contractible: bool = True
    budget: object = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.arc.f0 < self.t < self.arc.f1:
            raise ValueError(f"t={self.t} is not strictly inside the arc ({self.arc.f0}, {self.arc.f1})")


@dataclass
class SurgeredComplex:
    Z: TwoComplex
    minus: tuple  # (vertices, edges) of the folded lower copy, as Z indices
    plus: tuple
    components: list  # connected TwoComplexes
    vertex_component: np.ndarray
    face_origin: list  # Z face -> face of the refined source complex
    merges: int
    level_value: float
    cut_vertices: int
    h1_before: tuple = ()
    h1_after: list = field(default_factory=list)

    @property
    def areas(self):
        return [area(C) for C in self.components]


def _level_curve(F, spec):
    L = level_set(F, spec.t)
    c = L.component_of_edge(int(spec.arc.crossed[0]))
    if c is None or c < 0:
        raise PolygonalizationFailure("arc does not cross the level set at t")
    edges = [int(e) for e in L.crossed[L.edge_component == c]]
    taus = {int(e): float(t) for e, t in zip(L.crossed, L.cross_t) if int(e) in set(edges)}
    return L, edges, taus


def _curve_loops(R, F, edges, value):
    """Closed skeleton paths homotopic to the cycles of the level curve.

    Each crossing is pushed to the lower endpoint of its edge; consecutive
    crossings in a face are joined through the face's uncrossed side.
    """
    f = F.values
    low = {e: (int(R.src[e]) if f[R.src[e]] < value else int(R.dst[e])) for e in edges}
    es = set(edges)
    links = []  # (face, e1, e2, connecting side or None)
    for e in edges:
        for fc in R.edge_faces[e]:
            sides = [int(x) for x in R.face_edge[fc]]
            crossed = [x for x in sides if x in es]
            if len(crossed) == 2 and crossed[0] == e:
                other = [k for k, x in enumerate(sides) if x not in es]
                links.append((fc, crossed[0], crossed[1], other[0] if other else None))
    # spanning forest on the crossings
    adj = {e: [] for e in edges}
    for i, (_, a, b, _) in enumerate(links):
        adj[a].append((i, b))
        adj[b].append((i, a))
    parent = {}
    tree_links = set()
    for root in edges:
        if root in parent:
            continue
        parent[root] = None
        stack = [root]
        while stack:
            x = stack.pop()
            for i, y in adj[x]:
                if y not in parent:
                    parent[y] = (x, i)
                    tree_links.add(i)
                    stack.append(y)

    def step(i, a, b):
        """Skeleton path from low[a] to low[b] across link i."""
        fc, _, _, k = links[i]
        if low[a] == low[b]:
            return []
        e, s = int(R.face_edge[fc, k]), int(R.face_sign[fc, k])
        return [(e, s)] if R.oriented_ends(e, s) == (low[a], low[b]) else [(e, -s)]

    def to_root(x):
        path = []
        while parent[x] is not None:
            y, i = parent[x]
            path += step(i, x, y)
            x = y
        return path, x

    loops = []
    for i, (_, a, b, _) in enumerate(links):
        if i in tree_links:
            continue
        pa, ra = to_root(a)
        pb, _ = to_root(b)
        back = [(e, -s) for e, s in reversed(pa)]
        loops.append((low[ra], back + step(i, a, b) + pb))
    return loops


def _find_cycle(mesh, vset, eset):
    """An oriented cycle ``[(edge, sign), ...]`` in the graph, or None."""
    adj = {}
    for e in eset:
        adj.setdefault(mesh.src[e], []).append(e)
        adj.setdefault(mesh.dst[e], []).append(e)
    for e in eset:
        if mesh.src[e] == mesh.dst[e]:
            return [(e, 1)]
    seen = {}
    for root in sorted(adj):
        if root in seen:
            continue
        seen[root] = None
        stack = [root]
        while stack:
            x = stack.pop()
            for e in adj[x]:
                if seen[x] is not None and seen[x][1] == e:
                    continue
                y = mesh.dst[e] if mesh.src[e] == x else mesh.src[e]
                if y in seen:
                    # walk both to the common ancestor
                    def chain(z):
                        out = [z]
                        while seen[z] is not None:
                            z = seen[z][0]
                            out.append(z)
                        return out

                    cx, cy = chain(x), chain(y)
                    common = next(z for z in cx if z in set(cy))
                    path = []
                    z = y
                    while z != common:  # y up to common
                        p, pe = seen[z]
                        path.append((pe, 1 if mesh.src[pe] == z else -1))
                        z = p
                    down = []
                    z = x
                    while z != common:
                        p, pe = seen[z]
                        down.append((pe, 1 if mesh.src[pe] == p else -1))
                        z = p
                    cyc = path + list(reversed(down)) + [(e, 1 if mesh.src[e] == x else -1)]
                    return cyc
                seen[y] = (x, e)
                stack.append(y)
    return None


def _fold_cycle(mesh, cyc, vset, eset, tol, tag):
    """Identify mirror points of a cycle by arc length; returns merge count."""
    # insert vertices at mirror positions and at the midpoint
    while True:
        pos = [0.0]
        for e, _ in cyc:
            pos.append(pos[-1] + mesh.lens[e])
        L = pos[-1]
        want = sorted({L - p for p in pos[1:-1]} | {0.5 * L})
        missing = [x for x in want if min(abs(x - p) for p in pos) > tol * max(1.0, L)]
        if not missing:
            break
        x = missing[0]
        i = max(j for j in range(len(cyc)) if pos[j] < x)
        e, s = cyc[i]
        frac = (x - pos[i]) / mesh.lens[e]
        tau = frac if s > 0 else 1.0 - frac
        m, lo, hi = mesh.split_edge(e, tau, f"{tag}{len(mesh.names)}", mesh.f[mesh.src[e]])
        vset.add(m)
        eset.discard(e)
        eset.update((lo, hi))
        cyc[i : i + 1] = [(lo, 1), (hi, 1)] if s > 0 else [(hi, -1), (lo, -1)]
    n = len(cyc)
    verts = [mesh.ends(*cyc[0])[0]] + [mesh.ends(e, s)[1] for e, s in cyc]
    vmerge = {}
    emerge = {}
    for i in range(n // 2):
        j = n - 1 - i
        (x, sx), (y, sy) = cyc[i], cyc[j]
        emerge[y] = (x, -sx * sy)
        vmerge[verts[j + 1]] = verts[i]
        vmerge[verts[j]] = verts[i + 1]
    rep = {}

    def find(v):
        while v in vmerge and vmerge[v] != v:
            v = vmerge[v]
        return v

    for v in list(vmerge):
        rep[v] = find(v)
    merges = sum(1 for v, r in rep.items() if v != r)
    for y, (x, sg) in emerge.items():
        for i in list(mesh.edge_faces[y]):
            mesh._set_face(i, [(x, s * sg) if e == y else (e, s) for e, s in mesh.faces[i]])
        mesh.alive[y] = False
        eset.discard(y)
    for e in range(len(mesh.src)):
        if mesh.alive[e]:
            mesh.src[e] = rep.get(mesh.src[e], mesh.src[e])
            mesh.dst[e] = rep.get(mesh.dst[e], mesh.dst[e])
    for v, r in rep.items():
        if v != r:
            vset.discard(v)
    return merges


def fold_to_tree(mesh, vset, eset, tol=MERGE_TOL, tag="m"):
    merges = 0
    while True:
        cyc = _find_cycle(mesh, vset, eset)
        if cyc is None:
            return merges
        merges += _fold_cycle(mesh, cyc, vset, eset, tol, tag)


def _graph_cycle_rank(mesh, vset, eset):
    parent = {v: v for v in vset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    rank = 0
    for e in eset:
        a, b = find(mesh.src[e]), find(mesh.dst[e])
        if a == b:
            rank += 1
        else:
            parent[a] = b
    return rank


def split_components(Z):
    """Connected components of ``Z`` as separate complexes."""
    comp = Z.vertex_component
    out = []
    for c in range(Z.n_components):
        vs = [v for v in range(Z.n_vertices) if comp[v] == c]
        vmap = {v: i for i, v in enumerate(vs)}
        es = [e for e in range(Z.n_edges) if comp[Z.src[e]] == c]
        emap = {e: i for i, e in enumerate(es)}
        fs = [f for f in range(Z.n_faces) if comp[Z.src[Z.face_edge[f, 0]]] == c]
        out.append(
            TwoComplex(
                [Z.vertex_names[v] for v in vs],
                [(vmap[int(Z.src[e])], vmap[int(Z.dst[e])]) for e in es],
                Z.lengths[es],
                [[(emap[int(e)], int(s)) for e, s in zip(Z.face_edge[f], Z.face_sign[f])] for f in fs],
                edge_names=[Z.edge_names[e] for e in es],
                face_names=[Z.face_names[f] for f in fs],
                degenerate_tol=1e-12,
            )
        )
    return out


def cut_and_fold(spec: SurgerySpec) -> SurgeredComplex:
    F = spec.field
    R = F.complex
    L, edges, taus = _level_curve(F, spec)
    t = float(L.value)
    if spec.require_contractible:
        P = presentation(F.base)
        for start, path in _curve_loops(R, F, edges, t):
            if not path:
                continue
            v = is_contractible(P, make_loop(P, R, start, path), spec.budget)
            if not v.contractible:
                raise NonContractibleCut(f"level component at t={t:g} is not certified contractible ({v.kind})")
    mesh = _Mesh(R, F.values)
    cset = set()
    try:
        for e in edges:
            m, _, _ = mesh.split_edge(e, taus[e], f"c{len(cset)}", t)
            cset.add(m)
    except Exception as exc:  # geometric failure of the retriangulation
        raise PolygonalizationFailure(str(exc)) from exc
    cedges = {e for e in range(len(mesh.src)) if mesh.alive[e] and mesh.src[e] in cset and mesh.dst[e] in cset}
    # cut: lower side keeps the curve, upper side gets copies
    copy = {v: mesh.add_vertex(mesh.names[v] + "'", t) for v in sorted(cset)}
    ecopy = {e: mesh.add_edge(copy[mesh.src[e]], copy[mesh.dst[e]], mesh.lens[e]) for e in sorted(cedges)}
    for e in range(len(mesh.src)):
        if not mesh.alive[e] or e in cedges or e in ecopy.values():
            continue
        a, b = mesh.src[e], mesh.dst[e]
        if a in cset and b not in cset and mesh.f[b] > t:
            mesh.src[e] = copy[a]
        elif b in cset and a not in cset and mesh.f[a] > t:
            mesh.dst[e] = copy[b]
    for i, fc in enumerate(mesh.faces):
        if not any(e in cedges for e, _ in fc):
            continue
        corners = [mesh.ends(e, s)[0] for e, s in fc]
        up = [mesh.f[v] > t for v in corners if v not in cset and v not in copy.values()]
        if up and up[0]:
            mesh._set_face(i, [(ecopy[e], s) if e in cedges else (e, s) for e, s in fc])
    minus_v, minus_e = set(cset), set(cedges)
    plus_v, plus_e = set(copy.values()), set(ecopy.values())
    merges = fold_to_tree(mesh, minus_v, minus_e, spec.tol, "m")
    merges += fold_to_tree(mesh, plus_v, plus_e, spec.tol, "p")
    assert _graph_cycle_rank(mesh, minus_v, minus_e) == 0
    assert _graph_cycle_rank(mesh, plus_v, plus_e) == 0
    Z, vmap, emap = mesh.build()
    comps = split_components(Z)
    return SurgeredComplex(
        Z,
        (sorted(vmap[v] for v in minus_v), sorted(emap[e] for e in minus_e)),
        (sorted(vmap[v] for v in plus_v), sorted(emap[e] for e in plus_e)),
        comps,
        np.asarray(Z.vertex_component),
        list(mesh.face_origin),
        merges,
        t,
        len(cset),
        homology(F.base),
        [homology(C) for C in comps],
    )


def copies_acyclic(S: SurgeredComplex):
    Z = S.Z
    for vs, es in (S.minus, S.plus):
        parent = {v: v for v in vs}

        def find(v):
            while parent[v] != v:
                v = parent[v]
            return v

        for e in es:
            a, b = find(int(Z.src[e])), find(int(Z.dst[e]))
            if a == b:
                return False
            parent[a] = b
    return True


# -- component selection and area per tree edge ----------------------------------


@dataclass
class ComponentChoice:
    index: int
    complex: TwoComplex
    fig: tuple
    free: str
    flagged: bool
    candidates: list


def select_unfree_component(S: SurgeredComplex, budget=DEFAULT_BUDGET) -> ComponentChoice:
    """Unfree component with least FIG upper bound (ties: lowest index)."""
    cands = []
    flagged = False
    for i, C in enumerate(S.components):
        P = presentation(C)
        cat = classify_cat(P)
        free = cat["free"]
        if free == "unknown":
            flagged = True
        if free == "no" or (free == "unknown" and P.abelian.torsion):
            cands.append((fig_bounds(P)[1], i, fig_bounds(P), free))
    if not cands:
        raise NoUnfreeComponentFound("no component is certified unfree")
    cands.sort(key=lambda c: (c[0], c[1]))
    _, i, fig, free = cands[0]
    return ComponentChoice(i, S.components[i], fig, free, flagged, [(c[1], c[2]) for c in cands])


@dataclass
class EdgeAreaReport:
    length: float
    area: float
    bound: float
    kind: str  # "half-square" | "root-square"
    margin: float
    verdict: str


def edge_area_bound(F, G, pieces, root=False):
    """Compare the area over a tree edge with half its squared length (or ℓ² at the root).

    The weighted level length of a component is affine between events, so
    the midpoint rule over each arc piece is exact.
    """
    length = sum(hi - lo for _, lo, hi in pieces)
    area_ = 0.0
    for aid, lo, hi in pieces:
        if hi <= lo:
            continue
        L = level_set(F, 0.5 * (lo + hi))
        c = L.component_of_edge(int(G.arcs[aid].crossed[0]))
        area_ += (hi - lo) * float(L.component_coarea[c])
    bound = length * length if root else 0.5 * length * length
    margin = area_ - bound
    verdict = "verified" if margin >= -1e-12 * max(1.0, bound) else "violated"
    return EdgeAreaReport(length, area_, bound, "root-square" if root else "half-square", margin, verdict)
