"""Piecewise flat 2-complexes: storage, validation, geometry and refinement.

A :class:`TwoComplex` is a Delta-complex style object: every edge has two
(possibly equal) endpoints and a positive length, every face is a closed
chain of three oriented edges.  Loops and multi-edges are allowed, which
lets the one-vertex torus be written down directly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DanglingReference,
    DisconnectedComplex,
    MatrixTooLarge,
    RefinementBudgetExceeded,
    TriangleInequalityViolation,
    ValidationError,
)

MAX_REFINE_LEVEL = 6
GEOM_TOL = 1e-9


def max_cells():
    return int(os.environ.get("SC2_MAX_CELLS", "2000000"))


def heron(a, b, c):
    """Numerically stable Heron formula (Kahan's ordering)."""
    a, b, c = sorted((float(a), float(b), float(c)), reverse=True)
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * math.sqrt(prod) if prod > 0 else 0.0


def layout_triangle(l0, l1, l2):
    """Planar corners for a triangle whose sides are |P0P1|=l0, |P1P2|=l1, |P2P0|=l2."""
    x = (l0 * l0 + l2 * l2 - l1 * l1) / (2.0 * l0)
    y2 = l2 * l2 - x * x
    y = math.sqrt(y2) if y2 > 0 else 0.0
    return np.array([[0.0, 0.0], [l0, 0.0], [x, y]])


@dataclass(frozen=True)
class FaceGeometry:
    face: int
    corners: np.ndarray
    area: float


@dataclass
class Lineage:
    """How a refined complex sits over the complex it was refined from.

    ``edge_word[i]`` is the oriented path of base edges (zero or one letter)
    that refined edge ``i`` is homotopic to, rel endpoints, after pushing each
    endpoint to a corner of its carrier cell.  ``edge_base``/``edge_factor``
    give refined lengths as ``factor * base_length``.
    """

    base: "TwoComplex"
    level: int
    vertex_origin: np.ndarray
    vertex_carrier: list
    edge_word: list
    edge_base: np.ndarray
    edge_factor: np.ndarray
    face_base: np.ndarray

    def corner_vertex(self, i):
        """Base vertex a refined vertex is pushed to by the carrier homotopy."""
        kind, idx, coords = self.vertex_carrier[i]
        base = self.base
        if kind == "v":
            return idx
        if kind == "e":
            return int(base.src[idx])
        return int(base.face_corners[idx, 0])

    def lengths_for(self, base_lengths):
        return self.edge_factor * np.asarray(base_lengths, dtype=float)[self.edge_base]


class TwoComplex:
    """Finite connected piecewise flat 2-complex (immutable after construction)."""

    def __init__(
        self,
        vertex_names,
        edges,
        lengths,
        faces,
        *,
        edge_names=None,
        face_names=None,
        lineage=None,
        require_connected=True,
        degenerate_tol=0.0,
    ):
        self.vertex_names = tuple(vertex_names)
        nv = len(self.vertex_names)
        edges = list(edges)
        ne = len(edges)
        self.edge_names = tuple(edge_names) if edge_names is not None else tuple(f"e{i}" for i in range(ne))
        faces = [tuple((int(e), int(s)) for e, s in f) for f in faces]
        nf = len(faces)
        self.face_names = tuple(face_names) if face_names is not None else tuple(f"f{i}" for i in range(nf))
        src = np.array([int(u) for u, _ in edges], dtype=np.int64)
        dst = np.array([int(v) for _, v in edges], dtype=np.int64)
        lens = np.asarray(lengths, dtype=float).reshape(-1)
        if len(lens) != ne:
            raise ValidationError("one length per edge required")
        for i in range(ne):
            if not (0 <= src[i] < nv and 0 <= dst[i] < nv):
                raise DanglingReference(f"edge {self.edge_names[i]!r} references a missing vertex")
            if not (math.isfinite(lens[i]) and lens[i] > 0):
                raise ValidationError(f"edge {self.edge_names[i]!r} has non-positive or non-finite length {lens[i]}")
        fe = np.zeros((nf, 3), dtype=np.int64)
        fs = np.zeros((nf, 3), dtype=np.int64)
        for i, f in enumerate(faces):
            if len(f) != 3:
                raise ValidationError(f"face {self.face_names[i]!r} must have three sides")
            for k, (e, s) in enumerate(f):
                if not 0 <= e < ne:
                    raise DanglingReference(f"face {self.face_names[i]!r} references a missing edge")
                if s not in (1, -1):
                    raise ValidationError("face side signs must be +1 or -1")
                fe[i, k] = e
                fs[i, k] = s
        self.src, self.dst, self.lengths = src, dst, lens
        self.face_edge, self.face_sign = fe, fs
        for a in (src, dst, lens, fe, fs):
            a.setflags(write=False)
        self.lineage = lineage
        self._check_chains()
        self._check_triangles(degenerate_tol)
        if require_connected and not self.is_connected:
            raise DisconnectedComplex(f"complex has {self.n_components} connected components")

    # -- basic counts -------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.vertex_names)

    @property
    def n_edges(self):
        return len(self.src)

    @property
    def n_faces(self):
        return len(self.face_edge)

    def __repr__(self):
        return f"TwoComplex(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces})"

    # -- validation ---------------------------------------------------
    def oriented_ends(self, e, s):
        return (int(self.src[e]), int(self.dst[e])) if s > 0 else (int(self.dst[e]), int(self.src[e]))

    def _check_chains(self):
        for i in range(self.n_faces):
            ends = [self.oriented_ends(self.face_edge[i, k], self.face_sign[i, k]) for k in range(3)]
            for k in range(3):
                if ends[k][1] != ends[(k + 1) % 3][0]:
                    raise ValidationError(f"face {self.face_names[i]!r}: sides do not form a closed chain")

    def _check_triangles(self, tol):
        if self.n_faces == 0:
            return
        sl = self.lengths[self.face_edge]
        for i in range(self.n_faces):
            a, b, c = sorted(sl[i], reverse=True)
            if a >= (b + c) * (1.0 + tol) and not (tol > 0 and a - (b + c) <= tol * (a + b + c)):
                raise TriangleInequalityViolation(self.face_names[i], tuple(float(x) for x in sl[i]))

    # -- adjacency ----------------------------------------------------
    @cached_property
    def face_corners(self):
        c = np.where(self.face_sign > 0, self.src[self.face_edge], self.dst[self.face_edge])
        c.setflags(write=False)
        return c

    @cached_property
    def edge_faces(self):
        out = [[] for _ in range(self.n_edges)]
        for f in range(self.n_faces):
            for k in range(3):
                out[int(self.face_edge[f, k])].append(f)
        return out

    @cached_property
    def vertex_edges(self):
        out = [[] for _ in range(self.n_vertices)]
        for e in range(self.n_edges):
            out[int(self.src[e])].append(e)
            if self.dst[e] != self.src[e]:
                out[int(self.dst[e])].append(e)
        return out

    def _components(self):
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in range(self.n_edges):
            a, b = find(int(self.src[e])), find(int(self.dst[e]))
            if a != b:
                parent[a] = b
        return [find(v) for v in range(self.n_vertices)]

    @cached_property
    def vertex_component(self):
        roots = self._components()
        ids = {}
        return np.array([ids.setdefault(r, len(ids)) for r in roots], dtype=np.int64)

    @property
    def n_components(self):
        return int(self.vertex_component.max()) + 1 if self.n_vertices else 0

    @property
    def is_connected(self):
        return self.n_components == 1

    @cached_property
    def is_pure(self):
        """True when every edge lies in a face and there is at least one face."""
        return self.n_faces > 0 and all(self.edge_faces[e] for e in range(self.n_edges))

    # -- geometry -----------------------------------------------------
    @cached_property
    def face_side_lengths(self):
        return self.lengths[self.face_edge]

    @cached_property
    def face_areas(self):
        return np.array([heron(*self.face_side_lengths[f]) for f in range(self.n_faces)])

    @cached_property
    def face_coords(self):
        out = np.zeros((self.n_faces, 3, 2))
        for f in range(self.n_faces):
            out[f] = layout_triangle(*self.face_side_lengths[f])
        return out

    def geometry(self, f):
        return FaceGeometry(f, self.face_coords[f].copy(), float(self.face_areas[f]))

    def vertex_index(self, name):
        try:
            return self.vertex_names.index(name)
        except ValueError:
            raise KeyError(f"no vertex named {name!r}") from None

    def with_lengths(self, lengths, **kw):
        return TwoComplex(
            self.vertex_names,
            zip(self.src, self.dst),
            lengths,
            [list(zip(self.face_edge[f], self.face_sign[f])) for f in range(self.n_faces)],
            edge_names=self.edge_names,
            face_names=self.face_names,
            **kw,
        )

    def scaled(self, factor):
        return self.with_lengths(self.lengths * float(factor))


def area(X):
    return float(np.sum(X.face_areas)) if X.n_faces else 0.0


def euler_characteristic(X):
    return X.n_vertices - X.n_edges + X.n_faces


def boundary_matrices(X):
    """Integer boundary matrices d1 (V x E) and d2 (E x F)."""
    if X.n_vertices * X.n_edges + X.n_edges * X.n_faces > 0 and max(
        X.n_vertices, X.n_edges, X.n_faces
    ) > 20000:
        raise MatrixTooLarge("boundary matrices exceed 20000 cells")
    d1 = np.zeros((X.n_vertices, X.n_edges), dtype=np.int64)
    for e in range(X.n_edges):
        d1[X.dst[e], e] += 1
        d1[X.src[e], e] -= 1
    d2 = np.zeros((X.n_edges, X.n_faces), dtype=np.int64)
    for f in range(X.n_faces):
        for k in range(3):
            d2[X.face_edge[f, k], f] += X.face_sign[f, k]
    return d1, d2


def homology(X):
    """(betti0, betti1, torsion of H1, betti2) from the boundary matrices."""
    from .snf import invariant_factors, rank

    d1, d2 = boundary_matrices(X)
    r1 = rank(d1)
    factors = invariant_factors(d2)
    r2 = len(factors)
    b0 = X.n_vertices - r1
    b1 = X.n_edges - r1 - r2
    b2 = X.n_faces - r2
    torsion = [int(d) for d in factors if d > 1]
    return b0, b1, torsion, b2


def betti1_bounds(X):
    """Exact first Betti number as a degenerate interval, or honest bounds if too large."""
    try:
        b1 = homology(X)[1]
        return b1, b1
    except MatrixTooLarge:
        chi = euler_characteristic(X)
        return max(0, 1 - chi), X.n_edges - X.n_vertices + 1


# -- refinement ------------------------------------------------------


def _corner_of(coords):
    """Domain corner the carrier homotopy pushes a point to (see Lineage)."""
    nz = [i for i, c in enumerate(coords) if c != 0.0]
    return nz


def _edge_word(base, kind, idx, ca, cb):
    if kind == "e":
        a = 1 if (ca[0] == 0.0) else 0
        b = 1 if (cb[0] == 0.0) else 0
        if a == b:
            return ()
        return ((idx, 1),) if a == 0 else ((idx, -1),)
    signs = base.face_sign[idx]

    def corner(c):
        nz = _corner_of(c)
        if len(nz) == 1:
            return nz[0]
        if len(nz) == 2:
            z = ({0, 1, 2} - set(nz)).pop()
            k = (z + 1) % 3
            return k if signs[k] > 0 else (k + 1) % 3
        return 0

    a, b = corner(ca), corner(cb)
    if a == b:
        return ()
    side_edges = base.face_edge[idx]
    if b == (a + 1) % 3:
        return ((int(side_edges[a]), int(signs[a])),)
    return ((int(side_edges[b]), -int(signs[b])),)


def refine(X, level, max_level=MAX_REFINE_LEVEL):
    """Metric-preserving 1-to-4 midpoint subdivision applied ``level`` times."""
    if level < 0 or level > max_level:
        raise RefinementBudgetExceeded(f"refinement level {level} outside [0, {max_level}]")
    if level == 0:
        return X
    if X.n_faces * 4**level + X.n_edges * 2**level > max_cells():
        raise RefinementBudgetExceeded("refined complex would exceed SC2_MAX_CELLS")
    nv, ne, nf = X.n_vertices, X.n_edges, X.n_faces
    v_car = [("v", i, ()) for i in range(nv)]
    edges = [(int(X.src[e]), int(X.dst[e])) for e in range(ne)]
    e_car = [("e", e, (1.0, 0.0), (0.0, 1.0)) for e in range(ne)]
    e_base = list(range(ne))
    e_fac = [1.0] * ne
    faces = [[(int(X.face_edge[f, k]), int(X.face_sign[f, k])) for k in range(3)] for f in range(nf)]
    f_car = [(f, ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))) for f in range(nf)]

    def avg(a, b):
        return tuple((x + y) * 0.5 for x, y in zip(a, b))

    for _ in range(level):
        nv = len(v_car)
        new_v = list(v_car)
        for e, (kind, idx, ca, cb) in enumerate(e_car):
            new_v.append((kind, idx, avg(ca, cb)))
        new_edges, new_car, new_base, new_fac = [], [], [], []
        for e, (u, v) in enumerate(edges):
            m = nv + e
            kind, idx, ca, cb = e_car[e]
            mid = avg(ca, cb)
            new_edges += [(u, m), (m, v)]
            new_car += [(kind, idx, ca, mid), (kind, idx, mid, cb)]
            new_base += [e_base[e], e_base[e]]
            new_fac += [e_fac[e] * 0.5, e_fac[e] * 0.5]
        new_faces, new_fcar = [], []
        for f, sides in enumerate(faces):
            of, (C0, C1, C2) = f_car[f]
            C = (C0, C1, C2)
            m = [nv + sides[k][0] for k in range(3)]
            M = [avg(C[k], C[(k + 1) % 3]) for k in range(3)]

            def first(k):
                e, s = sides[k]
                return (2 * e, 1) if s > 0 else (2 * e + 1, -1)

            def second(k):
                e, s = sides[k]
                return (2 * e + 1, 1) if s > 0 else (2 * e, -1)

            base_i = len(new_edges)
            i01, i12, i20 = base_i, base_i + 1, base_i + 2
            new_edges += [(m[0], m[1]), (m[1], m[2]), (m[2], m[0])]
            new_car += [("f", of, M[0], M[1]), ("f", of, M[1], M[2]), ("f", of, M[2], M[0])]
            # inner edge parallel to the side opposite its position
            for k_par in (2, 0, 1):
                e_par = sides[k_par][0]
                new_base.append(e_base[e_par])
                new_fac.append(e_fac[e_par] * 0.5)
            new_faces.append([first(0), (i20, -1), second(2)])
            new_fcar.append((of, (C[0], M[0], M[2])))
            new_faces.append([second(0), first(1), (i01, -1)])
            new_fcar.append((of, (M[0], C[1], M[1])))
            new_faces.append([(i12, -1), second(1), first(2)])
            new_fcar.append((of, (M[2], M[1], C[2])))
            new_faces.append([(i01, 1), (i12, 1), (i20, 1)])
            new_fcar.append((of, (M[0], M[1], M[2])))
        v_car, edges, e_car, e_base, e_fac = new_v, new_edges, new_car, new_base, new_fac
        faces, f_car = new_faces, new_fcar

    e_base = np.array(e_base, dtype=np.int64)
    e_fac = np.array(e_fac)
    lengths = e_fac * X.lengths[e_base]
    words = [_edge_word(X, kind, idx, ca, cb) for (kind, idx, ca, cb) in e_car]
    origin = np.array([idx if kind == "v" else -1 for kind, idx, _ in v_car], dtype=np.int64)
    vnames = [X.vertex_names[i] if i < X.n_vertices else f"~v{i}" for i in range(len(v_car))]
    lineage = Lineage(
        base=X,
        level=level,
        vertex_origin=origin,
        vertex_carrier=v_car,
        edge_word=words,
        edge_base=e_base,
        edge_factor=e_fac,
        face_base=np.array([of for of, _ in f_car], dtype=np.int64),
    )
    return TwoComplex(
        vnames,
        edges,
        lengths,
        faces,
        edge_names=[f"~e{i}" for i in range(len(edges))],
        face_names=[f"~f{i}" for i in range(len(faces))],
        lineage=lineage,
        degenerate_tol=1e-12,
    )


def base_of(X):
    """The unrefined complex X descends from (X itself if unrefined)."""
    return X.lineage.base if X.lineage is not None else X


def edge_words(X):
    """Per-edge oriented base-edge paths (identity words when unrefined)."""
    if X.lineage is not None:
        return X.lineage.edge_word
    return [((e, 1),) for e in range(X.n_edges)]
