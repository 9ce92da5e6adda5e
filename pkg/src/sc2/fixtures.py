"""Named example complexes and a random complex generator."""

from __future__ import annotations

import math

import numpy as np

from .complex import TwoComplex
from .errors import UnknownFixture

RP2_FACES = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
    (1, 2, 4), (2, 3, 5), (3, 4, 1), (4, 5, 2), (5, 1, 3),
]


class Builder:
    """Incremental simplicial builder: one edge per vertex pair."""

    def __init__(self):
        self.names, self.index, self.pos = [], {}, {}
        self.edges, self.lengths, self.pair = [], [], {}
        self.faces = []

    def vertex(self, name, pos=None):
        if name not in self.index:
            self.index[name] = len(self.names)
            self.names.append(name)
        if pos is not None:
            self.pos[name] = np.asarray(pos, dtype=float)
        return self.index[name]

    def edge(self, a, b, length=None):
        key = frozenset((a, b))
        if key in self.pair:
            return self.pair[key]
        if length is None:
            length = float(np.linalg.norm(self.pos[a] - self.pos[b]))
        self.pair[key] = len(self.edges)
        self.edges.append((self.index[a], self.index[b]))
        self.lengths.append(length)
        return self.pair[key]

    def face(self, a, b, c):
        sides = []
        for u, v in ((a, b), (b, c), (c, a)):
            e = self.edge(u, v)
            sides.append((e, 1 if self.edges[e][0] == self.index[u] else -1))
        self.faces.append(sides)

    def build(self, **kw):
        return TwoComplex(
            self.names,
            self.edges,
            self.lengths,
            self.faces,
            edge_names=[f"{self.names[u]}_{self.names[v]}" for u, v in self.edges],
            face_names=[f"t{i}" for i in range(len(self.faces))],
            **kw,
        )


def torus(scale=1.0):
    """Unit-square flat torus: one vertex, loops a, b and diagonal c."""
    s = float(scale)
    return TwoComplex(
        ["p"],
        [(0, 0)] * 3,
        [s, s, s * math.sqrt(2.0)],
        [[(0, 1), (1, 1), (2, -1)], [(2, 1), (0, -1), (1, -1)]],
        edge_names=["a", "b", "c"],
        face_names=["lower", "upper"],
    )


def torus_skeleton():
    """The 1-skeleton of the torus: a wedge of three circles."""
    return TwoComplex(["p"], [(0, 0)] * 3, [1.0, 1.0, math.sqrt(2.0)], [], edge_names=["a", "b", "c"])


def _add_rp2(b, prefix, length=1.0, skip=None, rename=None):
    rename = rename or {}
    name = lambda i: rename.get(i, f"{prefix}{i}")
    for i in range(6):
        b.vertex(name(i))
    for f in RP2_FACES:
        if skip is not None and set(f) == set(skip):
            continue
        for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            b.edge(name(u), name(v), length)
        b.face(*(name(i) for i in f))


def rp2_6(length=1.0):
    """Six-vertex projective plane with equilateral faces."""
    b = Builder()
    _add_rp2(b, "", length)
    return b.build()


def disk(n=64, radius=1.0):
    """Fan of a regular n-gon; the centre is vertex 'c'."""
    b = Builder()
    b.vertex("c", (0, 0, 0))
    for i in range(n):
        t = 2 * math.pi * i / n
        b.vertex(f"w{i}", (radius * math.cos(t), radius * math.sin(t), 0))
    for i in range(n):
        b.face("c", f"w{i}", f"w{(i + 1) % n}")
    return b.build()


def tube(around=8, along=6, radius=0.5, length=3.0):
    """Open cylinder; vertex 'r0_0' sits on one end circle."""
    b = Builder()
    for k in range(along + 1):
        for i in range(around):
            t = 2 * math.pi * i / around
            b.vertex(f"r{k}_{i}", (radius * math.cos(t), radius * math.sin(t), length * k / along))
    for k in range(along):
        for i in range(around):
            j = (i + 1) % around
            b.face(f"r{k}_{i}", f"r{k}_{j}", f"r{k + 1}_{i}")
            b.face(f"r{k}_{j}", f"r{k + 1}_{j}", f"r{k + 1}_{i}")
    return b.build()


def _prism(b, bottom, tag, height, segments, top=None):
    """Extrude a triangle (three named vertices) upward; returns the top names."""
    layer = list(bottom)
    base = [b.pos[v] for v in bottom]
    for k in range(1, segments + 1):
        up = np.array([0, 0, height * k / segments])
        nxt = list(top) if (top and k == segments) else [f"{tag}{k}_{j}" for j in range(3)]
        for j in range(3):
            b.vertex(nxt[j], base[j] + up)
        for j in range(3):
            jj = (j + 1) % 3
            b.face(layer[j], layer[jj], nxt[j])
            b.face(layer[jj], nxt[jj], nxt[j])
        layer = nxt
    return layer


def tripod(tube_len=2.0, stem_len=2.0, segments=4, rejoin=False):
    """Cone stem from apex 'p' forking into three unit-triangle fingers.

    Finger 0 is capped by a Moebius band (projective plane minus a face),
    fingers 1 and 2 by cones, so the space has the homotopy type of RP^2.
    With ``rejoin`` the fingers instead merge into a mirrored roof cone with
    apex 'q', giving a closed genus-two surface.
    """
    b = Builder()
    h = math.sqrt(max(stem_len**2 - 1.0, 1e-6))
    b.vertex("p", (0, 0, 0))
    b.vertex("c", (0, 0, h))
    ring = [f"h{i}" for i in range(6)]
    for i in range(6):
        t = 2 * math.pi * i / 6
        b.vertex(ring[i], (math.cos(t), math.sin(t), h))
    for i in range(6):
        b.face("p", ring[i], ring[(i + 1) % 6])
    for i in (1, 3, 5):
        b.face("c", ring[i], ring[(i + 1) % 6])
    top_h = h + tube_len
    roof = [f"k{i}" for i in range(6)]
    if rejoin:
        b.vertex("cq", (0, 0, top_h))
        for i in range(6):
            t = 2 * math.pi * i / 6
            b.vertex(roof[i], (math.cos(t), math.sin(t), top_h))
    tops = []
    for i in range(3):
        top = ["cq", roof[2 * i], roof[2 * i + 1]] if rejoin else None
        tops.append(_prism(b, ["c", ring[2 * i], ring[2 * i + 1]], f"g{i}_", tube_len, segments, top))
    if rejoin:
        b.vertex("q", (0, 0, top_h + h))
        for i in range(6):
            b.face(roof[(i + 1) % 6], roof[i], "q")
        for i in (1, 3, 5):
            b.face(roof[(i + 1) % 6], roof[i], "cq")
        return b.build()
    _add_rp2(b, "m", skip=(0, 1, 2), rename={0: tops[0][0], 1: tops[0][1], 2: tops[0][2]})
    for i in (1, 2):
        apex = f"cap{i}"
        top = tops[i]
        centre = sum(b.pos[v] for v in top) / 3 + np.array([0, 0, 0.5])
        b.vertex(apex, centre)
        for j in range(3):
            b.face(top[j], top[(j + 1) % 3], apex)
    return b.build()


def wedge_rp2_s1(circle_len=8.0, segments=6):
    """RP^2_6 with a face-free circle of total length ``circle_len`` at vertex '0'."""
    b = Builder()
    _add_rp2(b, "")
    names = ["0"] + [f"w{i}" for i in range(1, segments)]
    for n in names[1:]:
        b.vertex(n)
    for i in range(segments):
        b.edge(names[i], names[(i + 1) % segments], circle_len / segments)
    return b.build()


def double_rp2_tube(tube_len=2.0, segments=3):
    """Two RP^2_6 copies joined by a triangular tube glued onto a face of each.

    The tube's waist bounds a face, so cutting it separates two unfree pieces.
    """
    b = Builder()
    for j in range(3):
        t = 2 * math.pi * j / 3
        b.vertex(f"a{j}", (math.cos(t) / math.sqrt(3), math.sin(t) / math.sqrt(3), 0))
    _add_rp2(b, "x", rename={0: "a0", 1: "a1", 2: "a2"})
    top = _prism(b, ["a0", "a1", "a2"], "s", tube_len, segments)
    _add_rp2(b, "y", rename=dict(enumerate(top)))
    return b.build()


def moore_model(n=2):
    """Simplicial Moore space M(Z/n, 1) with unit edges.

    A three-edge circle a0 a1 a2, an annulus whose inner 3n-gon b wraps n
    times around it, and a cone on the 3n-gon from ``c``.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    b = Builder()
    a = [f"a{j}" for j in range(3)]
    for v in a:
        b.vertex(v)
    m = 3 * n
    inner = [f"b{i}" for i in range(m)]
    for v in inner + ["c"]:
        b.vertex(v)
    for j in range(3):
        b.edge(a[j], a[(j + 1) % 3], 1.0)
    for i in range(m):
        lo, hi = a[i % 3], a[(i + 1) % 3]
        nxt = inner[(i + 1) % m]
        for u, v in ((lo, inner[i]), (hi, inner[i]), (hi, nxt), (inner[i], nxt), ("c", inner[i]), ("c", nxt)):
            b.edge(u, v, 1.0)
        b.face(lo, hi, inner[i])
        b.face(hi, nxt, inner[i])
        b.face("c", inner[i], nxt)
    return b.build()


FIXTURES = {
    "torus": torus,
    "rp2_6": rp2_6,
    "disk": disk,
    "tripod": tripod,
    "tube": tube,
    "wedge_rp2_s1": wedge_rp2_s1,
    "double_rp2_tube": double_rp2_tube,
    "moore": moore_model,
}

# Suggested basepoints for each fixture.
BASEPOINTS = {
    "torus": "p",
    "rp2_6": "0",
    "disk": "c",
    "tripod": "p",
    "tube": "r0_0",
    "wedge_rp2_s1": "w3",
    "double_rp2_tube": "x3",
    "moore": "c",
}


def gen_fixture(name, **params):
    try:
        fn = FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    for k, v in params.items():
        if isinstance(v, (int, float)) and not isinstance(v, bool) and v <= 0:
            raise ValueError(f"parameter {k} must be positive")
    return fn(**params)


def random_complex(rng, n_faces=12, extra_edges=1, glue_prob=0.3):
    """Random connected complex with lengths taken from random points in R^3.

    Triangles are attached along existing edges or glued onto three existing
    vertices, so non-manifold points and nontrivial topology both occur.
    """
    b = Builder()
    count = 0

    def fresh():
        nonlocal count
        name = f"u{count}"
        count += 1
        b.vertex(name, rng.normal(size=3))
        return name

    first = [fresh() for _ in range(3)]
    b.face(*first)
    tries = 0
    while len(b.faces) < n_faces and tries < 50 * n_faces:
        tries += 1
        if len(b.names) >= 4 and rng.random() < glue_prob:
            tri = [b.names[i] for i in rng.choice(len(b.names), size=3, replace=False)]
        else:
            e = int(rng.integers(len(b.edges)))
            u, v = b.edges[e]
            tri = [b.names[u], b.names[v], fresh()]
        if _degenerate(b, tri):
            if tri[2] == b.names[-1] and not any(b.names.index(tri[2]) in e for e in b.edges):
                del b.index[b.names.pop()]
                count -= 1
            continue
        b.face(*tri)
    for _ in range(extra_edges):
        u = b.names[int(rng.integers(len(b.names)))]
        b.edge(u, fresh())
    return b.build()


def _degenerate(b, tri):
    p = [b.pos[v] for v in tri]
    n = np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0]))
    sides = [np.linalg.norm(p[i] - p[(i + 1) % 3]) for i in range(3)]
    return n < 0.05 * max(sides) ** 2 or min(sides) < 0.05
