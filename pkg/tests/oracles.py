"""Independent reference computations used to check the package.

Nothing here imports the algorithms under test; each oracle re-derives its
answer from first principles (heap Dijkstra, determinantal divisors, GF(2)
linear algebra, explicit cochains, finite permutation groups).
"""

from __future__ import annotations

import heapq
import itertools
import math
from functools import reduce

import numpy as np

from sc2 import fixtures as fx


def random_complexes(count, seed):
    rng = np.random.default_rng(seed)
    return [fx.random_complex(rng) for _ in range(count)]


SURGERY_FIXTURES = ["torus", "rp2_6", "disk", "tube", "tripod", "wedge_rp2_s1", "double_rp2_tube"]


def random_surgery_specs(count, seed):
    """Cuts at a random parameter of a random Reeb arc from a random vertex."""
    from sc2.metric import distance_field
    from sc2.reeb import reeb_graph
    from sc2.surgery import SurgerySpec

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        X = fx.FIXTURES[SURGERY_FIXTURES[rng.integers(len(SURGERY_FIXTURES))]]()
        F = distance_field(X, int(rng.integers(X.n_vertices)), int(rng.integers(2)))
        arcs = reeb_graph(F).arcs
        if not arcs:
            continue
        a = arcs[int(rng.integers(len(arcs)))]
        t = a.f0 + (a.f1 - a.f0) * rng.uniform(0.1, 0.9)
        out.append(SurgerySpec(X, F, a, t, require_contractible=False))
    return out


# -- shortest paths --------------------------------------------------------------


def heap_dijkstra(n, arcs, source):
    """Textbook Dijkstra over undirected ``(u, v, w)`` arcs."""
    adj = [[] for _ in range(n)]
    for u, v, w in arcs:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist = [math.inf] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))
    return dist


def skeleton_arcs(X):
    return [(int(X.src[e]), int(X.dst[e]), float(X.lengths[e])) for e in range(X.n_edges)]


# -- integer linear algebra ------------------------------------------------------


def int_det(M):
    """Exact determinant by the Bareiss fraction-free elimination."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1]


def determinantal_factors(M):
    """Invariant factors d_k / d_(k-1) from gcds of all k x k minors."""
    M = [list(r) for r in M]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    divisors = [1]
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for R in itertools.combinations(range(rows), k):
            for C in itertools.combinations(range(cols), k):
                g = math.gcd(g, int_det([[M[i][j] for j in C] for i in R]))
        if g == 0:
            break
        divisors.append(g)
    return [divisors[k] // divisors[k - 1] for k in range(1, len(divisors))]


# -- GF(2) homology --------------------------------------------------------------


def gf2_rank(rows):
    """Rank over GF(2) of integer row vectors given as Python ints (bitsets)."""
    basis = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def gf2_loop_nontrivial(X, edges):
    """Whether the edge loop is nonzero in H1(X; Z/2).

    The loop's edge-parity vector is a cycle; it is trivial exactly when it
    lies in the span of the face boundaries.
    """
    bits = lambda es: reduce(lambda acc, e: acc ^ (1 << e), es, 0)
    faces = [bits(int(X.face_edge[f, k]) for k in range(3)) for f in range(X.n_faces)]
    loop = bits(int(e) for e, _ in edges)
    return gf2_rank(faces + [loop]) > gf2_rank(faces)


def simple_cycles_of_length(X, k):
    """Vertex sequences of simple k-cycles in the 1-skeleton of a simple complex."""
    nbr = {v: set() for v in range(X.n_vertices)}
    edge = {}
    for e in range(X.n_edges):
        u, v = int(X.src[e]), int(X.dst[e])
        nbr[u].add(v)
        nbr[v].add(u)
        edge[frozenset((u, v))] = e
    out = set()
    for cyc in itertools.permutations(range(X.n_vertices), k):
        if cyc[0] != min(cyc):
            continue
        if all(cyc[(i + 1) % k] in nbr[cyc[i]] for i in range(k)):
            out.add(frozenset(edge[frozenset((cyc[i], cyc[(i + 1) % k]))] for i in range(k)))
    return out


# -- Moore space M(Z/n, 1) -------------------------------------------------------


def moore_cochain(X, n):
    """Integer lift (mod 3n) of the winding cochain on the Moore fixture.

    Values on stored edge directions: a_j -> a_(j+1) is 1, a_(i mod 3) -> b_i
    is 0, a_(i+1 mod 3) -> b_i is -1, b_i -> b_(i+1) is 1 and c -> b_i is i.
    Every face sums to 0 mod 3n and the a-circle sums to 3, so a closed
    loop winds (sum / 3) mod n times around the Z/n generator.
    """
    m = 3 * n

    def value(u, v):
        kind = u[0] + v[0]
        if kind == "aa":
            j, k = int(u[1:]), int(v[1:])
            return 1 if k == (j + 1) % 3 else -1
        if kind == "ab":
            j, i = int(u[1:]), int(v[1:])
            if j == i % 3:
                return 0
            assert j == (i + 1) % 3
            return -1
        if kind == "ba":
            return -value(v, u)
        if kind == "bb":
            i, k = int(u[1:]), int(v[1:])
            return 1 if k == (i + 1) % m else -1
        if kind == "cb":
            return int(v[1:])
        if kind == "bc":
            return -int(u[1:])
        raise AssertionError(kind)

    names = X.vertex_names
    return [value(names[X.src[e]], names[X.dst[e]]) for e in range(X.n_edges)]


def moore_winding(cochain, n, edges):
    total = sum(s * cochain[e] for e, s in edges) % (3 * n)
    assert total % 3 == 0
    return (total // 3) % n


def tree_path_from_root(P, X, v):
    """Edge path from vertex 0 to v inside the presentation's spanning tree."""
    parent = {0: None}
    order = [0]
    for u in order:
        for e in sorted(X.vertex_edges[u]):
            if not P.tree[e]:
                continue
            w = int(X.dst[e]) if X.src[e] == u else int(X.src[e])
            if w not in parent:
                parent[w] = (e, u)
                order.append(w)
    path = []
    while parent[v] is not None:
        e, u = parent[v]
        path.append((e, 1 if int(X.src[e]) == u else -1))
        v = u
    return path[::-1]


def generator_path(P, X, letter):
    """Closed edge path at vertex 0 realizing a (signed) raw generator."""
    e = P.generators[abs(letter) - 1]
    u, v = int(X.src[e]), int(X.dst[e])
    fwd = tree_path_from_root(P, X, u) + [(e, 1)] + [(f, -s) for f, s in reversed(tree_path_from_root(P, X, v))]
    return fwd if letter > 0 else [(f, -s) for f, s in reversed(fwd)]


def word_path(P, X, word):
    out = []
    for l in word:
        out += generator_path(P, X, l)
    return out


# -- finite groups ---------------------------------------------------------------


def perm_mul(p, q):
    """Apply p then q (right action, matching left-to-right words)."""
    return tuple(q[i] for i in p)


def perm_inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def evaluate_word(images, word, degree):
    g = tuple(range(degree))
    for l in word:
        p = images[abs(l) - 1]
        g = perm_mul(g, p if l > 0 else perm_inv(p))
    return g


def regular_group_order(images, degree):
    """Order of the permutation group generated by ``images`` (orbit closure)."""
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    gens = list(images) + [perm_inv(p) for p in images]
    while frontier:
        nxt = []
        for g in frontier:
            for p in gens:
                h = perm_mul(g, p)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


# -- chord-graph distances -------------------------------------------------------


def chord_graph_distances(X, source):
    """Distances in the skeleton + edge-midpoint + face-chord graph of X.

    Faces are laid out in the plane by the law of cosines; every pair of
    boundary points on different sides of a face is joined by a straight
    chord.  Node ids: vertices first, then one midpoint per edge.
    """
    nv = X.n_vertices
    arcs = []
    for e in range(X.n_edges):
        half = float(X.lengths[e]) / 2
        arcs += [(int(X.src[e]), nv + e, half), (nv + e, int(X.dst[e]), half)]
    for f in range(X.n_faces):
        sides = [(int(X.face_edge[f, k]), int(X.face_sign[f, k])) for k in range(3)]
        l0, l1, l2 = (float(X.lengths[e]) for e, _ in sides)
        x = (l0 * l0 + l2 * l2 - l1 * l1) / (2 * l0)
        corners = [np.array([0.0, 0.0]), np.array([l0, 0.0]), np.array([x, math.sqrt(max(l2 * l2 - x * x, 0.0))])]
        start = [int(X.src[e]) if s > 0 else int(X.dst[e]) for e, s in sides]
        points = []  # (side, node, position)
        for k, (e, _) in enumerate(sides):
            a, b = corners[k], corners[(k + 1) % 3]
            points.append(({k, (k - 1) % 3}, start[k], a))
            points.append(({k}, nv + e, (a + b) / 2))
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                si, ni, pi = points[i]
                sj, nj, pj = points[j]
                if si & sj:
                    continue  # same side: the edge chain already joins them
                arcs.append((ni, nj, float(np.linalg.norm(pi - pj))))
    return heap_dijkstra(nv + X.n_edges, arcs, source)[:nv]


def flat_torus_distance(point, period=1.0):
    """Distance from the origin on the square flat torus, by unfolding."""
    x, y = (abs(c) % period for c in point)
    return math.hypot(min(x, period - x), min(y, period - y))
