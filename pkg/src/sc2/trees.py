"""Rooted metric trees: energy, height, root-edge decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NoLeaves, NotATree


def _node_key(n):
    """Order plain node ids before tuple ids (cut leaves), each by value."""
    return (isinstance(n, tuple), n if isinstance(n, tuple) else (n,))


@dataclass
class RootedTree:
    """Tree stored as child lists; ``length[v]`` is the edge from parent to v."""

    root: int = 0
    children: dict = field(default_factory=dict)
    length: dict = field(default_factory=dict)
    label: dict = field(default_factory=dict)  # node -> external id

    @classmethod
    def from_edges(cls, root, edges, labels=None):
        """Build from undirected ``(u, v, length)`` triples."""
        adj = {root: []}
        for u, v, l in edges:
            adj.setdefault(u, []).append((v, l))
            adj.setdefault(v, []).append((u, l))
        t = cls(root, {}, {}, dict(labels or {}))
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            t.children.setdefault(u, [])
            for v, l in adj[u]:
                if v in seen:
                    continue
                seen.add(v)
                t.children[u].append(v)
                t.length[v] = float(l)
                stack.append(v)
        if len(edges) != len(seen) - 1:
            raise NotATree(f"{len(edges)} edges on {len(seen)} reachable nodes")
        for u in t.children:
            t.children[u].sort(key=_node_key)
        return t

    @property
    def nodes(self):
        return list(self.children)

    @property
    def edges(self):
        return [(u, v, self.length[v]) for u in self.children for v in self.children[u]]

    def degree(self, v):
        return len(self.children.get(v, [])) + (0 if v == self.root else 1)

    def leaves(self):
        return [v for v in self.children if v != self.root and not self.children[v]]

    def depths(self):
        d = {self.root: 0.0}
        stack = [self.root]
        while stack:
            u = stack.pop()
            for v in self.children[u]:
                d[v] = d[u] + self.length[v]
                stack.append(v)
        return d

    def subtree(self, v, with_edge=True):
        """Subtree hanging below ``v``; with_edge adds v's parent edge, rooted at a new node -1."""
        t = RootedTree(v, {}, {}, {})
        stack = [v]
        while stack:
            u = stack.pop()
            t.children[u] = list(self.children[u])
            for w in self.children[u]:
                t.length[w] = self.length[w]
                stack.append(w)
        if with_edge and v != self.root:
            t.children[-1] = [v]
            t.length[v] = self.length[v]
            t.root = -1
        return t


def suppress_degree_two(T):
    """Merge chains through non-root degree-2 nodes into single edges."""
    out = RootedTree(T.root, {}, {}, dict(T.label))
    stack = [T.root]
    out.children[T.root] = []
    while stack:
        u = stack.pop()
        for v in T.children[u]:
            l = T.length[v]
            while len(T.children[v]) == 1:
                w = T.children[v][0]
                l += T.length[w]
                v = w
            out.children[u].append(v)
            out.children.setdefault(v, [])
            out.length[v] = l
            stack.append(v)
    return out


def tree_energy(T):
    return float(sum(l * l for l in T.length.values()))


def tree_height(T):
    leaves = T.leaves()
    if not leaves:
        raise NoLeaves("tree has no leaves besides the root")
    d = T.depths()
    return min(d[v] for v in leaves)


def height_or_inf(T):
    try:
        return tree_height(T)
    except NoLeaves:
        return math.inf


def root_decomposition(T):
    """Split off the root edge: returns (ell, [branch subtrees]).

    If the root has a single child the root edge is that edge and the
    branches are the subtrees at its far endpoint; otherwise the root edge
    is trivial (length 0) and the branches hang directly from the root.
    """
    kids = T.children.get(T.root, [])
    if len(kids) == 1:
        v = kids[0]
        return T.length[v], [T.subtree(w) for w in T.children[v]]
    return 0.0, [T.subtree(w) for w in kids]


def halving_tree(depth, height=1.0):
    """Binary tree whose edge lengths halve at each branching (root edge h/2)."""
    t = RootedTree(0, {0: []}, {}, {})
    frontier = [0]
    nxt_id = 1
    for k in range(1, depth + 1):
        l = height * 2.0**-k
        new = []
        for u in frontier:
            for _ in range(1 if k == 1 else 2):
                t.children[u].append(nxt_id)
                t.children[nxt_id] = []
                t.length[nxt_id] = l
                new.append(nxt_id)
                nxt_id += 1
        frontier = new
    return t


def y_tree(h):
    return RootedTree.from_edges(0, [(0, 1, 2 * h / 3), (1, 2, h / 3), (1, 3, h / 3)])


def random_tree(rng, n_nodes=12, max_len=1.0):
    edges = [(int(rng.integers(v)), v, float(rng.uniform(0.01, max_len))) for v in range(1, n_nodes)]
    return RootedTree.from_edges(0, edges)
