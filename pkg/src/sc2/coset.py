"""Todd-Coxeter coset enumeration (HLT strategy) and table certificates.

Words are tuples of nonzero ints: generator ``i`` is ``i + 1``, its inverse
``-(i + 1)``.  Table columns use ``2 i`` for the generator and ``2 i + 1``
for its inverse, so ``col ^ 1`` is the inverse column.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


def col(letter):
    g = abs(letter) - 1
    return 2 * g if letter > 0 else 2 * g + 1


@dataclass
class CosetTable:
    ngens: int
    rows: list  # rows[c][col] -> coset

    @property
    def size(self):
        return len(self.rows)

    def trace(self, coset, word):
        rows = self.rows
        for letter in word:
            coset = rows[coset][col(letter)]
        return coset


class _Enumerator:
    def __init__(self, ngens, relators, max_rows):
        self.ncol = 2 * ngens
        self.rels = [[col(x) for x in r] for r in relators if r]
        self.max_rows = max_rows
        self.table = [[-1] * self.ncol]
        self.parent = [0]
        self.defined = 1

    def rep(self, c):
        p = self.parent
        r = c
        while p[r] != r:
            r = p[r]
        while p[c] != r:
            p[c], c = r, p[c]
        return r

    def define(self, c, x):
        if self.defined >= self.max_rows:
            raise _Overflow
        n = len(self.table)
        self.table.append([-1] * self.ncol)
        self.parent.append(n)
        self.defined += 1
        self.table[c][x] = n
        self.table[n][x ^ 1] = c

    def merge(self, a, b, queue):
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        self.parent[hi] = lo
        self.defined -= 1
        queue.append(hi)

    def coincidence(self, a, b):
        queue = []
        self.merge(a, b, queue)
        t = self.table
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(self.ncol):
                f = t[e][x]
                if f < 0:
                    continue
                if t[f][x ^ 1] == e:
                    t[f][x ^ 1] = -1
                e1, f1 = self.rep(e), self.rep(f)
                if t[e1][x] >= 0:
                    self.merge(f1, t[e1][x], queue)
                elif t[f1][x ^ 1] >= 0:
                    self.merge(e1, t[f1][x ^ 1], queue)
                else:
                    t[e1][x] = f1
                    t[f1][x ^ 1] = e1

    def scan_and_fill(self, c, w):
        t = self.table
        f = b = c
        i, j = 0, len(w) - 1
        while True:
            while i <= j and t[f][w[i]] >= 0:
                f = t[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and t[b][w[j] ^ 1] >= 0:
                b = t[b][w[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                t[f][w[i]] = b
                t[b][w[i] ^ 1] = f
                return
            self.define(f, w[i])

    def alive(self, c):
        return self.parent[c] == c

    def run(self):
        c = 0
        while c < len(self.table):
            for w in self.rels:
                if not self.alive(c):
                    break
                self.scan_and_fill(c, w)
            if self.alive(c):
                for x in range(self.ncol):
                    if self.table[c][x] < 0:
                        self.define(c, x)
            c += 1
        live = [c for c in range(len(self.table)) if self.alive(c)]
        renum = {c: i for i, c in enumerate(live)}
        rows = [[renum[self.rep(v)] for v in self.table[c]] for c in live]
        return rows


class _Overflow(Exception):
    pass


def enumerate_cosets(ngens, relators, max_rows=1_000_000):
    """Enumerate cosets of the trivial subgroup; ``None`` if the budget runs out."""
    if ngens == 0:
        return CosetTable(0, [[]])
    en = _Enumerator(ngens, relators, max_rows)
    try:
        rows = en.run()
    except _Overflow:
        return None
    return CosetTable(ngens, rows)


def table_is_consistent(table, relators):
    """Complete permutation table in which every relator fixes every coset."""
    n = table.size
    for row in table.rows:
        if len(row) != 2 * table.ngens or any(not (0 <= v < n) for v in row):
            return False
    for c, row in enumerate(table.rows):
        for x, v in enumerate(row):
            if table.rows[v][x ^ 1] != c:
                return False
    return all(table.trace(c, r) == c for r in relators for c in range(n))


def _schreier_tree(table):
    n = table.size
    seen = [False] * n
    seen[0] = True
    tree = set()
    dq = deque([0])
    while dq:
        c = dq.popleft()
        for x in range(2 * table.ngens):
            d = table.rows[c][x]
            if not seen[d]:
                seen[d] = True
                tree.add(_edge_key(c, x, d))
                dq.append(d)
    return tree


def _edge_key(c, x, d):
    """Undirected Schreier edge labelled by a generator (not inverse) column."""
    return (c, x) if x % 2 == 0 else (d, x ^ 1)


def _cycle_edges(table, c, rel):
    out = []
    for letter in rel:
        x = col(letter)
        d = table.rows[c][x]
        out.append(_edge_key(c, x, d))
        c = d
    return out


def regularity_proof(table, relators):
    """Elimination order showing the coset cover is simply connected.

    Each step names a (relator, coset) cycle in which exactly one surviving
    non-tree Schreier edge occurs, exactly once; that edge is then null in
    the cover's fundamental group.  Returns the step list, or ``None`` if
    the greedy order gets stuck.
    """
    tree = _schreier_tree(table)
    live = {
        _edge_key(c, x, table.rows[c][x])
        for c in range(table.size)
        for x in range(0, 2 * table.ngens, 2)
    } - tree
    cycles = []
    uses = {}
    for ri, r in enumerate(relators):
        for c in range(table.size):
            edges = _cycle_edges(table, c, r)
            k = len(cycles)
            cycles.append((ri, c, edges))
            for e in set(edges):
                if e in live:
                    uses.setdefault(e, []).append(k)
    remaining = [sum(1 for e in edges if e in live) for _, _, edges in cycles]
    queue = deque(k for k, m in enumerate(remaining) if m == 1)
    steps = []
    while queue and live:
        k = queue.popleft()
        if remaining[k] != 1:
            continue
        ri, c, edges = cycles[k]
        e = next(e for e in edges if e in live)
        live.discard(e)
        steps.append((ri, c, e))
        for k2 in uses.get(e, ()):
            remaining[k2] -= sum(1 for x in cycles[k2][2] if x == e)
            if remaining[k2] == 1:
                queue.append(k2)
    return steps if not live else None


def check_regularity_proof(table, relators, steps):
    if not table_is_consistent(table, relators):
        return False
    tree = _schreier_tree(table)
    live = {
        _edge_key(c, x, table.rows[c][x])
        for c in range(table.size)
        for x in range(0, 2 * table.ngens, 2)
    } - tree
    for ri, c, e in steps:
        edges = _cycle_edges(table, c, relators[ri])
        alive = [x for x in edges if x in live]
        if alive != [e]:
            return False
        live.discard(e)
    return not live
