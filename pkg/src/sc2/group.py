"""Fundamental group presentations, loop words and the contractibility oracle.

Words are tuples of nonzero ints (generator ``i`` is ``i + 1``).  The oracle
is three-valued: Contractible and Noncontractible verdicts carry
certificates that :func:`check_certificate` replays independently of the
code that produced them.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property

from . import coset
from .complex import base_of, edge_words, homology
from .snf import smith_with_columns

CONTRACTIBLE = "Contractible"
NONCONTRACTIBLE = "Noncontractible"
UNKNOWN = "Unknown"


# -- words -------------------------------------------------------------


def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word):
    w = free_reduce(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def inverse(word):
    return tuple(-x for x in reversed(word))


def canonical(word):
    """Representative of a cyclic word up to rotation and inversion."""
    w = cyclic_reduce(word)
    if not w:
        return ()
    cands = []
    for v in (w, inverse(w)):
        cands.extend(v[i:] + v[:i] for i in range(len(v)))
    return min(cands)


def substitute(word, images):
    """Apply a map generator -> word (``images[g]`` for generator index g)."""
    out = []
    for x in word:
        img = images[abs(x) - 1]
        out.extend(img if x > 0 else inverse(img))
    return free_reduce(out)


# -- data types --------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    rows: int = 1_000_000
    depth: int = 12
    states: int = 20_000
    quotient_rows: int = 2_000


DEFAULT_BUDGET = Budget()


@dataclass
class Verdict:
    kind: str
    certificate: dict = field(default_factory=dict)
    steps: int = 0

    @property
    def contractible(self):
        return self.kind == CONTRACTIBLE

    @property
    def noncontractible(self):
        return self.kind == NONCONTRACTIBLE

    @property
    def unknown(self):
        return self.kind == UNKNOWN


@dataclass
class EdgeLoop:
    """Closed edge path on a complex (possibly a refinement of the presented one)."""

    base: int
    edges: tuple  # ((edge, sign), ...)
    length: float
    word: tuple
    vertices: tuple = ()


def make_loop(P, X, start, edges):
    """Build an :class:`EdgeLoop` on ``X`` (``P``'s complex or a refinement)."""
    length = float(sum(X.lengths[e] for e, _ in edges))
    v = start
    verts = [v]
    for e, s in edges:
        a, b = X.oriented_ends(e, s)
        if a != v:
            raise ValueError("edge path is not connected")
        v = b
        verts.append(v)
    if v != start:
        raise ValueError("edge path is not closed")
    return EdgeLoop(start, tuple(edges), length, P.path_word(X, edges), tuple(verts))


@dataclass
class Simplified:
    ngens: int
    relators: list
    rewrite: list  # original generator -> word in simplified generators
    passes: int


@dataclass
class AbelianImage:
    diag: list
    V: list

    @property
    def rank(self):
        return len(self.V) - len(self.diag)

    @property
    def torsion(self):
        return [d for d in self.diag if d > 1]

    def image(self, word, ngens):
        x = [0] * ngens
        for l in word:
            x[abs(l) - 1] += 1 if l > 0 else -1
        y = [sum(x[i] * self.V[i][j] for i in range(ngens)) for j in range(ngens)]
        return x, y

    def is_zero(self, y):
        k = len(self.diag)
        return all(y[i] % self.diag[i] == 0 for i in range(k)) and all(v == 0 for v in y[k:])


class Presentation:
    """Spanning-tree presentation of pi_1 of a complex."""

    def __init__(self, X):
        self.complex = X
        nv, ne = X.n_vertices, X.n_edges
        seen = [False] * nv
        tree = [False] * ne
        seen[0] = True
        dq = deque([0])
        while dq:
            v = dq.popleft()
            for e in sorted(X.vertex_edges[v]):
                w = int(X.dst[e]) if X.src[e] == v else int(X.src[e])
                if not seen[w]:
                    seen[w] = True
                    tree[e] = True
                    dq.append(w)
        self.tree = tree
        self.generators = [e for e in range(ne) if not tree[e]]
        gen_of = {e: i for i, e in enumerate(self.generators)}
        self.edge_letter = [gen_of[e] + 1 if e in gen_of else 0 for e in range(ne)]
        self.relators = [
            self.edge_path_word([(int(X.face_edge[f, k]), int(X.face_sign[f, k])) for k in range(3)])
            for f in range(X.n_faces)
        ]
        self._verdicts = {}

    @property
    def ngens(self):
        return len(self.generators)

    def edge_path_word(self, edges):
        """Word of an edge path on this presentation's own complex."""
        out = []
        for e, s in edges:
            l = self.edge_letter[e]
            if l:
                out.append(l if s > 0 else -l)
        return free_reduce(out)

    def path_word(self, X, edges):
        if X is self.complex:
            return self.edge_path_word(edges)
        if base_of(X) is not self.complex:
            raise ValueError("complex is not a refinement of the presented complex")
        words = edge_words(X)
        base_path = []
        for e, s in edges:
            w = words[e]
            base_path.extend(w if s > 0 else [(b, -t) for b, t in reversed(w)])
        return self.edge_path_word(base_path)

    # -- derived structure ----------------------------------------------
    @cached_property
    def simplified(self):
        return tietze(self.ngens, self.relators)

    @cached_property
    def abelian(self):
        S = self.simplified
        M = [[0] * S.ngens for _ in S.relators]
        for i, r in enumerate(S.relators):
            for l in r:
                M[i][abs(l) - 1] += 1 if l > 0 else -1
        diag, V = smith_with_columns(M, S.ngens)
        return AbelianImage(diag, V)

    @cached_property
    def h1(self):
        A = self.abelian
        return {"rank": A.rank, "torsion": A.torsion}

    @cached_property
    def finite_table(self):
        """Complete regular coset table of the group, or None (infinite/unknown)."""
        return self._finite_table(DEFAULT_BUDGET.rows)

    def _finite_table(self, rows):
        S = self.simplified
        if self.abelian.rank > 0:
            return None  # infinite group: enumeration cannot terminate
        table = coset.enumerate_cosets(S.ngens, S.relators, rows)
        if table is None:
            return None
        proof = coset.regularity_proof(table, S.relators)
        if proof is None:
            return None
        return table, proof

    def simplify_word(self, word):
        return free_reduce(substitute(word, self.simplified.rewrite)) if word else ()

    def is_trivial_group(self):
        S = self.simplified
        if S.ngens == 0:
            return True
        ft = self.finite_table
        return ft is not None and ft[0].size == 1


def presentation(X):
    return Presentation(X)


# -- Tietze simplification ----------------------------------------------


def tietze(ngens, relators, max_passes=100):
    """Eliminate generators using short relators.

    A generator is removed when it occurs exactly once in some relator and
    either (a) that relator has length <= 2, (b) it occurs in no other
    relator, or (c) substituting it does not increase total relator length.
    """
    rels = {}
    for i, r in enumerate(relators):
        w = cyclic_reduce(r)
        if w:
            rels[i] = list(w)
    subst = {}
    alive = set(range(1, ngens + 1))
    occ = {g: set() for g in alive}
    for i, w in rels.items():
        for l in w:
            occ[abs(l)].add(i)

    def set_rel(i, w):
        old = rels.pop(i, None)
        if old:
            for l in old:
                occ[abs(l)].discard(i)
        w = list(cyclic_reduce(w))
        if w:
            rels[i] = w
            for l in w:
                occ[abs(l)].add(i)

    passes = 0
    for passes in range(1, max_passes + 1):
        changed = False
        seen = {}
        for i in sorted(rels):
            key = canonical(rels[i])
            if key in seen:
                set_rel(i, [])
                changed = True
            else:
                seen[key] = i
        for i in sorted(rels, key=lambda k: (len(rels[k]), k)):
            if i not in rels:
                continue
            w = rels[i]
            counts = Counter(abs(l) for l in w)
            singles = [g for g in sorted(counts) if counts[g] == 1]
            if not singles:
                continue
            choice = next((g for g in singles if occ[g] == {i}), None)
            if choice is None:
                for g in singles:
                    others = [j for j in occ[g] if j != i]
                    grow = sum(len(rels[j]) for j in others)
                    pos = next(k for k, l in enumerate(w) if abs(l) == g)
                    sol = _solve(w, pos)
                    after = sum(len(cyclic_reduce(_subst_one(rels[j], g, sol))) for j in others)
                    if len(w) <= 2 or after <= grow + len(w):
                        choice = g
                        break
            if choice is None:
                continue
            pos = next(k for k, l in enumerate(w) if abs(l) == choice)
            sol = _solve(w, pos)
            subst[choice] = sol
            set_rel(i, [])
            for j in sorted(occ[choice]):
                set_rel(j, _subst_one(rels[j], choice, sol))
            alive.discard(choice)
            changed = True
        if not changed:
            break

    order = sorted(alive)
    renum = {g: k + 1 for k, g in enumerate(order)}
    memo = {}

    def resolve(g):
        if g in memo:
            return memo[g]
        if g in renum:
            res = (renum[g],)
        else:
            out = []
            for l in subst[g]:
                img = resolve(abs(l))
                out.extend(img if l > 0 else inverse(img))
            res = free_reduce(out)
        memo[g] = res
        return res

    rewrite = [resolve(g) for g in range(1, ngens + 1)]
    new_rels = []
    for i in sorted(rels):
        w = tuple((renum[abs(l)] if l > 0 else -renum[abs(l)]) for l in rels[i])
        new_rels.append(w)
    return Simplified(len(order), new_rels, rewrite, passes)


def _solve(w, pos):
    """Express the letter at ``pos`` of relator ``w`` as a word in the others."""
    rot = list(w[pos:]) + list(w[:pos])
    rest = tuple(rot[1:])
    # x^e * rest = 1  =>  x = rest^{-1} (e=+1) or x = rest (e=-1)
    return inverse(rest) if rot[0] > 0 else rest


def _subst_one(word, g, sol):
    out = []
    for l in word:
        if abs(l) == g:
            out.extend(sol if l > 0 else inverse(sol))
        else:
            out.append(l)
    return free_reduce(out)


# -- the oracle ---------------------------------------------------------


def is_contractible(P, loop, budget=DEFAULT_BUDGET):
    """Three-valued contractibility verdict for an EdgeLoop or raw word."""
    word = loop.word if isinstance(loop, EdgeLoop) else tuple(loop)
    key = (canonical(word), budget)
    hit = P._verdicts.get(key)
    if hit is not None:
        return hit
    v = _decide(P, word, budget)
    P._verdicts[key] = v
    return v


def _decide(P, word, budget):
    w = cyclic_reduce(word)
    if not w:
        return Verdict(CONTRACTIBLE, {"method": "free-reduction", "word": word}, 1)
    S = P.simplified
    sw = cyclic_reduce(P.simplify_word(w))
    if not sw:
        return Verdict(CONTRACTIBLE, {"method": "tietze", "word": word}, 1)
    A = P.abelian
    x, y = A.image(sw, S.ngens)
    if not A.is_zero(y):
        return Verdict(NONCONTRACTIBLE, {"method": "abelianization", "word": word, "image": y}, 1)
    if not S.relators:
        # free group on the surviving generators: reduced nonempty word is nontrivial
        return Verdict(NONCONTRACTIBLE, {"method": "free-group", "word": word, "reduced": sw}, 1)
    ft = P.finite_table if budget.rows >= DEFAULT_BUDGET.rows else P._finite_table(budget.rows)
    if ft is not None:
        table, proof = ft
        end = table.trace(0, sw)
        kind = CONTRACTIBLE if end == 0 else NONCONTRACTIBLE
        return Verdict(kind, {"method": "coset-table", "word": word, "end": end}, table.size)
    steps = dehn_search(S.relators, sw, budget.depth, budget.states)
    if steps is not None:
        return Verdict(CONTRACTIBLE, {"method": "derivation", "word": word, "steps": steps}, len(steps))
    table = quotient_separation(S, sw, budget.quotient_rows)
    if table is not None:
        return Verdict(
            NONCONTRACTIBLE,
            {"method": "quotient-table", "word": word, "table": table},
            table.size,
        )
    return Verdict(UNKNOWN, {"word": word}, budget.states)


def _relator_pieces(relators):
    pieces = []
    for r in relators:
        for v in (r, inverse(r)):
            for i in range(len(v)):
                pieces.append(v[i:] + v[:i])
    return list(dict.fromkeys(pieces))


def dehn_search(relators, word, depth=12, max_states=20_000):
    """Breadth-first search for a derivation of the empty word.

    A move rotates the cyclic word and prepends a cyclic conjugate of a
    relator (or its inverse) that cancels at least half of itself, so words
    never grow.  Returns the list of ``(rotation, inserted_word)`` moves.
    """
    start = cyclic_reduce(word)
    pieces = _relator_pieces(relators)
    seen = {start: None}
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            n = len(w)
            for rot in range(max(n, 1)):
                v = w[rot:] + w[:rot]
                for r in pieces:
                    m = len(r)
                    k = 0
                    while k < m and k < n and v[k] == -r[m - 1 - k]:
                        k += 1
                    if 2 * k < m:
                        continue
                    new = cyclic_reduce(r + v)
                    if new in seen:
                        continue
                    seen[new] = (w, rot, r)
                    if not new:
                        return _unwind(seen, new)
                    nxt.append(new)
                    if len(seen) > max_states:
                        return None
        if not nxt:
            return None
        frontier = nxt
    return None


def _unwind(seen, w):
    steps = []
    while seen[w] is not None:
        prev, pos, r = seen[w]
        steps.append((pos, r))
        w = prev
    return list(reversed(steps))


def quotient_separation(S, word, max_rows):
    """Look for a finite quotient (adding x^m relators) in which ``word`` acts nontrivially."""
    if S.ngens == 0:
        return None
    for m in range(2, 7):
        extra = [tuple([g + 1] * m) for g in range(S.ngens)]
        table = coset.enumerate_cosets(S.ngens, list(S.relators) + extra, max_rows)
        if table is not None and table.trace(0, word) != 0:
            return table
    return None


# -- certificate replay ------------------------------------------------


def check_certificate(P, verdict):
    """Independently replay a Contractible/Noncontractible certificate."""
    cert = verdict.certificate
    word = tuple(cert.get("word", ()))
    method = cert.get("method")
    if verdict.unknown:
        return False
    S = P.simplified
    if method == "free-reduction":
        return verdict.contractible and not cyclic_reduce(word)
    if method == "tietze":
        return verdict.contractible and not cyclic_reduce(P.simplify_word(word)) and _rewrite_ok(P)
    sw = cyclic_reduce(P.simplify_word(word))
    if method == "abelianization":
        if not _rewrite_ok(P) or not _unimodular(P.abelian.V):
            return False
        A = P.abelian
        if any(not A.is_zero(A.image(r, S.ngens)[1]) for r in S.relators):
            return False
        _, y = A.image(sw, S.ngens)
        return verdict.noncontractible and not A.is_zero(y) and list(y) == list(cert["image"])
    if method == "free-group":
        return verdict.noncontractible and not S.relators and bool(sw) and _rewrite_ok(P)
    if method == "coset-table":
        table, proof = P.finite_table
        if not coset.table_is_consistent(table, S.relators) or not _rewrite_ok(P):
            return False
        end = table.trace(0, sw)
        if verdict.noncontractible:
            return end != 0
        return end == 0 and coset.check_regularity_proof(table, S.relators, proof)
    if method == "quotient-table":
        table = cert["table"]
        return (
            verdict.noncontractible
            and _rewrite_ok(P)
            and coset.table_is_consistent(table, S.relators)
            and table.trace(0, sw) != 0
        )
    if method == "derivation":
        return verdict.contractible and _rewrite_ok(P) and replay_derivation(S.relators, sw, cert["steps"])
    return False


def replay_derivation(relators, word, steps):
    allowed = set(_relator_pieces(relators))
    w = cyclic_reduce(word)
    for rot, r in steps:
        if tuple(r) not in allowed or not 0 <= rot <= max(len(w) - 1, 0):
            return False
        w = cyclic_reduce(tuple(r) + w[rot:] + w[:rot])
    return not w


def _rewrite_ok(P):
    """The Tietze rewrite sends every original relator to a consequence-free word
    that is trivial in the simplified group (checked by cyclic reduction or
    membership among simplified relators up to conjugacy)."""
    cached = getattr(P, "_rewrite_checked", None)
    if cached is not None:
        return cached
    S = P.simplified
    keys = {canonical(r) for r in S.relators}
    ok = True
    for r in P.relators:
        img = canonical(substitute(r, S.rewrite))
        if img and img not in keys:
            ok = False
            break
    P._rewrite_checked = ok
    return ok


def _unimodular(V):
    from fractions import Fraction

    n = len(V)
    M = [[Fraction(x) for x in row] for row in V]
    det = Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if M[r][i] != 0), None)
        if p is None:
            return False
        if p != i:
            M[i], M[p] = M[p], M[i]
            det = -det
        det *= M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] / M[i][i]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[i])]
    return abs(det) == 1


# -- group-level bounds ---------------------------------------------------


def _abelian(S):
    """Presentations visibly defining an abelian group (free quotients have rank <= 1)."""
    if S.ngens <= 1:
        return True
    return S.ngens == 2 and any(is_commutator_relator(cyclic_reduce(r)) for r in S.relators)


def _free_quotient_rank_bound(P):
    rank = P.abelian.rank
    return min(rank, 1) if _abelian(P.simplified) else rank


def fig_bounds(P, loose=False):
    S = P.simplified
    upper = _free_quotient_rank_bound(P)
    used = {abs(l) for r in S.relators for l in r}
    lower = S.ngens - len(used)
    if loose:
        lower = max(lower, 1)
    if not S.relators:
        lower = upper = S.ngens
    return min(lower, upper), upper


def corank_bounds(P, witness=0, loose=False):
    lo_fig, up_fig = fig_bounds(P, loose)
    upper = _free_quotient_rank_bound(P)
    lower = max(lo_fig, int(witness))
    return min(lower, upper), upper


def is_commutator_relator(w):
    return len(w) == 4 and w[0] == -w[2] and w[1] == -w[3] and abs(w[0]) != abs(w[1])


def classify_cat(P):
    """Freeness verdict and LS-category report for a 2-complex."""
    S = P.simplified
    X = P.complex
    b2 = homology(X)[3] if X.n_faces else 0
    trivial = S.ngens == 0
    if not S.relators:
        free = "yes"
    elif P.abelian.torsion:
        free = "no"
    elif len(S.relators) == 1 and is_commutator_relator(S.relators[0]):
        free = "no"
    else:
        ft = P.finite_table
        if ft is not None and ft[0].size > 1:
            free = "no"
        elif ft is not None and ft[0].size == 1:
            free = "yes"
            trivial = True
        else:
            free = "unknown"
    if free == "yes":
        cat = 0 if (trivial and b2 == 0) else 1
    elif free == "no":
        cat = 2
    else:
        cat = "unknown"
    return {"free": free, "cat": cat, "syscat_equals_cat": True}
