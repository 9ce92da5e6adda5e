import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import gf2_loop_nontrivial, regular_group_order, simple_cycles_of_length
from sc2 import fixtures as fx
from sc2.complex import TwoComplex
from sc2.coset import check_regularity_proof, enumerate_cosets, regularity_proof, table_is_consistent
from sc2.group import (
    Budget,
    Simplified,
    canonical,
    check_certificate,
    classify_cat,
    corank_bounds,
    cyclic_reduce,
    dehn_search,
    fig_bounds,
    free_reduce,
    inverse,
    is_contractible,
    make_loop,
    presentation,
    quotient_separation,
    replay_derivation,
)

words = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=14).map(tuple)


@given(words)
def test_free_reduction_laws(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    assert all(a != -b for a, b in zip(r, r[1:]))
    assert free_reduce(w + inverse(w)) == ()
    assert inverse(inverse(w)) == w


@given(words, st.integers(0, 13))
def test_canonical_is_rotation_invariant(w, k):
    c = cyclic_reduce(w)
    if c:
        k %= len(c)
        assert canonical(c[k:] + c[:k]) == canonical(c)


def test_presentation_examples(torus, rp2):
    P = presentation(torus)
    assert (P.ngens, len(P.relators)) == (3, 2)
    assert P.h1 == {"rank": 2, "torsion": []}
    P = presentation(rp2)
    assert (P.ngens, len(P.relators)) == (10, 10)
    assert P.h1 == {"rank": 0, "torsion": [2]}
    path = TwoComplex(["a", "b", "c"], [(0, 1), (1, 2)], [1.0, 1.0], [])
    assert presentation(path).ngens == 0


def _verdict(P, X, edges, start=0):
    v = is_contractible(P, make_loop(P, X, start, edges))
    assert not v.unknown
    assert check_certificate(P, v)
    return v


def test_torus_generator_is_noncontractible(torus):
    P = presentation(torus)
    v = _verdict(P, torus, [(0, 1)])
    assert v.noncontractible and v.certificate["method"] == "abelianization"


def test_rp2_face_and_three_cycles(rp2):
    P = presentation(rp2)
    face = [(int(rp2.face_edge[0, k]), int(rp2.face_sign[0, k])) for k in range(3)]
    start = rp2.oriented_ends(*face[0])[0]
    assert _verdict(P, rp2, face, start).contractible
    cycles = simple_cycles_of_length(rp2, 3)
    assert len(cycles) == 20
    for edges in cycles:
        path = _orient_cycle(rp2, edges)
        start = rp2.oriented_ends(*path[0])[0]
        v = _verdict(P, rp2, path, start)
        assert v.noncontractible == gf2_loop_nontrivial(rp2, path)
        twice = _verdict(P, rp2, path + path, start)
        assert twice.contractible  # Z/2
    assert sum(gf2_loop_nontrivial(rp2, _orient_cycle(rp2, c)) for c in cycles) == 10


def _orient_cycle(X, edges):
    edges = list(edges)
    e0 = edges.pop()
    path = [(e0, 1)]
    v = int(X.dst[e0])
    while edges:
        for e in edges:
            if int(X.src[e]) == v:
                path.append((e, 1))
                v = int(X.dst[e])
            elif int(X.dst[e]) == v:
                path.append((e, -1))
                v = int(X.src[e])
            else:
                continue
            edges.remove(e)
            break
    return path


def test_torus_commutator_is_contractible(torus):
    P = presentation(torus)
    a, b = (0, 1), (1, 1)
    inv = lambda p: [(e, -s) for e, s in reversed(p)]
    loop = [a, b] + inv([a]) + inv([b])
    v = _verdict(P, torus, loop)
    assert v.contractible and v.certificate["method"] in {"derivation", "tietze", "free-reduction"}


@pytest.mark.parametrize(
    "relators, order",
    [
        ([(1,) * 5], 5),
        ([(1, 1), (2, 2, 2), (1, 2, 1, 2)], 6),  # S3
        ([(1, 1, 1, 1), (1, 1, -2, -2), (-2, 1, 2, 1)], 8),  # Q8
        ([(1, 1), (2, 2), (1, 2, -1, -2)], 4),  # Klein four
    ],
)
def test_coset_enumeration_orders(relators, order):
    table = enumerate_cosets(2 if any(abs(l) == 2 for r in relators for l in r) else 1, relators)
    assert table.size == order
    assert table_is_consistent(table, relators)
    proof = regularity_proof(table, relators)
    assert proof is not None and check_regularity_proof(table, relators, proof)


def test_coset_orders_match_permutation_groups():
    # S3 and Q8 through explicit permutations satisfying the same relators
    s3 = [(1, 0, 2), (1, 2, 0)]
    assert regular_group_order(s3, 3) == enumerate_cosets(2, [(1, 1), (2, 2, 2), (1, 2, 1, 2)]).size
    # Q8 acting on itself: elements (sign, unit) indexed 0..7
    units = ["1", "i", "j", "k"]
    mult = {
        ("1", u): (1, u) for u in units
    } | {(u, "1"): (1, u) for u in units} | {
        ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
        ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
        ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j"),
    }
    elems = [(s, u) for s in (1, -1) for u in units]
    idx = {e: n for n, e in enumerate(elems)}

    def right(g):
        out = []
        for s, u in elems:
            t, w = mult[(u, g)]
            out.append(idx[(s * t, w)])
        return tuple(out)

    assert regular_group_order([right("i"), right("j")], 8) == 8


def test_budget_exhaustion_is_not_an_error():
    table = enumerate_cosets(2, [(1, 2, -1, -2)], max_rows=50)  # Z^2 is infinite
    assert table is None


def test_derivation_replays():
    rel = [(1, 2, -1, -2)]
    steps = dehn_search(rel, (2, 1, -2, -1))
    assert steps is not None and replay_derivation(rel, (2, 1, -2, -1), steps)
    assert not replay_derivation(rel, (1, 1), steps)


def test_quotient_separates_a_commutator():
    # <a, b | (ab)^2> is infinite; adding a^3, b^3 gives the alternating group A4
    S = Simplified(2, [(1, 2, 1, 2)], [], 0)
    table = quotient_separation(S, (1, 2, -1, -2), 2000)
    assert table is not None and table.size == 12
    assert table_is_consistent(table, S.relators)
    assert table.trace(0, (1, 2, -1, -2)) != 0


def test_forged_certificates_fail(rp2):
    P = presentation(rp2)
    cycles = sorted(simple_cycles_of_length(rp2, 3), key=sorted)
    path = next(_orient_cycle(rp2, c) for c in cycles if gf2_loop_nontrivial(rp2, _orient_cycle(rp2, c)))
    start = rp2.oriented_ends(*path[0])[0]
    v = is_contractible(P, make_loop(P, rp2, start, path))
    assert v.noncontractible
    forged = type(v)("contractible", dict(v.certificate), v.steps)
    assert not check_certificate(P, forged)


def test_bounds_and_cat(torus, rp2, wedge):
    P = presentation(rp2)
    assert corank_bounds(P) == (0, 0) and fig_bounds(P) == (0, 0)
    assert classify_cat(P)["free"] == "no" and classify_cat(P)["cat"] == 2
    P = presentation(torus)
    assert corank_bounds(P) == (0, 1)
    assert corank_bounds(P, witness=1) == (1, 1)
    assert fig_bounds(P) == (0, 1)
    assert classify_cat(P)["free"] in {"no", "unknown"}
    assert fig_bounds(presentation(wedge))[0] >= 1
    G = presentation(fx.torus_skeleton())
    assert classify_cat(G)["free"] == "yes" and classify_cat(G)["cat"] == 1
    assert fig_bounds(G) == (3, 3)


def test_fig_never_exceeds_corank():
    for name, make in fx.FIXTURES.items():
        P = presentation(make())
        f, c = fig_bounds(P), corank_bounds(P)
        assert f[0] <= c[0] and f[1] <= c[1]


def test_dehn_search_respects_its_budget():
    # genus-two surface: infinite, abelianization kills commutators, tiny budgets stop the search
    rel = [(1, 2, -1, -2, 3, 4, -3, -4)]
    assert dehn_search(rel, (1, 3, -1, -3), depth=1, max_states=5) is None


def test_exhaustive_short_words_in_s3_agree_with_permutations():
    rel = [(1, 1), (2, 2, 2), (1, 2, 1, 2)]
    table = enumerate_cosets(2, rel)
    s3 = [(1, 0, 2), (1, 2, 0)]
    from oracles import evaluate_word

    for n in range(1, 7):
        for w in itertools.product([1, -1, 2, -2], repeat=n):
            trivial = evaluate_word(s3, w, 3) == (0, 1, 2)
            assert (table.trace(0, w) == 0) == trivial


def test_budgets_key_the_verdict_cache(torus):
    P = presentation(torus)
    loop = make_loop(P, torus, 0, [(0, 1)])
    assert is_contractible(P, loop, Budget(rows=10)) == is_contractible(P, loop)
