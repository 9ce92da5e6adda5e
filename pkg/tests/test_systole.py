import math

import pytest

from oracles import gf2_loop_nontrivial, random_complexes, simple_cycles_of_length
from sc2 import fixtures as fx
from sc2.errors import StructureViolation
from sc2.group import make_loop, presentation
from sc2.metric import distance_field
from sc2.systole import ball_systole, check_simple_structure, detect_loose, pointed_systole, systole


def test_torus_systole_is_an_edge_loop(torus):
    S = systole(torus, 0)
    assert S.bracket == (1.0, 1.0)
    assert S.witness.edges == ((0, 1),) and S.verdict.noncontractible


def test_scaled_torus(torus):
    assert systole(fx.torus(2.5), 0).bracket == pytest.approx((2.5, 2.5), rel=1e-12)


def test_rp2_level0_against_gf2_cycles(rp2):
    # pi_1 is Z/2, so a loop is noncontractible exactly when it is nonzero mod 2
    S = systole(rp2, 0)
    pairs = {frozenset((int(rp2.src[e]), int(rp2.dst[e]))) for e in range(rp2.n_edges)}
    assert len(pairs) == rp2.n_edges and all(len(p) == 2 for p in pairs)  # no loops shorter than 3
    assert any(gf2_loop_nontrivial(rp2, [(e, 1) for e in c]) for c in simple_cycles_of_length(rp2, 3))
    assert S.bracket == (3.0, 3.0)


def test_rp2_refinement_cuts_corners(rp2):
    ups = [systole(rp2, level).upper for level in (0, 1, 2)]
    assert ups[2] < 3.0 and ups[2] > 0
    assert ups[0] >= ups[1] >= ups[2]


def test_simply_connected_has_infinite_systole(disk):
    S = systole(disk, 0)
    assert S.bracket == (math.inf, math.inf) and S.witness is None


def test_tube_systole_is_the_polygon_perimeter():
    assert systole(fx.tube(), 0).upper == pytest.approx(8 * math.sin(math.pi / 8), rel=1e-12)


@pytest.mark.parametrize("X", random_complexes(5, seed=2) + [fx.rp2_6(), fx.tube()])
def test_chords_never_lengthen_the_systole(X):
    skel = systole(X, 1)
    chord = ball_systole(X, 1)
    assert chord.upper <= skel.upper + 1e-12
    assert chord.lower <= chord.upper


@pytest.mark.parametrize("X", random_complexes(4, seed=6))
def test_global_systole_is_min_of_pointed(X):
    S = systole(X, 0)
    pointed = [pointed_systole(X, v, 0).upper for v in range(X.n_vertices)]
    assert S.upper == pytest.approx(min(pointed))


def test_rp2_witness_structure(rp2):
    S = systole(rp2, 0)
    F = distance_field(rp2, S.basepoint, 0)
    rep = check_simple_structure(S.witness, F, S.bracket)
    assert rep.midpoint_distance == pytest.approx(1.5)
    assert rep.self_intersections == []


def test_torus_witness_structure(torus):
    S = systole(torus, 0)
    rep = check_simple_structure(S.witness, distance_field(torus, 0, 0), S.bracket)
    assert rep.midpoint_distance == pytest.approx(0.5) and rep.arcs_minimizing


def test_backtracking_loop_violates_structure(rp2):
    S = systole(rp2, 0)
    base = S.basepoint
    e = min(rp2.vertex_edges[base])
    out = 1 if int(rp2.src[e]) == base else -1
    loop = make_loop(presentation(rp2), rp2, base, [(e, out), (e, -out)] + list(S.witness.edges))
    with pytest.raises(StructureViolation):
        check_simple_structure(loop, distance_field(rp2, base, 0), S.bracket)


def test_rp2_witness_is_not_loose(rp2):
    S = systole(rp2, 0)
    rep = detect_loose(S.witness, distance_field(rp2, S.basepoint, 0), S.bracket)
    assert rep.verdict == "not-loose" and rep.exhaustive


def test_wedge_circle_is_loose(wedge):
    S = systole(wedge, 0)
    far = wedge.vertex_index("w3")
    ps = pointed_systole(wedge, far, 0)
    assert ps.upper == pytest.approx(8.0)
    F = distance_field(wedge, far, 0)
    check_simple_structure(ps.witness, F, S.bracket)
    rep = detect_loose(ps.witness, F, S.bracket)
    assert rep.verdict == "loose" and len(rep.components) == 2
    assert 0.5 * (8.0 - 3.0) < rep.r < 4.0
