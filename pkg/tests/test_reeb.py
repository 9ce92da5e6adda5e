import math

import numpy as np
import pytest

from oracles import random_complexes
from sc2 import fixtures as fx
from sc2.complex import TwoComplex
from sc2.errors import CycleDetected
from sc2.metric import distance_field
from sc2.reeb import ball_tree, edge_pieces, minimal_model, pl_radius, prune, reeb_graph
from sc2.trees import tree_height


def rectangular_torus(width=1.0, height=2.0):
    diag = math.hypot(width, height)
    return TwoComplex(
        ["p"], [(0, 0)] * 3, [width, height, diag], [[(0, 1), (1, 1), (2, -1)], [(2, 1), (0, -1), (1, -1)]]
    )


def test_disk_reeb_graph_is_one_long_arc(disk):
    G = reeb_graph(distance_field(disk, "c", 1))
    assert G.cycle_rank() == 0
    _, chains = G.simplified()
    lengths = sorted(f1 - f0 for _, _, f0, f1 in chains)
    # the boundary vertices are tiny PL maxima; everything else is one arc from the centre
    assert lengths[-1] > 0.99 and sum(lengths[:-1]) / len(lengths[:-1]) < 0.01


def test_rectangular_torus_reeb_graph_has_a_cycle():
    # level sets split into two circles between the two self-contacts at 1/2 and 1
    G = reeb_graph(distance_field(rectangular_torus(), 0, 2))
    assert G.cycle_rank() == 1


def test_square_torus_contacts_coincide(torus):
    # both self-contacts of the square torus happen at r = 1/2, so no cycle opens up
    G = reeb_graph(distance_field(torus, 0, 2))
    assert G.cycle_rank() == 0
    assert G.summary()["arcs"][0]["f1"] == pytest.approx(math.sqrt(0.5))


def test_tripod_reeb_graph_forks_into_three():
    G = reeb_graph(distance_field(fx.tripod(), "p", 1))
    assert G.cycle_rank() == 0
    nodes, chains = G.simplified()
    root_arcs = [c for c in chains if c[0] == G.root]
    assert len(root_arcs) == 1
    fork = root_arcs[0][1]
    assert sum(1 for c in chains if c[0] == fork) == 3


@pytest.mark.parametrize("X", random_complexes(4, seed=3))
def test_reeb_vertex_nodes_carry_their_values(X):
    F = distance_field(X, 0, 1)
    G = reeb_graph(F)
    for v in range(F.complex.n_vertices):
        assert G.node_value[G.vertex_node[v]] == F.values[v]
    for a in G.arcs:
        assert a.f0 < a.f1
        assert G.node_value[a.lower] == a.f0 and G.node_value[a.upper] == a.f1


@pytest.mark.parametrize("level", [0, 1, 2])
def test_torus_ball_tree(torus, level):
    G = reeb_graph(distance_field(torus, 0, level))
    bt = ball_tree(G, 0.3)
    assert bt.requested == 0.3 and bt.r <= 0.3
    with pytest.raises(CycleDetected):
        ball_tree(G, 0.7)


def test_disk_ball_tree_is_a_path(disk):
    G = reeb_graph(distance_field(disk, "c", 1))
    for r in (0.2, 0.5, 0.9):
        bt = ball_tree(G, r)
        assert len(bt.tree.leaves()) == 1


@pytest.mark.parametrize("X", random_complexes(5, seed=8) + [fx.rp2_6(), fx.tube()])
def test_pl_radius_keeps_short_edge_loops_short(X):
    F = distance_field(X, 0, 1)
    R = F.complex
    for r in (0.2, 0.6, 1.5):
        s = pl_radius(F, r)
        assert 0.0 <= s <= r
        inside = (F.values[R.src] <= s) & (F.values[R.dst] <= s)
        loops = F.values[R.src] + R.lengths + F.values[R.dst]
        assert (loops[inside] <= 2 * r + 1e-12).all()


def test_prune_disk_from_boundary_collapses(disk):
    G = reeb_graph(distance_field(disk, 1, 1))
    pt = prune(G, 0.5)
    assert pt.tree.edges == [] and pt.retained == [] and pt.pruned_simply_connected == [0]


def test_prune_disk_from_centre_keeps_the_annulus(disk):
    pt = prune(reeb_graph(distance_field(disk, "c", 1)), 0.5)
    assert pt.verdicts == {0: "not"} and len(pt.tree.edges) == 1


def test_prune_tripod_keeps_the_essential_finger():
    G = reeb_graph(distance_field(fx.tripod(), "p", 1))
    pt = prune(G, 3.5)
    assert len(pt.ball.tree.leaves()) == 3
    assert pt.pruned_simply_connected == [1, 2] and pt.retained == [0]
    assert len(pt.tree.edges) == 1
    assert tree_height(pt.tree) == pytest.approx(pt.r)
    pieces = edge_pieces(pt)
    (leaf,) = pieces
    spans = pieces[leaf]
    assert spans[0][1] == 0.0 and spans[-1][2] == pytest.approx(pt.r)
    assert all(np.isclose(a[2], b[1]) for a, b in zip(spans, spans[1:]))


def test_prune_torus_keeps_everything(torus):
    G = reeb_graph(distance_field(torus, 0, 2))
    pt = prune(G, 0.3)
    assert pt.pruned_simply_connected == [] and pt.retained == [0]
    mm = minimal_model(G, 0.3)
    assert len(mm.retained) == 1 and list(mm.attachment.values()) == [0]
