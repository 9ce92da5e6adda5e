import pytest

from oracles import random_surgery_specs
from sc2 import fixtures as fx
from sc2.complex import area
from sc2.errors import NonContractibleCut
from sc2.metric import ball_area, distance_field
from sc2.reeb import edge_pieces, prune, reeb_graph
from sc2.surgery import SurgerySpec, copies_acyclic, cut_and_fold, edge_area_bound, select_unfree_component


@pytest.mark.parametrize("spec", random_surgery_specs(12, seed=17), ids=lambda s: f"t{s.t:.3f}")
def test_surgery_conserves_area_and_folds_to_trees(spec):
    S = cut_and_fold(spec)
    assert sum(S.areas) == pytest.approx(area(spec.complex), rel=1e-9)
    assert copies_acyclic(S)


def test_t_must_lie_inside_the_arc(rp2):
    F = distance_field(rp2, 0, 0)
    a = reeb_graph(F).arcs[0]
    with pytest.raises(ValueError):
        SurgerySpec(rp2, F, a, a.f1)


def test_wedge_circle_cut_drops_free_rank(wedge):
    F = distance_field(wedge, "0", 0)
    arm = reeb_graph(F).arcs[1]  # one side of the circle
    S = cut_and_fold(SurgerySpec(wedge, F, arm, 0.5))
    assert S.merges == 0  # a point cut needs no folding
    assert S.h1_before[1] == 1 and [h[1] for h in S.h1_after] == [0]
    choice = select_unfree_component(S)
    assert choice.fig == (0, 0) and choice.free == "no" and not choice.flagged


def test_essential_waist_is_refused():
    T = fx.tube()
    F = distance_field(T, 0, 0)
    a = next(a for a in reeb_graph(F).arcs if a.f0 > 2.0)
    t = 0.5 * (a.f0 + a.f1)
    with pytest.raises(NonContractibleCut):
        cut_and_fold(SurgerySpec(T, F, a, t))
    S = cut_and_fold(SurgerySpec(T, F, a, t, require_contractible=False))
    assert len(S.components) == 2 and all(h[1] == 0 for h in S.h1_after)


def test_selection_breaks_ties_by_index():
    D = fx.double_rp2_tube()
    F = distance_field(D, "a0", 0)
    a = reeb_graph(F).arcs[4]  # level curve runs around the tube
    S = cut_and_fold(SurgerySpec(D, F, a, 0.5 * (a.f0 + a.f1), require_contractible=False))
    assert [h[2] for h in S.h1_after] == [[2], [2]]
    choice = select_unfree_component(S)
    assert choice.index == 0 and [c[0] for c in choice.candidates] == [0, 1]


def _root_edge_report(X, base, r):
    F = distance_field(X, base, 1)
    G = reeb_graph(F)
    pt = prune(G, r)
    reports = {}
    for v, pieces in edge_pieces(pt).items():
        root = v in pt.tree.children[pt.tree.root]
        reports[v] = edge_area_bound(F, G, pieces, root=root)
    return F, pt, reports


def test_tube_root_edge_area():
    F, pt, reports = _root_edge_report(fx.tube(), 0, 1.4)
    (rep,) = reports.values()
    assert rep.kind == "root-square" and rep.verdict == "verified" and rep.margin > 0
    # the whole ball sits over the one root edge
    assert rep.area == pytest.approx(ball_area(F, pt.r), rel=1e-9)


def test_wedge_circle_arms_carry_no_area(wedge):
    _, _, reports = _root_edge_report(wedge, "0", 1.2)
    verdicts = sorted(r.verdict for r in reports.values())
    assert verdicts == ["verified", "violated", "violated"]
    assert sorted(r.area for r in reports.values())[:2] == [0.0, 0.0]


def test_trivial_root_edge():
    rep = edge_area_bound(None, None, [], root=True)
    assert rep.bound == 0.0 and rep.verdict == "verified"
