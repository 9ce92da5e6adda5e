import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sc2.errors import NoLeaves, NotATree
from sc2.trees import (
    RootedTree,
    halving_tree,
    height_or_inf,
    random_tree,
    root_decomposition,
    suppress_degree_two,
    tree_energy,
    tree_height,
    y_tree,
)


def test_halving_tree_energy():
    T = halving_tree(8, 1.0)
    assert tree_energy(T) == pytest.approx(0.5 * (1 - 2**-8), abs=1e-12)
    assert tree_height(T) == pytest.approx(1 - 2**-8, abs=1e-12)
    assert len(T.leaves()) == 2**7
    assert tree_energy(halving_tree(8, 3.0)) == pytest.approx(9 * 0.498046875, abs=1e-9)


def test_y_tree():
    T = y_tree(3.0)
    assert tree_energy(T) == pytest.approx(6.0)
    assert tree_height(T) == pytest.approx(3.0)
    ell, branches = root_decomposition(T)
    assert ell == pytest.approx(2.0)
    assert [tree_energy(b) for b in branches] == pytest.approx([1.0, 1.0])


def test_single_edge():
    T = RootedTree.from_edges(0, [(0, 1, 2.5)])
    assert tree_energy(T) == 6.25 and tree_height(T) == 2.5
    assert root_decomposition(T) == (2.5, [])


def test_bare_root_has_no_height():
    T = RootedTree.from_edges(7, [])
    with pytest.raises(NoLeaves):
        tree_height(T)
    assert height_or_inf(T) == math.inf


def test_cycles_rejected():
    with pytest.raises(NotATree):
        RootedTree.from_edges(0, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)])


def test_suppression_merges_chains():
    T = RootedTree.from_edges(0, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 0.25), (2, 4, 0.25)])
    S = suppress_degree_two(T)
    assert sorted(S.edges) == [(0, 2, 1.5), (2, 3, 0.25), (2, 4, 0.25)]
    assert tree_height(S) == tree_height(T)
    # a root of degree two is kept
    T = RootedTree.from_edges(0, [(0, 1, 1.0), (0, 2, 1.0)])
    assert sorted(suppress_degree_two(T).edges) == sorted(T.edges)


def test_root_decomposition_at_branching_root():
    T = RootedTree.from_edges(0, [(0, 1, 1.0), (0, 2, 2.0), (2, 3, 1.0)])
    ell, branches = root_decomposition(T)
    assert ell == 0.0
    assert sorted(tree_energy(b) for b in branches) == [1.0, 5.0]


def test_subtree_keeps_parent_edge():
    T = y_tree(3.0)
    sub = T.subtree(2)
    assert sub.root == -1 and sub.edges == [(-1, 2, 1.0)]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30))
def test_energy_bound_on_random_trees(seed, n):
    T = suppress_degree_two(random_tree(np.random.default_rng(seed), n_nodes=n))
    h = tree_height(T)
    assert tree_energy(T) >= 0.5 * h * h - 1e-12
