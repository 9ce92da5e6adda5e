import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import determinantal_factors, random_complexes
from sc2 import fixtures as fx
from sc2.complex import (
    TwoComplex,
    area,
    betti1_bounds,
    boundary_matrices,
    euler_characteristic,
    heron,
    homology,
    refine,
)
from sc2.errors import DisconnectedComplex, TriangleInequalityViolation, ValidationError
from sc2.snf import invariant_factors


def test_torus_counts_and_area(torus):
    assert (torus.n_vertices, torus.n_edges, torus.n_faces) == (1, 3, 2)
    assert euler_characteristic(torus) == 0
    assert area(torus) == pytest.approx(1.0, abs=1e-12)
    assert betti1_bounds(torus) == (2, 2)


def test_rp2_counts_area_and_homology(rp2):
    assert (rp2.n_vertices, rp2.n_edges, rp2.n_faces) == (6, 15, 10)
    assert euler_characteristic(rp2) == 1
    assert area(rp2) == pytest.approx(10 * math.sqrt(3) / 4, abs=1e-12)
    assert homology(rp2) == (1, 0, [2], 0)


def test_graph_only_complex():
    X = TwoComplex(["p"], [(0, 0), (0, 0)], [1.0, 2.0], [])
    assert euler_characteristic(X) == -1
    assert betti1_bounds(X) == (2, 2)
    assert area(X) == 0.0


def test_triangle_inequality_rejected():
    with pytest.raises(TriangleInequalityViolation):
        TwoComplex(["a", "b", "c"], [(0, 1), (1, 2), (2, 0)], [1, 1, 3], [[(0, 1), (1, 1), (2, 1)]])


def test_disconnected_rejected():
    edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
    faces = [[(0, 1), (1, 1), (2, 1)], [(3, 1), (4, 1), (5, 1)]]
    with pytest.raises(DisconnectedComplex):
        TwoComplex(list("abcdef"), edges, [1.0] * 6, faces)


def test_face_sides_must_chain():
    with pytest.raises(ValidationError):
        TwoComplex(["a", "b", "c"], [(0, 1), (1, 2), (2, 0)], [1, 1, 1], [[(0, 1), (1, -1), (2, 1)]])


@pytest.mark.parametrize("lengths", [(0.0, 1, 1), (math.inf, 1, 1), (-1, 1, 1)])
def test_bad_lengths(lengths):
    with pytest.raises(ValidationError):
        TwoComplex(["a", "b", "c"], [(0, 1), (1, 2), (2, 0)], lengths, [[(0, 1), (1, 1), (2, 1)]])


def test_heron_equilateral():
    assert heron(1, 1, 1) == pytest.approx(math.sqrt(3) / 4, rel=1e-15)


@pytest.mark.parametrize("name", sorted(fx.FIXTURES))
def test_refine_preserves_area_and_topology(name):
    X = fx.FIXTURES[name]()
    R = refine(X, 1)
    assert R.n_faces == 4 * X.n_faces
    assert area(R) == pytest.approx(area(X), rel=1e-12)
    assert euler_characteristic(R) == euler_characteristic(X)
    assert homology(R) == homology(X)


def test_refine_examples(torus, rp2):
    R0 = refine(torus, 0)
    assert R0.n_faces == torus.n_faces and np.array_equal(R0.lengths, torus.lengths)
    assert refine(torus, 1).n_faces == 8
    R = refine(rp2, 2)
    assert R.n_faces == 160
    assert area(R) == pytest.approx(10 * math.sqrt(3) / 4, rel=1e-12)


def test_refinement_keeps_original_vertices(rp2):
    R = refine(rp2, 2)
    assert R.lineage is not None
    assert R.vertex_names[: rp2.n_vertices] == rp2.vertex_names


def test_smith_form_matches_determinantal_divisors():
    rng = np.random.default_rng(0)
    for _ in range(40):
        r, c = rng.integers(1, 5, size=2)
        M = rng.integers(-4, 5, size=(r, c)).tolist()
        ours = [d for d in invariant_factors(M) if d]
        assert ours == determinantal_factors(M)


@pytest.mark.parametrize("X", random_complexes(8, seed=11))
def test_homology_of_random_complexes(X):
    b0, b1, torsion, b2 = homology(X)
    assert b0 == 1
    assert b0 - b1 + b2 == euler_characteristic(X)
    d1, d2 = boundary_matrices(X)
    assert not (d1 @ d2).any()


def test_torsion_matches_determinantal_divisors():
    rng = np.random.default_rng(4)
    for _ in range(10):
        X = fx.random_complex(rng, n_faces=5, glue_prob=0.6)
        d2 = boundary_matrices(X)[1]
        factors = determinantal_factors(d2.tolist())
        assert homology(X)[2] == [f for f in factors if f > 1]
        assert homology(X)[3] == X.n_faces - len(factors)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.05, 0.95))
def test_area_scales_quadratically(a, b, t):
    c = abs(a - b) + t * (a + b - abs(a - b))
    X = TwoComplex(["u", "v", "w"], [(0, 1), (1, 2), (2, 0)], [a, b, c], [[(0, 1), (1, 1), (2, 1)]])
    assert area(X.scaled(2.5)) == pytest.approx(6.25 * area(X), rel=1e-9)
