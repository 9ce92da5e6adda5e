import math

import numpy as np
import pytest

from sc2 import fixtures as fx
from sc2.errors import FreeComplexRefused, InfeasibleStart
from sc2.optimize import chord_points, evaluate, optimize


def test_free_complex_refused():
    with pytest.raises(FreeComplexRefused):
        optimize(fx.torus_skeleton(), iterations=1)


def test_degenerate_start_refused(torus):
    flat = torus.with_lengths([1.0, 1.0, 2.0 - 1e-8])  # both faces nearly collapse
    with pytest.raises(InfeasibleStart):
        optimize(flat, iterations=1)


def test_zero_iterations_return_the_start(rp2):
    res = optimize(rp2, iterations=0, level=0, final_level=None)
    assert res.best.iteration == 0 and res.trace == []
    assert np.array_equal(res.best.lengths, rp2.lengths)
    assert res.best.objective == pytest.approx(evaluate(rp2, rp2.lengths, 0)[0])


def test_chord_points():
    assert [chord_points(level) for level in (0, 1, 2)] == [1, 3, 7]
    assert chord_points(2, 0) == 3


def test_runs_are_deterministic_and_pure(rp2):
    a = optimize(rp2, iterations=15, seed=4, level=0, chains=2, final_level=None)
    b = optimize(rp2, iterations=15, seed=4, level=0, chains=2, final_level=None)
    assert np.array_equal(a.best.lengths, b.best.lengths) and a.trace == b.trace
    assert all(x <= y for x, y in zip(a.trace, a.trace[1:]))
    assert a.best.feasibility > 0
    assert evaluate(rp2, a.best.lengths, 0)[0] == pytest.approx(a.best.objective, rel=1e-12)


def test_torus_stays_below_the_hexagonal_ratio(torus):
    res = optimize(torus, iterations=60, seed=1, level=1, final_level=None)
    assert res.best.objective >= 1.0
    assert res.best.objective <= 2 / math.sqrt(3) + 1e-6
