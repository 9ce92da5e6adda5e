"""Simulated annealing over edge lengths to probe the systolic ratio from below."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complex import area
from .errors import FreeComplexRefused, InfeasibleStart
from .group import DEFAULT_BUDGET, classify_cat, presentation
from .systole import systole

SLACK = 1e-6  # minimal relative triangle-inequality slack of a feasible metric


@dataclass
class MetricCandidate:
    lengths: np.ndarray
    feasibility: float
    objective: float  # sys_lower^2 / area at the evaluation level
    sr: tuple
    level: int
    seed: int
    iteration: int
    chain: int = 0

    def to_dict(self):
        return {
            "lengths": [float(x) for x in self.lengths],
            "feasibility": self.feasibility,
            "objective": self.objective,
            "sr": list(self.sr),
            "level": self.level,
            "seed": self.seed,
            "iteration": self.iteration,
            "chain": self.chain,
        }


@dataclass
class OptimizeResult:
    best: MetricCandidate
    trace: list  # best-so-far objective of the winning chain, one entry per iteration
    chains: list = field(default_factory=list)  # best candidate per chain
    final: dict = field(default_factory=dict)  # re-evaluation of the best metric at a finer level
    label: str = "empirical probe; not a certified optimum"


def feasibility(X, lengths):
    """Minimum over faces of the relative triangle-inequality slack."""
    if not X.n_faces:
        return math.inf
    sl = np.asarray(lengths)[X.face_edge]
    longest = sl.max(axis=1)
    slack = sl.sum(axis=1) - 2 * longest
    return float(np.min(slack / longest))


def chord_points(level, steiner=1):
    """Interior points per edge matching ``level`` with ``steiner`` extra points per refined edge."""
    return 2**level * (steiner + 1) - 1


def evaluate(X, lengths, level, budget=DEFAULT_BUDGET, steiner=1):
    """Objective and ratio bracket of a metric.

    Loops run along straight chords across the original (flat) faces between
    equally spaced edge points, a graph containing every level-``level``
    skeleton loop.  Skeleton-only loops see just three directions per face
    and let the search inflate the ratio far past the true one.
    """
    Y = X.with_lengths(lengths)
    S = systole(Y, 0, budget, steiner=chord_points(level, steiner))
    A = area(Y)
    return S.lower**2 / A, (S.lower**2 / A, S.upper**2 / A)


def _chain(X, lengths0, iterations, seed, chain, level, budget, steiner=1, sigma=(0.3, 0.01), temp=(0.05, 1e-4)):
    rng = np.random.default_rng([seed, chain])
    area0 = area(X.with_lengths(lengths0))
    x = np.log(np.asarray(lengths0, dtype=float))
    obj, sr = evaluate(X, np.exp(x), level, budget, steiner)
    best = MetricCandidate(np.exp(x), feasibility(X, np.exp(x)), obj, sr, level, seed, 0, chain)
    trace = []
    ne = len(x)
    for it in range(1, iterations + 1):
        frac = it / max(iterations, 1)
        s = sigma[0] * (sigma[1] / sigma[0]) ** frac
        T = temp[0] * (temp[1] / temp[0]) ** frac
        # rejection: redraw until every face keeps its slack
        for _ in range(50):
            y = x.copy()
            y[rng.integers(ne)] += rng.normal(0.0, s)
            lengths = np.exp(y)
            if feasibility(X, lengths) > SLACK:
                break
        else:
            trace.append(best.objective)
            continue
        # area normalization keeps the lengths bounded (the ratio is scale invariant)
        lengths *= math.sqrt(area0 / area(X.with_lengths(lengths)))
        y = np.log(lengths)
        cand, csr = evaluate(X, lengths, level, budget, steiner)
        if cand >= obj or rng.random() < math.exp((cand - obj) / T):
            x, obj = y, cand
            if cand > best.objective:
                best = MetricCandidate(lengths.copy(), feasibility(X, lengths), cand, csr, level, seed, it, chain)
        trace.append(best.objective)
    return best, trace


def optimize(X, iterations=2000, seed=0, level=2, chains=1, budget=DEFAULT_BUDGET, final_level=3, steiner=1):
    """Anneal log edge lengths to maximize sys_lower^2 / area."""
    if classify_cat(presentation(X))["free"] == "yes":
        raise FreeComplexRefused("the fundamental group is free; the systolic ratio is unbounded")
    lengths0 = np.array(X.lengths, dtype=float)
    if feasibility(X, lengths0) <= SLACK:
        raise InfeasibleStart("initial metric has a (nearly) degenerate face")
    results = [_chain(X, lengths0, iterations, int(seed), c, level, budget, steiner) for c in range(chains)]
    bests = [b for b, _ in results]
    k = max(range(chains), key=lambda i: (bests[i].objective, -i))
    best, trace = results[k]
    final = {}
    if final_level is not None and final_level != level:
        obj, sr = evaluate(X, best.lengths, final_level, budget, steiner)
        final = {"level": final_level, "objective": obj, "sr": list(sr)}
    return OptimizeResult(best, trace, bests, final)
