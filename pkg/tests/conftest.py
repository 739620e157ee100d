"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from pbitsim.graph import ChimeraGraph, build_chimera
from pbitsim.model import IsingProblem


def random_tile_problem(seed: int, rows: int = 1, cols: int = 1,
                        shore: int = 4) -> tuple[ChimeraGraph, IsingProblem]:
    """A Chimera graph with uniform random couplings in [-1, 1] and h = 0."""
    g = build_chimera(rows, cols, shore)
    rng = np.random.default_rng(seed)
    couplings = {e: float(w) for e, w in zip(g.edges, rng.uniform(-1.0, 1.0, g.num_edges))}
    return g, IsingProblem(g.num_nodes, couplings, np.zeros(g.num_nodes))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


@pytest.fixture
def tile() -> ChimeraGraph:
    return build_chimera(1, 1, 4)
