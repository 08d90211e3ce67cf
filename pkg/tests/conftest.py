"""Shared fixtures and deterministic graph builders."""

from pathlib import Path

import numpy as np
import pytest

from fraclap import Graph, load_graph

DATA = Path(__file__).parent / "data"


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n, 1.0) for i in range(n)))


def ring_with_chords(n: int, n_chords: int, seed: int = 0,
                     weights: bool = False) -> Graph:
    """Connected undirected graph: an n-ring plus random chords."""
    rng = np.random.default_rng(seed)
    edges = {(i, (i + 1) % n): 1.0 for i in range(n)}
    edges = {(min(u, v), max(u, v)): w for (u, v), w in edges.items()}
    while len(edges) < n + n_chords:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in edges:
            continue
        edges[key] = float(rng.uniform(0.5, 2.0)) if weights else 1.0
    return Graph(n, tuple((u, v, w) for (u, v), w in sorted(edges.items())))


def directed_ring_with_chords(n: int, chords=()) -> Graph:
    """Strongly connected digraph: directed n-ring plus extra arcs."""
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    edges += [(u, v, w) for u, v, w in chords]
    return Graph(n, tuple(edges), directed=True)


def hub_ring_graph(n: int, hub_weight: float = 1.0) -> Graph:
    """Ring plus a hub node adjacent to everything: large spectral radius."""
    edges = {(i, (i + 1) % n): 1.0 for i in range(n)}
    for j in range(2, n - 1):
        key = (0, j)
        if key not in edges:
            edges[key] = hub_weight
    return Graph(n, tuple((u, v, w) for (u, v), w in sorted(edges.items())))


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture(scope="session")
def karate() -> Graph:
    return load_graph(DATA / "karate.mtx")


@pytest.fixture
def digraph5() -> Graph:
    return directed_ring_with_chords(5, [(0, 2, 0.5), (3, 1, 2.0)])


@pytest.fixture
def digraph10() -> Graph:
    return directed_ring_with_chords(
        10, [(0, 3, 2.0), (5, 2, 1.5), (7, 4, 0.5), (8, 1, 1.0)])
