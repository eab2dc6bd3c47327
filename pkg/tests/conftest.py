"""
Graphes de référence partagés par les tests.
"""

import pytest

from chilab.core.config import settings
from chilab.models.graph import Graph


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    """K1,k : centre 0, feuilles 1..k."""
    return Graph.from_edges(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def bowtie() -> Graph:
    """Deux triangles {0,1,2} et {0,3,4} partageant le centre 0."""
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])


def disjoint_triangles(k: int = 2) -> Graph:
    edges = []
    for t in range(k):
        a, b, c = 3 * t, 3 * t + 1, 3 * t + 2
        edges += [(a, b), (a, c), (b, c)]
    return Graph.from_edges(3 * k, edges)


def prism() -> Graph:
    """Triangles {0,1,2} et {3,4,5} reliés par le couplage 0-3, 1-4, 2-5."""
    return Graph.from_edges(
        6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (1, 4), (2, 5)]
    )


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


@pytest.fixture
def bowtie_graph() -> Graph:
    return bowtie()


@pytest.fixture
def petersen_graph() -> Graph:
    return petersen()


@pytest.fixture
def log_dir(tmp_path, monkeypatch):
    """Redirige les fichiers de logs vers un répertoire temporaire."""
    directory = tmp_path / "logs"
    monkeypatch.setattr(settings, "LOG_DIR", str(directory))
    return directory
