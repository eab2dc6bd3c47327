import itertools

import networkx as nx
import numpy as np
import pytest

from chilab.core.exceptions import ParameterError
from chilab.core.random import RandomSource
from chilab.models.graph import Graph
from chilab.models.matching import Bipartition, Equipartition, HallWitness, WitnessClass
from chilab.services.graph_core import neighborhood, sample_gnq
from chilab.services.matching import (
    bernoulli_equipartition,
    bipartite_max_matching,
    classify_witness,
    general_max_matching,
    hall_witness,
    random_equipartition,
    structure_check,
)
from chilab.services.oracles import brute_matching
from tests.conftest import cycle_graph, path_graph, petersen, star_graph


def _is_matching(g: Graph, edges) -> bool:
    seen = [v for e in edges for v in e]
    return len(seen) == len(set(seen)) and all(g.has_edge(u, v) for u, v in edges)


@pytest.mark.parametrize("m, sizes", [(0, (0, 0)), (3, (1, 2)), (10, (5, 5))])
def test_random_equipartition_sizes(m, sizes):
    part = random_equipartition(m, RandomSource(1))
    assert (len(part.a), len(part.b)) == sizes
    assert part.a | part.b == frozenset(range(m))


def test_random_equipartition_is_uniform():
    m, draws = 200, 20_000
    hits = np.zeros(m)
    gen = RandomSource(2).generator()
    for _ in range(draws):
        hits[sorted(random_equipartition(m, gen).a)] += 1
    assert np.all(np.abs(hits / draws - 0.5) <= 0.02)


def test_bernoulli_equipartition_is_balanced():
    part, attempts = bernoulli_equipartition(11, RandomSource(3))
    assert (len(part.a), len(part.b)) == (5, 6)
    assert attempts >= 1


def test_equipartition_rejects_unbalanced_sides():
    with pytest.raises(ParameterError):
        Equipartition(a=frozenset({0}), b=frozenset({1, 2, 3}))
    with pytest.raises(ParameterError):
        Bipartition(a=frozenset({0, 1}), b=frozenset({1}))


def test_bipartite_examples():
    assert len(bipartite_max_matching(path_graph(3), Bipartition(a={0, 2}, b={1}))) == 1

    k = 4
    perfect = Graph.from_edges(2 * k, [(2 * i, 2 * i + 1) for i in range(k)])
    split = Equipartition(a=frozenset(range(0, 2 * k, 2)), b=frozenset(range(1, 2 * k, 2)))
    assert len(bipartite_max_matching(perfect, split)) == k

    star = star_graph(3)
    assert len(bipartite_max_matching(star, Equipartition(a={0, 1}, b={2, 3}))) == 1


def test_hall_witness_examples():
    g = Graph.from_edges(3, [(0, 2), (1, 2)])
    witness = hall_witness(g, Bipartition(a={0, 1}, b={2}))
    assert witness == HallWitness(t=frozenset({0, 1}), deficiency=1)

    k22 = Graph.from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
    assert hall_witness(k22, Equipartition(a={0, 1}, b={2, 3})) is None

    witness = hall_witness(star_graph(3), Equipartition(a={0, 1}, b={2, 3}))
    assert witness.t == {1}
    assert not neighborhood(star_graph(3), witness.t) & {2, 3}


@pytest.mark.parametrize("seed", range(10))
def test_hall_witness_deficiency_is_exact(seed):
    g = sample_gnq(12, 0.2, RandomSource(seed))
    part = random_equipartition(12, RandomSource(seed, stream_id=1))
    witness = hall_witness(g, part)
    matched = len(bipartite_max_matching(g, part))
    if witness is None:
        assert matched == len(part.a)
        return
    assert witness.t <= part.a
    assert len(witness.t) - len(neighborhood(g, witness.t) & part.b) == witness.deficiency
    assert matched == len(part.a) - witness.deficiency


def test_classify_witness():
    w = HallWitness(t=frozenset(range(5)), deficiency=1)
    assert classify_witness(w, m=1000, q=1.0, hall_c=2) is WitnessClass.MEDIUM
    assert classify_witness(w, m=1000, q=0.1, hall_c=10) is WitnessClass.SMALL
    assert classify_witness(w, m=10, q=1.0, hall_c=2) is WitnessClass.LARGE
    with pytest.raises(ParameterError):
        classify_witness(w, m=10, q=0.0, hall_c=10)


@pytest.mark.parametrize("graph, size", [(cycle_graph(5), 2), (star_graph(3), 1), (petersen(), 5)])
def test_general_matching_examples(graph, size):
    matching = general_max_matching(graph)
    assert len(matching) == size
    assert _is_matching(graph, matching)


@pytest.mark.parametrize("seed", range(30))
def test_general_matching_matches_brute_force(seed):
    source = RandomSource(seed)
    n = int(source.generator().integers(2, 11))
    g = sample_gnq(n, 0.35, source.child(0))
    matching = general_max_matching(g)
    assert _is_matching(g, matching)
    assert len(matching) == brute_matching(g)


@pytest.mark.parametrize("seed", range(5))
def test_general_matching_agrees_with_networkx(seed):
    g = sample_gnq(120, 0.04, RandomSource(seed))
    view = nx.Graph()
    view.add_nodes_from(range(g.n))
    view.add_edges_from(g.edge_tuples())
    reference = nx.max_weight_matching(view, maxcardinality=True)
    assert len(general_max_matching(g)) == len(reference)


def test_general_dominates_every_equipartition():
    g = sample_gnq(8, 0.4, RandomSource(5))
    best = len(general_max_matching(g))
    for a in itertools.combinations(range(8), 4):
        part = Equipartition(a=frozenset(a), b=frozenset(range(8)) - frozenset(a))
        assert len(bipartite_max_matching(g, part)) <= best


@pytest.mark.parametrize(
    "graph, s, deficiency",
    [(Graph.complete(3), 1, 0), (path_graph(4), 0, 0), (star_graph(3), 0, 2)],
)
def test_structure_check_examples(graph, s, deficiency):
    report = structure_check(graph)
    assert report.s == s
    assert report.deficiency == deficiency
    assert report.near_perfect == (deficiency <= 1)


def test_structure_check_records_equipartition_route():
    report = structure_check(star_graph(3), rng=RandomSource(8), q=0.5, retries=3)
    assert report.equipartition_matched is False
    assert report.partition_attempts == 3
    assert report.hall_witness_size >= 1
    assert report.witness_class is not None
