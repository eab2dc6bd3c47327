import pytest

from chilab.core.exceptions import BudgetExceededError, K4PresentError, ParameterError
from chilab.core.random import RandomSource
from chilab.models.chromatic import ChiMethod
from chilab.models.graph import Graph
from chilab.services.chromatic import (
    coloring_from_packing,
    dsatur_coloring,
    generic_exact_chi,
    is_clique_partition,
    is_proper_coloring,
    packing_chi,
    packing_chi_from_complement,
    structural_chi,
    verify_structural_formula,
)
from chilab.services.graph_core import complement, sample_gnq
from chilab.services.oracles import brute_chromatic_number
from chilab.services.triangles import contains_k4
from tests.conftest import bowtie, cycle_graph, disjoint_triangles, petersen, star_graph


@pytest.mark.parametrize("n, s, chi", [(10, 2, 4), (7, 0, 4), (9, 3, 3), (0, 0, 0)])
def test_structural_chi(n, s, chi):
    assert structural_chi(n, s) == chi


def test_structural_chi_rejects_impossible_packing():
    with pytest.raises(ParameterError):
        structural_chi(8, 3)


@pytest.mark.parametrize(
    "g_dense, chi",
    [(complement(disjoint_triangles(2)), 2), (cycle_graph(5), 3), (Graph.complete(4), 4)],
)
def test_packing_chi_examples(g_dense, chi):
    result = packing_chi(g_dense)
    assert result.chi == chi
    assert result.method is ChiMethod.PACKING_EXACT
    assert is_proper_coloring(g_dense, result.certificate)
    assert result.colors_used == chi


def test_packing_chi_refuses_k4_in_complement():
    with pytest.raises(K4PresentError):
        packing_chi_from_complement(Graph.complete(4))


@pytest.mark.parametrize("graph, chi", [(cycle_graph(5), 3), (Graph.complete(4), 4), (petersen(), 3)])
def test_generic_exact_chi_examples(graph, chi):
    result = generic_exact_chi(graph)
    assert result.chi == chi
    assert is_proper_coloring(graph, result.certificate)


def test_generic_exact_chi_respects_cap():
    with pytest.raises(ParameterError):
        generic_exact_chi(Graph.empty(30), max_n=20)


def test_dsatur_is_proper():
    g = sample_gnq(25, 0.4, RandomSource(6))
    assert is_proper_coloring(g, dsatur_coloring(g))


@pytest.mark.parametrize(
    "h, structural, exact, agree",
    [
        (Graph.complete(3), 1, 1, True),
        (bowtie(), 2, 2, True),
        (star_graph(3), 2, 3, False),
    ],
)
def test_verify_structural_formula(h, structural, exact, agree):
    record = verify_structural_formula(h)
    assert (record.chi_structural, record.chi_exact, record.agree) == (structural, exact, agree)


def test_certificate_helpers():
    coloring = coloring_from_packing(5, [(0, 1, 2)], [(3, 4)])
    assert coloring == (0, 0, 0, 1, 1)
    h = Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (3, 4)])
    assert is_clique_partition(h, coloring)
    assert not is_clique_partition(Graph.empty(5), coloring)
    with pytest.raises(ParameterError):
        coloring_from_packing(4, [(0, 1, 2)], [(2, 3)])


def _k4_free_complement(seed: int) -> Graph:
    """Premier tirage G(n, q) sans K4 sur les sous-flux de `seed`."""
    source = RandomSource(seed)
    gen = source.generator()
    for attempt in range(100):
        n = int(gen.integers(4, 15))
        h = sample_gnq(n, float(gen.uniform(0.1, 0.5)), source.child(attempt))
        if contains_k4(h) is None:
            return h
    raise AssertionError("aucun complémentaire sans K4")


@pytest.mark.parametrize("seed", range(40))
def test_packing_chi_matches_generic_solver(seed):
    h = _k4_free_complement(seed)
    g_dense = complement(h)
    packed = packing_chi(g_dense)
    assert packed.chi == generic_exact_chi(g_dense).chi
    assert is_proper_coloring(g_dense, packed.certificate)


def test_packing_budget_exhausted():
    # K1,3 : aucun triangle, déficit 2, la recherche doit brancher
    with pytest.raises(BudgetExceededError) as info:
        packing_chi_from_complement(star_graph(3), budget=0)
    assert info.value.solver == "packing_chi"
    assert info.value.budget == 0
    assert packing_chi_from_complement(star_graph(3)).chi == 3


def test_packing_budget_unused_when_structure_certifies():
    assert packing_chi_from_complement(bowtie(), budget=0).chi == 2


@pytest.mark.parametrize("seed", range(10))
def test_generic_solver_matches_brute_force(seed):
    g = sample_gnq(7, 0.5, RandomSource(seed))
    assert generic_exact_chi(g).chi == brute_chromatic_number(g)
