import math
from fractions import Fraction

import pytest

from chilab.core.exceptions import ParameterError
from chilab.core.random import RandomSource
from chilab.models.graph import Graph
from chilab.models.martingale import ExposurePrefix
from chilab.services.graph_core import induced_remove, sample_gnq
from chilab.services.martingale import (
    classify_prefix,
    estimate_quadratic_variation,
    estimate_X,
    exact_last_step,
    exact_martingale_path,
    exact_quadratic_variation,
    exact_X,
    freedman_bound,
    graph_to_mask,
    increment_bound_check,
    martingale_path_records,
    n_star_frequency,
    s_of_masks,
    theorem_concentration_radius,
)
from chilab.services.oracles import all_graphs, brute_expected_s, brute_triangle_packing
from chilab.services.triangles import max_triangle_matching
from tests.conftest import star_graph


def test_prefix_rejects_oversized_graph():
    with pytest.raises(ParameterError):
        ExposurePrefix(Graph.empty(5), 4)


def test_classify_prefix_examples():
    single = classify_prefix(ExposurePrefix(Graph.empty(1), 10), 0.1)
    assert (single.in_N, single.in_N_star) == (True, False)

    triangle = classify_prefix(ExposurePrefix(Graph.complete(3), 10), 0.1)
    assert (triangle.in_N, triangle.in_N_star) == (True, True)
    assert triangle.label == "N*"

    # le dernier sommet exposé a 4 voisins antérieurs > 3qn = 1.5
    hub = Graph.from_edges(5, [(v, 4) for v in range(4)])
    assert classify_prefix(ExposurePrefix(hub, 10), 0.05).label == "out"


def test_s_of_masks_matches_brute_force():
    graphs = list(all_graphs(5))
    masks = [graph_to_mask(g) for g in graphs]
    assert s_of_masks(5, masks).tolist() == [brute_triangle_packing(g) for g in graphs]


def test_exact_x_examples():
    assert exact_X(ExposurePrefix(Graph.empty(0), 3), 3, 0.5) == pytest.approx(0.125)
    edge = Graph.from_edges(2, [(0, 1)])
    assert exact_X(ExposurePrefix(edge, 3), 3, 0.5) == pytest.approx(0.25)
    assert exact_X(ExposurePrefix(Graph.complete(3), 3), 3, 0.5) == 1.0


def test_exact_x_respects_cap():
    with pytest.raises(ParameterError):
        exact_X(ExposurePrefix(Graph.empty(0), 8), 8, 0.5, cap=10)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("n", [4, 5])
def test_exact_path_telescopes(seed, n):
    q = 0.4
    g = sample_gnq(n, q, RandomSource(seed))
    path = exact_martingale_path(g, q)
    assert len(path) == n + 1
    assert path[0] == pytest.approx(float(brute_expected_s(n, Fraction(q))), rel=1e-12)
    assert path[-1] == brute_triangle_packing(g)
    assert all(abs(b - a) <= 1 + 1e-12 for a, b in zip(path, path[1:]))


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("q", [0.3, 0.5])
def test_exact_quadratic_variation_equals_variance(n, q):
    qv = exact_quadratic_variation(n, q)
    assert qv.expected_vn == pytest.approx(qv.var_s, rel=1e-9, abs=1e-12)
    assert len(qv.step_variances) == n
    assert qv.mean_s == pytest.approx(float(brute_expected_s(n, Fraction(q))), rel=1e-12)


def test_exact_quadratic_variation_examples():
    assert exact_quadratic_variation(3, 0.5).var_s == pytest.approx(0.125 * 0.875)
    assert exact_quadratic_variation(4, 0.0).expected_vn == 0.0
    assert exact_quadratic_variation(4, 1.0).expected_vn == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_last_step_matches_exhaustive_x(seed):
    n, q = 6, 0.35
    g = sample_gnq(n, q, RandomSource(seed))
    prev, _ = induced_remove(g, [n - 1])
    step = exact_last_step(prev, q)
    assert step.x_prev == pytest.approx(exact_X(ExposurePrefix(prev, n), n, q), rel=1e-12)
    assert step.max_abs_increment <= 1.0
    assert sum(p for _, p in step.increments) == pytest.approx(1.0)


def test_estimate_x_deterministic_cases():
    g = Graph.complete(6)
    full = estimate_X(ExposurePrefix(g, 6), 6, 0.3, 10, RandomSource(1))
    assert (full.value, full.std_error) == (2.0, 0.0)

    prefix = Graph.complete(3)
    frozen = estimate_X(ExposurePrefix(prefix, 7), 7, 0.0, 10, RandomSource(1))
    assert (frozen.value, frozen.std_error) == (1.0, 0.0)


def test_estimate_x_agrees_with_exact_value():
    estimate = estimate_X(ExposurePrefix(Graph.empty(0), 3), 3, 0.5, 20_000, RandomSource(2))
    assert abs(estimate.value - 0.125) <= 4 * estimate.std_error


def test_estimated_quadratic_variation_degenerate_q():
    assert estimate_quadratic_variation(5, 0.0, 3, 5, RandomSource(1)) == 0.0
    assert estimate_quadratic_variation(5, 1.0, 3, 5, RandomSource(1)) == 0.0


def test_estimated_quadratic_variation_converges_to_exact_value():
    expected = exact_quadratic_variation(3, 0.5).expected_vn
    estimate = estimate_quadratic_variation(3, 0.5, 800, 16, RandomSource(11))
    assert expected == pytest.approx(0.125 * 0.875)
    assert estimate == pytest.approx(expected, abs=0.035)


@pytest.mark.parametrize("n", [3, 4])
def test_exact_paths_have_bounded_increments(n):
    for g in all_graphs(n):
        path = exact_martingale_path(g, 0.35)
        assert max(abs(b - a) for a, b in zip(path, path[1:])) <= 1.0 + 1e-12


@pytest.mark.parametrize("n", [7, 10, 14])
def test_last_step_up_rule_matches_solver(n):
    source = RandomSource(n)
    g = sample_gnq(n, 0.4, source.child(0))
    prev, _ = induced_remove(g, [n - 1])
    step = exact_last_step(prev, 0.4)
    assert step.max_abs_increment <= 1.0
    prev_edges = prev.edge_tuples()
    for mask in source.generator().integers(0, 1 << (n - 1), size=12).tolist():
        joined = [(v, n - 1) for v in range(n - 1) if mask >> v & 1]
        actual = max_triangle_matching(Graph.from_edges(n, prev_edges + joined)).size
        assert actual == step.s_after(mask)


def test_path_records_carry_classes():
    records = martingale_path_records(6, 0.3, 5, RandomSource(3))
    assert [r.i for r in records] == list(range(1, 7))
    assert {r.prefix_class for r in records} <= {"N", "N*", "out"}


def test_n_star_frequency_shape():
    result = n_star_frequency(8, 0.2, 5, RandomSource(4))
    assert result["checked"] == 40
    assert 0.0 <= result["frequency"] <= 1.0
    assert result["bound"] == pytest.approx(3 * 64 * 0.008)


def test_increment_bound_check_on_small_graphs():
    result = increment_bound_check(9, 0.3, 20, RandomSource(5))
    assert result["trials"] == 20
    assert result["max_abs_increment"] <= 1.0


def test_freedman_bound():
    assert freedman_bound(2, 1, 1) == pytest.approx(math.exp(-1), rel=1e-12)
    assert freedman_bound(2, 1, 1) == pytest.approx(0.36788, abs=1e-5)
    assert freedman_bound(1e-9, 1, 1) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        freedman_bound(1, 0, 1)


def test_concentration_radius():
    assert theorem_concentration_radius(100, 0.1, math.exp(-1)) == pytest.approx(3 * 10 ** 1.5)
    with pytest.raises(ParameterError):
        theorem_concentration_radius(100, 0.1, 1.0)


def test_star_prefix_is_not_triangle_class():
    assert not classify_prefix(ExposurePrefix(star_graph(3), 10), 0.5).in_N_star
