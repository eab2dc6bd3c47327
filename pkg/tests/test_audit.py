import itertools
import math

import pytest

from chilab.core.exceptions import ParameterError
from chilab.core.random import RandomSource
from chilab.models.graph import Graph
from chilab.schemas.report import SamplingPlan
from chilab.services.audit import (
    audit_D,
    audit_large_sets,
    audit_R,
    choose_omega0,
    count_lambda1,
    count_lambda2,
    count_Z,
    d_event,
    default_plan,
    deletion_bound,
    deletion_parameters,
    kimvu_bound,
    size_grid,
    z_expectation_bound,
)
from chilab.services.graph_core import neighborhood, sample_gnq
from chilab.services.oracles import brute_lambda1, brute_lambda2, brute_Z
from chilab.services.triangles import max_triangle_matching
from tests.conftest import bowtie, disjoint_triangles, path_graph, star_graph


def test_choose_omega0_inside_window():
    choice = choose_omega0(50000, 4.5e-4)
    assert choice.value == pytest.approx(1.277, abs=1e-3)
    assert not choice.regime_warning


def test_choose_omega0_regime_warning():
    choice = choose_omega0(8, 0.25)
    assert choice.regime_warning
    assert choice.value == max(1.0, (8 * 0.25 / math.log(8)) ** (1 / 3))


def test_choose_omega0_floor():
    # nq = ln n : premier terme égal à 1
    n = 1000
    assert choose_omega0(n, math.log(n) / n).value == pytest.approx(1.0)


def test_deletion_bound():
    assert deletion_bound(8, 4, 3, 1) == pytest.approx(math.exp(-32 / 18), rel=1e-12)
    assert deletion_bound(8, 4, 3, 1) == pytest.approx(0.16901, abs=1e-5)
    assert deletion_bound(1, 1e-12, 3, 1) == pytest.approx(1.0)
    # rt = k(2ex + t)
    assert deletion_bound(6, 2, 3, 1) == pytest.approx(math.exp(-1), rel=1e-12)
    with pytest.raises(ParameterError):
        deletion_bound(0, 1, 1, 1)


def test_kimvu_bound():
    assert kimvu_bound(100, 0.1, 0.5, 0.01) == pytest.approx(0.36787944117144, rel=1e-12)
    assert kimvu_bound(100, 0.0, 0.5, 0.01) == 1.0
    with pytest.raises(ParameterError):
        kimvu_bound(100, 0.1, 0.5, -1)


def test_lambda_sets_examples():
    assert count_lambda1(bowtie(), {1}) == {0, 2}
    assert count_lambda1(path_graph(4), {1}) == frozenset()
    assert count_lambda1(Graph.complete(3), {0}) == {1, 2}

    assert count_lambda2(bowtie(), {1}) == {0}
    assert count_lambda2(Graph.complete(3), {0}) == frozenset()
    assert count_lambda2(disjoint_triangles(2), {0, 1, 2}) == frozenset()


def test_count_z_examples():
    assert count_Z(bowtie(), {1}, {0}) == 1
    assert count_Z(path_graph(5), {0}, {2, 3}) == 0
    assert count_Z(Graph.complete(3), set(), {0}) == 1
    with pytest.raises(ParameterError):
        count_Z(bowtie(), {0}, {0, 1})


@pytest.mark.parametrize("seed", range(8))
def test_counters_match_brute_force(seed):
    g = sample_gnq(9, 0.45, RandomSource(seed))
    gen = RandomSource(seed, stream_id=1).generator()
    vertices = gen.permutation(9).tolist()
    t, a = vertices[:2], vertices[2:5]
    assert count_lambda1(g, t) == brute_lambda1(g, t)
    assert count_lambda2(g, t) == brute_lambda2(g, t)
    assert count_Z(g, t, a) == brute_Z(g, t, a)


def test_size_grid():
    assert size_grid(4, 40) == [4, 8, 16, 32, 40]
    assert size_grid(4, 32) == [4, 8, 16, 32]
    assert size_grid(5, 4) == []


def test_audit_r_prop_i():
    triangle_free = audit_R(path_graph(6), 0.2, 1.0, RandomSource(1), 5)
    assert triangle_free.x3 == 0
    assert triangle_free.prop_i

    k4 = audit_R(Graph.complete(4), 0.2, 1.0, RandomSource(1), 5)
    assert k4.x3 == 4
    assert not k4.prop_i


def test_audit_r_star_degrees():
    report = audit_R(star_graph(10), 0.9, 1.0, RandomSource(1), 5)
    singles = report.prop_iii[0]
    # centre : 4.95 <= 10 <= 14.85 ; feuilles de degré 1 hors bornes
    assert (singles.size, singles.checked, singles.violations) == (1, 11, 10)
    assert singles.exhaustive


@pytest.mark.parametrize("seed", range(5))
def test_audit_r_pairs_match_brute_force(seed):
    n, q = 30, 0.15
    g = sample_gnq(n, q, RandomSource(seed))
    report = audit_R(g, q, 1.5, RandomSource(seed), 3)
    pairs = report.prop_iii[1]
    expected = sum(
        1 for t in itertools.combinations(range(n), 2)
        if not n * q <= len(neighborhood(g, t)) <= 3 * n * q
    )
    assert (pairs.size, pairs.checked, pairs.violations) == (2, n * (n - 1) // 2, expected)
    max_codeg = max(len(g.adjacency[x] & g.adjacency[y]) for x, y in itertools.combinations(range(n), 2))
    assert report.max_codegree == max_codeg


def test_audit_d_empty_s_has_no_event():
    g = sample_gnq(20, 0.3, RandomSource(2))
    report = audit_D(g, set(), 0.1, RandomSource(2), default_plan(20, 0.3, 10))
    assert all(bucket.violations == 0 for bucket in report.buckets)


def test_audit_d_triangle_with_pendant():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3)])
    assert d_event(1, 1, 0.1)
    report = audit_D(g, {0, 1, 2}, 0.1, RandomSource(0), SamplingPlan(samples_per_size=1))
    assert report.buckets[0].violations == 4


def test_audit_d_never_holds_for_delta_one():
    g = sample_gnq(15, 0.4, RandomSource(4))
    s = max_triangle_matching(g).covered
    report = audit_D(g, s, 1.0, RandomSource(4), default_plan(15, 0.2, 5))
    assert all(bucket.violations == 0 for bucket in report.buckets)


@pytest.mark.parametrize("seed", range(5))
def test_audit_d_pairs_match_brute_force(seed):
    n, delta = 25, 0.25
    g = sample_gnq(n, 0.2, RandomSource(seed))
    s = max_triangle_matching(g).covered
    report = audit_D(g, s, delta, RandomSource(seed), SamplingPlan(samples_per_size=1))
    expected = 0
    for t in itertools.combinations(range(n), 2):
        nt = neighborhood(g, t)
        expected += d_event(len(nt & s), len(nt), delta)
    assert report.buckets[1].violations == expected


def test_audit_large_sets_carries_bound():
    g = sample_gnq(40, 0.2, RandomSource(7))
    s = max_triangle_matching(g).covered
    report = audit_large_sets(g, s, 0.1, 0.2, RandomSource(7), 4)
    assert report.s_bound >= len(s)
    assert [b.size for b in report.buckets] == size_grid(6, 20)


def test_deletion_parameters_and_z_mean_bound():
    params = deletion_parameters(n=1000, q=0.01, omega0=2.0, eps=0.1, t_size=8)
    assert params["k"] == 3
    assert params["t"] == pytest.approx(0.1 * 1000 * 0.01 * 8 / 4)
    assert params["r"] == pytest.approx(64 * math.log(1000))
    assert z_expectation_bound(100, 0.1, 5) == pytest.approx(50.0)
