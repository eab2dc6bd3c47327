import itertools
import math
from fractions import Fraction

import pytest

from chilab.core.exceptions import ParameterError
from chilab.core.random import RandomSource
from chilab.models.family import QFamily, TabulatedQ
from chilab.models.graph import Graph
from chilab.services.coupling import (
    alpha,
    chain_schedule,
    expected_triangles,
    new_triangle_expectation,
    plant_triangle,
    planted_density_ratio,
    power_family_is_smooth,
    run_chain_experiment,
    run_planted_chain,
    run_planted_coupling,
    run_sprinkle_coupling,
    shortest_interval,
    smoothness_score,
    smoothness_verdict,
    sprinkle_union_identity,
    sprinkle_x,
    tv_bound_planted,
)
from chilab.services.graph_core import sample_gnq
from tests.conftest import path_graph


class InverseLinear:
    """q(n) = 10/n : ε²n³q³ = 10 pour ε = 0.1, donc α constant égal à 9."""

    def q(self, n: int) -> float:
        return 10.0 / n


@pytest.mark.parametrize(
    "n, eps, q, expected",
    [(10 ** 4, 0.1, 1e-3, 9), (10 ** 6, 0.1, 1e-4, 300), (10 ** 4, 1e-3, 1e-3, 0)],
)
def test_alpha(n, eps, q, expected):
    assert alpha(n, eps, q) == expected


def test_smoothness_of_power_families():
    sizes = [10 ** k for k in range(3, 7)]
    assert smoothness_verdict(QFamily(1.0, 0.75), sizes)["smooth"]
    assert not smoothness_verdict(QFamily(1.0, 0.5), sizes)["smooth"]
    boundary = smoothness_verdict(QFamily(1.0, 2 / 3), sizes)
    assert not boundary["smooth"]
    assert boundary["scores"][-1] == pytest.approx(2 / 3, rel=1e-3)

    assert power_family_is_smooth(QFamily(1.0, 0.75))
    assert not power_family_is_smooth(QFamily(1.0, 2 / 3))


def test_smoothness_score_requires_n_at_least_two():
    with pytest.raises(ParameterError):
        smoothness_score(QFamily(0.5, 0.75), 1)


def test_tabulated_family():
    table = TabulatedQ.from_mapping({1000: 0.01, 1001: 0.01})
    assert table.sizes() == (1000, 1001)
    assert smoothness_score(table, 1000) == 0.0
    with pytest.raises(ParameterError):
        table.q(5)
    with pytest.raises(ParameterError):
        TabulatedQ.from_mapping({10: 1.5})


def test_qfamily_rejects_out_of_range_values():
    with pytest.raises(ParameterError):
        QFamily(2.0, 0.1).q(2)
    with pytest.raises(ParameterError):
        QFamily(-1.0, 0.5)


def test_plant_triangle_examples():
    planted, t = plant_triangle(Graph.empty(3), RandomSource(1))
    assert planted == Graph.complete(3)
    assert t == {0, 1, 2}

    k6 = Graph.complete(6)
    planted, t = plant_triangle(k6, RandomSource(2))
    assert planted == k6
    assert len(t) == 3

    with pytest.raises(ParameterError):
        plant_triangle(Graph.empty(2), RandomSource(1))


def test_planted_density_ratio_examples():
    assert planted_density_ratio(Graph.complete(3), 3, 0.5) == pytest.approx(8.0)
    assert planted_density_ratio(path_graph(6), 6, 0.3) == 0.0
    with pytest.raises(ParameterError):
        planted_density_ratio(Graph.complete(3), 3, 0.0)
    with pytest.raises(ParameterError):
        planted_density_ratio(Graph.complete(3), 4, 0.5)


def test_tv_bound_planted():
    # C(10,3)·q³ = 100
    q = (100 / 120) ** (1 / 3)
    assert tv_bound_planted(7, q) == pytest.approx(0.1, rel=1e-9)
    assert tv_bound_planted(0, 1.0) == 1.0
    expectation = expected_triangles(50003, 4.5e-4)
    assert tv_bound_planted(50000, 4.5e-4) == pytest.approx(float(expectation) ** -0.5, rel=1e-12)
    with pytest.raises(ParameterError):
        tv_bound_planted(5, 0.0)


def test_planted_coupling_always_gains_a_triangle():
    outcomes, summary = run_planted_coupling(12, 0.3, 30, seed=4)
    assert summary["success_frequency"] == 1.0
    assert all(o.s_large >= o.s_small + 1 for o in outcomes)
    assert [o.trial for o in outcomes] == list(range(30))
    assert summary["coupled_lower_bound"] == max(0.0, 1.0 - summary["tv_bound"])


def test_planted_coupling_complete_graph():
    outcomes, summary = run_planted_coupling(6, 1.0, 3, seed=1)
    assert all(o.s_large == 3 for o in outcomes)
    assert summary["success_frequency"] == 1.0


def test_planted_reweighting_identity():
    _, summary = run_planted_coupling(20, 0.25, 1000, seed=7)
    assert summary["identity_within_4se"]


def test_planted_chain_gains_every_step():
    result = run_planted_chain(10, 0.2, 4, RandomSource(3))
    assert len(result["s"]) == 5
    assert result["min_increment"] >= 1
    assert result["gain"] >= 4
    assert 0.0 <= result["tv_total"] <= 1.0


@pytest.mark.parametrize(
    "q_lo, q_hi, expected",
    [(0.009, 0.01, 0.001 / 0.991), (0.3, 0.3, 0.0), (0.0, 0.25, 0.25)],
)
def test_sprinkle_x(q_lo, q_hi, expected):
    assert sprinkle_x(q_lo, q_hi) == pytest.approx(expected, rel=1e-12)


def test_sprinkle_x_example_value():
    assert sprinkle_x(0.009, 0.01) == pytest.approx(1.00908e-3, rel=1e-5)
    with pytest.raises(ParameterError):
        sprinkle_x(1.0, 0.5)


def test_sprinkle_union_identity():
    assert sprinkle_union_identity(0.009, 0.01)
    assert sprinkle_union_identity(0.5, 0.5)


@pytest.mark.parametrize("seed", range(4))
def test_new_triangle_expectation_matches_enumeration(seed):
    h = sample_gnq(8, 0.3, RandomSource(seed))
    x = 0.2
    expected = Fraction(0)
    xf = Fraction(x)
    for a, b, c in itertools.combinations(range(8), 3):
        present = sum(h.has_edge(u, v) for u, v in ((a, b), (a, c), (b, c)))
        if present < 3:
            expected += xf ** (3 - present)
    assert new_triangle_expectation(h, x) == pytest.approx(float(expected), rel=1e-12)


def test_sprinkle_without_sprinkling_changes_nothing():
    outcomes, summary = run_sprinkle_coupling(40, 0.05, 0.05, 5, 0.1, seed=2)
    assert summary["x"] == 0.0
    assert all(o.s_large == o.s_small and o.new_triangles == 0 for o in outcomes)
    assert summary["triangle_frequency"] == 1.0
    assert summary["s_frequency"] == 1.0
    assert summary["new_triangles_within_3se"]


def test_sprinkle_gap_is_bounded_by_new_triangles():
    outcomes, summary = run_sprinkle_coupling(60, 0.12, 0.08, 20, 0.1, seed=3)
    assert summary["union_identity"]
    assert summary["s_gap_bounded_frequency"] == 1.0
    assert all(o.s_large >= o.s_small for o in outcomes)


def test_sprinkle_rejects_inverted_probabilities():
    with pytest.raises(ParameterError):
        run_sprinkle_coupling(40, 0.01, 0.02, 2, 0.1, seed=1)


def test_chain_schedule_with_constant_alpha():
    assert chain_schedule(100, InverseLinear(), 0.1) == list(range(100, 200, 9))


def test_chain_schedule_rejects_stalled_chain():
    with pytest.raises(ParameterError):
        chain_schedule(100, QFamily(0.01, 1.0), 0.1)


def test_shortest_interval():
    assert shortest_interval([0, 1, 2, 3, 100], 0.8) == (0.0, 3.0)
    assert shortest_interval([5.0], 0.9) == (5.0, 5.0)
    with pytest.raises(ParameterError):
        shortest_interval([], 0.5)


def test_chain_experiment_rows():
    family = QFamily(6.0, 1.0)
    result = run_chain_experiment(30, family, 0.1, 5, seed=1)
    assert result["schedule"] == chain_schedule(30, family, 0.1)
    assert len(result["rows"]) == len(result["schedule"])
    assert all(row["a"] <= row["b"] for row in result["rows"])
    assert "next_increment" in result["rows"][0]
    assert 0.0 <= result["tail_frequency"] <= 1.0
    assert math.isfinite(result["markov_ratio"])


def test_chain_tail_frequency_uses_final_step(monkeypatch):
    schedule = chain_schedule(100, InverseLinear(), 0.1)

    def fake_trials(fn, items, threads=1, size=0, **kwargs):
        trials = len(list(items))
        if size == schedule[-1]:
            return [30] + [0] * (trials - 1)
        return [100] * trials

    monkeypatch.setattr("chilab.services.coupling.run_trials", fake_trials)
    result = run_chain_experiment(100, InverseLinear(), 0.1, 4, seed=1)
    assert result["schedule"] == schedule
    assert result["tail_frequency"] == pytest.approx(0.25)
    assert result["markov_ratio"] == pytest.approx(7.5 / 25.0)
