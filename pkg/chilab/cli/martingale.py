"""
Sous-commandes statistiques : martingale, clt, concentration.
"""

import argparse
import math
from typing import Any, Dict, List

from chilab.cli.common import CampaignResult, add_common_arguments, budget_row, rng_for
from chilab.core.config import settings
from chilab.core.exceptions import BudgetExceededError
from chilab.core.parallel import run_trials
from chilab.core.random import RandomSource
from chilab.models.graph import Graph
from chilab.models.martingale import ExposurePrefix
from chilab.schemas.config import ExperimentConfig, OutputFormat
from chilab.schemas.report import MartingaleRecord
from chilab.services.graph_core import induced_remove, sample_gnq
from chilab.services.martingale import (
    classify_prefix,
    estimate_quadratic_variation,
    exact_martingale_path,
    exact_quadratic_variation,
    freedman_bound,
    increment_bound_check,
    martingale_path_records,
    n_star_frequency,
    theorem_concentration_radius,
)
from chilab.services.stats import SampleStats, exact_triangle_moments, standard_error, y_moment_bounds
from chilab.services.triangles import count_y_in, enumerate_triangles, solve_triangle_packing

# n au-delà duquel le dernier pas exact (2^{n-1} voisinages) n'est plus tenté
_LAST_STEP_MAX_N = 16


def _freedman(n: int, q: float, eps: float) -> Dict[str, float]:
    """Freedman avec r = 1, σ² = 4n³q³ et t = 3(n³q³ ln(1/ε))^{1/2}."""
    sigma2 = 4.0 * n ** 3 * q ** 3
    radius = theorem_concentration_radius(n, q, eps)
    bound = freedman_bound(radius, sigma2, 1.0) if radius > 0 and sigma2 > 0 else 1.0
    return {"t": radius, "sigma2": sigma2, "r": 1.0, "bound": bound}


# --- martingale -----------------------------------------------------------

def _exact_records(g: Graph, q: float) -> List[MartingaleRecord]:
    path = exact_martingale_path(g, q)
    records = []
    for i in range(1, g.n + 1):
        prefix, _ = induced_remove(g, range(i, g.n))
        records.append(
            MartingaleRecord(
                i=i,
                increment_estimate=path[i] - path[i - 1],
                std_error=0.0,
                prefix_class=classify_prefix(ExposurePrefix(prefix, g.n), q).label,
            )
        )
    return records


def run_martingale(config: ExperimentConfig) -> CampaignResult:
    n, q = config.n or 0, config.q_at()
    source = rng_for(config)
    results: Dict[str, Any] = {"n": n, "q": q}

    exhaustive = n * (n - 1) // 2 <= settings.EXHAUSTIVE_SLOT_CAP
    if exhaustive:
        g = sample_gnq(n, q, source.child(0))
        records = _exact_records(g, q)
        qv = exact_quadratic_variation(n, q)
        results.update({"mode": "exact", "expected_vn": qv.expected_vn, "var_s": qv.var_s, "mean_s": qv.mean_s})
    else:
        records = martingale_path_records(n, q, config.inner_samples, source.child(0))
        results.update(
            {
                "mode": "monte_carlo",
                "expected_vn": estimate_quadratic_variation(n, q, config.trials, config.inner_samples, source.child(1)),
            }
        )
    results["vn_threshold"] = 4.0 * n ** 3 * q ** 3
    results["n_star"] = n_star_frequency(n, q, config.trials, source.child(2))
    if 2 <= n <= _LAST_STEP_MAX_N:
        check = increment_bound_check(n, q, config.trials, source.child(3))
        results["last_step"] = {k: v for k, v in check.items() if k != "violations"}
        results["last_step"]["violations"] = len(check["violations"])
    if 0.0 < config.epsilon < 1.0:
        results["freedman"] = _freedman(n, q, config.epsilon)

    rows = [r.model_dump(by_alias=True) for r in records]
    return CampaignResult(results=results, rows=rows)


# --- clt / concentration --------------------------------------------------

def _s_trial(trial: int, n: int, q: float, seed: int, budget: int) -> Dict[str, Any]:
    g = sample_gnq(n, q, RandomSource(seed, stream_id=trial).child(0))
    triangles = enumerate_triangles(g)
    try:
        chosen, _ = solve_triangle_packing(triangles, budget)
    except BudgetExceededError as exc:
        return budget_row(trial, exc)
    s, x, y = len(chosen), len(triangles), count_y_in(triangles)
    return {"trial": trial, "s": s, "x": x, "y": y, "sandwich": s <= x <= s + y}


def _sample_s(config: ExperimentConfig) -> List[Dict[str, Any]]:
    return run_trials(
        _s_trial,
        range(config.trials),
        threads=config.threads,
        n=config.n or 0,
        q=config.q_at(),
        seed=config.seed,
        budget=config.triangle_budget,
    )


def _complete(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return [r for r in rows if not r.get("budget_exceeded")]


def run_clt(config: ExperimentConfig) -> CampaignResult:
    n, q = config.n or 0, config.q_at()
    rows = _sample_s(config)
    done = _complete(rows)
    s_stats = SampleStats.of(r["s"] for r in done)
    x_stats = SampleStats.of(r["x"] for r in done)
    y_stats = SampleStats.of(r["y"] for r in done)

    mean_x, var_x = exact_triangle_moments(n, q)
    y_bound, y_second = y_moment_bounds(n, q)
    x_se = standard_error(x_stats)
    # erreur type de la variance empirique sous hypothèse quasi gaussienne
    var_se = x_stats.variance * math.sqrt(2.0 / (x_stats.count - 1)) if x_stats.count > 1 else 0.0
    results = {
        "n": n,
        "q": q,
        "s": s_stats.summary().model_dump(),
        "x": x_stats.summary().model_dump(),
        "y": y_stats.summary().model_dump(),
        "sandwich_holds": all(r["sandwich"] for r in done),
        "x_exact_mean": mean_x,
        "x_exact_var": var_x,
        "x_mean_z": (x_stats.mean - mean_x) / x_se if x_se > 0 else 0.0,
        "x_var_z": (x_stats.variance - var_x) / var_se if var_se > 0 else 0.0,
        "y_mean_bound": y_bound,
        "y_second_moment_bound": y_second,
        "y_mean_within_bound": y_stats.mean <= y_bound + 3 * standard_error(y_stats),
        "var_ratio_s_x": s_stats.variance / var_x if var_x > 0 else None,
    }
    partial = len(done) < len(rows)
    # en JSON, le résumé seul : les échantillons bruts restent en CSV
    return CampaignResult(results=results, rows=None if config.format is OutputFormat.JSON else rows, partial=partial)


def run_concentration(config: ExperimentConfig) -> CampaignResult:
    n, q = config.n or 0, config.q_at()
    rows = _sample_s(config)
    done = _complete(rows)
    s_stats = SampleStats.of(r["s"] for r in done)
    scale = (n * q) ** 1.5
    outside = sum(1 for r in done if abs(r["s"] - s_stats.mean) >= 3.0 * scale)
    radius = theorem_concentration_radius(n, q, config.epsilon) if 0 < config.epsilon < 1 else None
    results = {
        "n": n,
        "q": q,
        "scale": scale,
        "s": s_stats.summary().model_dump(),
        "outside_3scale_fraction": outside / len(done) if done else None,
        "iqr": s_stats.interquartile_range() if done else None,
        "iqr_over_scale": s_stats.interquartile_range() / scale if done and scale > 0 else None,
        "theorem_radius": radius,
        "outside_radius_fraction": (
            sum(1 for r in done if abs(r["s"] - s_stats.mean) >= radius) / len(done) if done and radius else None
        ),
    }
    if radius is not None:
        results["freedman"] = _freedman(n, q, config.epsilon)
    return CampaignResult(results=results, rows=rows, partial=len(done) < len(rows))


def register(subparsers: argparse._SubParsersAction) -> None:
    for name, handler, help_text in (
        ("martingale", run_martingale, "martingale d'exposition des sommets de s(G)"),
        ("clt", run_clt, "moments et normalité de s(G) et x(G)"),
        ("concentration", run_concentration, "échelle de concentration de s(G)"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        add_common_arguments(parser)
        parser.set_defaults(handler=handler)
