"""
Sous-commandes sur les graphes : sample, triangles, structure, chi-verify.
"""

import argparse
from typing import Any, Dict, Optional

from chilab.cli.common import CampaignResult, add_common_arguments, budget_row, input_graph, rng_for
from chilab.core.config import settings
from chilab.core.exceptions import BudgetExceededError, K4PresentError
from chilab.core.parallel import run_trials
from chilab.core.random import RandomSource
from chilab.export.graph_io import edge_list_dump, triangle_matching_dump
from chilab.schemas.config import ExperimentConfig
from chilab.services.chromatic import generic_exact_chi, packing_chi_from_complement, verify_structural_formula
from chilab.services.graph_core import complement, max_degree, sample_gnq
from chilab.services.matching import structure_check
from chilab.services.triangles import (
    contains_k4,
    count_y_in,
    enumerate_triangles,
    max_triangle_matching,
    triangle_conflict_components,
)


def _rows_partial(rows) -> bool:
    return any(row.get("budget_exceeded") for row in rows)


# --- sample ---------------------------------------------------------------

def run_sample(config: ExperimentConfig) -> CampaignResult:
    rows = []
    files = {}
    q = config.q_at()
    for trial in range(config.trials):
        g = sample_gnq(config.n or 0, q, rng_for(config, trial).child(0))
        rows.append({"trial": trial, "n": g.n, "q": q, "edges": g.edge_count, "max_degree": max_degree(g)})
        files[f"trial{trial}.edges"] = edge_list_dump(g)
    return CampaignResult(results={"graphs": len(rows)}, rows=rows, extra_files=files)


# --- triangles ------------------------------------------------------------

def _triangle_trial(trial: int, config: ExperimentConfig) -> Dict[str, Any]:
    g = input_graph(config, trial)
    triangles = enumerate_triangles(g)
    try:
        matching = max_triangle_matching(g, config.triangle_budget)
    except BudgetExceededError as exc:
        return budget_row(trial, exc)
    components = triangle_conflict_components(triangles)
    s, x, y = matching.size, len(triangles), count_y_in(triangles)
    return {
        "trial": trial,
        "n": g.n,
        "s": s,
        "x": x,
        "y": y,
        "sandwich": s <= x <= s + y,
        "components": len(components),
        "largest_component": max((len(c) for c in components), default=0),
        "matching": triangle_matching_dump(matching) if trial == 0 else None,
    }


def run_triangles(config: ExperimentConfig) -> CampaignResult:
    trials = 1 if config.graph else config.trials
    rows = run_trials(_triangle_trial, range(trials), threads=config.threads, config=config)
    files = {}
    if rows and rows[0].get("matching") is not None:
        files["triangles"] = rows[0]["matching"]
    for row in rows:
        row.pop("matching", None)
    complete = [r for r in rows if not r.get("budget_exceeded")]
    results = {
        "trials": trials,
        "sandwich_holds": all(r["sandwich"] for r in complete),
        "mean_s": sum(r["s"] for r in complete) / len(complete) if complete else None,
    }
    return CampaignResult(results=results, rows=rows, partial=_rows_partial(rows), extra_files=files)


# --- structure ------------------------------------------------------------

def _structure_trial(trial: int, config: ExperimentConfig) -> Dict[str, Any]:
    source = RandomSource(config.seed, stream_id=trial)
    q = config.q_at()
    g = sample_gnq(config.n or 0, q, source.child(0))
    try:
        report = structure_check(
            g,
            rng=source.child(1),
            q=q,
            seed=config.seed,
            trial=trial,
            retries=config.retries,
            hall_c=config.hall_c,
            bernoulli=config.bernoulli,
            budget=config.triangle_budget,
        )
    except BudgetExceededError as exc:
        return budget_row(trial, exc)

    k4_free: Optional[bool] = None
    if config.compute_chi:
        try:
            report.chi_exact = packing_chi_from_complement(g, config.packing_budget).chi
            k4_free = True
        except K4PresentError:
            k4_free = False
        except BudgetExceededError as exc:
            return budget_row(trial, exc)
    row = report.model_dump(mode="json")
    row["sandwich"] = report.s <= report.x <= report.s + report.y
    row["k4_free"] = k4_free
    return row


def run_structure(config: ExperimentConfig) -> CampaignResult:
    rows = run_trials(_structure_trial, range(config.trials), threads=config.threads, config=config)
    complete = [r for r in rows if not r.get("budget_exceeded")]
    near = sum(1 for r in complete if r["near_perfect"])
    exact = [r for r in complete if r.get("chi_exact") is not None]
    results: Dict[str, Any] = {
        "trials": config.trials,
        "completed": len(complete),
        "near_perfect": near,
        "near_perfect_rate": near / len(complete) if complete else None,
        "sandwich_holds": all(r["sandwich"] for r in complete),
        "equipartition_matched": sum(1 for r in complete if r.get("equipartition_matched")),
    }
    if exact:
        results.update(
            {
                "chi_checked": len(exact),
                "chi_agree_rate": sum(r["chi_exact"] == r["chi_structural"] for r in exact) / len(exact),
                # χ <= ⌈(n-s)/2⌉ dès qu'un couplage presque parfait existe
                "upper_bound_holds": all(r["chi_exact"] <= r["chi_structural"] for r in exact if r["near_perfect"]),
            }
        )
    return CampaignResult(results=results, rows=rows, partial=_rows_partial(rows))


# --- chi-verify -----------------------------------------------------------

def _chi_trial(trial: int, config: ExperimentConfig) -> Dict[str, Any]:
    h = input_graph(config, trial)
    witness = contains_k4(h)
    if witness is not None:
        return {"trial": trial, "n": h.n, "k4_free": False, "k4": " ".join(map(str, witness))}
    try:
        agreement = verify_structural_formula(h, config.packing_budget)
    except BudgetExceededError as exc:
        return budget_row(trial, exc)
    row = {"trial": trial, "k4_free": True, **agreement.model_dump()}
    if h.n <= settings.GENERIC_CHI_MAX_N:
        row["chi_generic"] = generic_exact_chi(complement(h)).chi
    return row


def run_chi_verify(config: ExperimentConfig) -> CampaignResult:
    trials = 1 if config.graph else config.trials
    rows = run_trials(_chi_trial, range(trials), threads=config.threads, config=config)
    checked = [r for r in rows if r.get("k4_free") and not r.get("budget_exceeded")]
    results = {
        "trials": trials,
        "k4_free": len(checked),
        "agree_rate": sum(r["agree"] for r in checked) / len(checked) if checked else None,
        "generic_agrees": all(r["chi_generic"] == r["chi_exact"] for r in checked if "chi_generic" in r),
    }
    return CampaignResult(results=results, rows=rows, partial=_rows_partial(rows))


def register(subparsers: argparse._SubParsersAction) -> None:
    for name, handler, help_text in (
        ("sample", run_sample, "tire des graphes G(n,q) et écrit leurs listes d'arêtes"),
        ("triangles", run_triangles, "couplage de triangles maximum, x(G), y(G)"),
        ("structure", run_structure, "S(G), G - S et couplage presque parfait"),
        ("chi-verify", run_chi_verify, "compare ⌈(n-s)/2⌉ au χ exact"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        add_common_arguments(parser)
        parser.set_defaults(handler=handler)
