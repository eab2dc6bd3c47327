"""
Sous-commande props : audit de l'événement R et des événements D(T).
"""

import argparse

from chilab.cli.common import CampaignResult, add_common_arguments, input_graph, rng_for
from chilab.core.exceptions import BudgetExceededError
from chilab.schemas.config import ExperimentConfig
from chilab.services.audit import audit_D, audit_large_sets, audit_R, choose_omega0, default_plan
from chilab.services.triangles import max_triangle_matching


def run_props(config: ExperimentConfig) -> CampaignResult:
    g = input_graph(config)
    q = config.q_at(g.n)
    source = rng_for(config).child(1)
    omega = choose_omega0(g.n, q)
    r_report = audit_R(g, q, omega.value, source.child(0), config.samples_per_size)

    results = {"omega0": omega.model_dump(), "R": r_report.model_dump(mode="json")}
    try:
        covered = max_triangle_matching(g, config.triangle_budget).covered
    except BudgetExceededError:
        # R reste valide, D(T) exige S(G)
        return CampaignResult(results=results, partial=True)

    plan = default_plan(g.n, q, config.samples_per_size)
    d_report = audit_D(g, covered, config.delta, source.child(1), plan)
    results["D"] = d_report.model_dump(mode="json")
    if q > 0 and int(1 / q) + 1 <= g.n // 2:
        results["D_large"] = audit_large_sets(
            g, covered, config.delta, q, source.child(2), config.samples_per_size
        ).model_dump(mode="json")

    rows = [
        {"event": name, **bucket.model_dump()}
        for name, buckets in (("iii", r_report.prop_iii), ("iv", r_report.prop_iv), ("D", d_report.buckets))
        for bucket in buckets
    ]
    return CampaignResult(results=results, rows=rows)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("props", help="audit des propriétés pseudo-aléatoires (R, D)")
    add_common_arguments(parser)
    parser.set_defaults(handler=run_props)
