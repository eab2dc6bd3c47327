"""
Sous-commandes de couplage : coupling-plant, coupling-sprinkle, smooth-check, chain.
"""

import argparse
from pathlib import Path
from typing import Any, Dict

from chilab.cli.common import CampaignResult, add_common_arguments, rng_for
from chilab.core.exceptions import ParameterError
from chilab.models.family import QFamily, TabulatedQ
from chilab.schemas.config import ExperimentConfig
from chilab.services.coupling import (
    alpha,
    power_family_is_smooth,
    run_chain_experiment,
    run_planted_chain,
    run_planted_coupling,
    run_sprinkle_coupling,
    smoothness_verdict,
)


def _family(config: ExperimentConfig) -> QFamily:
    if config.q_exp is None:
        raise ParameterError("cette sous-commande exige une famille q(n) = c·n^(-a) (--q-exp, --q-coeff)")
    return QFamily(config.q_coeff, config.q_exp)


def _rows(outcomes):
    return [o.model_dump() for o in outcomes]


def run_coupling_plant(config: ExperimentConfig) -> CampaignResult:
    n, q = config.n or 0, config.q_at()
    outcomes, summary = run_planted_coupling(
        n, q, config.trials, config.seed, threads=config.threads, budget=config.triangle_budget
    )
    results: Dict[str, Any] = {"planted": summary}
    if config.full_chain:
        steps = config.steps if config.steps is not None else alpha(n, config.epsilon, q) // 3
        results["chain"] = run_planted_chain(n, q, steps, rng_for(config).child(9), budget=config.triangle_budget)
    return CampaignResult(results=results, rows=_rows(outcomes))


def run_coupling_sprinkle(config: ExperimentConfig) -> CampaignResult:
    family = _family(config)
    n = config.n or 0
    q_n = family.q(n)
    n_prime = n + alpha(n, config.epsilon, q_n)
    q_nprime = family.q(n_prime)
    outcomes, summary = run_sprinkle_coupling(
        n_prime,
        q_n,
        q_nprime,
        config.trials,
        config.epsilon,
        config.seed,
        n=n,
        threads=config.threads,
        budget=config.triangle_budget,
    )
    # les graphes sont tirés sur n' sommets, n fixe les seuils
    rows = [{"n": n, "n_prime": n_prime, **row} for row in _rows(outcomes)]
    return CampaignResult(results={"sprinkle": summary}, rows=rows)


def load_q_table(path: str) -> TabulatedQ:
    table = {}
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ParameterError(f"{path}:{number} : 'n q' attendu")
        table[int(parts[0])] = float(parts[1])
    return TabulatedQ.from_mapping(table)


def run_smooth_check(config: ExperimentConfig) -> CampaignResult:
    results: Dict[str, Any] = {}
    if config.q_table:
        family = load_q_table(config.q_table)
        available = set(family.sizes())
        sizes = [n for n in family.sizes() if n >= 2 and n + 1 in available]
    else:
        family = _family(config)
        start = config.n or 1000
        sizes = [start * 10 ** k for k in range(4)]
        results["power_law_smooth"] = power_family_is_smooth(family)
    verdict = smoothness_verdict(family, sizes)
    results.update({"slope": verdict["slope"], "smooth": verdict["smooth"]})
    rows = [{"n": n, "r": r} for n, r in zip(verdict["sizes"], verdict["scores"])]
    return CampaignResult(results=results, rows=rows)


def run_chain(config: ExperimentConfig) -> CampaignResult:
    family = _family(config)
    summary = run_chain_experiment(
        config.n or 0,
        family,
        config.epsilon,
        config.trials,
        config.seed,
        threads=config.threads,
        budget=config.triangle_budget,
    )
    rows = summary.pop("rows")
    return CampaignResult(results=summary, rows=rows)


def register(subparsers: argparse._SubParsersAction) -> None:
    for name, handler, help_text in (
        ("coupling-plant", run_coupling_plant, "couplage par triangle planté G(n,q) / G(n+3,q)"),
        ("coupling-sprinkle", run_coupling_sprinkle, "couplage par saupoudrage G(n',q(n)) / G(n',q(n'))"),
        ("smooth-check", run_smooth_check, "régularité d'une famille q(n)"),
        ("chain", run_chain, "chaîne n_0 < n_1 < ... <= 2n_0"),
    ):
        parser = subparsers.add_parser(name, help=help_text)
        add_common_arguments(parser)
        parser.set_defaults(handler=handler)
