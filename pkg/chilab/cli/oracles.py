"""
Sous-commande oracle-suite : validations croisées par force brute.
"""

import argparse

from chilab.cli.common import CampaignResult, add_common_arguments
from chilab.schemas.config import ExperimentConfig
from chilab.services.oracles import oracle_suite_passed, run_oracle_suite


def run_oracle_suite_command(config: ExperimentConfig) -> CampaignResult:
    report = run_oracle_suite(config.trials, config.seed)
    rows = [
        {"suite": name, "rounds": part["rounds"], "disagreements": len(part["disagreements"])}
        for name, part in report.items()
    ]
    passed = oracle_suite_passed(report)
    return CampaignResult(results={"passed": passed, "suites": report}, rows=rows, failed=not passed)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("oracle-suite", help="confronte les solveurs exacts à la force brute")
    add_common_arguments(parser)
    parser.set_defaults(handler=run_oracle_suite_command)
