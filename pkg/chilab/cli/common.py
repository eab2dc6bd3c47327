"""
Options partagées par toutes les sous-commandes et résultat d'une campagne.
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from chilab.core.exceptions import BudgetExceededError
from chilab.core.random import RandomSource
from chilab.export.graph_io import edge_list_load
from chilab.models.graph import Graph
from chilab.schemas.config import ExperimentConfig, OutputFormat
from chilab.services.graph_core import sample_gnq


@dataclass
class CampaignResult:
    """Ce qu'une sous-commande rend à `main` : lignes CSV, résumé, drapeau partiel."""
    results: Dict[str, Any]
    rows: Optional[List[Any]] = None
    partial: bool = False
    # vérification en échec : code de sortie 1 après écriture des rapports
    failed: bool = False
    extra_files: Dict[str, str] = field(default_factory=dict)


Handler = Callable[[ExperimentConfig], CampaignResult]

# option CLI -> champ d'ExperimentConfig
_OPTIONS = [
    ("--n", dict(type=int, help="nombre de sommets")),
    ("--q", dict(type=float, help="probabilité d'arête du graphe creux")),
    ("--q-coeff", dict(type=float, help="c dans q(n) = c·n^(-a)")),
    ("--q-exp", dict(type=float, help="a dans q(n) = c·n^(-a)")),
    ("--trials", dict(type=int, help="nombre d'essais")),
    ("--seed", dict(type=int, help="graine maîtresse (64 bits)")),
    ("--threads", dict(type=int, help="processus de travail (défaut : CHILAB_THREADS)")),
    ("--delta", dict(type=float, help="δ de l'événement D(T)")),
    ("--eps", dict(type=float, dest="epsilon", help="ε des couplages et de la concentration")),
    ("--hall-c", dict(type=float, help="constante C des classes de témoins de Hall")),
    ("--retries", dict(type=int, help="tirages d'équipartition par essai")),
    ("--samples-per-size", dict(type=int, help="ensembles T tirés par taille")),
    ("--inner-samples", dict(type=int, help="complétions tirées par estimation de X_i")),
    ("--steps", dict(type=int, help="pas de la chaîne plantée")),
    ("--graph", dict(type=str, help="liste d'arêtes en entrée (au lieu d'un tirage)")),
    ("--q-table", dict(type=str, help="table 'n q' pour smooth-check")),
    ("--output", dict(type=str, help="préfixe des fichiers de sortie")),
    ("--format", dict(type=OutputFormat, choices=list(OutputFormat), help="csv ou json")),
    ("--triangle-budget", dict(type=int, help="budget de nœuds du couplage de triangles")),
    ("--packing-budget", dict(type=int, help="budget de nœuds de l'empilement")),
]
_FLAGS = [
    ("--full-chain", "chaîne plantée complète (petits n)"),
    ("--compute-chi", "calcule aussi χ exact par empilement"),
    ("--bernoulli", "équipartition par tirages de Bernoulli répétés"),
]


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="fichier clé=valeur (les options l'emportent)")
    for flag, kwargs in _OPTIONS:
        parser.add_argument(flag, default=None, **kwargs)
    for flag, help_text in _FLAGS:
        parser.add_argument(flag, action="store_const", const=True, default=None, help=help_text)
    parser.add_argument("-v", "--verbose", action="store_true", help="journalisation DEBUG")


def config_from_args(command: str, args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in {"config", "verbose", "handler", "command"}
    }
    overrides["command"] = command
    return ExperimentConfig.load(args.config, overrides)


def rng_for(config: ExperimentConfig, trial: int = 0) -> RandomSource:
    return RandomSource(config.seed, stream_id=trial)


def input_graph(config: ExperimentConfig, trial: int = 0) -> Graph:
    """Graphe lu (--graph) ou tiré dans G(n, q) sur le flux de l'essai."""
    if config.graph:
        return edge_list_load(Path(config.graph).read_text(encoding="utf-8"))
    return sample_gnq(config.n or 0, config.q_at(), rng_for(config, trial).child(0))


def budget_row(trial: int, exc: BudgetExceededError) -> Dict[str, Any]:
    """Ligne d'un essai interrompu par le budget d'un solveur."""
    return {
        "trial": trial,
        "budget_exceeded": True,
        "solver": exc.solver,
        "nodes": exc.nodes,
        "component_size": exc.component_size,
    }
