"""
Exceptions du laboratoire et gestionnaires associés.

Les gestionnaires journalisent le contexte complet puis renvoient le code de
sortie du processus : 2 pour une configuration invalide, 3 pour un budget de
solveur dépassé, 1 pour toute autre erreur.
"""

import logging
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from chilab.core.logging import validation_logger, solver_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class LabError(Exception):
    """Racine des erreurs du laboratoire."""


class ParameterError(LabError, ValueError):
    """Pré-condition d'une opération violée (probabilité hors de [0,1], sommet hors graphe, ...)."""


class ConfigError(LabError):
    """Configuration d'expérience invalide."""

    def __init__(self, message: str, errors: Optional[Sequence[dict]] = None):
        super().__init__(message)
        self.errors = list(errors or [])

    @classmethod
    def from_validation(cls, exc: ValidationError) -> "ConfigError":
        return cls("Configuration invalide", errors=exc.errors(include_url=False))


class BudgetExceededError(LabError):
    """Le branch-and-bound a dépassé son budget de nœuds : aucune réponse non exacte n'est renvoyée."""

    def __init__(self, solver: str, nodes: int, budget: int, component_size: int):
        super().__init__(
            f"{solver}: budget de {budget} nœuds dépassé "
            f"(composante de {component_size} éléments)"
        )
        self.solver = solver
        self.nodes = nodes
        self.budget = budget
        self.component_size = component_size


class K4PresentError(LabError):
    """Le complémentaire contient un K4 : la formule par empilement n'est pas valide."""

    def __init__(self, witness: Sequence[int]):
        super().__init__(f"K4 présent dans le complémentaire : {tuple(witness)}")
        self.witness = tuple(witness)


def make_json_serializable(obj: Any) -> Any:
    """
    Convertit les objets non-sérialisables en JSON (bytes, ensembles, tuples).
    """
    if isinstance(obj, bytes):
        try:
            return obj.decode("utf-8")
        except UnicodeDecodeError:
            return str(obj)
    elif isinstance(obj, dict):
        return {k: make_json_serializable(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [make_json_serializable(item) for item in obj]
    elif isinstance(obj, (set, frozenset)):
        return sorted(make_json_serializable(item) for item in obj)
    return obj


def validation_exception_handler(command: str, exc: ConfigError) -> int:
    """
    Gère les erreurs de configuration (clés inconnues, valeurs hors domaine).
    """
    errors = make_json_serializable(exc.errors)

    error_details = []
    for error in errors:
        field = " -> ".join(str(loc) for loc in error.get("loc", []))
        error_msg = error.get("msg", "Validation error")
        error_type = error.get("type", "unknown")
        error_details.append(f"  • {field}: {error_msg} (type: {error_type})")
    error_summary = "\n".join(error_details) or f"  • {exc}"

    logger.error(
        f"❌ Configuration invalide - {command}\n"
        f"Erreurs de validation:\n{error_summary}",
        extra={
            "extra_data": {
                "command": command,
                "exit_code": EXIT_USAGE,
                "errors": errors,
            }
        },
    )
    validation_logger.error(
        f"Validation error - {command}",
        extra={
            "extra_data": {
                "command": command,
                "errors": errors,
                "error_summary": error_summary,
            }
        },
    )
    return EXIT_USAGE


def parameter_exception_handler(command: str, exc: ParameterError) -> int:
    """
    Gère les paramètres hors domaine détectés par les opérations elles-mêmes.
    """
    logger.error(
        f"❌ Paramètre invalide - {command}: {exc}",
        extra={"extra_data": {"command": command, "exit_code": EXIT_USAGE, "error": str(exc)}},
    )
    validation_logger.error(
        f"Parameter error - {command}",
        extra={"extra_data": {"command": command, "error": str(exc)}},
    )
    return EXIT_USAGE


def budget_exception_handler(command: str, exc: BudgetExceededError) -> int:
    """
    Gère le dépassement de budget d'un solveur exact : le rapport partiel est marqué.
    """
    context = {
        "command": command,
        "solver": exc.solver,
        "nodes": exc.nodes,
        "budget": exc.budget,
        "component_size": exc.component_size,
        "exit_code": EXIT_BUDGET,
    }
    logger.error(f"❌ Budget dépassé - {command}: {exc}", extra={"extra_data": context})
    solver_logger.error("Budget exceeded", extra={"extra_data": context})
    return EXIT_BUDGET


def general_exception_handler(command: str, exc: Exception) -> int:
    """
    Gère toutes les autres exceptions non prévues.
    """
    error_type = type(exc).__name__
    logger.error(
        f"❌ Exception non gérée - {command}\n"
        f"Type: {error_type}\n"
        f"Message: {exc}",
        exc_info=True,
        extra={
            "extra_data": {
                "command": command,
                "error_type": error_type,
                "error_message": str(exc),
                "exit_code": EXIT_FAILURE,
            }
        },
    )
    return EXIT_FAILURE
