import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from chilab.cli import build_parser
from chilab.cli.common import CampaignResult, config_from_args
from chilab.core.config import settings
from chilab.core.exceptions import (
    EXIT_BUDGET,
    EXIT_FAILURE,
    EXIT_OK,
    BudgetExceededError,
    ConfigError,
    ParameterError,
    budget_exception_handler,
    general_exception_handler,
    parameter_exception_handler,
    validation_exception_handler,
)
from chilab.core.logging import experiment_logger, setup_logging
from chilab.export.writers import write_outputs
from chilab.schemas.config import ExperimentConfig

logger = logging.getLogger(__name__)


def _write_extra_files(config: ExperimentConfig, result: CampaignResult) -> None:
    for name, content in result.extra_files.items():
        if config.output is None:
            print(content, end="")
            continue
        path = Path(f"{config.output}.{name}")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")


def run(argv: Optional[List[str]] = None) -> int:
    """Analyse la ligne de commande, exécute la campagne et rend le code de sortie."""
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command

    # Configurer le logging
    setup_logging(environment=settings.ENVIRONMENT, log_dir=settings.LOG_DIR, verbose=args.verbose)
    logger.debug(
        f"🚀 {settings.PROJECT_NAME} v{settings.PROJECT_VERSION} - {command}",
        extra={"extra_data": {"environment": settings.ENVIRONMENT}},
    )

    try:
        config = config_from_args(command, args)
    except ConfigError as exc:
        return validation_exception_handler(command, exc)

    started = time.perf_counter()
    experiment_logger.info(
        "Campaign started",
        extra={"extra_data": {"command": command, "config": config.model_dump(mode="json")}},
    )
    try:
        result = args.handler(config)
    except ConfigError as exc:
        return validation_exception_handler(command, exc)
    except ParameterError as exc:
        return parameter_exception_handler(command, exc)
    except BudgetExceededError as exc:
        code = budget_exception_handler(command, exc)
        write_outputs(config, None, {"error": str(exc), "solver": exc.solver, "nodes": exc.nodes}, partial=True)
        return code
    except Exception as exc:
        return general_exception_handler(command, exc)

    write_outputs(config, result.rows, result.results, partial=result.partial)
    _write_extra_files(config, result)
    experiment_logger.info(
        "Campaign finished",
        extra={
            "extra_data": {
                "command": command,
                "partial": result.partial,
                "elapsed_s": round(time.perf_counter() - started, 3),
            }
        },
    )
    if result.failed:
        logger.error(f"❌ Vérification en échec - {command}")
        return EXIT_FAILURE
    if result.partial:
        logger.warning(f"⚠️ Rapport partiel - {command} : budget de solveur dépassé")
        return EXIT_BUDGET
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
