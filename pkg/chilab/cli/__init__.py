import argparse

from chilab.cli import audit, coupling, graphs, martingale, oracles
from chilab.core.config import settings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.PROJECT_NAME,
        description="Laboratoire du nombre chromatique des graphes aléatoires très denses",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.PROJECT_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="<sous-commande>")

    graphs.register(subparsers)
    audit.register(subparsers)
    martingale.register(subparsers)
    coupling.register(subparsers)
    oracles.register(subparsers)
    return parser
