"""
Script pour lancer les campagnes d'acceptation et vérifier leurs résumés.

Usage :
    python scripts/run_acceptance.py [--out out/acceptance] [--threads 8] [--only clt,plant]
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

# Ajouter la racine du projet au path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

from chilab.core.config import settings
from chilab.core.exceptions import EXIT_OK
from chilab.export.writers import deterministic_view
from chilab.main import run


Check = Callable[[Dict[str, Any]], bool]


class Campaign(NamedTuple):
    name: str
    argv: List[str]
    checks: Dict[str, Check]
    # familles d'oracles exécutées (oracle-suite uniquement)
    suites: Optional[Sequence[str]] = None


def _s_moments(results: Dict[str, Any]) -> Dict[str, Any]:
    return results["s"]


def _no_disagreement(*names: str) -> Check:
    return lambda r: all(not r["suites"][name]["disagreements"] for name in names)


CAMPAIGNS = [
    Campaign(
        "oracles-triangles",
        ["oracle-suite", "--trials", "10000", "--seed", "1"],
        {
            "couplage de triangles = force brute (n ≤ 12)": _no_disagreement("triangles"),
            "couplage général, moments, audit = force brute": _no_disagreement("matching", "moments", "audit"),
        },
        suites=["triangles", "matching", "moments", "audit"],
    ),
    Campaign(
        "oracles-chromatic",
        ["oracle-suite", "--trials", "1000", "--seed", "1"],
        {"empilement = χ générique (n ≤ 14)": _no_disagreement("chromatic")},
        suites=["chromatic"],
    ),
    Campaign(
        "oracles-martingale",
        ["oracle-suite", "--trials", "1000", "--seed", "1"],
        {"télescopage et |X_i - X_(i-1)| ≤ 1 (n ≤ 16)": _no_disagreement("martingale")},
        suites=["martingale"],
    ),
    Campaign(
        "structure",
        ["structure", "--n", "50000", "--q", "0.00045", "--trials", "100", "--seed", "1"],
        {
            "near_perfect ≥ 90 %": lambda r: r["near_perfect"] >= 90,
            "s ≤ x ≤ s + y": lambda r: r["sandwich_holds"],
        },
    ),
    Campaign(
        "formula",
        ["structure", "--n", "5000", "--q", "0.0025", "--trials", "200", "--seed", "2", "--compute-chi"],
        {
            "χ exact = ⌈(n - s)/2⌉ dans ≥ 90 % des essais": lambda r: (r.get("chi_agree_rate") or 0) >= 0.9,
            "χ exact ≤ ⌈(n - s)/2⌉ si couplage presque parfait": lambda r: r.get("upper_bound_holds", False),
        },
    ),
    Campaign(
        "moments",
        ["clt", "--n", "2000", "--q", "0.0025", "--trials", "2000", "--seed", "3"],
        {
            "E[x] à 4 erreurs-types": lambda r: abs(r["x_mean_z"]) <= 4,
            "Var(x) à 4 erreurs-types": lambda r: abs(r["x_var_z"]) <= 4,
            "E[y] sous la borne": lambda r: r["y_mean_within_bound"],
            "s ≤ x ≤ s + y": lambda r: r["sandwich_holds"],
        },
    ),
    Campaign(
        "clt",
        ["clt", "--n", "20000", "--q", "0.0004", "--trials", "2000", "--seed", "4"],
        {
            "Var(s)/Var(x) ∈ [0.8, 1.2]": lambda r: 0.8 <= (r["var_ratio_s_x"] or 0) <= 1.2,
            "|asymétrie| ≤ 0.25": lambda r: abs(_s_moments(r)["skew"] or 0) <= 0.25,
            "KS ≤ 0.06": lambda r: (_s_moments(r)["ks"] or 1) <= 0.06,
        },
    ),
    Campaign(
        "concentration",
        ["concentration", "--n", "20000", "--q", "0.0004", "--trials", "2000", "--seed", "4"],
        {
            "hors de 3·(nq)^1.5 ≤ 5 %": lambda r: (r["outside_3scale_fraction"] or 0) <= 0.05,
            "IQR ≥ 0.2·(nq)^1.5": lambda r: (r["iqr_over_scale"] or 0) >= 0.2,
        },
    ),
    Campaign(
        "plant",
        ["coupling-plant", "--n", "300", "--q", "0.02", "--trials", "10000", "--seed", "5"],
        {
            "s(Q) ≥ s(Q - T) + 1 toujours": lambda r: r["success_frequency"] == 1.0,
            "identité de repondération à 4 erreurs-types": lambda r: r["identity_within_4se"],
        },
    ),
    Campaign(
        "sprinkle",
        [
            "coupling-sprinkle", "--n", "50000", "--q-exp", "0.75", "--q-coeff", "1.0",
            "--eps", "0.1", "--trials", "50", "--seed", "6",
        ],
        {
            "loi de l'union exacte": lambda r: r["union_identity"],
            "nouveaux triangles à 3 erreurs-types": lambda r: r["new_triangles_within_3se"],
            "s(G) - s(H) ≤ nouveaux triangles toujours": lambda r: r["s_gap_bounded_frequency"] == 1.0,
        },
    ),
]

# Même config et même graine à chaque nombre de processus
DETERMINISM_ARGV = ["clt", "--n", "3000", "--q", "0.002", "--trials", "64", "--seed", "7"]
DETERMINISM_THREADS = (1, 4, 16)


def run_campaign(campaign: Campaign, out_dir: Path, threads: int) -> bool:
    """Lance une campagne, relit son résumé JSON et évalue ses critères."""
    prefix = out_dir / campaign.name
    default_suites = settings.ORACLE_SUITES
    if campaign.suites is not None:
        settings.ORACLE_SUITES = list(campaign.suites)
    try:
        code = run([*campaign.argv, "--threads", str(threads), "--output", str(prefix)])
    finally:
        settings.ORACLE_SUITES = default_suites
    if code != EXIT_OK:
        print(f"❌ {campaign.name} : code de sortie {code}")
        return False

    results = json.loads(Path(f"{prefix}.json").read_text(encoding="utf-8"))["results"]
    passed = True
    for label, check in campaign.checks.items():
        try:
            ok = bool(check(results))
        except (KeyError, TypeError):
            ok = False
        passed &= ok
        print(f"   {'✅' if ok else '❌'} {label}")
    print(f"{'✅' if passed else '❌'} {campaign.name}")
    return passed


def run_determinism(out_dir: Path, thread_counts: Sequence[int] = DETERMINISM_THREADS) -> bool:
    """Relance la même campagne à chaque nombre de processus et compare les sorties."""
    views, tables = [], []
    for threads in thread_counts:
        prefix = out_dir / f"determinism-t{threads}"
        code = run([*DETERMINISM_ARGV, "--threads", str(threads), "--output", str(prefix)])
        if code != EXIT_OK:
            print(f"❌ determinism : code de sortie {code} à {threads} processus")
            return False
        views.append(deterministic_view(Path(f"{prefix}.json").read_text(encoding="utf-8")))
        tables.append(Path(f"{prefix}.csv").read_bytes())

    same_summary = all(view == views[0] for view in views)
    same_table = all(table == tables[0] for table in tables)
    print(f"   {'✅' if same_summary else '❌'} résumés identiques à {list(thread_counts)} processus")
    print(f"   {'✅' if same_table else '❌'} CSV identiques octet par octet")
    passed = same_summary and same_table
    print(f"{'✅' if passed else '❌'} determinism")
    return passed


def main() -> int:
    parser = argparse.ArgumentParser(description="Campagnes d'acceptation")
    parser.add_argument("--out", type=Path, default=Path("out/acceptance"))
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument(
        "--only",
        type=str,
        default=None,
        help="noms de campagnes séparés par des virgules (dont 'determinism')",
    )
    args = parser.parse_args()

    wanted = set(args.only.split(",")) if args.only else None
    selected = [c for c in CAMPAIGNS if wanted is None or c.name in wanted]

    args.out.mkdir(parents=True, exist_ok=True)
    failures = [c.name for c in selected if not run_campaign(c, args.out, args.threads)]
    if (wanted is None or "determinism" in wanted) and not run_determinism(args.out):
        failures.append("determinism")
    if failures:
        print(f"\n⚠️  Campagnes en échec : {', '.join(failures)}")
        return 1
    print("\n✅ Toutes les campagnes d'acceptation sont passées")
    return 0


if __name__ == "__main__":
    sys.exit(main())
