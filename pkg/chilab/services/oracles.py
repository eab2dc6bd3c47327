"""
Oracles par force brute pour les petits graphes.

Aucune astuce : énumération directe des définitions. Utilisés par les tests
et par la sous-commande `oracle-suite`.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from chilab.core.config import settings
from chilab.core.exceptions import ParameterError
from chilab.core.logging import experiment_logger
from chilab.core.random import RandomSource
from chilab.models.graph import Graph
from chilab.models.martingale import ExposurePrefix
from chilab.services.audit import count_lambda1, count_lambda2, count_Z
from chilab.services.chromatic import generic_exact_chi, packing_chi_from_complement
from chilab.services.graph_core import complement, induced_remove, sample_gnq
from chilab.services.martingale import exact_last_step, exact_martingale_path, exact_X
from chilab.services.matching import general_max_matching
from chilab.services.stats import exact_triangle_moments_fraction
from chilab.services.triangles import contains_k4, greedy_triangle_matching, max_triangle_matching

logger = logging.getLogger(__name__)

# largeur maximale d'un masque d'arêtes (int64 signé)
_MASK_SLOTS = 62


def _triangles(g: Graph) -> List[Tuple[int, int, int]]:
    return [
        (a, b, c)
        for a, b, c in itertools.combinations(range(g.n), 3)
        if g.has_edge(a, b) and g.has_edge(a, c) and g.has_edge(b, c)
    ]


def brute_triangle_packing(g: Graph) -> int:
    """Plus grande famille de triangles deux à deux disjoints."""
    triangles = _triangles(g)

    def best(start: int, used: frozenset) -> int:
        top = 0
        for k in range(start, len(triangles)):
            t = triangles[k]
            if used.isdisjoint(t):
                top = max(top, 1 + best(k + 1, used | set(t)))
        return top

    return best(0, frozenset())


def brute_lexmin_triangle_packing(g: Graph) -> Tuple[Tuple[int, int, int], ...]:
    """Plus petit, dans l'ordre lexicographique, des empilements de taille maximale."""
    triangles = _triangles(g)
    best: Tuple[Tuple[int, int, int], ...] = ()

    def walk(start: int, used: frozenset, chosen: List[Tuple[int, int, int]]) -> None:
        nonlocal best
        # `chosen` reste trié : les triangles sont parcourus dans l'ordre canonique
        if len(chosen) > len(best) or (len(chosen) == len(best) and tuple(chosen) < best):
            best = tuple(chosen)
        for k in range(start, len(triangles)):
            t = triangles[k]
            if used.isdisjoint(t):
                chosen.append(t)
                walk(k + 1, used | set(t), chosen)
                chosen.pop()

    walk(0, frozenset(), [])
    return best


def brute_matching(g: Graph) -> int:
    edges = g.edge_tuples()

    def best(start: int, used: frozenset) -> int:
        top = 0
        for k in range(start, len(edges)):
            u, v = edges[k]
            if u not in used and v not in used:
                top = max(top, 1 + best(k + 1, used | {u, v}))
        return top

    return best(0, frozenset())


def brute_chromatic_number(g: Graph) -> int:
    """Plus petit k admettant une coloration propre, par essai de toutes les k-colorations."""
    if g.n == 0:
        return 0
    edges = g.edge_tuples()
    for k in range(1, g.n + 1):
        # le sommet 0 reçoit la couleur 0 sans perte de généralité
        for rest in itertools.product(range(k), repeat=g.n - 1):
            coloring = (0,) + rest
            if all(coloring[u] != coloring[v] for u, v in edges):
                return k
    return g.n


def brute_lambda1(g: Graph, t: Sequence[int]) -> frozenset:
    members = set(t)
    out = set()
    for a, b, c in _triangles(g):
        tri = {a, b, c}
        if tri & members:
            for y in tri - members:
                if any(g.has_edge(x, y) for x in members):
                    out.add(y)
    return frozenset(out)


def brute_lambda2(g: Graph, t: Sequence[int]) -> frozenset:
    members = set(t)
    out = set()
    for a, b, c in _triangles(g):
        tri = {a, b, c}
        if not tri & members:
            for y in tri:
                if any(g.has_edge(x, y) for x in members):
                    out.add(y)
    return frozenset(out)


def brute_Z(g: Graph, t: Sequence[int], a: Sequence[int]) -> int:
    t_set, a_set = set(t), set(a)
    return sum(1 for tri in _triangles(g) if set(tri) & a_set and not set(tri) & t_set)


def all_graphs(n: int) -> Iterator[Graph]:
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [p for k, p in enumerate(pairs) if mask >> k & 1])


def brute_triangle_moments(n: int, q: Fraction) -> Tuple[Fraction, Fraction]:
    """Moyenne et variance de K3 par sommation sur les 2^C(n,2) graphes."""
    if n * (n - 1) // 2 > 15:
        raise ParameterError(f"n={n} trop grand pour l'énumération")
    slots = n * (n - 1) // 2
    first = second = Fraction(0)
    for g in all_graphs(n):
        weight = q ** g.edge_count * (1 - q) ** (slots - g.edge_count)
        k3 = len(_triangles(g))
        first += weight * k3
        second += weight * k3 * k3
    return first, second - first * first


def brute_expected_s(n: int, q: Fraction) -> Fraction:
    slots = n * (n - 1) // 2
    total = Fraction(0)
    for g in all_graphs(n):
        total += q ** g.edge_count * (1 - q) ** (slots - g.edge_count) * brute_triangle_packing(g)
    return total


# ---------------------------------------------------------------------------
# Campagne de validation croisée
# ---------------------------------------------------------------------------

def _check_triangles(rounds: int, source: RandomSource, max_n: int) -> Dict[str, object]:
    disagreements = []
    gen = source.generator()
    for k in range(rounds):
        n = int(gen.integers(3, max_n + 1))
        q = float(gen.choice([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]))
        g = sample_gnq(n, q, source.child(k))
        exact = max_triangle_matching(g)
        greedy = greedy_triangle_matching(g).size
        if tuple(exact.triangles) != brute_lexmin_triangle_packing(g) or not greedy <= exact.size <= 3 * greedy:
            disagreements.append({"round": k, "n": n, "q": q, "edges": g.edge_tuples()})
    return {"rounds": rounds, "disagreements": disagreements}


def _check_matching(rounds: int, source: RandomSource, max_n: int) -> Dict[str, object]:
    disagreements = []
    gen = source.generator()
    for k in range(rounds):
        n = int(gen.integers(1, max_n + 1))
        q = float(gen.uniform(0.1, 0.9))
        g = sample_gnq(n, q, source.child(k))
        if len(general_max_matching(g)) != brute_matching(g):
            disagreements.append({"round": k, "n": n, "q": q, "edges": g.edge_tuples()})
    return {"rounds": rounds, "disagreements": disagreements}


def _check_chromatic(rounds: int, source: RandomSource, max_n: int) -> Dict[str, object]:
    disagreements = []
    skipped = 0
    gen = source.generator()
    for k in range(rounds):
        n = int(gen.integers(3, max_n + 1))
        q = float(gen.uniform(0.1, 0.5))
        h = sample_gnq(n, q, source.child(k))
        if contains_k4(h) is not None:
            skipped += 1
            continue
        packing = packing_chi_from_complement(h).chi
        generic = generic_exact_chi(complement(h)).chi
        if packing != generic:
            disagreements.append({"round": k, "n": n, "packing": packing, "generic": generic, "edges": h.edge_tuples()})
    return {"rounds": rounds, "skipped_k4": skipped, "disagreements": disagreements}


def _check_moments(max_n: int) -> Dict[str, object]:
    disagreements = []
    for n in range(0, max_n + 1):
        for q in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)):
            if exact_triangle_moments_fraction(n, q) != brute_triangle_moments(n, q):
                disagreements.append({"n": n, "q": str(q)})
    return {"rounds": (max_n + 1) * 5, "disagreements": disagreements}


def _check_audit(rounds: int, source: RandomSource, max_n: int) -> Dict[str, object]:
    disagreements = []
    gen = source.generator()
    for k in range(rounds):
        n = int(gen.integers(4, max_n + 1))
        g = sample_gnq(n, float(gen.uniform(0.2, 0.7)), source.child(k))
        order = gen.permutation(n).tolist()
        cut = int(gen.integers(1, n // 2 + 1))
        t, a = order[:cut], order[cut:cut + int(gen.integers(1, n - cut + 1))]
        if (
            count_lambda1(g, t) != brute_lambda1(g, t)
            or count_lambda2(g, t) != brute_lambda2(g, t)
            or count_Z(g, t, a) != brute_Z(g, t, a)
        ):
            disagreements.append({"round": k, "t": t, "a": a, "edges": g.edge_tuples()})
    return {"rounds": rounds, "disagreements": disagreements}


def _check_martingale(
    rounds: int,
    source: RandomSource,
    max_n: int,
    neighborhoods: int,
    q: float = 0.3,
) -> Dict[str, object]:
    """
    Exhaustif pour n <= 5 : X_n = s(G), X_0 = E[s] et |X_i - X_{i-1}| <= 1.
    Puis `rounds` derniers pas tirés (n <= max_n) : X_{n-1} confronté à exact_X
    tant que l'énumération par masques le permet, et la règle de montée
    confrontée au solveur sur `neighborhoods` voisinages tirés.
    """
    disagreements = []
    checked = 0
    qf = Fraction(q)
    for n in range(1, 6):
        expected = float(brute_expected_s(n, qf))
        for g in all_graphs(n):
            path = exact_martingale_path(g, q)
            checked += 1
            steps_ok = all(abs(b - a) <= 1.0 + 1e-12 for a, b in zip(path, path[1:]))
            if (
                not math.isclose(path[0], expected, rel_tol=1e-12, abs_tol=1e-12)
                or path[-1] != brute_triangle_packing(g)
                or not steps_ok
            ):
                disagreements.append({"n": n, "edges": g.edge_tuples(), "path": path})

    gen = source.generator()
    for k in range(rounds):
        n = int(gen.integers(3, max_n + 1))
        g = sample_gnq(n, q, source.child(k))
        prev, _ = induced_remove(g, [n - 1])
        step = exact_last_step(prev, q)
        checked += 1
        failure: Dict[str, object] = {}
        if step.max_abs_increment > 1.0:
            failure["max_abs_increment"] = step.max_abs_increment
        if n * (n - 1) // 2 <= _MASK_SLOTS:
            reference = exact_X(ExposurePrefix(prev, n), n, q)
            if not math.isclose(step.x_prev, reference, rel_tol=1e-9, abs_tol=1e-12):
                failure["reference"] = reference
        prev_edges = prev.edge_tuples()
        for mask in gen.integers(0, 1 << (n - 1), size=neighborhoods).tolist():
            joined = [(v, n - 1) for v in range(n - 1) if mask >> v & 1]
            actual = max_triangle_matching(Graph.from_edges(n, prev_edges + joined)).size
            if actual != step.s_after(mask):
                failure.setdefault("neighborhoods", []).append({"mask": mask, "s": actual})
        if failure:
            disagreements.append({"round": k, "n": n, "x_prev": step.x_prev, **failure})
    return {"rounds": checked, "disagreements": disagreements}


_SUITES: Dict[str, Callable[[int, RandomSource], Dict[str, object]]] = {
    "triangles": lambda rounds, source: _check_triangles(rounds, source, max_n=settings.ORACLE_TRIANGLES_MAX_N),
    "matching": lambda rounds, source: _check_matching(rounds, source, max_n=settings.ORACLE_MATCHING_MAX_N),
    "chromatic": lambda rounds, source: _check_chromatic(rounds, source, max_n=settings.ORACLE_CHROMATIC_MAX_N),
    "moments": lambda rounds, source: _check_moments(max_n=5),
    "audit": lambda rounds, source: _check_audit(rounds, source, max_n=settings.ORACLE_AUDIT_MAX_N),
    "martingale": lambda rounds, source: _check_martingale(
        rounds,
        source,
        max_n=settings.ORACLE_MARTINGALE_MAX_N,
        neighborhoods=settings.ORACLE_MARTINGALE_NEIGHBORHOODS,
    ),
}


def run_oracle_suite(rounds: int, seed: int, suites: Optional[Sequence[str]] = None) -> Dict[str, Dict[str, object]]:
    """Confronte solveurs exacts et force brute ; un rapport par famille."""
    names = list(settings.ORACLE_SUITES if suites is None else suites)
    unknown = [name for name in names if name not in _SUITES]
    if unknown:
        raise ParameterError(f"familles d'oracles inconnues : {unknown}")
    source = RandomSource(seed)
    report = {
        name: _SUITES[name](rounds, source.child(index))
        for index, name in enumerate(_SUITES)
        if name in names
    }
    experiment_logger.info(
        "Oracle suite finished",
        extra={"extra_data": {name: len(part["disagreements"]) for name, part in report.items()}},
    )
    return report


def oracle_suite_passed(report: Dict[str, Dict[str, object]]) -> bool:
    return all(not part["disagreements"] for part in report.values())
