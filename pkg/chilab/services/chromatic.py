"""
Service chromatique : formule structurelle, χ exact par empilement dans le
complémentaire et solveur générique DSATUR pour les petits graphes.

Si le complémentaire H est sans K4, une classe de couleur du graphe dense est
une clique de H d'au plus trois sommets ; χ = n - max(2·#triangles + #arêtes)
sur les empilements disjoints de triangles et d'arêtes de H.
"""

import logging
import time
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from chilab.core.config import settings
from chilab.core.exceptions import BudgetExceededError, K4PresentError, LabError, ParameterError
from chilab.core.logging import solver_logger
from chilab.models.chromatic import ChiMethod, ChiResult
from chilab.models.graph import Graph
from chilab.models.triangle import Triangle
from chilab.schemas.report import FormulaAgreement
from chilab.services.graph_core import complement, induced_remove
from chilab.services.matching import general_max_matching
from chilab.services.triangles import contains_k4, enumerate_triangles, solve_triangle_packing

logger = logging.getLogger(__name__)


def structural_chi(n: int, s: int) -> int:
    """⌈(n - s)/2⌉, c'est-à-dire s + ⌈(n - 3s)/2⌉."""
    if s < 0 or 3 * s > n:
        raise ParameterError(f"il faut 0 <= 3s <= n (n={n}, s={s})")
    return (n - s + 1) // 2


# ---------------------------------------------------------------------------
# Certificats
# ---------------------------------------------------------------------------

def coloring_from_packing(
    n: int,
    triangles: Sequence[Sequence[int]],
    edges: Sequence[Tuple[int, int]],
) -> Tuple[int, ...]:
    """
    Coloration du graphe dense : une couleur par triangle, par arête du
    couplage, puis par sommet restant (dans l'ordre des indices).
    """
    coloring = [-1] * n
    color = 0
    for group in list(triangles) + list(edges):
        for v in group:
            if coloring[v] != -1:
                raise ParameterError(f"sommet {v} présent dans deux blocs de l'empilement")
            coloring[v] = color
        color += 1
    for v in range(n):
        if coloring[v] == -1:
            coloring[v] = color
            color += 1
    return tuple(coloring)


def is_proper_coloring(g: Graph, coloring: Sequence[int]) -> bool:
    if len(coloring) != g.n:
        return False
    return all(coloring[u] != coloring[v] for u, v in g.edge_tuples())


def is_clique_partition(h: Graph, coloring: Sequence[int]) -> bool:
    """
    La coloration est propre pour le complémentaire de h ssi chaque classe
    de couleur est une clique de h.
    """
    if len(coloring) != h.n:
        return False
    classes: Dict[int, List[int]] = {}
    for v, color in enumerate(coloring):
        classes.setdefault(color, []).append(v)
    for members in classes.values():
        for i, u in enumerate(members):
            if any(not h.has_edge(u, w) for w in members[i + 1:]):
                return False
    return True


def _certified(g: Graph, chi: int, method: ChiMethod, coloring: Tuple[int, ...]) -> ChiResult:
    if not is_proper_coloring(g, coloring) or len(set(coloring)) != chi:
        raise LabError(f"certificat invalide ({method.value}, χ={chi})")
    return ChiResult(chi=chi, method=method, certificate=coloring)


def _certified_from_complement(h: Graph, chi: int, coloring: Tuple[int, ...]) -> ChiResult:
    if not is_clique_partition(h, coloring) or len(set(coloring)) != chi:
        raise LabError(f"certificat invalide (packing_exact, χ={chi})")
    return ChiResult(chi=chi, method=ChiMethod.PACKING_EXACT, certificate=coloring)


# ---------------------------------------------------------------------------
# Empilement exact triangles + arêtes
# ---------------------------------------------------------------------------

class _PackingSearch:
    """
    Séparation et évaluation sur les sous-ensembles de triangles disjoints,
    complétés par un couplage maximum des sommets non couverts.
    """

    def __init__(self, h: Graph, triangles: Sequence[Triangle], budget: int):
        self.h = h
        self.triangles = list(triangles)
        self.budget = budget
        self.nodes = 0
        self.best_weight = -1
        self.best_triangles: List[Triangle] = []
        self.best_edges: List[Tuple[int, int]] = []

    def matching_without(self, chosen: Sequence[Triangle]) -> List[Tuple[int, int]]:
        covered = frozenset(v for t in chosen for v in t)
        rest, kept = induced_remove(self.h, covered)
        return [(int(kept[u]), int(kept[v])) for u, v in general_max_matching(rest)]

    def offer(self, chosen: Sequence[Triangle], edges: List[Tuple[int, int]]) -> None:
        weight = 2 * len(chosen) + len(edges)
        if weight > self.best_weight:
            self.best_weight = weight
            self.best_triangles = list(chosen)
            self.best_edges = edges

    def run(self) -> None:
        self._branch(0, frozenset(), [])

    def _branch(self, start: int, used: frozenset, chosen: List[Triangle]) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError("packing_chi", self.nodes, self.budget, len(self.triangles))

        edges = self.matching_without(chosen)
        self.offer(chosen, edges)

        candidates = [k for k in range(start, len(self.triangles)) if not self.triangles[k].meets(used)]
        if not candidates:
            return
        free_vertices = len({v for k in candidates for v in self.triangles[k]})
        extra = min(len(candidates), free_vertices // 3)
        nu = len(edges)
        remaining = self.h.n - 3 * len(chosen)
        bound = max(
            2 * (len(chosen) + k) + min(nu, (remaining - 3 * k) // 2)
            for k in range(1, extra + 1)
        ) if extra else -1
        if bound <= self.best_weight:
            return

        for k in candidates:
            t = self.triangles[k]
            chosen.append(t)
            self._branch(k + 1, used | frozenset(t), chosen)
            chosen.pop()


def packing_chi_from_complement(h: Graph, budget: Optional[int] = None) -> ChiResult:
    """
    χ exact du graphe dense dont le complémentaire est `h`.

    Raises:
        K4PresentError: si h contient un K4.
        BudgetExceededError: si la recherche dépasse son budget.
    """
    started = time.perf_counter()
    witness = contains_k4(h)
    if witness is not None:
        raise K4PresentError(witness)

    n = h.n
    triangles = enumerate_triangles(h)
    chosen, _ = solve_triangle_packing(triangles)
    s = len(chosen)
    search = _PackingSearch(h, triangles, settings.PACKING_BUDGET if budget is None else budget)
    edges = search.matching_without(chosen)
    search.offer(chosen, edges)

    # 2t + ⌊(n-3t)/2⌋ croît avec t : S(H) suivi d'un couplage presque parfait est optimal
    if n - 3 * s - 2 * len(edges) > 1:
        search.run()

    chi = n - search.best_weight
    coloring = coloring_from_packing(n, search.best_triangles, search.best_edges)
    solver_logger.info(
        "Packing chi solved",
        extra={
            "extra_data": {
                "n": n,
                "s": s,
                "chi": chi,
                "nodes": search.nodes,
                "certified_by_structure": search.nodes == 0,
                "elapsed_s": round(time.perf_counter() - started, 6),
            }
        },
    )
    return _certified_from_complement(h, chi, coloring)


def packing_chi(g_dense: Graph, budget: Optional[int] = None) -> ChiResult:
    """χ exact du graphe dense via l'empilement dans son complémentaire (sans K4)."""
    return packing_chi_from_complement(complement(g_dense), budget)


# ---------------------------------------------------------------------------
# Solveur générique
# ---------------------------------------------------------------------------

def dsatur_coloring(g: Graph) -> Tuple[int, ...]:
    """Coloration gloutonne DSATUR (saturation, puis degré, puis indice)."""
    n = g.n
    adjacency = g.adjacency
    coloring = [-1] * n
    saturation = [set() for _ in range(n)]
    uncolored = set(range(n))
    while uncolored:
        v = max(uncolored, key=lambda x: (len(saturation[x]), len(adjacency[x]), -x))
        color = 0
        while color in saturation[v]:
            color += 1
        coloring[v] = color
        uncolored.discard(v)
        for w in adjacency[v]:
            if w in uncolored:
                saturation[w].add(color)
    return tuple(coloring)


def _clique_lower_bound(g: Graph) -> int:
    if g.n == 0:
        return 0
    view = nx.Graph()
    view.add_nodes_from(range(g.n))
    view.add_edges_from(g.edge_tuples())
    return max(len(c) for c in nx.find_cliques(view))


def generic_exact_chi(g: Graph, max_n: Optional[int] = None) -> ChiResult:
    """
    χ exact par retour arrière DSATUR, borne initiale donnée par DSATUR glouton
    et arrêt anticipé sur la borne de clique.
    """
    cap = settings.GENERIC_CHI_MAX_N if max_n is None else max_n
    if g.n > cap:
        raise ParameterError(f"generic_exact_chi limité à n <= {cap} (reçu {g.n})")
    n = g.n
    if n == 0:
        return ChiResult(chi=0, method=ChiMethod.GENERIC_EXACT, certificate=())

    adjacency = g.adjacency
    best = list(dsatur_coloring(g))
    state: Dict[str, int] = {"best_k": max(best) + 1, "nodes": 0}
    lower = _clique_lower_bound(g)

    coloring = [-1] * n
    saturation: List[Dict[int, int]] = [dict() for _ in range(n)]

    def pick() -> int:
        free = [v for v in range(n) if coloring[v] == -1]
        if not free:
            return -1
        return max(free, key=lambda x: (len(saturation[x]), len(adjacency[x]), -x))

    def backtrack(current_k: int) -> None:
        if state["best_k"] <= lower:
            return
        state["nodes"] += 1
        v = pick()
        if v == -1:
            if current_k < state["best_k"]:
                state["best_k"] = current_k
                best[:] = coloring
            return
        for color in range(current_k + 1):
            if color in saturation[v]:
                continue
            if max(current_k, color + 1) >= state["best_k"]:
                continue
            coloring[v] = color
            for w in adjacency[v]:
                saturation[w][color] = saturation[w].get(color, 0) + 1
            backtrack(max(current_k, color + 1))
            for w in adjacency[v]:
                saturation[w][color] -= 1
                if not saturation[w][color]:
                    del saturation[w][color]
            coloring[v] = -1

    backtrack(0)
    solver_logger.info(
        "Generic chi solved",
        extra={"extra_data": {"n": n, "chi": state["best_k"], "nodes": state["nodes"], "clique_bound": lower}},
    )
    return _certified(g, state["best_k"], ChiMethod.GENERIC_EXACT, tuple(best))


def verify_structural_formula(g_complement: Graph, budget: Optional[int] = None) -> FormulaAgreement:
    """Compare ⌈(n - s)/2⌉ au χ exact du graphe dense de complémentaire donné."""
    chosen, _ = solve_triangle_packing(enumerate_triangles(g_complement))
    chi_structural = structural_chi(g_complement.n, len(chosen))
    exact = packing_chi_from_complement(g_complement, budget)
    return FormulaAgreement(
        n=g_complement.n,
        s=len(chosen),
        chi_structural=chi_structural,
        chi_exact=exact.chi,
        agree=chi_structural == exact.chi,
    )
