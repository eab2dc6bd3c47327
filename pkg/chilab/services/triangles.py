"""
Service triangles : énumération, x(G), y(G) et couplage de triangles maximum exact.

Le solveur exact découpe les triangles en composantes de conflit (deux
triangles sont en conflit s'ils partagent un sommet) et résout chaque
composante par séparation et évaluation. Parmi les solutions maximum, la
liste canonique lexicographiquement minimale est retenue.
"""

import logging
import time
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from chilab.core.config import settings
from chilab.core.exceptions import BudgetExceededError
from chilab.core.logging import solver_logger
from chilab.models.graph import Graph
from chilab.models.triangle import Triangle, TriangleMatching

logger = logging.getLogger(__name__)


def enumerate_triangles(g: Graph) -> List[Triangle]:
    """Toutes les 3-cliques, une fois chacune, dans l'ordre lexicographique."""
    forward = g.forward
    found = []
    for a in range(g.n):
        fa = forward[a]
        if len(fa) < 2:
            continue
        for b in sorted(fa):
            for c in sorted(fa & forward[b]):
                found.append(Triangle(a, b, c))
    return found


def count_x(g: Graph) -> int:
    return len(enumerate_triangles(g))


def count_y_in(triangles: Sequence[Triangle]) -> int:
    load = Counter(v for t in triangles for v in t)
    return sum(1 for t in triangles if load[t.a] > 1 or load[t.b] > 1 or load[t.c] > 1)


def count_y(g: Graph) -> int:
    """Nombre de triangles partageant au moins un sommet avec un autre triangle."""
    return count_y_in(enumerate_triangles(g))


def contains_k4(g: Graph) -> Optional[Tuple[int, int, int, int]]:
    """Renvoie le premier K4 (ordre lexicographique) ou None."""
    forward = g.forward
    for a in range(g.n):
        fa = forward[a]
        if len(fa) < 3:
            continue
        for b in sorted(fa):
            common = fa & forward[b]
            if len(common) < 2:
                continue
            for c in sorted(common):
                rest = common & forward[c]
                if rest:
                    return (a, b, c, min(rest))
    return None


def triangle_conflict_components(triangles: Sequence[Triangle]) -> List[List[Triangle]]:
    """
    Composantes connexes de la structure d'intersection des triangles.

    Chaque composante est triée canoniquement ; les composantes sont rangées
    selon leur premier triangle.
    """
    if not triangles:
        return []
    incidence = nx.Graph()
    for k, t in enumerate(triangles):
        incidence.add_node(("t", k))
        incidence.add_edges_from((("t", k), ("v", v)) for v in t)

    components = []
    for nodes in nx.connected_components(incidence):
        members = sorted(triangles[key[1]] for key in nodes if key[0] == "t")
        components.append(members)
    components.sort(key=lambda comp: comp[0])
    return components


def _greedy(triangles: Sequence[Triangle]) -> List[Triangle]:
    used = set()
    chosen = []
    for t in triangles:
        if not t.meets(used):
            chosen.append(t)
            used.update(t)
    return chosen


def greedy_triangle_matching(g: Graph) -> TriangleMatching:
    """Couplage maximal obtenu en parcourant les triangles dans l'ordre canonique."""
    return TriangleMatching.build(_greedy(enumerate_triangles(g)))


def _hitting_bound(candidates: Sequence[int], masks: Sequence[int]) -> int:
    """Taille d'un transversal glouton : majore tout empilement disjoint des candidats."""
    remaining = list(candidates)
    picked = 0
    while remaining:
        load: Dict[int, int] = Counter()
        for k in remaining:
            m = masks[k]
            while m:
                low = m & -m
                load[low] += 1
                m ^= low
        bit = max(load, key=load.__getitem__)
        remaining = [k for k in remaining if not masks[k] & bit]
        picked += 1
    return picked


class _ComponentSolver:
    """Séparation et évaluation « inclure d'abord » sur une composante."""

    def __init__(self, triangles: Sequence[Triangle], budget: int):
        self.triangles = list(triangles)
        local = {v: i for i, v in enumerate(sorted({v for t in triangles for v in t}))}
        self.masks = [(1 << local[t.a]) | (1 << local[t.b]) | (1 << local[t.c]) for t in triangles]
        self.budget = budget
        self.nodes = 0
        greedy = _greedy(self.triangles)
        index = {t: k for k, t in enumerate(self.triangles)}
        # le glouton est la première feuille du parcours : incumbent initial
        self.best = [index[t] for t in greedy]

    def solve(self) -> List[Triangle]:
        self._branch(0, 0, [])
        return [self.triangles[k] for k in self.best]

    def _upper_bound(self, start: int, used: int, count: int) -> int:
        masks = self.masks
        candidates = [k for k in range(start, len(masks)) if not masks[k] & used]
        if not candidates:
            return count
        union = 0
        for k in candidates:
            union |= masks[k]
        bound = min(len(candidates), bin(union).count("1") // 3)
        if count + bound <= len(self.best):
            return count + bound
        return count + min(bound, _hitting_bound(candidates, masks))

    def _branch(self, start: int, used: int, chosen: List[int]) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError("triangle_matching", self.nodes, self.budget, len(self.triangles))

        if len(chosen) > len(self.best):
            self.best = list(chosen)
        if self._upper_bound(start, used, len(chosen)) <= len(self.best):
            return

        masks = self.masks
        for k in range(start, len(masks)):
            if masks[k] & used:
                continue
            chosen.append(k)
            self._branch(k + 1, used | masks[k], chosen)
            chosen.pop()
            # branche « exclure k » : on poursuit la boucle, à condition que la borne le permette
            if self._upper_bound(k + 1, used, len(chosen)) <= len(self.best):
                return


def solve_triangle_packing(
    triangles: Sequence[Triangle],
    budget: Optional[int] = None,
) -> Tuple[List[Triangle], Dict[str, int]]:
    """
    Couplage de triangles maximum (lexicographiquement minimal) d'une liste canonique.

    Returns:
        (triangles retenus triés, statistiques du solveur)
    """
    budget = settings.TRIANGLE_BUDGET if budget is None else budget
    chosen: List[Triangle] = []
    stats = {"components": 0, "largest_component": 0, "nodes": 0}
    for component in triangle_conflict_components(triangles):
        stats["components"] += 1
        stats["largest_component"] = max(stats["largest_component"], len(component))
        if len(component) == 1:
            chosen.extend(component)
            continue
        solver = _ComponentSolver(component, budget)
        chosen.extend(solver.solve())
        stats["nodes"] += solver.nodes
    chosen.sort()
    return chosen, stats


def max_triangle_matching(g: Graph, budget: Optional[int] = None) -> TriangleMatching:
    """
    Couplage de triangles maximum S(G), avec départage lexicographique.

    Raises:
        BudgetExceededError: si une composante dépasse le budget de nœuds.
    """
    started = time.perf_counter()
    triangles = enumerate_triangles(g)
    chosen, stats = solve_triangle_packing(triangles, budget)
    # une ligne INFO seulement quand la séparation a dû brancher
    solver_logger.log(
        logging.INFO if stats["nodes"] else logging.DEBUG,
        "Triangle matching solved",
        extra={
            "extra_data": {
                "n": g.n,
                "triangles": len(triangles),
                "s": len(chosen),
                **stats,
                "elapsed_s": round(time.perf_counter() - started, 6),
            }
        },
    )
    return TriangleMatching.build(chosen, is_maximum=True)
