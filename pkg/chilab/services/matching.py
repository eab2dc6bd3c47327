"""
Service couplages : route par équipartition aléatoire et lemme de Hall, et
oracle de couplage maximum en graphe général (algorithme des fleurs d'Edmonds).
"""

import logging
from collections import deque
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from chilab.core.exceptions import LabError, ParameterError
from chilab.core.random import RandomLike, as_generator
from chilab.models.graph import Graph
from chilab.models.matching import (
    Bipartition,
    Equipartition,
    HallWitness,
    Matching,
    WitnessClass,
)
from chilab.schemas.report import StructureReport
from chilab.services.graph_core import induced_remove
from chilab.services.triangles import count_y_in, enumerate_triangles, solve_triangle_packing

logger = logging.getLogger(__name__)

_MAX_PARTITION_ATTEMPTS = 10_000


# ---------------------------------------------------------------------------
# Équipartitions
# ---------------------------------------------------------------------------

def random_equipartition(m: int, rng: RandomLike) -> Equipartition:
    """Partition uniforme de {0..m-1} en |A| = ⌊m/2⌋, |B| = ⌈m/2⌉."""
    if m < 0:
        raise ParameterError(f"m doit être positif ou nul (reçu {m})")
    perm = as_generator(rng).permutation(m)
    half = m // 2
    return Equipartition(a=frozenset(perm[:half].tolist()), b=frozenset(perm[half:].tolist()))


def bernoulli_equipartition(
    m: int,
    rng: RandomLike,
    max_attempts: int = _MAX_PARTITION_ATTEMPTS,
) -> Tuple[Equipartition, int]:
    """
    Chaque sommet rejoint A avec probabilité 1/2 ; on recommence jusqu'à
    |A| <= |B| <= |A| + 1.

    Returns:
        (équipartition, nombre de tirages effectués)
    """
    if m < 0:
        raise ParameterError(f"m doit être positif ou nul (reçu {m})")
    gen = as_generator(rng)
    for attempt in range(1, max_attempts + 1):
        in_a = gen.random(m) < 0.5
        if int(in_a.sum()) == m // 2:
            return (
                Equipartition(
                    a=frozenset(np.flatnonzero(in_a).tolist()),
                    b=frozenset(np.flatnonzero(~in_a).tolist()),
                ),
                attempt,
            )
    raise LabError(f"aucune équipartition après {max_attempts} tirages (m={m})")


# ---------------------------------------------------------------------------
# Couplage biparti et témoins de Hall
# ---------------------------------------------------------------------------

def _bipartite_view(g: Graph, part: Bipartition) -> nx.Graph:
    g.check_vertices(part.a | part.b)
    view = nx.Graph()
    view.add_nodes_from(sorted(part.a))
    view.add_nodes_from(sorted(part.b))
    for u in sorted(part.a):
        view.add_edges_from((u, int(v)) for v in g.neighbors(u) if int(v) in part.b)
    return view


def _bipartite_matching_map(g: Graph, part: Bipartition) -> Dict[int, int]:
    view = _bipartite_view(g, part)
    if view.number_of_edges() == 0:
        return {}
    return nx.bipartite.hopcroft_karp_matching(view, top_nodes=sorted(part.a))


def bipartite_max_matching(g: Graph, part: Bipartition) -> Matching:
    """Couplage maximum entre A et B (Hopcroft–Karp), arêtes (a, b) triées."""
    mate = _bipartite_matching_map(g, part)
    return sorted((u, mate[u]) for u in part.a if u in mate)


def hall_witness(g: Graph, part: Bipartition) -> Optional[HallWitness]:
    """
    Témoin de Hall T ⊂ A de déficit maximum, ou None si A est entièrement couplé.

    T est l'ensemble des sommets de A atteignables par chemins alternés depuis
    les sommets de A non couplés ; |T| - |N(T) ∩ B| = nombre de non couplés de A.
    """
    mate = _bipartite_matching_map(g, part)
    free = sorted(u for u in part.a if u not in mate)
    if not free:
        return None

    reached_a = set(free)
    reached_b = set()
    queue = deque(free)
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            v = int(v)
            if v not in part.b or v in reached_b:
                continue
            reached_b.add(v)
            w = mate.get(v)
            if w is not None and w not in reached_a:
                reached_a.add(w)
                queue.append(w)
    return HallWitness(t=frozenset(reached_a), deficiency=len(reached_a) - len(reached_b))


def classify_witness(witness: HallWitness, m: int, q: float, hall_c: float) -> WitnessClass:
    """Classe de taille du témoin : |T| <= C/q, puis jusqu'à m/2 - C/q, puis au-delà."""
    if q <= 0:
        raise ParameterError("q doit être > 0 pour classer un témoin")
    size = len(witness.t)
    scale = hall_c / q
    if size <= scale:
        return WitnessClass.SMALL
    if size <= m / 2 - scale:
        return WitnessClass.MEDIUM
    return WitnessClass.LARGE


# ---------------------------------------------------------------------------
# Couplage maximum en graphe général
# ---------------------------------------------------------------------------

class _Blossom:
    """Recherche de chemins augmentants d'Edmonds, une racine libre à la fois."""

    def __init__(self, adjacency: List[List[int]], match: List[int]):
        self.adj = adjacency
        self.match = match

    def _base(self, v: int) -> int:
        return self.base.get(v, v)

    def _lca(self, a: int, b: int) -> int:
        match, parent = self.match, self.parent
        seen = set()
        while True:
            a = self._base(a)
            seen.add(a)
            if match[a] == -1:
                break
            a = parent[match[a]]
        while True:
            b = self._base(b)
            if b in seen:
                return b
            b = parent[match[b]]

    def _mark_path(self, v: int, b: int, child: int, blossom: set) -> None:
        match, parent = self.match, self.parent
        while self._base(v) != b:
            blossom.add(self._base(v))
            blossom.add(self._base(match[v]))
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    def find_path(self, root: int) -> int:
        """Extrémité libre d'un chemin augmentant depuis `root`, ou -1."""
        match = self.match
        self.base: Dict[int, int] = {}
        self.parent: Dict[int, int] = {}
        used = {root}
        touched = [root]
        queue = deque([root])

        while queue:
            v = queue.popleft()
            for to in self.adj[v]:
                if self._base(v) == self._base(to) or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and match[to] in self.parent):
                    current = self._lca(v, to)
                    blossom = set()
                    self._mark_path(v, current, to, blossom)
                    self._mark_path(to, current, v, blossom)
                    for i in touched:
                        if self._base(i) in blossom:
                            self.base[i] = current
                            if i not in used:
                                used.add(i)
                                queue.append(i)
                elif to not in self.parent:
                    self.parent[to] = v
                    touched.append(to)
                    if match[to] == -1:
                        return to
                    nxt = match[to]
                    used.add(nxt)
                    touched.append(nxt)
                    queue.append(nxt)
        return -1

    def augment(self, end: int) -> None:
        match, parent = self.match, self.parent
        v = end
        while v != -1:
            pv = parent[v]
            ppv = match[pv]
            match[v] = pv
            match[pv] = v
            v = ppv


def general_max_matching(g: Graph) -> Matching:
    """
    Couplage maximum d'un graphe quelconque.

    Initialisation gloutonne puis une passe de recherche de chemins augmentants
    depuis chaque sommet libre : un sommet sans chemin augmentant n'en aura
    jamais plus, la passe unique certifie donc l'optimalité.
    """
    n = g.n
    adjacency = [g.neighbors(v).tolist() for v in range(n)]
    match = [-1] * n

    # glouton : les sommets de faible degré d'abord
    for v in sorted(range(n), key=lambda x: (len(adjacency[x]), x)):
        if match[v] != -1:
            continue
        for w in adjacency[v]:
            if match[w] == -1:
                match[v], match[w] = w, v
                break

    search = _Blossom(adjacency, match)
    augmentations = 0
    for root in range(n):
        if match[root] != -1 or not adjacency[root]:
            continue
        end = search.find_path(root)
        if end != -1:
            search.augment(end)
            augmentations += 1

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "General matching computed",
            extra={"extra_data": {"n": n, "augmentations": augmentations}},
        )
    return sorted((v, match[v]) for v in range(n) if match[v] > v)


# ---------------------------------------------------------------------------
# Chaîne complète : S(G), G - S, couplage presque parfait
# ---------------------------------------------------------------------------

def structure_check(
    g: Graph,
    rng: Optional[RandomLike] = None,
    q: Optional[float] = None,
    seed: Optional[int] = None,
    trial: int = 0,
    retries: int = 1,
    hall_c: Optional[float] = None,
    bernoulli: bool = False,
    budget: Optional[int] = None,
) -> StructureReport:
    """
    Retire S(G), cherche un couplage presque parfait de G - S.

    Le verdict `near_perfect` vient de l'oracle général ; la route par
    équipartition aléatoire (jusqu'à `retries` tirages) est consignée à part.

    Raises:
        BudgetExceededError: propagée depuis le solveur de triangles.
    """
    from chilab.services.chromatic import structural_chi

    triangles = enumerate_triangles(g)
    chosen, _ = solve_triangle_packing(triangles, budget)
    covered = frozenset(v for t in chosen for v in t)
    s = len(chosen)

    rest, _ = induced_remove(g, covered)
    m = rest.n
    nu = len(general_max_matching(rest))
    deficiency = m - 2 * nu

    report = StructureReport(
        trial=trial,
        n=g.n,
        q=q,
        seed=seed,
        s=s,
        deficiency=deficiency,
        near_perfect=deficiency <= 1,
        chi_structural=structural_chi(g.n, s),
        x=len(triangles),
        y=count_y_in(triangles),
    )

    if rng is not None:
        gen = as_generator(rng)
        attempts = 0
        witness = None
        matched = False
        for _ in range(max(1, retries)):
            if bernoulli:
                part, drawn = bernoulli_equipartition(m, gen)
            else:
                part, drawn = random_equipartition(m, gen), 1
            attempts += drawn
            witness = hall_witness(rest, part)
            if witness is None:
                matched = True
                break
        report.equipartition_matched = matched
        report.partition_attempts = attempts
        if witness is not None:
            report.hall_witness_size = len(witness.t)
            if q:
                report.witness_class = classify_witness(witness, m, q, hall_c or 10.0)
    return report
