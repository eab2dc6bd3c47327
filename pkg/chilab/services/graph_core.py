"""
Service graphe : échantillonnage G(n,q) et primitives ensemblistes.

Les C(n,2) paires sont rangées dans l'ordre colexicographique :
la paire (i, j), i < j, porte l'indice k = j(j-1)/2 + i.
"""

import logging
from typing import Iterable, Tuple

import numpy as np

from chilab.core.exceptions import ParameterError
from chilab.core.random import RandomLike, as_generator
from chilab.models.graph import Graph, VertexSet

logger = logging.getLogger(__name__)

# En dessous de ce seuil, saut géométrique ; au-dessus, Bernoulli par paire
SPARSE_THRESHOLD = 0.1
_CHUNK = 1 << 16


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def decode_pairs(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Indices colexicographiques -> paires (i, j) avec i < j."""
    k = np.asarray(k, dtype=np.int64)
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    # corrections d'arrondi flottant
    j = np.where(j * (j - 1) // 2 > k, j - 1, j)
    j = np.where((j + 1) * j // 2 <= k, j + 1, j)
    i = k - j * (j - 1) // 2
    return i, j


def encode_pairs(i: np.ndarray, j: np.ndarray) -> np.ndarray:
    lo = np.minimum(i, j).astype(np.int64)
    hi = np.maximum(i, j).astype(np.int64)
    return hi * (hi - 1) // 2 + lo


def _skip_positions(total: int, q: float, gen: np.random.Generator) -> np.ndarray:
    """Positions des succès d'une suite de `total` Bernoulli(q) par sauts géométriques."""
    found = []
    last = -1
    while True:
        gaps = gen.geometric(q, size=_CHUNK)
        positions = last + np.cumsum(gaps)
        if positions[-1] >= total:
            found.append(positions[positions < total])
            break
        found.append(positions)
        last = int(positions[-1])
    return np.concatenate(found) if found else np.empty(0, dtype=np.int64)


def _bernoulli_positions(total: int, q: float, gen: np.random.Generator) -> np.ndarray:
    found = []
    for start in range(0, total, _CHUNK):
        size = min(_CHUNK, total - start)
        hits = np.flatnonzero(gen.random(size) < q)
        found.append(hits + start)
    return np.concatenate(found) if found else np.empty(0, dtype=np.int64)


def sample_gnq(n: int, q: float, rng: RandomLike) -> Graph:
    """
    Tire G ~ G(n,q) : chaque paire est une arête indépendamment avec probabilité q.

    Le résultat ne dépend que de (n, q) et du flux `rng`.
    """
    if n < 0:
        raise ParameterError(f"n doit être positif ou nul (reçu {n})")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q doit appartenir à [0,1] (reçu {q})")

    total = pair_count(n)
    if q == 0.0 or total == 0:
        return Graph.empty(n)
    if q == 1.0:
        return Graph.complete(n)

    gen = as_generator(rng)
    if q <= SPARSE_THRESHOLD:
        positions = _skip_positions(total, q, gen)
    else:
        positions = _bernoulli_positions(total, q, gen)

    i, j = decode_pairs(positions)
    graph = Graph.from_edges(n, np.stack([i, j], axis=1))
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "G(n,q) sampled",
            extra={"extra_data": {"n": n, "q": q, "edges": graph.edge_count}},
        )
    return graph


def complement(g: Graph) -> Graph:
    """Complémentaire de g (u != v)."""
    n = g.n
    total = pair_count(n)
    if total == 0:
        return Graph.empty(n)
    present = np.zeros(total, dtype=bool)
    edges = g.edges()
    if edges.size:
        present[encode_pairs(edges[:, 0], edges[:, 1])] = True
    i, j = decode_pairs(np.flatnonzero(~present))
    return Graph.from_edges(n, np.stack([i, j], axis=1))


def neighborhood(g: Graph, t: Iterable[int]) -> VertexSet:
    """N(T) = union des voisinages de T, privée de T."""
    members = g.check_vertices(t)
    if not members:
        return frozenset()
    idx = np.fromiter(members, dtype=np.int64)
    parts = [g.neighbors(v) for v in idx]
    union = np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int32)
    return frozenset(union.tolist()) - members


def induced_remove(g: Graph, s: Iterable[int]) -> Tuple[Graph, np.ndarray]:
    """
    G - S. Les sommets restants sont renumérotés 0..n-|S|-1 dans l'ordre.

    Returns:
        (graphe induit, tableau `kept` tel que kept[nouveau] = ancien)
    """
    removed = g.check_vertices(s)
    keep_mask = np.ones(g.n, dtype=bool)
    if removed:
        keep_mask[np.fromiter(removed, dtype=np.int64)] = False
    kept = np.flatnonzero(keep_mask)
    if not removed:
        return g, kept

    relabel = np.full(g.n, -1, dtype=np.int64)
    relabel[kept] = np.arange(kept.size)
    edges = g.edges()
    if edges.size:
        alive = keep_mask[edges[:, 0]] & keep_mask[edges[:, 1]]
        edges = relabel[edges[alive]]
    return Graph.from_edges(int(kept.size), edges), kept


def union_graphs(g1: Graph, g2: Graph) -> Graph:
    if g1.n != g2.n:
        raise ParameterError(f"tailles incompatibles : {g1.n} != {g2.n}")
    edges = np.concatenate([g1.edges(), g2.edges()])
    return Graph.from_edges(g1.n, edges)


def max_degree(g: Graph) -> int:
    """Degré maximum Δ(G) (0 pour le graphe vide)."""
    degrees = g.degrees()
    return int(degrees.max()) if degrees.size else 0
