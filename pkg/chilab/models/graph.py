"""
Graphe simple non orienté, immuable, stocké en CSR (indptr / indices int32 triés).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, List, Tuple

import numpy as np

from chilab.core.exceptions import ParameterError

# Ensemble de sommets (T, A, B, S, ...) : ensemble figé d'indices
VertexSet = FrozenSet[int]


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    edge_count: int = 0

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """
        Construit un graphe à partir d'une liste de paires (u, v).

        Les doublons sont fusionnés ; les boucles et les sommets hors de
        0..n-1 sont refusés.
        """
        if n < 0:
            raise ParameterError(f"nombre de sommets négatif : {n}")
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise ParameterError(f"arête hors de l'intervalle de sommets 0..{n - 1}")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ParameterError("boucle interdite dans un graphe simple")
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            canon = np.unique(lo * max(n, 1) + hi)
            lo, hi = canon // max(n, 1), canon % max(n, 1)
        else:
            lo = hi = np.empty(0, dtype=np.int64)

        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        indices = cols[order].astype(np.int32)
        counts = np.bincount(rows, minlength=n) if n else np.zeros(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n=n, indptr=indptr, indices=indices, edge_count=int(lo.size))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls.from_edges(n, [])

    @classmethod
    def complete(cls, n: int) -> "Graph":
        u, v = np.triu_indices(n, k=1)
        return cls.from_edges(n, np.stack([u, v], axis=1))

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        pos = int(np.searchsorted(nbrs, v))
        return pos < nbrs.size and int(nbrs[pos]) == v

    def edges(self) -> np.ndarray:
        """Tableau (m, 2) des arêtes u < v, triées lexicographiquement."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        cols = self.indices.astype(np.int64)
        keep = rows < cols
        return np.stack([rows[keep], cols[keep]], axis=1)

    def edge_tuples(self) -> List[Tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges()]

    @cached_property
    def adjacency(self) -> Tuple[FrozenSet[int], ...]:
        """Voisinages sous forme d'ensembles (intersections rapides en Python)."""
        return tuple(frozenset(self.neighbors(v).tolist()) for v in range(self.n))

    @cached_property
    def forward(self) -> Tuple[FrozenSet[int], ...]:
        """Voisins d'indice supérieur : chaque triangle est énuméré une fois."""
        out = []
        for v in range(self.n):
            nbrs = self.neighbors(v)
            out.append(frozenset(nbrs[np.searchsorted(nbrs, v, side="right"):].tolist()))
        return tuple(out)

    def check_vertices(self, vertices: Iterable[int]) -> VertexSet:
        members = frozenset(int(x) for x in vertices)
        if members and (min(members) < 0 or max(members) >= self.n):
            raise ParameterError(f"sommet hors du graphe (n={self.n})")
        return members

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edge_count == other.edge_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edge_count, self.indices.tobytes()))
