"""
Formats texte des graphes et des couplages de triangles.

Liste d'arêtes : ligne d'en-tête "n m", puis une ligne "u v" par arête (u < v,
ordre lexicographique). Couplage de triangles : une ligne "a b c" triée par triangle.
"""

from typing import List, Sequence

from chilab.core.exceptions import ParameterError
from chilab.models.graph import Graph
from chilab.models.triangle import Triangle, TriangleMatching


def _data_lines(text: str) -> List[str]:
    return [line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def edge_list_dump(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_tuples())
    return "\n".join(lines) + "\n"


def edge_list_load(text: str) -> Graph:
    lines = _data_lines(text)
    if not lines:
        raise ParameterError("liste d'arêtes vide : en-tête 'n m' attendu")
    try:
        n, m = (int(tok) for tok in lines[0].split())
        edges = [tuple(int(tok) for tok in line.split()) for line in lines[1:]]
    except ValueError as exc:
        raise ParameterError(f"liste d'arêtes mal formée : {exc}") from exc
    if any(len(e) != 2 for e in edges):
        raise ParameterError("chaque arête doit comporter exactement deux sommets")
    if len(edges) != m:
        raise ParameterError(f"en-tête annonçant {m} arêtes, {len(edges)} lues")
    g = Graph.from_edges(n, edges)
    if g.edge_count != m:
        raise ParameterError("arêtes dupliquées dans la liste")
    return g


def triangle_matching_dump(matching: TriangleMatching) -> str:
    return "".join(f"{t.a} {t.b} {t.c}\n" for t in matching.triangles)


def triangle_matching_load(text: str, is_maximum: bool = False) -> TriangleMatching:
    triangles: List[Triangle] = []
    for line in _data_lines(text):
        parts: Sequence[str] = line.split()
        if len(parts) != 3:
            raise ParameterError(f"triangle mal formé : {line!r}")
        try:
            triangles.append(Triangle.of(*(int(p) for p in parts)))
        except ValueError as exc:
            raise ParameterError(f"triangle mal formé : {line!r}") from exc
    return TriangleMatching.build(sorted(triangles), is_maximum=is_maximum)
