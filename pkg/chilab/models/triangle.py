from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Tuple

from chilab.core.exceptions import ParameterError
from chilab.models.graph import VertexSet


class Triangle(NamedTuple):
    """Triangle canonique a < b < c ; l'ordre des tuples est l'ordre canonique."""
    a: int
    b: int
    c: int

    @classmethod
    def of(cls, x: int, y: int, z: int) -> "Triangle":
        a, b, c = sorted((int(x), int(y), int(z)))
        if a == b or b == c:
            raise ParameterError(f"triangle dégénéré : {(x, y, z)}")
        return cls(a, b, c)

    def meets(self, vertices) -> bool:
        return self.a in vertices or self.b in vertices or self.c in vertices


@dataclass(frozen=True)
class TriangleMatching:
    """Ensemble de triangles deux à deux disjoints, triés canoniquement."""
    triangles: Tuple[Triangle, ...] = ()
    covered: VertexSet = field(default_factory=frozenset)
    is_maximum: bool = False

    @classmethod
    def build(cls, triangles: Iterable[Triangle], is_maximum: bool = False) -> "TriangleMatching":
        ordered = tuple(sorted(Triangle.of(*t) for t in triangles))
        covered = frozenset(v for t in ordered for v in t)
        if len(covered) != 3 * len(ordered):
            raise ParameterError("les triangles d'un couplage doivent être disjoints")
        return cls(triangles=ordered, covered=covered, is_maximum=is_maximum)

    @property
    def size(self) -> int:
        return len(self.triangles)

    def __len__(self) -> int:
        return len(self.triangles)
