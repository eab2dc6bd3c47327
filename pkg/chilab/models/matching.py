import enum
from dataclasses import dataclass, field
from typing import List, Tuple

from chilab.core.exceptions import ParameterError
from chilab.models.graph import VertexSet

# Couplage : liste d'arêtes (u, v)
Matching = List[Tuple[int, int]]


class WitnessClass(str, enum.Enum):
    """Classe de taille d'un témoin de Hall T."""
    SMALL = "W1"      # |T| <= C/q
    MEDIUM = "W2"     # C/q < |T| <= m/2 - C/q
    LARGE = "W3"      # au-delà


@dataclass(frozen=True)
class Bipartition:
    """Partition A | B de sommets disjoints (sans contrainte d'équilibre)."""
    a: VertexSet = field(default_factory=frozenset)
    b: VertexSet = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "a", frozenset(self.a))
        object.__setattr__(self, "b", frozenset(self.b))
        if self.a & self.b:
            raise ParameterError("les côtés A et B doivent être disjoints")


@dataclass(frozen=True)
class Equipartition(Bipartition):
    """Équipartition : A ∪ B = {0..m-1} et |A| <= |B| <= |A| + 1."""

    def __post_init__(self):
        super().__post_init__()
        if not len(self.a) <= len(self.b) <= len(self.a) + 1:
            raise ParameterError(
                f"partition déséquilibrée : |A|={len(self.a)}, |B|={len(self.b)}"
            )
        m = len(self.a) + len(self.b)
        if m and (self.a | self.b) != frozenset(range(m)):
            raise ParameterError("une équipartition doit couvrir tous les sommets 0..m-1")

    @property
    def m(self) -> int:
        return len(self.a) + len(self.b)


@dataclass(frozen=True)
class HallWitness:
    t: VertexSet
    deficiency: int

    def __post_init__(self):
        if self.deficiency < 1:
            raise ParameterError("un témoin de Hall a un déficit >= 1")
