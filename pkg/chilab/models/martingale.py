from dataclasses import dataclass, field
from typing import List, NamedTuple, Tuple

from chilab.core.exceptions import ParameterError
from chilab.models.graph import Graph


@dataclass(frozen=True)
class ExposurePrefix:
    """G_i : sous-graphe induit par les i premiers sommets d'un graphe à n sommets."""
    g: Graph
    n: int

    def __post_init__(self):
        if not 0 <= self.g.n <= self.n:
            raise ParameterError(f"préfixe de {self.g.n} sommets pour n={self.n}")

    @property
    def i(self) -> int:
        return self.g.n

    @property
    def unexposed_slots(self) -> int:
        """Paires non encore révélées : C(n,2) - C(i,2)."""
        return self.n * (self.n - 1) // 2 - self.i * (self.i - 1) // 2


class PrefixClass(NamedTuple):
    in_N: bool
    in_N_star: bool

    @property
    def label(self) -> str:
        if self.in_N_star:
            return "N*"
        return "N" if self.in_N else "out"


@dataclass(frozen=True)
class LastStep:
    """Dernier pas exposé : X_{n-1} et loi de l'incrément X_n - X_{n-1}."""
    s_prefix: int
    p_up: float
    x_prev: float
    # (incrément, probabilité)
    increments: Tuple[Tuple[float, float], ...]
    # paires xy de F (masques de sommets) dont la présence dans N(v_n) fait monter s
    up_pairs: Tuple[int, ...] = ()

    def s_after(self, neighborhood: int) -> int:
        """s(G) pour le voisinage N(v_n) donné par masque de sommets."""
        return self.s_prefix + any((neighborhood & pair) == pair for pair in self.up_pairs)

    @property
    def max_abs_increment(self) -> float:
        return max((abs(value) for value, prob in self.increments if prob > 0), default=0.0)


@dataclass(frozen=True)
class ExactQuadraticVariation:
    n: int
    q: float
    expected_vn: float
    var_s: float
    mean_s: float
    step_variances: List[float] = field(default_factory=list)
