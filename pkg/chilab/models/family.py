from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Protocol, Tuple

from chilab.core.exceptions import ParameterError


class EdgeProbability(Protocol):
    def q(self, n: int) -> float: ...


@dataclass(frozen=True)
class QFamily:
    """q(n) = c·n^(-a)"""
    coeff: float
    exponent: float

    def __post_init__(self):
        if not self.coeff > 0 or not self.exponent > 0:
            raise ParameterError(f"famille invalide : c={self.coeff}, a={self.exponent} (c > 0 et a > 0 requis)")

    def q(self, n: int) -> float:
        if n < 1:
            raise ParameterError(f"n doit être >= 1 (reçu {n})")
        value = self.coeff * n ** (-self.exponent)
        if not 0.0 < value < 1.0:
            raise ParameterError(f"q({n}) = {value} hors de ]0,1[")
        return value

    def check_range(self, sizes: Iterable[int]) -> None:
        for n in sizes:
            self.q(n)


@dataclass(frozen=True)
class TabulatedQ:
    """q(n) lu dans une table (smooth-check uniquement)."""
    values: Tuple[Tuple[int, float], ...] = field(default=())

    @classmethod
    def from_mapping(cls, table: Mapping[int, float]) -> "TabulatedQ":
        for n, value in table.items():
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"q({n}) = {value} hors de [0,1]")
        return cls(tuple(sorted(table.items())))

    @property
    def table(self) -> Dict[int, float]:
        return dict(self.values)

    def q(self, n: int) -> float:
        try:
            return self.table[n]
        except KeyError:
            raise ParameterError(f"q({n}) absent de la table") from None

    def sizes(self) -> Tuple[int, ...]:
        return tuple(n for n, _ in self.values)
