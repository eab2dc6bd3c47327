"""
Statistiques en flux et diagnostics de normalité.

SampleStats accumule moyenne, M2 et M3 (mises à jour de Welford, fusion de
Chan et al.), ce qui permet d'accumuler par lots dans des workers puis de
fusionner. L'échantillon brut n'est conservé que sous KS_RETENTION_LIMIT.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats as sp_stats

from chilab.core.config import settings
from chilab.core.exceptions import ParameterError
from chilab.schemas.report import StatsSummary

logger = logging.getLogger(__name__)

Number = Union[int, float]


@dataclass
class SampleStats:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    min: float = math.inf
    max: float = -math.inf
    retain: bool = True
    samples: List[float] = field(default_factory=list, repr=False)
    limit: int = settings.KS_RETENTION_LIMIT

    @classmethod
    def of(cls, values: Iterable[Number], retain: bool = True) -> "SampleStats":
        acc = cls(retain=retain)
        for value in values:
            acc.add(value)
        return acc

    def add(self, value: Number) -> None:
        x = float(value)
        n1 = self.count
        self.count += 1
        delta = x - self.mean
        delta_n = delta / self.count
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m3 += term1 * delta_n * (self.count - 2) - 3.0 * delta_n * self.m2
        self.m2 += term1
        self.min = min(self.min, x)
        self.max = max(self.max, x)
        if self.retain:
            if self.count > self.limit:
                self._drop_samples()
            else:
                self.samples.append(x)

    def _drop_samples(self) -> None:
        logger.info(
            "Sample retention disabled",
            extra={"extra_data": {"count": self.count, "limit": self.limit}},
        )
        self.retain = False
        self.samples = []

    def merge(self, other: "SampleStats") -> "SampleStats":
        """Nouvel accumulateur équivalent à la concaténation des deux flux."""
        out = SampleStats(retain=self.retain and other.retain, limit=min(self.limit, other.limit))
        na, nb = self.count, other.count
        n = na + nb
        if n == 0:
            return out
        delta = other.mean - self.mean
        out.count = n
        out.mean = self.mean + delta * nb / n
        out.m2 = self.m2 + other.m2 + delta * delta * na * nb / n
        out.m3 = (
            self.m3
            + other.m3
            + delta ** 3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        out.min = min(self.min, other.min)
        out.max = max(self.max, other.max)
        if out.retain:
            if n > out.limit:
                out.retain = False
            else:
                out.samples = self.samples + other.samples
        return out

    @property
    def variance(self) -> float:
        """m2/(count-1), 0 sous deux observations."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def skewness(self) -> Optional[float]:
        """g1 = (m3/n) / (m2/n)^{3/2}"""
        if self.count < 3 or self.m2 <= 0:
            return None
        return (self.m3 / self.count) / (self.m2 / self.count) ** 1.5

    def quantile(self, level: float) -> float:
        if not self.retain or not self.samples:
            raise ParameterError("échantillon non conservé : quantiles indisponibles")
        return float(np.quantile(self.samples, level))

    def interquartile_range(self) -> float:
        return self.quantile(0.75) - self.quantile(0.25)

    def summary(self) -> StatsSummary:
        ks = None
        quartiles: Tuple[Optional[float], ...] = (None, None, None)
        if self.retain and self.samples:
            quartiles = tuple(self.quantile(level) for level in (0.25, 0.5, 0.75))
            if self.variance > 0:
                ks = ks_distance(standardize(self.samples, self.mean, math.sqrt(self.variance)))
        return StatsSummary(
            n_trials=self.count,
            mean=self.mean,
            var=self.variance,
            skew=self.skewness,
            ks=ks,
            min=self.min if self.count else None,
            max=self.max if self.count else None,
            q1=quartiles[0],
            median=quartiles[1],
            q3=quartiles[2],
        )


def standard_error(acc: SampleStats) -> float:
    if acc.count < 2:
        return 0.0
    return math.sqrt(acc.variance / acc.count)


def ks_distance(samples: Sequence[Number]) -> float:
    """Distance de Kolmogorov–Smirnov entre la fonction de répartition empirique et Φ."""
    values = np.asarray(samples, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("KS : échantillon vide")
    return float(sp_stats.kstest(values, "norm").statistic)


def skewness(samples: Sequence[Number]) -> float:
    values = np.asarray(samples, dtype=np.float64)
    if values.size < 3 or np.all(values == values[0]):
        raise ParameterError("asymétrie : au moins 3 valeurs non constantes requises")
    return float(sp_stats.skew(values, bias=True))


def standardize(samples: Sequence[Number], mean: float, sd: float) -> np.ndarray:
    if not sd > 0:
        raise ParameterError(f"écart-type non positif : {sd}")
    return (np.asarray(samples, dtype=np.float64) - mean) / sd


def exact_triangle_moments_fraction(n: int, q: Union[float, Fraction]) -> Tuple[Fraction, Fraction]:
    """
    Moyenne et variance exactes de K3(G(n,q)).

    Deux triangles partageant une arête ont une covariance q⁵ - q⁶ ; ceux qui
    partagent au plus un sommet sont indépendants.
    """
    if n < 0:
        raise ParameterError(f"n doit être positif ou nul (reçu {n})")
    qf = Fraction(q)
    if not 0 <= qf <= 1:
        raise ParameterError(f"q doit appartenir à [0,1] (reçu {q})")
    triples = math.comb(n, 3)
    mean = triples * qf ** 3
    variance = triples * qf ** 3 * (1 - qf ** 3) + triples * 3 * max(n - 3, 0) * (qf ** 5 - qf ** 6)
    return mean, variance


def exact_triangle_moments(n: int, q: float) -> Tuple[float, float]:
    mean, variance = exact_triangle_moments_fraction(n, q)
    return float(mean), float(variance)


def y_moment_bounds(n: int, q: float) -> Tuple[float, float]:
    """(n⁵q⁶ + n⁴q⁵, borne du second moment de y(G))"""
    first = n ** 5 * q ** 6 + n ** 4 * q ** 5
    second = first + sum(n ** k * q ** (k + 2) for k in range(6, 11))
    return float(first), float(second)
