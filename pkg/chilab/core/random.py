"""
Sources d'aléa reproductibles.

Chaque flux est dérivé de (master_seed, stream_id, chemin) par hachage via
`numpy.random.SeedSequence` puis alimente un générateur Philox (à compteur).
Deux flux distincts ne partagent jamais la même séquence, quel que soit le
nombre de workers.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from chilab.core.exceptions import ParameterError

_UINT64 = 1 << 64


@dataclass(frozen=True)
class RandomSource:
    master_seed: int
    stream_id: int = 0
    path: Tuple[int, ...] = ()

    def __post_init__(self):
        for value in (self.master_seed, self.stream_id, *self.path):
            if not 0 <= value < _UINT64:
                raise ParameterError(f"graine hors de l'intervalle 64 bits : {value}")

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id, *self.path))

    def generator(self) -> np.random.Generator:
        """Nouveau générateur positionné au début du flux."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def child(self, k: int) -> "RandomSource":
        """Sous-flux indépendant numéro k (essai -> tirage interne k)."""
        return RandomSource(self.master_seed, self.stream_id, self.path + (k,))

    def for_trial(self, trial: int) -> "RandomSource":
        """Flux d'un essai : stream_id = indice de l'essai."""
        return RandomSource(self.master_seed, trial, self.path)


RandomLike = Union[RandomSource, np.random.Generator]


def as_generator(rng: RandomLike) -> np.random.Generator:
    """Accepte une RandomSource (flux neuf) ou un générateur déjà positionné."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomSource):
        return rng.generator()
    raise ParameterError(f"source d'aléa non supportée : {type(rng).__name__}")
