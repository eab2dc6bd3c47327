"""
Exécution parallèle des essais d'une campagne.

Les essais sont distribués sur un pool de processus et les résultats sont
réordonnés par indice d'essai : la sortie ne dépend pas du nombre de workers.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, List, Sequence, TypeVar

from chilab.core.logging import experiment_logger


T = TypeVar("T")


def run_trials(
    task: Callable[..., T],
    trial_ids: Sequence[int],
    threads: int = 1,
    **kwargs,
) -> List[T]:
    """
    Exécute `task(trial_id, **kwargs)` pour chaque essai.

    `task` doit être une fonction de niveau module (sérialisable par pickle).
    Le résultat est trié par indice d'essai.
    """
    bound = partial(task, **kwargs)
    trial_ids = list(trial_ids)

    experiment_logger.info(
        "Trials dispatched",
        extra={"extra_data": {"task": getattr(task, "__name__", str(task)), "trials": len(trial_ids), "threads": threads}},
    )

    if threads <= 1 or len(trial_ids) <= 1:
        return [bound(t) for t in trial_ids]

    chunksize = max(1, len(trial_ids) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # `map` conserve l'ordre des entrées
        return list(pool.map(bound, trial_ids, chunksize=chunksize))
