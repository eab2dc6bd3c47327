"""
Service martingale d'exposition des sommets pour s(G).

Ordre d'exposition : ordre naturel des sommets. Les paires sont rangées en
ordre colexicographique, si bien que G_i correspond exactement aux C(i,2)
bits de poids faible du masque d'arêtes : une complétion de G_i est un
entier posé sur les bits de poids fort.
"""

import itertools
import logging
import math
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np

from chilab.core.config import settings
from chilab.core.exceptions import ParameterError
from chilab.core.logging import experiment_logger
from chilab.core.random import RandomLike, RandomSource, as_generator
from chilab.models.graph import Graph
from chilab.models.martingale import ExactQuadraticVariation, ExposurePrefix, LastStep, PrefixClass
from chilab.schemas.report import MartingaleEstimate, MartingaleRecord
from chilab.services.graph_core import induced_remove, sample_gnq
from chilab.services.triangles import enumerate_triangles, max_triangle_matching, solve_triangle_packing

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20
_POPCOUNT8 = np.array([bin(b).count("1") for b in range(256)], dtype=np.int64)


def _slot(a: int, b: int) -> int:
    lo, hi = min(a, b), max(a, b)
    return hi * (hi - 1) // 2 + lo


def _popcount(values: np.ndarray) -> np.ndarray:
    as_bytes = np.ascontiguousarray(values, dtype=np.uint64).view(np.uint8).reshape(-1, 8)
    return _POPCOUNT8[as_bytes].sum(axis=1)


def graph_to_mask(g: Graph) -> int:
    mask = 0
    for u, v in g.edge_tuples():
        mask |= 1 << _slot(u, v)
    return mask


@lru_cache(maxsize=None)
def _packing_families(n: int) -> Tuple[Tuple[np.ndarray, ...], ...]:
    """Pour k = 1..⌊n/3⌋ : masques d'arêtes des familles de k triangles disjoints."""
    triangles = list(itertools.combinations(range(n), 3))
    tri_mask = {t: (1 << _slot(t[0], t[1])) | (1 << _slot(t[0], t[2])) | (1 << _slot(t[1], t[2])) for t in triangles}
    levels = []
    frontier = [((t,), frozenset(t)) for t in triangles]
    while frontier:
        levels.append(np.array([sum(tri_mask[t] for t in fam) for fam, _ in frontier], dtype=np.int64))
        nxt = []
        for fam, used in frontier:
            for t in triangles:
                if t > fam[-1] and not used & set(t):
                    nxt.append((fam + (t,), used | frozenset(t)))
        frontier = nxt
    return tuple(levels)


def s_of_masks(n: int, masks: np.ndarray) -> np.ndarray:
    """s(G) vectorisé pour des graphes à n sommets donnés par masque (C(n,2) <= 62)."""
    masks = np.asarray(masks, dtype=np.int64)
    s = np.zeros(masks.size, dtype=np.int64)
    for k, families in enumerate(_packing_families(n), start=1):
        present = np.zeros(masks.size, dtype=bool)
        for fam in families:
            present |= (masks & fam) == fam
        if not present.any():
            break
        s[present] = k
    return s


def _check_q(q: float) -> None:
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q doit appartenir à [0,1] (reçu {q})")


def _check_mask_width(n: int) -> None:
    # un masque d'arêtes tient dans un int64 signé
    if n * (n - 1) // 2 > 62:
        raise ParameterError(f"n={n} trop grand pour l'énumération par masques (n <= 11)")


# ---------------------------------------------------------------------------
# Classes N_i et N*_i
# ---------------------------------------------------------------------------

def classify_prefix(prefix: ExposurePrefix, q: float) -> PrefixClass:
    """
    N_i : tout sommet exposé a au plus 3qn voisins antérieurs.
    N*_i : N_i et v_i appartient à un triangle de G_i.
    """
    g, i = prefix.g, prefix.i
    limit = 3.0 * q * prefix.n
    in_N = True
    for v in range(i):
        nbrs = g.neighbors(v)
        backward = int(np.searchsorted(nbrs, v))
        if backward > limit:
            in_N = False
            break
    if not in_N or i == 0:
        return PrefixClass(in_N=in_N, in_N_star=False)
    last = i - 1
    adj = g.adjacency
    in_triangle = any(adj[last] & adj[u] for u in adj[last])
    return PrefixClass(in_N=True, in_N_star=in_triangle)


# ---------------------------------------------------------------------------
# Calculs exacts
# ---------------------------------------------------------------------------

def exact_X(prefix: ExposurePrefix, n: int, q: float, cap: Optional[int] = None) -> float:
    """
    X_i = E[s(G) | G_i], par sommation sur toutes les complétions pondérées
    par q^{arêtes}(1-q)^{non-arêtes}.
    """
    _check_q(q)
    if prefix.n != n:
        raise ParameterError(f"préfixe prévu pour n={prefix.n}, reçu n={n}")
    _check_mask_width(n)
    cap = settings.EXHAUSTIVE_SLOT_CAP if cap is None else cap
    free = prefix.unexposed_slots
    if free > cap:
        raise ParameterError(f"{free} paires non exposées (> {cap}) : énumération exhaustive impossible")

    low_bits = prefix.i * (prefix.i - 1) // 2
    base = graph_to_mask(prefix.g)
    total = 0.0
    for start in range(0, 1 << free, _CHUNK):
        completions = np.arange(start, min(start + _CHUNK, 1 << free), dtype=np.int64)
        ones = _popcount(completions)
        weights = (q ** ones) * ((1.0 - q) ** (free - ones))
        s = s_of_masks(n, base | (completions << low_bits))
        total += float(np.dot(weights, s))
    return total


def exact_martingale_path(g: Graph, q: float, cap: Optional[int] = None) -> List[float]:
    """[X_0, X_1, ..., X_n] le long de l'exposition de g."""
    n = g.n
    path = []
    for i in range(n + 1):
        prefix, _ = induced_remove(g, range(i, n))
        path.append(exact_X(ExposurePrefix(prefix, n), n, q, cap))
    return path


def exact_quadratic_variation(n: int, q: float) -> ExactQuadraticVariation:
    """
    E[V_n] exact par énumération de tous les graphes à n sommets, avec
    Var(s) pour comparaison (les incréments sont orthogonaux : E[V_n] = Var(s)).
    """
    _check_q(q)
    slots = n * (n - 1) // 2
    if slots > settings.EXHAUSTIVE_SLOT_CAP:
        raise ParameterError(f"{slots} paires (> {settings.EXHAUSTIVE_SLOT_CAP})")

    masks = np.arange(1 << slots, dtype=np.int64)
    ones = _popcount(masks)
    weights = (q ** ones) * ((1.0 - q) ** (slots - ones))
    s = s_of_masks(n, masks).astype(np.float64)

    # X_i indexé par les C(i,2) bits faibles
    levels: List[np.ndarray] = []
    for i in range(n + 1):
        low = i * (i - 1) // 2
        ws = (weights * s).reshape(1 << (slots - low), 1 << low).sum(axis=0)
        wl = weights.reshape(1 << (slots - low), 1 << low).sum(axis=0)
        levels.append(np.divide(ws, wl, out=np.zeros_like(ws), where=wl > 0))

    step_variances = []
    for i in range(1, n + 1):
        low_prev = (i - 1) * (i - 2) // 2
        low = i * (i - 1) // 2
        x_i = levels[i][masks & ((1 << low) - 1)]
        x_prev = levels[i - 1][masks & ((1 << low_prev) - 1)]
        step_variances.append(float(np.dot(weights, (x_i - x_prev) ** 2)))

    mean_s = float(np.dot(weights, s))
    var_s = float(np.dot(weights, (s - mean_s) ** 2))
    logger.debug(
        "Exact quadratic variation",
        extra={"extra_data": {"n": n, "q": q, "expected_vn": sum(step_variances), "var_s": var_s}},
    )
    return ExactQuadraticVariation(
        n=n, q=q,
        expected_vn=sum(step_variances),
        var_s=var_s,
        mean_s=mean_s,
        step_variances=step_variances,
    )


def exact_last_step(prefix_graph: Graph, q: float) -> LastStep:
    """
    Conditionne sur G_{n-1} = F et énumère les 2^{n-1} voisinages de v_n.

    s(G) = s(F) + 1 ssi le voisinage contient une arête xy de F telle que
    s(F - x - y) = s(F) ; sinon s(G) = s(F).
    """
    _check_q(q)
    m = prefix_graph.n
    if m > 20:
        raise ParameterError(f"2^{m} voisinages : préfixe trop grand")
    s_f = len(solve_triangle_packing(enumerate_triangles(prefix_graph))[0])

    good = []
    for x, y in prefix_graph.edge_tuples():
        rest, _ = induced_remove(prefix_graph, (x, y))
        if len(solve_triangle_packing(enumerate_triangles(rest))[0]) == s_f:
            good.append((1 << x) | (1 << y))

    neighborhoods = np.arange(1 << m, dtype=np.int64)
    up = np.zeros(neighborhoods.size, dtype=bool)
    for em in good:
        up |= (neighborhoods & em) == em
    ones = _popcount(neighborhoods)
    weights = (q ** ones) * ((1.0 - q) ** (m - ones))
    p_up = float(weights[up].sum())
    x_prev = s_f + p_up
    return LastStep(
        s_prefix=s_f,
        p_up=p_up,
        x_prev=x_prev,
        increments=((1.0 - p_up, p_up), (-p_up, 1.0 - p_up)),
        up_pairs=tuple(good),
    )


# ---------------------------------------------------------------------------
# Estimations Monte-Carlo
# ---------------------------------------------------------------------------

def _complete(prefix: ExposurePrefix, q: float, gen: np.random.Generator) -> Graph:
    """Complétion aléatoire : arêtes du préfixe + paires non exposées tirées avec probabilité q."""
    n, i = prefix.n, prefix.i
    fresh = sample_gnq(n, q, gen).edges()
    if fresh.size:
        fresh = fresh[fresh[:, 1] >= i]
    known = prefix.g.edges()
    return Graph.from_edges(n, np.concatenate([known, fresh]) if known.size else fresh)


def estimate_X(
    prefix: ExposurePrefix,
    n: int,
    q: float,
    inner_samples: int,
    rng: RandomLike,
) -> MartingaleEstimate:
    """Moyenne empirique de s sur des complétions aléatoires ; erreur type = écart-type / √k."""
    _check_q(q)
    if prefix.n != n:
        raise ParameterError(f"préfixe prévu pour n={prefix.n}, reçu n={n}")
    gen = as_generator(rng)
    if prefix.i == n or q == 0.0:
        # complétion déterministe
        value = max_triangle_matching(_complete(prefix, 0.0, gen)).size
        return MartingaleEstimate(value=float(value), std_error=0.0, inner_samples=inner_samples)

    values = np.array(
        [max_triangle_matching(_complete(prefix, q, gen)).size for _ in range(inner_samples)],
        dtype=np.float64,
    )
    std_error = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return MartingaleEstimate(value=float(values.mean()), std_error=std_error, inner_samples=inner_samples)


def _path_estimates(
    g: Graph,
    q: float,
    inner_samples: int,
    source: RandomSource,
) -> List[MartingaleEstimate]:
    n = g.n
    estimates = []
    for i in range(n + 1):
        prefix, _ = induced_remove(g, range(i, n))
        estimates.append(estimate_X(ExposurePrefix(prefix, n), n, q, inner_samples, source.child(i)))
    return estimates


def estimate_quadratic_variation(
    n: int,
    q: float,
    outer_trials: int,
    inner_samples: int,
    rng: RandomSource,
) -> float:
    """
    Estimation de E[V_n] : moyenne sur des chemins d'exposition de
    Σ_i [(X̂_i - X̂_{i-1})² - se_i² - se_{i-1}²], les variances des
    estimateurs étant retranchées.
    """
    _check_q(q)
    if q in (0.0, 1.0):
        return 0.0
    totals = []
    for trial in range(outer_trials):
        source = rng.child(trial)
        g = sample_gnq(n, q, source.child(0))
        est = _path_estimates(g, q, inner_samples, source.child(1))
        total = 0.0
        for prev, cur in zip(est, est[1:]):
            total += (cur.value - prev.value) ** 2 - cur.std_error ** 2 - prev.std_error ** 2
        totals.append(total)
    return float(np.mean(totals)) if totals else 0.0


def martingale_path_records(
    n: int,
    q: float,
    inner_samples: int,
    rng: RandomSource,
) -> List[MartingaleRecord]:
    """Un chemin échantillonné : incrément estimé, erreur type et classe de chaque préfixe."""
    g = sample_gnq(n, q, rng.child(0))
    est = _path_estimates(g, q, inner_samples, rng.child(1))
    records = []
    for i in range(1, n + 1):
        prefix, _ = induced_remove(g, range(i, n))
        label = classify_prefix(ExposurePrefix(prefix, n), q).label
        records.append(
            MartingaleRecord(
                i=i,
                increment_estimate=est[i].value - est[i - 1].value,
                std_error=math.sqrt(est[i].std_error ** 2 + est[i - 1].std_error ** 2),
                prefix_class=label,
            )
        )
    return records


def n_star_frequency(n: int, q: float, trials: int, rng: RandomSource) -> Dict[str, float]:
    """
    Fréquence empirique de G_i ∈ N*_i le long de chemins d'exposition,
    moyennée sur i, comparée à la borne 3n²q³ par pas.
    """
    _check_q(q)
    hits = 0
    checked = 0
    for trial in range(trials):
        g = sample_gnq(n, q, rng.child(trial))
        for i in range(1, n + 1):
            prefix, _ = induced_remove(g, range(i, n))
            hits += classify_prefix(ExposurePrefix(prefix, n), q).in_N_star
            checked += 1
    return {
        "frequency": hits / checked if checked else 0.0,
        "bound": 3.0 * n * n * q ** 3,
        "checked": checked,
    }


def increment_bound_check(n: int, q: float, trials: int, rng: RandomSource) -> Dict[str, object]:
    """
    Dernier pas exact sur des graphes échantillonnés : |X_n - X_{n-1}| <= 1
    toujours, et <= 7n²q³ quand G_{n-1} ∈ N_{n-1} et G_n ∈ N_n ∖ N*_n.
    Les violations sont rendues avec le préfixe témoin.
    """
    bound = 7.0 * n * n * q ** 3
    violations = []
    max_increment = 0.0
    eligible = 0
    for trial in range(trials):
        g = sample_gnq(n, q, rng.child(trial))
        prev, _ = induced_remove(g, [n - 1])
        step = exact_last_step(prev, q)
        s_full = max_triangle_matching(g).size
        increment = s_full - step.x_prev
        max_increment = max(max_increment, abs(increment))
        cls_prev = classify_prefix(ExposurePrefix(prev, n), q)
        cls_full = classify_prefix(ExposurePrefix(g, n), q)
        if cls_prev.in_N and cls_full.in_N and not cls_full.in_N_star:
            eligible += 1
            if abs(increment) > bound:
                violations.append({"trial": trial, "increment": increment, "edges": g.edge_tuples()})
    experiment_logger.info(
        "Increment bound checked",
        extra={"extra_data": {"n": n, "q": q, "trials": trials, "eligible": eligible, "violations": len(violations)}},
    )
    return {
        "trials": trials,
        "max_abs_increment": max_increment,
        "eligible": eligible,
        "bound": bound,
        "violations": violations,
    }


def freedman_bound(t: float, sigma2: float, r: float) -> float:
    """exp(-t² / (2σ² + rt))"""
    for name, value in (("t", t), ("sigma2", sigma2), ("r", r)):
        if not value > 0:
            raise ParameterError(f"{name} doit être > 0 (reçu {value})")
    return math.exp(-t * t / (2.0 * sigma2 + r * t))


def theorem_concentration_radius(n: int, q: float, eps: float) -> float:
    """3·(n³q³ ln(1/ε))^{1/2}"""
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"ε doit appartenir à ]0,1[ (reçu {eps})")
    return 3.0 * math.sqrt(n ** 3 * q ** 3 * math.log(1.0 / eps))
