"""
Service de couplages pour la non-concentration de s(G(n,q)).

- triangle planté : Q = G(n+3,q) + un triangle sur un triplet T uniforme ;
  Q - T suit G(n,q) et s(Q) >= s(Q - T) + 1.
- saupoudrage : G(n',q_hi) = G(n',q_lo) ∪ G(n',x), x = (q_hi - q_lo)/(1 - q_lo).
- chaîne n_0 < n_1 < ... <= 2n_0 avec n_{k+1} = n_k + α(n_k).
"""

import logging
import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from chilab.core.exceptions import ParameterError
from chilab.core.logging import experiment_logger
from chilab.core.parallel import run_trials
from chilab.core.random import RandomLike, RandomSource, as_generator
from chilab.models.family import EdgeProbability, QFamily
from chilab.models.graph import Graph, VertexSet
from chilab.schemas.report import CouplingOutcome
from chilab.services.graph_core import induced_remove, max_degree, sample_gnq, union_graphs
from chilab.services.triangles import count_x, max_triangle_matching

logger = logging.getLogger(__name__)

# pente log-log de r(n) en deçà de laquelle r est jugée décroissante
SMOOTH_SLOPE_TOLERANCE = 0.02


# ---------------------------------------------------------------------------
# Fonctions lisses et α(n)
# ---------------------------------------------------------------------------

def smoothness_score(f: EdgeProbability, n: int) -> float:
    """r(n) = |q(n+1) - q(n)| · q(n)² · n³ ; f est lisse ssi r(n) -> 0."""
    if n < 2:
        raise ParameterError(f"n doit être >= 2 (reçu {n})")
    qn = f.q(n)
    return abs(f.q(n + 1) - qn) * qn * qn * n ** 3


def smoothness_verdict(f: EdgeProbability, sizes: Sequence[int]) -> Dict[str, object]:
    """
    Évalue r sur `sizes` et ajuste la pente de log r contre log n.
    Lisse seulement si la pente est franchement négative.
    """
    sizes = sorted(sizes)
    if len(sizes) < 2:
        raise ParameterError("au moins deux tailles sont nécessaires")
    scores = [smoothness_score(f, n) for n in sizes]
    positive = [(n, r) for n, r in zip(sizes, scores) if r > 0]
    if len(positive) < 2:
        slope = -math.inf
    else:
        x = np.log([n for n, _ in positive])
        y = np.log([r for _, r in positive])
        slope = float(np.polyfit(x, y, 1)[0])
    return {
        "sizes": sizes,
        "scores": scores,
        "slope": slope,
        "smooth": slope < -SMOOTH_SLOPE_TOLERANCE,
    }


def power_family_is_smooth(family: QFamily) -> bool:
    """Pour q = c·n^(-a) : lisse ssi a > 2/3."""
    return Fraction(family.exponent).limit_denominator(10 ** 9) > Fraction(2, 3)


def alpha(n: int, eps: float, q: float) -> int:
    """α(n) = 3⌊ε n^{3/2} q^{3/2}⌋"""
    if n < 0 or eps < 0 or q < 0:
        raise ParameterError("α(n) exige des entrées positives")
    # la racine est extraite sur (ε² n³ q³) pour éviter l'arrondi de n^{3/2}·q^{3/2}
    inner = Decimal(eps) ** 2 * Decimal(n) ** 3 * Decimal(q) ** 3
    return 3 * int(inner.sqrt())


# ---------------------------------------------------------------------------
# Triangle planté
# ---------------------------------------------------------------------------

def plant_triangle(g: Graph, rng: RandomLike) -> Tuple[Graph, VertexSet]:
    """Q = g + les trois arêtes d'un triplet T tiré uniformément."""
    if g.n < 3:
        raise ParameterError(f"impossible de planter un triangle sur {g.n} sommets")
    gen = as_generator(rng)
    a, b, c = sorted(int(v) for v in gen.choice(g.n, size=3, replace=False))
    planted = Graph.from_edges(g.n, [(a, b), (a, c), (b, c)])
    return union_graphs(g, planted), frozenset((a, b, c))


def expected_triangles(n: int, q: float) -> Fraction:
    """E[K3(G(n,q))] = C(n,3)·q³, exact."""
    return math.comb(n, 3) * Fraction(q) ** 3


def planted_density_ratio(h: Graph, n_plus_3: int, q: float) -> float:
    """P_Q(h) / P(h) = K3(h) / (C(n+3,3)·q³)."""
    if q <= 0:
        raise ParameterError("q = 0 : le rapport de densité n'est pas défini")
    if h.n != n_plus_3:
        raise ParameterError(f"graphe à {h.n} sommets, attendu {n_plus_3}")
    expectation = expected_triangles(n_plus_3, q)
    if expectation == 0:
        raise ParameterError("E[K3] = 0")
    return float(count_x(h) / expectation)


def tv_bound_planted(n: int, q: float) -> float:
    """E[K3(G(n+3,q))]^{-1/2}"""
    expectation = expected_triangles(n + 3, q)
    if expectation <= 0:
        raise ParameterError("E[K3] = 0 : borne en variation totale indéfinie")
    with localcontext() as ctx:
        ctx.prec = 40
        value = Decimal(expectation.numerator) / Decimal(expectation.denominator)
        return float(1 / value.sqrt())


def _planted_trial(trial: int, n: int, q: float, seed: int, budget: Optional[int]) -> CouplingOutcome:
    source = RandomSource(seed, stream_id=trial)
    g = sample_gnq(n + 3, q, source.child(0))
    planted, t = plant_triangle(g, source.child(1))
    rest, _ = induced_remove(planted, t)
    s_large = max_triangle_matching(planted, budget).size
    s_small = max_triangle_matching(rest, budget).size
    success = s_large >= s_small + 1
    if not success:
        # impossible : le triangle planté est disjoint de Q - T
        raise AssertionError(f"s(Q)={s_large} < s(Q-T)+1={s_small + 1} (essai {trial})")
    return CouplingOutcome(
        trial=trial,
        seed=seed,
        s_small=s_small,
        s_large=s_large,
        success=success,
        triangles=count_x(g),
        planted_triangles=count_x(planted),
        max_degree=max_degree(planted),
        # rapport évalué sur le graphe non planté du même flux
        density_ratio=planted_density_ratio(g, n + 3, q) if q > 0 else None,
    )


def _mean_se(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0.0, 0.0
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


def run_planted_coupling(
    n: int,
    q: float,
    trials: int,
    seed: int,
    threads: int = 1,
    budget: Optional[int] = None,
) -> Tuple[List[CouplingOutcome], Dict[str, object]]:
    """
    Couplage G(n,q) / G(n+3,q) par triangle planté.

    Le résumé donne la fréquence de s(Q) >= s(Q-T) + 1 (toujours 1), la borne
    en variation totale, et l'identité d'échantillonnage préférentiel :
    E_Q[K3(Q)] estimé directement et par E[K3(G)·K3(G)/E K3] sur les graphes non plantés.
    """
    outcomes = run_trials(_planted_trial, range(trials), threads=threads, n=n, q=q, seed=seed, budget=budget)
    frequency = sum(o.success for o in outcomes) / trials if trials else 0.0
    summary: Dict[str, object] = {"n": n, "q": q, "trials": trials, "success_frequency": frequency}

    if q > 0:
        tv = tv_bound_planted(n, q)
        planted_mean, planted_se = _mean_se([o.planted_triangles for o in outcomes])
        reweighted_mean, reweighted_se = _mean_se([o.triangles * o.density_ratio for o in outcomes])
        ratio_mean, ratio_se = _mean_se([o.density_ratio for o in outcomes])
        spread = math.hypot(planted_se, reweighted_se)
        summary.update(
            {
                "tv_bound": tv,
                "coupled_lower_bound": max(0.0, frequency - tv),
                "planted_mean_triangles": planted_mean,
                "planted_se": planted_se,
                "reweighted_mean_triangles": reweighted_mean,
                "reweighted_se": reweighted_se,
                "ratio_mean": ratio_mean,
                "ratio_se": ratio_se,
                "identity_within_4se": abs(planted_mean - reweighted_mean) <= 4 * spread if spread > 0 else planted_mean == reweighted_mean,
            }
        )
    experiment_logger.info("Planted coupling finished", extra={"extra_data": summary})
    return outcomes, summary


def run_planted_chain(
    n: int,
    q: float,
    steps: int,
    rng: RandomLike,
    budget: Optional[int] = None,
) -> Dict[str, object]:
    """
    Chaîne complète : à chaque pas, trois sommets neufs reliés aux anciens avec
    probabilité q et entre eux par un triangle planté. s croît d'au moins 1 par
    pas ; la loi finale est à distance au plus Σ_k E[K3]^{-1/2} de G(n+3·steps, q).
    """
    if steps < 0:
        raise ParameterError(f"nombre de pas négatif : {steps}")
    gen = as_generator(rng)
    g = sample_gnq(n, q, gen)
    edges = [g.edges()]
    size = n
    s_values = [max_triangle_matching(g, budget).size]
    tv_total = 0.0
    for _ in range(steps):
        new = np.arange(size, size + 3)
        links = []
        for v in new:
            old = np.flatnonzero(gen.random(size) < q)
            links.append(np.stack([old, np.full(old.size, v)], axis=1))
        links.append(np.array([[new[0], new[1]], [new[0], new[2]], [new[1], new[2]]]))
        edges.extend(links)
        if q > 0:
            tv_total += tv_bound_planted(size, q)
        size += 3
        current = Graph.from_edges(size, np.concatenate(edges))
        s_values.append(max_triangle_matching(current, budget).size)
    increments = [b - a for a, b in zip(s_values, s_values[1:])]
    return {
        "n": n,
        "q": q,
        "steps": steps,
        "s": s_values,
        "min_increment": min(increments) if increments else None,
        "gain": s_values[-1] - s_values[0],
        "tv_total": min(1.0, tv_total),
    }


# ---------------------------------------------------------------------------
# Saupoudrage
# ---------------------------------------------------------------------------

def sprinkle_x(q_lo: float, q_hi: float) -> float:
    """x = (q_hi - q_lo)/(1 - q_lo), 0 si q_hi <= q_lo."""
    for name, value in (("q_lo", q_lo), ("q_hi", q_hi)):
        if not 0.0 <= value < 1.0:
            raise ParameterError(f"{name} doit appartenir à [0,1[ (reçu {value})")
    if q_hi <= q_lo:
        return 0.0
    return (q_hi - q_lo) / (1.0 - q_lo)


def sprinkle_union_identity(q_lo: float, q_hi: float) -> bool:
    """Vérifie exactement q_lo + x(1 - q_lo) = q_hi pour x rationnel."""
    lo, hi = Fraction(q_lo), Fraction(q_hi)
    if hi <= lo:
        return True
    x = (hi - lo) / (1 - lo)
    return lo + x * (1 - lo) == hi


def new_triangle_expectation(h: Graph, x: float) -> float:
    """
    E[|K3(H ∪ G(n,x)) ∖ K3(H)| | H] = T0·x³ + T1·x² + T2·x,
    T_k étant le nombre de triplets portant exactement k arêtes de H.
    """
    n = h.n
    t3 = count_x(h)
    degrees = h.degrees().astype(np.int64)
    cherries = int((degrees * (degrees - 1) // 2).sum())
    t2 = cherries - 3 * t3
    t1 = h.edge_count * (n - 2) - 2 * t2 - 3 * t3 if n >= 2 else 0
    t0 = math.comb(n, 3) - t1 - t2 - t3
    xf = Fraction(x)
    return float(t0 * xf ** 3 + t1 * xf ** 2 + t2 * xf)


def _sprinkle_trial(
    trial: int,
    n_prime: int,
    q_n: float,
    q_nprime: float,
    eps: float,
    seed: int,
    degree_cap: float,
    triangle_cap: float,
    s_cap: float,
    budget: Optional[int],
) -> CouplingOutcome:
    source = RandomSource(seed, stream_id=trial)
    h = sample_gnq(n_prime, q_nprime, source.child(0))
    x = sprinkle_x(q_nprime, q_n)
    g = union_graphs(h, sample_gnq(n_prime, x, source.child(1))) if x > 0 else h
    t_h, t_g = count_x(h), count_x(g)
    new = t_g - t_h
    s_h = max_triangle_matching(h, budget).size
    s_g = max_triangle_matching(g, budget).size
    if s_g - s_h > new:
        raise AssertionError(f"s(G)-s(H)={s_g - s_h} > {new} nouveaux triangles (essai {trial})")
    delta = max_degree(h)
    return CouplingOutcome(
        trial=trial,
        seed=seed,
        s_small=s_h,
        s_large=s_g,
        success=s_g <= s_h + s_cap,
        new_triangles=new,
        expected_new_triangles=new_triangle_expectation(h, x),
        max_degree=delta,
        triangles=t_h,
        degree_event=delta <= degree_cap,
        triangle_event=new <= triangle_cap,
        s_event=s_g <= s_h + s_cap,
    )


def run_sprinkle_coupling(
    n_prime: int,
    q_n: float,
    q_nprime: float,
    trials: int,
    eps: float,
    seed: int,
    n: Optional[int] = None,
    threads: int = 1,
    budget: Optional[int] = None,
) -> Tuple[List[CouplingOutcome], Dict[str, object]]:
    """
    Couplage G(n',q_n) / G(n',q_n') par saupoudrage.

    Événements par essai : Δ(H) <= 2nq_n, nouveaux triangles <= ε³d^{3/2}
    (d = 2nq_n), s(G) <= s(H) + εα(n). Sans `n`, n = n'.
    """
    if q_n < q_nprime:
        raise ParameterError(f"q_n={q_n} < q_n'={q_nprime} : rien à saupoudrer")
    base = n_prime if n is None else n
    d = 2.0 * base * q_n
    caps = {
        "degree_cap": d,
        "triangle_cap": eps ** 3 * d ** 1.5,
        "s_cap": eps * alpha(base, eps, q_n),
    }
    outcomes = run_trials(
        _sprinkle_trial,
        range(trials),
        threads=threads,
        n_prime=n_prime,
        q_n=q_n,
        q_nprime=q_nprime,
        eps=eps,
        seed=seed,
        budget=budget,
        **caps,
    )

    gaps = [o.new_triangles - o.expected_new_triangles for o in outcomes]
    gap_mean, gap_se = _mean_se(gaps)
    summary: Dict[str, object] = {
        "n": base,
        "n_prime": n_prime,
        "q_n": q_n,
        "q_nprime": q_nprime,
        "x": sprinkle_x(q_nprime, q_n),
        "union_identity": sprinkle_union_identity(q_nprime, q_n),
        "trials": trials,
        **caps,
        "degree_frequency": _frequency(o.degree_event for o in outcomes),
        "triangle_frequency": _frequency(o.triangle_event for o in outcomes),
        "s_frequency": _frequency(o.s_event for o in outcomes),
        "s_gap_bounded_frequency": _frequency(o.s_large - o.s_small <= o.new_triangles for o in outcomes),
        "new_triangle_gap_mean": gap_mean,
        "new_triangle_gap_se": gap_se,
        "new_triangles_within_3se": abs(gap_mean) <= 3 * gap_se if gap_se > 0 else gap_mean == 0,
    }
    experiment_logger.info("Sprinkle coupling finished", extra={"extra_data": summary})
    return outcomes, summary


def _frequency(flags) -> float:
    values = list(flags)
    return sum(bool(v) for v in values) / len(values) if values else 1.0


# ---------------------------------------------------------------------------
# Chaîne n_0 < n_1 < ... <= 2n_0
# ---------------------------------------------------------------------------

def chain_schedule(n0: int, family: EdgeProbability, eps: float) -> List[int]:
    """n_k = n_{k-1} + α(n_{k-1}), tant que n_k <= 2n_0."""
    schedule = [n0]
    while True:
        current = schedule[-1]
        step = alpha(current, eps, family.q(current))
        if step == 0:
            raise ParameterError(f"α({current}) = 0 : la chaîne n'avance pas")
        if current + step > 2 * n0:
            return schedule
        schedule.append(current + step)


def shortest_interval(values: Sequence[float], mass: float) -> Tuple[float, float]:
    """Plus court intervalle [a, b] contenant au moins `mass` des valeurs."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    if arr.size == 0:
        raise ParameterError("aucune valeur")
    k = max(1, math.ceil(mass * arr.size))
    widths = arr[k - 1:] - arr[:arr.size - k + 1]
    start = int(np.argmin(widths))
    return float(arr[start]), float(arr[start + k - 1])


def _chain_trial(trial: int, size: int, q: float, seed: int, budget: Optional[int]) -> int:
    source = RandomSource(seed, stream_id=trial, path=(size,))
    return max_triangle_matching(sample_gnq(size, q, source), budget).size


def run_chain_experiment(
    n0: int,
    family: QFamily,
    eps: float,
    trials: int,
    seed: int,
    threads: int = 1,
    budget: Optional[int] = None,
) -> Dict[str, object]:
    """
    Parcourt la chaîne : à chaque n_k, intervalle [a, b] le plus court de masse
    1 - ε, comparé à εα(n_k) ; accroissements a_{n_{k+1}} - a_{n_k} contre
    (1/3 - 5ε)α(n_k) ; quantité de Markov E[s(n_K)]/(n_0/4) au dernier pas.
    """
    schedule = chain_schedule(n0, family, eps)
    rows = []
    samples = {}
    for size in schedule:
        q = family.q(size)
        values = run_trials(_chain_trial, range(trials), threads=threads, size=size, q=q, seed=seed, budget=budget)
        samples[size] = values
        a, b = shortest_interval(values, 1.0 - eps)
        rows.append(
            {
                "n": size,
                "q": q,
                "alpha": alpha(size, eps, q),
                "mean": float(np.mean(values)),
                "a": a,
                "b": b,
                "width": b - a,
                "width_bound": eps * alpha(size, eps, q),
            }
        )
    for prev, cur in zip(rows, rows[1:]):
        prev["next_increment"] = cur["a"] - prev["a"]
        prev["increment_target"] = (1.0 / 3.0 - 5.0 * eps) * prev["alpha"]

    last = rows[-1]
    final_values = samples[last["n"]]
    summary = {
        "n0": n0,
        "eps": eps,
        "schedule": schedule,
        "rows": rows,
        "markov_ratio": last["mean"] / (n0 / 4.0),
        "tail_frequency": sum(v >= n0 / 4.0 for v in final_values) / trials if trials else 0.0,
    }
    experiment_logger.info(
        "Chain experiment finished",
        extra={"extra_data": {"n0": n0, "steps": len(schedule), "markov_ratio": summary["markov_ratio"]}},
    )
    return summary
