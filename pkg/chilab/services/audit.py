"""
Service d'audit pseudo-aléatoire : propriétés de l'événement R, événements
D(T), ensembles Λ₁(T), Λ₂(T), compteur Z(T, A) et bornes fermées
(méthode de suppression, Kim–Vu).

Les ensembles T de taille 1 et 2 sont traités exhaustivement quelle que soit
la taille du graphe : les paires sans voisin commun ni arête se comptent par
tri des degrés, seules les paires « spéciales » sont corrigées une à une.
"""

import logging
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from chilab.core.exceptions import ParameterError
from chilab.core.logging import experiment_logger
from chilab.core.random import RandomLike, RandomSource, as_generator
from chilab.models.graph import Graph, VertexSet
from chilab.models.triangle import Triangle
from chilab.schemas.report import DAuditReport, Omega0Choice, RAuditReport, SamplingPlan, SizeBucket
from chilab.services.graph_core import neighborhood
from chilab.services.triangles import enumerate_triangles

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# ω₀ et bornes fermées
# ---------------------------------------------------------------------------

def choose_omega0(n: int, q: float) -> Omega0Choice:
    """
    Plus grande valeur compatible avec nq >= ω₀³ log n et n²q³ <= e^{-ω₀},
    plancher 1. Si n²q³ >= 1 la seconde contrainte est impossible : seule la
    première est utilisée et `regime_warning` est levé.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q doit appartenir à ]0,1[ (reçu {q})")
    if n < 3:
        raise ParameterError(f"n doit être >= 3 (reçu {n})")
    first = (n * q / math.log(n)) ** (1.0 / 3.0)
    z = n * n * q ** 3
    if z >= 1.0:
        return Omega0Choice(value=max(1.0, first), n=n, q=q, regime_warning=True)
    return Omega0Choice(value=max(1.0, min(first, math.log(1.0 / z))), n=n, q=q)


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ParameterError(f"{name} doit être > 0 (reçu {value})")


def deletion_bound(r: float, t: float, k: float, ex: float) -> float:
    """exp(-rt / (k(2E[X] + t)))"""
    _check_positive(r=r, t=t, k=k, ex=ex)
    return math.exp(-r * t / (k * (2.0 * ex + t)))


def kimvu_bound(n: int, q: float, delta: float, c: float) -> float:
    """exp(-c·n²q²), la constante c = c(δ) étant fournie par l'appelant."""
    _check_positive(n=n, delta=delta, c=c)
    if q < 0:
        raise ParameterError(f"q doit être >= 0 (reçu {q})")
    return math.exp(-c * n * n * q * q)


def z_expectation_bound(n: int, q: float, a_size: int) -> float:
    """E[|Z(T, A)|] <= q³·|A|·n²"""
    return q ** 3 * a_size * n * n


def deletion_parameters(n: int, q: float, omega0: float, eps: float, t_size: int) -> Dict[str, float]:
    """Paramètres de la méthode de suppression : t = εnq|T|/4, r = 4ω₀|T| log n, k = 3."""
    return {
        "k": 3,
        "t": eps * n * q * t_size / 4.0,
        "r": 4.0 * omega0 * t_size * math.log(n),
    }


# ---------------------------------------------------------------------------
# Λ₁, Λ₂, Z
# ---------------------------------------------------------------------------

def count_lambda1(g: Graph, t: Iterable[int]) -> VertexSet:
    """Sommets de N(T) contenus dans un triangle qui rencontre T."""
    members = g.check_vertices(t)
    adj = g.adjacency
    found = set()
    for y in neighborhood(g, members):
        if any(adj[x] & adj[y] for x in adj[y] & members):
            found.add(y)
    return frozenset(found)


def count_lambda2(g: Graph, t: Iterable[int]) -> VertexSet:
    """Sommets de N(T) contenus dans un triangle qui évite T."""
    members = g.check_vertices(t)
    adj = g.adjacency
    found = set()
    for y in neighborhood(g, members):
        outside = adj[y] - members
        if any((adj[y] & adj[z]) - members for z in outside):
            found.add(y)
    return frozenset(found)


def count_Z(g: Graph, t: Iterable[int], a: Iterable[int]) -> int:
    """Triangles (non ordonnés) ayant un sommet dans A et aucun dans T."""
    t_set = g.check_vertices(t)
    a_set = g.check_vertices(a)
    if t_set & a_set:
        raise ParameterError("A et T doivent être disjoints")
    adj = g.adjacency
    found = set()
    for x in a_set:
        outside = adj[x] - t_set
        for y in outside:
            for z in (adj[x] & adj[y]) - t_set:
                found.add(Triangle.of(x, y, z))
    return len(found)


# ---------------------------------------------------------------------------
# Paires exhaustives
# ---------------------------------------------------------------------------

_TRIU_CACHE: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}


def _triu(d: int) -> Tuple[np.ndarray, np.ndarray]:
    if d not in _TRIU_CACHE:
        _TRIU_CACHE[d] = np.triu_indices(d, k=1)
    return _TRIU_CACHE[d]


def _special_pairs(g: Graph, weight: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """
    Paires x < y adjacentes ou ayant un voisin commun.

    Returns:
        dict avec `x`, `y`, `codeg` (|N(x) ∩ N(y)|), `codeg_w` (voisins communs
        pondérés par `weight`) et `adjacent`.
    """
    n = g.n
    keys, wts = [], []
    for w in range(n):
        nbrs = g.neighbors(w).astype(np.int64)
        if nbrs.size < 2:
            continue
        i, j = _triu(nbrs.size)
        keys.append(nbrs[i] * n + nbrs[j])
        if weight is not None:
            wts.append(np.full(i.size, weight[w], dtype=np.int64))

    edges = g.edges()
    edge_keys = edges[:, 0] * n + edges[:, 1] if edges.size else np.empty(0, dtype=np.int64)
    if keys:
        raw = np.concatenate(keys)
        common, inverse, counts = np.unique(raw, return_inverse=True, return_counts=True)
        weighted = (
            np.bincount(inverse, weights=np.concatenate(wts), minlength=common.size).astype(np.int64)
            if weight is not None else np.zeros(common.size, dtype=np.int64)
        )
    else:
        common = np.empty(0, dtype=np.int64)
        counts = weighted = np.empty(0, dtype=np.int64)

    all_keys = np.union1d(common, edge_keys)
    codeg = np.zeros(all_keys.size, dtype=np.int64)
    codeg_w = np.zeros(all_keys.size, dtype=np.int64)
    if common.size:
        pos = np.searchsorted(all_keys, common)
        codeg[pos] = counts
        codeg_w[pos] = weighted
    adjacent = np.zeros(all_keys.size, dtype=bool)
    if edge_keys.size:
        adjacent[np.searchsorted(all_keys, edge_keys)] = True
    return {
        "x": all_keys // max(n, 1),
        "y": all_keys % max(n, 1),
        "codeg": codeg,
        "codeg_w": codeg_w,
        "adjacent": adjacent,
    }


def _pairs_with_sum_between(values: np.ndarray, lo: float, hi: float) -> int:
    """Nombre de paires i < j avec lo <= v_i + v_j <= hi (valeurs entières)."""
    v = np.sort(values.astype(np.int64))
    if v.size < 2:
        return 0
    lo_i = -np.inf if lo == -np.inf else math.ceil(lo)
    hi_i = np.inf if hi == np.inf else math.floor(hi)
    left = np.searchsorted(v, lo_i - v, side="left")
    right = np.searchsorted(v, hi_i - v, side="right")
    ordered = int((right - left).sum())
    self_pairs = int(np.count_nonzero((2 * v >= lo_i) & (2 * v <= hi_i)))
    return (ordered - self_pairs) // 2


def _exhaustive_pairs(
    values: np.ndarray,
    actual: np.ndarray,
    naive: np.ndarray,
    lo: float,
    hi: float,
) -> int:
    """Paires dont la valeur exacte est dans [lo, hi]."""
    inside = _pairs_with_sum_between(values, lo, hi)
    within = lambda arr: (arr >= lo) & (arr <= hi)
    return inside + int(np.count_nonzero(within(actual))) - int(np.count_nonzero(within(naive)))


# ---------------------------------------------------------------------------
# Tirages d'ensembles T
# ---------------------------------------------------------------------------

def size_grid(start: int, stop: int) -> List[int]:
    """Grille géométrique {start, 2·start, ...} bornée par stop, stop inclus."""
    sizes = []
    size = max(1, start)
    while size <= stop:
        sizes.append(size)
        size *= 2
    if stop >= max(1, start) and (not sizes or sizes[-1] != stop):
        sizes.append(stop)
    return sizes


def _stream(sampler: RandomLike, key: int) -> np.random.Generator:
    if isinstance(sampler, RandomSource):
        return sampler.child(key).generator()
    return as_generator(sampler)


def _sampled_bucket(
    g: Graph,
    size: int,
    samples: int,
    gen: np.random.Generator,
    violates: Callable[[VertexSet, VertexSet], bool],
) -> SizeBucket:
    violations = 0
    for _ in range(samples):
        t = frozenset(gen.choice(g.n, size=size, replace=False).tolist())
        if violates(t, neighborhood(g, t)):
            violations += 1
    return SizeBucket(size=size, checked=samples, violations=violations, rate=violations / samples)


def _bucket(size: int, checked: int, violations: int, exhaustive: bool) -> SizeBucket:
    return SizeBucket(
        size=size,
        checked=checked,
        violations=violations,
        rate=violations / checked if checked else 0.0,
        exhaustive=exhaustive,
    )


# ---------------------------------------------------------------------------
# Événement R
# ---------------------------------------------------------------------------

def audit_R(
    g: Graph,
    q: float,
    omega0: float,
    sampler: RandomLike,
    samples_per_size: int,
) -> RAuditReport:
    """
    Propriétés (i) et (ii) exhaustives ; (iii) et (iv) exhaustives pour
    |T| <= 2, puis par tirage uniforme sur une grille de tailles.
    """
    n = g.n
    triangles = enumerate_triangles(g)
    x3 = len(triangles)
    x3_bound = n ** 3 * q ** 3

    # e(N(x)) = nombre de triangles contenant x
    load = np.zeros(n, dtype=np.int64)
    for t in triangles:
        load[list(t)] += 1
    max_edges = int(load.max()) if n else 0
    edges_bound = omega0 * math.log(n) if n > 1 else 0.0

    degrees = g.degrees().astype(np.int64)
    special = _special_pairs(g)
    max_codeg = int(special["codeg"].max()) if special["codeg"].size else 0

    lo_iii, hi_iii = (lambda size: n * q * size / 2.0), (lambda size: 3.0 * n * q * size / 2.0)
    prop_iii: List[SizeBucket] = []

    # |T| = 1
    singles = np.count_nonzero((degrees < lo_iii(1)) | (degrees > hi_iii(1)))
    prop_iii.append(_bucket(1, n, int(singles), True))

    # |T| = 2 : |N(T)| = d_x + d_y - codeg - 2·[xy arête]
    total_pairs = n * (n - 1) // 2
    if total_pairs:
        naive = degrees[special["x"]] + degrees[special["y"]]
        actual = naive - special["codeg"] - 2 * special["adjacent"].astype(np.int64)
        inside = _exhaustive_pairs(degrees, actual, naive, lo_iii(2), hi_iii(2))
        prop_iii.append(_bucket(2, total_pairs, total_pairs - inside, True))

    inv_q = int(math.floor(1.0 / q)) if q > 0 else n
    grid_iii = [s for s in size_grid(4, min(inv_q, n))]
    for k, size in enumerate(grid_iii):
        prop_iii.append(
            _sampled_bucket(
                g, size, samples_per_size, _stream(sampler, 3_000 + k),
                lambda t, nt: not lo_iii(len(t)) <= len(nt) <= hi_iii(len(t)),
            )
        )

    # (iv) : 1 <= q|T| <= ω₀
    prop_iv: List[SizeBucket] = []
    if q > 0:
        start = int(math.ceil(1.0 / q))
        stop = min(int(math.floor(omega0 / q)), n)
        for k, size in enumerate(size_grid(start, stop)):
            prop_iv.append(
                _sampled_bucket(
                    g, size, samples_per_size, _stream(sampler, 4_000 + k),
                    lambda t, nt: len(nt) < (1.0 - math.exp(-q * len(t) / 2.0)) * n,
                )
            )

    report = RAuditReport(
        n=n,
        q=q,
        omega0=omega0,
        x3=x3,
        x3_bound=x3_bound,
        prop_i=x3 <= x3_bound,
        max_neighborhood_edges=max_edges,
        neighborhood_edges_bound=edges_bound,
        prop_ii_edges=max_edges <= edges_bound,
        max_codegree=max_codeg,
        codegree_bound=omega0,
        prop_ii_codeg=max_codeg <= omega0,
        prop_iii=prop_iii,
        prop_iv=prop_iv,
        sampling_plan=SamplingPlan(sizes=grid_iii + [b.size for b in prop_iv], samples_per_size=samples_per_size),
    )
    experiment_logger.info(
        "Event R audited",
        extra={"extra_data": {"n": n, "q": q, "omega0": omega0, "x3": x3, "prop_i": report.prop_i}},
    )
    return report


# ---------------------------------------------------------------------------
# Événements D(T)
# ---------------------------------------------------------------------------

def d_event(in_s: int, size: int, delta: float) -> bool:
    """D(T) : |N(T) ∩ S| > δ|N(T)|, comparé en arithmétique rationnelle exacte."""
    return Fraction(in_s) > Fraction(delta) * size


def _sampled_d_buckets(
    g: Graph,
    s_set: VertexSet,
    delta: float,
    sizes: Sequence[int],
    samples: int,
    sampler: RandomLike,
    offset: int,
) -> List[SizeBucket]:
    return [
        _sampled_bucket(
            g, size, samples, _stream(sampler, offset + k),
            lambda t, nt: d_event(len(nt & s_set), len(nt), delta),
        )
        for k, size in enumerate(sizes)
    ]


def audit_D(
    g: Graph,
    s: Iterable[int],
    delta: float,
    sampler: RandomLike,
    plan: SamplingPlan,
) -> DAuditReport:
    """
    Taux de réalisation de D(T) par taille de T : exhaustif pour |T| <= 2,
    tirages uniformes pour les tailles de `plan.sizes`.
    """
    n = g.n
    s_set = g.check_vertices(s)
    in_s = np.zeros(n, dtype=np.int64)
    if s_set:
        in_s[np.fromiter(s_set, dtype=np.int64)] = 1
    degrees = g.degrees().astype(np.int64)
    s_degrees = np.zeros(n, dtype=np.int64)
    for v in range(n):
        s_degrees[v] = int(in_s[g.neighbors(v)].sum()) if g.degree(v) else 0

    frac = Fraction(delta)
    num, den = frac.numerator, frac.denominator
    buckets: List[SizeBucket] = []

    # D(T) ⇔ den·|N ∩ S| - num·|N| > 0 ; valeur additive sur les paires génériques
    score = den * s_degrees - num * degrees
    buckets.append(_bucket(1, n, int(np.count_nonzero(score > 0)), True))

    total_pairs = n * (n - 1) // 2
    if total_pairs:
        special = _special_pairs(g, weight=in_s)
        x, y = special["x"], special["y"]
        adjacent = special["adjacent"].astype(np.int64)
        size_nt = degrees[x] + degrees[y] - special["codeg"] - 2 * adjacent
        size_ns = s_degrees[x] + s_degrees[y] - special["codeg_w"] - adjacent * (in_s[x] + in_s[y])
        actual = den * size_ns - num * size_nt
        naive = score[x] + score[y]
        hits = _exhaustive_pairs(score, actual, naive, 1, np.inf)
        buckets.append(_bucket(2, total_pairs, hits, True))

    sizes = [size for size in plan.sizes if 2 < size <= n]
    buckets.extend(_sampled_d_buckets(g, s_set, delta, sizes, plan.samples_per_size, sampler, 5_000))
    return DAuditReport(delta=delta, s_size=len(s_set), buckets=buckets, sampling_plan=plan)


def default_plan(n: int, q: float, samples_per_size: int) -> SamplingPlan:
    """Grille {4, 8, ..., ⌊1/q⌋} bornée par n."""
    stop = min(int(math.floor(1.0 / q)), n) if q > 0 else n
    return SamplingPlan(sizes=size_grid(4, stop), samples_per_size=samples_per_size)


def audit_large_sets(
    g: Graph,
    s: Iterable[int],
    delta: float,
    q: float,
    sampler: RandomLike,
    samples: int,
) -> DAuditReport:
    """
    D(T) pour 1/q < |T| <= n/2 : sous R, |S| <= 3·X₃ y rend D(T) impossible.
    Le rapport porte la borne 3·X₃ à côté des taux observés.
    """
    if q <= 0:
        raise ParameterError("q doit être > 0")
    n = g.n
    s_set = g.check_vertices(s)
    sizes = size_grid(int(math.floor(1.0 / q)) + 1, n // 2)
    plan = SamplingPlan(exhaustive_max_size=0, sizes=sizes, samples_per_size=samples)
    return DAuditReport(
        delta=delta,
        s_size=len(s_set),
        buckets=_sampled_d_buckets(g, s_set, delta, sizes, samples, sampler, 6_000),
        sampling_plan=plan,
        s_bound=3 * len(enumerate_triangles(g)),
    )
