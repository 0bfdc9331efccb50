"""Complexity functionals for random walks in random sceneries.

Words live on the visited sites of one walk path. Two words are compared by
the local-time-weighted Hamming distance ``(1/n) * sum_i N_i * [w_i != w'_i]``.

Masses are handled exactly. Symbol probabilities are turned into integer
weights ``k_i`` over a common denominator ``K = sum(k_i)``, so a word with
symbol counts ``c`` has mass ``prod(k_i**c_i) / K**m`` and every "mass
strictly above 1 - eps" test is an integer comparison.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.special import gammaln

from .hyperspace import AdmissiblePair
from .scenery import SceneryModel, SceneryWord
from .stable_laws import DomainError
from .walk_engine import OccupationField, min_local_time_over, scaled_range

LOG2E = 1.0 / math.log(2.0)
PHI_EXACT_LIMIT = 2**20
Q_EXACT_LIMIT = 2**16
K_EXACT_LIMIT = 2**12


class NotApplicable(DomainError):
    """The walk is outside the event a bound needs."""


@dataclass(frozen=True)
class ComplexityEstimate:
    n: int
    epsilon: float
    log2_phi: float
    log2_q_upper: float
    log2_q_exact: float | None
    log2_k_interval: tuple[float, float]


# --- exact arithmetic helpers --------------------------------------------------------

def integer_weights(probs: Sequence[float]) -> tuple[int, ...]:
    """Smallest integers proportional to the (exact binary) probabilities."""
    fr = [Fraction(p) for p in probs]
    den = reduce(math.lcm, (f.denominator for f in fr))
    ks = [int(f * den) for f in fr]
    g = reduce(math.gcd, ks)
    return tuple(k // g for k in ks)


def _fraction(eps) -> Fraction:
    e = eps if isinstance(eps, Fraction) else Fraction(float(eps))
    if not 0 < e < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {float(e)}")
    return e


def _exceeds(covered: int, total: int, eps: Fraction) -> bool:
    """covered / total > 1 - eps."""
    return covered * eps.denominator > (eps.denominator - eps.numerator) * total


def log2_int(x: int) -> float:
    if x <= 0:
        raise DomainError("log2 of a nonpositive integer")
    b = x.bit_length()
    if b <= 1000:
        return math.log2(x)
    shift = b - 64
    return math.log2(x >> shift) + shift


def log2_binomial(n: int, k: int) -> float:
    if not 0 <= k <= n:
        raise DomainError("binomial needs 0 <= k <= n")
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) * LOG2E)


# --- distances -----------------------------------------------------------------

def rwrs_word_distance(field: OccupationField, w: SceneryWord, w2: SceneryWord) -> float:
    if not (np.array_equal(w.sites, field.sites) and np.array_equal(w2.sites, field.sites)):
        raise DomainError("words must live on the range of the field")
    return float(np.dot(field.visits, w.symbols != w2.symbols)) / field.n


def all_words(alphabet_size: int, m: int) -> np.ndarray:
    """Every word of length ``m`` in lexicographic order, one per row."""
    if alphabet_size**m > PHI_EXACT_LIMIT:
        raise DomainError("too many words to enumerate")
    return np.array(list(itertools.product(range(alphabet_size), repeat=m)), dtype=np.int64).reshape(-1, m)


def weighted_mismatch(words: np.ndarray, site_weights: np.ndarray) -> np.ndarray:
    """Integer matrix ``D[a, b] = sum_i weight_i * [words[a, i] != words[b, i]]``."""
    site_weights = np.asarray(site_weights, dtype=np.int64)
    out = np.empty((words.shape[0], words.shape[0]), dtype=np.int64)
    for a in range(words.shape[0]):
        out[a] = (words != words[a]) @ site_weights
    return out


def block_mismatch(words: np.ndarray, n: int, k: int) -> np.ndarray:
    """``D[a, b]`` = number of ``i < n`` where the length-``k`` blocks at ``i`` differ."""
    if words.shape[1] != n + k - 1:
        raise DomainError("words must have n + k - 1 letters")
    out = np.empty((words.shape[0], words.shape[0]), dtype=np.int64)
    for a in range(words.shape[0]):
        diff = words != words[a]
        block = np.zeros((words.shape[0], n), dtype=bool)
        for j in range(k):
            block |= diff[:, j:j + n]
        out[a] = block.sum(axis=1)
    return out


def _radius_units(radius, n: int) -> int:
    """Largest integer distance numerator ``D`` with ``D / n <= radius``."""
    r = radius if isinstance(radius, Fraction) else Fraction(float(radius))
    return math.floor(r * n) if r >= 0 else -1


# --- Phi -------------------------------------------------------------------------

def _compositions(m: int, parts: int):
    if parts == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _compositions(m - first, parts - 1):
            yield (first,) + rest


def _count_from_classes(classes, goal: int, den: int) -> int:
    """Walk (per-word weight, multiplicity) classes in descending weight order.

    Returns the minimal word count with ``acc * den > goal``.
    """
    acc = 0
    count = 0
    for weight, mult in classes:
        if (acc + weight * mult) * den > goal:
            return count + (goal - acc * den) // (weight * den) + 1
        acc += weight * mult
        count += mult
    return count


def _two_symbol_classes(ks, m):
    hi, lo = (0, 1) if ks[0] >= ks[1] else (1, 0)
    kh, kl = ks[hi], ks[lo]
    weight = kh**m
    mult = 1
    for c in range(m, -1, -1):  # c = count of the likelier symbol
        yield weight, mult
        if c:
            weight = weight // kh * kl
            mult = mult * c // (m - c + 1)


def _general_classes(ks, m):
    classes = []
    for c in _compositions(m, len(ks)):
        weight = math.prod(k**ci for k, ci in zip(ks, c))
        classes.append((weight, c))
    classes.sort(key=lambda wc: -wc[0])
    for weight, c in classes:
        mult, rest = 1, m
        for ci in c:
            mult *= math.comb(rest, ci)
            rest -= ci
        yield weight, mult


@lru_cache(maxsize=8192)
def _phi_count(ks: tuple[int, ...], m: int, eps: Fraction) -> int:
    den, num = eps.denominator, eps.numerator
    N = len(ks)
    if len(set(ks)) == 1:
        words = N**m
        return min(words, (den - num) * words // den + 1)
    goal = (den - num) * sum(ks) ** m
    classes = _two_symbol_classes(ks, m) if N == 2 else _general_classes(ks, m)
    return _count_from_classes(classes, goal, den)


def phi_count(model: SceneryModel, m: int, epsilon) -> int:
    """Minimal number of most likely words on ``m`` sites with mass above ``1 - epsilon``."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    return _phi_count(integer_weights(model.probs), int(m), _fraction(epsilon))


def phi_estimate(model: SceneryModel, field: OccupationField | int, epsilon) -> float:
    """log2 of Phi; words are grouped into multinomial classes, never enumerated."""
    m = field if isinstance(field, (int, np.integer)) else field.range_size
    return log2_int(phi_count(model, int(m), epsilon))


def phi_exact_small(model: SceneryModel, field: OccupationField | int, epsilon) -> int:
    m = field if isinstance(field, (int, np.integer)) else field.range_size
    eps = _fraction(epsilon)
    if model.size**m > PHI_EXACT_LIMIT:
        raise DomainError("instance too large for enumeration")
    ks = integer_weights(model.probs)
    weights = [math.prod(ks[s] for s in word) for word in itertools.product(range(model.size), repeat=m)]
    total = sum(ks) ** m
    acc = 0
    for count, i in enumerate(sorted(range(len(weights)), key=lambda i: -weights[i]), start=1):
        acc += weights[i]
        if _exceeds(acc, total, eps):
            return count
    return len(weights)


# --- Q ----------------------------------------------------------------------------

def q_upper_bound(n: int, epsilon: float, alphabet_size: int) -> float:
    """log2 of ``|P|^r * C(n, r)`` with ``r = floor(epsilon * n)``."""
    if not 0 <= epsilon <= 0.5:
        raise DomainError("q_upper_bound needs 0 <= epsilon <= 1/2")
    if n < 1 or alphabet_size < 1:
        raise DomainError("n and alphabet size must be positive")
    r = math.floor(epsilon * n + 1e-9)
    return r * math.log2(alphabet_size) + log2_binomial(n, r)


def q_rwrs_formula(M: float, mu: float, a_n: float, alphabet_size: int) -> float:
    """log2 of ``C(ceil(M a), ceil(2 mu a)) * |beta|^(2 mu a)``."""
    A = math.ceil(M * a_n - 1e-9)
    B = min(math.ceil(2 * mu * a_n - 1e-9), A)
    return log2_binomial(A, B) + 2 * mu * a_n * math.log2(alphabet_size)


def on_lemma4_event(field: OccupationField, pair: AdmissiblePair, a_n: float,
                    abar_n: float, theta: float) -> bool:
    """min local time over ``a_n * Gamma`` exceeds theta and ``V_n / a_n`` lies in Upsilon."""
    if not pair.upsilon.contains_set(scaled_range(field, a_n)):
        return False
    if pair.gamma.is_empty():
        return True
    try:
        return min_local_time_over(field, pair.gamma.as_hyperset(), a_n, abar_n) > theta
    except DomainError:
        return True


def q_rwrs_bound(field: OccupationField, pair: AdmissiblePair, a_n: float, abar_n: float,
                 theta: float, alphabet_size: int) -> float:
    if theta <= 0:
        raise DomainError("theta must be positive")
    if not on_lemma4_event(field, pair, a_n, abar_n, theta):
        raise NotApplicable("walk is outside the admissible-pair event")
    return q_rwrs_formula(pair.M, pair.mu, a_n, alphabet_size)


def q_exact_small(field: OccupationField, words: Sequence[SceneryWord], epsilon) -> int:
    if len(words) > Q_EXACT_LIMIT:
        raise DomainError("too many words")
    if not words:
        raise DomainError("no words")
    for w in words:
        if not np.array_equal(w.sites, field.sites):
            raise DomainError("words must live on the range of the field")
    W = np.stack([w.symbols for w in words])
    thr = _radius_units(epsilon, field.n)
    best = 0
    for a in range(W.shape[0]):
        d = (W != W[a]) @ field.visits
        best = max(best, int(np.count_nonzero(d <= thr)))
    return best


# --- K -------------------------------------------------------------------------------

def _maximal_balls(inside: np.ndarray) -> np.ndarray:
    """Distinct rows of ``inside``, dropping rows strictly contained in another."""
    uniq = np.unique(inside, axis=0)
    keep = []
    for i in range(uniq.shape[0]):
        sup = np.all(uniq[i] <= uniq, axis=1)
        sup[i] = False
        if not sup.any():
            keep.append(i)
    return uniq[keep]


def _milp_cover(balls: np.ndarray, wf: np.ndarray, target: float):
    """Fewest balls with covered float mass >= target, or None if infeasible."""
    nb_, nw = balls.shape
    c = np.concatenate((np.ones(nb_), np.zeros(nw)))
    link = np.hstack((-balls.T.astype(float), np.eye(nw)))  # y_w <= sum of balls holding w
    mass = np.concatenate((np.zeros(nb_), wf))[None, :]
    cons = [LinearConstraint(link, -np.inf, 0.0), LinearConstraint(mass, target, np.inf)]
    res = milp(c, constraints=cons, integrality=np.ones(nb_ + nw), bounds=Bounds(0, 1),
               options={"mip_rel_gap": 0.0})
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"covering program failed: {res.message}")
    chosen = np.nonzero(res.x[:nb_] > 0.5)[0]
    return int(round(res.fun)), chosen


def cover_number(weights: Sequence[int], dist: np.ndarray, thr: int, eps) -> int:
    """Fewest balls ``{b : dist[c, b] <= thr}`` whose union has mass above ``1 - eps``.

    Solved as a 0/1 covering program twice, with the mass target nudged up
    and down by 1e-9. The upper solution is re-checked in exact integer
    arithmetic. When the two optima disagree, an exhaustive branch and bound
    settles the value between them.
    """
    eps = _fraction(eps)
    weights = list(weights)
    total = sum(weights)
    balls = _maximal_balls(dist <= thr)
    wf = np.array([w / total for w in weights])
    need = float(1 - eps)

    def exact_ok(chosen) -> bool:
        cov = balls[chosen].any(axis=0)
        return _exceeds(sum(weights[i] for i in np.nonzero(cov)[0].tolist()), total, eps)

    hi = _milp_cover(balls, wf, min(need + 1e-9, 1.0))
    if hi is not None and not exact_ok(hi[1]):
        hi = None
    lo = _milp_cover(balls, wf, need - 1e-9)
    k_lo = 1 if lo is None else max(lo[0], 1)
    k_hi = hi[0] if hi is not None else balls.shape[0]
    if k_lo == k_hi:
        return k_hi
    for k in range(k_lo, k_hi):
        if any(exact_ok(list(c)) for c in itertools.combinations(range(balls.shape[0]), k)):
            return k
    return k_hi


def word_weights(ks: Sequence[int], words: np.ndarray) -> list[int]:
    return [math.prod(ks[s] for s in row) for row in words.tolist()]


def k_exact_small(model: SceneryModel, field: OccupationField, epsilon) -> int:
    """Exact K over the words on the visited sites, centres ranging over all words."""
    m = field.range_size
    if model.size**m > K_EXACT_LIMIT:
        raise DomainError("instance too large for exact covering")
    words = all_words(model.size, m)
    dist = weighted_mismatch(words, field.visits)
    ks = integer_weights(model.probs)
    return cover_number(word_weights(ks, words), dist, _radius_units(epsilon, field.n), epsilon)


def q_exact_all_words(model: SceneryModel, field: OccupationField, epsilon) -> int:
    words = all_words(model.size, field.range_size)
    dist = weighted_mismatch(words, field.visits)
    return int((dist <= _radius_units(epsilon, field.n)).sum(axis=1).max())


# --- sandwich -------------------------------------------------------------------

def sandwich(log2_phi: float, log2_q: float) -> tuple[float, float]:
    if log2_phi < 0 or log2_q < 0:
        raise DomainError("sandwich inputs must be nonnegative")
    return (max(log2_phi - log2_q, 0.0), log2_phi)


def complexity_estimate(model: SceneryModel, field: OccupationField, epsilon: float,
                        log2_q_exact: float | None = None) -> ComplexityEstimate:
    lp = phi_estimate(model, field, epsilon)
    qu = q_upper_bound(field.n, min(epsilon, 0.5), model.size)
    q = log2_q_exact if log2_q_exact is not None else qu
    return ComplexityEstimate(field.n, epsilon, lp, qu, log2_q_exact, sandwich(lp, q))


# --- structural checks on tiny instances ---------------------------------------------

@dataclass(frozen=True)
class InstanceCheck:
    phi_estimate: int
    phi_exact: int
    q_exact: int
    k_exact: int
    k_merged: int

    @property
    def phi_agrees(self) -> bool:
        return self.phi_estimate == self.phi_exact

    @property
    def sandwich_holds(self) -> bool:
        # Phi / Q <= K <= Phi, kept in integers
        return self.phi_exact <= self.q_exact * self.k_exact and self.k_exact <= self.phi_exact

    @property
    def monotone(self) -> bool:
        return self.k_merged <= self.k_exact


def check_instance(model: SceneryModel, field: OccupationField, epsilon: float,
                   merge: tuple[int, int] = (0, 1)) -> InstanceCheck:
    """Exact Phi, Q and K, plus K after merging two scenery symbols."""
    m = field.range_size
    words = all_words(model.size, m)
    dist = weighted_mismatch(words, field.visits)
    thr = _radius_units(epsilon, field.n)
    ks = integer_weights(model.probs)
    k = cover_number(word_weights(ks, words), dist, thr, epsilon)
    q = int((dist <= thr).sum(axis=1).max())

    a, b = sorted(merge)
    relabel = np.array([i if i < b else (a if i == b else i - 1) for i in range(model.size)])
    merged_ks = [0] * (model.size - 1)
    for i, kk in enumerate(ks):
        merged_ks[relabel[i]] += kk
    mwords = all_words(model.size - 1, m)
    mdist = weighted_mismatch(mwords, field.visits)
    km = cover_number(word_weights(merged_ks, mwords), mdist, thr, epsilon)
    return InstanceCheck(phi_count(model, m, epsilon), phi_exact_small(model, m, epsilon), q, k, km)


@dataclass(frozen=True)
class BlockCheck:
    n: int
    k: int
    epsilon: float
    left: tuple[int, int]
    right: tuple[int, int]

    @property
    def holds(self) -> bool:
        return self.left[0] <= self.left[1] and self.right[0] <= self.right[1]


def check_block_refinement(model: SceneryModel, n: int, epsilon: float, k: int = 2) -> BlockCheck:
    """Compare K for the scenery partition and its ``k``-block refinement.

    The walk steps +1 deterministically, so the n-window visits sites
    ``0..n-1`` once each and block names read ``k`` consecutive symbols.
    Both partitions are handled on words over ``n + k - 1`` sites. Since
    ``d_P <= d_Pk <= k d_P + k(k-1)/n``, radii shifted by ``k^2/n`` give

        K(P_k; 2e + k^2/n, mass 2e) <= K(P; e/k, mass e/k)
        K(P; e/k, mass e/k) <= K(P_k; max(e/2 - k^2/n, 0), mass e/2)

    The second line only follows from the metric comparison when k = 2.
    """
    e = Fraction(float(epsilon))
    if k != 2:
        raise DomainError("only k = 2 is supported")
    if not 0 < 2 * e < 1:
        raise DomainError("need 0 < 2 * epsilon < 1")
    words = all_words(model.size, n + k - 1)
    ks = integer_weights(model.probs)
    w = word_weights(ks, words)
    d1 = weighted_mismatch(words[:, :n], np.ones(n, dtype=np.int64))
    dk = block_mismatch(words, n, k)
    slack = Fraction(k * k, n)

    def K(dist, radius, mass_eps):
        return cover_number(w, dist, _radius_units(radius, n), mass_eps)

    left = (K(dk, 2 * e + slack, 2 * e), K(d1, e / k, e / k))
    right = (K(d1, e / k, e / k), K(dk, max(e / 2 - slack, Fraction(0)), e / 2))
    return BlockCheck(n, k, float(epsilon), left, right)
