"""Monte Carlo harness: range law, complexity law, local times, E-dim slope, dyadic diagnostics."""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numba as nb
import numpy as np

from . import rng
from .complexity import (
    NotApplicable,
    check_block_refinement,
    check_instance,
    log2_int,
    phi_count,
    q_rwrs_bound,
    q_upper_bound,
)
from .hyperspace import (
    HyperSet,
    dyadic_inner,
    dyadic_outer,
    is_admissible,
    lattice_points,
    lemma4_cover,
)
from .scenery import make_bernoulli_scenery
from .stable_laws import (
    DomainError,
    JumpLaw,
    integrated_normalizer,
    make_law,
    normalizing_constant,
)
from .walk_engine import (
    OccupationField,
    batch_endpoints,
    batch_min_counts,
    batch_range_sizes,
    filled_range,
    min_local_time_over,
    occupation_field,
    simulate_path,
)

KINDS = ("range", "complexity", "localtime", "edim", "reference", "lemma4", "smalltest")
FAMILIES = ("lazy", "pareto")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "range"
    family: str = "lazy"
    laziness: float = 0.5
    alpha: float = 2.0
    zero_mass: float = 0.2
    probs: tuple[float, ...] = (0.5, 0.5)
    n_grid: tuple[int, ...] = (100_000,)
    trials: int = 1000
    epsilons: tuple[float, ...] = (0.1,)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        if self.family not in FAMILIES:
            raise DomainError(f"unknown jump family {self.family!r}")
        if not 1 < self.alpha <= 2:
            raise DomainError("alpha must lie in (1, 2]")
        if self.family == "lazy" and self.alpha != 2:
            raise DomainError("the lazy family has alpha = 2")
        if self.family == "pareto" and self.alpha == 2:
            raise DomainError("the pareto family needs alpha < 2")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise DomainError("n_grid must hold positive lengths")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise DomainError("n_grid must be strictly increasing")
        if not self.epsilons or any(not 0 < e < 1 for e in self.epsilons):
            raise DomainError("epsilons must lie in (0, 1)")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit value")
        make_bernoulli_scenery(self.probs)

    def law(self) -> JumpLaw:
        return make_law(self.family, laziness=self.laziness, alpha=self.alpha, zero_mass=self.zero_mass)

    def scenery(self):
        return make_bernoulli_scenery(self.probs)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("probs", "n_grid", "epsilons"):
            d[k] = list(d[k])
        return d

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    samples: np.ndarray
    provenance: tuple = ()
    by_trial: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        object.__setattr__(self, "samples", s)
        if s.size == 0:
            raise DomainError("empirical distribution needs samples")

    @classmethod
    def from_trials(cls, values, provenance=()) -> "EmpiricalDistribution":
        v = np.asarray(values, dtype=float)
        return cls(v, provenance, v)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def cdf(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.count

    def mean(self) -> float:
        return float(self.samples.mean())

    def median(self) -> float:
        return float(np.median(self.samples))

    def sd(self) -> float:
        return float(self.samples.std(ddof=1)) if self.count > 1 else 0.0

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        return EmpiricalDistribution(np.concatenate((self.samples, other.samples)), self.provenance)

    def summary(self) -> dict:
        return {"mean": self.mean(), "median": self.median(), "sd": self.sd(), "n_samples": self.count}


def ks_statistic(d1: EmpiricalDistribution, d2: EmpiricalDistribution) -> float:
    """Two-sample sup distance between empirical CDFs, evaluated at every jump."""
    pts = np.union1d(d1.samples, d2.samples)
    return float(np.max(np.abs(d1.cdf(pts) - d2.cdf(pts))))


def ks_vs_cdf(d: EmpiricalDistribution, cdf) -> float:
    """One-sample sup distance against a continuous CDF."""
    f = cdf(d.samples)
    k = np.arange(1, d.count + 1)
    return float(max(np.max(k / d.count - f), np.max(f - (k - 1) / d.count)))


# --- parallel trial execution --------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("RWRS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_trials(kernel, seeds: np.ndarray, *args) -> np.ndarray:
    """Apply a per-seed batch kernel over chunks of ``seeds``; output is in trial order.

    Each trial depends only on its own seed, so the result does not depend
    on the chunking.
    """
    workers = min(worker_count(), seeds.size)
    if workers <= 1:
        return kernel(*args, seeds)
    chunks = np.array_split(seeds, workers)
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(lambda c: kernel(*args, c), chunks))
    return np.concatenate(parts)


def _prov(config: ExperimentConfig, **extra) -> tuple:
    return (config.digest(), config.master_seed) + tuple(sorted(extra.items()))


def _pick_n(config: ExperimentConfig, n: int | None) -> int:
    return config.n_grid[-1] if n is None else int(n)


def range_sizes(law: JumpLaw, n: int, seeds: np.ndarray) -> np.ndarray:
    return map_trials(batch_range_sizes, seeds, *law.params(), int(n))


# --- experiments --------------------------------------------------------------------

def run_range_experiment(config: ExperimentConfig, n: int | None = None, law: JumpLaw | None = None) -> EmpiricalDistribution:
    """Samples of ``#V_n / a(n)``, one per trial."""
    law = law or config.law()
    n = _pick_n(config, n)
    seeds = rng.trial_seeds(config.master_seed, config.trials, rng.WALK)
    sizes = range_sizes(law, n, seeds)
    return EmpiricalDistribution.from_trials(sizes / normalizing_constant(law, n), _prov(config, n=n))


@dataclass(frozen=True, eq=False)
class ComplexityRun:
    n: int
    a_n: float
    range_sizes: np.ndarray
    log2_phi: dict[float, np.ndarray]
    log2_q_upper: dict[float, float]
    scaled: dict[float, EmpiricalDistribution]

    def sandwich_lower(self, eps: float) -> np.ndarray:
        return np.maximum(self.log2_phi[eps] - self.log2_q_upper[eps], 0.0)


def run_complexity_experiment(config: ExperimentConfig, n: int | None = None,
                              law: JumpLaw | None = None) -> ComplexityRun:
    """Per-epsilon samples of ``log2(Phi) / a(n)``.

    For an i.i.d. scenery Phi depends on the walk only through ``#V_n``, so
    the scenery stream is never drawn here.
    """
    law = law or config.law()
    n = _pick_n(config, n)
    model = config.scenery()
    a_n = normalizing_constant(law, n)
    seeds = rng.trial_seeds(config.master_seed, config.trials, rng.WALK)
    sizes = range_sizes(law, n, seeds)
    lphi, qub, scaled = {}, {}, {}
    for eps in config.epsilons:
        table = {m: log2_int(phi_count(model, m, eps)) for m in np.unique(sizes).tolist()}
        v = np.array([table[m] for m in sizes.tolist()])
        lphi[eps] = v
        qub[eps] = q_upper_bound(n, min(eps, 0.5), model.size)
        scaled[eps] = EmpiricalDistribution.from_trials(v / a_n, _prov(config, n=n, epsilon=eps))
    return ComplexityRun(n, a_n, sizes, lphi, qub, scaled)


@nb.njit(nogil=True, cache=True)
def _brownian_ranges(steps, seeds):
    out = np.empty(seeds.shape[0], dtype=np.float64)
    one = np.uint64(1)
    for t in range(seeds.shape[0]):
        state = np.uint64(seeds[t])
        s = 0
        lo = 0
        hi = 0
        done = 0
        while done < steps:
            state += rng._G
            bits = rng.nb_fmix(state)
            take = min(64, steps - done)
            for _ in range(take):
                s += 1 if (bits & one) else -1
                bits >>= one
                if s < lo:
                    lo = s
                elif s > hi:
                    hi = s
            done += take
        out[t] = (hi - lo) / math.sqrt(steps)
    return out


def brownian_range_reference(steps: int, trials: int, seed: int) -> EmpiricalDistribution:
    """``(max - min) / sqrt(steps)`` of a simple +-1 walk, a proxy for the Brownian range."""
    if steps < 1 or trials < 1:
        raise DomainError("steps and trials must be positive")
    seeds = rng.trial_seeds(seed, trials, rng.REFERENCE)
    vals = map_trials(_brownian_ranges, seeds, int(steps))
    if np.any(vals <= 0):
        raise AssertionError("a Brownian range sample was not positive")
    return EmpiricalDistribution.from_trials(vals, ("brownian", steps, seed))


def expected_simple_walk_range(steps: int) -> float:
    """Exact ``E[max - min]`` over times ``0..steps`` of a simple +-1 walk.

    By symmetry the mean range is ``2 E[M]`` with ``M`` the running maximum,
    and ``E[M_n] = (1/2) sum_{k<n} P(S_k in {0, 1})``.
    """
    from scipy.stats import binom

    k = np.arange(steps)
    # P(S_k = 0) for even k and P(S_k = 1) for odd k, each a central binomial mass
    p = binom.pmf(np.ceil(k / 2), k, 0.5)
    return float(p.sum())


def stable_range_reference(alpha: float, steps: int, trials: int, seed: int,
                           zero_mass: float = 0.2) -> EmpiricalDistribution:
    """``#V_steps / a(steps)`` for a long pareto walk.

    There is no independent closed form here, so this reference is the
    same statistic at a larger scale; comparisons with it only test
    self-consistency across n.
    """
    if not 1 < alpha < 2:
        raise DomainError("stable reference needs 1 < alpha < 2")
    law = make_law("pareto", alpha=alpha, zero_mass=zero_mass)
    seeds = rng.trial_seeds(seed, trials, rng.REFERENCE)
    sizes = range_sizes(law, steps, seeds)
    return EmpiricalDistribution.from_trials(sizes / normalizing_constant(law, steps),
                                             ("stable-self-consistency", alpha, steps, seed))


def endpoint_samples(law: JumpLaw, n: int, trials: int, seed: int) -> EmpiricalDistribution:
    """``S_n / a(n)`` across trials."""
    seeds = rng.trial_seeds(seed, trials, rng.WALK)
    ends = map_trials(batch_endpoints, seeds, *law.params(), int(n))
    return EmpiricalDistribution.from_trials(ends / normalizing_constant(law, n), ("endpoint", n, seed))


def edim_slope(points) -> float:
    """Least-squares slope of log(summary) against log(n)."""
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 4:
        raise DomainError("need at least 4 grid points")
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(ns <= 0) or np.any(vs <= 0):
        raise DomainError("n and summaries must be positive")
    if math.log10(ns.max() / ns.min()) < 1.0 - 1e-12:
        raise DomainError("n values must span at least one decade")
    if np.ptp(np.log(vs)) == 0:
        raise DomainError("degenerate summaries")
    return float(np.polyfit(np.log(ns), np.log(vs), 1)[0])


@dataclass(frozen=True)
class EdimResult:
    points: tuple[tuple[int, float], ...]
    slope: float
    epsilon: float


def edim_pipeline(config: ExperimentConfig, law: JumpLaw | None = None) -> EdimResult:
    """Median of log2 Phi per n (first epsilon), then the log-log slope."""
    law = law or config.law()
    eps = config.epsilons[0]
    pts = []
    for n in config.n_grid:
        run = run_complexity_experiment(config, n, law)
        pts.append((n, float(np.median(run.log2_phi[eps]))))
    return EdimResult(tuple(pts), edim_slope(pts), eps)


# batch_min_counts takes the lattice runs after the seeds; wrap so map_trials can chunk seeds
def _min_counts_kernel(kind, p0, cdf, alpha, rmax, n, lo, hi, seeds):
    return batch_min_counts(kind, p0, cdf, alpha, rmax, n, seeds, lo, hi)


def local_time_experiment(config: ExperimentConfig, E: HyperSet, n: int | None = None,
                          law: JumpLaw | None = None) -> EmpiricalDistribution:
    """Samples of ``min_{k in a(n) E} N_{n,k} / abar(n)``."""
    law = law or config.law()
    n = _pick_n(config, n)
    a_n = normalizing_constant(law, n)
    abar = integrated_normalizer(law, n)
    runs = lattice_points(E, a_n)
    if not runs:
        raise DomainError("a(n) * E contains no lattice point")
    lo = np.array([r[0] for r in runs], dtype=np.int64)
    hi = np.array([r[1] for r in runs], dtype=np.int64)
    seeds = rng.trial_seeds(config.master_seed, config.trials, rng.WALK)
    mins = map_trials(_min_counts_kernel, seeds, *law.params(), int(n), lo, hi)
    return EmpiricalDistribution.from_trials(mins / abar, _prov(config, n=n))


# --- dyadic signature diagnostics ----------------------------------------------------

@dataclass(frozen=True)
class Lemma4Report:
    n: int
    kappa: int
    threshold: float
    epsilon: float
    classes: int
    admissible_coverage: float
    class_frequencies: tuple[tuple[int, float, float], ...]  # (size, theta, event frequency)
    mass_in_good_classes: float
    admissible_mass_in_good_classes: float


def _trial_ranges(law: JumpLaw, n: int, seeds: np.ndarray):
    for s in seeds.tolist():
        yield occupation_field(simulate_path(law, n, s))


def lemma4_diagnostic(config: ExperimentConfig, threshold: float, n: int | None = None,
                      kappa: int | None = None, epsilon: float | None = None,
                      law: JumpLaw | None = None) -> Lemma4Report:
    """Group trials by the dyadic signature of their filled scaled range.

    Within each class, theta is half the class median of the minimal scaled
    local time over ``a(n) * Gamma``. The report gives the trial fraction in
    classes whose theta-event frequency exceeds ``1 - epsilon``. Classes with
    an empty Gamma have a vacuous event.
    """
    law = law or config.law()
    n = _pick_n(config, n)
    eps = config.epsilons[0] if epsilon is None else float(epsilon)
    model = config.scenery()
    a_n = normalizing_constant(law, n)
    abar = integrated_normalizer(law, n)
    seeds = rng.trial_seeds(config.master_seed, config.trials, rng.WALK)
    fields = list(_trial_ranges(law, n, seeds))
    ranges = [filled_range(f, a_n) for f in fields]
    if kappa is None:
        from .hyperspace import select_kappa

        cover = select_kappa(ranges, model.size, threshold)
    else:
        cover = lemma4_cover(ranges, kappa, model.size, threshold)
    freqs = []
    good = 0
    good_adm = 0
    for sig, idx in cover.classes.items():
        gamma = sig[0]
        if gamma.is_empty():
            freqs.append((len(idx), 0.0, 1.0))
            good += len(idx)
            good_adm += len(idx) if cover.pairs[sig].admissible else 0
            continue
        g = gamma.as_hyperset()
        try:
            ys = np.array([min_local_time_over(fields[i], g, a_n, abar) for i in idx])
        except DomainError:
            freqs.append((len(idx), 0.0, 1.0))
            good += len(idx)
            good_adm += len(idx) if cover.pairs[sig].admissible else 0
            continue
        theta = 0.5 * float(np.median(ys))
        f = float(np.mean(ys > theta))
        freqs.append((len(idx), theta, f))
        if f > 1 - eps:
            good += len(idx)
            if cover.pairs[sig].admissible:
                good_adm += len(idx)
    T = len(fields)
    return Lemma4Report(n, cover.kappa, threshold, eps, len(cover.classes), cover.coverage,
                        tuple(freqs), good / T, good_adm / T)


@dataclass(frozen=True)
class WidthReport:
    n: int
    kappa: int
    epsilon: float
    a_n: float
    on_event: float
    widths: np.ndarray  # log2 Q bound / a(n) per trial on the event

    @property
    def median_width(self) -> float:
        return float(np.median(self.widths)) if self.widths.size else math.inf


def sandwich_width_experiment(config: ExperimentConfig, kappa: int, n: int | None = None,
                              law: JumpLaw | None = None) -> WidthReport:
    """Per-trial ``log2 Q / a(n)`` from the admissible-pair ball bound.

    Each trial's own dyadic signature supplies the pair, with threshold
    equal to epsilon. Theta is half the trial's minimal scaled local time over
    ``a(n) * Gamma``, so only trials with that minimum positive can be on the
    event.
    """
    law = law or config.law()
    n = _pick_n(config, n)
    eps = config.epsilons[0]
    model = config.scenery()
    a_n = normalizing_constant(law, n)
    abar = integrated_normalizer(law, n)
    seeds = rng.trial_seeds(config.master_seed, config.trials, rng.WALK)
    widths = []
    for f in _trial_ranges(law, n, seeds):
        r = filled_range(f, a_n)
        pair = is_admissible(dyadic_inner(r, kappa), dyadic_outer(r, kappa), model.size, eps)
        if not pair.admissible or pair.gamma.is_empty():
            continue
        try:
            y = min_local_time_over(f, pair.gamma.as_hyperset(), a_n, abar)
        except DomainError:
            continue
        if y <= 0:
            continue
        try:
            widths.append(q_rwrs_bound(f, pair, a_n, abar, 0.5 * y, model.size) / a_n)
        except NotApplicable:
            continue
    w = np.array(widths)
    return WidthReport(n, kappa, eps, a_n, w.size / config.trials, w)


# --- small exact instances -----------------------------------------------------------

@dataclass(frozen=True)
class SmallResult:
    index: int
    kind: str
    passed: bool
    detail: str = ""


def random_small_instance(gen: np.random.Generator, max_words: int = 81):
    """Random scenery, occupation field and epsilon with at most ``max_words`` words."""
    N = int(gen.choice([2, 3], p=[0.4, 0.6]))
    m_max = int(math.floor(math.log(max_words) / math.log(N) + 1e-9))
    m = int(gen.integers(1, m_max + 1))
    probs = gen.dirichlet(np.ones(N)) * 0.9 + 0.1 / N
    probs = probs / probs.sum()
    sites = np.sort(gen.choice(np.arange(-8, 9), size=m, replace=False))
    visits = gen.integers(1, 5, size=m)
    field_ = OccupationField(int(visits.sum()), sites.astype(np.int64), visits.astype(np.int64))
    eps = float(gen.uniform(0.02, 0.48))
    return make_bernoulli_scenery(probs), field_, eps


def small_instance_suite(count: int = 1000, seed: int = 0, block_every: int = 4) -> list[SmallResult]:
    """Exact Phi/Q/K checks on random tiny instances.

    Per instance: Phi by classes equals Phi by enumeration, Phi/Q <= K <= Phi,
    and K does not grow when two scenery symbols are merged. Every
    ``block_every``-th instance also compares K for the scenery partition and
    its 2-block refinement on a deterministic +1 walk.
    """
    gen = np.random.default_rng(seed)
    out = []
    for i in range(count):
        model, fld, eps = random_small_instance(gen)
        merge = tuple(int(x) for x in gen.choice(model.size, size=2, replace=False))
        chk = check_instance(model, fld, eps, merge)
        detail = f"phi={chk.phi_exact} q={chk.q_exact} k={chk.k_exact} k_merged={chk.k_merged}"
        out.append(SmallResult(i, "phi", chk.phi_agrees, detail))
        out.append(SmallResult(i, "sandwich", chk.sandwich_holds, detail))
        out.append(SmallResult(i, "monotone", chk.monotone, detail))
        if block_every and i % block_every == 0:
            probs = gen.dirichlet(np.ones(2)) * 0.8 + 0.1
            n = int(gen.integers(2, 7))
            e = float(gen.uniform(0.02, 0.24))
            bc = check_block_refinement(make_bernoulli_scenery(probs / probs.sum()), n, e)
            out.append(SmallResult(i, "block", bc.holds, f"n={n} eps={e:.4f} {bc.left} {bc.right}"))
    return out


__all__ = [
    "small_instance_suite", "random_small_instance", "SmallResult",
    "ExperimentConfig", "EmpiricalDistribution", "ComplexityRun", "EdimResult", "Lemma4Report",
    "WidthReport", "ks_statistic", "ks_vs_cdf", "run_range_experiment", "run_complexity_experiment",
    "brownian_range_reference", "stable_range_reference", "expected_simple_walk_range",
    "endpoint_samples", "edim_slope", "edim_pipeline", "local_time_experiment",
    "lemma4_diagnostic", "sandwich_width_experiment", "map_trials", "worker_count", "NotApplicable",
]
