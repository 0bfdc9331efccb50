"""Aperiodic symmetric integer jump laws and their stable normalizers.

Two families are provided:

* ``lazy``   : P(0) = laziness, P(+1) = P(-1) = (1 - laziness) / 2  (alpha = 2)
* ``pareto`` : P(0) = zero_mass, P(k) = c |k|^(-1-alpha) for k != 0  (1 < alpha < 2)

For the pareto family the tail convention is
``P(|xi| > x) ~ tail_constant * x**(-alpha)`` with ``tail_constant = 2c/alpha``.

Normalizing constants make ``S_n / a(n)`` converge to the symmetric stable
law with characteristic function ``exp(-|t|**alpha / alpha)``. For alpha = 2
this is ``sigma * sqrt(n)``; for alpha < 2, ``a(n)`` solves
``n * (1 - Re phi(1/a)) = 1/alpha`` where ``phi`` is the characteristic
function of the jump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numba as nb
import numpy as np
from scipy.integrate import trapezoid
from scipy.special import zeta

from . import rng as _rng

LAZY = 0
PARETO = 1
UNIT_DRIFT = 2

HEAD_CUTOFF = 2**16
_SERIES_TERMS = 80


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


@dataclass(frozen=True, eq=False)
class JumpLaw:
    """Symmetric integer jump distribution.

    ``cdf`` holds P(|xi| <= m) for m = 0..HEAD_CUTOFF (pareto only); mass
    beyond the cutoff is sampled from the analytic tail.
    """

    family: str
    alpha: float
    p0: float
    variance: float
    tail_constant: float | None
    aperiodic: bool
    c: float = 0.0
    cdf: np.ndarray = field(default_factory=lambda: np.ones(1), repr=False)

    @property
    def kind(self) -> int:
        return {"lazy": LAZY, "pareto": PARETO, "unit_drift": UNIT_DRIFT}[self.family]

    @property
    def support(self) -> str:
        if self.family == "lazy":
            return "{-1, 0, 1}"
        if self.family == "unit_drift":
            return "{1}"
        return "Z"

    @property
    def key(self) -> tuple:
        return (self.family, self.alpha, self.p0)

    def pmf(self, k) -> np.ndarray | float:
        k = np.asarray(k)
        a = np.abs(k)
        if self.family == "lazy":
            out = np.where(a == 0, self.p0, np.where(a == 1, (1 - self.p0) / 2, 0.0))
        elif self.family == "unit_drift":
            out = np.where(k == 1, 1.0, 0.0)
        else:
            safe = np.maximum(a, 1).astype(float)
            out = np.where(a == 0, self.p0, self.c * safe ** (-1.0 - self.alpha))
        return float(out) if out.ndim == 0 else out

    def tail_probability(self, x: float) -> float:
        """P(|xi| > x)."""
        if self.family == "lazy":
            return 1 - self.p0 if x < 1 else 0.0
        if self.family == "unit_drift":
            return 1.0 if x < 1 else 0.0
        m = math.floor(x) + 1
        return 2 * self.c * float(zeta(1 + self.alpha, m))

    def tail_mass(self) -> float:
        """Mass beyond the tabulated head (pareto only)."""
        return self.tail_probability(HEAD_CUTOFF) if self.family == "pareto" else 0.0

    def params(self):
        """Tuple consumed by the compiled samplers."""
        rmax = ((HEAD_CUTOFF + 2) / (HEAD_CUTOFF + 1)) ** (1 + self.alpha)
        return (self.kind, self.p0, self.cdf, self.alpha, rmax)


def make_lazy_gaussian_jump(laziness: float) -> JumpLaw:
    if not 0 < laziness < 1:
        raise DomainError(f"laziness must lie in (0, 1), got {laziness}")
    return JumpLaw("lazy", 2.0, float(laziness), 1.0 - laziness, None, True)


def make_pareto_jump(alpha: float, zero_mass: float) -> JumpLaw:
    if not 1 < alpha < 2:
        raise DomainError(f"alpha must lie in (1, 2) for the pareto family, got {alpha}")
    if not 0 < zero_mass < 1:
        raise DomainError(f"zero_mass must lie in (0, 1), got {zero_mass}")
    c = (1 - zero_mass) / (2 * float(zeta(1 + alpha)))
    m = np.arange(1, HEAD_CUTOFF + 1, dtype=np.float64)
    cdf = np.empty(HEAD_CUTOFF + 1)
    cdf[0] = zero_mass
    cdf[1:] = zero_mass + np.cumsum(2 * c * m ** (-1 - alpha))
    return JumpLaw(
        "pareto", float(alpha), float(zero_mass), math.inf, 2 * c / alpha, True, c, cdf
    )


def make_law(family: str, *, laziness: float = 0.5, alpha: float = 1.5,
             zero_mass: float = 0.2) -> JumpLaw:
    if family == "lazy":
        return make_lazy_gaussian_jump(laziness)
    if family == "pareto":
        return make_pareto_jump(alpha, zero_mass)
    if family == "unit_drift":
        from .testing import unit_drift_jump

        return unit_drift_jump()
    raise DomainError(f"unknown jump family {family!r}")


# --- sampling ---------------------------------------------------------------

@nb.njit(nogil=True, cache=True)
def _tail_ratio(k, alpha):
    # alpha k^(-1-alpha) / (k^-alpha - (k+1)^-alpha), computed without cancellation
    kf = np.float64(k)
    width = -(kf ** -alpha) * math.expm1(-alpha * math.log1p(1.0 / kf))
    return alpha * kf ** (-1.0 - alpha) / width


@nb.njit(nogil=True, cache=True)
def draw_jump(kind, p0, cdf, alpha, rmax, state):
    """One jump from the stream ``state``; returns (jump, new_state)."""
    state += _rng._G
    x = _rng.nb_fmix(state)
    if kind == UNIT_DRIFT:
        return 1, state
    u = _rng.nb_u01(x)
    negative = (x & _rng._ONE) == _rng._ONE
    if kind == LAZY:
        if u < p0:
            return 0, state
        return (-1 if negative else 1), state
    m = 0
    if u < cdf[cdf.shape[0] - 1]:
        m = np.searchsorted(cdf, u, side="right")
    else:
        lo = np.float64(cdf.shape[0])  # HEAD_CUTOFF + 1
        while True:
            state += _rng._G
            v = 1.0 - _rng.nb_u01(_rng.nb_fmix(state))
            xc = lo * v ** (-1.0 / alpha)
            if xc > 4.0e18:
                continue
            k = np.int64(xc)
            state += _rng._G
            w = _rng.nb_u01(_rng.nb_fmix(state))
            if w * rmax <= _tail_ratio(k, alpha):
                m = k
                break
    return (-m if negative else m), state


@nb.njit(nogil=True, cache=True)
def draw_jumps(kind, p0, cdf, alpha, rmax, seed, size):
    out = np.empty(size, dtype=np.int64)
    state = np.uint64(seed)
    for i in range(size):
        d, state = draw_jump(kind, p0, cdf, alpha, rmax, state)
        out[i] = d
    return out


def sample_jump(law: JumpLaw, rng: np.random.Generator, size: int | None = None):
    """Draw from ``law``; the draws are a pure function of ``rng``'s state."""
    seed = _rng.seed_from_generator(rng)
    out = draw_jumps(*law.params(), np.uint64(seed), 1 if size is None else int(size))
    return int(out[0]) if size is None else out


# --- characteristic function and normalizers --------------------------------

@lru_cache(maxsize=None)
def _series_coefficients(alpha: float) -> tuple[float, np.ndarray]:
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        lead = float(-mpmath.gamma(-a) * mpmath.cos(mpmath.pi * a / 2))
        coef = [
            float((-1) ** (j + 1) * mpmath.zeta(1 + a - 2 * j) / mpmath.factorial(2 * j))
            for j in range(1, _SERIES_TERMS + 1)
        ]
    return lead, np.array(coef)


def one_minus_cf(law: JumpLaw, t) -> np.ndarray:
    """``1 - Re phi(t)`` for 0 <= t <= pi.

    For the pareto family this uses the expansion of the polylogarithm on
    the unit circle, ``sum_k k^-s (1 - cos kt) = -Gamma(-alpha) cos(pi alpha/2) t^alpha
    + sum_j (-1)^(j+1) zeta(s - 2j) t^(2j) / (2j)!`` with ``s = 1 + alpha``,
    which converges for |t| < 2 pi.
    """
    t = np.abs(np.asarray(t, dtype=float))
    if law.family == "lazy":
        return (1 - law.p0) * (1 - np.cos(t))
    if law.family == "unit_drift":
        return 1 - np.cos(t)
    if np.any(t > math.pi):
        raise DomainError("series valid on [0, pi] only")
    lead, coef = _series_coefficients(law.alpha)
    t2 = t * t
    acc = np.zeros_like(t)
    for cj in coef[::-1]:
        acc = (acc + cj) * t2
    return 2 * law.c * (lead * t**law.alpha + acc)


def _calibrated_scale(law: JumpLaw, n, clamp: bool = False) -> np.ndarray:
    n = np.atleast_1d(np.asarray(n, dtype=float))
    target = 1.0 / law.alpha
    lo = np.full_like(n, math.log(1 / math.pi))
    solvable = n * one_minus_cf(law, np.exp(-lo)) >= target
    if not clamp:
        assert np.all(solvable), "normalizing equation not bracketable"
    hi = np.log(np.maximum(10.0 * n, 10.0))
    assert np.all(n * one_minus_cf(law, np.exp(-hi)) < target), "normalizing equation not bracketable"
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g = n * one_minus_cf(law, np.exp(-mid))
        big = g > target
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
        if np.all(hi - lo < 1e-14):
            break
    # unsolvable points sit below the lattice scale: a(n) < 1/pi there
    return np.where(solvable, np.exp(0.5 * (lo + hi)), 1 / math.pi)


_scale_cache: dict[tuple, float] = {}


def normalizing_constant(law: JumpLaw, n) -> float:
    """``a(n)``; accepts real ``n`` > 0."""
    if n <= 0:
        raise DomainError("n must be positive")
    if law.family == "lazy":
        return math.sqrt(law.variance * n)
    if law.family == "unit_drift":
        return float(n)
    key = (law.key, float(n))
    if key not in _scale_cache:
        _scale_cache[key] = float(_calibrated_scale(law, n)[0])
    return _scale_cache[key]


def normalizing_constants(law: JumpLaw, n, clamp: bool = False) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if law.family == "lazy":
        return np.sqrt(law.variance * n)
    if law.family == "unit_drift":
        return n.copy()
    return _calibrated_scale(law, n, clamp).reshape(n.shape)


def integrated_normalizer(law: JumpLaw, n, nodes: int = 10_000) -> float:
    """Trapezoidal value of ``int_0^n min(1/a(t), 1) dt`` on a geometric grid."""
    if n <= 0:
        raise DomainError("n must be positive")
    t0 = min(1e-6, n * 1e-6)
    grid = np.concatenate(([0.0], np.geomspace(t0, n, nodes - 1)))
    a = normalizing_constants(law, grid[1:], clamp=True)
    f = np.concatenate(([1.0], np.minimum(1.0 / a, 1.0)))
    return float(trapezoid(f, grid))


def asymptotic_integrated_normalizer(law: JumpLaw, n) -> float:
    """``alpha/(alpha-1) * n / a(n)``; cross-check for :func:`integrated_normalizer`."""
    return law.alpha / (law.alpha - 1) * n / normalizing_constant(law, n)


@dataclass(frozen=True, eq=False)
class NormalizingSequence:
    law: JumpLaw
    method: str

    def a(self, n) -> float:
        return normalizing_constant(self.law, n)

    def abar(self, n) -> float:
        return integrated_normalizer(self.law, n)


def normalizing_sequence(law: JumpLaw) -> NormalizingSequence:
    method = {"lazy": "closed-form", "pareto": "cf-calibration", "unit_drift": "ballistic"}
    return NormalizingSequence(law, method[law.family])


# --- limit law -------------------------------------------------------------

def stable_cdf(x, alpha: float) -> np.ndarray:
    """CDF of the law with characteristic function ``exp(-|t|^alpha/alpha)``.

    Normal closed form for alpha = 2; otherwise Gil-Pelaez inversion on a
    grid, interpolated, with the power-law tail beyond |x| = 60.
    """
    x = np.asarray(x, dtype=float)
    if alpha == 2:
        from scipy.special import ndtr

        return ndtr(x)
    grid, values = _stable_cdf_table(float(alpha))
    out = np.interp(x, grid, values)
    c_tail = math.gamma(alpha) * math.sin(math.pi * alpha / 2) / (math.pi * alpha)
    far = np.abs(x) > grid[-1]
    tail = c_tail * np.maximum(np.abs(x), grid[-1]) ** -alpha
    out = np.where(far & (x > 0), 1 - tail, out)
    out = np.where(far & (x < 0), tail, out)
    return out


@lru_cache(maxsize=8)
def _stable_cdf_table(alpha: float):
    from scipy.integrate import quad

    upper = (alpha * 45.0) ** (1 / alpha)
    grid = np.linspace(0.0, 60.0, 3001)
    vals = np.empty_like(grid)
    for i, xv in enumerate(grid):
        if xv == 0:
            vals[i] = 0.5
            continue
        f = lambda t, xv=xv: math.sin(xv * t) / t * math.exp(-(t**alpha) / alpha)
        integral, _ = quad(f, 0.0, upper, limit=2000, epsabs=1e-12)
        vals[i] = 0.5 + integral / math.pi
    full_grid = np.concatenate((-grid[:0:-1], grid))
    full_vals = np.concatenate((1 - vals[:0:-1], vals))
    return full_grid, full_vals
