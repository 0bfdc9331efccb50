"""Walk paths, occupation fields, ranges and scaled local times."""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .hyperspace import HyperSet, lattice_points
from .stable_laws import LAZY, UNIT_DRIFT, DomainError, JumpLaw, draw_jump

_SNAP = 1e-9


# --- compiled kernels -------------------------------------------------------------

@nb.njit(nogil=True, cache=True)
def _positions(kind, p0, cdf, alpha, rmax, n, seed):
    out = np.empty(n, dtype=np.int64)
    state = np.uint64(seed)
    s = 0
    out[0] = 0
    for j in range(1, n):
        d, state = draw_jump(kind, p0, cdf, alpha, rmax, state)
        s += d
        out[j] = s
    return out


@nb.njit(nogil=True, cache=True)
def _occupation(pos):
    """Sorted visited sites and their visit counts."""
    lo = pos.min()
    hi = pos.max()
    span = hi - lo + 1
    if span <= 16 * pos.shape[0] + 64:
        dense = np.zeros(span, dtype=np.int64)
        for i in range(pos.shape[0]):
            dense[pos[i] - lo] += 1
        idx = np.nonzero(dense)[0]
        return idx + lo, dense[idx]
    srt = np.sort(pos)
    m = 1
    for i in range(1, srt.shape[0]):
        if srt[i] != srt[i - 1]:
            m += 1
    sites = np.empty(m, dtype=np.int64)
    visits = np.zeros(m, dtype=np.int64)
    k = 0
    sites[0] = srt[0]
    for i in range(srt.shape[0]):
        if srt[i] != sites[k]:
            k += 1
            sites[k] = srt[i]
        visits[k] += 1
    return sites, visits


@nb.njit(nogil=True, cache=True)
def _min_count_over(sites, visits, run_lo, run_hi):
    """min visits over the lattice runs; unvisited lattice points count 0."""
    best = np.iinfo(np.int64).max
    for r in range(run_lo.shape[0]):
        lo = run_lo[r]
        hi = run_hi[r]
        i = np.searchsorted(sites, lo)
        j = i + (hi - lo)
        if j >= sites.shape[0] or sites[i] != lo or sites[j] != hi:
            return 0
        for q in range(i, j + 1):
            if visits[q] < best:
                best = visits[q]
    return best


@nb.njit(nogil=True, cache=True)
def _range_size(kind, p0, cdf, alpha, rmax, n, seed):
    if kind == LAZY or kind == UNIT_DRIFT:
        # nearest-neighbour walks visit every site between their extremes
        state = np.uint64(seed)
        s = 0
        lo = 0
        hi = 0
        for _ in range(1, n):
            d, state = draw_jump(kind, p0, cdf, alpha, rmax, state)
            s += d
            if s < lo:
                lo = s
            elif s > hi:
                hi = s
        return hi - lo + 1
    sites, _ = _occupation(_positions(kind, p0, cdf, alpha, rmax, n, seed))
    return sites.shape[0]


@nb.njit(nogil=True, cache=True)
def batch_range_sizes(kind, p0, cdf, alpha, rmax, n, seeds):
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for t in range(seeds.shape[0]):
        out[t] = _range_size(kind, p0, cdf, alpha, rmax, n, seeds[t])
    return out


@nb.njit(nogil=True, cache=True)
def batch_endpoints(kind, p0, cdf, alpha, rmax, n, seeds):
    """S_n = sum of n jumps, one per seed."""
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for t in range(seeds.shape[0]):
        state = np.uint64(seeds[t])
        s = 0
        for _ in range(n):
            d, state = draw_jump(kind, p0, cdf, alpha, rmax, state)
            s += d
        out[t] = s
    return out


@nb.njit(nogil=True, cache=True)
def batch_min_counts(kind, p0, cdf, alpha, rmax, n, seeds, run_lo, run_hi):
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for t in range(seeds.shape[0]):
        sites, visits = _occupation(_positions(kind, p0, cdf, alpha, rmax, n, seeds[t]))
        out[t] = _min_count_over(sites, visits, run_lo, run_hi)
    return out


# --- value types ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WalkPath:
    law: JumpLaw
    n: int
    positions: np.ndarray
    seed: int


@dataclass(frozen=True, eq=False)
class OccupationField:
    """Visit counts ``N_{n,k}`` stored as sorted visited sites with counts."""

    n: int
    sites: np.ndarray
    visits: np.ndarray

    @property
    def range(self) -> np.ndarray:
        return self.sites

    @property
    def range_size(self) -> int:
        return int(self.sites.size)

    @property
    def counts(self) -> dict[int, int]:
        return dict(zip(self.sites.tolist(), self.visits.tolist()))

    def count(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        i = np.clip(np.searchsorted(self.sites, k), 0, self.sites.size - 1)
        return np.where(self.sites[i] == k, self.visits[i], 0)

    @classmethod
    def from_counts(cls, counts: dict[int, int]) -> "OccupationField":
        sites = np.array(sorted(k for k, v in counts.items() if v > 0), dtype=np.int64)
        visits = np.array([counts[k] for k in sites.tolist()], dtype=np.int64)
        return cls(int(visits.sum()), sites, visits)


@dataclass(frozen=True, eq=False)
class LocalTimeField:
    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray  # shape (len(t_grid), len(x_grid))


# --- operations -------------------------------------------------------------------

def simulate_path(law: JumpLaw, n: int, seed: int) -> WalkPath:
    if n < 1:
        raise DomainError("n must be at least 1")
    pos = _positions(*law.params(), int(n), np.uint64(seed))
    return WalkPath(law, int(n), pos, int(seed))


def occupation_field(path: WalkPath | np.ndarray) -> OccupationField:
    pos = path.positions if isinstance(path, WalkPath) else np.asarray(path, dtype=np.int64)
    sites, visits = _occupation(pos)
    return OccupationField(int(pos.size), sites, visits)


def scaled_range(field: OccupationField, a_n: float) -> HyperSet:
    """``V_n / a_n`` as a set of points."""
    if a_n <= 0:
        raise DomainError("a_n must be positive")
    return HyperSet.points(field.sites / a_n)


def filled_range(field: OccupationField, a_n: float) -> HyperSet:
    """``V_n / a_n`` with runs of consecutive visited sites joined into intervals.

    This is the set the dyadic signatures are computed on: a point set has
    empty interior, while its filled version converges to the same limit.
    """
    if a_n <= 0:
        raise DomainError("a_n must be positive")
    s = field.sites
    breaks = np.nonzero(np.diff(s) > 1)[0]
    starts = np.concatenate(([s[0]], s[breaks + 1]))
    ends = np.concatenate((s[breaks], [s[-1]]))
    return HyperSet(starts / a_n, ends / a_n)


def _runs_arrays(runs):
    lo = np.array([r[0] for r in runs], dtype=np.int64)
    hi = np.array([r[1] for r in runs], dtype=np.int64)
    return lo, hi


def min_local_time_over(field: OccupationField, E: HyperSet, a_n: float, abar_n: float) -> float:
    """``min_{k in a_n E} N_{n,k} / abar_n``; zero when some lattice point is unvisited."""
    if a_n <= 0 or abar_n <= 0:
        raise DomainError("a_n and abar_n must be positive")
    runs = lattice_points(E, a_n)
    if not runs:
        raise DomainError("a_n * E contains no lattice point")
    lo, hi = _runs_arrays(runs)
    return float(_min_count_over(field.sites, field.visits, lo, hi)) / abar_n


def _snap(v: np.ndarray) -> np.ndarray:
    r = np.round(v)
    return np.where(np.abs(v - r) < _SNAP, r, v)


def local_time_field(path: WalkPath, a_n: float, abar_n: float, t_grid, x_grid) -> LocalTimeField:
    """Bilinear interpolation of prefix occupation counts, scaled by (a_n, abar_n).

    Counts are snapshotted only at the times the grid needs.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0) or np.any(np.diff(x_grid) < 0):
        raise DomainError("grids must be sorted")
    if t_grid.size and (t_grid[0] < 0 or t_grid[-1] > 1):
        raise DomainError("t_grid must lie in [0, 1]")
    pos = path.positions
    n = path.n
    lo = int(pos.min())
    width = int(pos.max()) - lo + 1

    tau = _snap(n * t_grid)
    j = np.minimum(np.floor(tau).astype(np.int64), n)
    s = np.where(j >= n, 0.0, tau - j)
    y = _snap(a_n * x_grid)
    k = np.floor(y).astype(np.int64)
    u = y - k

    needed = np.unique(np.concatenate((j, np.minimum(j + 1, n))))
    snaps: dict[int, np.ndarray] = {}
    acc = np.zeros(width, dtype=np.int64)
    prev = 0
    for jj in needed.tolist():
        acc += np.bincount(pos[prev:jj] - lo, minlength=width)
        prev = jj
        snaps[jj] = acc.copy()

    def at(snap: np.ndarray, kk: np.ndarray) -> np.ndarray:
        idx = kk - lo
        ok = (idx >= 0) & (idx < width)
        return np.where(ok, snap[np.clip(idx, 0, width - 1)], 0)

    values = np.empty((t_grid.size, x_grid.size))
    for r in range(t_grid.size):
        n0 = snaps[int(j[r])]
        n1 = snaps[int(min(j[r] + 1, n))]
        sr = s[r]
        values[r] = (
            (1 - sr) * (1 - u) * at(n0, k)
            + sr * (1 - u) * at(n1, k)
            + (1 - sr) * u * at(n0, k + 1)
            + sr * u * at(n1, k + 1)
        )
    return LocalTimeField(t_grid, x_grid, values / abar_n)
