"""Closed bounded subsets of the line, dyadic approximations, admissible pairs."""
from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .stable_laws import DomainError


@dataclass(frozen=True, eq=False)
class HyperSet:
    """Finite union of disjoint closed intervals, sorted by left endpoint.

    Points are degenerate intervals ``[x, x]``.
    """

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        if self.left.size == 0:
            raise DomainError("HyperSet must be nonempty")
        if np.any(self.right < self.left):
            raise DomainError("interval with right < left")
        if np.any(self.left[1:] <= self.right[:-1]):
            raise DomainError("intervals must be disjoint and sorted")
        if not (np.all(np.isfinite(self.left)) and np.all(np.isfinite(self.right))):
            raise DomainError("HyperSet must be bounded")

    @classmethod
    def from_intervals(cls, intervals: Iterable[Sequence[float]]) -> "HyperSet":
        iv = sorted((float(a), float(b)) for a, b in intervals)
        return cls(np.array([a for a, _ in iv]), np.array([b for _, b in iv]))

    @classmethod
    def union_of(cls, intervals: Iterable[Sequence[float]]) -> "HyperSet":
        """Union of possibly overlapping closed intervals."""
        merged: list[list[float]] = []
        for a, b in sorted((float(a), float(b)) for a, b in intervals):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls.from_intervals(merged)

    @classmethod
    def points(cls, xs) -> "HyperSet":
        xs = np.unique(np.asarray(xs, dtype=float))
        return cls(xs.copy(), xs.copy())

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.left.tolist(), self.right.tolist()))

    def __len__(self) -> int:
        return self.left.size

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HyperSet)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )

    def __repr__(self) -> str:
        shown = ", ".join(f"[{a:g}, {b:g}]" for a, b in self.intervals[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} intervals)"
        return f"HyperSet({shown}{more})"

    def leb(self) -> float:
        return float(np.sum(self.right - self.left))

    def scale(self, c: float) -> "HyperSet":
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return HyperSet(self.left * c, self.right * c)

    def distance_to(self, x) -> np.ndarray:
        """Distance from each point of ``x`` to this set."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.left, x, side="right") - 1
        inside = (idx >= 0) & (x <= self.right[np.clip(idx, 0, None)])
        d_left = np.where(idx >= 0, x - self.right[np.clip(idx, 0, None)], np.inf)
        nxt = idx + 1
        d_right = np.where(nxt < self.left.size, self.left[np.clip(nxt, None, self.left.size - 1)] - x, np.inf)
        return np.where(inside, 0.0, np.minimum(d_left, d_right))

    def contains(self, x) -> np.ndarray:
        return self.distance_to(x) == 0.0

    def issubset(self, other: "HyperSet") -> bool:
        idx = np.searchsorted(other.left, self.left, side="right") - 1
        if np.any(idx < 0):
            return False
        return bool(np.all(self.right <= other.right[idx]))


def hausdorff_distance(a: HyperSet, b: HyperSet) -> float:
    return max(_directed(a, b), _directed(b, a))


def _directed(a: HyperSet, b: HyperSet) -> float:
    """sup over x in a of dist(x, b).

    dist(., b) is piecewise linear with local maxima only at gap midpoints
    of b, so the sup over an interval of a is attained at its endpoints or
    at a midpoint of a gap of b lying inside it.
    """
    cand = np.concatenate((a.left, a.right))
    if len(b) > 1:
        mids = 0.5 * (b.right[:-1] + b.left[1:])
        cand = np.concatenate((cand, mids[a.contains(mids)]))
    return float(np.max(b.distance_to(cand)))


def lattice_points(region: HyperSet, scale: float) -> list[tuple[int, int]]:
    """Integer runs ``[lo, hi]`` making up ``(scale * region) ∩ Z``."""
    lo = np.ceil(region.left * scale).astype(np.int64)
    hi = np.floor(region.right * scale).astype(np.int64)
    keep = lo <= hi
    return list(zip(lo[keep].tolist(), hi[keep].tolist()))


def lattice_count(runs: list[tuple[int, int]]) -> int:
    return sum(h - l + 1 for l, h in runs)


# --- dyadic sets --------------------------------------------------------------

@dataclass(frozen=True)
class DyadicSet:
    """Union of order-``order`` cells ``[p/2^order, (p+1)/2^order]``.

    Cells are stored as merged inclusive runs ``(p_start, p_end)``. An open
    dyadic set is the interior of the union of its cells.
    """

    order: int
    runs: tuple[tuple[int, int], ...]
    is_open: bool = False

    @classmethod
    def from_cells(cls, order: int, cells: Iterable[int], is_open: bool = False) -> "DyadicSet":
        return cls(order, _merge_runs((p, p) for p in cells), is_open)

    @property
    def cells(self) -> frozenset[int]:
        return frozenset(p for a, b in self.runs for p in range(a, b + 1))

    @property
    def n_cells(self) -> int:
        return sum(b - a + 1 for a, b in self.runs)

    def leb(self) -> float:
        return self.n_cells / 2.0**self.order

    def is_empty(self) -> bool:
        return not self.runs

    def closure(self) -> "DyadicSet":
        return DyadicSet(self.order, self.runs, False)

    def interior(self) -> "DyadicSet":
        return DyadicSet(self.order, self.runs, True)

    def as_hyperset(self) -> HyperSet:
        """The closed union as a HyperSet."""
        s = 2.0**self.order
        return HyperSet.from_intervals((a / s, (b + 1) / s) for a, b in self.runs)

    def cell_subset(self, other: "DyadicSet") -> bool:
        return _runs_subset(self.runs, other.runs)

    def contains_set(self, e: HyperSet) -> bool:
        """Whether ``e`` lies in this set (in its interior when open)."""
        s = 2.0**self.order
        if not self.runs:
            return False
        starts = np.array([a for a, _ in self.runs], dtype=float) / s
        ends = np.array([b + 1 for _, b in self.runs], dtype=float) / s
        idx = np.searchsorted(starts, e.left, side="right" if not self.is_open else "left") - 1
        if np.any(idx < 0):
            return False
        if self.is_open:
            return bool(np.all((starts[idx] < e.left) & (e.right < ends[idx])))
        return bool(np.all(e.right <= ends[idx]))


def _merge_runs(runs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for a, b in sorted(runs):
        if out and a <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _runs_subset(inner, outer) -> bool:
    starts = [a for a, _ in outer]
    for a, b in inner:
        i = bisect.bisect_right(starts, a) - 1
        if i < 0 or outer[i][1] < b:
            return False
    return True


def dyadic_inner(e: HyperSet, kappa: int) -> DyadicSet:
    """Largest closed dyadic set of order ``kappa`` inside the interior of ``e``."""
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    s = 2.0**kappa
    p_min = np.floor(e.left * s).astype(np.int64) + 1
    p_max = np.ceil(e.right * s).astype(np.int64) - 2
    keep = p_min <= p_max
    return DyadicSet(kappa, _merge_runs(zip(p_min[keep].tolist(), p_max[keep].tolist())), False)


def dyadic_outer(e: HyperSet, kappa: int) -> DyadicSet:
    """Smallest open dyadic set of order ``kappa`` containing ``e``.

    A point on a shared cell edge forces both neighbouring cells.
    """
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    s = 2.0**kappa
    p_min = np.ceil(e.left * s).astype(np.int64) - 1
    p_max = np.floor(e.right * s).astype(np.int64)
    return DyadicSet(kappa, _merge_runs(zip(p_min.tolist(), p_max.tolist())), True)


def binary_entropy(t: float) -> float:
    """H(t) in nats."""
    if not 0 <= t <= 1:
        raise DomainError(f"binary entropy needs t in [0, 1], got {t}")
    if t == 0 or t == 1:
        return 0.0
    return -t * math.log(t) - (1 - t) * math.log1p(-t)


@dataclass(frozen=True)
class AdmissiblePair:
    gamma: DyadicSet
    upsilon: DyadicSet
    kappa: int
    mu: float
    M: float
    N: int
    threshold: float
    admissible: bool


def is_admissible(gamma: DyadicSet, upsilon: DyadicSet, N: int, threshold: float) -> AdmissiblePair:
    """(N, threshold)-admissibility of a closed/open dyadic pair.

    Nesting is checked at the cell level. Condition (ii) is only evaluated
    when ``3*mu <= 1``; otherwise the pair is declared non-admissible.
    """
    if gamma.order != upsilon.order:
        raise DomainError("pair must share the dyadic order")
    if not gamma.cell_subset(upsilon):
        raise DomainError("gamma is not contained in upsilon")
    s = 2.0**gamma.order
    mu = (upsilon.n_cells - gamma.n_cells) / s
    M = upsilon.n_cells / s
    ok = mu < threshold and 3 * mu <= 1
    if ok:
        ok = M * binary_entropy(3 * mu) + 3 * mu * math.log(N) < threshold
    return AdmissiblePair(gamma.closure(), upsilon.interior(), gamma.order, mu, M, N, threshold, ok)


# --- dyadic signature covers ------------------------------------------------------

@dataclass
class Lemma4Cover:
    kappa: int
    signatures: list[tuple[DyadicSet, DyadicSet]]
    classes: dict[tuple[DyadicSet, DyadicSet], list[int]]
    pairs: dict[tuple[DyadicSet, DyadicSet], AdmissiblePair]
    coverage: float
    admissible_pairs: list[AdmissiblePair] = field(default_factory=list)

    def sample_admissible(self, i: int) -> bool:
        return self.pairs[self.signatures[i]].admissible


def lemma4_cover(samples: Sequence[HyperSet], kappa: int, N: int, threshold: float) -> Lemma4Cover:
    """Group samples by (inner, outer) dyadic signature and score admissibility."""
    sigs = [(dyadic_inner(e, kappa), dyadic_outer(e, kappa)) for e in samples]
    classes: dict = defaultdict(list)
    for i, sig in enumerate(sigs):
        classes[sig].append(i)
    pairs = {sig: is_admissible(sig[0], sig[1], N, threshold) for sig in classes}
    covered = sum(len(ix) for sig, ix in classes.items() if pairs[sig].admissible)
    adm = [p for p in pairs.values() if p.admissible]
    return Lemma4Cover(kappa, sigs, dict(classes), pairs, covered / max(len(samples), 1), adm)


def select_kappa(samples: Sequence[HyperSet], N: int, threshold: float,
                 target: float = 0.9, kappa_max: int = 8) -> Lemma4Cover:
    """Smallest order whose admissible classes cover ``target`` of the samples."""
    cover = None
    for kappa in range(0, kappa_max + 1):
        cover = lemma4_cover(samples, kappa, N, threshold)
        if cover.coverage >= target:
            return cover
    return cover
