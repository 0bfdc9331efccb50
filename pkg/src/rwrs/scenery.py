"""I.i.d. finite-alphabet sceneries, scenery words and their information content.

Symbols are stored as integer indices ``0..N-1`` into the model's alphabet.
A scenery realization is never materialized: the symbol at site ``k`` for a
given trial seed is a pure function of ``(seed, k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hyperspace import HyperSet, lattice_points
from .rng import nb_site_uniforms
from .stable_laws import DomainError


@dataclass(frozen=True)
class SceneryModel:
    probs: tuple[float, ...]
    alphabet: tuple[str, ...] = field(default=())
    entropy_bits: float = field(init=False)

    def __post_init__(self):
        if not self.alphabet:
            object.__setattr__(self, "alphabet", tuple(f"b{i + 1}" for i in range(len(self.probs))))
        if len(self.alphabet) != len(self.probs):
            raise DomainError("alphabet and probs differ in length")
        h = -math.fsum(p * math.log2(p) for p in self.probs)
        object.__setattr__(self, "entropy_bits", max(h, 0.0))

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def log2_probs(self) -> np.ndarray:
        return np.log2(np.asarray(self.probs))

    @property
    def information_variance(self) -> float:
        """Variance in bits^2 of the self-information of one symbol."""
        p = np.asarray(self.probs)
        i = -np.log2(p)
        return float(np.sum(p * i * i) - self.entropy_bits**2)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.probs)) == 1


def make_bernoulli_scenery(probs, alphabet=None) -> SceneryModel:
    probs = tuple(float(p) for p in probs)
    if len(probs) < 2:
        raise DomainError("a scenery needs at least two symbols")
    if any(not (p > 0) or not math.isfinite(p) for p in probs):
        raise DomainError("scenery probabilities must be positive")
    if abs(math.fsum(probs) - 1.0) > 1e-12:
        raise DomainError(f"scenery probabilities sum to {math.fsum(probs)!r}, not 1")
    return SceneryModel(probs, tuple(alphabet) if alphabet else ())


@dataclass(frozen=True, eq=False)
class SceneryWord:
    sites: np.ndarray
    symbols: np.ndarray

    def __post_init__(self):
        if self.sites.shape != self.symbols.shape:
            raise DomainError("one symbol per site is required")
        if self.sites.size > 1 and np.any(np.diff(self.sites) <= 0):
            raise DomainError("sites must be strictly increasing")

    def __len__(self) -> int:
        return int(self.sites.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SceneryWord)
            and np.array_equal(self.sites, other.sites)
            and np.array_equal(self.symbols, other.symbols)
        )

    def counts(self, alphabet_size: int) -> np.ndarray:
        return np.bincount(self.symbols, minlength=alphabet_size)


def _as_sites(sites) -> np.ndarray:
    s = np.asarray(sites, dtype=np.int64).ravel()
    if s.size and np.unique(s).size != s.size:
        raise DomainError("sites must be distinct")
    return np.sort(s)


def sample_scenery_word(model: SceneryModel, sites, seed: int) -> SceneryWord:
    """Read the scenery realization fixed by ``seed`` on the given sites."""
    s = _as_sites(sites)
    u = nb_site_uniforms(np.uint64(seed), s)
    cum = np.cumsum(model.probs)
    sym = np.minimum(np.searchsorted(cum, u, side="right"), model.size - 1)
    return SceneryWord(s, sym.astype(np.int64))


def log2_word_probability(model: SceneryModel, word: SceneryWord) -> float:
    if word.symbols.size and (word.symbols.min() < 0 or word.symbols.max() >= model.size):
        raise DomainError("word uses symbols outside the alphabet")
    c = word.counts(model.size)
    return math.fsum(float(k) * lp for k, lp in zip(c.tolist(), model.log2_probs.tolist()))


def word_probability(model: SceneryModel, word: SceneryWord) -> float:
    return 2.0 ** log2_word_probability(model, word)


def conditional_information(model: SceneryModel, word: SceneryWord) -> float:
    """Self-information of the word in bits."""
    return -log2_word_probability(model, word) + 0.0


def folner_sites(region: HyperSet, a_n: float) -> np.ndarray:
    """Lattice sites of ``a_n * region``; the count is within 2 per interval of ``a_n * Leb``."""
    runs = lattice_points(region, a_n)
    sites = np.concatenate([np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in runs]) if runs else np.empty(0, np.int64)
    target = a_n * region.leb()
    if abs(sites.size - target) > 2 * len(region):
        raise AssertionError(f"site count {sites.size} strays from {target:.3f} by more than {2 * len(region)}")
    return sites
