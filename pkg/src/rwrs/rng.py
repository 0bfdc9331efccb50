"""Counter-based 64-bit mixing used for every random stream in the package.

All randomness is derived from the SplitMix64 finalizer. A stream is a
64-bit state advanced by the golden-ratio increment; each draw is
``fmix(state)``. Seeds for trials and scenery sites are themselves built
by mixing, so any (master seed, trial, stream) triple maps to the same
numbers on every machine and under any worker partitioning.

Seed derivation, bit-exact::

    trial_seed(master, t, tag) = fmix(fmix(fmix(master) + t * GOLDEN) ^ (tag * TAG_MUL))
    site_uniform(seed, k)      = u01(fmix(fmix(seed) ^ fmix(k * GOLDEN + 1)))

with all arithmetic modulo 2**64 and ``u01(x) = (x >> 11) * 2**-53``.
"""
from __future__ import annotations

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
TAG_MUL = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream tags
WALK = 1
SCENERY = 2
REFERENCE = 3

_G = np.uint64(GOLDEN)
_C1 = np.uint64(_M1)
_C2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def fmix(x: int) -> int:
    """SplitMix64 finalizer on Python ints."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def trial_seed(master: int, trial: int, tag: int) -> int:
    inner = (fmix(master) + (trial * GOLDEN)) & MASK64
    return fmix(fmix(inner) ^ ((tag * TAG_MUL) & MASK64))


def trial_seeds(master: int, trials: int, tag: int) -> np.ndarray:
    return np.array([trial_seed(master, t, tag) for t in range(trials)], dtype=np.uint64)


def seed_from_generator(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**64, dtype=np.uint64))


@nb.njit(nogil=True, cache=True, inline="always")
def nb_fmix(x):
    x = (x ^ (x >> _S30)) * _C1
    x = (x ^ (x >> _S27)) * _C2
    return x ^ (x >> _S31)


@nb.njit(nogil=True, cache=True, inline="always")
def nb_u01(x):
    return np.float64(x >> _S11) * _INV53


@nb.njit(nogil=True, cache=True)
def nb_site_uniforms(seed, sites):
    out = np.empty(sites.shape[0], dtype=np.float64)
    s = nb_fmix(np.uint64(seed))
    for i in range(sites.shape[0]):
        k = np.uint64(sites[i])  # two's complement wrap for negative sites
        out[i] = nb_u01(nb_fmix(s ^ nb_fmix(k * _G + _ONE)))
    return out


@nb.njit(nogil=True, cache=True)
def nb_uniforms(seed, size):
    """``size`` consecutive draws of the stream started at ``seed``."""
    out = np.empty(size, dtype=np.float64)
    state = np.uint64(seed)
    for i in range(size):
        state += _G
        out[i] = nb_u01(nb_fmix(state))
    return out


def site_uniform(seed: int, site: int) -> float:
    k = site & MASK64
    x = fmix(fmix(seed) ^ fmix((k * GOLDEN + 1) & MASK64))
    return (x >> 11) * _INV53
