import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwrs import rng
from rwrs.hyperspace import HyperSet
from rwrs.scenery import (
    SceneryWord,
    conditional_information,
    folner_sites,
    log2_word_probability,
    make_bernoulli_scenery,
    sample_scenery_word,
    word_probability,
)
from rwrs.stable_laws import DomainError

UNIFORM = make_bernoulli_scenery([0.5, 0.5])
SKEW = make_bernoulli_scenery([0.8, 0.2])


def word(symbols, sites=None):
    symbols = np.asarray(symbols, dtype=np.int64)
    sites = np.arange(symbols.size) if sites is None else np.asarray(sites)
    return SceneryWord(sites.astype(np.int64), symbols)


class TestModel:
    def test_entropy(self):
        assert UNIFORM.entropy_bits == 1.0
        assert SKEW.entropy_bits == pytest.approx(0.72193, abs=5e-6)
        assert SKEW.alphabet == ("b1", "b2")

    @pytest.mark.parametrize("probs", [[0.5, 0.6], [1.0], [0.0, 1.0], [-0.1, 1.1], [math.nan, 0.5]])
    def test_rejects(self, probs):
        with pytest.raises(DomainError):
            make_bernoulli_scenery(probs)

    @given(st.lists(st.floats(0.01, 1), min_size=2, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_entropy_bounds(self, raw):
        p = np.array(raw) / math.fsum(raw)
        p[-1] = 1 - math.fsum(p[:-1])
        model = make_bernoulli_scenery(p)
        assert 0 < model.entropy_bits <= math.log2(model.size) + 1e-12
        if max(raw) - min(raw) > 1e-3:
            assert model.entropy_bits < math.log2(model.size)

    def test_information_variance(self):
        # self-information takes -log2 0.8 w.p. 0.8 and -log2 0.2 w.p. 0.2
        want = 0.8 * 0.2 * (math.log2(0.8) - math.log2(0.2)) ** 2
        assert SKEW.information_variance == pytest.approx(want)
        assert UNIFORM.information_variance == pytest.approx(0.0, abs=1e-15)

    def test_word_validation(self):
        with pytest.raises(DomainError):
            word([0, 1], sites=[3, 1])
        with pytest.raises(DomainError):
            SceneryWord(np.arange(3), np.zeros(2, dtype=np.int64))


class TestSampling:
    def test_shape(self):
        w = sample_scenery_word(SKEW, [5, 0, 1], 9)
        assert len(w) == 3 and w.sites.tolist() == [0, 1, 5]

    def test_duplicate_sites(self):
        with pytest.raises(DomainError):
            sample_scenery_word(SKEW, [1, 1], 9)

    @given(st.integers(0, 2**64 - 1), st.lists(st.integers(-10**9, 10**9), min_size=1, max_size=30, unique=True),
           st.lists(st.integers(-10**9, 10**9), min_size=1, max_size=30, unique=True))
    @settings(max_examples=50, deadline=None)
    def test_fixed_scenery(self, seed, a, b):
        wa, wb = sample_scenery_word(SKEW, a, seed), sample_scenery_word(SKEW, b, seed)
        da = dict(zip(wa.sites.tolist(), wa.symbols.tolist()))
        db = dict(zip(wb.sites.tolist(), wb.symbols.tolist()))
        assert all(da[k] == db[k] for k in set(da) & set(db))

    def test_uniform_frequency(self):
        w = sample_scenery_word(UNIFORM, np.arange(10**6), rng.trial_seed(3, 0, rng.SCENERY))
        assert abs(w.symbols.mean() - 0.5) < 0.002

    def test_skew_frequency(self):
        w = sample_scenery_word(SKEW, np.arange(-500_000, 500_000), 77)
        assert abs(w.symbols.mean() - 0.2) < 0.002

    def test_seed_changes_scenery(self):
        a = sample_scenery_word(UNIFORM, np.arange(64), 1)
        b = sample_scenery_word(UNIFORM, np.arange(64), 2)
        assert a != b and a == sample_scenery_word(UNIFORM, np.arange(64), 1)


class TestInformation:
    @pytest.mark.parametrize("m", [0, 1, 7, 40])
    def test_uniform(self, m):
        w = word(np.zeros(m))
        assert word_probability(UNIFORM, w) == 2.0**-m
        assert conditional_information(UNIFORM, w) == m

    @given(st.lists(st.integers(0, 1), max_size=60))
    @settings(max_examples=60, deadline=None)
    def test_closed_form(self, syms):
        k, m = sum(syms), len(syms)
        w = word(syms)
        assert word_probability(SKEW, w) == pytest.approx(0.2**k * 0.8 ** (m - k), rel=1e-12)
        assert conditional_information(SKEW, w) == -log2_word_probability(SKEW, w)

    def test_symbol_out_of_alphabet(self):
        with pytest.raises(DomainError):
            log2_word_probability(SKEW, word([0, 2]))

    def test_clt_band(self):
        m = 10**4
        w = sample_scenery_word(SKEW, np.arange(m), 2024)
        band = 4 * math.sqrt(m * SKEW.information_variance)
        assert abs(conditional_information(SKEW, w) - m * SKEW.entropy_bits) < band

    def test_shannon_mcmillan(self):
        m, trials = 10**4, 10**4
        sigma = math.sqrt(SKEW.information_variance)
        sites = np.arange(m)
        seeds = rng.trial_seeds(11, trials, rng.SCENERY)
        hits = sum(
            abs(conditional_information(SKEW, sample_scenery_word(SKEW, sites, int(s))) / m - SKEW.entropy_bits)
            < 3 * sigma / math.sqrt(m)
            for s in seeds
        )
        assert hits / trials >= 0.99


class TestFolner:
    def test_single_interval(self):
        sites = folner_sites(HyperSet.from_intervals([(-0.5, 0.5)]), 100.0)
        assert sites[0] == -50 and sites[-1] == 50 and sites.size == 101

    @given(st.lists(st.floats(-3, 3), min_size=2, max_size=8), st.floats(1.0, 5000.0))
    @settings(max_examples=80, deadline=None)
    def test_count_within_two_per_interval(self, ends, a):
        ends = sorted(ends)
        region = HyperSet.union_of(zip(ends[0::2], ends[1::2]))
        sites = folner_sites(region, a)
        assert abs(sites.size - a * region.leb()) <= 2 * len(region)
        assert np.all(np.diff(sites) > 0)
