from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weasel_muse.bop import (
    ExtractionConfig,
    KeyCodec,
    WindowCache,
    bag_order_invariance_check,
    build_bag,
    default_window_lengths,
    extract_keys,
    fit_sfa_cached,
    prepare_streams,
)
from weasel_muse.core import BagOfPatterns, Dataset, MultivariateSeries, WordKey
from weasel_muse.sfa import EQUI_FREQUENCY

from conftest import random_dataset


def fitted(ds, **cfg_kw):
    cfg = ExtractionConfig(**cfg_kw)
    if cfg.window_lengths is None:
        cfg = cfg.with_(window_lengths=default_window_lengths(ds))
    cache = WindowCache(ds.arrays(), cfg.window_lengths, cfg.use_derivatives, cfg.word_length,
                        cfg.include_dc, cfg.normalize_windows)
    return cfg, cache, fit_sfa_cached(cache, cfg)


def naive_bag(sample, sfa, cfg):
    """Enumerate every window directly, word it, count unigrams and bigrams."""
    streams = prepare_streams(sample.values, cfg.use_derivatives)
    counts = Counter()
    for d, stream in enumerate(streams):
        dim = d if cfg.multivariate_ids else 0
        for w in cfg.window_lengths:
            if w > len(stream) or not sfa.has(d, w):
                continue
            prev = None
            for a in range(len(stream) - w + 1):
                word = sfa.window_word(d, stream[a:a + w])
                counts[WordKey(dim, w, word)] += 1
                if cfg.use_bigrams and prev is not None:
                    counts[WordKey(dim, w, word, prev)] += 1
                prev = word
    return BagOfPatterns(counts)


def test_default_window_lengths():
    def ds_of(*lengths):
        return Dataset(MultivariateSeries(np.zeros((1, n)), "a") for n in lengths)

    assert default_window_lengths(ds_of(15, 15)) == tuple(range(4, 16))
    assert len(default_window_lengths(ds_of(15))) == 12
    assert default_window_lengths(ds_of(4)) == (4,)
    assert default_window_lengths(ds_of(4, 50, 93)) == tuple(range(4, 94))
    assert default_window_lengths(ds_of(20), step=5) == (4, 9, 14, 19)
    with pytest.raises(ValueError):
        default_window_lengths(ds_of(3))


def test_config_rejects_short_windows():
    with pytest.raises(ValueError):
        ExtractionConfig(window_lengths=(3, 5))
    assert ExtractionConfig(window_lengths=(9, 5, 5)).window_lengths == (5, 9)


def test_window_counts():
    ds = random_dataset(n_per_class=3, n_dims=1, length=17)
    cfg, _, sfa = fitted(ds, window_lengths=(6,), use_derivatives=False, use_bigrams=False)
    assert build_bag(ds[0], sfa, cfg).total() == 17 - 6 + 1
    cfg = cfg.with_(use_bigrams=True)
    assert build_bag(ds[0], sfa, cfg).total() == (17 - 6 + 1) + (17 - 6)


def test_unigram_total_sums_over_dimensions():
    ds = random_dataset(n_per_class=2, n_dims=3, length=12, vary_length=True)
    cfg, _, sfa = fitted(ds, window_lengths=(5,), use_derivatives=False, use_bigrams=False)
    for s in ds:
        assert build_bag(s, sfa, cfg).total() == 3 * max(0, s.length - 5 + 1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans(), st.booleans(), st.booleans(), st.booleans(),
       st.sampled_from([2, 4, 6]))
def test_build_bag_matches_naive_enumeration(seed, bigrams, derivs, multi, normalize, l):
    ds = random_dataset(n_per_class=3, n_dims=2, length=14, seed=seed, vary_length=True)
    cfg, _, sfa = fitted(ds, word_length=l, use_bigrams=bigrams, use_derivatives=derivs,
                         multivariate_ids=multi, normalize_windows=normalize,
                         include_dc=not normalize, binning=EQUI_FREQUENCY)
    # held-out samples: training windows can sit exactly on an equi-frequency
    # edge, where the two Fourier paths may round to different sides
    held_out = random_dataset(n_per_class=2, n_dims=2, length=14, seed=seed + 1,
                              vary_length=True)
    for s in held_out:
        assert build_bag(s, sfa, cfg) == naive_bag(s, sfa, cfg)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans(), st.booleans())
def test_packed_extraction_matches_build_bag(seed, bigrams, multi):
    ds = random_dataset(n_per_class=3, n_dims=2, length=13, seed=seed, vary_length=True)
    cfg, cache, sfa = fitted(ds, use_bigrams=bigrams, multivariate_ids=multi)
    codec = KeyCodec(cache.n_streams, max(cfg.window_lengths), cfg.word_length, cfg.alphabet_size)
    rows, keys = extract_keys(cache, sfa, cfg, codec)
    for i, s in enumerate(ds):
        packed = Counter(codec.decode(k) for k in keys[rows == i])
        assert BagOfPatterns(packed) == build_bag(s, sfa, cfg)


def test_univariate_ids_collapse_to_dimension_zero():
    ds = random_dataset(n_per_class=2, n_dims=3, length=10)
    cfg, _, sfa = fitted(ds, multivariate_ids=False)
    assert {k.dim_id for k in build_bag(ds[0], sfa, cfg)} == {0}
    cfg, _, sfa = fitted(ds)
    assert {k.dim_id for k in build_bag(ds[0], sfa, cfg)} == set(range(6))


def test_removing_a_dimension_removes_only_its_keys():
    ds = random_dataset(n_per_class=2, n_dims=3, length=12)
    cfg, _, sfa = fitted(ds, use_derivatives=False)
    full = build_bag(ds[0], sfa, cfg)
    reduced = build_bag(MultivariateSeries(ds[0].values[:2]), sfa, cfg)
    assert reduced == full.restrict(lambda k: k.dim_id != 2)


def test_words_from_different_dimensions_never_collide():
    # identical content in both dimensions still yields disjoint keys
    x = np.random.default_rng(0).normal(size=12).cumsum()
    ds = Dataset([MultivariateSeries(np.vstack([x, x]), "a"),
                  MultivariateSeries(np.vstack([x[::-1], x[::-1]]), "b")])
    cfg, _, sfa = fitted(ds, use_derivatives=False)
    bag = build_bag(ds[0], sfa, cfg)
    d0 = {(k.window_len, k.letters, k.prev_letters) for k in bag if k.dim_id == 0}
    d1 = {(k.window_len, k.letters, k.prev_letters) for k in bag if k.dim_id == 1}
    assert d0 == d1
    assert len(bag) == 2 * len(d0)


def test_short_sample_emits_nothing_for_long_windows():
    ds = random_dataset(n_per_class=2, n_dims=1, length=12)
    cfg, _, sfa = fitted(ds)
    bag = build_bag(MultivariateSeries(np.arange(5.0)[None, :]), sfa, cfg)
    assert {k.window_len for k in bag} <= {4, 5}


def test_codec_roundtrip():
    codec = KeyCodec(n_dims=4, max_window=30, word_length=6, alphabet_size=4)
    keys = [WordKey(3, 30, "abcdab"), WordKey(0, 4, "dcba"), WordKey(1, 5, "abcd", "dddd"),
            WordKey(2, 17, "aaaaaa", "dddddd")]
    for k in keys:
        assert codec.decode(codec.encode_key(k)) == k
    assert len({codec.encode_key(k) for k in keys}) == len(keys)


def naive_segment_counts(values, spans, sfa, cfg):
    streams = prepare_streams(values, cfg.use_derivatives)
    m = values.shape[0]
    out = Counter()
    for d, stream in enumerate(streams):
        skip = 1 if d >= m else 0
        for w in cfg.window_lengths:
            for start, length in spans:
                for a in range(start + skip, start + length - w + 1):
                    out[(d, w, sfa.window_word(d, stream[a:a + w]))] += 1
    return out


def test_order_invariance_identity_and_palindrome():
    ds = random_dataset(n_per_class=2, n_dims=2, length=16)
    cfg, _, sfa = fitted(ds)
    assert bag_order_invariance_check(ds[0], ds[0], sfa, cfg)
    half = np.random.default_rng(1).normal(size=(2, 8))
    pal = np.hstack([half, half[:, ::-1]])
    assert bag_order_invariance_check(pal, pal[:, ::-1], sfa, cfg)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(5, 8), st.booleans())
def test_segment_swap_matches_naive_recount(seed, seg_len, derivs):
    rng = np.random.default_rng(seed)
    ds = random_dataset(n_per_class=2, n_dims=2, length=24, seed=seed)
    cfg, _, sfa = fitted(ds, window_lengths=(4, 5), use_derivatives=derivs)
    x = ds[0].values
    s1 = int(rng.integers(0, 24 - 2 * seg_len + 1))
    s2 = int(rng.integers(s1 + seg_len, 24 - seg_len + 1))
    y = x.copy()
    y[:, s1:s1 + seg_len], y[:, s2:s2 + seg_len] = x[:, s2:s2 + seg_len], x[:, s1:s1 + seg_len]
    got = bag_order_invariance_check(x, y, sfa, cfg, ((s1, s2), seg_len))
    oracle = (naive_segment_counts(x, [(s1, seg_len), (s2, seg_len)], sfa, cfg)
              == naive_segment_counts(y, [(s2, seg_len), (s1, seg_len)], sfa, cfg))
    assert got == oracle
    assert got
