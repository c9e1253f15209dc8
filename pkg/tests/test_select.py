import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2_contingency

from weasel_muse.bop import KeyCodec
from weasel_muse.core import BagOfPatterns, WordKey
from weasel_muse.select import (
    FeatureDictionary,
    chi2_scores,
    chi2_statistic,
    count_matrix,
    select_columns,
    select_features,
    vectorize,
    vectorize_packed,
)


def table_oracle(feature_counts, class_totals):
    """Sum of (O - E)^2 / E over the 2 x |Y| feature-vs-rest table."""
    f = np.asarray(feature_counts, dtype=float)
    t = np.asarray(class_totals, dtype=float)
    keep = t > 0
    f, t = f[keep], t[keep]
    table = np.vstack([f, t - f])
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    mask = expected > 0
    return float((((table - expected) ** 2)[mask] / expected[mask]).sum())


def test_proportional_counts_give_zero():
    assert chi2_statistic([5, 10, 15], [50, 100, 150]) == pytest.approx(0.0, abs=1e-12)


def test_two_class_example():
    # table [[10, 0], [90, 100]]: expected [[5, 5], [95, 95]]
    value = chi2_statistic([10, 0], [100, 100])
    assert value == pytest.approx(10.526315789473685, abs=1e-9)
    assert value == pytest.approx(table_oracle([10, 0], [100, 100]), abs=1e-9)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(1, 500), st.integers(0, 500)), min_size=2, max_size=6))
def test_statistic_matches_contingency_oracles(cells):
    totals = [t + f for t, f in cells]
    counts = [f for _, f in cells]
    got = chi2_statistic(counts, totals)
    assert got == pytest.approx(table_oracle(counts, totals), abs=1e-9, rel=1e-9)
    if sum(counts) > 0 and sum(t - f for t, f in zip(totals, counts)) > 0:
        ref = chi2_contingency(np.vstack([counts, np.subtract(totals, counts)]),
                               correction=False)[0]
        assert got == pytest.approx(ref, abs=1e-9, rel=1e-9)


@given(st.lists(st.tuples(st.integers(1, 100), st.integers(0, 100)), min_size=2, max_size=5),
       st.randoms())
def test_class_order_does_not_matter(cells, rnd):
    perm = list(cells)
    rnd.shuffle(perm)
    a = chi2_statistic([f for _, f in cells], [t + f for t, f in cells])
    b = chi2_statistic([f for _, f in perm], [t + f for t, f in perm])
    assert a == pytest.approx(b, abs=1e-9)


def test_empty_class_is_left_out():
    assert chi2_statistic([10, 0, 0], [100, 100, 0]) == pytest.approx(
        chi2_statistic([10, 0], [100, 100]))
    with pytest.raises(ValueError):
        chi2_statistic([3, 0], [10, 0])


def test_vectorized_scores_match_single_statistic():
    rng = np.random.default_rng(0)
    counts = rng.integers(0, 20, size=(3, 40))
    totals = counts.sum(axis=1) + 50
    scores = chi2_scores(counts, totals)
    for j in range(40):
        assert scores[j] == pytest.approx(chi2_statistic(counts[:, j], totals), abs=1e-9)


def bags_with_separator():
    sep, common = WordKey(0, 4, "ab"), WordKey(0, 4, "cd")
    bags, labels = [], []
    for i in range(10):
        # both classes get the same word total, so the common key is
        # exactly proportional to the class totals
        counts = {common: 3}
        counts[sep if i % 2 else WordKey(0, 4, "ba")] = 4
        bags.append(BagOfPatterns(counts))
        labels.append(i % 2)
    return bags, labels, sep, common


def test_separating_key_kept_uniform_key_dropped():
    bags, labels, sep, common = bags_with_separator()
    d = select_features(bags, labels, 2.0)
    assert sep in d and common not in d


def test_threshold_zero_keeps_everything():
    bags, labels, sep, common = bags_with_separator()
    assert set(select_features(bags, labels, 0.0).keys()) == {sep, common, WordKey(0, 4, "ba")}
    with pytest.raises(ValueError):
        select_features(bags, labels, -1.0)


def test_empty_selection_falls_back_to_all_with_warning():
    k = WordKey(0, 4, "ab")
    bags = [BagOfPatterns({k: 2}) for _ in range(4)]
    with pytest.warns(RuntimeWarning):
        d = select_features(bags, [0, 1, 0, 1], 2.0)
    assert list(d.keys()) == [k]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0, 10), st.floats(0, 10))
def test_raising_threshold_never_adds(seed, t1, t2):
    rng = np.random.default_rng(seed)
    X = sp.csr_matrix(rng.poisson(1.0, size=(12, 30)).astype(float))
    y = np.arange(12) % 3
    lo, hi = min(t1, t2), max(t1, t2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        a = set(select_columns(X, y, lo).tolist())
        b = set(select_columns(X, y, hi).tolist())
    if len(b) < X.shape[1] or len(a) == X.shape[1]:
        assert b <= a


def test_selection_invariant_to_sample_order():
    bags, labels, _, _ = bags_with_separator()
    rng = np.random.default_rng(1)
    extra = [BagOfPatterns({WordKey(1, 5, "ba"): int(rng.integers(1, 5))}) for _ in bags]
    bags = [a + b for a, b in zip(bags, extra)]
    perm = rng.permutation(len(bags))
    a = select_features(bags, labels)
    b = select_features([bags[i] for i in perm], [labels[i] for i in perm])
    assert a.strings() == b.strings()


def test_dictionary_order_is_lexicographic_on_text():
    keys = [WordKey(10, 4, "ab"), WordKey(2, 4, "ab"), WordKey(2, 12, "aa"), WordKey(2, 4, "aa", "bb")]
    d = FeatureDictionary(keys)
    assert d.strings() == sorted(str(k) for k in keys)
    assert [d.index(k) for k in d.keys()] == list(range(4))


def test_packed_dictionary_matches_key_dictionary():
    codec = KeyCodec(n_dims=12, max_window=15, word_length=2, alphabet_size=4)
    keys = [WordKey(11, 15, "ab"), WordKey(2, 4, "dd", "ab"), WordKey(1, 9, "ca")]
    packed = [codec.encode_key(k) for k in keys]
    a = FeatureDictionary.from_packed(packed, codec)
    b = FeatureDictionary(keys)
    assert a.strings() == b.strings()
    assert a.lookup_packed(packed).tolist() == [a.index(k) for k in keys]
    assert a.lookup_packed([codec.encode_key(WordKey(0, 4, "aa"))]).tolist() == [-1]


def test_vectorize_lookup():
    keys = [WordKey(0, 4, "ab"), WordKey(0, 4, "cd")]
    d = FeatureDictionary(keys)
    assert vectorize(BagOfPatterns(), d).nnz == 0
    assert vectorize(BagOfPatterns({WordKey(3, 4, "aa"): 5}), d).nnz == 0
    bag = BagOfPatterns({keys[1]: 3, keys[0]: 2, WordKey(1, 6, "dd"): 9})
    v = vectorize(bag, d).toarray().ravel()
    want = np.zeros(len(d))
    for k, c in bag.items():
        if k in d:
            want[d.index(k)] = c
    np.testing.assert_array_equal(v, want)


def test_packed_vectorization_matches_count_matrix():
    rows = np.array([0, 0, 1, 1, 1, 2])
    keys = np.array([7, 3, 7, 7, 9, 3])
    X, vocab = count_matrix(rows, keys, 3)
    assert vocab.tolist() == [3, 7, 9]
    np.testing.assert_array_equal(X.toarray(), [[1, 1, 0], [0, 2, 1], [1, 0, 0]])
    codec = KeyCodec(1, 4, 2, 4)
    d = FeatureDictionary.from_index_order(np.array([9, 7]), codec)
    np.testing.assert_array_equal(vectorize_packed(rows, keys, 3, d).toarray(),
                                  [[0, 1], [1, 2], [0, 0]])
