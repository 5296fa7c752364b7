from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import T1_ROWS
from noisyvlmc import (
    ContextTree,
    SamplePath,
    build_counts,
    compare_truncated,
    count_naive,
    delta,
    empirical_conditional,
    estimate_tree,
)
from noisyvlmc.tree import all_strings

binary_samples = st.text("01", min_size=6, max_size=60)


def test_small_sample_examples():
    s = "01010"
    trie = build_counts(SamplePath.from_string(s), 3)
    assert trie.count("01") == 2 == count_naive(s, "01")
    assert [trie.count(w) for w in all_strings(2)] == [0, 2, 2, 0]
    assert trie.count("010") == 2
    assert empirical_conditional(trie, 1, "0") == 0.75
    assert empirical_conditional(trie, 1, "") == pytest.approx(3 / 7, abs=1e-15)
    assert delta(trie, "0") == pytest.approx(9 / 28, abs=1e-15)
    assert delta(trie, "0") == float(oracles.delta(s, "0"))


def test_unseen_pair_has_zero_gap():
    trie = build_counts(SamplePath.from_string("00001100"), 4)
    assert trie.count("101") == 0 and trie.count("01") == 1
    assert delta(trie, "1101") == 0.0  # neither 1101 nor 101 is followed by anything
    assert delta(trie, "111") == pytest.approx(1 / 2 - 1 / 3)  # unseen, suffix 11 seen


@pytest.fixture(scope="module")
def random_samples():
    gen = np.random.default_rng(12345)
    return [gen.integers(0, 2, 200, dtype=np.uint8) for _ in range(1000)]


def test_counts_match_naive_on_random_samples(random_samples):
    words = [w for L in range(1, 7) for w in all_strings(L)]
    for x in random_samples[:100]:
        s = "".join(map(str, x))
        trie = build_counts(x, 5)
        for w in words:
            assert trie.count(w) == count_naive(s, w)


def test_per_level_sums(random_samples):
    for x in random_samples[:200]:
        trie = build_counts(x, 5)
        for j in range(1, 7):
            assert int(trie.counts(j, np.arange(2**j)).sum()) == 200 - j + 1 == trie.level_total(j)


def test_sparse_levels_agree_with_dense(monkeypatch, t1_law):
    from noisyvlmc import estimator
    x = t1_law.sample(5000, seed=4)
    dense = build_counts(x, 6)
    monkeypatch.setattr(estimator, "DENSE_LEVEL_MAX", 0)
    sparse = build_counts(x, 6)
    for L in range(0, 8):
        codes = np.arange(2**L)
        assert np.array_equal(dense.counts(L, codes), sparse.counts(L, codes))
        assert np.array_equal(dense.seen(L), sparse.seen(L))
    est_d = estimate_tree(x, 0.05, 6, trie=dense)
    est_s = estimate_tree(x, 0.05, 6, trie=sparse)
    assert est_d.contexts == est_s.contexts


@settings(max_examples=200, deadline=None)
@given(binary_samples, st.integers(1, 4), st.sampled_from(["1/100", "1/20", "1/10", "1/4", "1/2"]))
def test_estimator_matches_definition(s, d, thr):
    est = estimate_tree(SamplePath.from_string(s), float(Fraction(thr)), d)
    assert set(est.contexts) == oracles.estimate(s, thr, d)


@settings(max_examples=100, deadline=None)
@given(binary_samples, st.integers(1, 5), st.floats(0.001, 0.6))
def test_estimate_has_suffix_property(s, d, thr):
    est = estimate_tree(SamplePath.from_string(s), thr, d)
    for w in est.contexts:
        for v in est.contexts:
            assert v == w or not w.endswith(v)
    est.to_tree()  # validates


@settings(max_examples=100, deadline=None)
@given(binary_samples, st.integers(1, 4))
def test_binary_symmetry_of_gap(s, d):
    trie = build_counts(SamplePath.from_string(s), d)
    for L in range(1, d + 1):
        for w in all_strings(L):
            g0 = abs(empirical_conditional(trie, 0, w) - empirical_conditional(trie, 0, w[1:]))
            assert delta(trie, w) == pytest.approx(g0, abs=1e-15)


def test_threshold_at_or_above_one_is_memoryless(t1_law):
    x = t1_law.sample(2000, seed=7)
    est = estimate_tree(x, 1.0, 4)
    assert est.is_memoryless and est.contexts == frozenset()
    assert est.probs[""][1] == pytest.approx((x.symbols.sum() + 1) / (2000 + 2))
    assert est.to_tree().contexts == ("",)
    est = estimate_tree(x, est.max_delta, 4)
    assert est.is_memoryless


def test_noiseless_recovery_example(t1_law):
    x = t1_law.sample(10**5, seed=2007)
    est = estimate_tree(x, 0.07, 4)
    assert set(est.contexts) == set(T1_ROWS)
    for w, (p0, p1) in T1_ROWS.items():
        assert est.probs[w][1] == pytest.approx(p1, abs=0.02)


def test_all_zero_sample():
    # every gap is a smoothing artifact, yet the literal definition keeps
    # unseen children of seen all-zero nodes
    s = "0" * 50
    est = estimate_tree(SamplePath.from_string(s), 0.1, 3)
    assert set(est.contexts) == oracles.estimate(s, "1/10", 3) == {"1", "10", "100"}
    assert est.max_delta == pytest.approx(0.5 - 1 / 52)
    assert estimate_tree(SamplePath.from_string(s), 0.5, 3).is_memoryless


def test_deterministic(t1_law):
    x = t1_law.sample(3000, seed=8)
    a, b = estimate_tree(x, 0.05, 5), estimate_tree(x, 0.05, 5)
    assert a.contexts == b.contexts and a.probs == b.probs
    assert a.serialize() == b.serialize()


def test_serialized_estimate_is_a_tree_file(t1_law):
    from noisyvlmc import parse_tree
    est = estimate_tree(t1_law.sample(10**4, seed=1), 0.07, 4)
    text = est.serialize()
    assert text.startswith("# n=10000 d=4 delta=0.07 ")
    assert parse_tree(text).contexts == est.to_tree().contexts


def test_preconditions():
    x = SamplePath.from_string("0101")
    with pytest.raises(ValueError):
        estimate_tree(x, 0.1, 4)
    with pytest.raises(ValueError):
        estimate_tree(x, 0.1, 0)
    with pytest.raises(ValueError):
        delta(build_counts(x, 2), "010")


@pytest.mark.parametrize("est, K, equal, missing, extra", [
    (set(T1_ROWS), 2, True, set(), set()),
    ({"1", "0"}, 1, True, set(), set()),
    ({"1", "00", "10", "010"}, 2, True, set(), set()),
    ({"1", "00", "10", "010"}, 3, False, set(), {"010"}),
    ({"1", "0"}, 2, False, {"00", "10"}, {"0"}),
])
def test_compare_truncated(est, K, equal, missing, extra):
    r = compare_truncated(est, ContextTree(T1_ROWS), K)
    assert r.equal is equal
    assert r.missing == missing and r.extra == extra


def test_compare_memoryless_estimate(t1):
    r = compare_truncated(set(), t1, 2)
    assert not r.equal and r.missing == set(T1_ROWS)
