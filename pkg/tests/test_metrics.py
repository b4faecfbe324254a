import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from molpuf.metrics import (feasible, gaussian_fit, hamming_distance, inter_distances,
                            intra_distances, p_inter, p_intra, reliability, uniqueness,
                            variation_stats, VariationStats)

bits = st.lists(st.integers(0, 1), min_size=1, max_size=64)


def test_hd_examples():
    assert hamming_distance([1, 0, 1], [1, 1, 1]) == 1
    x = np.array([1, 0, 0, 1, 1])
    assert hamming_distance(x, x) == 0
    assert hamming_distance(x, 1 - x) == len(x)
    with pytest.raises(ValueError):
        hamming_distance([1, 0], [1])


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, 1), min_size=n, max_size=n)] * 3)))
def test_hd_metric_axioms(v):
    a, b, c = v
    assert hamming_distance(a, b) == hamming_distance(b, a)
    assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


def test_p_intra_examples():
    same = [[0, 1, 1]] * 5
    assert p_intra(same) == 0
    a = np.zeros(200, dtype=int)
    b = a.copy()
    b[:2] = 1
    assert p_intra([a, b]) == 0.01


def test_p_intra_divisor_and_all_pairs():
    r = [[0, 0, 0, 0], [1, 0, 0, 0], [1, 1, 0, 0]]
    # HD(R1,R2)=1, HD(R1,R3)=2 over L=4
    assert p_intra(r) == pytest.approx((0.25 + 0.5) / 2)
    assert p_intra(r, divisor="m") == pytest.approx((0.25 + 0.5) / 3)
    assert p_intra(r, all_pairs=True) == pytest.approx((0.25 + 0.5 + 0.25) / 3)
    with pytest.raises(ValueError):
        p_intra(r, divisor="x")
    with pytest.raises(ValueError):
        p_intra([[0, 1]])


def test_reliability_uniqueness_examples():
    assert reliability(0) == 1
    assert reliability(0.0007) == pytest.approx(0.9993)
    assert reliability(0.0068) == pytest.approx(0.9932)
    assert uniqueness(0.5) == 1.0
    assert uniqueness(0.0) == 0.0 and uniqueness(1.0) == 0.0
    assert uniqueness(0.4998) == pytest.approx(0.9996)
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ValueError):
            reliability(bad)
        with pytest.raises(ValueError):
            uniqueness(bad)


@given(st.floats(0, 1))
def test_uniqueness_symmetric(p):
    assert uniqueness(p) == pytest.approx(uniqueness(1 - p), abs=1e-15)


def test_p_inter_examples():
    assert p_inter([[0, 1, 1], [0, 1, 1]]) == 0
    assert p_inter([[0, 1, 1], [1, 0, 0]]) == 1
    with pytest.raises(ValueError):
        p_inter([[0, 1]])


@given(st.integers(2, 7), st.integers(1, 20), st.randoms(use_true_random=False))
def test_p_inter_brute_force_and_permutation(k, n, rnd):
    r = [[rnd.randint(0, 1) for _ in range(n)] for _ in range(k)]
    brute = [hamming_distance(a, b) / n for a, b in itertools.combinations(r, 2)]
    np.testing.assert_allclose(inter_distances(r), brute)
    assert p_inter(r) == pytest.approx(sum(brute) / len(brute))
    shuffled = r[:]
    rnd.shuffle(shuffled)
    assert p_inter(shuffled) == pytest.approx(p_inter(r), abs=1e-15)


def test_intra_distances_reference_first():
    r = [[0, 0], [0, 1], [1, 1]]
    assert intra_distances(r).tolist() == [0.5, 1.0]


def test_variation_stats_and_fit():
    s = variation_stats([0.4, 0.6])
    assert (s.max, s.min, s.mean) == (0.6, 0.4, 0.5)
    one = variation_stats([0.3])
    assert one == VariationStats(0.3, 0.3, 0.3)
    assert gaussian_fit([0.3]).std == 0.0
    f = gaussian_fit([1.0, 2.0, 3.0, 4.0])
    assert f.mean == 2.5 and f.std == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert f.pdf(2.5) == pytest.approx(1 / (f.std * np.sqrt(2 * np.pi)))
    with pytest.raises(ValueError):
        variation_stats([])
    with pytest.raises(ValueError):
        gaussian_fit([])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=50))
def test_stats_ordering(xs):
    s = variation_stats(xs)
    assert s.min <= s.mean + 1e-12 and s.mean <= s.max + 1e-12
    assert gaussian_fit(xs).std >= 0


def test_feasible():
    assert feasible(VariationStats(0.05, 0.0, 0.01), VariationStats(0.8, 0.2, 0.5))
    assert not feasible(VariationStats(0.2, 0.0, 0.01), VariationStats(0.8, 0.2, 0.5))
