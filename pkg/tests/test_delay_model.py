import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from molpuf.delay_model import (DelayPuf, delay_difference, features, monte_carlo_metrics,
                                response, responses, sample_delay_puf, transform_challenge)


def brute_transform(c):
    n = len(c)
    return [sum(c[j] for j in range(i + 1, n)) % 2 for i in range(n)]


def race(dt, db, c):
    """Trace both edges through the stages; returns top minus bottom arrival time."""
    top = bot = 0.0
    for i, bit in enumerate(c):
        if bit:
            top, bot = bot + dt[i], top + db[i]
        else:
            top, bot = top + dt[i], bot + db[i]
    return top - bot


@pytest.mark.parametrize("c, expect", [
    ([1, 0, 1], [1, 1, 0]),
    ([0, 0, 0, 0], [0, 0, 0, 0]),
    ([1, 1, 1, 1], [1, 0, 1, 0]),
])
def test_transform_examples(c, expect):
    assert transform_challenge(c).tolist() == expect


@pytest.mark.parametrize("n", range(1, 13))
def test_transform_exhaustive(n):
    cs = np.array(list(itertools.product((0, 1), repeat=n)))
    batch = (1 - features(cs)) / 2
    for c, row in zip(cs, batch):
        want = brute_transform(c.tolist())
        assert transform_challenge(c).tolist() == want
        assert row.tolist() == want
        assert want[-1] == 0


def test_tie_and_single_stage():
    assert response(DelayPuf(np.zeros(5)), [1, 0, 1, 1, 0]) == 1
    for c in ([0], [1]):
        p = DelayPuf(np.array([-2.5]))
        assert delay_difference(p, c) == -2.5
        assert response(p, c) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matches_path_tracing(n):
    rng = np.random.default_rng(n)
    dt, db = rng.normal(16, 1, n), rng.normal(16, 1, n)
    puf = DelayPuf(dt - db)
    for c in itertools.product((0, 1), repeat=n):
        assert delay_difference(puf, c) == pytest.approx(race(dt, db, c), abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flipping_last_bit_negates_earlier_stages(n):
    rng = np.random.default_rng(10 + n)
    puf = DelayPuf(rng.normal(size=n))
    for c in itertools.product((0, 1), repeat=n):
        c = list(c)
        flipped = c[:-1] + [1 - c[-1]]
        a, b = delay_difference(puf, c), delay_difference(puf, flipped)
        last = puf.delta[-1]
        assert b - last == pytest.approx(-(a - last))


@given(st.integers(1, 16), st.integers(0, 2 ** 32 - 1), st.floats(0.01, 100))
def test_sign_flip_and_scale_invariance(n, seed, scale):
    rng = np.random.default_rng(seed)
    delta = rng.normal(size=n)
    noise = rng.normal(0, 0.1, n)
    c = rng.integers(0, 2, n)
    r = delay_difference(DelayPuf(delta), c, noise)
    assert delay_difference(DelayPuf(-delta), c, -noise) == pytest.approx(-r)
    if r != 0:
        assert response(DelayPuf(-delta), c, -noise) == 1 - response(DelayPuf(delta), c, noise)
    assert response(DelayPuf(delta * scale), c, noise * scale) == response(DelayPuf(delta), c, noise)


def test_batch_responses_match_scalar():
    rng = np.random.default_rng(0)
    deltas = rng.normal(size=(5, 7))
    cs = rng.integers(0, 2, (9, 7))
    out = responses(deltas, cs)
    for k in range(5):
        for j in range(9):
            assert out[k, j] == response(DelayPuf(deltas[k]), cs[j])


def test_sampled_delta_variance():
    rng = np.random.default_rng(1)
    p = sample_delay_puf(20000, rng, sigma=1.0)
    assert p.delta.var() == pytest.approx(2.0, rel=0.05)


def test_monte_carlo_no_noise():
    m = monte_carlo_metrics(8, 1.0, 0.0, 5, 4, 30, np.random.default_rng(2))
    assert m.p_intra == 0.0
    assert m.intra.shape == (5, 3) and m.inter.shape == (10,)


def test_monte_carlo_large_scale_near_half():
    m = monte_carlo_metrics(16, 1.0, 0.05, 200, 2, 200, np.random.default_rng(3))
    assert 0.49 <= m.p_inter <= 0.51


def test_uniqueness_grows_with_stages():
    """Averaged over replicates, uniqueness rises and inter-chip spread shrinks with N."""
    rng = np.random.default_rng(4)
    u, spread, low = [], [], []
    for n in (1, 4, 16, 64):
        runs = [monte_carlo_metrics(n, 1.0, 0.0, 20, 2, 50, rng) for _ in range(40)]
        u.append(np.mean([1 - abs(2 * m.p_inter - 1) for m in runs]))
        spread.append(np.mean([m.inter.std() for m in runs]))
        low.append(np.mean([m.inter.min() for m in runs]))
    assert u == sorted(u)
    assert spread == sorted(spread, reverse=True)
    assert low == sorted(low)


def test_monte_carlo_preconditions():
    with pytest.raises(ValueError):
        monte_carlo_metrics(4, 1.0, 0.0, 1, 2, 5, np.random.default_rng(0))
