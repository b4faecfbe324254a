import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from molpuf.arbiter import (ArbiterConfig, HorizonExhaustedError, SignatureError,
                            evaluate_response, generate_signature, signatures_to_csv)
from molpuf.fabric import EnvironmentCondition, sample_rates, synthesize_puf
from molpuf.fixtures import PUBLISHED


def _puf(n, seed):
    return synthesize_puf(n, sample_rates(n, np.random.default_rng(seed)), seed)


@pytest.mark.parametrize("mode", ["race", "difference"])
def test_symmetric_puf_ties_to_one(mode):
    puf = synthesize_puf(6, np.full((2, 6), 16.0))
    rng = np.random.default_rng(0)
    for _ in range(5):
        r = evaluate_response(puf, rng.integers(0, 2, 6), config=ArbiterConfig(mode=mode))
        assert r.bit == 1
        assert r.t_top == pytest.approx(r.t_bottom, rel=1e-12)


@pytest.mark.parametrize("name", sorted(PUBLISHED))
def test_published_fixtures_both_modes(name):
    rates, challenge, expect = PUBLISHED[name]
    for mode in ("race", "difference"):
        puf = synthesize_puf(len(challenge), rates)
        assert evaluate_response(puf, challenge, config=ArbiterConfig(mode=mode)).bit == expect


def test_race_bit_follows_crossing_order():
    puf = _puf(4, 2)
    r = evaluate_response(puf, "0110")
    assert r.bit == int(r.t_top <= r.t_bottom)
    assert math.isfinite(r.t_top) and math.isfinite(r.t_bottom)


@settings(max_examples=12)
@given(st.integers(0, 10 ** 6), st.integers(1, 8))
def test_modes_agree_on_clear_margins(seed, n):
    puf = _puf(n, seed)
    c = np.random.default_rng(seed + 1).integers(0, 2, n)
    race = evaluate_response(puf, c, config=ArbiterConfig(mode="race"))
    diff = evaluate_response(puf, c, config=ArbiterConfig(mode="difference"))
    assert (race.t_top, race.t_bottom) == (diff.t_top, diff.t_bottom)
    if abs(race.t_top - race.t_bottom) > 1e-6:
        assert race.bit == diff.bit


def test_horizon_exhausted_carries_state():
    puf = _puf(4, 3)
    with pytest.raises(HorizonExhaustedError) as ei:
        evaluate_response(puf, "0000", config=ArbiterConfig(horizon=1e-3))
    assert ei.value.time == pytest.approx(1e-3)
    assert len(ei.value.state) == len(puf.crn.species)


def test_one_side_censored():
    puf = _puf(6, 4)
    full = evaluate_response(puf, "101100")
    first, last = sorted((full.t_top, full.t_bottom))
    r = evaluate_response(puf, "101100", config=ArbiterConfig(horizon=(first + last) / 2))
    assert r.bit == full.bit
    assert math.isinf(max(r.t_top, r.t_bottom))


def test_default_horizon():
    puf = _puf(8, 5)
    assert ArbiterConfig().horizon_for(puf) == pytest.approx(50 / puf.rates.min() * 8)
    assert ArbiterConfig(horizon=3.0).horizon_for(puf) == 3.0


def test_config_checks():
    for bad in ({"mode": "vote"}, {"threshold": 0}, {"threshold": 100}, {"horizon": -1.0}):
        with pytest.raises(ValueError):
            ArbiterConfig(**bad)


def test_signature_matches_single_evaluations_and_isolation():
    puf = _puf(5, 6)
    rng = np.random.default_rng(7)
    chs = rng.integers(0, 2, (6, 5))
    sig = generate_signature(puf, chs, puf_id=3)
    assert len(sig) == 6
    for i, c in enumerate(chs):
        assert sig.bits[i] == evaluate_response(puf, c).bit
    # order independence: reversed evaluation gives the reversed signature
    rev = generate_signature(puf, chs[::-1])
    assert rev.bits[::-1].tolist() == sig.bits.tolist()
    assert str(generate_signature(puf, chs[:1])) == str(sig.bits[0])


def test_repeated_challenge_constant_signature():
    puf = _puf(5, 8)
    sig = generate_signature(puf, ["10011"] * 4)
    assert len(set(sig.bits.tolist())) == 1
    assert len(set(sig.t_top.tolist())) == 1


def test_condition_applied_and_recorded():
    puf = _puf(4, 9)
    off = np.full((2, 4), 0.5)
    off[1] = -0.5
    sig = generate_signature(puf, ["0101"], EnvironmentCondition(7, off))
    shifted = synthesize_puf(4, puf.rates + off)
    assert sig.condition_id == 7
    assert sig.t_top[0] == evaluate_response(shifted, "0101").t_top


def test_signature_error_has_index():
    puf = _puf(3, 10)
    with pytest.raises(SignatureError) as ei:
        generate_signature(puf, ["010", "011", "111"], config=ArbiterConfig(horizon=1e-4))
    assert ei.value.index == 0
    with pytest.raises(ValueError):
        generate_signature(puf, ["01"])


def test_signature_csv():
    puf = _puf(3, 11)
    sig = generate_signature(puf, ["010", "110"], puf_id=2)
    text = signatures_to_csv([sig], ["hello"])
    lines = text.splitlines()
    assert lines[0] == "# hello"
    assert lines[1] == "puf_id,condition_id,challenge_index,response,t_top,t_bottom"
    row = lines[3].split(",")
    assert row[:4] == ["2", "0", "1", str(sig.bits[1])]
    assert float(row[4]) == sig.t_top[1]
