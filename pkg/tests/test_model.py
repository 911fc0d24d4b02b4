import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from copoly.exceptions import DimensionMismatch, EmptyRates, IdOutOfRange, NonPositiveRate
from copoly.model import (Attach, Detach, Polymer, decode_event, encode_event, monomer_counts,
                          total_exit_rate, validate_rates)


def test_validate_ref_rates():
    r = validate_rates([1, 1.2], [1.8, 2.592])
    assert r.d == 2
    assert r.k_plus.tolist() == [1.0, 1.2]
    assert r.k_minus.tolist() == [1.8, 2.592]


def test_validate_minimal_dimension():
    assert validate_rates([2], [1]).d == 1


@pytest.mark.parametrize("kp, km, exc", [
    ([1, -0.5], [1, 1], NonPositiveRate),
    ([1, 0.0], [1, 1], NonPositiveRate),
    ([1, 1], [1, math.inf], NonPositiveRate),
    ([1, 1], [math.nan, 1], NonPositiveRate),
    ([1, 1], [1], DimensionMismatch),
    ([], [], EmptyRates),
])
def test_validate_rejects(kp, km, exc):
    with pytest.raises(exc):
        validate_rates(kp, km)


def test_rateset_is_read_only():
    r = validate_rates([1, 2], [3, 4])
    with pytest.raises(ValueError):
        r.k_plus[0] = 5.0


@pytest.mark.parametrize("ids, d, expected", [
    ([0, 1, 0], 2, [2, 1]),
    ([], 3, [0, 0, 0]),
    ([1, 1, 1], 2, [0, 3]),
])
def test_monomer_counts(ids, d, expected):
    assert monomer_counts(Polymer(ids), d).tolist() == expected


def test_monomer_counts_out_of_range():
    with pytest.raises(IdOutOfRange):
        monomer_counts(Polymer([0, 2]), 2)


def test_total_exit_rate_ref():
    r = validate_rates([1, 1.2], [1.8, 2.592])
    assert total_exit_rate(Polymer(), r) == pytest.approx(2.2, abs=1e-15)
    assert total_exit_rate(Polymer([1, 0]), r) == pytest.approx(4.0, abs=1e-15)
    assert total_exit_rate(Polymer([0, 1]), r) == pytest.approx(4.792, abs=1e-15)


def test_root_cannot_pop():
    with pytest.raises(IndexError):
        Polymer().pop()


def test_event_codes_roundtrip():
    assert decode_event(encode_event(Attach(3))) == Attach(3)
    assert decode_event(encode_event(Detach())) == Detach()


def test_polymer_label():
    assert Polymer([0, 1, 0]).label() == "M1M2M1"
    assert Polymer().label() == "o"


rates_st = st.integers(1, 5).flatmap(lambda d: st.tuples(
    st.lists(st.floats(0.01, 10), min_size=d, max_size=d),
    st.lists(st.floats(0.01, 10), min_size=d, max_size=d)))


@given(rates_st, st.lists(st.integers(0, 4), max_size=30))
def test_exit_rate_bounded(rates, ids):
    r = validate_rates(*rates)
    p = Polymer([i % r.d for i in ids])
    q = total_exit_rate(p, r)
    assert r.k_plus_total <= q <= r.k_plus_total + r.k_minus.max()


@given(st.lists(st.integers(0, 3), max_size=30), st.integers(0, 3))
def test_counts_additive_and_push_pop_identity(ids, i):
    p = Polymer(ids)
    before = monomer_counts(p, 4)
    q = p.copy()
    q.push(i)
    unit = np.zeros(4, dtype=np.int64)
    unit[i] = 1
    assert np.array_equal(monomer_counts(q, 4), before + unit)
    q.pop()
    assert q == p
