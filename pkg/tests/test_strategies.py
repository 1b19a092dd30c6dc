from fractions import Fraction

import pytest

from expost.model import AlternativeSet, Announcement, Valuation, z_valuation
from expost.strategies import (
    ConstantOff,
    ConstantOffset,
    MaximaPlusTen,
    NearlyTruth,
    Scaling,
    ShiftedTruth,
    Table,
    Truth,
    ValueOffset,
    communication_cost,
    make_maxima_plus_ten,
)

ALTS = AlternativeSet(("a1", "a2", "a3"))


def val(*xs):
    return Valuation(ALTS, tuple(Fraction(x) for x in xs))


def test_truth_is_identity():
    v = val(3, "-1/2", 7)
    assert Truth().apply(v).values == v.values


def test_nearly_truth_zero_floor():
    b = NearlyTruth(("a1", "a2"), floor=0).apply(val(3, 1, 2))
    assert b.values == (3, 1, 0)


def test_nearly_truth_default_floor_is_min():
    b = NearlyTruth(("a1", "a2"), ConstantOffset(2)).apply(val(3, 1, 9))
    assert b.values == (5, 3, 3)


def test_nearly_truth_floor_above_min_rejected():
    with pytest.raises(ValueError):
        NearlyTruth(("a1", "a2"), floor=2).apply(val(3, 1, 0))


def test_nearly_truth_negative_min_allowed():
    # the floor may sit below zero when the reported values do
    b = NearlyTruth(("a1",), ConstantOffset(-5)).apply(val(1, 0, 0))
    assert b.values == (-4, -4, -4)


def test_nearly_truth_subset_checked():
    with pytest.raises(ValueError):
        NearlyTruth(())
    with pytest.raises(ValueError):
        NearlyTruth(("zz",)).apply(val(1, 2, 3))


def test_value_offset():
    s = NearlyTruth(("a1", "a3"), ValueOffset("a2", 2, 1))
    assert s.apply(val(1, 3, 0)).values == (8, 7, 7)


def test_shifted_truth():
    assert ShiftedTruth(ConstantOffset(4)).apply(val(1, 2, 3)).values == (5, 6, 7)
    skew = ShiftedTruth(ConstantOffset(0), {"a2": 1})
    assert skew.apply(val(1, 2, 3)).values == (1, 3, 3)


def test_scaling():
    assert Scaling(2).apply(val(1, "1/2", 0)).values == (2, 1, 0)
    v = val(5, 4, "7/3")
    assert Scaling(1).apply(v).values == Truth().apply(v).values


def test_table_lookup_and_fallback():
    v = val(1, 2, 3)
    b = Announcement(ALTS, (0, 0, 9))
    t = Table({v: b})
    assert t.apply(v) is b
    # the non-negative flag does not change which entry matches
    assert t.apply(Valuation(ALTS, v.values, True)) is b
    with pytest.raises(KeyError):
        t.apply(val(0, 0, 0))
    assert Table({v: b}, Truth()).apply(val(0, 1, 0)).values == (0, 1, 0)


def test_maxima_plus_ten():
    s = make_maxima_plus_ten(("a1", "a2"))
    b = s.apply(val(2, 2, 1))
    assert b["a1"] == 12 and b["a2"] == 12 and b["a3"] == 0
    z = s.apply(z_valuation(ALTS, "a1", 5))
    assert z.values == (15, 10, 0)


def test_maxima_plus_ten_off_rule_range():
    assert MaximaPlusTen(("a1",), ConstantOff(9)).apply(val(1, 0, 0)).values == (11, 9, 9)
    with pytest.raises(ValueError):
        MaximaPlusTen(("a1",), ConstantOff(10)).apply(val(1, 0, 0))
    with pytest.raises(ValueError):
        MaximaPlusTen(())


@pytest.mark.parametrize(
    "strategy, n, cost",
    [
        (NearlyTruth(("a1", "a2", "a3")), 5, 4),
        (Truth(), 9, 9),
        (Scaling(3), 4, 4),
        (Table({}), 6, 6),
    ],
)
def test_communication_cost(strategy, n, cost):
    assert communication_cost(strategy, n) == cost


def test_communication_cost_full_subset():
    assert communication_cost(NearlyTruth(("a1", "a2", "a3")), 3) == 4
