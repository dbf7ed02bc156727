import pytest

from brst_reduction.series import NuSeries, series_sum


def test_coefficients_above_order_are_dropped():
    s = NuSeries({0: 1, 3: 2, 5: 7}, order=4)
    assert s.orders() == [0, 3]
    assert s.valuation() == 0


def test_zero_coefficients_are_not_stored():
    assert not NuSeries({0: 0, 1: 0})
    assert len(NuSeries({1: 3, 2: 0})) == 1


def test_product_truncates():
    a = NuSeries({0: 1, 1: 1}, order=2)
    assert a * a == NuSeries({0: 1, 1: 2, 2: 1}, order=2)
    assert (a * a * a).coefficient(3) == 0


def test_shift_and_negative_order():
    a = NuSeries({1: 5}, order=3)
    assert a.shift(-2) == NuSeries({-1: 5}, order=3)
    with pytest.raises(ValueError):
        NuSeries({-2: 1})


def test_equality_compares_up_to_common_order():
    assert NuSeries({0: 1, 3: 1}, order=3) == NuSeries({0: 1}, order=2)
    assert NuSeries({0: 1, 1: 1}, order=3) != NuSeries({0: 1}, order=3)


def test_truncated_flag_propagates():
    a = NuSeries({0: 1}, order=2).flagged()
    assert (a + NuSeries({1: 1}, order=2)).truncated
    assert not NuSeries({0: 1}).truncated


def test_series_sum():
    total = series_sum([NuSeries.monomial(1, k, 4) for k in range(3)], 4)
    assert total == NuSeries({0: 1, 1: 1, 2: 1}, order=4)
