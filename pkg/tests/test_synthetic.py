import numpy as np
import pytest

from pevdr.prices import hourly_std
from pevdr.synthetic import synthetic_prices


@pytest.fixture(scope="module")
def year():
    return synthetic_prices(7)


def test_shape_and_positivity(year):
    assert year.da.values.shape == year.rt.values.shape == (365, 24)
    assert year.da.values.min() > 0 and year.rt.values.min() > 0


def test_deterministic(year):
    again = synthetic_prices(7)
    assert np.array_equal(year.rt.values, again.rt.values)
    assert year.injections == again.injections
    assert not np.array_equal(synthetic_prices(8).rt.values, year.rt.values)


def test_spike_and_trough_on_chosen_day(year):
    spike = [i for i in year.injections if i.day == 68]
    assert [(i.hour, i.kind) for i in spike] == [(9, "spike"), (21, "trough")]
    assert year.rt.cell(68, 9) == year.da.cell(68, 9) * 8.0
    assert year.rt.cell(68, 21) == year.da.cell(68, 21) * 0.1


def test_no_trough_when_disabled():
    sp = synthetic_prices(7, days=80, trough_hour=None)
    assert [i.kind for i in sp.injections if i.day == 68] == ["spike"]


def test_at_most_one_spike_elsewhere(year):
    days = [i.day for i in year.injections if i.day != 68]
    assert len(days) == len(set(days))


@pytest.mark.parametrize("seed", [1, 7, 11])
def test_rt_more_volatile_than_da(seed):
    sp = synthetic_prices(seed)
    assert np.sum(hourly_std(sp.rt).sigma >= hourly_std(sp.da).sigma) >= 18
