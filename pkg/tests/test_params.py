import math

import pytest

from cvdvrate.params import ChannelSpec, TmsvParam, as_chi


def test_mean_photons():
    assert TmsvParam(0.5).mean_photons == pytest.approx(1 / 3)
    assert TmsvParam(0.9).mean_photons == pytest.approx(0.81 / 0.19)
    assert TmsvParam(0.0).mean_photons == 0.0


def test_squeezing_r_matches_sinh():
    r = TmsvParam(0.5).squeezing_r
    assert math.sinh(r) ** 2 == pytest.approx(1 / 3)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5])
def test_chi_out_of_range(bad):
    with pytest.raises(ValueError):
        TmsvParam(bad)


def test_as_chi_passthrough():
    p = TmsvParam(0.3)
    assert as_chi(p) is p
    assert as_chi(0.3) == p


def test_channel_transmittance():
    assert ChannelSpec(200).transmittance == pytest.approx(1e-4)
    assert ChannelSpec(100).transmittance == pytest.approx(1e-2)
    assert ChannelSpec(0).transmittance == 1.0


def test_channel_split_and_timing():
    total = ChannelSpec(400)
    half = total.split(2)
    assert half.length_km == 200
    assert half.travel_time_s == pytest.approx(1e-3)
    assert total.travel_time_s == pytest.approx(2e-3)


def test_channel_validation():
    with pytest.raises(ValueError):
        ChannelSpec(-1)
    with pytest.raises(ValueError):
        ChannelSpec(10, attenuation_db_per_km=0)
