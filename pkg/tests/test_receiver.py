import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from hstfso.errors import ConfigError, DomainError
from hstfso.receiver import (
    ReceiverParams,
    ber_ook_nrz,
    noise_budget,
    q_function,
    required_power_for_ber,
    shot_noise_variance,
    shot_thermal_crossover_w,
    snr,
    thermal_noise_variance,
)
from hstfso.units import dbm_to_watts, from_db, watts_to_dbm

T1 = ReceiverParams()


def test_shot_noise():
    assert shot_noise_variance(T1, 0.0) == 0.0
    assert shot_noise_variance(T1, 6.397e-6) == pytest.approx(5.902844544e-13, rel=1e-12)
    assert shot_noise_variance(T1, 2e-6) == pytest.approx(2 * shot_noise_variance(T1, 1e-6), rel=1e-15)


def test_thermal_noise():
    assert thermal_noise_variance(T1) == pytest.approx(3.28992e-13, rel=1e-12)
    half = ReceiverParams(load_resistance_ohm=25.0)
    assert thermal_noise_variance(half) == pytest.approx(2 * thermal_noise_variance(T1), rel=1e-15)


def test_zero_bandwidth_rejected_by_params():
    # a zero-bandwidth receiver has zero thermal variance but is not a valid configuration
    with pytest.raises(ConfigError):
        ReceiverParams(bandwidth_hz=0.0)


def test_noise_budget_sums():
    nb = noise_budget(T1, 1e-5)
    assert nb.total_variance_a2 == nb.shot_variance_a2 + nb.thermal_variance_a2
    assert nb.dark_variance_a2 == 0.0 and nb.background_variance_a2 == 0.0


def test_snr_anchor():
    gamma = snr(T1, 6.397e-6)
    assert gamma == pytest.approx(36.0571655363830, rel=1e-12)
    assert 10 * math.log10(gamma) == pytest.approx(15.56, abs=0.05)


def test_snr_slopes():
    lo = [snr(T1, p) for p in (1e-12, 2e-12)]
    hi = [snr(T1, p) for p in (1.0, 2.0)]
    assert math.log2(lo[1] / lo[0]) == pytest.approx(2.0, abs=1e-4)
    assert math.log2(hi[1] / hi[0]) == pytest.approx(1.0, abs=1e-4)


def test_crossover_power_matches_scan():
    analytic = shot_thermal_crossover_w(T1)
    assert analytic == pytest.approx(3.56533499791927e-6, rel=1e-12)
    grid = np.geomspace(1e-8, 1e-3, 20001)
    diff = [shot_noise_variance(T1, p) - thermal_noise_variance(T1) for p in grid]
    idx = int(np.argmax(np.array(diff) > 0))
    assert grid[idx - 1] < analytic <= grid[idx]


def test_q_function_examples():
    assert q_function(0.0) == 0.5
    assert q_function(6.0) == pytest.approx(9.865876450376981e-10, rel=1e-13)
    for x in (0.3, 1.7, 4.2):
        assert q_function(-x) == pytest.approx(1 - q_function(x), rel=1e-15)


@pytest.mark.parametrize("x", [0.0, 0.1, 0.5, 1.0, 2.5, 5.0, 6.0, 8.0, 12.0, 20.0, 26.0, 30.0, 35.0, 37.0, 37.5])
def test_q_function_against_quadrature(x):
    ref = oracle.q_tail(x)
    assert abs(mp.mpf(q_function(x)) - ref) / ref <= 1e-12


@settings(max_examples=200)
@given(st.floats(min_value=-8.0, max_value=8.0))
def test_q_reflection(x):
    assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-12)


def test_ber_examples():
    assert ber_ook_nrz(0.0) == 0.5
    assert ber_ook_nrz(36.0) <= 1e-9
    assert ber_ook_nrz(1e6) == 0.0
    assert ber_ook_nrz(from_db(15.56)) <= 1e-9 < ber_ook_nrz(from_db(15.5))


def test_required_power_anchor():
    p = required_power_for_ber(T1, 1e-9)
    assert watts_to_dbm(p) == pytest.approx(-21.94, abs=0.02)
    # closed-form quadratic inverse from the oracle
    assert p == pytest.approx(float(oracle.required_power(mp.mpf("1e-9"))), rel=1e-9)


def test_required_power_near_half():
    assert required_power_for_ber(T1, 0.5 - 1e-6) < 1e-11


@pytest.mark.parametrize("bad", [0.0, 0.5, 0.7, -1e-9])
def test_required_power_domain(bad):
    with pytest.raises(DomainError):
        required_power_for_ber(T1, bad)


def test_required_power_unbracketable():
    deaf = ReceiverParams(sensitivity_a_per_w=1e-12)
    with pytest.raises(DomainError):
        required_power_for_ber(deaf, 1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-30.0, max_value=-1.0))
def test_required_power_roundtrip(log10_ber):
    b = 10.0**log10_ber
    p = required_power_for_ber(T1, b)
    assert ber_ook_nrz(snr(T1, p)) == pytest.approx(b, rel=1e-9)


@given(st.floats(min_value=-150.0, max_value=20.0), st.floats(min_value=-150.0, max_value=20.0))
def test_snr_increasing(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-9:
        return
    assert snr(T1, dbm_to_watts(lo)) < snr(T1, dbm_to_watts(hi))


@given(st.floats(min_value=0.0, max_value=1e4), st.floats(min_value=0.0, max_value=1e4))
def test_ber_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert ber_ook_nrz(lo) >= ber_ook_nrz(hi)


def test_params_invariants():
    with pytest.raises(ConfigError):
        ReceiverParams(apd_gain=0.5)
    with pytest.raises(ConfigError):
        ReceiverParams(excess_noise_factor=0.9)
    with pytest.raises(DomainError):
        snr(T1, 0.0)
