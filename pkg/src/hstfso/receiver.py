"""APD direct-detection receiver: noise variances, SNR and OOK-NRZ bit error rate.

The signal term of the SNR is the primary (un-multiplied) photocurrent S*P,
while shot noise uses the multiplied current M*S*P. With the evaluation
parameters this pairing puts -21.94 dBm at 15.56 dB, i.e. BER 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq
from scipy.special import log_ndtr

from hstfso.errors import ConfigError, DomainError

ELECTRON_CHARGE_C = 1.602e-19
BOLTZMANN_J_PER_K = 1.38e-23

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ReceiverParams:
    sensitivity_a_per_w: float = 0.9
    apd_gain: float = 10.0
    excess_noise_factor: float = 3.2
    bandwidth_hz: float = 1e9
    load_resistance_ohm: float = 50.0
    temperature_k: float = 298.0
    electron_charge_c: float = ELECTRON_CHARGE_C
    boltzmann_j_per_k: float = BOLTZMANN_J_PER_K

    def __post_init__(self):
        for name in (
            "sensitivity_a_per_w",
            "bandwidth_hz",
            "load_resistance_ohm",
            "temperature_k",
            "electron_charge_c",
            "boltzmann_j_per_k",
        ):
            if not getattr(self, name) > 0:
                raise ConfigError(f"receiver: {name} must be > 0")
        if not self.apd_gain >= 1:
            raise ConfigError("receiver: apd_gain must be >= 1")
        if not self.excess_noise_factor >= 1:
            raise ConfigError("receiver: excess_noise_factor must be >= 1")


@dataclass(frozen=True)
class NoiseBudget:
    shot_variance_a2: float
    thermal_variance_a2: float
    # dark-current and background terms are neglected and always zero
    dark_variance_a2: float = 0.0
    background_variance_a2: float = 0.0

    @property
    def total_variance_a2(self) -> float:
        return (
            self.shot_variance_a2
            + self.thermal_variance_a2
            + self.dark_variance_a2
            + self.background_variance_a2
        )


def shot_noise_variance(params: ReceiverParams, received_power_w: float) -> float:
    if received_power_w < 0:
        raise DomainError("shot_noise_variance: power must be >= 0")
    i_s = params.sensitivity_a_per_w * received_power_w
    i_m = params.apd_gain * i_s
    return (
        2.0
        * params.electron_charge_c
        * params.apd_gain
        * i_m
        * params.excess_noise_factor
        * params.bandwidth_hz
    )


def thermal_noise_variance(params: ReceiverParams) -> float:
    return (
        4.0 * params.boltzmann_j_per_k * params.temperature_k * params.bandwidth_hz
        / params.load_resistance_ohm
    )


def noise_budget(params: ReceiverParams, received_power_w: float) -> NoiseBudget:
    return NoiseBudget(
        shot_variance_a2=shot_noise_variance(params, received_power_w),
        thermal_variance_a2=thermal_noise_variance(params),
    )


def snr(params: ReceiverParams, received_power_w: float) -> float:
    """Linear electrical SNR for a given received optical power."""
    if not received_power_w > 0:
        raise DomainError("snr: received power must be > 0")
    signal = (params.sensitivity_a_per_w * received_power_w) ** 2
    return signal / noise_budget(params, received_power_w).total_variance_a2


def shot_thermal_crossover_w(params: ReceiverParams) -> float:
    """Power at which shot and thermal variances are equal."""
    per_watt = shot_noise_variance(params, 1.0)
    return thermal_noise_variance(params) / per_watt


def q_function(x: float) -> float:
    """Gaussian tail probability P(Z > x).

    Relative error stays near machine precision while the result is a normal
    double (x up to about 37.5); past that it underflows to subnormals and zero.
    """
    return 0.5 * math.erfc(x / _SQRT2)


def log_q_function(x: float) -> float:
    """Natural log of the Gaussian tail, finite far beyond double underflow."""
    return float(log_ndtr(-x))


def ber_ook_nrz(snr_linear: float) -> float:
    if snr_linear < 0:
        raise DomainError("ber_ook_nrz: SNR must be >= 0")
    return q_function(math.sqrt(snr_linear))


def log_ber_ook_nrz(snr_linear: float) -> float:
    if snr_linear < 0:
        raise DomainError("log_ber_ook_nrz: SNR must be >= 0")
    return log_q_function(math.sqrt(snr_linear))


POWER_BRACKET_W = (1e-15, 1.0)


def required_power_for_ber(params: ReceiverParams, ber_target: float) -> float:
    """Smallest received power (W) whose OOK-NRZ BER does not exceed ``ber_target``.

    Solved in log-power / log-BER space so the bracket ends do not underflow.
    """
    if not 0 < ber_target < 0.5:
        raise DomainError("required_power_for_ber: target must lie in (0, 0.5)")
    log_target = math.log(ber_target)

    def excess(log10_p):
        return log_ber_ook_nrz(snr(params, 10.0**log10_p)) - log_target

    lo, hi = (math.log10(p) for p in POWER_BRACKET_W)
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo < 0 or f_hi > 0:
        raise DomainError(
            f"required_power_for_ber: BER {ber_target:g} not bracketed within "
            f"[{POWER_BRACKET_W[0]:g}, {POWER_BRACKET_W[1]:g}] W"
        )
    root = brentq(excess, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    return 10.0**root
