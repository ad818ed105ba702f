"""Clear-air link budget: Friis product with Gaussian-beam gains and aperture losses."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from hstfso.errors import ConfigError, DomainError
from hstfso.units import diameter_from_area


class BeamOrigin(str, enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class OpticalParams:
    """Transmitter/receiver optics.

    ``system_loss`` lumps the pointing losses and optical efficiencies into one
    factor. The explicit pointing errors are applied on top of it and default to
    zero.
    """

    wavelength_m: float = 1550e-9
    tx_power_w: float = 10e-3
    tx_aperture_area_m2: float = 9e-4
    rx_aperture_area_m2: float = 95e-4
    system_loss: float = 0.5
    tx_pointing_error_rad: float = 0.0
    rx_pointing_error_rad: float = 0.0

    def __post_init__(self):
        for name in ("wavelength_m", "tx_power_w", "tx_aperture_area_m2", "rx_aperture_area_m2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"optical: {name} must be > 0")
        if not 0 < self.system_loss <= 1:
            raise ConfigError("optical: system_loss must lie in (0, 1]")
        for name in ("tx_pointing_error_rad", "rx_pointing_error_rad"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"optical: {name} must be >= 0")

    @property
    def tx_diameter_m(self) -> float:
        return diameter_from_area(self.tx_aperture_area_m2)

    @property
    def rx_diameter_m(self) -> float:
        return diameter_from_area(self.rx_aperture_area_m2)

    @property
    def rx_radius_m(self) -> float:
        return self.rx_diameter_m / 2.0

    @property
    def wavelength_um(self) -> float:
        return self.wavelength_m * 1e6


@dataclass(frozen=True)
class BeamSpec:
    full_divergence_rad: float
    origin: BeamOrigin = BeamOrigin.FIXED

    def __post_init__(self):
        if not 0 < self.full_divergence_rad < math.pi:
            raise DomainError("beam: full divergence must lie in (0, pi)")


def tx_gain(full_divergence_rad: float) -> float:
    """On-axis gain of a Gaussian beam with the given full divergence."""
    if not full_divergence_rad > 0:
        raise DomainError("tx_gain: divergence must be > 0")
    return 32.0 / full_divergence_rad**2


def rx_gain(rx_aperture_diameter_m: float, wavelength_m: float) -> float:
    if not (rx_aperture_diameter_m > 0 and wavelength_m > 0):
        raise DomainError("rx_gain: diameter and wavelength must be > 0")
    return (math.pi * rx_aperture_diameter_m / wavelength_m) ** 2


def geometric_loss_unclamped(rx_diameter_m, tx_diameter_m, full_divergence_rad, range_m):
    return (rx_diameter_m / (tx_diameter_m + full_divergence_rad * range_m)) ** 2


def geometric_loss(
    rx_diameter_m: float, tx_diameter_m: float, full_divergence_rad: float, range_m: float
) -> float:
    """Fraction of the beam footprint caught by the receiver, capped at one."""
    if min(rx_diameter_m, tx_diameter_m, full_divergence_rad, range_m) <= 0:
        raise DomainError("geometric_loss: all inputs must be > 0")
    return min(1.0, geometric_loss_unclamped(rx_diameter_m, tx_diameter_m, full_divergence_rad, range_m))


def geometric_crossover_m(rx_diameter_m, tx_diameter_m, full_divergence_rad):
    """Range at which the unclamped geometric loss equals one."""
    return (rx_diameter_m - tx_diameter_m) / full_divergence_rad


def pointing_losses(gain_tx, gain_rx, gamma_rad, zeta_rad):
    if gain_tx <= 0 or gain_rx <= 0:
        raise DomainError("pointing_losses: gains must be > 0")
    if gamma_rad < 0 or zeta_rad < 0:
        raise DomainError("pointing_losses: pointing errors must be >= 0")
    return math.exp(-gain_tx * gamma_rad**2), math.exp(-gain_rx * zeta_rad**2)


def free_space_factor(wavelength_m, range_m):
    return (wavelength_m / (4.0 * math.pi * range_m)) ** 2


def received_power_clear(params: OpticalParams, beam: BeamSpec, range_m: float) -> float:
    """Received power in watts before fog attenuation."""
    if not range_m > 0:
        raise DomainError("received_power_clear: range must be > 0")
    theta = beam.full_divergence_rad
    g_tx = tx_gain(theta)
    g_rx = rx_gain(params.rx_diameter_m, params.wavelength_m)
    l_geo = geometric_loss(params.rx_diameter_m, params.tx_diameter_m, theta, range_m)
    l_tx, l_rx = pointing_losses(
        g_tx, g_rx, params.tx_pointing_error_rad, params.rx_pointing_error_rad
    )
    return (
        params.tx_power_w
        * g_tx
        * g_rx
        * free_space_factor(params.wavelength_m, range_m)
        * l_geo
        * params.system_loss
        * l_tx
        * l_rx
    )
