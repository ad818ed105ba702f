"""Fog attenuation from meteorological visibility (Kim above 1 km, Ijaz below)."""

from __future__ import annotations

from dataclasses import dataclass

from hstfso.errors import ConfigError, DomainError
from hstfso.units import watts_to_dbm

REFERENCE_WAVELENGTH_UM = 0.55
DENSE_FOG_LIMIT_KM = 0.015


@dataclass(frozen=True)
class ChannelState:
    visibility_km: float
    wavelength_um: float = 1.55

    def __post_init__(self):
        if not self.visibility_km > 0:
            raise ConfigError("channel: visibility_km must be > 0")
        if not self.wavelength_um > 0:
            raise ConfigError("channel: wavelength_um must be > 0")


def q_exponent(visibility_km: float, wavelength_um: float) -> float:
    """Particle size distribution exponent.

    Kim's visibility-only branches apply from 1 km up; between 15 m and 1 km the
    Ijaz branch makes it a function of wavelength alone.
    """
    v = visibility_km
    if v >= 50:
        return 1.6
    if v >= 6:
        return 1.3
    if v >= 1:
        return 0.16 * v + 0.34
    if v > DENSE_FOG_LIMIT_KM:
        return 0.1428 * wavelength_um - 0.0947
    return 0.0


def fog_attenuation_db_per_km(state: ChannelState) -> float:
    v = state.visibility_km
    if not v > 0:
        raise DomainError("fog_attenuation_db_per_km: visibility must be > 0")
    q = q_exponent(v, state.wavelength_um)
    return (17.0 / v) * (state.wavelength_um / REFERENCE_WAVELENGTH_UM) ** (-q)


def fog_loss_db(state: ChannelState, range_m: float) -> float:
    """Path-integrated fog loss; the per-km coefficient scaled by range in km."""
    return fog_attenuation_db_per_km(state) * range_m / 1000.0


def received_power_fog_dbm(clear_power_w: float, state: ChannelState, range_m: float) -> float:
    if not clear_power_w > 0:
        raise DomainError("received_power_fog_dbm: clear power must be > 0")
    if not range_m > 0:
        raise DomainError("received_power_fog_dbm: range must be > 0")
    return watts_to_dbm(clear_power_w) - fog_loss_db(state, range_m)


def is_dense_fog(visibility_km: float) -> bool:
    return visibility_km <= DENSE_FOG_LIMIT_KM
