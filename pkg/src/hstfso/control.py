"""Beam divergence controllers: fixed, ideal adaptive, motorized expander, 1xN switch.

A motorized expander takes ``adjust_delay_s`` (plus ``control_latency_s`` for the
location report to arrive) before a new angle is on air. While a move is in
flight, newer commands re-target it; the completion time of the move does not
change, so the beam on air is never more than one full delay stale.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from hstfso.errors import ConfigError, DomainError
from hstfso.geometry import LinkGeometry


class ControllerMode(str, enum.Enum):
    FIXED = "fixed"
    ADAPTIVE_IDEAL = "adaptive_ideal"
    ADAPTIVE_MOTORIZED = "adaptive_motorized"
    ADAPTIVE_SWITCHED = "adaptive_switched"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {
            "adaptive": cls.ADAPTIVE_IDEAL,
            "ideal": cls.ADAPTIVE_IDEAL,
            "motorized": cls.ADAPTIVE_MOTORIZED,
            "switched": cls.ADAPTIVE_SWITCHED,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown controller mode {text!r} (expected one of {names})") from None


def default_switch_angles(rx_radius_m, far_range_m=2000.0, widest_rad=1e-3, count=16):
    """Log-spaced switch bank from the ideal angle at ``far_range_m`` up to ``widest_rad``."""
    narrow = 2.0 * math.asin(rx_radius_m / math.hypot(far_range_m, rx_radius_m))
    return tuple(float(a) for a in np.geomspace(narrow, widest_rad, count))


@dataclass(frozen=True)
class ControllerConfig:
    mode: ControllerMode = ControllerMode.FIXED
    fixed_full_divergence_rad: float = 1e-3
    adjust_delay_s: float = 5.0
    control_latency_s: float = 0.0
    switch_angles_rad: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "mode", ControllerMode.parse(self.mode))
        angles = tuple(float(a) for a in self.switch_angles_rad)
        object.__setattr__(self, "switch_angles_rad", angles)
        if not self.fixed_full_divergence_rad > 0:
            raise ConfigError("controller: fixed_full_divergence_rad must be > 0")
        if not self.adjust_delay_s >= 0:
            raise ConfigError("controller: adjust_delay_s must be >= 0")
        if not self.control_latency_s >= 0:
            raise ConfigError("controller: control_latency_s must be >= 0")
        if any(a <= 0 for a in angles):
            raise ConfigError("controller: switch angles must be > 0")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ConfigError("controller: switch_angles_rad must be strictly increasing")
        if self.mode is ControllerMode.ADAPTIVE_SWITCHED and not angles:
            raise ConfigError("controller: switch_angles_rad must be non-empty in switched mode")

    @property
    def motion_delay_s(self) -> float:
        return self.control_latency_s + self.adjust_delay_s


@dataclass(frozen=True)
class ControllerState:
    last_update_time_s: float
    commanded_divergence_rad: float
    active_divergence_rad: float
    pending_divergence_rad: Optional[float] = None
    pending_activation_s: Optional[float] = None

    def __post_init__(self):
        if not self.active_divergence_rad > 0:
            raise DomainError("controller state: active divergence must be > 0")
        if self.pending_activation_s is not None and self.pending_activation_s < self.last_update_time_s:
            raise DomainError("controller state: pending activation precedes last update")


def ideal_divergence(geom: LinkGeometry) -> float:
    """Full divergence whose cone just spans the receiver aperture."""
    return 2.0 * geom.half_angle_rad


def quantize_up(angle_rad, bank):
    """Smallest bank angle that is >= ``angle_rad``."""
    i = bisect.bisect_left(bank, angle_rad)
    if i == len(bank):
        raise DomainError(
            f"switched controller: ideal divergence {angle_rad:.6g} rad exceeds the "
            f"widest switch angle {bank[-1]:.6g} rad"
        )
    return bank[i]


def target_divergence(config: ControllerConfig, geom: LinkGeometry) -> float:
    """Angle the controller would command for ``geom``, ignoring any delay."""
    mode = config.mode
    if mode is ControllerMode.FIXED:
        return config.fixed_full_divergence_rad
    ideal = ideal_divergence(geom)
    if mode is ControllerMode.ADAPTIVE_SWITCHED:
        return quantize_up(ideal, config.switch_angles_rad)
    return ideal


def _delay(config):
    if config.mode is ControllerMode.ADAPTIVE_MOTORIZED:
        return config.motion_delay_s
    if config.mode is ControllerMode.ADAPTIVE_SWITCHED:
        return config.control_latency_s
    return 0.0


def initial_state(config: ControllerConfig, now_s: float, geom: LinkGeometry) -> ControllerState:
    """Controller already settled on the target for ``geom`` at ``now_s``."""
    angle = target_divergence(config, geom)
    return ControllerState(
        last_update_time_s=now_s,
        commanded_divergence_rad=angle,
        active_divergence_rad=angle,
    )


def step(state: ControllerState, config: ControllerConfig, now_s: float, geom: LinkGeometry):
    """Advance to ``now_s`` with a fresh location report; returns (state, active angle)."""
    if now_s < state.last_update_time_s:
        raise DomainError("controller step: time went backwards")
    command = target_divergence(config, geom)
    delay = _delay(config)

    if delay == 0.0:
        new = ControllerState(
            last_update_time_s=now_s,
            commanded_divergence_rad=command,
            active_divergence_rad=command,
        )
        return new, command

    active = state.active_divergence_rad
    pending_at = state.pending_activation_s
    # a move whose completion time has passed lands before the new report is handled
    if pending_at is not None and pending_at <= now_s:
        active = state.pending_divergence_rad
        pending_at = None
    if pending_at is None:
        pending_at = now_s + delay
    # latest-wins: the in-flight move is re-targeted, its completion time kept
    pending = command
    if pending_at <= now_s:
        active, pending, pending_at = pending, None, None

    new = replace(
        state,
        last_update_time_s=now_s,
        commanded_divergence_rad=command,
        active_divergence_rad=active,
        pending_divergence_rad=pending,
        pending_activation_s=pending_at,
    )
    return new, active
