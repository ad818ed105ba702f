"""Lateral-view link geometry between a train transceiver and a base station.

All lengths are metres and angles radians. The model is two dimensional: the
longitudinal separation along the track and a single perpendicular offset.
Trackside stations fold their horizontal and vertical offsets into that one
perpendicular distance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from hstfso.errors import ConfigError, DomainError


class PlacementMode(str, enum.Enum):
    GANTRY = "gantry"
    TRACKSIDE = "trackside"


@dataclass(frozen=True)
class StationPlacement:
    mode: PlacementMode = PlacementMode.GANTRY
    vertical_offset_m: float = 5.0
    lateral_offset_m: float = 0.0
    station_spacing_m: float = 400.0

    def __post_init__(self):
        object.__setattr__(self, "mode", PlacementMode(self.mode))
        if not self.vertical_offset_m > 0:
            raise ConfigError("placement: vertical_offset_m must be > 0")
        if not self.lateral_offset_m >= 0:
            raise ConfigError("placement: lateral_offset_m must be >= 0")
        if self.mode is PlacementMode.GANTRY and self.lateral_offset_m != 0:
            raise ConfigError("placement: lateral_offset_m must be 0 for gantry mode")
        if not self.station_spacing_m > 0:
            raise ConfigError("placement: station_spacing_m must be > 0")

    @property
    def perpendicular_m(self) -> float:
        """Effective offset between the two transceivers, normal to the track."""
        return math.hypot(self.vertical_offset_m, self.lateral_offset_m)


@dataclass(frozen=True)
class TrainState:
    position_m: float
    speed_mps: float = 0.0
    transceiver_offsets_m: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        offsets = tuple(float(x) for x in self.transceiver_offsets_m)
        object.__setattr__(self, "transceiver_offsets_m", offsets)
        if not self.speed_mps >= 0:
            raise ConfigError("train: speed_mps must be >= 0")
        if not offsets:
            raise ConfigError("train: transceiver_offsets_m must be non-empty")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ConfigError("train: transceiver_offsets_m must be strictly increasing")

    def transceiver_position(self, index: int) -> float:
        return self.position_m + self.transceiver_offsets_m[index]


@dataclass(frozen=True)
class LinkGeometry:
    longitudinal_m: float
    vertical_m: float
    slant_m: float
    half_angle_rad: float
    axial_m: float


def slant_distance(longitudinal_m: float, vertical_m: float) -> float:
    """Straight-line distance between the two transceivers."""
    if longitudinal_m < 0 or vertical_m < 0:
        raise DomainError("slant_distance: distances must be non-negative")
    if longitudinal_m == 0 and vertical_m == 0:
        raise DomainError("slant_distance: transmitter and receiver coincide")
    return math.hypot(longitudinal_m, vertical_m)


def adaptive_half_angle(receiver_aperture_radius_m: float, slant_m: float) -> float:
    """Half-angle of the cone that just spans the receiver aperture at ``slant_m``."""
    if not 0 < receiver_aperture_radius_m < slant_m:
        raise DomainError(
            "adaptive_half_angle: need 0 < receiver aperture radius < slant distance "
            f"(got radius={receiver_aperture_radius_m!r}, slant={slant_m!r})"
        )
    return math.asin(receiver_aperture_radius_m / slant_m)


def axial_distance(half_angle_rad: float, slant_m: float) -> float:
    if not 0 <= half_angle_rad < math.pi / 2:
        raise DomainError("axial_distance: half angle must lie in [0, pi/2)")
    return math.cos(half_angle_rad) * slant_m


def _from_slant(longitudinal_m, vertical_m, slant_m, radius_m):
    half = adaptive_half_angle(radius_m, slant_m)
    return LinkGeometry(
        longitudinal_m=longitudinal_m,
        vertical_m=vertical_m,
        slant_m=slant_m,
        half_angle_rad=half,
        axial_m=axial_distance(half, slant_m),
    )


def link_geometry(
    train: TrainState,
    transceiver_index: int,
    station_position_m: float,
    placement: StationPlacement,
    receiver_aperture_radius_m: float,
) -> LinkGeometry:
    longitudinal = abs(train.transceiver_position(transceiver_index) - station_position_m)
    vertical = placement.perpendicular_m
    slant = slant_distance(longitudinal, vertical)
    return _from_slant(longitudinal, vertical, slant, receiver_aperture_radius_m)


def geometry_at_range(
    axial_m: float, vertical_m: float, receiver_aperture_radius_m: float
) -> LinkGeometry:
    """Geometry whose communication distance equals ``axial_m``.

    Inverts the axial relation: with sin(half) = r / slant the axial distance is
    sqrt(slant**2 - r**2), hence slant = hypot(axial, r).
    """
    if not axial_m > 0:
        raise DomainError("geometry_at_range: range must be > 0")
    slant = math.hypot(axial_m, receiver_aperture_radius_m)
    if slant < vertical_m:
        raise DomainError(
            f"geometry_at_range: range {axial_m} m is shorter than the {vertical_m} m offset"
        )
    longitudinal = math.sqrt(max(slant * slant - vertical_m * vertical_m, 0.0))
    return _from_slant(longitudinal, vertical_m, slant, receiver_aperture_radius_m)


def nearest_station(position_m: float, spacing_m: float) -> int:
    """Index of the closest station on a regular grid; ties go to the lower index."""
    k = math.floor(position_m / spacing_m)
    lower = k * spacing_m
    upper = (k + 1) * spacing_m
    return k if position_m - lower <= upper - position_m else k + 1


def station_range(positions_m: Sequence[float], spacing_m: float) -> range:
    lo = math.floor(min(positions_m) / spacing_m) - 1
    hi = math.ceil(max(positions_m) / spacing_m) + 1
    return range(lo, hi + 1)
