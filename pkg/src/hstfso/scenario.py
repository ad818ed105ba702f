"""Train-pass simulation and the fixed-versus-adaptive analysis suite."""

from __future__ import annotations

import functools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from hstfso.atmosphere import ChannelState, received_power_fog_dbm
from hstfso.control import (
    ControllerConfig,
    ControllerMode,
    default_switch_angles,
    initial_state,
    step,
    target_divergence,
)
from hstfso.errors import ConfigError, DomainError
from hstfso.geometry import (
    LinkGeometry,
    PlacementMode,
    StationPlacement,
    TrainState,
    geometry_at_range,
    link_geometry,
    nearest_station,
    slant_distance,
    station_range,
)
from hstfso.optics import BeamSpec, OpticalParams, received_power_clear
from hstfso.receiver import ReceiverParams, ber_ook_nrz, required_power_for_ber, snr
from hstfso.units import KMH_TO_MPS, dbm_to_watts, to_db, watts_to_dbm

log = logging.getLogger(__name__)

MAX_WORKERS_ENV = "HSTFSO_MAX_WORKERS"
PLACEMENT_VISIBILITY_KM = 5.0


@dataclass(frozen=True)
class ScenarioConfig:
    placement: StationPlacement = field(default_factory=StationPlacement)
    optical: OpticalParams = field(default_factory=OpticalParams)
    receiver: ReceiverParams = field(default_factory=ReceiverParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    visibility_km: float = 1.0
    train_speed_mps: float = 400.0 * KMH_TO_MPS
    train_start_m: float = 0.0
    time_step_s: float = 0.1
    duration_s: float = 60.0
    transceiver_offsets_m: tuple[float, ...] = (0.0,)
    ber_target: float = 1e-9
    eval_range_m: tuple[float, float] = (75.0, 2000.0)

    def __post_init__(self):
        object.__setattr__(self, "transceiver_offsets_m", tuple(float(x) for x in self.transceiver_offsets_m))
        object.__setattr__(self, "eval_range_m", tuple(float(x) for x in self.eval_range_m))
        if not self.visibility_km > 0:
            raise ConfigError("scenario: visibility_km must be > 0")
        if not self.time_step_s > 0:
            raise ConfigError("scenario: time_step_s must be > 0")
        if not self.duration_s > 0:
            raise ConfigError("scenario: duration_s must be > 0")
        if len(self.eval_range_m) != 2 or not 0 < self.eval_range_m[0] < self.eval_range_m[1]:
            raise ConfigError("scenario: eval_range_m must be (min, max) with 0 < min < max")
        if not 0 < self.ber_target < 0.5:
            raise ConfigError("scenario: ber_target must lie in (0, 0.5)")
        # validates speed and transceiver offsets
        self.train_at(0.0)
        if not self.controller.switch_angles_rad:
            bank = default_switch_angles(self.optical.rx_radius_m, far_range_m=self.eval_range_m[1])
            object.__setattr__(self, "controller", replace(self.controller, switch_angles_rad=bank))

    def train_at(self, t_s: float) -> TrainState:
        return TrainState(
            position_m=self.train_start_m + self.train_speed_mps * t_s,
            speed_mps=self.train_speed_mps,
            transceiver_offsets_m=self.transceiver_offsets_m,
        )

    def with_mode(self, mode) -> "ScenarioConfig":
        return replace(self, controller=replace(self.controller, mode=ControllerMode.parse(mode)))

    @property
    def channel(self) -> ChannelState:
        return ChannelState(self.visibility_km, self.optical.wavelength_um)

    @property
    def step_count(self) -> int:
        return int(round(self.duration_s / self.time_step_s)) + 1


@dataclass(frozen=True)
class LinkBudget:
    p_rx_dbm: float
    snr_linear: float
    ber: float

    @property
    def snr_db(self) -> float:
        return to_db(self.snr_linear)

    @property
    def p_rx_w(self) -> float:
        return dbm_to_watts(self.p_rx_dbm)


@dataclass(frozen=True)
class LinkSample:
    t_s: float
    range_m: float
    divergence_rad: float
    p_rx_dbm: float
    snr_db: float
    ber: float
    link_up: bool
    station_id: int
    transceiver_id: int
    slant_m: float = math.nan


@functools.lru_cache(maxsize=64)
def _required_power_w(receiver: ReceiverParams, ber_target: float) -> float:
    return required_power_for_ber(receiver, ber_target)


def required_power_dbm(config: ScenarioConfig) -> float:
    return watts_to_dbm(_required_power_w(config.receiver, config.ber_target))


def received_power_dbm(
    config: ScenarioConfig, range_m: float, divergence_rad: float, visibility_km: Optional[float] = None
) -> float:
    v = config.visibility_km if visibility_km is None else visibility_km
    clear = received_power_clear(config.optical, BeamSpec(divergence_rad), range_m)
    return received_power_fog_dbm(clear, ChannelState(v, config.optical.wavelength_um), range_m)


def evaluate_link(
    config: ScenarioConfig,
    geom: LinkGeometry,
    divergence_rad: float,
    visibility_km: Optional[float] = None,
) -> LinkBudget:
    """Full chain at the axial distance of ``geom``: Friis, fog, SNR, BER."""
    p_dbm = received_power_dbm(config, geom.axial_m, divergence_rad, visibility_km)
    gamma = snr(config.receiver, dbm_to_watts(p_dbm))
    return LinkBudget(p_rx_dbm=p_dbm, snr_linear=gamma, ber=ber_ook_nrz(gamma))


def geometry_for_range(config: ScenarioConfig, range_m: float) -> LinkGeometry:
    return geometry_at_range(range_m, config.placement.perpendicular_m, config.optical.rx_radius_m)


def static_divergence(config: ScenarioConfig, mode, geom: LinkGeometry) -> float:
    """Divergence a controller in ``mode`` settles on for a stationary geometry."""
    ctrl = replace(config.controller, mode=ControllerMode.parse(mode))
    return target_divergence(ctrl, geom)


# --------------------------------------------------------------------------- run


def _check_reachable(config: ScenarioConfig):
    ctrl = config.controller
    if ctrl.mode is not ControllerMode.ADAPTIVE_SWITCHED:
        return
    widest = ctrl.switch_angles_rad[-1]
    # the overhead position has the shortest slant, hence the widest ideal beam
    need = 2.0 * math.asin(config.optical.rx_radius_m / config.placement.perpendicular_m)
    if need > widest:
        raise ConfigError(
            f"controller: widest switch angle {widest:.6g} rad cannot cover the overhead "
            f"geometry, which needs {need:.6g} rad"
        )


def run(config: ScenarioConfig) -> list[LinkSample]:
    """Simulate the pass; one sample per transceiver per step, in time order.

    Each transceiver is served by its nearest station. Every station keeps its
    own controller per transceiver and receives a location report every step,
    so a station taking over a link already has a (possibly stale) beam on air.
    """
    _check_reachable(config)
    n = config.step_count
    dt = config.time_step_s
    radius = config.optical.rx_radius_m
    placement = config.placement
    spacing = placement.station_spacing_m
    n_tx = len(config.transceiver_offsets_m)

    first, last = config.train_at(0.0), config.train_at((n - 1) * dt)
    extent = [t.transceiver_position(i) for t in (first, last) for i in range(n_tx)]
    stations = station_range(extent, spacing)

    def geom(train, tx, k):
        return link_geometry(train, tx, k * spacing, placement, radius)

    states = {(tx, k): initial_state(config.controller, 0.0, geom(first, tx, k)) for tx in range(n_tx) for k in stations}
    samples = []
    for i in range(n):
        t = i * dt
        train = config.train_at(t)
        for tx in range(n_tx):
            serving = nearest_station(train.transceiver_position(tx), spacing)
            active_angle = None
            serving_geom = None
            for k in stations:
                g = geom(train, tx, k)
                states[(tx, k)], angle = step(states[(tx, k)], config.controller, t, g)
                if k == serving:
                    active_angle, serving_geom = angle, g
            budget = evaluate_link(config, serving_geom, active_angle)
            samples.append(
                LinkSample(
                    t_s=t,
                    range_m=serving_geom.axial_m,
                    divergence_rad=active_angle,
                    p_rx_dbm=budget.p_rx_dbm,
                    snr_db=budget.snr_db,
                    ber=budget.ber,
                    link_up=budget.ber <= config.ber_target,
                    station_id=serving,
                    transceiver_id=tx,
                    slant_m=serving_geom.slant_m,
                )
            )
    return samples


def samples_by_link(samples: Iterable[LinkSample]) -> dict[int, list[LinkSample]]:
    out: dict[int, list[LinkSample]] = {}
    for s in samples:
        out.setdefault(s.transceiver_id, []).append(s)
    return out


# ------------------------------------------------------------------ max distance


@dataclass(frozen=True)
class MaxDistance:
    mode: ControllerMode
    visibility_km: float
    distance_m: float
    saturated: bool


def _margin_fn(config, visibility_km, mode):
    req = required_power_dbm(config)

    def margin(range_m):
        g = geometry_for_range(config, range_m)
        div = static_divergence(config, mode, g)
        return received_power_dbm(config, range_m, div, visibility_km) - req

    return margin


def max_distance(
    config: ScenarioConfig, visibility_km: float, controller_mode, tol_m: float = 0.1
) -> MaxDistance:
    """Longest range in the evaluation window whose BER meets the target.

    Bisection on received-power margin; the margin must be strictly decreasing
    over the window, which is checked on a 1 m grid first.
    """
    mode = ControllerMode.parse(controller_mode)
    lo, hi = config.eval_range_m
    margin = _margin_fn(config, visibility_km, mode)

    grid = np.arange(lo, hi + 0.5, 1.0)
    values = [margin(float(r)) for r in grid]
    if any(b >= a for a, b in zip(values, values[1:])):
        raise DomainError(
            f"max_distance: received power not strictly decreasing over {lo:g}-{hi:g} m "
            f"({mode.value}, V={visibility_km:g} km)"
        )
    if margin(lo) < 0:
        raise DomainError(
            f"max_distance: link fails at the minimum range {lo:g} m "
            f"({mode.value}, V={visibility_km:g} km)"
        )
    if margin(hi) >= 0:
        return MaxDistance(mode, visibility_km, hi, True)
    a, b = lo, hi
    while b - a > tol_m:
        mid = 0.5 * (a + b)
        if margin(mid) >= 0:
            a = mid
        else:
            b = mid
    return MaxDistance(mode, visibility_km, a, False)


# ------------------------------------------------------------------------ sweeps


@dataclass(frozen=True)
class SweepRow:
    mode: str
    visibility_km: float
    range_m: float
    divergence_rad: float
    p_rx_dbm: float
    snr_db: float
    ber: float


@dataclass
class SweepSummary:
    mean_gap_db: dict[float, float]
    max_distance: dict[tuple[str, float], Optional[MaxDistance]]
    ratio: dict[float, float]
    difference_m: dict[float, float]
    mean_ratio: float
    mean_difference_m: float
    grid: dict


@dataclass
class SweepResult:
    rows: list[SweepRow]
    summary: SweepSummary


def max_workers() -> int:
    raw = os.environ.get(MAX_WORKERS_ENV)
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{MAX_WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, min(cap, cpus))


def _sweep_cell(config, mode, visibility_km, ranges):
    rows = []
    for r in ranges:
        g = geometry_for_range(config, r)
        div = static_divergence(config, mode, g)
        b = evaluate_link(config, g, div, visibility_km)
        rows.append(SweepRow(mode.value, visibility_km, r, div, b.p_rx_dbm, b.snr_db, b.ber))
    return rows


def _safe_max_distance(config, v, mode):
    try:
        return max_distance(config, v, mode)
    except DomainError as exc:
        log.warning("%s", exc)
        return None


def compare_sweep(
    config: ScenarioConfig,
    range_grid: Sequence[float],
    visibility_grid: Sequence[float],
    modes: Sequence,
) -> SweepResult:
    """Dense evaluation table plus adaptive-versus-fixed summary statistics.

    Summary statistics compare ``adaptive_ideal`` against ``fixed`` and are only
    filled when both modes are requested.
    """
    ranges = [float(r) for r in range_grid]
    vis = sorted(float(v) for v in visibility_grid)
    mode_list = sorted({ControllerMode.parse(m) for m in modes}, key=lambda m: m.value)
    if not ranges or not vis or not mode_list:
        raise ConfigError("compare_sweep: grids and modes must be non-empty")
    ranges = sorted(ranges)

    cells = [(m, v) for m in mode_list for v in vis]
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        tables = list(pool.map(lambda c: _sweep_cell(config, c[0], c[1], ranges), cells))
    rows = [row for table in tables for row in table]

    fixed, adaptive = ControllerMode.FIXED, ControllerMode.ADAPTIVE_IDEAL
    gaps, maxd, ratio, diff = {}, {}, {}, {}
    if fixed in mode_list and adaptive in mode_list:
        by_cell = dict(zip(cells, tables))
        for v in vis:
            a = np.array([r.p_rx_dbm for r in by_cell[(adaptive, v)]])
            f = np.array([r.p_rx_dbm for r in by_cell[(fixed, v)]])
            gaps[v] = float(np.mean(a - f))
            md_f = _safe_max_distance(config, v, fixed)
            md_a = _safe_max_distance(config, v, adaptive)
            maxd[(fixed.value, v)] = md_f
            maxd[(adaptive.value, v)] = md_a
            if md_f is not None and md_a is not None:
                ratio[v] = md_a.distance_m / md_f.distance_m
                diff[v] = md_a.distance_m - md_f.distance_m
    summary = SweepSummary(
        mean_gap_db=gaps,
        max_distance=maxd,
        ratio=ratio,
        difference_m=diff,
        mean_ratio=float(np.mean(list(ratio.values()))) if ratio else math.nan,
        mean_difference_m=float(np.mean(list(diff.values()))) if diff else math.nan,
        grid={
            "range_m": [ranges[0], ranges[-1], len(ranges)],
            "visibility_km": vis,
            "modes": [m.value for m in mode_list],
            "eval_range_m": list(config.eval_range_m),
        },
    )
    return SweepResult(rows, summary)


@dataclass(frozen=True)
class PlacementRow:
    longitudinal_m: float
    gantry_dbm: float
    trackside_dbm: float

    @property
    def gap_db(self) -> float:
        return self.gantry_dbm - self.trackside_dbm


@dataclass
class PlacementComparison:
    rows: list[PlacementRow]
    mean_gap_db: float
    visibility_km: float


def compare_placement(
    config: ScenarioConfig,
    gantry: StationPlacement,
    trackside: StationPlacement,
    range_grid: Sequence[float],
    visibility_km: float = PLACEMENT_VISIBILITY_KM,
) -> PlacementComparison:
    """Ideal adaptive beam received power for two placements at equal train positions.

    ``range_grid`` holds longitudinal train-to-station distances along the track.
    """
    radius = config.optical.rx_radius_m
    cfg = config.with_mode(ControllerMode.ADAPTIVE_IDEAL)

    def power(placement, x):
        train = TrainState(position_m=float(x))
        g = link_geometry(train, 0, 0.0, placement, radius)
        return evaluate_link(cfg, g, static_divergence(cfg, ControllerMode.ADAPTIVE_IDEAL, g), visibility_km).p_rx_dbm

    rows = [PlacementRow(float(x), power(gantry, x), power(trackside, x)) for x in range_grid]
    if not rows:
        raise ConfigError("compare_placement: range grid must be non-empty")
    return PlacementComparison(rows, float(np.mean([r.gap_db for r in rows])), visibility_km)


def default_placements(vertical_m=5.0, trackside_vertical_m=3.0, trackside_lateral_m=5.0, spacing_m=400.0):
    gantry = StationPlacement(PlacementMode.GANTRY, vertical_m, 0.0, spacing_m)
    trackside = StationPlacement(PlacementMode.TRACKSIDE, trackside_vertical_m, trackside_lateral_m, spacing_m)
    return gantry, trackside


@dataclass(frozen=True)
class DelayBandRow:
    range_m: float
    ideal_dbm: float
    approach_dbm: float
    recede_dbm: float


def delay_error_band(
    config: ScenarioConfig, range_grid: Sequence[float], speed_mps: Optional[float] = None
) -> list[DelayBandRow]:
    """Received power when the motorized beam was set for a stale train position.

    The stale position lags by speed * (latency + adjust delay): farther away
    than the true one while approaching, closer while receding.
    """
    speed = config.train_speed_mps if speed_mps is None else speed_mps
    lag = speed * config.controller.motion_delay_s
    vertical = config.placement.perpendicular_m
    radius = config.optical.rx_radius_m
    out = []
    for r in range_grid:
        g = geometry_for_range(config, float(r))
        ideal = 2.0 * g.half_angle_rad

        def stale_angle(longitudinal):
            s = slant_distance(abs(longitudinal), vertical)
            return 2.0 * math.asin(radius / s)

        powers = [
            evaluate_link(config, g, div).p_rx_dbm
            for div in (ideal, stale_angle(g.longitudinal_m + lag), stale_angle(g.longitudinal_m - lag))
        ]
        out.append(DelayBandRow(float(r), *powers))
    return out


@dataclass(frozen=True)
class WavelengthRow:
    wavelength_m: float
    visibility_km: float
    p_rx_dbm: float


def wavelength_sweep(
    config: ScenarioConfig,
    wavelengths_m: Sequence[float],
    visibility_grid: Sequence[float],
    range_m: float,
    mode=ControllerMode.FIXED,
) -> list[WavelengthRow]:
    """Received power at one range for several carrier wavelengths."""
    rows = []
    for lam in wavelengths_m:
        cfg = replace(config, optical=replace(config.optical, wavelength_m=float(lam)))
        g = geometry_for_range(cfg, range_m)
        div = static_divergence(cfg, mode, g)
        for v in visibility_grid:
            rows.append(WavelengthRow(float(lam), float(v), received_power_dbm(cfg, range_m, div, float(v))))
    return rows
