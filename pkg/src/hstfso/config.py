"""YAML scenario files, unit-suffixed keys and bundled presets.

Every physical key carries its unit in the name. A quantity may be given in any
one of the accepted units (``tx_power_mw`` or ``tx_power_dbm``, say) but not two
at once. Unknown keys are rejected so that typos do not silently fall back to
defaults.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import yaml

from hstfso.control import ControllerConfig, ControllerMode
from hstfso.errors import ConfigError, DomainError
from hstfso.geometry import StationPlacement
from hstfso.optics import OpticalParams
from hstfso.receiver import ReceiverParams
from hstfso.scenario import ScenarioConfig
from hstfso.units import KMH_TO_MPS, dbm_to_watts

PRESETS = ("table1", "fig2", "fig5", "fig7", "fig8", "fig9", "fig10")

_LENGTH = {"m": 1.0, "km": 1e3, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}
_AREA = {"m2": 1.0, "cm2": 1e-4, "mm2": 1e-6}
_ANGLE = {"rad": 1.0, "mrad": 1e-3, "urad": 1e-6}
_TIME = {"s": 1.0, "ms": 1e-3}
_SPEED = {"mps": 1.0, "kmh": KMH_TO_MPS}


def _power_w(value, unit):
    if unit == "dbm":
        return dbm_to_watts(value)
    return value * {"w": 1.0, "mw": 1e-3}[unit]


_POWER = {"w": None, "mw": None, "dbm": None}


@dataclass
class AnalysisGrid:
    """Grids pinned by a preset for sweeps, max-distance tables and placement runs."""

    ranges_m: list[float] = field(default_factory=list)
    visibilities_km: list[float] = field(default_factory=list)
    modes: list[str] = field(default_factory=list)
    wavelengths_nm: list[float] = field(default_factory=list)
    placement_ranges_m: list[float] = field(default_factory=list)


@dataclass
class LoadedConfig:
    scenario: ScenarioConfig
    analysis: AnalysisGrid
    source: str
    # gantry/trackside pair for placement comparisons, if the file defines one
    placements: Optional[tuple[StationPlacement, StationPlacement]] = None


class _Section:
    def __init__(self, name, data):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{name}: expected a mapping, got {type(data).__name__}")
        self.name = name
        self.data = dict(data)
        self.used = set()

    def plain(self, key, default=None, cast=float):
        if key not in self.data:
            return default
        self.used.add(key)
        return self._cast(key, self.data[key], cast)

    def quantity(self, base, units, default=None, convert=None):
        hits = [(u, f"{base}_{u}") for u in units if f"{base}_{u}" in self.data]
        if len(hits) > 1:
            keys = ", ".join(k for _, k in hits)
            raise ConfigError(f"{self.name}: give only one of {keys}")
        if not hits:
            return default
        unit, key = hits[0]
        self.used.add(key)
        raw = self.data[key]
        if isinstance(raw, list):
            vals = [self._cast(key, v, float) for v in raw]
            return [self._convert(v, unit, units, convert) for v in vals]
        return self._convert(self._cast(key, raw, float), unit, units, convert)

    @staticmethod
    def _convert(value, unit, units, convert):
        if convert is not None:
            return convert(value, unit)
        return value * units[unit]

    def _cast(self, key, value, cast):
        try:
            return cast(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{self.name}.{key}: cannot interpret {value!r}") from None

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ConfigError(f"{self.name}: unknown key(s) {', '.join(extra)}")


def _placement(sec: _Section, default: StationPlacement = StationPlacement()) -> StationPlacement:
    p = StationPlacement(
        mode=sec.plain("mode", default.mode, cast=str),
        vertical_offset_m=sec.quantity("vertical_offset", _LENGTH, default.vertical_offset_m),
        lateral_offset_m=sec.quantity("lateral_offset", _LENGTH, default.lateral_offset_m),
        station_spacing_m=sec.quantity("station_spacing", _LENGTH, default.station_spacing_m),
    )
    sec.finish()
    return p


def _grid(value, name):
    """A list of numbers or a ``{start, stop, step}`` mapping (stop inclusive)."""
    if value is None:
        return []
    if isinstance(value, dict):
        try:
            start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{name}: range grids need numeric start, stop and step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"{name}: need step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    if isinstance(value, (list, tuple)):
        try:
            return [float(v) for v in value]
        except (TypeError, ValueError):
            raise ConfigError(f"{name}: grid entries must be numbers") from None
    raise ConfigError(f"{name}: expected a list or a start/stop/step mapping")


def parse_config(doc: Any, source: str = "<memory>") -> LoadedConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a mapping")
    known = {"placement", "optical", "receiver", "controller", "channel", "train", "simulation", "analysis", "placements"}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(f"config: unknown section(s) {', '.join(extra)}")

    try:
        placement = _placement(_Section("placement", doc.get("placement")))

        sec = _Section("optical", doc.get("optical"))
        d = OpticalParams()
        optical = OpticalParams(
            wavelength_m=sec.quantity("wavelength", _LENGTH, d.wavelength_m),
            tx_power_w=sec.quantity("tx_power", _POWER, d.tx_power_w, convert=_power_w),
            tx_aperture_area_m2=sec.quantity("tx_aperture_area", _AREA, d.tx_aperture_area_m2),
            rx_aperture_area_m2=sec.quantity("rx_aperture_area", _AREA, d.rx_aperture_area_m2),
            system_loss=sec.plain("system_loss", d.system_loss),
            tx_pointing_error_rad=sec.quantity("tx_pointing_error", _ANGLE, d.tx_pointing_error_rad),
            rx_pointing_error_rad=sec.quantity("rx_pointing_error", _ANGLE, d.rx_pointing_error_rad),
        )
        sec.finish()

        sec = _Section("receiver", doc.get("receiver"))
        d = ReceiverParams()
        receiver = ReceiverParams(
            sensitivity_a_per_w=sec.plain("sensitivity_a_per_w", d.sensitivity_a_per_w),
            apd_gain=sec.plain("apd_gain", d.apd_gain),
            excess_noise_factor=sec.plain("excess_noise_factor", d.excess_noise_factor),
            bandwidth_hz=sec.plain("bandwidth_hz", d.bandwidth_hz),
            load_resistance_ohm=sec.plain("load_resistance_ohm", d.load_resistance_ohm),
            temperature_k=sec.plain("temperature_k", d.temperature_k),
            electron_charge_c=sec.plain("electron_charge_c", d.electron_charge_c),
            boltzmann_j_per_k=sec.plain("boltzmann_j_per_k", d.boltzmann_j_per_k),
        )
        sec.finish()

        sec = _Section("controller", doc.get("controller"))
        d = ControllerConfig()
        controller = ControllerConfig(
            mode=ControllerMode.parse(sec.plain("mode", d.mode, cast=str)),
            fixed_full_divergence_rad=sec.quantity("fixed_full_divergence", _ANGLE, d.fixed_full_divergence_rad),
            adjust_delay_s=sec.quantity("adjust_delay", _TIME, d.adjust_delay_s),
            control_latency_s=sec.quantity("control_latency", _TIME, d.control_latency_s),
            switch_angles_rad=tuple(sec.quantity("switch_angles", _ANGLE, []) or ()),
        )
        sec.finish()

        sec = _Section("channel", doc.get("channel"))
        d = ScenarioConfig()
        visibility_km = sec.quantity("visibility", {"km": 1.0, "m": 1e-3}, d.visibility_km)
        sec.finish()

        sec = _Section("train", doc.get("train"))
        speed = sec.quantity("speed", _SPEED, d.train_speed_mps)
        start = sec.quantity("start_position", _LENGTH, d.train_start_m)
        offsets = sec.quantity("transceiver_offsets", _LENGTH, list(d.transceiver_offsets_m))
        sec.finish()

        sec = _Section("simulation", doc.get("simulation"))
        dt = sec.quantity("time_step", _TIME, d.time_step_s)
        duration = sec.quantity("duration", _TIME, d.duration_s)
        ber_target = sec.plain("ber_target", d.ber_target)
        eval_range = sec.quantity("eval_range", _LENGTH, list(d.eval_range_m))
        sec.finish()

        scenario = ScenarioConfig(
            placement=placement,
            optical=optical,
            receiver=receiver,
            controller=controller,
            visibility_km=visibility_km,
            train_speed_mps=speed,
            train_start_m=start,
            time_step_s=dt,
            duration_s=duration,
            transceiver_offsets_m=tuple(offsets if isinstance(offsets, list) else [offsets]),
            ber_target=ber_target,
            eval_range_m=tuple(eval_range),
        )

        placements = None
        if doc.get("placements") is not None:
            pdoc = doc["placements"]
            if not isinstance(pdoc, dict) or set(pdoc) - {"gantry", "trackside"}:
                raise ConfigError("placements: expected 'gantry' and 'trackside' mappings")
            placements = (
                _placement(_Section("placements.gantry", pdoc.get("gantry")), StationPlacement("gantry")),
                _placement(
                    _Section("placements.trackside", pdoc.get("trackside")),
                    StationPlacement("trackside", 3.0, 5.0),
                ),
            )

        sec = _Section("analysis", doc.get("analysis"))
        modes = sec.plain("modes", [], cast=list)
        analysis = AnalysisGrid(
            ranges_m=_grid(sec.plain("ranges_m", None, cast=lambda v: v), "analysis.ranges_m"),
            visibilities_km=_grid(sec.plain("visibilities_km", None, cast=lambda v: v), "analysis.visibilities_km"),
            modes=[ControllerMode.parse(m).value for m in modes],
            wavelengths_nm=_grid(sec.plain("wavelengths_nm", None, cast=lambda v: v), "analysis.wavelengths_nm"),
            placement_ranges_m=_grid(
                sec.plain("placement_ranges_m", None, cast=lambda v: v), "analysis.placement_ranges_m"
            ),
        )
        sec.finish()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return LoadedConfig(scenario, analysis, source, placements)


def load_config(path_or_preset: str | Path) -> LoadedConfig:
    """Load a YAML file, or a bundled preset by name."""
    text = str(path_or_preset)
    path = Path(text)
    if path.is_file():
        source = str(path)
        raw = path.read_text(encoding="utf-8")
    elif text in PRESETS:
        source = f"preset:{text}"
        raw = preset_text(text)
    else:
        raise ConfigError(f"config: no such file or preset {text!r} (presets: {', '.join(PRESETS)})")
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: malformed YAML in {source}: {exc}") from None
    return parse_config(doc, source)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}")
    return resources.files("hstfso.presets").joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical, SI-suffixed form; ``parse_config`` of it rebuilds ``cfg``."""
    p, o, r, c = cfg.placement, cfg.optical, cfg.receiver, cfg.controller
    return {
        "placement": {
            "mode": p.mode.value,
            "vertical_offset_m": p.vertical_offset_m,
            "lateral_offset_m": p.lateral_offset_m,
            "station_spacing_m": p.station_spacing_m,
        },
        "optical": {
            "wavelength_m": o.wavelength_m,
            "tx_power_w": o.tx_power_w,
            "tx_aperture_area_m2": o.tx_aperture_area_m2,
            "rx_aperture_area_m2": o.rx_aperture_area_m2,
            "system_loss": o.system_loss,
            "tx_pointing_error_rad": o.tx_pointing_error_rad,
            "rx_pointing_error_rad": o.rx_pointing_error_rad,
        },
        "receiver": {
            "sensitivity_a_per_w": r.sensitivity_a_per_w,
            "apd_gain": r.apd_gain,
            "excess_noise_factor": r.excess_noise_factor,
            "bandwidth_hz": r.bandwidth_hz,
            "load_resistance_ohm": r.load_resistance_ohm,
            "temperature_k": r.temperature_k,
            "electron_charge_c": r.electron_charge_c,
            "boltzmann_j_per_k": r.boltzmann_j_per_k,
        },
        "controller": {
            "mode": c.mode.value,
            "fixed_full_divergence_rad": c.fixed_full_divergence_rad,
            "adjust_delay_s": c.adjust_delay_s,
            "control_latency_s": c.control_latency_s,
            "switch_angles_rad": list(c.switch_angles_rad),
        },
        "channel": {"visibility_km": cfg.visibility_km},
        "train": {
            "speed_mps": cfg.train_speed_mps,
            "start_position_m": cfg.train_start_m,
            "transceiver_offsets_m": list(cfg.transceiver_offsets_m),
        },
        "simulation": {
            "time_step_s": cfg.time_step_s,
            "duration_s": cfg.duration_s,
            "ber_target": cfg.ber_target,
            "eval_range_m": list(cfg.eval_range_m),
        },
    }


def config_digest(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON form; independent of key order in the source file."""
    blob = json.dumps(scenario_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
