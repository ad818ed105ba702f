"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 link infeasible
(``link`` only).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from hstfso import __version__
from hstfso.atmosphere import is_dense_fog
from hstfso.config import PRESETS, LoadedConfig, config_digest, load_config, preset_text, scenario_to_dict
from hstfso.control import ControllerMode
from hstfso.errors import ConfigError, DomainError
from hstfso.scenario import (
    compare_placement,
    compare_sweep,
    default_placements,
    evaluate_link,
    geometry_for_range,
    max_distance,
    required_power_dbm,
    run,
    static_divergence,
)

log = logging.getLogger("hstfso")

SWEEP_HEADER = ["mode", "visibility_km", "range_m", "divergence_rad", "p_rx_dbm", "snr_db", "ber"]
MAXDIST_HEADER = ["mode", "visibility_km", "max_distance_m", "saturated"]
PASS_HEADER = [
    "t_s", "transceiver_id", "station_id", "range_m", "divergence_rad",
    "p_rx_dbm", "snr_db", "ber", "link_up",
]
PLACEMENT_HEADER = ["longitudinal_m", "gantry_dbm", "trackside_dbm", "gap_db"]


class UsageError(Exception):
    pass


def fmt(value):
    """Serialise one CSV cell; floats keep 9 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise UsageError(f"bad grid {text!r}: need step > 0 and stop >= start")
            n = int((stop - start) / step + 1e-9) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None


def parse_modes(text: str) -> list[str]:
    return [ControllerMode.parse(m).value for m in text.split(",") if m.strip()]


def atomic_write(path: Path, text: str):
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def now_iso():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def manifest(loaded: LoadedConfig, argv, started, extra=None) -> dict:
    doc = {
        "tool_version": __version__,
        "command": list(argv),
        "config_source": loaded.source,
        "config_digest": config_digest(loaded.scenario),
        "resolved_config": scenario_to_dict(loaded.scenario),
        "started_at": started,
        "finished_at": now_iso(),
    }
    if extra:
        doc.update(extra)
    return doc


def write_outputs(out: Path, body: str, meta: dict):
    out = Path(out)
    if not out.parent.exists():
        raise UsageError(f"output directory {out.parent} does not exist")
    try:
        atomic_write(out, body)
        atomic_write(out.with_name(out.name + ".manifest.json"), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def warn_dense_fog(visibilities):
    for v in visibilities:
        if is_dense_fog(v):
            log.warning("visibility %g km is at or below 0.015 km: fog loss is 17/V dB/km for every wavelength", v)


# ------------------------------------------------------------------ subcommands


def cmd_link(args) -> int:
    loaded = load_config(args.config)
    cfg = loaded.scenario
    v = cfg.visibility_km if args.visibility is None else args.visibility
    warn_dense_fog([v])
    mode = ControllerMode.parse(args.mode) if args.mode else cfg.controller.mode
    geom = geometry_for_range(cfg, args.range)
    div = static_divergence(cfg, mode, geom)
    budget = evaluate_link(cfg, geom, div, v)
    up = budget.ber <= cfg.ber_target
    print(f"mode            {mode.value}")
    print(f"visibility      {v:g} km")
    print(f"range           {args.range:g} m (slant {geom.slant_m:.3f} m)")
    print(f"divergence      {div:.6g} rad")
    print(f"received power  {budget.p_rx_dbm:.3f} dBm (required {required_power_dbm(cfg):.3f} dBm)")
    print(f"SNR             {budget.snr_db:.3f} dB")
    print(f"BER             {budget.ber:.3e} (target {cfg.ber_target:g})")
    print(f"link_up         {'true' if up else 'false'}")
    return 0 if up else 2


def _grid_or(flag, preset, name):
    grid = parse_grid(flag) if flag else list(preset)
    if not grid:
        raise UsageError(f"no {name} given and the config pins none")
    return grid


def cmd_sweep(args, argv) -> int:
    started = now_iso()
    loaded = load_config(args.config)
    cfg = loaded.scenario
    ranges = _grid_or(args.ranges, loaded.analysis.ranges_m, "ranges")
    vis = _grid_or(args.visibilities, loaded.analysis.visibilities_km or [cfg.visibility_km], "visibilities")
    modes = parse_modes(args.modes) if args.modes else (loaded.analysis.modes or ["fixed", "adaptive_ideal"])
    warn_dense_fog(vis)
    result = compare_sweep(cfg, ranges, vis, modes)
    body = csv_text(
        SWEEP_HEADER,
        ((r.mode, r.visibility_km, r.range_m, r.divergence_rad, r.p_rx_dbm, r.snr_db, r.ber) for r in result.rows),
    )
    s = result.summary
    summary = {
        "mean_gap_db": {fmt(v): g for v, g in s.mean_gap_db.items()},
        "max_distance_ratio": {fmt(v): x for v, x in s.ratio.items()},
        "max_distance_difference_m": {fmt(v): x for v, x in s.difference_m.items()},
        "mean_ratio": s.mean_ratio,
        "mean_difference_m": s.mean_difference_m,
    }
    write_outputs(args.out, body, manifest(loaded, argv, started, {"grid": s.grid, "summary": summary}))
    for v, g in s.mean_gap_db.items():
        print(f"V={v:g} km  mean adaptive-fixed gap {g:.2f} dB")
    print(f"wrote {len(result.rows)} rows to {args.out}")
    return 0


def cmd_maxdist(args, argv) -> int:
    started = now_iso()
    loaded = load_config(args.config)
    cfg = loaded.scenario
    vis = _grid_or(args.visibilities, loaded.analysis.visibilities_km or [cfg.visibility_km], "visibilities")
    modes = parse_modes(args.modes) if args.modes else (loaded.analysis.modes or ["fixed", "adaptive_ideal"])
    warn_dense_fog(vis)
    rows = []
    for m in sorted(set(modes)):
        for v in sorted(vis):
            md = max_distance(cfg, v, m)
            rows.append((md.mode.value, v, md.distance_m, md.saturated))
    body = csv_text(MAXDIST_HEADER, rows)
    grid = {"visibility_km": sorted(vis), "modes": sorted(set(modes)), "eval_range_m": list(cfg.eval_range_m)}
    write_outputs(args.out, body, manifest(loaded, argv, started, {"grid": grid}))
    for m, v, d, sat in rows:
        print(f"{m:<18} V={v:<5g} km  {d:8.1f} m{'  (saturated)' if sat else ''}")
    return 0


def cmd_pass(args, argv) -> int:
    started = now_iso()
    loaded = load_config(args.config)
    cfg = loaded.scenario
    if args.mode:
        cfg = cfg.with_mode(args.mode)
        loaded = LoadedConfig(cfg, loaded.analysis, loaded.source, loaded.placements)
    warn_dense_fog([cfg.visibility_km])
    samples = run(cfg)
    body = csv_text(
        PASS_HEADER,
        (
            (s.t_s, s.transceiver_id, s.station_id, s.range_m, s.divergence_rad, s.p_rx_dbm, s.snr_db, s.ber, s.link_up)
            for s in samples
        ),
    )
    up = sum(s.link_up for s in samples)
    write_outputs(args.out, body, manifest(loaded, argv, started, {"samples": len(samples), "link_up_samples": up}))
    print(f"wrote {len(samples)} samples to {args.out} ({up} with link up)")
    return 0


def cmd_placement(args, argv) -> int:
    started = now_iso()
    loaded = load_config(args.config)
    gantry, trackside = loaded.placements or default_placements()
    grid = _grid_or(args.ranges, loaded.analysis.placement_ranges_m, "placement ranges")
    cmp = compare_placement(loaded.scenario, gantry, trackside, grid)
    worst = min(r.gap_db for r in cmp.rows)
    print(f"gantry    perpendicular offset {gantry.perpendicular_m:.3f} m")
    print(f"trackside perpendicular offset {trackside.perpendicular_m:.3f} m")
    print(f"mean gantry-trackside gap {cmp.mean_gap_db:.4f} dB over {len(grid)} positions (V={cmp.visibility_km:g} km)")
    print(f"smallest pointwise gap    {worst:.4g} dB")
    if args.out:
        body = csv_text(PLACEMENT_HEADER, ((r.longitudinal_m, r.gantry_dbm, r.trackside_dbm, r.gap_db) for r in cmp.rows))
        write_outputs(args.out, body, manifest(loaded, argv, started, {"mean_gap_db": cmp.mean_gap_db}))
    return 0


def cmd_presets(args) -> int:
    if args.name:
        if args.name not in PRESETS:
            raise UsageError(f"unknown preset {args.name!r}")
        sys.stdout.write(preset_text(args.name))
    else:
        print("\n".join(PRESETS))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hstfso", description="Adaptive-divergence FSO links for high-speed trains")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("link", help="evaluate one link")
    s.add_argument("config", help="YAML file or preset name")
    s.add_argument("--range", type=float, required=True, help="communication distance in metres")
    s.add_argument("--visibility", type=float, help="km; defaults to the config value")
    s.add_argument("--mode", help="fixed, adaptive, switched, motorized")

    s = sub.add_parser("sweep", help="received power over range x visibility x mode")
    s.add_argument("config")
    s.add_argument("--ranges", help="metres, 'a,b,c' or 'start:stop:step'")
    s.add_argument("--visibilities", help="km, same syntax")
    s.add_argument("--modes", help="comma separated")
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("maxdist", help="maximum distance meeting the BER target")
    s.add_argument("config")
    s.add_argument("--visibilities")
    s.add_argument("--modes")
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("pass", help="time-stepped train pass")
    s.add_argument("config")
    s.add_argument("--mode")
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("placement", help="gantry versus trackside comparison")
    s.add_argument("config")
    s.add_argument("--ranges", help="longitudinal positions in metres")
    s.add_argument("--out", type=Path)

    s = sub.add_parser("presets", help="list presets or print one")
    s.add_argument("name", nargs="?")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    full = ["hstfso", *argv]
    try:
        if args.command == "link":
            return cmd_link(args)
        if args.command == "sweep":
            return cmd_sweep(args, full)
        if args.command == "maxdist":
            return cmd_maxdist(args, full)
        if args.command == "pass":
            return cmd_pass(args, full)
        if args.command == "placement":
            return cmd_placement(args, full)
        return cmd_presets(args)
    except (ConfigError, DomainError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
