"""Declarative scenario configs: strict unit parsing, loading, round-trip.

A config is one YAML document with radar / ris / placement / physiology /
channel / processing / strategy / sweep sections. Scalar quantities carry
explicit unit suffixes ("7.15 GHz", "250 ms", "10 mW", "2 cm", "10 dB");
bare numbers are taken as base SI units. Unknown keys and unit/dimension
mismatches are rejected rather than guessed at.
"""

import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from .geometry import Placement
from .scenario import (ChannelConfig, PhysioConfig, ProcessingConfig,
                       RadarConfig, RisPanel, Scenario, dbm_to_watts,
                       default_placement)
from .strategy import StrategyConfig


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configuration input."""


_UNIT_TABLES = {
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6},
    "db": {"dB": 1.0},
    "ratio": {},
}


def parse_quantity(value, kind: str, key: str = "") -> float:
    """Parse a number-with-unit string (or bare SI number) of a given kind."""
    table = _UNIT_TABLES[kind]
    where = f" for {key!r}" if key else ""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a quantity{where}, got {value!r}")
    parts = value.split()
    if len(parts) != 2:
        raise ConfigError(
            f"quantity{where} must be '<number> <unit>', got {value!r}")
    number, unit = parts
    try:
        magnitude = float(number)
    except ValueError:
        raise ConfigError(f"bad number {number!r}{where}") from None
    if kind == "power" and unit == "dBm":
        return dbm_to_watts(magnitude)
    if unit not in table:
        allowed = ", ".join(table) or "a bare number"
        raise ConfigError(
            f"unit {unit!r}{where} does not measure {kind}; use {allowed}")
    return magnitude * table[unit]


def _take(section: dict, key: str, default=None):
    return section.pop(key) if key in section else default

def _reject_unknown(section: dict, name: str) -> None:
    if section:
        raise ConfigError(f"unknown keys in {name!r} section: "
                          + ", ".join(sorted(section)))


def _vector(value, key: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"{key!r} must be a 3-vector in metres")
    return arr


def _parse_placement(section: dict) -> Placement:
    if not section:
        return default_placement()
    radar = _vector(_take(section, "radar", [0.0, 0.0, 1.0]), "radar")
    ris_center = _vector(_take(section, "ris_center", [2.707, 1.4606, 1.0]),
                         "ris_center")
    ris_normal = _vector(_take(section, "ris_normal", [0.0, -1.0, 0.0]),
                         "ris_normal")
    target = _vector(_take(section, "target", [3.0, 0.0, 1.0]), "target")
    chest = _take(section, "chest_normal", "auto")
    if isinstance(chest, str):
        if chest != "auto":
            raise ConfigError("chest_normal must be a 3-vector or 'auto'")
        chest_normal = ris_center - target
        chest_normal = chest_normal / np.linalg.norm(chest_normal)
    else:
        chest_normal = _vector(chest, "chest_normal")
    _reject_unknown(section, "placement")
    return Placement(radar_position=radar, ris_center=ris_center,
                     ris_normal=ris_normal, target_position=target,
                     chest_normal=chest_normal)


def parse_config(doc: dict):
    """Build (Scenario, StrategyConfig, sweep dict) from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    doc = {k: dict(v) if isinstance(v, dict) else v for k, v in doc.items()}

    r = doc.pop("radar", {})
    radar = RadarConfig(
        element_count=int(_take(r, "element_count", 5)),
        carrier_frequency=parse_quantity(
            _take(r, "carrier_frequency", 7.15e9), "frequency",
            "carrier_frequency"),
        bandwidth=parse_quantity(_take(r, "bandwidth", 0.5e6), "frequency",
                                 "bandwidth"),
        fast_time_samples=int(_take(r, "fast_time_samples", 64)),
        pulse_repetition_interval=parse_quantity(
            _take(r, "pulse_repetition_interval", 0.25), "time",
            "pulse_repetition_interval"),
        total_power=parse_quantity(_take(r, "total_power", 10e-3), "power",
                                   "total_power"),
        noise_figure_db=parse_quantity(_take(r, "noise_figure", 10.0), "db",
                                       "noise_figure"),
        tone_frequency=(None if "tone_frequency" not in r else parse_quantity(
            r.pop("tone_frequency"), "frequency", "tone_frequency")),
        element_spacing=(None if "element_spacing" not in r else
                         parse_quantity(r.pop("element_spacing"), "length",
                                        "element_spacing")),
    )
    _reject_unknown(r, "radar")

    s = doc.pop("ris", {})
    ris = RisPanel(
        rows=int(_take(s, "rows", 10)),
        cols=int(_take(s, "cols", 10)),
        element_spacing=(None if "element_spacing" not in s else
                         parse_quantity(s.pop("element_spacing"), "length",
                                        "ris.element_spacing")),
        phase_bits=(None if "phase_bits" not in s else int(s.pop("phase_bits"))),
    )
    _reject_unknown(s, "ris")

    placement = _parse_placement(doc.pop("placement", {}))

    p = doc.pop("physiology", {})
    physio = PhysioConfig(
        breath_rate=parse_quantity(_take(p, "breathing_rate", 0.133),
                                   "frequency", "breathing_rate"),
        peak_to_peak=parse_quantity(_take(p, "peak_to_peak", 0.02), "length",
                                    "peak_to_peak"),
        duration=parse_quantity(_take(p, "duration", 60.0), "time", "duration"),
        harmonics=int(_take(p, "harmonics", 0)),
        drift=parse_quantity(_take(p, "drift", 0.0), "length", "drift"),
        reflectivity_ris=float(_take(p, "reflectivity_ris", 40.0)),
        reflectivity_direct=float(_take(p, "reflectivity_direct", 3.0)),
        gain_exponent=(None if "gain_exponent" not in p
                       else float(p.pop("gain_exponent"))),
        gain_table=tuple(tuple(row) for row in _take(p, "gain_table", ())),
        distortion_strength=float(_take(p, "distortion_strength", 0.35)),
        trace_file=_take(p, "trace_file"),
    )
    _reject_unknown(p, "physiology")

    c = doc.pop("channel", {})
    channel = ChannelConfig(
        k_rice_db=parse_quantity(_take(c, "rician_k", 10.0), "db", "rician_k"),
        clutter_strength=float(_take(c, "clutter_strength", 1e-10)),
    )
    _reject_unknown(c, "channel")

    pr = doc.pop("processing", {})
    band = _take(pr, "band", (0.05, 0.7))
    band = tuple(parse_quantity(b, "frequency", "band") for b in band)
    if len(band) != 2 or band[0] >= band[1]:
        raise ConfigError("band must be [low, high] with low < high")
    window = _take(pr, "clutter_window", 21)
    processing = ProcessingConfig(
        clutter_window=None if window in (None, "off") else int(window),
        zero_pad_factor=int(_take(pr, "zero_pad_factor", 4)),
        band=band,
        detrend=bool(_take(pr, "detrend", True)),
    )
    _reject_unknown(pr, "processing")

    st = doc.pop("strategy", {})
    strategy = StrategyConfig(
        kind=str(_take(st, "kind", "spatial")),
        ris_share=float(_take(st, "ris_share", 0.5)),
        adaptation_step=float(_take(st, "adaptation_step", 0.1)),
        prominence_threshold_db=parse_quantity(
            _take(st, "prominence_threshold", 6.0), "db",
            "prominence_threshold"),
        hysteresis_windows=int(_take(st, "hysteresis_windows", 2)),
        initial_path=_take(st, "initial_path"),
        ideal=bool(_take(st, "ideal", False)),
    )
    _reject_unknown(st, "strategy")

    sw = doc.pop("sweep", {})
    sweep = {
        "gammas": [float(g) for g in _take(
            sw, "gammas", [round(0.1 * i, 1) for i in range(11)])],
        "seeds": int(_take(sw, "seeds", 20)),
    }
    _reject_unknown(sw, "sweep")
    _reject_unknown(doc, "top-level")

    scenario = Scenario(radar=radar, ris=ris, placement=placement,
                        physio=physio, channel=channel, processing=processing)
    return scenario, strategy, sweep


def load_config(path):
    """Load and parse a YAML scenario file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(doc)


def serialize_config(scenario: Scenario, strategy: StrategyConfig,
                     sweep: dict) -> dict:
    """Scenario back to a plain-SI config document (parse round-trips)."""
    pl = scenario.placement
    doc = {
        "radar": {
            "element_count": scenario.radar.element_count,
            "carrier_frequency": scenario.radar.carrier_frequency,
            "bandwidth": scenario.radar.bandwidth,
            "fast_time_samples": scenario.radar.fast_time_samples,
            "pulse_repetition_interval":
                scenario.radar.pulse_repetition_interval,
            "total_power": scenario.radar.total_power,
            "noise_figure": scenario.radar.noise_figure_db,
        },
        "ris": {"rows": scenario.ris.rows, "cols": scenario.ris.cols},
        "placement": {
            "radar": pl.radar_position.tolist(),
            "ris_center": pl.ris_center.tolist(),
            "ris_normal": pl.ris_normal.tolist(),
            "target": pl.target_position.tolist(),
            "chest_normal": pl.chest_normal.tolist(),
        },
        "physiology": {
            "breathing_rate": scenario.physio.breath_rate,
            "peak_to_peak": scenario.physio.peak_to_peak,
            "duration": scenario.physio.duration,
            "harmonics": scenario.physio.harmonics,
            "drift": scenario.physio.drift,
            "reflectivity_ris": scenario.physio.reflectivity_ris,
            "reflectivity_direct": scenario.physio.reflectivity_direct,
            "distortion_strength": scenario.physio.distortion_strength,
        },
        "channel": {
            "rician_k": scenario.channel.k_rice_db,
            "clutter_strength": scenario.channel.clutter_strength,
        },
        "processing": {
            "clutter_window": scenario.processing.clutter_window,
            "zero_pad_factor": scenario.processing.zero_pad_factor,
            "band": list(scenario.processing.band),
            "detrend": scenario.processing.detrend,
        },
        "strategy": {
            "kind": strategy.kind,
            "ris_share": strategy.ris_share,
            "adaptation_step": strategy.adaptation_step,
            "prominence_threshold": strategy.prominence_threshold_db,
            "hysteresis_windows": strategy.hysteresis_windows,
            "ideal": strategy.ideal,
        },
        "sweep": dict(sweep),
    }
    if strategy.initial_path is not None:
        doc["strategy"]["initial_path"] = strategy.initial_path
    if scenario.radar.tone_frequency is not None:
        doc["radar"]["tone_frequency"] = scenario.radar.tone_frequency
    if scenario.radar.element_spacing is not None:
        doc["radar"]["element_spacing"] = scenario.radar.element_spacing
    if scenario.ris.element_spacing is not None:
        doc["ris"]["element_spacing"] = scenario.ris.element_spacing
    if scenario.ris.phase_bits is not None:
        doc["ris"]["phase_bits"] = scenario.ris.phase_bits
    if scenario.physio.gain_exponent is not None:
        doc["physiology"]["gain_exponent"] = scenario.physio.gain_exponent
    if scenario.physio.gain_table:
        doc["physiology"]["gain_table"] = [list(r) for r in
                                           scenario.physio.gain_table]
    if scenario.physio.trace_file is not None:
        doc["physiology"]["trace_file"] = scenario.physio.trace_file
    return doc


def config_hash(scenario: Scenario, strategy: StrategyConfig,
                sweep: dict) -> str:
    """Stable digest of the fully-resolved configuration."""
    doc = serialize_config(scenario, strategy, sweep)
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
