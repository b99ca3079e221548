"""Scenario configuration: one INI file drives the whole pipeline.

Sections: [scenario] (duration, output dir), [gait] (analytic walking
parameters or a mocap file, never both), [radar] (preset name or
explicit front-end parameters), [processing] and [classifier] (all
optional, defaulting to the calibrated values). Unknown sections or
keys are rejected outright so typos fail loudly instead of silently
falling back to defaults. Command-line overrides are applied before
validation, so flags win over file values.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .gait import GaitConfig
from .processing import DEFAULT_GAMMA, DEFAULT_HISTOGRAM_BINS, DEFAULT_STFT_WINDOW
from .radar import RADAR_PRESETS, RadarConfig

_GAIT_ANALYTIC_KEYS = {
    "subject_height",
    "walk_speed",
    "sample_rate",
    "start_x",
    "start_y",
    "start_z",
    "heading_x",
    "heading_y",
    "heading_z",
    "cycle_duration_s",
    "seed",
}
_GAIT_MOCAP_KEYS = {"mocap_file", "sample_rate"}
_RADAR_EXPLICIT_KEYS = {
    "carrier_frequency_hz",
    "bandwidth_hz",
    "chirp_duration_s",
    "samples_per_chirp",
    "chirps_per_frame",
    "max_range_m",
    "position_x",
    "position_y",
    "position_z",
}
_RADAR_COMMON_KEYS = {"noise_snr_db", "noise_seed", "write_segment_frames"}
_KNOWN_KEYS = {
    "scenario": {"duration_s", "output_dir"},
    "gait": _GAIT_ANALYTIC_KEYS | _GAIT_MOCAP_KEYS,
    "radar": {"preset"} | _RADAR_EXPLICIT_KEYS | _RADAR_COMMON_KEYS,
    "processing": {
        "gamma",
        "histogram_bins",
        "doppler_window",
        "stft_window_len",
        "stft_hop",
        "stft_sigma",
    },
    "classifier": {
        "max_depth",
        "min_samples_leaf",
        "train_fraction",
        "seed",
        "filter_order",
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved and validated run description."""

    duration: float
    output_dir: Path | None
    gait: GaitConfig | None  # None when a mocap file drives the scene
    mocap_file: Path | None
    mocap_sample_rate: float | None
    radar: RadarConfig
    noise_snr_db: float | None
    noise_seed: int
    write_segment_frames: bool
    gamma: float
    histogram_bins: int
    doppler_window: str | None
    stft_window_len: int
    stft_hop: int | None
    stft_sigma: float | None
    max_depth: int
    min_samples_leaf: int
    train_fraction: float
    classifier_seed: int
    filter_order: int
    config_hash: str


def _parse_value(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return kind(raw)
    except ValueError as exc:
        raise ConfigurationError(f"[{section}] {key}: {exc}") from exc


def _read_sections(path: Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";")
    )
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def _reject_unknown(sections: dict[str, dict[str, str]]) -> None:
    for name, body in sections.items():
        if name not in _KNOWN_KEYS:
            raise ConfigurationError(f"unknown config section [{name}]")
        unknown = sorted(set(body) - _KNOWN_KEYS[name])
        if unknown:
            raise ConfigurationError(
                f"unknown key(s) in [{name}]: {', '.join(unknown)}"
            )


def _apply_overrides(sections, overrides: dict[str, object]) -> None:
    """Overrides look like {'processing.gamma': 1.0}; flags win.

    A radar preset override replaces any explicit front-end fields so
    the two sources cannot conflict.
    """
    for dotted, value in overrides.items():
        if value is None:
            continue
        section, _, key = dotted.partition(".")
        if section not in _KNOWN_KEYS or key not in _KNOWN_KEYS[section]:
            raise ConfigurationError(f"unknown override {dotted!r}")
        sections.setdefault(section, {})[key] = str(value)
        if dotted == "radar.preset":
            for field_key in _RADAR_EXPLICIT_KEYS:
                sections["radar"].pop(field_key, None)


def _build_gait(body: dict[str, str], base_dir: Path):
    """Returns (GaitConfig | None, mocap path | None, mocap rate | None)."""
    if "mocap_file" in body:
        extra = sorted(set(body) - _GAIT_MOCAP_KEYS)
        if extra:
            raise ConfigurationError(
                f"[gait] mocap_file excludes analytic keys: {', '.join(extra)}"
            )
        mocap = (base_dir / body["mocap_file"]).resolve()
        if not mocap.is_file():
            raise ConfigurationError(f"[gait] mocap_file does not exist: {mocap}")
        rate = _parse_value("gait", "sample_rate", body.get("sample_rate", "2000"), float)
        return None, mocap, rate

    missing = sorted(
        k for k in ("subject_height", "walk_speed", "sample_rate") if k not in body
    )
    if missing:
        raise ConfigurationError(f"[gait] missing key(s): {', '.join(missing)}")

    def flt(key, default=None):
        if key not in body:
            return default
        return _parse_value("gait", key, body[key], float)

    start = np.array([flt("start_x", 6.0), flt("start_y", 0.0), flt("start_z", 0.0)])
    heading = np.array(
        [flt("heading_x", -1.0), flt("heading_y", 0.0), flt("heading_z", 0.0)]
    )
    norm = float(np.linalg.norm(heading))
    if norm == 0.0:
        raise ConfigurationError("[gait] heading must not be the zero vector")
    heading = heading / norm
    config = GaitConfig(
        subject_height=flt("subject_height"),
        walk_speed=flt("walk_speed"),
        sample_rate=flt("sample_rate"),
        start_position=start,
        heading=heading,
        cycle_duration=flt("cycle_duration_s"),
        random_seed=_parse_value("gait", "seed", body.get("seed", "0"), int),
    )
    return config, None, None


def _build_radar(body: dict[str, str]) -> RadarConfig:
    explicit = sorted(set(body) & _RADAR_EXPLICIT_KEYS)
    if "preset" in body:
        if explicit:
            raise ConfigurationError(
                f"[radar] preset excludes explicit key(s): {', '.join(explicit)}"
            )
        name = body["preset"].strip()
        if name not in RADAR_PRESETS:
            known = ", ".join(sorted(RADAR_PRESETS))
            raise ConfigurationError(f"[radar] unknown preset {name!r} (known: {known})")
        return RADAR_PRESETS[name]
    missing = sorted(
        k
        for k in _RADAR_EXPLICIT_KEYS
        if k not in body and not k.startswith("position_")
    )
    if missing:
        raise ConfigurationError(
            f"[radar] needs a preset or explicit key(s): {', '.join(missing)}"
        )

    def flt(key, default=None):
        if key not in body:
            return default
        return _parse_value("radar", key, body[key], float)

    return RadarConfig(
        carrier_frequency=flt("carrier_frequency_hz"),
        bandwidth=flt("bandwidth_hz"),
        chirp_duration=flt("chirp_duration_s"),
        samples_per_chirp=_parse_value(
            "radar", "samples_per_chirp", body["samples_per_chirp"], int
        ),
        chirps_per_frame=_parse_value(
            "radar", "chirps_per_frame", body["chirps_per_frame"], int
        ),
        max_range=flt("max_range_m"),
        radar_position=np.array(
            [flt("position_x", 0.0), flt("position_y", 0.0), flt("position_z", 1.0)]
        ),
    )


def _canonical_text(fields: list[tuple[str, object]]) -> str:
    return "\n".join(f"{k}={v!r}" for k, v in sorted(fields))


def load_scenario(path, overrides: dict[str, object] | None = None) -> ScenarioConfig:
    """Parse, override, and validate one INI scenario file.

    The returned config carries a hash of every resolved value, so two
    runs with the same hash are guaranteed the same pipeline inputs.
    """
    path = Path(path)
    sections = _read_sections(path)
    _apply_overrides(sections, overrides or {})
    _reject_unknown(sections)

    for required in ("scenario", "gait", "radar"):
        if required not in sections:
            raise ConfigurationError(f"missing config section [{required}]")
    scen = sections["scenario"]
    if "duration_s" not in scen:
        raise ConfigurationError("[scenario] duration_s is required")
    duration = _parse_value("scenario", "duration_s", scen["duration_s"], float)
    if duration <= 0:
        raise ConfigurationError("[scenario] duration_s must be positive")
    output_dir = Path(scen["output_dir"]) if "output_dir" in scen else None

    gait, mocap_file, mocap_rate = _build_gait(sections["gait"], path.parent)
    radar_body = sections["radar"]
    radar = _build_radar(radar_body)
    noise_snr_db = (
        _parse_value("radar", "noise_snr_db", radar_body["noise_snr_db"], float)
        if "noise_snr_db" in radar_body
        else None
    )
    noise_seed = _parse_value(
        "radar", "noise_seed", radar_body.get("noise_seed", "0"), int
    )
    write_segments = _parse_value(
        "radar",
        "write_segment_frames",
        radar_body.get("write_segment_frames", "true"),
        bool,
    )

    proc = sections.get("processing", {})
    gamma = _parse_value("processing", "gamma", proc.get("gamma", "0.65"), float)
    if gamma <= 0:
        raise ConfigurationError("[processing] gamma must be positive")
    bins = _parse_value(
        "processing",
        "histogram_bins",
        proc.get("histogram_bins", str(DEFAULT_HISTOGRAM_BINS)),
        int,
    )
    if bins < 2:
        raise ConfigurationError("[processing] histogram_bins must be at least 2")
    window = proc.get("doppler_window", "hann").strip().lower()
    if window not in ("hann", "none"):
        raise ConfigurationError(
            f"[processing] doppler_window must be hann or none, got {window!r}"
        )
    stft_window_len = _parse_value(
        "processing",
        "stft_window_len",
        proc.get("stft_window_len", str(DEFAULT_STFT_WINDOW)),
        int,
    )
    stft_hop = (
        _parse_value("processing", "stft_hop", proc["stft_hop"], int)
        if "stft_hop" in proc
        else None
    )
    stft_sigma = (
        _parse_value("processing", "stft_sigma", proc["stft_sigma"], float)
        if "stft_sigma" in proc
        else None
    )

    clf = sections.get("classifier", {})
    max_depth = _parse_value("classifier", "max_depth", clf.get("max_depth", "12"), int)
    min_leaf = _parse_value(
        "classifier", "min_samples_leaf", clf.get("min_samples_leaf", "20"), int
    )
    train_fraction = _parse_value(
        "classifier", "train_fraction", clf.get("train_fraction", "0.75"), float
    )
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError("[classifier] train_fraction must lie in (0, 1)")
    classifier_seed = _parse_value("classifier", "seed", clf.get("seed", "0"), int)
    filter_order = _parse_value(
        "classifier", "filter_order", clf.get("filter_order", "9"), int
    )
    if filter_order < 1 or filter_order % 2 == 0:
        raise ConfigurationError("[classifier] filter_order must be odd and positive")

    hash_fields: list[tuple[str, object]] = [
        ("duration", duration),
        ("mocap_file", str(mocap_file) if mocap_file else None),
        ("mocap_sample_rate", mocap_rate),
        ("noise_snr_db", noise_snr_db),
        ("noise_seed", noise_seed),
        ("write_segment_frames", write_segments),
        ("gamma", gamma),
        ("histogram_bins", bins),
        ("doppler_window", window),
        ("stft_window_len", stft_window_len),
        ("stft_hop", stft_hop),
        ("stft_sigma", stft_sigma),
        ("max_depth", max_depth),
        ("min_samples_leaf", min_leaf),
        ("train_fraction", train_fraction),
        ("classifier_seed", classifier_seed),
        ("filter_order", filter_order),
        ("radar.carrier_frequency", radar.carrier_frequency),
        ("radar.bandwidth", radar.bandwidth),
        ("radar.chirp_duration", radar.chirp_duration),
        ("radar.samples_per_chirp", radar.samples_per_chirp),
        ("radar.chirps_per_frame", radar.chirps_per_frame),
        ("radar.max_range", radar.max_range),
        ("radar.position", tuple(float(v) for v in radar.radar_position)),
    ]
    if gait is not None:
        hash_fields += [
            ("gait.subject_height", gait.subject_height),
            ("gait.walk_speed", gait.walk_speed),
            ("gait.sample_rate", gait.sample_rate),
            ("gait.start", tuple(float(v) for v in gait.start_position)),
            ("gait.heading", tuple(float(v) for v in gait.heading)),
            ("gait.cycle_duration", gait.cycle_duration),
            ("gait.seed", gait.random_seed),
        ]
    digest = hashlib.sha256(_canonical_text(hash_fields).encode("utf-8")).hexdigest()

    return ScenarioConfig(
        duration=duration,
        output_dir=output_dir,
        gait=gait,
        mocap_file=mocap_file,
        mocap_sample_rate=mocap_rate,
        radar=radar,
        noise_snr_db=noise_snr_db,
        noise_seed=noise_seed,
        write_segment_frames=write_segments,
        gamma=gamma,
        histogram_bins=bins,
        doppler_window=None if window == "none" else window,
        stft_window_len=stft_window_len,
        stft_hop=stft_hop,
        stft_sigma=stft_sigma,
        max_depth=max_depth,
        min_samples_leaf=min_leaf,
        train_fraction=train_fraction,
        classifier_seed=classifier_seed,
        filter_order=filter_order,
        config_hash=digest,
    )
