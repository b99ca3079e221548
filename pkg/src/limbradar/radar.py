"""FMCW radar return synthesis for ellipsoid body segments.

Range information is embedded directly in per-chirp range profiles: each
segment contributes a complex return (amplitude = sqrt of its ellipsoid
RCS, phase set by its distance) to the range bin nearest to it, and the
profiles of consecutive chirps form a frame matrix ready for Doppler
processing. Beat-signal-level simulation is deliberately out of scope.

The propagation speed is taken as 3.0e8 m/s, the engineering convention
that makes the standard design numbers round (7.5 cm range resolution at
2 GHz bandwidth, 0.5 ms chirps at 25 GHz for a 6 m/s unambiguous speed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body import N_SEGMENTS, SEGMENT_INDEX, SegmentId
from .errors import ConfigurationError, DataContractError
from .gait import Trajectory

SPEED_OF_LIGHT = 3.0e8

FRAME_FILE_PATTERN = "frame_%06d.bin"

_META_KEYS = ("N_s", "N_p", "T_p", "f_c", "B", "frame_start")


@dataclass(frozen=True)
class RadarConfig:
    """FMCW waveform and geometry parameters."""

    carrier_frequency: float
    bandwidth: float
    chirp_duration: float
    samples_per_chirp: int
    chirps_per_frame: int
    max_range: float
    radar_position: np.ndarray = field(
        default_factory=lambda: np.zeros(3)
    )

    def __post_init__(self):
        object.__setattr__(
            self, "radar_position", np.asarray(self.radar_position, dtype=float)
        )
        if self.carrier_frequency <= 0:
            raise ConfigurationError("carrier_frequency must be positive")
        if self.bandwidth <= 0:
            raise ConfigurationError("bandwidth must be positive")
        if self.chirp_duration <= 0:
            raise ConfigurationError("chirp_duration must be positive")
        if self.samples_per_chirp < 2:
            raise ConfigurationError("samples_per_chirp must be at least 2")
        n_p = self.chirps_per_frame
        if n_p < 2 or (n_p & (n_p - 1)) != 0:
            raise ConfigurationError("chirps_per_frame must be a power of two, >= 2")
        if self.max_range <= 0:
            raise ConfigurationError("max_range must be positive")
        if self.radar_position.shape != (3,):
            raise ConfigurationError("radar_position must be a 3-vector")
        if self.samples_per_chirp * self.range_resolution < self.max_range - 1e-12:
            raise ConfigurationError(
                f"{self.samples_per_chirp} bins of {self.range_resolution} m "
                f"cannot cover max_range = {self.max_range} m"
            )

    @property
    def range_resolution(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def frame_duration(self) -> float:
        return self.chirps_per_frame * self.chirp_duration

    @property
    def velocity_resolution(self) -> float:
        return self.wavelength / (2.0 * self.frame_duration)

    @property
    def unambiguous_velocity(self) -> float:
        """Largest speed representable without Doppler aliasing."""
        return self.wavelength / (4.0 * self.chirp_duration)

    @property
    def range_axis(self) -> np.ndarray:
        return np.arange(self.samples_per_chirp) * self.range_resolution

    @property
    def doppler_axis(self) -> np.ndarray:
        """Zero-centered Doppler frequencies after FFT shift (Hz)."""
        return np.fft.fftshift(
            np.fft.fftfreq(self.chirps_per_frame, d=self.chirp_duration)
        )

    @property
    def velocity_axis(self) -> np.ndarray:
        """Velocities for the shifted Doppler bins; positive = approaching."""
        return doppler_to_velocity(self.doppler_axis, self.carrier_frequency)


RADAR_PRESETS: dict[str, RadarConfig] = {
    "model-a": RadarConfig(
        carrier_frequency=25e9,
        bandwidth=2e9,
        chirp_duration=0.5e-3,
        samples_per_chirp=160,
        chirps_per_frame=64,
        max_range=12.0,
        radar_position=np.array([0.0, 0.0, 1.0]),
    ),
    "model-b": RadarConfig(
        carrier_frequency=25e9,
        bandwidth=2e9,
        chirp_duration=0.5e-3,
        samples_per_chirp=100,
        chirps_per_frame=64,
        max_range=7.5,
        radar_position=np.array([0.0, 0.0, 1.0]),
    ),
}


@dataclass(frozen=True)
class AspectGeometry:
    """Line-of-sight description: polar angle, azimuth, distance."""

    theta: float
    phi: float
    distance: float

    def __post_init__(self):
        if self.distance <= 0:
            raise DataContractError("distance must be positive")
        if not 0.0 <= self.theta <= math.pi:
            raise DataContractError("theta must lie in [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise DataContractError("phi must lie in [0, 2*pi)")


@dataclass(frozen=True)
class ChirpFrame:
    """Complex range-profile matrix: N_s range bins x N_p chirps."""

    data: np.ndarray
    frame_start: float
    config: RadarConfig

    def __post_init__(self):
        data = np.asarray(self.data)
        object.__setattr__(self, "data", data)
        expected = (self.config.samples_per_chirp, self.config.chirps_per_frame)
        if data.shape != expected:
            raise DataContractError(
                f"frame data must have shape {expected}, got {data.shape}"
            )
        if not np.all(np.isfinite(data.view(float))):
            raise DataContractError("frame entries must be finite")


def rcs_ellipsoid(shape, theta, phi):
    """Backscattered RCS (m^2) of an ellipsoid seen from angles (theta, phi).

    sigma = pi a^2 b^2 c^2 / (a^2 sin^2(t) cos^2(p) + b^2 sin^2(t) sin^2(p)
    + c^2 cos^2(t))^2. Accepts scalar or array angles.
    """
    a, b, c = shape.a, shape.b, shape.c
    if min(a, b, c) <= 0:
        raise ConfigurationError("ellipsoid radii must be positive")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st2 = np.sin(theta) ** 2
    denom = (
        a * a * st2 * np.cos(phi) ** 2
        + b * b * st2 * np.sin(phi) ** 2
        + c * c * np.cos(theta) ** 2
    )
    sigma = math.pi * (a * b * c) ** 2 / denom**2
    return sigma if sigma.shape else float(sigma)


def segment_return(sigma, distance, wavelength):
    """Complex return sqrt(sigma) * exp(-j*4*pi*d/lambda)."""
    sigma = np.asarray(sigma, dtype=float)
    distance = np.asarray(distance, dtype=float)
    if np.any(sigma <= 0):
        raise DataContractError("sigma must be positive")
    if np.any(distance <= 0):
        raise DataContractError("distance must be positive")
    if wavelength <= 0:
        raise DataContractError("wavelength must be positive")
    out = np.sqrt(sigma) * np.exp(-4j * math.pi * distance / wavelength)
    return out if out.shape else complex(out)


def geometry_of(radar_position, segment_position) -> AspectGeometry:
    """Aspect angles and distance of the radar-to-segment line of sight.

    Angles are expressed in the segment's local frame, which is aligned
    with the world axes (segments are not rotated).
    """
    radar = np.asarray(radar_position, dtype=float)
    seg = np.asarray(segment_position, dtype=float)
    delta = seg - radar
    d = float(np.linalg.norm(delta))
    if d < 1e-12:
        raise DataContractError("radar and segment positions coincide")
    theta = float(np.arccos(np.clip(delta[2] / d, -1.0, 1.0)))
    phi = float(np.mod(np.arctan2(delta[1], delta[0]), 2.0 * math.pi))
    if phi >= 2.0 * math.pi:  # guard the mod boundary
        phi = 0.0
    return AspectGeometry(theta=theta, phi=phi, distance=d)


def chirp_duration(carrier_frequency: float, v_max: float) -> float:
    """Chirp repetition interval for an unambiguous speed of v_max."""
    if carrier_frequency <= 0 or v_max <= 0:
        raise ConfigurationError("carrier_frequency and v_max must be positive")
    return SPEED_OF_LIGHT / (4.0 * carrier_frequency * v_max)


def chirp_count_raw(carrier_frequency: float, chirp_duration: float, v_res: float) -> float:
    """Minimum (real-valued) chirps per frame for velocity resolution v_res."""
    if min(carrier_frequency, chirp_duration, v_res) <= 0:
        raise ConfigurationError("all inputs must be positive")
    return SPEED_OF_LIGHT / (2.0 * carrier_frequency * chirp_duration * v_res)


def chirps_per_frame(carrier_frequency: float, chirp_duration: float, v_res: float) -> int:
    """Smallest power of two meeting the chirp_count_raw requirement."""
    raw = chirp_count_raw(carrier_frequency, chirp_duration, v_res)
    n = 1
    while n * (1.0 + 1e-12) < raw:
        n <<= 1
    return n


def doppler_to_velocity(doppler_hz, carrier_frequency: float):
    """Radial velocity for a Doppler shift; positive = approaching."""
    if carrier_frequency <= 0:
        raise ConfigurationError("carrier_frequency must be positive")
    return doppler_hz * SPEED_OF_LIGHT / (2.0 * carrier_frequency)


def velocity_to_doppler(velocity, carrier_frequency: float):
    if carrier_frequency <= 0:
        raise ConfigurationError("carrier_frequency must be positive")
    return 2.0 * velocity * carrier_frequency / SPEED_OF_LIGHT


def _returns_at(
    traj: Trajectory,
    shapes: dict[SegmentId, "EllipsoidShape"],
    config: RadarConfig,
    times: np.ndarray,
):
    """Per-segment complex returns and target bins at the given times.

    Returns (amplitudes, bins, valid), each of shape (16, len(times)).
    """
    pos = traj.interpolate(times)  # (16, m, 3)
    delta = pos - config.radar_position[None, None, :]
    d = np.linalg.norm(delta, axis=2)
    if np.any(d < 1e-9):
        raise DataContractError("a segment coincides with the radar position")
    theta = np.arccos(np.clip(delta[..., 2] / d, -1.0, 1.0))
    phi = np.mod(np.arctan2(delta[..., 1], delta[..., 0]), 2.0 * math.pi)

    amp = np.empty(d.shape, dtype=complex)
    for seg, idx in SEGMENT_INDEX.items():
        sigma = rcs_ellipsoid(shapes[seg], theta[idx], phi[idx])
        amp[idx] = np.sqrt(sigma)
    amp = amp * np.exp(-4j * math.pi * d / config.wavelength)

    bins = np.rint(d / config.range_resolution).astype(int)
    valid = (d <= config.max_range) & (bins >= 0) & (bins < config.samples_per_chirp)
    return amp, bins, valid


def synth_range_profile(
    traj: Trajectory,
    shapes: dict,
    config: RadarConfig,
    t: float,
) -> np.ndarray:
    """Complex range profile (length N_s) of the scene at time t.

    Each segment's return lands in the bin nearest its distance
    (ties round half to even); segments beyond max_range are skipped.
    Superposition is exact complex addition.
    """
    amp, bins, valid = _returns_at(traj, shapes, config, np.array([t]))
    profile = np.zeros(config.samples_per_chirp, dtype=complex)
    sel = valid[:, 0]
    np.add.at(profile, bins[sel, 0], amp[sel, 0])
    return profile


def _frame_matrices(traj, shapes, config, frame_start, per_segment: bool):
    t0, t1 = traj.span
    t_end = frame_start + config.frame_duration
    if frame_start < t0 - 1e-12 or t_end > t1 + 1e-12:
        raise DataContractError(
            f"frame [{frame_start:.6f}, {t_end:.6f}] s not covered by "
            f"trajectory span [{t0:.6f}, {t1:.6f}] s"
        )
    n_p = config.chirps_per_frame
    times = frame_start + np.arange(n_p) * config.chirp_duration
    amp, bins, valid = _returns_at(traj, shapes, config, times)
    cols = np.broadcast_to(np.arange(n_p), bins.shape)

    combined = np.zeros((config.samples_per_chirp, n_p), dtype=complex)
    np.add.at(combined, (bins[valid], cols[valid]), amp[valid])
    if not per_segment:
        return combined, None

    segs = np.broadcast_to(np.arange(N_SEGMENTS)[:, None], bins.shape)
    stack = np.zeros((N_SEGMENTS, config.samples_per_chirp, n_p), dtype=complex)
    np.add.at(stack, (segs[valid], bins[valid], cols[valid]), amp[valid])
    return combined, stack


def synth_frame(
    traj: Trajectory,
    shapes: dict,
    config: RadarConfig,
    frame_start: float,
) -> ChirpFrame:
    """One measurement frame: column k is the profile at start + k*T_p."""
    combined, _ = _frame_matrices(traj, shapes, config, frame_start, per_segment=False)
    return ChirpFrame(data=combined, frame_start=frame_start, config=config)


def synth_frame_segments(
    traj: Trajectory,
    shapes: dict,
    config: RadarConfig,
    frame_start: float,
) -> tuple[ChirpFrame, dict[SegmentId, ChirpFrame]]:
    """Combined frame plus per-segment frames (for label attribution)."""
    combined, stack = _frame_matrices(traj, shapes, config, frame_start, per_segment=True)
    frame = ChirpFrame(data=combined, frame_start=frame_start, config=config)
    per_segment = {
        seg: ChirpFrame(data=stack[idx], frame_start=frame_start, config=config)
        for seg, idx in SEGMENT_INDEX.items()
    }
    return frame, per_segment


def add_noise(frame: ChirpFrame, snr_db: float, rng: np.random.Generator) -> ChirpFrame:
    """Additive complex Gaussian noise at the given SNR (dB).

    SNR is measured against the mean power of the frame's cells; an
    all-zero frame is returned unchanged.
    """
    power = float(np.mean(np.abs(frame.data) ** 2))
    if power == 0.0:
        return ChirpFrame(frame.data.copy(), frame.frame_start, frame.config)
    noise_power = power / 10.0 ** (snr_db / 10.0)
    scale = math.sqrt(noise_power / 2.0)
    noise = scale * (
        rng.standard_normal(frame.data.shape)
        + 1j * rng.standard_normal(frame.data.shape)
    )
    return ChirpFrame(frame.data + noise, frame.frame_start, frame.config)


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta")


def save_frame(frame: ChirpFrame, path) -> None:
    """Write a frame as interleaved little-endian float32 plus a sidecar.

    The `.meta` sidecar is JSON text with the waveform parameters needed
    to reinterpret the binary matrix.
    """
    path = Path(path)
    frame.data.astype("<c8").tofile(path)
    meta = {
        "N_s": frame.config.samples_per_chirp,
        "N_p": frame.config.chirps_per_frame,
        "T_p": frame.config.chirp_duration,
        "f_c": frame.config.carrier_frequency,
        "B": frame.config.bandwidth,
        "frame_start": frame.frame_start,
    }
    _meta_path(path).write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_frame(path) -> ChirpFrame:
    """Read a frame written by save_frame.

    The sidecar does not carry scene geometry, so the reconstructed
    config uses a radar position at the origin and max_range equal to
    the full bin span; both are irrelevant for map processing.
    """
    path = Path(path)
    meta_file = _meta_path(path)
    if not meta_file.exists():
        raise DataContractError(f"missing sidecar {meta_file.name}")
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        missing = [k for k in _META_KEYS if k not in meta]
        if missing:
            raise DataContractError(
                f"sidecar {meta_file.name} lacks keys: {', '.join(missing)}"
            )
        config = RadarConfig(
            carrier_frequency=float(meta["f_c"]),
            bandwidth=float(meta["B"]),
            chirp_duration=float(meta["T_p"]),
            samples_per_chirp=int(meta["N_s"]),
            chirps_per_frame=int(meta["N_p"]),
            max_range=int(meta["N_s"]) * SPEED_OF_LIGHT / (2.0 * float(meta["B"])),
        )
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise DataContractError(f"corrupt sidecar {meta_file.name}: {exc}") from exc
    raw = np.fromfile(path, dtype="<c8")
    expected = config.samples_per_chirp * config.chirps_per_frame
    if raw.size != expected:
        raise DataContractError(
            f"frame file {path.name} holds {raw.size} samples, expected {expected}"
        )
    data = raw.reshape(config.samples_per_chirp, config.chirps_per_frame)
    return ChirpFrame(
        data=data.astype(complex),
        frame_start=float(meta["frame_start"]),
        config=config,
    )
