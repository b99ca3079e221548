"""Analytic walking-gait generator and trajectory utilities.

The subject is modeled as a trunk translating uniformly along a heading
while the 16 body segments ride it. Base segments (head, neck, torso,
hip) add a small vertical bob, twice per gait cycle. Every limb segment
adds a sinusoidal pendular swing along the heading whose velocity
amplitude is a fixed multiple of the walking speed, so the foot peak
speed is 4x the walking speed by construction and hands move about as
fast as the lower legs. Left and right counterparts are half a gait
cycle apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .body import (
    N_SEGMENTS,
    SEGMENT_INDEX,
    SEGMENT_OFFSET_FRACTIONS,
    SEGMENT_ORDER,
    SegmentId,
)
from .errors import ConfigurationError, DataContractError

# Peak swing speed of each limb type as a multiple of the walking speed.
# Feet reach 4x walking speed in total (bulk + swing); hands and lower
# legs stay close together on purpose.
SWING_MULTIPLIER: dict[str, float] = {
    "upper_arm": 0.6,
    "lower_arm": 1.2,
    "hand": 1.8,
    "upper_leg": 1.0,
    "lower_leg": 1.9,
    "foot": 3.0,
}

# Base phase per limb type (rad). Arms counter-swing against the
# same-side leg (+pi); distal segments lag proximal ones.
SWING_PHASE: dict[str, float] = {
    "upper_arm": math.pi,
    "lower_arm": math.pi + 0.3,
    "hand": math.pi + 0.6,
    "upper_leg": 0.0,
    "lower_leg": 0.3,
    "foot": 0.6,
}

_JITTER_RANGE = 0.15  # rad, per-limb-pair phase perturbation
_BOB_FRACTION = 0.02  # vertical bob amplitude as a fraction of height

# Max credible inter-sample speed for any body segment.
SPEED_SANITY_BOUND = 10.0


def _limb_type(segment: SegmentId) -> str | None:
    """Limb type key ('foot', 'hand', ...) or None for base segments."""
    name = segment.value
    for side in ("left_", "right_"):
        if name.startswith(side):
            return name[len(side):]
    return None


@dataclass(frozen=True)
class GaitConfig:
    """Parameters of the analytic walking model.

    walk_speed is the bulk translation speed of the subject relative to
    the radar. cycle_duration defaults to 1.2 s scaled by 1.4/walk_speed
    so slower walkers take longer strides.
    """

    subject_height: float
    walk_speed: float
    sample_rate: float
    start_position: np.ndarray = field(
        default_factory=lambda: np.zeros(3)
    )
    heading: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0])
    )
    cycle_duration: float | None = None
    random_seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "start_position", np.asarray(self.start_position, dtype=float)
        )
        object.__setattr__(self, "heading", np.asarray(self.heading, dtype=float))
        if not 1.0 <= self.subject_height <= 2.2:
            raise ConfigurationError(
                f"subject_height must be in [1.0, 2.2] m, got {self.subject_height}"
            )
        if self.walk_speed <= 0:
            raise ConfigurationError(f"walk_speed must be positive, got {self.walk_speed}")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.start_position.shape != (3,) or not np.all(np.isfinite(self.start_position)):
            raise ConfigurationError("start_position must be a finite 3-vector")
        if self.heading.shape != (3,):
            raise ConfigurationError("heading must be a 3-vector")
        if abs(float(np.linalg.norm(self.heading)) - 1.0) > 1e-9:
            raise ConfigurationError("heading must have unit norm (within 1e-9)")
        if self.cycle_duration is not None and self.cycle_duration <= 0:
            raise ConfigurationError("cycle_duration must be positive when given")

    @property
    def effective_cycle_duration(self) -> float:
        if self.cycle_duration is not None:
            return self.cycle_duration
        return 1.2 * (1.4 / self.walk_speed)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled 3D center positions of all 16 segments.

    data has shape (16, n, 3) in SEGMENT_ORDER; times has shape (n,)
    with a uniform step of 1/sample_rate.
    """

    times: np.ndarray
    data: np.ndarray
    sample_rate: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)
        if times.ndim != 1 or times.size < 1:
            raise DataContractError("times must be a non-empty 1D array")
        if data.shape != (N_SEGMENTS, times.size, 3):
            raise DataContractError(
                f"data must have shape ({N_SEGMENTS}, {times.size}, 3), got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise DataContractError("positions must be finite")
        if self.sample_rate <= 0:
            raise DataContractError("sample_rate must be positive")
        if times.size >= 2:
            dt = np.diff(times)
            expected = 1.0 / self.sample_rate
            if np.any(np.abs(dt - expected) > 1e-9 * max(1.0, expected)):
                raise DataContractError("time base must be uniform at 1/sample_rate")
            step_speed = (
                np.linalg.norm(np.diff(data, axis=1), axis=2) / expected
            )
            worst = float(step_speed.max())
            if worst > SPEED_SANITY_BOUND * (1 + 1e-9):
                raise DataContractError(
                    f"inter-sample speed {worst:.3f} m/s exceeds the "
                    f"{SPEED_SANITY_BOUND} m/s sanity bound"
                )

    @classmethod
    def from_segments(
        cls,
        positions: dict[SegmentId, np.ndarray],
        times: np.ndarray,
        sample_rate: float,
    ) -> "Trajectory":
        missing = [s.value for s in SEGMENT_ORDER if s not in positions]
        if missing:
            raise DataContractError(f"missing segments: {', '.join(missing)}")
        times = np.asarray(times, dtype=float)
        data = np.empty((N_SEGMENTS, times.size, 3))
        for seg, idx in SEGMENT_INDEX.items():
            arr = np.asarray(positions[seg], dtype=float)
            if arr.shape != (times.size, 3):
                raise DataContractError(
                    f"segment {seg.value} series has shape {arr.shape}, "
                    f"expected ({times.size}, 3)"
                )
            data[idx] = arr
        return cls(times=times, data=data, sample_rate=sample_rate)

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def position_of(self, segment: SegmentId) -> np.ndarray:
        """(n, 3) view of one segment's position series."""
        return self.data[SEGMENT_INDEX[segment]]

    def as_dict(self) -> dict[SegmentId, np.ndarray]:
        return {seg: self.data[i] for seg, i in SEGMENT_INDEX.items()}

    def interpolate(self, at_times: np.ndarray) -> np.ndarray:
        """Linearly interpolated positions, shape (16, len(at_times), 3).

        All query times must lie within the trajectory span.
        """
        at_times = np.atleast_1d(np.asarray(at_times, dtype=float))
        t0, t1 = self.span
        if at_times.min() < t0 - 1e-12 or at_times.max() > t1 + 1e-12:
            raise DataContractError(
                f"query times [{at_times.min():.6f}, {at_times.max():.6f}] "
                f"outside trajectory span [{t0:.6f}, {t1:.6f}]"
            )
        if self.n_samples == 1:
            return np.repeat(self.data, at_times.size, axis=1)
        idx = np.searchsorted(self.times, at_times, side="right") - 1
        idx = np.clip(idx, 0, self.n_samples - 2)
        t_lo = self.times[idx]
        w = (at_times - t_lo) * self.sample_rate
        w = np.clip(w, 0.0, 1.0)[None, :, None]
        return self.data[:, idx, :] * (1.0 - w) + self.data[:, idx + 1, :] * w


def _lateral_axis(heading: np.ndarray) -> np.ndarray:
    """Unit vector pointing to the subject's left."""
    up = np.array([0.0, 0.0, 1.0])
    lateral = np.cross(up, heading)
    norm = float(np.linalg.norm(lateral))
    if norm < 1e-9:
        # Vertical heading: any horizontal direction works.
        return np.array([0.0, 1.0, 0.0])
    return lateral / norm


def generate_gait(config: GaitConfig, duration: float) -> Trajectory:
    """Synthesize segment trajectories for `duration` seconds of walking.

    The trunk translates at walk_speed along the heading. Limb segments
    swing sinusoidally along the heading; per-pair phase jitter (seeded)
    keeps runs distinguishable while preserving exact left/right
    half-cycle symmetry and the calibrated peak speeds.
    """
    cycle = config.effective_cycle_duration
    if duration < cycle:
        raise ConfigurationError(
            f"duration {duration} s is shorter than one gait cycle ({cycle:.3f} s)"
        )
    n = int(math.floor(duration * config.sample_rate + 1e-9)) + 1
    times = np.arange(n) / config.sample_rate

    omega = 2.0 * math.pi / cycle
    heading = config.heading
    lateral = _lateral_axis(heading)
    vertical = np.array([0.0, 0.0, 1.0])
    height = config.subject_height

    rng = np.random.default_rng(config.random_seed)
    jitter = {
        limb: float(rng.uniform(-_JITTER_RANGE, _JITTER_RANGE))
        for limb in ("upper_arm", "lower_arm", "hand", "upper_leg", "lower_leg", "foot")
    }

    trunk = config.start_position[None, :] + config.walk_speed * times[:, None] * heading
    bob = _BOB_FRACTION * height * np.sin(2.0 * omega * times)

    data = np.empty((N_SEGMENTS, n, 3))
    for seg, idx in SEGMENT_INDEX.items():
        f_fwd, f_lat, f_vert = SEGMENT_OFFSET_FRACTIONS[seg]
        offset = height * (f_fwd * heading + f_lat * lateral + f_vert * vertical)
        pos = trunk + offset[None, :]
        limb = _limb_type(seg)
        if limb is None:
            pos = pos + bob[:, None] * vertical
        else:
            phase = SWING_PHASE[limb] + jitter[limb]
            if seg.value.startswith("right_"):
                phase += math.pi
            amplitude = SWING_MULTIPLIER[limb] * config.walk_speed / omega
            swing = amplitude * np.sin(omega * times + phase)
            pos = pos + swing[:, None] * heading
        data[idx] = pos

    return Trajectory(times=times, data=data, sample_rate=config.sample_rate)


def segment_velocity(traj: Trajectory, segment: SegmentId) -> np.ndarray:
    """Finite-difference velocity series of one segment, shape (n, 3).

    Central differences in the interior, one-sided at the endpoints
    (second order when at least three samples exist).
    """
    if traj.n_samples < 2:
        raise DataContractError("trajectory must have at least 2 samples")
    pos = traj.position_of(segment)
    dt = 1.0 / traj.sample_rate
    edge_order = 2 if traj.n_samples >= 3 else 1
    return np.gradient(pos, dt, axis=0, edge_order=edge_order)


TRAJECTORY_CSV_COLUMNS = ["time_s"] + [
    f"{seg.value}_{axis}" for seg in SEGMENT_ORDER for axis in "xyz"
]


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Persist a trajectory as `time_s,<segment>_x,...` with exact floats."""
    lines = [",".join(TRAJECTORY_CSV_COLUMNS)]
    for i, t in enumerate(traj.times):
        row = [repr(float(t))]
        for s in range(len(SEGMENT_ORDER)):
            row.extend(repr(float(v)) for v in traj.data[s, i])
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Inverse of write_trajectory_csv; the time base infers the rate."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",") != TRAJECTORY_CSV_COLUMNS:
        raise DataContractError("unexpected trajectory CSV header")
    if len(lines) < 3:
        raise DataContractError("trajectory CSV needs at least 2 samples")
    rows = []
    for ln_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(TRAJECTORY_CSV_COLUMNS):
            raise DataContractError(f"line {ln_no}: wrong field count")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DataContractError(f"line {ln_no}: {exc}") from exc
    table = np.asarray(rows)
    times = table[:, 0]
    data = table[:, 1:].reshape(times.size, len(SEGMENT_ORDER), 3)
    data = np.moveaxis(data, 0, 1)
    rate = 1.0 / (times[1] - times[0])
    return Trajectory(times=times, data=data, sample_rate=rate)
