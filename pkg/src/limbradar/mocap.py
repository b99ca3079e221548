"""Motion-capture marker CSV ingestion and conversion to trajectories.

File format: a header row `time,<marker>_x,<marker>_y,<marker>_z,...`
followed by one row per sample. Units are seconds and meters, decimal
point `.`, UTF-8; lines starting with `#` are comments. All 17 markers
of MARKER_LABELS must be present (column order is free).

The 17 markers map onto the 16 body segments one-to-one except for the
hip, which is derived as the midpoint of the two pelvis markers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .body import SegmentId
from .errors import ConfigurationError, DataContractError, MocapFormatError
from .gait import Trajectory

MARKER_LABELS: tuple[str, ...] = (
    "head",
    "neck",
    "torso",
    "pelvis_left",
    "pelvis_right",
    "left_upper_arm",
    "left_lower_arm",
    "left_hand",
    "right_upper_arm",
    "right_lower_arm",
    "right_hand",
    "left_upper_leg",
    "left_lower_leg",
    "left_foot",
    "right_upper_leg",
    "right_lower_leg",
    "right_foot",
)

# Segments covered by a single marker of the same name. The hip segment
# is handled separately from the two pelvis markers.
_DIRECT_SEGMENTS: tuple[SegmentId, ...] = tuple(
    seg for seg in SegmentId if seg is not SegmentId.HIP
)

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class MocapRecording:
    """Parsed marker file: times (n,), per-marker (n, 3) positions."""

    times: np.ndarray
    positions: dict[str, np.ndarray]
    native_rate: float

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])


def _parse_header(line: str) -> dict[str, dict[str, int]]:
    """Map marker -> axis -> column index; validates the marker set."""
    columns = [c.strip() for c in line.split(",")]
    if not columns or columns[0] != "time":
        raise MocapFormatError("header must start with a 'time' column")
    layout: dict[str, dict[str, int]] = {}
    for i, name in enumerate(columns[1:], start=1):
        if "_" not in name:
            raise MocapFormatError(f"malformed column name {name!r}")
        marker, axis = name.rsplit("_", 1)
        if axis not in _AXES:
            raise MocapFormatError(f"column {name!r} must end in _x, _y, or _z")
        if marker not in MARKER_LABELS:
            raise MocapFormatError(f"unknown marker {marker!r}")
        slot = layout.setdefault(marker, {})
        if axis in slot:
            raise MocapFormatError(f"duplicate column {name!r}")
        slot[axis] = i
    missing = [m for m in MARKER_LABELS if m not in layout]
    if missing:
        raise MocapFormatError(f"missing marker: {', '.join(missing)}")
    for marker, slot in layout.items():
        absent = [a for a in _AXES if a not in slot]
        if absent:
            raise MocapFormatError(
                f"missing marker: {marker} (no _{'/_'.join(absent)} column)"
            )
    return layout


def load_mocap(path) -> MocapRecording:
    """Parse a 17-marker CSV file into a MocapRecording.

    Raises MocapFormatError with a distinct message for missing markers,
    non-monotonic timestamps, and malformed rows.
    """
    path = Path(path)
    layout: dict[str, dict[str, int]] | None = None
    n_columns = 0
    times: list[float] = []
    rows: list[list[float]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if layout is None:
                layout = _parse_header(line)
                n_columns = 1 + 3 * len(MARKER_LABELS)
                continue
            parts = line.split(",")
            if len(parts) != n_columns:
                raise MocapFormatError(
                    f"parse error at line {lineno}: expected {n_columns} "
                    f"columns, got {len(parts)}"
                )
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise MocapFormatError(f"parse error at line {lineno}: {exc}") from exc
            if times and values[0] <= times[-1]:
                raise MocapFormatError(
                    f"non-monotonic time at line {lineno}: "
                    f"{values[0]!r} follows {times[-1]!r}"
                )
            times.append(values[0])
            rows.append(values)
    if layout is None:
        raise MocapFormatError("file contains no header row")
    if len(rows) < 2:
        raise MocapFormatError("file must contain at least 2 data rows")

    table = np.asarray(rows)
    time_arr = table[:, 0]
    positions = {
        marker: np.column_stack([table[:, layout[marker][a]] for a in _AXES])
        for marker in MARKER_LABELS
    }
    native_rate = (len(rows) - 1) / float(time_arr[-1] - time_arr[0])
    return MocapRecording(times=time_arr, positions=positions, native_rate=native_rate)


def mocap_to_trajectory(rec: MocapRecording, target_rate: float) -> Trajectory:
    """Resample a recording to a uniform rate and map markers to segments.

    Linear interpolation on each coordinate; the hip segment is the
    midpoint of the pelvis_left and pelvis_right markers.
    """
    if target_rate <= 0:
        raise ConfigurationError(f"target_rate must be positive, got {target_rate}")
    t0, t1 = rec.span
    step = 1.0 / target_rate
    if t1 - t0 < step:
        raise DataContractError(
            f"recording span {t1 - t0:.6f} s is shorter than one output step ({step:.6f} s)"
        )
    n_out = int(np.floor((t1 - t0) * target_rate + 1e-9)) + 1
    out_times = t0 + np.arange(n_out) / target_rate

    def resample(series: np.ndarray) -> np.ndarray:
        return np.column_stack(
            [np.interp(out_times, rec.times, series[:, k]) for k in range(3)]
        )

    resampled = {m: resample(rec.positions[m]) for m in MARKER_LABELS}
    segments = {seg: resampled[seg.value] for seg in _DIRECT_SEGMENTS}
    segments[SegmentId.HIP] = 0.5 * (
        resampled["pelvis_left"] + resampled["pelvis_right"]
    )
    return Trajectory.from_segments(segments, out_times, target_rate)
