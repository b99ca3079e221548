"""Per-class velocity envelopes, outlier removal, and streaming decomposition.

For every frame, each limb class present contributes its maximum and
minimum micro-Doppler velocity. The resulting per-class time series are
cleaned with an order-9 median filter. A centered order-9 window needs 4
future frames, so the streaming decomposer buffers exactly 4 frames: the
filtered envelope of frame k is emitted once frame k+4 has arrived, and
the last 4 frames flush at end of stream with edge replication.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .body import CLASS_ORDER, LimbClass
from .errors import ConfigurationError, DataContractError
from .features import FeatureSample, extract_features
from .processing import (
    DEFAULT_GAMMA,
    DEFAULT_HISTOGRAM_BINS,
    gamma_transform,
    normalize_to_unit,
    otsu_threshold,
    range_doppler_map,
)
from .radar import ChirpFrame
from .tree import DecisionTree


def class_envelopes(samples: list[FeatureSample]) -> dict[LimbClass, tuple[float, float]]:
    """Per-class (max velocity, min velocity) of one frame's samples.

    Classes without samples are simply absent from the result.
    """
    out: dict[LimbClass, tuple[float, float]] = {}
    for sample in samples:
        if sample.label is None:
            raise DataContractError("envelope extraction needs labeled samples")
        v = sample.velocity
        if sample.label in out:
            hi, lo = out[sample.label]
            out[sample.label] = (max(hi, v), min(lo, v))
        else:
            out[sample.label] = (v, v)
    return out


def median_filter(series: np.ndarray, order: int = 9) -> np.ndarray:
    """Sliding-window median with edge replication at the boundaries.

    NaN entries mark missing frames: they are linearly interpolated
    before filtering and restored to NaN afterwards, so gaps do not
    poison neighboring medians but stay gaps.
    """
    if order < 1 or order % 2 == 0:
        raise ConfigurationError(f"filter order must be odd and positive, got {order}")
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise DataContractError("median_filter expects a 1D series")
    if x.size == 0:
        return x.copy()
    missing = np.isnan(x)
    if missing.all():
        return x.copy()
    if missing.any():
        idx = np.arange(x.size)
        x = np.interp(idx, idx[~missing], x[~missing])
    half = order // 2
    padded = np.pad(x, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, order)
    out = np.median(windows, axis=1)
    out[missing] = np.nan
    return out


@dataclass(frozen=True)
class EnvelopeTrack:
    """Per-class envelope series over frames; NaN marks absent classes."""

    frame_indices: np.ndarray  # (n,)
    times: np.ndarray  # (n,) s
    env_max: np.ndarray  # (4, n) in CLASS_ORDER
    env_min: np.ndarray  # (4, n)

    def __post_init__(self):
        n = self.frame_indices.size
        if self.times.size != n or self.env_max.shape != (len(CLASS_ORDER), n):
            raise DataContractError("envelope track arrays are inconsistent")
        if self.env_min.shape != self.env_max.shape:
            raise DataContractError("envelope track arrays are inconsistent")
        both = ~(np.isnan(self.env_max) | np.isnan(self.env_min))
        if np.any(self.env_max[both] < self.env_min[both]):
            raise DataContractError("max envelope below min envelope")

    def series(self, limb_class: LimbClass, which: str = "max") -> np.ndarray:
        arr = self.env_max if which == "max" else self.env_min
        return arr[CLASS_ORDER.index(limb_class)]


@dataclass(frozen=True)
class EnvelopeEmission:
    """One streaming output: raw at arrival, filtered 4 frames later."""

    frame_index: int
    time_s: float
    filtered: bool
    envelopes: dict[LimbClass, tuple[float, float]]


@dataclass
class StreamingDecomposer:
    """Frame-by-frame pipeline: map, power removal, classify, envelope, filter.

    push() returns the emissions unlocked by that frame (its own raw
    envelopes, plus the filtered envelopes of the frame `latency` steps
    back); finish() flushes the tail. Emission of filtered frame k
    reproduces an offline median filter applied to the series truncated
    at k+latency, evaluated at k.
    """

    tree: DecisionTree
    gamma: float = DEFAULT_GAMMA
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS
    filter_order: int = 9
    doppler_window: str | None = "hann"

    _times: list[float] = field(default_factory=list, repr=False)
    _env_max: list[np.ndarray] = field(default_factory=list, repr=False)
    _env_min: list[np.ndarray] = field(default_factory=list, repr=False)
    _closed: bool = field(default=False, repr=False)
    _push_seconds: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.filter_order < 1 or self.filter_order % 2 == 0:
            raise ConfigurationError("filter order must be odd and positive")

    @property
    def latency(self) -> int:
        return self.filter_order // 2

    @property
    def n_frames(self) -> int:
        return len(self._times)

    @property
    def push_seconds(self) -> list[float]:
        """Wall-clock processing time of each push, for budget reports."""
        return list(self._push_seconds)

    def _frame_envelopes(self, frame: ChirpFrame, index: int):
        rd = range_doppler_map(frame, window=self.doppler_window)
        grid = normalize_to_unit(rd.values)
        mask = otsu_threshold(gamma_transform(grid, self.gamma), self.histogram_bins)
        samples = extract_features(mask, rd, index)
        if samples:
            x = np.array([[s.velocity, s.mean_free_range] for s in samples])
            predicted = self.tree.predict_batch(x)
            labeled = [
                FeatureSample(
                    frame_index=s.frame_index,
                    velocity=s.velocity,
                    mean_free_range=s.mean_free_range,
                    label=CLASS_ORDER[int(p)],
                    cell=s.cell,
                )
                for s, p in zip(samples, predicted)
            ]
        else:
            labeled = []
        return class_envelopes(labeled)

    def _emission(self, index: int, filtered: bool) -> EnvelopeEmission:
        if not filtered:
            hi = self._env_max[index]
            lo = self._env_min[index]
        else:
            hi = np.empty(len(CLASS_ORDER))
            lo = np.empty(len(CLASS_ORDER))
            max_series = np.array(self._env_max)
            min_series = np.array(self._env_min)
            for c in range(len(CLASS_ORDER)):
                hi[c] = median_filter(max_series[:, c], self.filter_order)[index]
                lo[c] = median_filter(min_series[:, c], self.filter_order)[index]
        envelopes = {
            cls: (float(hi[c]), float(lo[c]))
            for c, cls in enumerate(CLASS_ORDER)
            if not (np.isnan(hi[c]) or np.isnan(lo[c]))
        }
        return EnvelopeEmission(
            frame_index=index,
            time_s=self._times[index],
            filtered=filtered,
            envelopes=envelopes,
        )

    def push(self, frame: ChirpFrame) -> list[EnvelopeEmission]:
        if self._closed:
            raise DataContractError("stream already finished")
        started = time.perf_counter()
        index = self.n_frames
        try:
            envelopes = self._frame_envelopes(frame, index)
        except Exception as exc:
            raise type(exc)(f"frame {index}: {exc}") from exc
        hi = np.full(len(CLASS_ORDER), np.nan)
        lo = np.full(len(CLASS_ORDER), np.nan)
        for cls, (v_max, v_min) in envelopes.items():
            hi[CLASS_ORDER.index(cls)] = v_max
            lo[CLASS_ORDER.index(cls)] = v_min
        self._times.append(frame.frame_start)
        self._env_max.append(hi)
        self._env_min.append(lo)

        emissions = [self._emission(index, filtered=False)]
        ready = index - self.latency
        if ready >= 0:
            emissions.append(self._emission(ready, filtered=True))
        self._push_seconds.append(time.perf_counter() - started)
        return emissions

    def finish(self) -> list[EnvelopeEmission]:
        """Flush the filtered envelopes still held in the buffer."""
        if self._closed:
            return []
        self._closed = True
        start = max(0, self.n_frames - self.latency)
        return [self._emission(k, filtered=True) for k in range(start, self.n_frames)]

    def track(self, filtered: bool = False) -> EnvelopeTrack:
        """Raw or fully-filtered envelope series over all pushed frames."""
        max_series = np.array(self._env_max).T if self._env_max else np.empty((4, 0))
        min_series = np.array(self._env_min).T if self._env_min else np.empty((4, 0))
        if filtered and max_series.size:
            max_series = np.vstack(
                [median_filter(row, self.filter_order) for row in max_series]
            )
            min_series = np.vstack(
                [median_filter(row, self.filter_order) for row in min_series]
            )
        return EnvelopeTrack(
            frame_indices=np.arange(self.n_frames),
            times=np.asarray(self._times),
            env_max=max_series,
            env_min=min_series,
        )


ENVELOPE_CSV_HEADER = "frame,time_s,class,env_max_mps,env_min_mps,filtered"


def write_envelopes_csv(emissions: list[EnvelopeEmission], path) -> None:
    """One row per (emission, class), in emission order.

    Within an emission, classes appear in canonical class order. repr()
    keeps the floats round-trip exact.
    """
    lines = [ENVELOPE_CSV_HEADER]
    for emission in emissions:
        for cls in CLASS_ORDER:
            if cls not in emission.envelopes:
                continue
            v_max, v_min = emission.envelopes[cls]
            lines.append(
                f"{emission.frame_index},{emission.time_s!r},{cls.value},"
                f"{v_max!r},{v_min!r},{int(emission.filtered)}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_envelopes_csv(path) -> list[EnvelopeEmission]:
    """Inverse of write_envelopes_csv; rebuilds one emission per
    contiguous (frame, filtered) run of rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != ENVELOPE_CSV_HEADER:
        raise DataContractError("bad envelope CSV header")
    emissions: list[EnvelopeEmission] = []
    by_value = {cls.value: cls for cls in CLASS_ORDER}
    for ln_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise DataContractError(f"line {ln_no}: expected 6 fields")
        try:
            frame = int(parts[0])
            time_s = float(parts[1])
            cls = by_value[parts[2]]
            v_max = float(parts[3])
            v_min = float(parts[4])
            filtered = bool(int(parts[5]))
        except (ValueError, KeyError) as exc:
            raise DataContractError(f"line {ln_no}: {exc}") from exc
        last = emissions[-1] if emissions else None
        if last is None or last.frame_index != frame or last.filtered is not filtered:
            emissions.append(
                EnvelopeEmission(
                    frame_index=frame,
                    time_s=time_s,
                    filtered=filtered,
                    envelopes={cls: (v_max, v_min)},
                )
            )
        else:
            last.envelopes[cls] = (v_max, v_min)
    return emissions


def decompose_stream(frames, tree: DecisionTree, **kwargs):
    """Run the streaming pipeline over an iterable of frames.

    Yields EnvelopeEmission objects in emission order: the raw envelope
    of each frame as it arrives, each filtered envelope exactly
    `filter_order // 2` frames later, and the buffered tail at the end.
    """
    decomposer = StreamingDecomposer(tree=tree, **kwargs)
    for frame in frames:
        yield from decomposer.push(frame)
    yield from decomposer.finish()
