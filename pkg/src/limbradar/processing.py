"""Time-frequency and range-Doppler processing with power removal.

The chain used ahead of feature extraction is: range-Doppler map (FFT
across chirps per range bin) -> per-map normalization to [0, 1] ->
gamma transform -> Otsu threshold mask. Spectrograms (Gaussian-window
STFT) serve the time-velocity view of the same data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataContractError
from .radar import ChirpFrame, doppler_to_velocity

# Magnitude-squared clamp applied before the dB conversion, i.e. a
# -120 dB floor for empty bins.
POWER_FLOOR = 1e-12

DEFAULT_GAMMA = 0.65
DEFAULT_HISTOGRAM_BINS = 256
DEFAULT_STFT_WINDOW = 256


def power_db(power: np.ndarray) -> np.ndarray:
    """10*log10 with the floor clamp."""
    return 10.0 * np.log10(np.maximum(power, POWER_FLOOR))


def gaussian_window(length: int, sigma: float) -> np.ndarray:
    if length < 1 or sigma <= 0:
        raise ConfigurationError("window length and sigma must be positive")
    i = np.arange(length)
    center = (length - 1) / 2.0
    return np.exp(-0.5 * ((i - center) / sigma) ** 2)


@dataclass(frozen=True)
class Spectrogram:
    """Time-frequency intensity in dB; rows are time slices."""

    values: np.ndarray  # (n_times, n_freqs)
    time_axis: np.ndarray  # s
    freq_axis: np.ndarray  # Hz, zero-centered
    velocity_axis: np.ndarray | None  # m/s when a carrier is known
    window_len: int
    hop: int

    def __post_init__(self):
        if self.values.shape != (self.time_axis.size, self.freq_axis.size):
            raise DataContractError("spectrogram axes do not match the matrix")
        if not np.all(np.isfinite(self.values)):
            raise DataContractError("spectrogram entries must be finite")


@dataclass(frozen=True)
class RangeDopplerMap:
    """Range x Doppler intensity in dB for one frame; DC at center bin."""

    values: np.ndarray  # (N_s, N_p)
    frame_time: float
    range_axis: np.ndarray  # m
    velocity_axis: np.ndarray  # m/s, zero-centered
    doppler_axis: np.ndarray  # Hz, zero-centered

    def __post_init__(self):
        n_s, n_p = self.values.shape
        if self.range_axis.size != n_s or self.velocity_axis.size != n_p:
            raise DataContractError("map axes do not match the matrix")
        if self.velocity_axis[n_p // 2] != 0.0:
            raise DataContractError("Doppler axis must be zero-centered")


@dataclass(frozen=True)
class IntensityGrid:
    """Real matrix normalized to [0, 1] with a provenance tag."""

    values: np.ndarray
    source: str  # "spectrogram" | "rd-map"

    def __post_init__(self):
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise DataContractError("intensity values must lie in [0, 1]")


@dataclass(frozen=True)
class ThresholdMask:
    mask: np.ndarray  # bool
    threshold: float

    def __post_init__(self):
        if self.mask.dtype != np.bool_:
            raise DataContractError("mask must be boolean")
        if not 0.0 <= self.threshold <= 1.0:
            raise DataContractError("threshold must lie in [0, 1]")


def stft_spectrogram(
    x: np.ndarray,
    sample_rate: float,
    window_len: int = DEFAULT_STFT_WINDOW,
    hop: int | None = None,
    sigma: float | None = None,
    carrier_frequency: float | None = None,
) -> Spectrogram:
    """Gaussian-window STFT, 10*log10 magnitude squared.

    Columns are centered every `hop` samples (default window_len/8) with
    zero-padded edges; the Gaussian standard deviation defaults to
    window_len/6 samples. The frequency axis is zero-centered.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise DataContractError("signal must be a non-empty 1D array")
    if window_len > x.size:
        raise ConfigurationError(
            f"window_len {window_len} exceeds signal length {x.size}"
        )
    if hop is None:
        hop = max(1, window_len // 8)
    if hop < 1:
        raise ConfigurationError("hop must be at least 1")
    if sigma is None:
        sigma = window_len / 6.0
    window = gaussian_window(window_len, sigma)

    half = window_len // 2
    padded = np.concatenate(
        [np.zeros(half, dtype=complex), x.astype(complex), np.zeros(window_len, dtype=complex)]
    )
    centers = np.arange(0, x.size, hop)
    segments = np.stack([padded[c : c + window_len] for c in centers])
    spectra = np.fft.fftshift(np.fft.fft(segments * window[None, :], axis=1), axes=1)
    values = power_db(np.abs(spectra) ** 2)

    freq_axis = np.fft.fftshift(np.fft.fftfreq(window_len, d=1.0 / sample_rate))
    velocity_axis = (
        doppler_to_velocity(freq_axis, carrier_frequency)
        if carrier_frequency is not None
        else None
    )
    return Spectrogram(
        values=values,
        time_axis=centers / sample_rate,
        freq_axis=freq_axis,
        velocity_axis=velocity_axis,
        window_len=window_len,
        hop=hop,
    )


def range_doppler_map(frame: ChirpFrame, window: str | None = None) -> RangeDopplerMap:
    """Doppler FFT across chirps per range bin, shifted and in dB.

    `window` may be "hann" to taper chirps before the FFT (lower Doppler
    sidelobes at slightly wider mainlobes); default is no taper.
    """
    data = frame.data
    if window is None:
        tapered = data
    elif window == "hann":
        tapered = data * np.hanning(frame.config.chirps_per_frame)[None, :]
    else:
        raise ConfigurationError(f"unknown Doppler window {window!r}")
    spectra = np.fft.fftshift(np.fft.fft(tapered, axis=1), axes=1)
    values = power_db(np.abs(spectra) ** 2)
    return RangeDopplerMap(
        values=values,
        frame_time=frame.frame_start,
        range_axis=frame.config.range_axis,
        velocity_axis=frame.config.velocity_axis,
        doppler_axis=frame.config.doppler_axis,
    )


def normalize_to_unit(values: np.ndarray, source: str = "rd-map") -> IntensityGrid:
    """Affine map of [min, max] onto [0, 1]; constant input maps to zeros."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DataContractError("grid values must be finite")
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return IntensityGrid(values=np.zeros_like(values), source=source)
    return IntensityGrid(values=(values - lo) / (hi - lo), source=source)


def gamma_transform(grid: IntensityGrid, gamma: float = DEFAULT_GAMMA) -> IntensityGrid:
    """Elementwise power-law remap S_out = S_in^gamma."""
    if gamma <= 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    return IntensityGrid(values=grid.values**gamma, source=grid.source)


def otsu_threshold(
    grid: IntensityGrid, histogram_bins: int = DEFAULT_HISTOGRAM_BINS
) -> ThresholdMask:
    """Threshold minimizing the weighted within-class variance.

    The histogram spans [0, 1]; candidate thresholds are interior bin
    boundaries; ties pick the smallest. The mask is true strictly above
    the threshold. A single-valued grid yields an all-false mask with
    the threshold at that value.
    """
    if histogram_bins < 2:
        raise ConfigurationError("histogram_bins must be at least 2")
    values = grid.values
    flat = values.ravel()
    if flat.size == 0:
        raise DataContractError("cannot threshold an empty grid")
    first = flat[0]
    if np.all(flat == first):
        return ThresholdMask(mask=np.zeros_like(values, dtype=bool), threshold=float(first))

    counts, edges = np.histogram(flat, bins=histogram_bins, range=(0.0, 1.0))
    counts = counts.astype(float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = counts.sum()

    w1 = np.cumsum(counts)[:-1]  # weight below boundary k, k = 1..bins-1
    w2 = total - w1
    m1 = np.cumsum(counts * centers)[:-1]
    m2 = m1[-1] + counts[-1] * centers[-1] - m1
    s1 = np.cumsum(counts * centers**2)[:-1]
    s2 = s1[-1] + counts[-1] * centers[-1] ** 2 - s1

    with np.errstate(invalid="ignore", divide="ignore"):
        var1 = np.where(w1 > 0, s1 / np.maximum(w1, 1) - (m1 / np.maximum(w1, 1)) ** 2, 0.0)
        var2 = np.where(w2 > 0, s2 / np.maximum(w2, 1) - (m2 / np.maximum(w2, 1)) ** 2, 0.0)
    objective = (w1 / total) * var1 + (w2 / total) * var2
    best = int(np.argmin(objective))  # first minimum = smallest threshold
    threshold = float(edges[best + 1])
    return ThresholdMask(mask=values > threshold, threshold=threshold)


def mean_free_range(samples):
    """Subtract the mean range of one time instant from each range value.

    samples: sequence of (velocity, range) pairs; returns a list of
    (velocity, mean-free range) pairs.
    """
    samples = list(samples)
    if not samples:
        raise DataContractError("mean_free_range requires at least one sample")
    velocities = np.array([s[0] for s in samples], dtype=float)
    ranges = np.array([s[1] for s in samples], dtype=float)
    centered = ranges - ranges.mean()
    return list(zip(velocities.tolist(), centered.tolist()))


def _write_matrix(values: np.ndarray, path: Path, meta: dict) -> None:
    values.astype("<f4").tofile(path)
    path.with_suffix(".meta").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def save_map(rd_map: RangeDopplerMap, path) -> None:
    """Binary matrix (little-endian float32, row-major) plus JSON sidecar."""
    path = Path(path)
    meta = {
        "kind": "rd-map",
        "rows": int(rd_map.values.shape[0]),
        "cols": int(rd_map.values.shape[1]),
        "frame_time": rd_map.frame_time,
        "range_step": float(rd_map.range_axis[1] - rd_map.range_axis[0]),
        "velocity_step": float(rd_map.velocity_axis[1] - rd_map.velocity_axis[0]),
    }
    _write_matrix(rd_map.values, path, meta)


def save_mask(mask: ThresholdMask, path) -> None:
    path = Path(path)
    meta = {
        "kind": "mask",
        "rows": int(mask.mask.shape[0]),
        "cols": int(mask.mask.shape[1]),
        "threshold": mask.threshold,
    }
    _write_matrix(mask.mask.astype(float), path, meta)


def map_to_csv(rd_map: RangeDopplerMap, path) -> None:
    """`range,velocity,value` triplets, row-major."""
    lines = ["range_m,velocity_mps,value_db"]
    n_s, n_p = rd_map.values.shape
    for i in range(n_s):
        r = repr(float(rd_map.range_axis[i]))
        for j in range(n_p):
            lines.append(
                f"{r},{float(rd_map.velocity_axis[j])!r},{float(rd_map.values[i, j])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def spectrogram_to_csv(spec: Spectrogram, path) -> None:
    """`t,f,value` triplets, row-major."""
    lines = ["t_s,f_hz,value_db"]
    n_t, n_f = spec.values.shape
    for i in range(n_t):
        t = repr(float(spec.time_axis[i]))
        for j in range(n_f):
            lines.append(f"{t},{float(spec.freq_axis[j])!r},{float(spec.values[i, j])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
