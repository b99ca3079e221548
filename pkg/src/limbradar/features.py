"""Feature extraction from thresholded maps, labeling, and dataset handling.

A feature sample is one detected range-Doppler cell reduced to the pair
(velocity, mean-free range). Mean removal happens per frame over the
detected cells, which makes the range coordinate relative and therefore
independent of where the subject happens to be. Ground-truth labels are
assigned from per-segment maps: the cell belongs to the limb class of
the segment contributing the most magnitude at that cell.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .body import CLASS_ORDER, SEGMENT_CLASS, SEGMENT_ORDER, LimbClass, SegmentId
from .errors import DataContractError
from .processing import RangeDopplerMap, ThresholdMask, mean_free_range

FEATURE_CSV_HEADER = ["frame", "velocity_mps", "meanfree_range_m", "label"]


@dataclass(frozen=True)
class FeatureSample:
    """One detected cell: micro-Doppler velocity and mean-free range.

    `cell` keeps the (range bin, Doppler bin) origin for labeling; it is
    not part of the persisted schema.
    """

    frame_index: int
    velocity: float
    mean_free_range: float
    label: LimbClass | None = None
    cell: tuple[int, int] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.velocity) and np.isfinite(self.mean_free_range)):
            raise DataContractError("feature values must be finite")


def extract_features(
    mask: ThresholdMask, rd_map: RangeDopplerMap, frame_index: int
) -> list[FeatureSample]:
    """One unlabeled sample per detected cell, row-major cell order."""
    if mask.mask.shape != rd_map.values.shape:
        raise DataContractError(
            f"mask shape {mask.mask.shape} does not match map {rd_map.values.shape}"
        )
    cells = np.argwhere(mask.mask)
    if cells.size == 0:
        return []
    velocities = rd_map.velocity_axis[cells[:, 1]]
    ranges = rd_map.range_axis[cells[:, 0]]
    centered = mean_free_range(list(zip(velocities, ranges)))
    return [
        FeatureSample(
            frame_index=frame_index,
            velocity=float(v),
            mean_free_range=float(r),
            cell=(int(row), int(col)),
        )
        for (v, r), (row, col) in zip(centered, cells)
    ]


def label_features(
    samples: list[FeatureSample],
    segment_maps: dict[SegmentId, RangeDopplerMap],
) -> list[FeatureSample]:
    """Attach the limb class of the dominant segment at each sample's cell.

    Ties pick the segment that comes first in SEGMENT_ORDER, so the
    result does not depend on the dict's insertion order.
    """
    missing = [s.value for s in SEGMENT_ORDER if s not in segment_maps]
    if missing:
        raise DataContractError(f"missing per-segment maps: {', '.join(missing)}")
    shapes = {segment_maps[s].values.shape for s in SEGMENT_ORDER}
    if len(shapes) != 1:
        raise DataContractError("per-segment maps must share one shape")
    stack = np.stack([segment_maps[s].values for s in SEGMENT_ORDER])

    labeled = []
    for sample in samples:
        if sample.cell is None:
            raise DataContractError("sample lacks cell provenance; cannot label")
        row, col = sample.cell
        if not (0 <= row < stack.shape[1] and 0 <= col < stack.shape[2]):
            raise DataContractError(f"cell {sample.cell} outside map bounds")
        winner = int(np.argmax(stack[:, row, col]))
        labeled.append(
            FeatureSample(
                frame_index=sample.frame_index,
                velocity=sample.velocity,
                mean_free_range=sample.mean_free_range,
                label=SEGMENT_CLASS[SEGMENT_ORDER[winner]],
                cell=sample.cell,
            )
        )
    return labeled


def split_dataset(
    samples: list[FeatureSample], train_fraction: float = 0.75, seed: int = 0
) -> tuple[list[FeatureSample], list[FeatureSample]]:
    """Seeded shuffle split; ceil(train_fraction * n) samples train."""
    if len(samples) < 4:
        raise DataContractError("need at least 4 samples to split")
    if not 0.0 < train_fraction < 1.0:
        raise DataContractError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    n_train = int(np.ceil(train_fraction * len(samples)))
    train = [samples[i] for i in order[:n_train]]
    validation = [samples[i] for i in order[n_train:]]
    return train, validation


def write_features_csv(samples: list[FeatureSample], path) -> None:
    """Persist samples as `frame,velocity_mps,meanfree_range_m,label`."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURE_CSV_HEADER)
        for s in samples:
            writer.writerow(
                [
                    s.frame_index,
                    repr(s.velocity),
                    repr(s.mean_free_range),
                    s.label.value if s.label is not None else "",
                ]
            )


def read_features_csv(path) -> list[FeatureSample]:
    path = Path(path)
    by_value = {c.value: c for c in CLASS_ORDER}
    samples = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURE_CSV_HEADER:
            raise DataContractError(
                f"unexpected feature CSV header {header!r} in {path.name}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataContractError(f"malformed row {lineno} in {path.name}")
            frame_s, vel_s, rng_s, label_s = row
            try:
                frame = int(frame_s)
                velocity = float(vel_s)
                meanfree = float(rng_s)
            except ValueError as exc:
                raise DataContractError(
                    f"malformed row {lineno} in {path.name}: {exc}"
                ) from exc
            label = None
            if label_s:
                if label_s not in by_value:
                    raise DataContractError(
                        f"unknown label {label_s!r} at row {lineno} in {path.name}"
                    )
                label = by_value[label_s]
            samples.append(
                FeatureSample(
                    frame_index=frame,
                    velocity=velocity,
                    mean_free_range=meanfree,
                    label=label,
                )
            )
    return samples


def feature_matrix(samples: list[FeatureSample]) -> tuple[np.ndarray, np.ndarray]:
    """(n, 2) float feature matrix and (n,) int label vector.

    Unlabeled samples raise; use this only on labeled datasets.
    """
    if any(s.label is None for s in samples):
        raise DataContractError("dataset contains unlabeled samples")
    x = np.array([[s.velocity, s.mean_free_range] for s in samples], dtype=float)
    y = np.array([CLASS_ORDER.index(s.label) for s in samples], dtype=np.intp)
    return x, y
