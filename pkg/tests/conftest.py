"""Shared fixtures and scene-building helpers."""

import numpy as np
import pytest

from limbradar.body import SEGMENT_ORDER, EllipsoidShape, SegmentId
from limbradar.gait import Trajectory
from limbradar.radar import RADAR_PRESETS

PARKED = np.array([1000.0, 0.0, 0.0])


def scene_trajectory(moving, n, rate, parked=PARKED):
    """Trajectory with a few segments in linear motion, rest parked far away.

    moving: dict SegmentId -> (start_pos, velocity) with 3-vectors.
    """
    times = np.arange(n) / rate
    data = np.empty((16, n, 3))
    data[:] = np.asarray(parked)[None, None, :]
    for seg, (pos0, vel) in moving.items():
        idx = SEGMENT_ORDER.index(seg)
        data[idx] = np.asarray(pos0)[None, :] + times[:, None] * np.asarray(vel)[None, :]
    return Trajectory(times=times, data=data, sample_rate=rate)


def uniform_shapes(a=0.1, b=0.1, c=0.1):
    return {seg: EllipsoidShape(a, b, c) for seg in SegmentId}


@pytest.fixture
def model_b():
    return RADAR_PRESETS["model-b"]


@pytest.fixture
def model_a():
    return RADAR_PRESETS["model-a"]
