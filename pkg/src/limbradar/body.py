"""Body segmentation model: 16 ellipsoid segments grouped into 4 limb classes.

The walking human is represented by 16 body segments, each approximated by
an ellipsoid. Segments merge left and right counterparts into joint classes
(base / arms / legs / feet) because the two sides produce mirror-image
signatures that cannot be told apart without prior knowledge of which side
moved first.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError


class SegmentId(Enum):
    """The 16 body segments tracked by the simulation."""

    HEAD = "head"
    NECK = "neck"
    TORSO = "torso"
    HIP = "hip"
    LEFT_UPPER_ARM = "left_upper_arm"
    LEFT_LOWER_ARM = "left_lower_arm"
    LEFT_HAND = "left_hand"
    RIGHT_UPPER_ARM = "right_upper_arm"
    RIGHT_LOWER_ARM = "right_lower_arm"
    RIGHT_HAND = "right_hand"
    LEFT_UPPER_LEG = "left_upper_leg"
    LEFT_LOWER_LEG = "left_lower_leg"
    LEFT_FOOT = "left_foot"
    RIGHT_UPPER_LEG = "right_upper_leg"
    RIGHT_LOWER_LEG = "right_lower_leg"
    RIGHT_FOOT = "right_foot"


SEGMENT_ORDER: tuple[SegmentId, ...] = tuple(SegmentId)
SEGMENT_INDEX: dict[SegmentId, int] = {s: i for i, s in enumerate(SEGMENT_ORDER)}
N_SEGMENTS = len(SEGMENT_ORDER)


class LimbClass(Enum):
    """Four-way grouping of segments used by the decomposition classifier."""

    BASE = "base"
    ARMS = "arms"
    LEGS = "legs"
    FEET = "feet"


CLASS_ORDER: tuple[LimbClass, ...] = tuple(LimbClass)
CLASS_INDEX: dict[LimbClass, int] = {c: i for i, c in enumerate(CLASS_ORDER)}

# Row order used by printed confusion tables and CSV reports.
CLASS_REPORT_ORDER: tuple[LimbClass, ...] = (
    LimbClass.ARMS,
    LimbClass.FEET,
    LimbClass.LEGS,
    LimbClass.BASE,
)

SEGMENT_CLASS: dict[SegmentId, LimbClass] = {
    SegmentId.HEAD: LimbClass.BASE,
    SegmentId.NECK: LimbClass.BASE,
    SegmentId.TORSO: LimbClass.BASE,
    SegmentId.HIP: LimbClass.BASE,
    SegmentId.LEFT_UPPER_ARM: LimbClass.ARMS,
    SegmentId.LEFT_LOWER_ARM: LimbClass.ARMS,
    SegmentId.LEFT_HAND: LimbClass.ARMS,
    SegmentId.RIGHT_UPPER_ARM: LimbClass.ARMS,
    SegmentId.RIGHT_LOWER_ARM: LimbClass.ARMS,
    SegmentId.RIGHT_HAND: LimbClass.ARMS,
    SegmentId.LEFT_UPPER_LEG: LimbClass.LEGS,
    SegmentId.LEFT_LOWER_LEG: LimbClass.LEGS,
    SegmentId.RIGHT_UPPER_LEG: LimbClass.LEGS,
    SegmentId.RIGHT_LOWER_LEG: LimbClass.LEGS,
    SegmentId.LEFT_FOOT: LimbClass.FEET,
    SegmentId.RIGHT_FOOT: LimbClass.FEET,
}

# Left/right counterparts; central segments map to themselves.
MIRROR_SEGMENT: dict[SegmentId, SegmentId] = {
    SegmentId.HEAD: SegmentId.HEAD,
    SegmentId.NECK: SegmentId.NECK,
    SegmentId.TORSO: SegmentId.TORSO,
    SegmentId.HIP: SegmentId.HIP,
    SegmentId.LEFT_UPPER_ARM: SegmentId.RIGHT_UPPER_ARM,
    SegmentId.LEFT_LOWER_ARM: SegmentId.RIGHT_LOWER_ARM,
    SegmentId.LEFT_HAND: SegmentId.RIGHT_HAND,
    SegmentId.RIGHT_UPPER_ARM: SegmentId.LEFT_UPPER_ARM,
    SegmentId.RIGHT_LOWER_ARM: SegmentId.LEFT_LOWER_ARM,
    SegmentId.RIGHT_HAND: SegmentId.LEFT_HAND,
    SegmentId.LEFT_UPPER_LEG: SegmentId.RIGHT_UPPER_LEG,
    SegmentId.LEFT_LOWER_LEG: SegmentId.RIGHT_LOWER_LEG,
    SegmentId.LEFT_FOOT: SegmentId.RIGHT_FOOT,
    SegmentId.RIGHT_UPPER_LEG: SegmentId.LEFT_UPPER_LEG,
    SegmentId.RIGHT_LOWER_LEG: SegmentId.LEFT_LOWER_LEG,
    SegmentId.RIGHT_FOOT: SegmentId.LEFT_FOOT,
}


@dataclass(frozen=True)
class EllipsoidShape:
    """Ellipsoid radii in meters along the local x, y, z axes."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ConfigurationError(
                f"ellipsoid radii must be positive, got ({self.a}, {self.b}, {self.c})"
            )

    def scaled(self, factor: float) -> "EllipsoidShape":
        return EllipsoidShape(self.a * factor, self.b * factor, self.c * factor)


# Radii for a 1.75 m tall reference subject; scaled linearly with height.
_REFERENCE_HEIGHT = 1.75
_REFERENCE_RADII: dict[SegmentId, EllipsoidShape] = {
    SegmentId.HEAD: EllipsoidShape(0.10, 0.10, 0.12),
    SegmentId.NECK: EllipsoidShape(0.05, 0.05, 0.06),
    SegmentId.TORSO: EllipsoidShape(0.15, 0.12, 0.30),
    SegmentId.HIP: EllipsoidShape(0.15, 0.12, 0.12),
    SegmentId.LEFT_UPPER_ARM: EllipsoidShape(0.05, 0.05, 0.14),
    SegmentId.LEFT_LOWER_ARM: EllipsoidShape(0.04, 0.04, 0.13),
    SegmentId.LEFT_HAND: EllipsoidShape(0.04, 0.02, 0.09),
    SegmentId.RIGHT_UPPER_ARM: EllipsoidShape(0.05, 0.05, 0.14),
    SegmentId.RIGHT_LOWER_ARM: EllipsoidShape(0.04, 0.04, 0.13),
    SegmentId.RIGHT_HAND: EllipsoidShape(0.04, 0.02, 0.09),
    SegmentId.LEFT_UPPER_LEG: EllipsoidShape(0.07, 0.07, 0.22),
    SegmentId.LEFT_LOWER_LEG: EllipsoidShape(0.05, 0.05, 0.21),
    SegmentId.LEFT_FOOT: EllipsoidShape(0.05, 0.045, 0.12),
    SegmentId.RIGHT_UPPER_LEG: EllipsoidShape(0.07, 0.07, 0.22),
    SegmentId.RIGHT_LOWER_LEG: EllipsoidShape(0.05, 0.05, 0.21),
    SegmentId.RIGHT_FOOT: EllipsoidShape(0.05, 0.045, 0.12),
}


def default_shapes(subject_height: float) -> dict[SegmentId, EllipsoidShape]:
    """Per-segment ellipsoid radii scaled linearly with subject height."""
    factor = subject_height / _REFERENCE_HEIGHT
    return {seg: shape.scaled(factor) for seg, shape in _REFERENCE_RADII.items()}


# Segment center offsets relative to a body origin at ground level under the
# trunk, as fractions of subject height: (forward, lateral, vertical).
# Lateral is signed: +left, -right.
SEGMENT_OFFSET_FRACTIONS: dict[SegmentId, tuple[float, float, float]] = {
    SegmentId.HEAD: (0.0, 0.0, 0.93),
    SegmentId.NECK: (0.0, 0.0, 0.865),
    SegmentId.TORSO: (0.0, 0.0, 0.66),
    SegmentId.HIP: (0.0, 0.0, 0.53),
    SegmentId.LEFT_UPPER_ARM: (0.0, 0.13, 0.72),
    SegmentId.LEFT_LOWER_ARM: (0.0, 0.14, 0.55),
    SegmentId.LEFT_HAND: (0.0, 0.15, 0.42),
    SegmentId.RIGHT_UPPER_ARM: (0.0, -0.13, 0.72),
    SegmentId.RIGHT_LOWER_ARM: (0.0, -0.14, 0.55),
    SegmentId.RIGHT_HAND: (0.0, -0.15, 0.42),
    SegmentId.LEFT_UPPER_LEG: (0.0, 0.06, 0.42),
    SegmentId.LEFT_LOWER_LEG: (0.0, 0.07, 0.19),
    SegmentId.LEFT_FOOT: (0.0, 0.08, 0.03),
    SegmentId.RIGHT_UPPER_LEG: (0.0, -0.06, 0.42),
    SegmentId.RIGHT_LOWER_LEG: (0.0, -0.07, 0.19),
    SegmentId.RIGHT_FOOT: (0.0, -0.08, 0.03),
}
