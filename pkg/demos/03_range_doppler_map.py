"""
Range-Doppler maps: synthesis, normalization, and thresholding
==============================================================

Synthesizes one radar frame of a walking subject, turns it into a
range-Doppler map, and compares the detection mask with and without the
gamma stretch that recovers weak limb returns.
"""

from pathlib import Path

import numpy as np

from limbradar import (
    RADAR_PRESETS,
    GaitConfig,
    default_shapes,
    gamma_transform,
    generate_gait,
    normalize_to_unit,
    otsu_threshold,
    range_doppler_map,
    synth_frame,
)
from limbradar.processing import map_to_csv

out_dir = Path(__file__).resolve().parent / "output" / "maps"
out_dir.mkdir(parents=True, exist_ok=True)

radar = RADAR_PRESETS["model-b"]
config = GaitConfig(
    subject_height=1.75,
    walk_speed=1.4,
    sample_rate=2000.0,
    start_position=np.array([6.0, 0.0, 0.0]),
    heading=np.array([-1.0, 0.0, 0.0]),
    random_seed=0,
)
trajectory = generate_gait(config, duration=1.3)
shapes = default_shapes(config.subject_height)

# One frame mid-stride: 100 range bins x 64 Doppler bins.
frame = synth_frame(trajectory, shapes, radar, frame_start=0.4)
rd = range_doppler_map(frame, window="hann")
print(f"map shape: {rd.values.shape}")

row, col = np.unravel_index(np.argmax(rd.values), rd.values.shape)
print(
    f"strongest cell: {rd.range_axis[row]:.2f} m at {rd.velocity_axis[col]:+.2f} m/s"
    " (the torso, approaching)"
)

# The torso dominates the linear map; Otsu on the raw normalization only
# keeps cells near it. A gamma stretch (exponent < 1) lifts the faint
# limb returns above the threshold.
grid = normalize_to_unit(rd.values)
plain = otsu_threshold(grid, histogram_bins=256)
stretched = otsu_threshold(gamma_transform(grid, 0.65), histogram_bins=256)
print(f"\ndetected cells without gamma: {int(plain.mask.sum())}")
print(f"detected cells with gamma 0.65: {int(stretched.mask.sum())}")

csv_path = out_dir / "range_doppler.csv"
map_to_csv(rd, csv_path)
print(f"wrote {csv_path}")
