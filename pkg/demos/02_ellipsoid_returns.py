"""
Ellipsoid scattering and FMCW waveform design
=============================================

Shows how the radar cross section of a body segment varies with aspect
angle, then derives the waveform parameters (range bins, chirp interval,
chirps per frame) from the design targets.
"""

import math

import numpy as np

from limbradar import (
    RADAR_PRESETS,
    EllipsoidShape,
    chirp_count_raw,
    chirp_duration,
    chirps_per_frame,
    rcs_ellipsoid,
)

# A sphere reflects pi*r^2 from every direction; an elongated segment
# such as a lower leg is brightest broadside and dim end-on.
sphere = EllipsoidShape(a=0.1, b=0.1, c=0.1)
shin = EllipsoidShape(a=0.05, b=0.05, c=0.25)

print("theta      sphere      shin")
for theta_deg in (0, 30, 60, 90):
    theta = math.radians(theta_deg)
    s_sphere = rcs_ellipsoid(sphere, theta, 0.0)
    s_shin = rcs_ellipsoid(shin, theta, 0.0)
    print(f"{theta_deg:>5} deg  {s_sphere:8.5f}  {s_shin:8.5f}  m^2")
print(f"sphere reference pi*r^2 = {math.pi * 0.1**2:.5f} m^2")

# Looking from (theta, phi) or from the diametrically opposite direction
# gives the same cross section.
theta, phi = 0.7, 1.1
assert np.isclose(
    rcs_ellipsoid(shin, theta, phi),
    rcs_ellipsoid(shin, math.pi - theta, phi + math.pi),
    rtol=1e-12,
)
print("aspect symmetry sigma(theta, phi) == sigma(pi - theta, phi + pi): ok")

# Waveform design for a 25 GHz carrier: a 2 GHz sweep gives 7.5 cm range
# bins, a 6 m/s unambiguous speed needs a 0.5 ms chirp interval, and a
# 0.1 m/s velocity resolution asks for 120 chirps, rounded down to the
# nearest power of two the FFT can use.
carrier = 25e9
t_chirp = chirp_duration(carrier, v_max=6.0)
raw = chirp_count_raw(carrier, t_chirp, v_res=0.1)
print(f"\nchirp interval for 6 m/s unambiguous: {t_chirp * 1e3:.2f} ms")
print(f"raw chirp count for 0.1 m/s resolution: {raw:.0f}")
print(f"power-of-two frame size: {chirps_per_frame(carrier, t_chirp, 0.1)}")

for name, preset in RADAR_PRESETS.items():
    print(
        f"{name}: {preset.samples_per_chirp} bins x {preset.range_resolution} m"
        f" = {preset.max_range} m max range,"
        f" {preset.chirps_per_frame} chirps/frame,"
        f" {preset.frame_duration * 1e3:.0f} ms frames"
    )
