"""Deterministic teleoperation simulator with past-image bird's-eye view compositing.

The package simulates a ground vehicle driving a closed course, emulates a
narrow communication channel (interval-gated, fixed-delay image/telemetry/command
links), and synthesizes the operator's display by overlaying a CG model of the
vehicle on an image captured earlier from the vehicle's own camera.  Three
display modes are provided: "front-camera" (raw delayed video), "spir-existing"
(past-image background with CG overlay) and "spir2" (adds the FOV zoom that
keeps the CG model's apparent size constant, plus predictive steering overlays).
"""

__version__ = "0.1.0"

MODES = ("front-camera", "spir-existing", "spir2")
