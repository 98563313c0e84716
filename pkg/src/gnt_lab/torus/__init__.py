"""Numerical extrinsic geometry of distributions on flat tori."""

from .frames import (FrameField, constant_frame, frame_from_config, random_givens, t2_rotating,
                     t2_rotating_oracle, t3_two_angle)
from .geometry import ResolutionError, TorusGeometry, build_geometry, fiber_view, sample_geometry

__all__ = [
    "FrameField", "ResolutionError", "TorusGeometry", "build_geometry", "constant_frame", "fiber_view",
    "frame_from_config", "random_givens", "sample_geometry", "t2_rotating", "t2_rotating_oracle",
    "t3_two_angle",
]
