"""Pinhole-camera and gaze-ray arithmetic.

Camera frame convention: X right, Y down, Z forward (away from the
camera), matching image pixel axes. All world units are meters, image
units are pixels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

FACE_WIDTH_M = 0.15
EPS_PROJ = 1e-3


class GeometryError(ValueError):
    pass


class InvalidFaceError(GeometryError):
    pass


class BehindCameraError(GeometryError):
    pass


@dataclass(frozen=True)
class CameraModel:
    focal_px: float
    ppx: float
    ppy: float
    width: int
    height: int

    def __post_init__(self):
        if self.focal_px <= 0:
            raise GeometryError("focal_px must be positive")
        if self.width < 1 or self.height < 1:
            raise GeometryError("image dimensions must be at least 1x1")
        if not (0 <= self.ppx < self.width and 0 <= self.ppy < self.height):
            raise GeometryError("principal point outside image bounds")


@dataclass(frozen=True)
class GazeVector:
    """Unit 3D gaze direction in the camera frame."""

    gx: float
    gy: float
    gz: float

    def __post_init__(self):
        n = math.sqrt(self.gx * self.gx + self.gy * self.gy + self.gz * self.gz)
        if abs(n - 1.0) > 1e-6:
            raise GeometryError(f"gaze vector not unit length (norm={n!r})")

    @staticmethod
    def from_components(x: float, y: float, z: float) -> "GazeVector":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0:
            raise GeometryError("zero gaze vector")
        return GazeVector(x / n, y / n, z / n)


@dataclass(frozen=True)
class PixelScale:
    """Meters per pixel, valid at the owning face's depth plane."""

    meters_per_pixel: float

    def __post_init__(self):
        if self.meters_per_pixel <= 0:
            raise GeometryError("meters_per_pixel must be positive")


#: Sentinel for a gaze pointing along the optical axis, whose image-plane
#: projection is too short to define a direction.
DEGENERATE = None


def pixel_scale_at_face(ear_to_ear_px: float,
                        face_width_m: float = FACE_WIDTH_M) -> PixelScale:
    """Meters-per-pixel at the face plane from its apparent ear-to-ear width."""
    if ear_to_ear_px <= 0:
        raise InvalidFaceError(
            f"ear-to-ear distance must be positive, got {ear_to_ear_px}")
    return PixelScale(face_width_m / ear_to_ear_px)


def exact_pixel_scale(face_depth_m: float, focal_px: float) -> PixelScale:
    """Exact meters-per-pixel at a given depth plane (depth / focal)."""
    if face_depth_m <= 0:
        raise GeometryError("face depth must be positive")
    return PixelScale(face_depth_m / focal_px)


def gaze_projection_2d(g: GazeVector):
    """Unit image-plane direction of a gaze vector, or None when degenerate."""
    n = math.hypot(g.gx, g.gy)
    if n < EPS_PROJ:
        return DEGENERATE
    return (g.gx / n, g.gy / n)


def ray_depth_at_pixel(eye_px, face_depth_m: float, g: GazeVector,
                       scale: PixelScale, point_px) -> float:
    """Depth along the 3D gaze ray at an image point.

    Similar triangles on the dominant image axis of the gaze: the metric
    offset from the eye, times the Z-to-dominant-axis ratio of the gaze,
    gives the depth change relative to the face plane.
    """
    dir2 = gaze_projection_2d(g)
    if dir2 is DEGENERATE:
        raise GeometryError("degenerate gaze projection")
    dx = point_px[0] - eye_px[0]
    dy = point_px[1] - eye_px[1]
    if dx == 0 and dy == 0:
        raise GeometryError("point coincides with eye center")
    if dx * dir2[0] + dy * dir2[1] <= 0:
        raise GeometryError("point lies behind the eye along the gaze")
    if abs(g.gx) >= abs(g.gy):
        delta_m = dx * scale.meters_per_pixel
        return face_depth_m + delta_m * (g.gz / g.gx)
    delta_m = dy * scale.meters_per_pixel
    return face_depth_m + delta_m * (g.gz / g.gy)


def project_world_point(cam: CameraModel, p) -> tuple:
    """Project a 3D camera-frame point (meters) to pixel coordinates."""
    x, y, z = p
    if z <= 0:
        raise BehindCameraError(f"point at z={z} is behind the camera")
    return (cam.ppx + cam.focal_px * x / z,
            cam.ppy + cam.focal_px * y / z)


def angular_error_deg(a: GazeVector, b: GazeVector) -> float:
    """Angle between two unit gaze vectors in degrees, in [0, 180]."""
    dot = a.gx * b.gx + a.gy * b.gy + a.gz * b.gz
    dot = max(-1.0, min(1.0, dot))
    return math.degrees(math.acos(dot))
