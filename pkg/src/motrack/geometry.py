"""Axis-aligned bounding-box arithmetic shared by association, metrics, and the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel units, stored as (left, top, width, height).

    Extents must be strictly positive and all coordinates finite; invalid
    boxes are rejected at construction time so downstream scoring never
    sees degenerate geometry.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"box field {name!r} must be finite, got {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Symmetric; 0 for disjoint boxes, including boxes that only share an
    edge (zero-area intersection). Identical boxes score exactly 1: the
    (x + w) - x edge arithmetic is not exact in floating point, so the
    identity case is resolved before it and the ratio is clamped at 1.
    """
    if a == b:
        return 1.0
    ix = min(a.right, b.right) - max(a.x, b.x)
    iy = min(a.bottom, b.bottom) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return min(inter / (a.area + b.area - inter), 1.0)


def center(a: BoundingBox) -> tuple[float, float]:
    """Center point of a box, (x + w/2, y + h/2)."""
    return (a.x + a.w / 2.0, a.y + a.h / 2.0)
