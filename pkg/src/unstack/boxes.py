"""Axis-aligned bounding boxes in normalized center-size form.

Boxes store (cx, cy, w, h) with every field in [0, 1]; pixel-space
corner boxes are normalized by the image dimensions on ingestion.
IoU and GIoU are the overlap measures used for matching costs and
box regression losses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BBox", "giou", "iou"]


@dataclass(frozen=True)
class BBox:
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"box field {name}={value} outside [0, 1]")
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float) -> "BBox":
        if x2 <= x1 or y2 <= y1:
            raise ValueError(f"degenerate corner box ({x1}, {y1}, {x2}, {y2})")
        return cls((x1 + x2) / 2.0, (y1 + y2) / 2.0, x2 - x1, y2 - y1)

    @classmethod
    def from_pixels(cls, x1: float, y1: float, x2: float, y2: float,
                    image_width: int, image_height: int) -> "BBox":
        """Normalize a pixel-corner box, clipping it to the image frame."""
        if image_width <= 0 or image_height <= 0:
            raise ValueError("image dimensions must be positive")
        x1, x2 = (min(max(x, 0.0), image_width) for x in (x1, x2))
        y1, y2 = (min(max(y, 0.0), image_height) for y in (y1, y2))
        return cls.from_corners(x1 / image_width, y1 / image_height,
                                x2 / image_width, y2 / image_height)

    def corners(self) -> tuple[float, float, float, float]:
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0,
                self.cx + self.w / 2.0, self.cy + self.h / 2.0)

    def area(self) -> float:
        return self.w * self.h

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h])


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union, in [0, 1]."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area() + b.area() - inter
    return inter / union


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU: IoU minus the empty fraction of the enclosing hull.

    Equal to IoU when the two boxes tile their hull; tends to -1 as the
    boxes separate. Range (-1, 1].
    """
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area() + b.area() - inter
    hull = (max(ax2, bx2) - min(ax1, bx1)) * (max(ay2, by2) - min(ay1, by1))
    return inter / union - (hull - union) / hull
