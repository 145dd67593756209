"""Per-frame movement features: inactivity, movement scale, movement speed."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ambientis.flow import lucas_kanade, to_gray
from ambientis.frames import RawFrame
from ambientis.presence import BBox, clip_bbox

DEFAULT_CHANNEL_THRESHOLD = 30
DEFAULT_THRESHOLD = 3 * DEFAULT_CHANNEL_THRESHOLD  # summed over R, G, B
MAX_THRESHOLD = 3 * 255
FLOW_PADDING = 8
SPEED_DOMAINS = ("bbox", "active")


@dataclass(frozen=True)
class ActiveRegion:
    count: int
    bbox: BBox | None
    threshold: int
    mask: np.ndarray | None = None  # active pixels inside the body bbox; never persisted

    def __post_init__(self):
        if (self.count == 0) != (self.bbox is None):
            raise ValueError("active bbox must be present exactly when count > 0")


@dataclass(frozen=True)
class MotionFeatures:
    inactive: bool
    movement_scale: float
    movement_speed: float

    def __post_init__(self):
        if not (math.isfinite(self.movement_scale) and math.isfinite(self.movement_speed)):
            raise ValueError("motion features must be finite")
        if self.inactive and self.movement_scale != 0.0:
            raise ValueError("an inactive frame has zero movement scale")


@dataclass(frozen=True)
class FlowField:
    dx: np.ndarray
    dy: np.ndarray
    bbox: BBox

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.dx, self.dy)


def _check_pair(prev: RawFrame, cur: RawFrame) -> None:
    if (prev.width, prev.height) != (cur.width, cur.height):
        raise ValueError(
            f"frame size mismatch: {prev.width}x{prev.height} vs {cur.width}x{cur.height}"
        )


def _area(bbox: BBox) -> int:
    return bbox[2] * bbox[3]


def active_pixels(prev: RawFrame, cur: RawFrame, body_bbox: BBox,
                  threshold: int = DEFAULT_THRESHOLD) -> ActiveRegion:
    """Pixels in ``body_bbox`` whose summed |R|+|G|+|B| change exceeds ``threshold``."""
    _check_pair(prev, cur)
    if not 1 <= threshold <= MAX_THRESHOLD:
        raise ValueError(f"threshold {threshold} outside [1, {MAX_THRESHOLD}]")
    box = clip_bbox(body_bbox, cur.width, cur.height)
    if box is None:
        return ActiveRegion(0, None, threshold)
    x, y, w, h = box
    a = prev.rgb[y:y + h, x:x + w].astype(np.int16)
    b = cur.rgb[y:y + h, x:x + w].astype(np.int16)
    mask = np.abs(b - a).sum(axis=2) > threshold
    count = int(mask.sum())
    if count == 0:
        return ActiveRegion(0, None, threshold, mask)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    active = (x + int(cols[0]), y + int(rows[0]),
              int(cols[-1] - cols[0]) + 1, int(rows[-1] - rows[0]) + 1)
    return ActiveRegion(count, active, threshold, mask)


def _intersect(a: BBox, b: BBox) -> int:
    w = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    h = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    return max(w, 0) * max(h, 0)


def movement_scale(active: ActiveRegion, body_bbox: BBox) -> float:
    body_area = _area(body_bbox)
    if body_area <= 0:
        raise ValueError(f"body bbox {body_bbox} has zero area")
    if active.bbox is None:
        return 0.0
    return min(1.0, max(0.0, _intersect(active.bbox, body_bbox) / body_area))


def dense_flow(prev: RawFrame, cur: RawFrame, body_bbox: BBox,
               padding: int = FLOW_PADDING) -> FlowField:
    """Flow over ``body_bbox``, estimated on the bbox padded by ``padding`` px."""
    _check_pair(prev, cur)
    box = clip_bbox(body_bbox, cur.width, cur.height)
    if box is None or box != tuple(body_bbox):
        raise ValueError(f"body bbox {body_bbox} is not inside the {cur.width}x{cur.height} frame")
    x, y, w, h = box
    px0, py0 = max(0, x - padding), max(0, y - padding)
    px1, py1 = min(cur.width, x + w + padding), min(cur.height, y + h + padding)
    a = to_gray(prev.rgb[py0:py1, px0:px1])
    b = to_gray(cur.rgb[py0:py1, px0:px1])
    if np.array_equal(a, b):
        zeros = np.zeros((h, w))
        return FlowField(zeros, zeros.copy(), box)
    u, v = lucas_kanade(a, b)
    crop = (slice(y - py0, y - py0 + h), slice(x - px0, x - px0 + w))
    return FlowField(u[crop], v[crop], box)


def movement_speed(flow: FlowField, active: ActiveRegion | None = None,
                   domain: str = "bbox") -> float:
    """Mean flow magnitude in px/frame, over the body bbox or only its active pixels."""
    if flow.dx.size == 0:
        raise ValueError("empty flow field")
    mag = flow.magnitude
    if domain == "bbox":
        return float(mag.mean())
    if domain == "active":
        if active is None or active.count == 0:
            return 0.0
        return float(mag[active.mask].mean())
    raise ValueError(f"unknown speed domain {domain!r}")


def inactivity_flag(present: bool, active: ActiveRegion) -> bool:
    return bool(present) and active.count == 0


def motion_features(prev: RawFrame, cur: RawFrame, body_bbox: BBox, *,
                    threshold: int = DEFAULT_THRESHOLD, speed_domain: str = "bbox") -> MotionFeatures:
    """All three metrics for a frame where a person is present.

    Flow is skipped on inactive frames: with no significant change anywhere
    in the body, whatever flow a noisy pair yields is noise, and speed is 0.
    """
    active = active_pixels(prev, cur, body_bbox, threshold)
    if active.count == 0:
        return MotionFeatures(inactive=True, movement_scale=0.0, movement_speed=0.0)
    flow = dense_flow(prev, cur, body_bbox)
    return MotionFeatures(
        inactive=inactivity_flag(True, active),
        movement_scale=movement_scale(active, body_bbox),
        movement_speed=movement_speed(flow, active, speed_domain),
    )
