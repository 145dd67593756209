"""Sitting / standing / other from 2-D keypoints.

The shipped classifier is a geometric rule on knee angle and the torso-to-leg
vertical ratio. Other classifiers (e.g. a trained CNN) plug in by name via
:func:`register_classifier`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from ambientis.errors import InputError

JOINTS = (
    "head",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
)
LEG_JOINTS = ("left_knee", "right_knee", "left_ankle", "right_ankle")


class Posture(str, enum.Enum):
    SITTING = "sitting"
    STANDING = "standing"
    OTHER = "other"


@dataclass(frozen=True)
class PostureLabel:
    label: Posture
    confidence: float


@dataclass(frozen=True)
class Skeleton:
    """Joint name -> (x, y, confidence). Missing joints are simply absent."""

    joints: Mapping[str, tuple[float, float, float]] = field(default_factory=dict)

    @classmethod
    def from_keypoints(cls, keypoints: Iterable[tuple[str, float, float, float]] | None) -> "Skeleton":
        if not keypoints:
            return cls({})
        return cls({j: (float(x), float(y), float(c)) for j, x, y, c in keypoints if j in JOINTS})

    def get(self, joint: str):
        return self.joints.get(joint)

    def transformed(self, scale: float, dx: float, dy: float) -> "Skeleton":
        return Skeleton({j: (scale * x + dx, scale * y + dy, c) for j, (x, y, c) in self.joints.items()})


@dataclass(frozen=True)
class GeometricThresholds:
    min_leg_confidence: float = 0.3
    standing_knee_angle: float = 150.0
    sitting_knee_angle: float = 120.0
    standing_max_ratio: float = 0.9
    sitting_min_ratio: float = 1.3


def _angle(a, b, c) -> float | None:
    """Angle at b in degrees."""
    v1 = (a[0] - b[0], a[1] - b[1])
    v2 = (c[0] - b[0], c[1] - b[1])
    n1, n2 = math.hypot(*v1), math.hypot(*v2)
    if n1 == 0 or n2 == 0:
        return None
    cos = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def _mean_y(skel: Skeleton, names) -> float | None:
    ys = [skel.get(n)[1] for n in names if skel.get(n) is not None]
    return sum(ys) / len(ys) if ys else None


def knee_angle(skel: Skeleton) -> float | None:
    angles = []
    for side in ("left", "right"):
        pts = [skel.get(f"{side}_{j}") for j in ("hip", "knee", "ankle")]
        if all(p is not None for p in pts):
            a = _angle(*pts)
            if a is not None:
                angles.append(a)
    return sum(angles) / len(angles) if angles else None


def torso_leg_ratio(skel: Skeleton) -> float | None:
    shoulder = _mean_y(skel, ("left_shoulder", "right_shoulder"))
    hip = _mean_y(skel, ("left_hip", "right_hip"))
    ankle = _mean_y(skel, ("left_ankle", "right_ankle"))
    if shoulder is None or hip is None or ankle is None:
        return None
    leg = abs(hip - ankle)
    if leg == 0:
        return math.inf
    return abs(shoulder - hip) / leg


def classify_geometric(skel: Skeleton, th: GeometricThresholds = GeometricThresholds()) -> PostureLabel:
    if skel.get("left_hip") is None and skel.get("right_hip") is None:
        return PostureLabel(Posture.OTHER, 0.0)
    leg_conf = [skel.get(j)[2] if skel.get(j) is not None else 0.0 for j in LEG_JOINTS]
    mean_conf = sum(leg_conf) / len(leg_conf)
    if mean_conf < th.min_leg_confidence:
        return PostureLabel(Posture.OTHER, 1.0 - mean_conf)
    angle = knee_angle(skel)
    ratio = torso_leg_ratio(skel)
    if angle is not None and ratio is not None:
        if angle >= th.standing_knee_angle and ratio <= th.standing_max_ratio:
            return PostureLabel(Posture.STANDING, mean_conf)
    if (angle is not None and angle <= th.sitting_knee_angle) or (
        ratio is not None and ratio >= th.sitting_min_ratio
    ):
        return PostureLabel(Posture.SITTING, mean_conf)
    return PostureLabel(Posture.OTHER, 0.5 * mean_conf)


class PostureClassifier:
    name = "classifier"

    def classify(self, skel: Skeleton) -> PostureLabel:
        raise NotImplementedError


class GeometricClassifier(PostureClassifier):
    name = "geometric-baseline"

    def __init__(self, thresholds: GeometricThresholds | None = None, **overrides):
        base = thresholds or GeometricThresholds()
        self.thresholds = GeometricThresholds(**{**base.__dict__, **overrides})

    def classify(self, skel: Skeleton) -> PostureLabel:
        return classify_geometric(skel, self.thresholds)


_CLASSIFIERS: dict[str, Callable[..., PostureClassifier]] = {}


def register_classifier(name: str, factory: Callable[..., PostureClassifier]) -> None:
    _CLASSIFIERS[name] = factory


def load_classifier(name: str, **options) -> PostureClassifier:
    try:
        factory = _CLASSIFIERS[name]
    except KeyError:
        raise InputError(f"unknown classifier {name!r}; known: {sorted(_CLASSIFIERS)}") from None
    return factory(**options)


register_classifier(GeometricClassifier.name, GeometricClassifier)


def classify_posture(skel: Skeleton) -> PostureLabel:
    return classify_geometric(skel)


# -- synthetic skeletons ---------------------------------------------------

def standing_skeleton(x: float, y: float, w: float, h: float, conf: float = 0.9,
                      sway: float = 0.0) -> Skeleton:
    """Upright figure filling the box (x, y, w, h); ``sway`` bends the knees slightly."""
    cx = x + w / 2
    j = {
        "head": (cx, y + 0.06 * h),
        "left_shoulder": (cx - 0.3 * w, y + 0.2 * h),
        "right_shoulder": (cx + 0.3 * w, y + 0.2 * h),
        "left_elbow": (cx - 0.4 * w, y + 0.35 * h),
        "right_elbow": (cx + 0.4 * w, y + 0.35 * h),
        "left_wrist": (cx - 0.4 * w, y + 0.48 * h),
        "right_wrist": (cx + 0.4 * w, y + 0.48 * h),
        "left_hip": (cx - 0.2 * w, y + 0.5 * h),
        "right_hip": (cx + 0.2 * w, y + 0.5 * h),
        "left_knee": (cx - 0.2 * w + sway * w, y + 0.75 * h),
        "right_knee": (cx + 0.2 * w + sway * w, y + 0.75 * h),
        "left_ankle": (cx - 0.2 * w, y + 0.98 * h),
        "right_ankle": (cx + 0.2 * w, y + 0.98 * h),
    }
    return Skeleton({k: (px, py, conf) for k, (px, py) in j.items()})


def sitting_skeleton(x: float, y: float, w: float, h: float, conf: float = 0.9,
                     lean: float = 0.0) -> Skeleton:
    """Side-on seated figure: thighs horizontal, shins vertical."""
    hx = x + 0.3 * w
    j = {
        "head": (hx + lean * w, y + 0.08 * h),
        "left_shoulder": (hx - 0.05 * w + lean * w, y + 0.3 * h),
        "right_shoulder": (hx + 0.05 * w + lean * w, y + 0.3 * h),
        "left_elbow": (hx + 0.15 * w, y + 0.45 * h),
        "right_elbow": (hx + 0.2 * w, y + 0.45 * h),
        "left_wrist": (hx + 0.35 * w, y + 0.5 * h),
        "right_wrist": (hx + 0.4 * w, y + 0.5 * h),
        "left_hip": (hx - 0.05 * w, y + 0.62 * h),
        "right_hip": (hx + 0.05 * w, y + 0.62 * h),
        "left_knee": (x + 0.85 * w, y + 0.62 * h),
        "right_knee": (x + 0.9 * w, y + 0.62 * h),
        "left_ankle": (x + 0.85 * w, y + 0.98 * h),
        "right_ankle": (x + 0.9 * w, y + 0.98 * h),
    }
    return Skeleton({k: (px, py, conf) for k, (px, py) in j.items()})


def other_skeleton(x: float, y: float, w: float, h: float) -> Skeleton:
    """Lying / occluded figure: legs barely visible."""
    j = {
        "head": (x + 0.05 * w, y + 0.5 * h, 0.8),
        "left_shoulder": (x + 0.2 * w, y + 0.3 * h, 0.8),
        "right_shoulder": (x + 0.2 * w, y + 0.7 * h, 0.8),
        "left_hip": (x + 0.55 * w, y + 0.35 * h, 0.6),
        "right_hip": (x + 0.55 * w, y + 0.65 * h, 0.6),
        "left_knee": (x + 0.75 * w, y + 0.35 * h, 0.1),
        "right_knee": (x + 0.75 * w, y + 0.65 * h, 0.1),
        "left_ankle": (x + 0.95 * w, y + 0.35 * h, 0.1),
        "right_ankle": (x + 0.95 * w, y + 0.65 * h, 0.1),
    }
    return Skeleton({k: (px, py, c) for k, (px, py, c) in j.items()})


def skeleton_for(posture: Posture, bbox) -> Skeleton:
    x, y, w, h = bbox
    if posture is Posture.STANDING:
        return standing_skeleton(x, y, w, h)
    if posture is Posture.SITTING:
        return sitting_skeleton(x, y, w, h)
    return other_skeleton(x, y, w, h)


def synthetic_corpus(seed: int = 0, n_sitting: int = 180, n_standing: int = 180,
                     n_degenerate: int = 40) -> list[tuple[Skeleton, Posture]]:
    """Canonical labelled skeletons with randomized size, placement and pose jitter.

    Degenerate samples (missing hips or occluded legs) are labelled OTHER.
    """
    rng = np.random.default_rng(seed)
    out: list[tuple[Skeleton, Posture]] = []

    def box():
        w = rng.uniform(10, 80)
        h = w * rng.uniform(1.2, 3.0)
        return rng.uniform(0, 400), rng.uniform(0, 300), w, h

    for _ in range(n_standing):
        out.append((standing_skeleton(*box(), conf=rng.uniform(0.5, 1.0),
                                      sway=rng.uniform(-0.03, 0.03)), Posture.STANDING))
    for _ in range(n_sitting):
        out.append((sitting_skeleton(*box(), conf=rng.uniform(0.5, 1.0),
                                     lean=rng.uniform(-0.05, 0.05)), Posture.SITTING))
    for i in range(n_degenerate):
        base = standing_skeleton(*box()) if i % 2 else sitting_skeleton(*box())
        if i % 4 < 2:
            joints = {k: v for k, v in base.joints.items() if k not in ("left_hip", "right_hip")}
        else:
            low = rng.uniform(0.0, 0.25)
            joints = {k: (x, y, low if k in LEG_JOINTS else c) for k, (x, y, c) in base.joints.items()}
        out.append((Skeleton(joints), Posture.OTHER))
    return out
