"""Person presence from two independent detectors.

A frame counts as an appearance only when *both* the pose detector and the
object detector are more than 50% sure a person is there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from ambientis.errors import DataFormatError, InputError
from ambientis.frames import RawFrame

PRESENCE_THRESHOLD = 0.5  # strict: p must be > 0.5

BBox = tuple[int, int, int, int]  # x, y, w, h
Keypoint = tuple[str, float, float, float]  # joint, x, y, confidence


@dataclass(frozen=True)
class DetectorOutput:
    probability: float
    bbox: BBox | None = None
    keypoints: tuple[Keypoint, ...] | None = None
    diagnostic: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        if self.bbox is not None and (self.bbox[2] <= 0 or self.bbox[3] <= 0):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if self.keypoints:
            for joint, _, _, conf in self.keypoints:
                if not 0.0 <= conf <= 1.0:
                    raise ValueError(f"keypoint {joint} confidence {conf} outside [0, 1]")

    @property
    def failed(self) -> bool:
        return self.diagnostic is not None


NO_DETECTION = DetectorOutput(0.0)


@dataclass(frozen=True)
class PresenceRecord:
    timestamp: int
    present: bool
    p_pose: float
    p_obj: float
    bbox: BBox | None = None
    keypoints: tuple[Keypoint, ...] | None = None


def fuse_presence(p_pose: float, p_obj: float) -> bool:
    for p in (p_pose, p_obj):
        if not 0.0 <= p <= 1.0 or math.isnan(p):
            raise ValueError(f"probability {p} outside [0, 1]")
    return p_pose > PRESENCE_THRESHOLD and p_obj > PRESENCE_THRESHOLD


def clip_bbox(bbox: BBox, width: int, height: int) -> BBox | None:
    x, y, w, h = bbox
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(width, x + w), min(height, y + h)
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


class Detector:
    """Plug-in interface: a frame in, zero or more candidate detections out."""

    name = "detector"

    def detect(self, frame: RawFrame) -> list[DetectorOutput]:
        raise NotImplementedError


class ScenarioDetector(Detector):
    """Reads the simulator's per-frame detection channel instead of pixels.

    ``role`` selects which probability the simulator recorded: the pose
    detector's (which also carries keypoints) or the object detector's.
    ``noise`` adds Gaussian jitter on top of the recorded probability.
    """

    name = "scenario"

    def __init__(self, channel: Mapping[int, Mapping], role: str = "object",
                 noise: float = 0.0, seed: int = 0):
        if role not in ("pose", "object"):
            raise InputError(f"unknown detector role {role!r}")
        self.channel = channel
        self.role = role
        self.noise = noise
        self._rng = np.random.default_rng(seed)

    @classmethod
    def from_file(cls, path: str | Path, role: str = "object", **kw) -> "ScenarioDetector":
        return cls(load_channel(path), role=role, **kw)

    def detect(self, frame: RawFrame) -> list[DetectorOutput]:
        rec = self.channel.get(frame.timestamp)
        if rec is None:
            return []
        p = float(rec["p_pose"] if self.role == "pose" else rec["p_obj"])
        if self.noise > 0:
            p = float(np.clip(p + self._rng.normal(0.0, self.noise), 0.0, 1.0))
        bbox = tuple(rec["bbox"]) if rec.get("bbox") else None
        keypoints = None
        if self.role == "pose" and rec.get("keypoints"):
            keypoints = tuple((str(j), float(x), float(y), float(c)) for j, x, y, c in rec["keypoints"])
        if p == 0.0 and bbox is None:
            return []
        return [DetectorOutput(p, bbox, keypoints)]


def load_channel(path: str | Path) -> dict[int, dict]:
    """Load a simulator detection channel (JSONL keyed by timestamp)."""
    path = Path(path)
    channel = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read detection channel {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            channel[int(rec["timestamp"])] = rec
        except (ValueError, KeyError, TypeError) as exc:
            raise DataFormatError(f"{path}:{lineno}: bad channel record: {exc}") from exc
    return channel


class BlobDetector(Detector):
    """Bright connected regions on a dark scene, one candidate per blob.

    Probability grows with blob area: ``1 - exp(-area / min_area)``, so a blob
    of exactly ``min_area`` pixels scores ~0.63.
    """

    name = "blob"

    def __init__(self, luminance_threshold: float = 80.0, min_area: int = 50):
        self.luminance_threshold = luminance_threshold
        self.min_area = min_area

    def detect(self, frame: RawFrame) -> list[DetectorOutput]:
        rgb = frame.rgb.astype(np.float32)
        lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        labels, n = ndimage.label(lum > self.luminance_threshold)
        if n == 0:
            return []
        out = []
        areas = np.bincount(labels.ravel())
        for index, sl in enumerate(ndimage.find_objects(labels), start=1):
            area = int(areas[index])
            if sl is None or area < self.min_area:
                continue
            ys, xs = sl
            bbox = (xs.start, ys.start, xs.stop - xs.start, ys.stop - ys.start)
            out.append(DetectorOutput(1.0 - math.exp(-area / self.min_area), bbox))
        return out


DetectorFactory = Callable[..., Detector]
_DETECTORS: dict[str, DetectorFactory] = {}


def register_detector(name: str, factory: DetectorFactory) -> None:
    _DETECTORS[name] = factory


def load_detector(name: str, **options) -> Detector:
    try:
        factory = _DETECTORS[name]
    except KeyError:
        raise InputError(f"unknown detector {name!r}; known: {sorted(_DETECTORS)}") from None
    return factory(**options)


def available_detectors() -> list[str]:
    return sorted(_DETECTORS)


register_detector("blob", BlobDetector)
register_detector("scenario", ScenarioDetector)


def best_detection(candidates: Sequence[DetectorOutput]) -> DetectorOutput:
    """Single-occupancy model: keep the most confident candidate."""
    if not candidates:
        return NO_DETECTION
    return max(candidates, key=lambda d: d.probability)


def _safe_detect(detector: Detector, frame: RawFrame) -> DetectorOutput:
    try:
        best = best_detection(detector.detect(frame))
    except Exception as exc:  # plug-ins are untrusted; a crash is "nobody seen"
        return DetectorOutput(0.0, diagnostic=f"{type(exc).__name__}: {exc}")
    if best.bbox is not None:
        clipped = clip_bbox(best.bbox, frame.width, frame.height)
        if clipped != best.bbox:
            best = DetectorOutput(best.probability, clipped, best.keypoints, best.diagnostic)
    return best


def run_detectors(frame: RawFrame, pose_detector: Detector,
                  obj_detector: Detector) -> tuple[DetectorOutput, DetectorOutput]:
    return _safe_detect(pose_detector, frame), _safe_detect(obj_detector, frame)


def presence_record(frame: RawFrame, pose: DetectorOutput, obj: DetectorOutput) -> PresenceRecord:
    present = fuse_presence(pose.probability, obj.probability)
    bbox = None
    if present:
        # object detector owns the body area; fall back to pose, then whole frame
        bbox = obj.bbox or pose.bbox or (0, 0, frame.width, frame.height)
    return PresenceRecord(
        timestamp=frame.timestamp,
        present=present,
        p_pose=pose.probability,
        p_obj=obj.probability,
        bbox=bbox,
        keypoints=pose.keypoints if present else None,
    )
