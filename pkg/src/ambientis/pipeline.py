"""Frames in, FrameFeatures out.

The pipeline holds at most two frames at a time (previous and current). A
frame is released as soon as the next one has been processed, and the last
one when the stream ends, so no pixels outlive feature extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator

import yaml

from ambientis.aggregation import FrameFeatures
from ambientis.errors import InputError
from ambientis.frames import DEFAULT_FRAME_INTERVAL_MS, RawFrame, StreamConfig
from ambientis.motion import DEFAULT_THRESHOLD, MAX_THRESHOLD, SPEED_DOMAINS, motion_features
from ambientis.posture import PostureClassifier, Skeleton, load_classifier
from ambientis.presence import (
    Detector, ScenarioDetector, available_detectors, load_channel, load_detector,
    presence_record, run_detectors,
)
from ambientis.stats import Strategy


@dataclass(frozen=True)
class PipelineConfig:
    """Everything ``ambientis run`` needs; loadable from a YAML file.

    Keys::

        stream:     {frame_interval_ms, timezone_offset_minutes, room}
        detectors:  {pose, object, channel}   # channel: simulator JSONL for "scenario"
        classifier: geometric-baseline
        motion:     {threshold, speed_domain}
        comparison: {strategy}
        output_dir: out
    """

    frame_interval_ms: int = DEFAULT_FRAME_INTERVAL_MS
    tz_offset_minutes: int = 0
    room: str = ""
    pose_detector: str = "scenario"
    object_detector: str = "scenario"
    channel_path: Path | None = None
    classifier: str = "geometric-baseline"
    threshold: int = DEFAULT_THRESHOLD
    speed_domain: str = "bbox"
    strategy: str = Strategy.BY_INDEX.value
    output_dir: Path = Path("out")

    def __post_init__(self):
        if self.frame_interval_ms <= 0:
            raise InputError("frame_interval_ms must be positive")
        if not 1 <= self.threshold <= MAX_THRESHOLD:
            raise InputError(f"threshold must be within 1..{MAX_THRESHOLD}")
        if self.speed_domain not in SPEED_DOMAINS:
            raise InputError(f"speed_domain must be one of {SPEED_DOMAINS}")
        for name in (self.pose_detector, self.object_detector):
            if name not in available_detectors():
                raise InputError(f"unknown detector {name!r}")
        try:
            Strategy(self.strategy)
        except ValueError:
            raise InputError(f"unknown pairing strategy {self.strategy!r}") from None

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text()) or {}
        except OSError as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise InputError(f"{path}: {exc}") from None
        return cls.from_dict(doc, base_dir=path.parent, **overrides)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path = Path("."), **overrides) -> "PipelineConfig":
        if not isinstance(doc, dict):
            raise InputError("config must be a mapping")
        stream = doc.get("stream", {}) or {}
        det = doc.get("detectors", {}) or {}
        motion = doc.get("motion", {}) or {}
        comp = doc.get("comparison", {}) or {}
        kw = {}
        try:
            if "frame_interval_ms" in stream:
                kw["frame_interval_ms"] = int(stream["frame_interval_ms"])
            if "timezone_offset_minutes" in stream:
                kw["tz_offset_minutes"] = int(stream["timezone_offset_minutes"])
            if "room" in stream:
                kw["room"] = str(stream["room"])
            if "pose" in det:
                kw["pose_detector"] = str(det["pose"])
            if "object" in det:
                kw["object_detector"] = str(det["object"])
            if det.get("channel"):
                kw["channel_path"] = base_dir / det["channel"]
            if "classifier" in doc:
                kw["classifier"] = str(doc["classifier"])
            if "threshold" in motion:
                kw["threshold"] = int(motion["threshold"])
            if "speed_domain" in motion:
                kw["speed_domain"] = str(motion["speed_domain"])
            if "strategy" in comp:
                kw["strategy"] = str(comp["strategy"])
            if "output_dir" in doc:
                kw["output_dir"] = base_dir / doc["output_dir"]
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad config value: {exc}") from None
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def stream_config(self, **kw) -> StreamConfig:
        return StreamConfig(frame_interval_ms=self.frame_interval_ms, room=self.room,
                            tz_offset_minutes=self.tz_offset_minutes, **kw)


def _make_detector(name: str, role: str, channel) -> Detector:
    if name == "scenario":
        if channel is None:
            raise InputError("the scenario detector needs a detection channel")
        return ScenarioDetector(channel, role=role)
    return load_detector(name)


@dataclass
class Pipeline:
    pose_detector: Detector
    object_detector: Detector
    classifier: PostureClassifier
    threshold: int = DEFAULT_THRESHOLD
    speed_domain: str = "bbox"
    max_live_frames: int = field(default=0, init=False)

    @classmethod
    def from_config(cls, config: PipelineConfig, channel=None) -> "Pipeline":
        if channel is None and config.channel_path is not None and "scenario" in (
            config.pose_detector, config.object_detector
        ):
            channel = load_channel(config.channel_path)
        return cls(
            pose_detector=_make_detector(config.pose_detector, "pose", channel),
            object_detector=_make_detector(config.object_detector, "object", channel),
            classifier=load_classifier(config.classifier),
            threshold=config.threshold,
            speed_domain=config.speed_domain,
        )

    def process_frame(self, frame: RawFrame, prev: RawFrame | None) -> FrameFeatures:
        pose, obj = run_detectors(frame, self.pose_detector, self.object_detector)
        rec = presence_record(frame, pose, obj)
        if not rec.present:
            return FrameFeatures(frame.timestamp, False)
        posture = self.classifier.classify(Skeleton.from_keypoints(rec.keypoints))
        motion = None
        if prev is not None:
            motion = motion_features(prev, frame, rec.bbox, threshold=self.threshold,
                                     speed_domain=self.speed_domain)
        return FrameFeatures(frame.timestamp, True, posture, motion)

    def run(self, frames: Iterable[RawFrame]) -> Iterator[FrameFeatures]:
        prev = None
        try:
            for frame in frames:
                self.max_live_frames = max(self.max_live_frames, 2 if prev is not None else 1)
                features = self.process_frame(frame, prev)
                if prev is not None:
                    prev.release()
                prev = frame
                yield features
        finally:
            if prev is not None:
                prev.release()


def run_simulation(sim, config: PipelineConfig | None = None) -> list[FrameFeatures]:
    """Convenience: run the pipeline over a simulator scenario in memory."""
    config = config or PipelineConfig()
    config = replace(config, frame_interval_ms=sim.config.frame_interval_ms,
                     tz_offset_minutes=sim.config.tz_offset_minutes)
    pipe = Pipeline.from_config(config, channel=sim.channel())
    return list(pipe.run(sim.frames()))
