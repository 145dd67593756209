"""Synthetic occupant scenarios with a ground-truth ledger.

A scenario is a list of days, each with a schedule of presence intervals
(posture, motion level, speed). Frames are emitted only while the occupant is
scheduled, plus ``margin_frames`` empty frames around each interval; long
empty stretches are skipped with a timestamp jump.

Rendering is deliberately crude: the occupant is a textured rectangle whose
size depends on posture, with a "limb" sub-rectangle. Motion level ``none``
keeps everything still, ``small`` slides the limb back and forth inside the
body, ``large`` slides the whole body. Every colour in the palette differs
from every other by more than 180 in summed |R|+|G|+|B|, so with pixel noise
amplitude <= 15 the default active-pixel threshold (90) separates real change
from noise exactly. That is what makes the ledger an exact oracle for
inactivity and movement scale.

Randomness: numpy's PCG64. Textures come from ``default_rng(seed)``; frame
noise and detector jitter for frame *i* from ``default_rng([seed, i, stream])``
so any frame can be regenerated on its own.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
import yaml

from ambientis.aggregation import (
    EPOCH, MS_PER_DAY, MS_PER_HOUR, MS_PER_MINUTE, PHASES, DailySummary, write_daily_csv,
)
from ambientis.errors import DataFormatError, InputError
from ambientis.frames import RawFrame, write_fixture
from ambientis.posture import Posture, skeleton_for

MOTION_LEVELS = ("none", "small", "large")
MAX_PIXEL_NOISE = 15

BACKGROUND = (20, 20, 20)
BODY_LEFT = (250, 40, 40)
BODY_RIGHT = (150, 90, 255)
BODY_FILL = ((170, 170, 170), (60, 200, 60))
LIMB_LEFT = (255, 255, 60)
LIMB_RIGHT = (60, 230, 255)
LIMB_FILL = ((255, 255, 255), LIMB_LEFT)
PALETTE = (BACKGROUND, BODY_LEFT, BODY_RIGHT, *BODY_FILL, LIMB_LEFT, LIMB_RIGHT, LIMB_FILL[0])

Rect = tuple[int, int, int, int]


class ScenarioError(DataFormatError):
    pass


@dataclass(frozen=True)
class ScheduleEntry:
    start_ms: int  # local time of day
    end_ms: int
    posture: Posture
    motion: str = "none"
    speed: int = 1

    def __post_init__(self):
        if not 0 <= self.start_ms < self.end_ms <= MS_PER_DAY:
            raise ScenarioError(f"bad interval {self.start_ms}..{self.end_ms} ms")
        if self.motion not in MOTION_LEVELS:
            raise ScenarioError(f"unknown motion level {self.motion!r}")
        if self.motion != "none" and self.speed < 1:
            raise ScenarioError("speed must be a positive whole number of px/frame")


@dataclass(frozen=True)
class DayPlan:
    phase: str
    entries: tuple[ScheduleEntry, ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    days: tuple[DayPlan, ...]
    start_date: dt.date = dt.date(2024, 1, 1)
    frame_interval_ms: int = 200
    tz_offset_minutes: int = 0
    width: int = 64
    height: int = 48
    occupant_size: tuple[int, int] = (14, 34)  # standing width, height
    probability_jitter: float = 0.0
    pixel_noise: int = 0
    margin_frames: int = 2
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        validate(self)


def validate(cfg: ScenarioConfig) -> None:
    if cfg.frame_interval_ms <= 0:
        raise ScenarioError("frame interval must be positive")
    if not 0 <= cfg.pixel_noise <= MAX_PIXEL_NOISE:
        raise ScenarioError(f"pixel noise must be within 0..{MAX_PIXEL_NOISE}")
    if cfg.probability_jitter < 0 or cfg.margin_frames < 0:
        raise ScenarioError("noise and margin must be non-negative")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ScenarioError("seed must be a 64-bit unsigned integer")
    for posture in Posture:
        bw, bh = body_size(cfg, posture)
        if bw < 6 or bh < 6:
            raise ScenarioError(f"{posture.value} body {bw}x{bh} too small")
        if bw + 2 * amplitude(cfg, bw) > cfg.width - 2 or bh > cfg.height - 2:
            raise ScenarioError(f"{posture.value} body {bw}x{bh} does not fit the frame")
    for i, day in enumerate(cfg.days):
        if day.phase not in PHASES:
            raise ScenarioError(f"day {i}: unknown phase {day.phase!r}")
        ends = sorted(day.entries, key=lambda e: e.start_ms)
        for a, b in zip(ends, ends[1:]):
            if b.start_ms < a.end_ms:
                raise ScenarioError(f"day {i}: overlapping schedule entries")


def body_size(cfg: ScenarioConfig, posture: Posture) -> tuple[int, int]:
    w, h = cfg.occupant_size
    if posture is Posture.STANDING:
        return w, h
    if posture is Posture.SITTING:
        return round(1.45 * w), round(0.7 * h)
    return round(2.2 * w), round(0.4 * h)


def amplitude(cfg: ScenarioConfig, body_w: int) -> int:
    """Half-range of the body's horizontal sway under ``large`` motion."""
    return max(1, min(8, (cfg.width - body_w) // 2 - 2))


def _tri(s: int, span: int) -> int:
    """Triangle wave over 0..span."""
    if span <= 0:
        return 0
    p = s % (2 * span)
    return p if p <= span else 2 * span - p


# -- per-frame geometry ---------------------------------------------------

@dataclass(frozen=True)
class OccupantState:
    posture: Posture
    body: Rect
    limb: Rect


def occupant_state(cfg: ScenarioConfig, entry: ScheduleEntry, k: int) -> OccupantState:
    """Geometry of the occupant on the k-th frame of ``entry``."""
    bw, bh = body_size(cfg, entry.posture)
    x = (cfg.width - bw) // 2
    y = cfg.height - 2 - bh
    lw, lh = max(2, bw // 3), max(2, bh // 5)
    span = bw - 2 - lw
    offset = span // 2
    if entry.motion == "large":
        r = amplitude(cfg, bw)
        x += _tri(k * entry.speed, 2 * r) - r
    elif entry.motion == "small":
        offset = _tri(k * entry.speed, span)
    limb = (x + 1 + offset, y + max(1, bh // 4), lw, lh)
    return OccupantState(entry.posture, (x, y, bw, bh), limb)


@dataclass(frozen=True)
class FrameTruth:
    index: int
    timestamp: int
    present: bool
    state: OccupantState | None = None
    has_motion: bool = False
    footprint: Rect | None = None  # bbox of pixels that really changed, inside the body
    displacement: tuple[int, int] | None = None  # of whichever part moved
    moving_area: int = 0

    @property
    def posture(self) -> Posture | None:
        return None if self.state is None else self.state.posture

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "present": self.present,
            "posture": None if self.state is None else self.state.posture.value,
            "body": None if self.state is None else list(self.state.body),
            "has_motion": self.has_motion,
            "footprint": None if self.footprint is None else list(self.footprint),
            "displacement": None if self.displacement is None else list(self.displacement),
            "moving_area": self.moving_area,
        }


def _union(a: Rect, b: Rect) -> Rect:
    x0, y0 = min(a[0], b[0]), min(a[1], b[1])
    x1, y1 = max(a[0] + a[2], b[0] + b[2]), max(a[1] + a[3], b[1] + b[3])
    return (x0, y0, x1 - x0, y1 - y0)


# -- rendering ------------------------------------------------------------

class _Renderer:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        rng = np.random.default_rng(cfg.seed)
        self.body_tex = {}
        self.limb_tex = {}
        for posture in Posture:
            bw, bh = body_size(cfg, posture)
            tex = np.array(BODY_FILL, np.uint8)[rng.integers(0, 2, (bh, bw))]
            tex[:, 0] = BODY_LEFT
            tex[:, -1] = BODY_RIGHT
            self.body_tex[posture] = tex
            lw, lh = max(2, bw // 3), max(2, bh // 5)
            ltex = np.array(LIMB_FILL, np.uint8)[rng.integers(0, 2, (lh, lw))]
            ltex[:, 0] = LIMB_LEFT
            ltex[:, -1] = LIMB_RIGHT
            self.limb_tex[posture] = ltex

    def clean(self, state: OccupantState | None) -> np.ndarray:
        img = np.empty((self.cfg.height, self.cfg.width, 3), np.uint8)
        img[:] = BACKGROUND
        if state is not None:
            x, y, w, h = state.body
            img[y:y + h, x:x + w] = self.body_tex[state.posture]
            lx, ly, lw, lh = state.limb
            img[ly:ly + lh, lx:lx + lw] = self.limb_tex[state.posture]
        return img

    def frame(self, truth: FrameTruth) -> RawFrame:
        img = self.clean(truth.state)
        a = self.cfg.pixel_noise
        if a:
            rng = np.random.default_rng([self.cfg.seed, truth.index, 0])
            noise = rng.integers(-a, a + 1, img.shape, dtype=np.int16)
            img = np.clip(img.astype(np.int16) + noise, 0, 255).astype(np.uint8)
        return RawFrame(truth.timestamp, self.cfg.width, self.cfg.height, img)


def _diff_bbox(a: np.ndarray, b: np.ndarray, within: Rect) -> Rect | None:
    x, y, w, h = within
    changed = np.any(a[y:y + h, x:x + w] != b[y:y + h, x:x + w], axis=2)
    if not changed.any():
        return None
    rows = np.flatnonzero(changed.any(axis=1))
    cols = np.flatnonzero(changed.any(axis=0))
    return (x + int(cols[0]), y + int(rows[0]), int(cols[-1] - cols[0]) + 1, int(rows[-1] - rows[0]) + 1)


# -- ledger ---------------------------------------------------------------

@dataclass
class GroundTruthLedger:
    frame_interval_ms: int
    tz_offset_minutes: int
    day_phases: dict[dt.date, str]
    frames: list[FrameTruth] = field(default_factory=list)

    def local_slot(self, timestamp: int) -> tuple[dt.date, int]:
        local = timestamp + self.tz_offset_minutes * MS_PER_MINUTE
        return EPOCH + dt.timedelta(days=local // MS_PER_DAY), (local % MS_PER_DAY) // MS_PER_HOUR

    def presence_minutes(self) -> dict[tuple[dt.date, int], float]:
        out: dict[tuple[dt.date, int], float] = {}
        for f in self.frames:
            if f.present:
                key = self.local_slot(f.timestamp)
                out[key] = out.get(key, 0.0) + self.frame_interval_ms / MS_PER_MINUTE
        return out

    def transitions(self, date: dt.date) -> int:
        """Presence on/off switches seen within ``date``."""
        n, prev = 0, False
        for f in self.frames:
            if self.local_slot(f.timestamp)[0] != date:
                continue
            n += f.present != prev
            prev = f.present
        return n + prev


def _build_ledger(cfg: ScenarioConfig, renderer: _Renderer) -> GroundTruthLedger:
    interval = cfg.frame_interval_ms
    day_phases = {}
    timeline: list[tuple[int, ScheduleEntry | None, int]] = []
    for d, day in enumerate(cfg.days):
        date = cfg.start_date + dt.timedelta(days=d)
        day_phases[date] = day.phase
        base = (date - EPOCH).days * MS_PER_DAY - cfg.tz_offset_minutes * MS_PER_MINUTE
        entries = sorted(day.entries, key=lambda e: e.start_ms)
        slots: dict[int, tuple[ScheduleEntry | None, int]] = {}
        for e in entries:
            n = math.ceil((e.end_ms - e.start_ms) / interval)
            for k in range(n):
                slots[e.start_ms + k * interval] = (e, k)
        for e in entries:
            last = e.start_ms + (math.ceil((e.end_ms - e.start_ms) / interval) - 1) * interval
            for j in range(1, cfg.margin_frames + 1):
                for t in (e.start_ms - j * interval, last + j * interval):
                    if 0 <= t < MS_PER_DAY and t not in slots and not any(
                        x.start_ms <= t < x.end_ms for x in entries
                    ):
                        slots[t] = (None, 0)
        for t in sorted(slots):
            timeline.append((base + t, *slots[t]))

    ledger = GroundTruthLedger(interval, cfg.tz_offset_minutes, day_phases)
    prev: FrameTruth | None = None
    for index, (ts, entry, k) in enumerate(timeline):
        if entry is None:
            truth = FrameTruth(index, ts, False)
        else:
            state = occupant_state(cfg, entry, k)
            truth = FrameTruth(index, ts, True, state, **_motion_truth(prev, state, renderer))
        ledger.frames.append(truth)
        prev = truth
    return ledger


def _motion_truth(prev: FrameTruth | None, cur: OccupantState, renderer: _Renderer) -> dict:
    if prev is None:
        return {}
    body_area = cur.body[2] * cur.body[3]
    if not prev.present:
        return {"has_motion": True, "footprint": cur.body}
    old = prev.state
    if old.posture is cur.posture:
        if old.body != cur.body:
            dx = cur.body[0] - old.body[0]
            return {"has_motion": True, "footprint": cur.body,
                    "displacement": (dx, 0), "moving_area": body_area}
        if old.limb != cur.limb:
            dx = cur.limb[0] - old.limb[0]
            return {"has_motion": True, "footprint": _union(old.limb, cur.limb),
                    "displacement": (dx, 0), "moving_area": cur.limb[2] * cur.limb[3]}
        return {"has_motion": True, "displacement": (0, 0)}
    # posture switch without leaving the view: compare clean renders
    fp = _diff_bbox(renderer.clean(old), renderer.clean(cur), cur.body)
    return {"has_motion": True, "footprint": fp}


class Simulation:
    """A generated scenario: lazy frames, detection channel and ledger."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self._renderer = _Renderer(config)
        self.ledger = _build_ledger(config, self._renderer)

    def __len__(self) -> int:
        return len(self.ledger.frames)

    def frames(self) -> Iterator[RawFrame]:
        for truth in self.ledger.frames:
            yield self._renderer.frame(truth)

    def day_phases(self) -> dict[dt.date, str]:
        return dict(self.ledger.day_phases)

    def channel(self) -> dict[int, dict]:
        return {f.timestamp: self.channel_record(f) for f in self.ledger.frames}

    def channel_record(self, truth: FrameTruth) -> dict:
        sigma = self.config.probability_jitter
        jitter = (0.0, 0.0)
        if sigma > 0:
            rng = np.random.default_rng([self.config.seed, truth.index, 1])
            jitter = tuple(abs(float(v)) for v in rng.normal(0.0, sigma, 2))
        if truth.present:
            p_pose, p_obj = (max(0.0, 1.0 - j) for j in jitter)
            skel = skeleton_for(truth.state.posture, truth.state.body)
            keypoints = [[j, round(x, 3), round(y, 3), round(c, 3)] for j, (x, y, c) in skel.joints.items()]
            bbox = list(truth.state.body)
        else:
            p_pose, p_obj = (min(1.0, j) for j in jitter)
            keypoints = bbox = None
        return {"timestamp": truth.timestamp, "p_pose": p_pose, "p_obj": p_obj,
                "bbox": bbox, "keypoints": keypoints}


def generate(config: ScenarioConfig) -> Simulation:
    return Simulation(config)


# -- oracle ---------------------------------------------------------------

def oracle_summaries(ledger: GroundTruthLedger) -> list[DailySummary]:
    """Daily summaries computed straight from per-frame truth."""
    minutes_per_frame = ledger.frame_interval_ms / MS_PER_MINUTE
    out = []
    for date in sorted(ledger.day_phases):
        profile = [0.0] * 24
        present = sitting = standing = other = moving = inactive = frames = 0
        scale = speed = 0.0
        for f in ledger.frames:
            d, hour = ledger.local_slot(f.timestamp)
            if d != date:
                continue
            frames += 1
            if not f.present:
                continue
            present += 1
            profile[hour] += minutes_per_frame
            sitting += f.posture is Posture.SITTING
            standing += f.posture is Posture.STANDING
            other += f.posture is Posture.OTHER
            if f.has_motion:
                moving += 1
                body = f.state.body
                if f.footprint is None:
                    inactive += 1
                else:
                    scale += f.footprint[2] * f.footprint[3] / (body[2] * body[3])
                if f.displacement is not None:
                    speed += math.hypot(*f.displacement) * f.moving_area / (body[2] * body[3])
        out.append(DailySummary(
            date=date, phase=ledger.day_phases[date],
            appearance_minutes=present * minutes_per_frame, profile=tuple(profile),
            sitting_ratio=sitting / present if present else None,
            standing_ratio=standing / present if present else None,
            other_ratio=other / present if present else None,
            inactivity_ratio=inactive / moving if moving else None,
            mean_movement_scale=scale / moving if moving else None,
            mean_movement_speed=speed / moving if moving else None,
            n_frames=frames, n_present=present, n_classified=present, n_motion=moving,
        ))
    return out


# -- scenario files -------------------------------------------------------

_TIME = re.compile(r"^(\d{1,2}):(\d{2})(?::(\d{2})(?:\.(\d{1,3}))?)?$")


def parse_time(text) -> int:
    """'HH:MM[:SS[.mmm]]' -> ms after midnight; '24:00' is allowed as an end."""
    m = _TIME.match(str(text).strip())
    if not m:
        raise ScenarioError(f"bad time of day {text!r}")
    h, mi, s, ms = int(m[1]), int(m[2]), int(m[3] or 0), int((m[4] or "0").ljust(3, "0"))
    if mi > 59 or s > 59 or h > 24 or (h == 24 and (mi or s or ms)):
        raise ScenarioError(f"bad time of day {text!r}")
    return ((h * 60 + mi) * 60 + s) * 1000 + ms


def _entry(raw: dict) -> tuple[ScheduleEntry, list[int] | None]:
    try:
        entry = ScheduleEntry(
            start_ms=parse_time(raw["start"]), end_ms=parse_time(raw["end"]),
            posture=Posture(raw.get("posture", "standing")),
            motion=raw.get("motion", "none"), speed=int(raw.get("speed", 1)),
        )
    except KeyError as exc:
        raise ScenarioError(f"schedule entry missing {exc}") from None
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    days = raw.get("days")
    return entry, None if days is None else [int(d) for d in days]


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from the scenario file structure (see README)."""
    if not isinstance(doc, dict) or "phases" not in doc:
        raise ScenarioError("scenario needs a 'phases' list")
    days: list[DayPlan] = []
    for block in doc["phases"]:
        phase = str(block.get("phase", "")).lower()
        n = int(block.get("days", 1))
        per_day: list[list[ScheduleEntry]] = [[] for _ in range(n)]
        for raw in block.get("schedule", []) or []:
            entry, only = _entry(raw)
            for i in range(n) if only is None else only:
                if not 0 <= i < n:
                    raise ScenarioError(f"day index {i} outside phase of {n} days")
                per_day[i].append(entry)
        days.extend(DayPlan(phase, tuple(es)) for es in per_day)
    frame = doc.get("frame", {}) or {}
    occ = doc.get("occupant", {}) or {}
    noise = doc.get("noise", {}) or {}
    try:
        start = doc.get("start_date", "2024-01-01")
        start = start if isinstance(start, dt.date) else dt.date.fromisoformat(str(start))
        return ScenarioConfig(
            days=tuple(days), start_date=start,
            frame_interval_ms=int(doc.get("frame_interval_ms", 200)),
            tz_offset_minutes=int(doc.get("timezone_offset_minutes", 0)),
            width=int(frame.get("width", 64)), height=int(frame.get("height", 48)),
            occupant_size=(int(occ.get("width", 14)), int(occ.get("height", 34))),
            probability_jitter=float(noise.get("probability_jitter", 0.0)),
            pixel_noise=int(noise.get("pixel_amplitude", 0)),
            margin_frames=int(doc.get("margin_frames", 2)),
            seed=int(doc.get("seed", 0)),
            name=str(doc.get("name", "scenario")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from None


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return config_from_dict(doc)


PRESET_DIR = Path(__file__).with_name("presets")


def preset_path(name: str) -> Path:
    path = PRESET_DIR / (name if name.endswith(".scn") else f"{name}.scn")
    if not path.exists():
        raise InputError(f"no preset {name!r}")
    return path


def resolve_scenario(source: str | Path) -> ScenarioConfig:
    """A scenario file path, or the name of a shipped preset."""
    p = Path(source)
    if p.exists():
        return load_scenario(p)
    if not p.suffix or p.parent == Path("."):
        candidate = PRESET_DIR / (p.name if p.suffix else f"{p.name}.scn")
        if candidate.exists():
            return load_scenario(candidate)
    raise InputError(f"scenario file not found: {source}")


# -- canned scenario families ----------------------------------------------

def random_scenario(seed: int, max_days: int = 8, frame_interval_ms: int = 200) -> ScenarioConfig:
    """Short randomized schedules exercising every posture and motion level."""
    rng = np.random.default_rng([seed, 42])
    n_days = int(rng.integers(1, max_days + 1))
    days = []
    for d in range(n_days):
        entries = []
        t = int(rng.integers(0, 22)) * MS_PER_HOUR + int(rng.integers(0, 50)) * MS_PER_MINUTE
        for _ in range(int(rng.integers(0, 4))):
            length = int(rng.integers(4, 25)) * 1000
            if t + length > MS_PER_DAY:
                break
            entries.append(ScheduleEntry(
                t, t + length,
                posture=list(Posture)[int(rng.integers(0, 3))],
                motion=MOTION_LEVELS[int(rng.integers(0, 3))],
                speed=int(rng.integers(1, 3)),
            ))
            # sometimes contiguous (posture switch in view), sometimes a gap across an hour
            gap = 0 if rng.random() < 0.3 else int(rng.integers(1, 90)) * MS_PER_MINUTE
            t += length + gap
        days.append(DayPlan(PHASES[int(d >= n_days / 2)], tuple(entries)))
    return ScenarioConfig(
        days=tuple(days),
        start_date=dt.date(2024, 3, 4) + dt.timedelta(days=int(rng.integers(0, 7))),
        frame_interval_ms=frame_interval_ms,
        tz_offset_minutes=int(rng.integers(-8, 9)) * 60,
        pixel_noise=int(rng.integers(0, MAX_PIXEL_NOISE + 1)),
        margin_frames=int(rng.integers(1, 4)),
        seed=seed, name=f"random-{seed}",
    )


def inactivity_shift_scenario(seed: int, effect_size: float, n_days: int = 8,
                              frames_per_day: int = 200, base: float = 0.35,
                              day_sd: float = 0.1, diff_sd: float = 0.06) -> ScenarioConfig:
    """Baseline vs intervention days with an injected inactivity shift.

    Each day is one visit: a ``small``-motion stretch followed by a still
    stretch whose share of the visit is the day's target inactivity. Paired
    targets differ by ``effect_size * diff_sd`` on average with standard
    deviation ``diff_sd``, i.e. ``effect_size`` is Cohen's d of the paired
    differences.
    """
    rng = np.random.default_rng([seed, 7])
    shift = effect_size * diff_sd
    normal = np.clip(base + rng.normal(0.0, day_sd, n_days), 0.05, 0.95)
    interv = np.clip(normal + shift + rng.normal(0.0, diff_sd, n_days), 0.05, 0.95)
    interval = 1000
    start = 10 * MS_PER_HOUR

    def day(phase: str, share: float) -> DayPlan:
        still = int(round(share * frames_per_day))
        split = start + (frames_per_day - still) * interval
        end = start + frames_per_day * interval
        entries = [ScheduleEntry(start, split, Posture.SITTING, "small", 1)] if split > start else []
        if still:
            entries.append(ScheduleEntry(split, end, Posture.SITTING, "none"))
        return DayPlan(phase, tuple(entries))

    days = [day("normal", s) for s in normal] + [day("intervention", s) for s in interv]
    return ScenarioConfig(days=tuple(days), start_date=dt.date(2024, 3, 4),
                          frame_interval_ms=interval, seed=seed, name=f"inactivity-shift-{seed}")


# -- bundle output --------------------------------------------------------

def write_bundle(sim: Simulation, out_dir: str | Path) -> dict[str, Path]:
    """Fixture, detection channel, ledger, day labels, oracle summaries and a run config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "fixture": out / "fixture.ambf",
        "channel": out / "channel.jsonl",
        "ledger": out / "ledger.jsonl",
        "days": out / "days.csv",
        "oracle": out / "oracle_daily.csv",
        "config": out / "pipeline.yaml",
    }
    write_fixture(paths["fixture"], sim.frames())
    with open(paths["channel"], "w") as fh:
        for truth in sim.ledger.frames:
            fh.write(json.dumps(sim.channel_record(truth), separators=(",", ":")) + "\n")
    with open(paths["ledger"], "w") as fh:
        for truth in sim.ledger.frames:
            fh.write(json.dumps(truth.to_dict(), separators=(",", ":")) + "\n")
    with open(paths["days"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "phase"])
        for date, phase in sorted(sim.day_phases().items()):
            w.writerow([date.isoformat(), phase])
    with open(paths["oracle"], "w") as fh:
        write_daily_csv(oracle_summaries(sim.ledger), fh)
    cfg = sim.config
    run_config = {
        "stream": {"frame_interval_ms": cfg.frame_interval_ms,
                   "timezone_offset_minutes": cfg.tz_offset_minutes,
                   "room": cfg.name},
        "detectors": {"pose": "scenario", "object": "scenario", "channel": "channel.jsonl"},
        "classifier": "geometric-baseline",
        "motion": {"threshold": 90, "speed_domain": "bbox"},
    }
    paths["config"].write_text(yaml.safe_dump(run_config, sort_keys=False))
    return paths


def read_day_phases(path: str | Path) -> dict[dt.date, str]:
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    out = {}
    with fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, 2):
            try:
                phase = row["phase"].strip().lower()
                if phase not in PHASES:
                    raise ValueError(f"unknown phase {row['phase']!r}")
                out[dt.date.fromisoformat(row["date"])] = phase
            except (KeyError, ValueError, AttributeError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return out
