"""Frame features -> hourly aggregates -> daily summaries.

Hour and day boundaries are local wall-clock time (UTC timestamp plus a
fixed offset; no DST). Ratios are conditioned on presence: posture ratios
over present frames that received a posture label, inactivity/scale/speed
over present frames that have motion features. Hours without presence add
zero minutes to the profile and nothing to the ratios.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from ambientis.errors import DataFormatError, InputError
from ambientis.motion import MotionFeatures
from ambientis.posture import Posture, PostureLabel

MS_PER_MINUTE = 60_000
MS_PER_HOUR = 3_600_000
MS_PER_DAY = 86_400_000
EPOCH = dt.date(1970, 1, 1)
PHASES = ("normal", "intervention")

HOURLY_HEADER = [
    "date", "hour", "presence_minutes",
    "sitting_ratio", "standing_ratio", "other_ratio",
    "inactivity_ratio", "mean_movement_scale", "mean_movement_speed",
    "n_frames", "n_present", "n_classified", "n_motion",
]
PROFILE_COLUMNS = [f"h{h:02d}" for h in range(24)]
DAILY_HEADER = [
    "date", "weekday", "phase", "appearance_minutes",
    "sitting_ratio", "standing_ratio", "other_ratio",
    "inactivity_ratio", "mean_movement_scale", "mean_movement_speed",
    "n_frames", "n_present", "n_classified", "n_motion",
    *PROFILE_COLUMNS,
]
FEATURE_KEYS = ("timestamp", "present", "posture", "motion")


@dataclass(frozen=True)
class FrameFeatures:
    timestamp: int
    present: bool
    posture: PostureLabel | None = None
    motion: MotionFeatures | None = None

    def __post_init__(self):
        if not self.present and (self.posture is not None or self.motion is not None):
            raise ValueError("posture/motion require presence")

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "present": self.present,
            "posture": None if self.posture is None else {
                "label": self.posture.label.value,
                "confidence": round(self.posture.confidence, 6),
            },
            "motion": None if self.motion is None else {
                "inactive": self.motion.inactive,
                "movement_scale": self.motion.movement_scale,
                "movement_speed": round(self.motion.movement_speed, 6),
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FrameFeatures":
        if set(d) != set(FEATURE_KEYS):
            raise ValueError(f"expected keys {FEATURE_KEYS}, got {sorted(d)}")
        posture = motion = None
        if d["posture"] is not None:
            p = d["posture"]
            posture = PostureLabel(Posture(p["label"]), float(p["confidence"]))
        if d["motion"] is not None:
            m = d["motion"]
            motion = MotionFeatures(bool(m["inactive"]), float(m["movement_scale"]),
                                    float(m["movement_speed"]))
        if not isinstance(d["present"], bool):
            raise ValueError("present must be a boolean")
        return cls(int(d["timestamp"]), d["present"], posture, motion)


def write_features(features: Iterable[FrameFeatures], fh: IO[str]) -> int:
    n = 0
    for f in features:
        fh.write(json.dumps(f.to_dict(), separators=(",", ":")) + "\n")
        n += 1
    return n


def read_features(path: str | Path) -> Iterator[FrameFeatures]:
    """Stream FrameFeatures from JSONL; malformed lines raise DataFormatError with the line number."""
    path = Path(path)
    try:
        fh = open(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield FrameFeatures.from_dict(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed feature record: {exc}") from exc


def local_slot(timestamp_ms: int, tz_offset_minutes: int = 0) -> tuple[dt.date, int]:
    local = timestamp_ms + tz_offset_minutes * MS_PER_MINUTE
    day, rem = divmod(local, MS_PER_DAY)
    return EPOCH + dt.timedelta(days=day), rem // MS_PER_HOUR


@dataclass(frozen=True)
class HourlyAggregate:
    date: dt.date
    hour: int
    presence_minutes: float
    sitting_ratio: float | None
    standing_ratio: float | None
    other_ratio: float | None
    inactivity_ratio: float | None
    mean_movement_scale: float | None
    mean_movement_speed: float | None
    n_frames: int = 0
    n_present: int = 0
    n_classified: int = 0
    n_motion: int = 0

    @classmethod
    def empty(cls, date: dt.date, hour: int) -> "HourlyAggregate":
        return cls(date, hour, 0.0, None, None, None, None, None, None)


@dataclass(frozen=True)
class DailySummary:
    date: dt.date
    phase: str
    appearance_minutes: float
    profile: tuple[float, ...]
    sitting_ratio: float | None
    standing_ratio: float | None
    other_ratio: float | None
    inactivity_ratio: float | None
    mean_movement_scale: float | None
    mean_movement_speed: float | None
    n_frames: int = 0
    n_present: int = 0
    n_classified: int = 0
    n_motion: int = 0

    @property
    def weekday(self) -> int:
        return self.date.weekday()


@dataclass
class _Counts:
    frames: int = 0
    present: int = 0
    classified: int = 0
    sitting: int = 0
    standing: int = 0
    other: int = 0
    motion: int = 0
    inactive: int = 0
    scale_sum: float = 0.0
    speed_sum: float = 0.0

    def add(self, f: FrameFeatures) -> None:
        self.frames += 1
        if not f.present:
            return
        self.present += 1
        if f.posture is not None:
            self.classified += 1
            if f.posture.label is Posture.SITTING:
                self.sitting += 1
            elif f.posture.label is Posture.STANDING:
                self.standing += 1
            else:
                self.other += 1
        if f.motion is not None:
            self.motion += 1
            self.inactive += f.motion.inactive
            self.scale_sum += f.motion.movement_scale
            self.speed_sum += f.motion.movement_speed

    def merge(self, other: "_Counts") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def ratios(self) -> dict:
        c, m = self.classified, self.motion
        return {
            "sitting_ratio": self.sitting / c if c else None,
            "standing_ratio": self.standing / c if c else None,
            "other_ratio": self.other / c if c else None,
            "inactivity_ratio": self.inactive / m if m else None,
            "mean_movement_scale": self.scale_sum / m if m else None,
            "mean_movement_speed": self.speed_sum / m if m else None,
        }

    def to_hour(self, date: dt.date, hour: int, frame_interval_ms: int) -> HourlyAggregate:
        return HourlyAggregate(
            date=date, hour=hour,
            presence_minutes=self.present * frame_interval_ms / MS_PER_MINUTE,
            n_frames=self.frames, n_present=self.present,
            n_classified=self.classified, n_motion=self.motion,
            **self.ratios(),
        )

    @classmethod
    def from_hour(cls, h: HourlyAggregate) -> "_Counts":
        # Recover numerators from ratio x denominator; exact up to float rounding.
        c, m = h.n_classified, h.n_motion
        return cls(
            frames=h.n_frames, present=h.n_present, classified=c,
            sitting=round((h.sitting_ratio or 0.0) * c),
            standing=round((h.standing_ratio or 0.0) * c),
            other=round((h.other_ratio or 0.0) * c),
            motion=m, inactive=round((h.inactivity_ratio or 0.0) * m),
            scale_sum=(h.mean_movement_scale or 0.0) * m,
            speed_sum=(h.mean_movement_speed or 0.0) * m,
        )


def frames_to_hour(features: Sequence[FrameFeatures], frame_interval_ms: int,
                   tz_offset_minutes: int = 0, slot: tuple[dt.date, int] | None = None) -> HourlyAggregate:
    """Aggregate features that all fall inside one local hour.

    ``slot`` names the (date, hour) explicitly; it is required for an empty hour.
    """
    counts = _Counts()
    for f in features:
        s = local_slot(f.timestamp, tz_offset_minutes)
        if slot is None:
            slot = s
        elif s != slot:
            raise ValueError(f"features span several hours: {slot} and {s}")
        counts.add(f)
    if slot is None:
        raise ValueError("empty hour needs an explicit slot")
    return counts.to_hour(slot[0], slot[1], frame_interval_ms)


def hours_to_day(hours: Sequence[HourlyAggregate], phase: str) -> DailySummary:
    phase = check_phase(phase)
    if len(hours) != 24:
        raise ValueError(f"need exactly 24 hourly aggregates, got {len(hours)}")
    dates = {h.date for h in hours}
    if len(dates) != 1:
        raise ValueError(f"hourly aggregates span several dates: {sorted(dates)}")
    by_hour = {h.hour: h for h in hours}
    if sorted(by_hour) != list(range(24)):
        missing = sorted(set(range(24)) - set(by_hour))
        raise ValueError(f"missing or duplicate hours (missing {missing})")
    total = _Counts()
    for h in hours:
        total.merge(_Counts.from_hour(h))
    profile = tuple(by_hour[i].presence_minutes for i in range(24))
    return DailySummary(
        date=dates.pop(), phase=phase,
        appearance_minutes=sum(profile), profile=profile,
        n_frames=total.frames, n_present=total.present,
        n_classified=total.classified, n_motion=total.motion,
        **total.ratios(),
    )


def check_phase(phase: str) -> str:
    p = phase.strip().lower()
    if p not in PHASES:
        raise ValueError(f"unknown phase {phase!r}; expected one of {PHASES}")
    return p


@dataclass
class Aggregator:
    """Streaming fold of FrameFeatures into per-(date, hour) counters."""

    frame_interval_ms: int
    tz_offset_minutes: int = 0
    _slots: dict = field(default_factory=dict)

    def add(self, f: FrameFeatures) -> None:
        key = local_slot(f.timestamp, self.tz_offset_minutes)
        counts = self._slots.get(key)
        if counts is None:
            counts = self._slots[key] = _Counts()
        counts.add(f)

    def extend(self, features: Iterable[FrameFeatures]) -> "Aggregator":
        for f in features:
            self.add(f)
        return self

    def dates(self) -> list[dt.date]:
        return sorted({d for d, _ in self._slots})

    def hours(self, date: dt.date) -> list[HourlyAggregate]:
        return [
            self._slots[(date, h)].to_hour(date, h, self.frame_interval_ms)
            if (date, h) in self._slots else HourlyAggregate.empty(date, h)
            for h in range(24)
        ]

    def summarize(self, day_phases: Mapping[dt.date, str] | None = None,
                  default_phase: str = "normal") -> tuple[list[HourlyAggregate], list[DailySummary]]:
        """Hourly rows and daily summaries.

        With ``day_phases``, exactly those dates are reported (days without
        frames come out empty) and frames on unlisted dates are dropped.
        """
        seen = set(self.dates())
        if day_phases is None:
            plan = {d: default_phase for d in seen}
        else:
            plan = dict(day_phases)
            dropped = sorted(seen - set(plan))
            if dropped:
                warnings.warn(f"dropping {len(dropped)} unlabelled day(s): "
                              f"{', '.join(map(str, dropped))}", stacklevel=2)
        hourly, daily = [], []
        for date in sorted(plan):
            hours = self.hours(date)
            hourly.extend(hours)
            daily.append(hours_to_day(hours, plan[date]))
        return hourly, daily


def aggregate_features(features: Iterable[FrameFeatures], frame_interval_ms: int,
                       tz_offset_minutes: int = 0, day_phases: Mapping[dt.date, str] | None = None,
                       default_phase: str = "normal") -> tuple[list[HourlyAggregate], list[DailySummary]]:
    agg = Aggregator(frame_interval_ms, tz_offset_minutes).extend(features)
    return agg.summarize(day_phases, default_phase)


def filter_min_frames(days: Iterable[DailySummary], min_frames: int) -> list[DailySummary]:
    """Drop days observed for fewer than ``min_frames`` frames (partial monitoring)."""
    return [d for d in days if d.n_frames >= min_frames]


def mean_hourly_profile(days: Sequence[DailySummary]) -> list[float]:
    if not days:
        raise ValueError("no days to average")
    return [sum(d.profile[h] for d in days) / len(days) for h in range(24)]


def band_change(profile_a: Sequence[float], profile_b: Sequence[float],
                band: tuple[int, int]) -> float:
    """Percent reduction of ``profile_b`` against ``profile_a`` over an inclusive hour band.

    Positive means less time in ``b``; e.g. a band total of 100 min falling
    to 18.7 min gives 81.3.
    """
    lo, hi = band
    if not 0 <= lo <= hi <= 23:
        raise ValueError(f"bad hour band {band}")
    a = sum(profile_a[lo:hi + 1])
    b = sum(profile_b[lo:hi + 1])
    if a <= 0:
        raise ValueError("baseline band total is zero")
    return (a - b) / a * 100.0


# -- CSV ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_hourly_csv(rows: Iterable[HourlyAggregate], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HOURLY_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) if k != "date" else r.date.isoformat() for k in HOURLY_HEADER])


def daily_row(d: DailySummary) -> list[str]:
    row = []
    for k in DAILY_HEADER:
        if k == "date":
            row.append(d.date.isoformat())
        elif k == "weekday":
            row.append(d.date.strftime("%a"))
        elif k.startswith("h") and k in PROFILE_COLUMNS:
            row.append(_fmt(d.profile[int(k[1:])]))
        else:
            row.append(_fmt(getattr(d, k)))
    return row


def write_daily_csv(days: Iterable[DailySummary], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(DAILY_HEADER)
    for d in days:
        w.writerow(daily_row(d))


def _opt(s: str) -> float | None:
    return None if s == "" else float(s)


def read_daily_csv(path: str | Path) -> list[DailySummary]:
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    days = []
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != DAILY_HEADER:
            raise DataFormatError(f"{path}: header does not match the daily summary schema")
        for lineno, r in enumerate(reader, 2):
            try:
                days.append(DailySummary(
                    date=dt.date.fromisoformat(r["date"]),
                    phase=check_phase(r["phase"]),
                    appearance_minutes=float(r["appearance_minutes"]),
                    profile=tuple(float(r[c]) for c in PROFILE_COLUMNS),
                    sitting_ratio=_opt(r["sitting_ratio"]),
                    standing_ratio=_opt(r["standing_ratio"]),
                    other_ratio=_opt(r["other_ratio"]),
                    inactivity_ratio=_opt(r["inactivity_ratio"]),
                    mean_movement_scale=_opt(r["mean_movement_scale"]),
                    mean_movement_speed=_opt(r["mean_movement_speed"]),
                    n_frames=int(r["n_frames"]), n_present=int(r["n_present"]),
                    n_classified=int(r["n_classified"]), n_motion=int(r["n_motion"]),
                ))
            except (ValueError, TypeError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return days
