from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

from ambientis.frames import RawFrame
from ambientis.posture import Posture
from ambientis.simulator import DayPlan, ScenarioConfig, ScheduleEntry

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_frame(rgb: np.ndarray, ts: int = 0, depth=None) -> RawFrame:
    h, w = rgb.shape[:2]
    return RawFrame(ts, w, h, rgb, depth)


def blank(w: int = 64, h: int = 48, value: int = 0) -> np.ndarray:
    return np.full((h, w, 3), value, dtype=np.uint8)


def textured(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    """Smooth random texture, good conditioning for optical flow."""
    from scipy import ndimage
    noise = rng.uniform(0, 255, (h, w))
    smooth = ndimage.gaussian_filter(noise, 2.0, mode="wrap")
    smooth = (smooth - smooth.min()) / (np.ptp(smooth) + 1e-9) * 230 + 10
    return np.repeat(smooth[..., None], 3, axis=2).astype(np.uint8)


def hm(h: int, m: int = 0, s: int = 0) -> int:
    return ((h * 60 + m) * 60 + s) * 1000


def simple_config(entries, n_days: int = 1, phases=None, **kw) -> ScenarioConfig:
    phases = phases or ["normal"] * n_days
    days = tuple(DayPlan(p, tuple(entries)) for p in phases)
    kw.setdefault("start_date", dt.date(2024, 3, 4))
    return ScenarioConfig(days=days, **kw)


def entry(start: int, end: int, posture: Posture = Posture.STANDING, motion: str = "none",
          speed: int = 1) -> ScheduleEntry:
    return ScheduleEntry(start, end, posture, motion, speed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
