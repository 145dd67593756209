"""Frame ingest: timestamped frame streams and the privacy boundary.

A :class:`RawFrame` only ever lives in memory. It refuses to be pickled or
copied, and :func:`release_frame` zero-fills its buffers so nothing downstream
can read pixels after features have been extracted.

Recorded fixtures use a small length-prefixed binary layout::

    b"AMBF"
    repeated: u64 timestamp_ms, u16 width, u16 height, u8 has_depth,
              rgb (width*height*3 bytes), [depth (width*height u16)]

All integers are little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, BinaryIO, Iterable, Iterator

import numpy as np

from ambientis.errors import AmbientisError, DataFormatError, InputError

MAGIC = b"AMBF"
_HEADER = struct.Struct("<QHHB")

DEFAULT_FRAME_INTERVAL_MS = 200  # 5 fps


class ReleasedFrameError(AmbientisError):
    pass


class RawFrame:
    """One camera sample. Never serialized, never persisted."""

    __slots__ = ("timestamp", "width", "height", "_rgb", "_depth")

    def __init__(self, timestamp: int, width: int, height: int, rgb, depth=None):
        if width <= 0 or height <= 0:
            raise ValueError(f"bad frame size {width}x{height}")
        rgb_arr = np.array(rgb, dtype=np.uint8, copy=True)
        if rgb_arr.size != width * height * 3:
            raise ValueError(
                f"rgb buffer holds {rgb_arr.size} values, expected {width * height * 3}"
            )
        depth_arr = None
        if depth is not None:
            depth_arr = np.array(depth, dtype=np.uint16, copy=True)
            if depth_arr.size != width * height:
                raise ValueError(
                    f"depth buffer holds {depth_arr.size} values, expected {width * height}"
                )
            depth_arr = depth_arr.reshape(height, width)
        self.timestamp = int(timestamp)
        self.width = int(width)
        self.height = int(height)
        self._rgb = rgb_arr.reshape(height, width, 3)
        self._depth = depth_arr

    @property
    def rgb(self) -> np.ndarray:
        """(height, width, 3) uint8 view of the pixels."""
        if self._rgb is None:
            raise ReleasedFrameError(f"frame {self.timestamp} has been released")
        return self._rgb

    @property
    def depth(self) -> np.ndarray | None:
        if self._rgb is None:
            raise ReleasedFrameError(f"frame {self.timestamp} has been released")
        return self._depth

    @property
    def has_depth(self) -> bool:
        return self._depth is not None

    @property
    def released(self) -> bool:
        return self._rgb is None

    def release(self) -> None:
        if self._rgb is None:
            return
        # Zero in place so views handed out earlier become useless too.
        self._rgb.fill(0)
        if self._depth is not None:
            self._depth.fill(0)
        self._rgb = None
        self._depth = None

    def __reduce_ex__(self, protocol):
        raise TypeError("RawFrame is not serializable")

    def __copy__(self):
        raise TypeError("RawFrame cannot be copied")

    def __deepcopy__(self, memo):
        raise TypeError("RawFrame cannot be copied")

    def __repr__(self) -> str:
        state = "released" if self.released else "live"
        return f"RawFrame(ts={self.timestamp}, {self.width}x{self.height}, {state})"


def release_frame(frame: RawFrame) -> None:
    """Destroy the pixel buffers of ``frame``. Safe to call more than once."""
    frame.release()


@dataclass(frozen=True)
class StreamConfig:
    source: str = "recorded"  # "scenario" | "recorded"
    frame_interval_ms: int = DEFAULT_FRAME_INTERVAL_MS
    room: str = ""
    tz_offset_minutes: int = 0
    path: Path | None = None
    scenario: Any = None  # a simulator.Simulation when source == "scenario"

    def __post_init__(self):
        if self.frame_interval_ms <= 0:
            raise InputError(f"frame interval must be positive, got {self.frame_interval_ms}")
        if self.source not in ("scenario", "recorded"):
            raise InputError(f"unknown source kind {self.source!r}")


class FrameStream:
    """Iterator over RawFrames that enforces strictly increasing timestamps."""

    def __init__(self, frames: Iterable[RawFrame], config: StreamConfig, closer=None):
        self.config = config
        self._frames = iter(frames)
        self._closer = closer
        self._last_ts: int | None = None

    def __iter__(self) -> Iterator[RawFrame]:
        return self

    def __next__(self) -> RawFrame:
        try:
            frame = next(self._frames)
        except StopIteration:
            self.close()
            raise
        if self._last_ts is not None and frame.timestamp <= self._last_ts:
            self.close()
            raise DataFormatError(
                f"non-monotonic timestamps: {frame.timestamp} after {self._last_ts}"
            )
        self._last_ts = frame.timestamp
        return frame

    def close(self) -> None:
        if self._closer is not None:
            self._closer()
            self._closer = None

    def __enter__(self) -> "FrameStream":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_stream(config: StreamConfig) -> FrameStream:
    if config.source == "scenario":
        if config.scenario is None:
            raise InputError("scenario stream needs a simulation")
        return FrameStream(config.scenario.frames(), config)
    if config.path is None:
        raise InputError("recorded stream needs a path")
    path = Path(config.path)
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return FrameStream(_read_frames(fh, path), config, closer=fh.close)


def _read_exact(fh: BinaryIO, n: int, path: Path, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise DataFormatError(f"{path}: truncated {what} ({len(data)} of {n} bytes)")
    return data


def _read_frames(fh: BinaryIO, path: Path) -> Iterator[RawFrame]:
    magic = fh.read(len(MAGIC))
    if not magic:
        return
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    index = 0
    while True:
        head = fh.read(_HEADER.size)
        if not head:
            return
        if len(head) != _HEADER.size:
            raise DataFormatError(f"{path}: truncated header of frame {index}")
        ts, width, height, has_depth = _HEADER.unpack(head)
        if width == 0 or height == 0 or has_depth not in (0, 1):
            raise DataFormatError(f"{path}: malformed header of frame {index}")
        rgb = np.frombuffer(_read_exact(fh, width * height * 3, path, "rgb payload"), np.uint8)
        depth = None
        if has_depth:
            raw = _read_exact(fh, width * height * 2, path, "depth payload")
            depth = np.frombuffer(raw, dtype="<u2")
        yield RawFrame(ts, width, height, rgb, depth)
        index += 1


class FixtureWriter:
    """Append frames to an AMBF file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = open(self.path, "wb")
        self._fh.write(MAGIC)
        self.count = 0

    def write(self, frame: RawFrame) -> None:
        self._fh.write(_HEADER.pack(frame.timestamp, frame.width, frame.height, int(frame.has_depth)))
        self._fh.write(np.ascontiguousarray(frame.rgb).tobytes())
        if frame.has_depth:
            self._fh.write(frame.depth.astype("<u2").tobytes())
        self.count += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "FixtureWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_fixture(path: str | Path, frames: Iterable[RawFrame], release: bool = True) -> int:
    """Write every frame to ``path``; returns the frame count."""
    with FixtureWriter(path) as writer:
        for frame in frames:
            writer.write(frame)
            if release:
                frame.release()
        return writer.count
