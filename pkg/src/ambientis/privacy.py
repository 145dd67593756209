"""Scan persisted artifacts for anything that could carry pixels.

Flags: image/fixture file signatures, unparseable binary files, any single
field (string or array) at least ``width * height`` long, and long
base64-looking strings.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

SIGNATURES = {
    b"\x89PNG": "PNG",
    b"\xff\xd8\xff": "JPEG",
    b"GIF8": "GIF",
    b"BM": "BMP",
    b"II*\x00": "TIFF",
    b"MM\x00*": "TIFF",
    b"RIFF": "RIFF/WEBP/AVI",
    b"AMBF": "raw frame fixture",
    b"\x93NUMPY": "numpy array",
    b"\x00\x00\x00\x18ftyp": "MP4",
    b"\x00\x00\x00\x20ftyp": "MP4",
}
_BASE64 = re.compile(r"^[A-Za-z0-9+/]{64,}={0,2}$")
TEXT_SUFFIXES = {".json", ".jsonl", ".csv", ".txt", ".yaml", ".yml"}


def _check_value(value, limit: int, where: str, out: list[str]) -> None:
    if isinstance(value, str):
        if len(value) >= limit:
            out.append(f"{where}: string of {len(value)} chars")
        elif _BASE64.match(value):
            out.append(f"{where}: base64-like payload")
    elif isinstance(value, list):
        if len(value) >= limit:
            out.append(f"{where}: array of {len(value)} items")
        for i, v in enumerate(value):
            _check_value(v, limit, f"{where}[{i}]", out)
    elif isinstance(value, dict):
        for k, v in value.items():
            _check_value(v, limit, f"{where}.{k}", out)


def scan_file(path: str | Path, width: int, height: int) -> list[str]:
    path = Path(path)
    limit = width * height
    data = path.read_bytes()
    findings: list[str] = []
    for sig, kind in SIGNATURES.items():
        if data.startswith(sig) or (len(sig) >= 4 and sig in data):
            findings.append(f"{path}: {kind} signature")
    if path.suffix not in TEXT_SUFFIXES:
        findings.append(f"{path}: unrecognised artifact type")
        return findings
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        return findings + [f"{path}: binary content"]
    if path.suffix == ".jsonl":
        for n, line in enumerate(text.splitlines(), 1):
            if line.strip():
                _check_value(json.loads(line), limit, f"{path}:{n}", findings)
    elif path.suffix == ".json":
        _check_value(json.loads(text), limit, str(path), findings)
    elif path.suffix == ".csv":
        for n, row in enumerate(csv.reader(io.StringIO(text)), 1):
            _check_value(row, limit, f"{path}:{n}", findings)
    else:
        for n, line in enumerate(text.splitlines(), 1):
            _check_value(line, limit, f"{path}:{n}", findings)
    return findings


def scan_tree(root: str | Path, width: int, height: int) -> list[str]:
    findings = []
    for path in sorted(Path(root).rglob("*")):
        if path.is_file():
            findings.extend(scan_file(path, width, height))
    return findings
