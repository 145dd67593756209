from __future__ import annotations

import csv
import datetime as dt
import json
import subprocess
import sys

import pytest

from ambientis.aggregation import DailySummary, read_daily_csv, write_daily_csv
from ambientis.cli import main
from ambientis.frames import write_fixture
from ambientis.posture import Posture
from ambientis.simulator import generate

from conftest import blank, entry, hm, make_frame, simple_config

MONDAY = dt.date(2024, 3, 4)


@pytest.fixture
def small_scenario(tmp_path):
    path = tmp_path / "small.scn"
    path.write_text(
        "name: small\nstart_date: 2024-03-04\nframe_interval_ms: 1000\nseed: 9\n"
        "noise: {pixel_amplitude: 8}\n"
        "phases:\n"
        "  - phase: normal\n    days: 2\n    schedule:\n"
        "      - {start: '08:00', end: '08:01', posture: standing, motion: large}\n"
        "  - phase: intervention\n    days: 2\n    schedule:\n"
        "      - {start: '10:00', end: '10:01:30', posture: sitting, motion: small}\n"
    )
    return path


def _days(path, n, start, phase, base):
    days = []
    for i in range(n):
        profile = [0.0] * 24
        profile[9] = base + i * (1 + i % 3)
        days.append(DailySummary(start + dt.timedelta(i), phase, profile[9], tuple(profile),
                                 0.3 + 0.01 * i, 0.7 - 0.01 * i, 0.0, 0.2 + 0.02 * (i % 4),
                                 0.3, 1.0, 100, 90, 90, 89))
    with open(path, "w") as fh:
        write_daily_csv(days, fh)
    return days


def test_full_flow(tmp_path, small_scenario, capsys):
    sim_dir, run_dir, agg_dir = tmp_path / "sim", tmp_path / "run", tmp_path / "agg"
    assert main(["simulate", str(small_scenario), "--out", str(sim_dir)]) == 0
    assert main(["run", str(sim_dir / "fixture.ambf"), "--config", str(sim_dir / "pipeline.yaml"),
                 "--out", str(run_dir)]) == 0
    assert main(["aggregate", str(run_dir / "features.jsonl"), "--config",
                 str(sim_dir / "pipeline.yaml"), "--phases", str(sim_dir / "days.csv"),
                 "--out", str(agg_dir)]) == 0
    got = read_daily_csv(agg_dir / "daily.csv")
    want = read_daily_csv(sim_dir / "oracle_daily.csv")
    assert [d.appearance_minutes for d in got] == pytest.approx([d.appearance_minutes for d in want])
    assert [d.inactivity_ratio for d in got] == [d.inactivity_ratio for d in want]
    assert main(["compare", str(agg_dir / "daily_normal.csv"), str(agg_dir / "daily_intervention.csv"),
                 "--out", str(tmp_path / "cmp")]) == 0
    report = json.loads((tmp_path / "cmp" / "comparison.json").read_text())
    assert report["pairs"] == 2
    assert main(["report", str(agg_dir / "daily.csv"), "--out", str(tmp_path / "rep")]) == 0
    summary = json.loads((tmp_path / "rep" / "band_change.json").read_text())
    assert summary["peak_hour"] == {"normal": 8, "intervention": 10}


def test_simulate_is_deterministic(tmp_path, small_scenario):
    for name in ("a", "b"):
        assert main(["simulate", str(small_scenario), "--out", str(tmp_path / name)]) == 0
    for f in ("fixture.ambf", "ledger.jsonl", "channel.jsonl", "oracle_daily.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_ledger_only(tmp_path):
    assert main(["simulate", "p1-mindful-meal", "--ledger-only", "--out", str(tmp_path)]) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["oracle_daily.csv"]


def test_missing_scenario_exit_2(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "nope.scn"), "--out", str(tmp_path)]) == 2
    assert "ambientis: error:" in capsys.readouterr().err


def test_invalid_scenario_exit_3(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text("phases: [{phase: normal, days: 1, schedule: [{start: '9:00', end: '8:00', "
                   "posture: sitting}]}]\n")
    assert main(["simulate", str(bad), "--out", str(tmp_path / "o")]) == 3


def test_run_empty_fixture(tmp_path):
    fixture = tmp_path / "empty.ambf"
    fixture.write_bytes(b"")
    assert main(["run", str(fixture), "--pose-detector", "blob", "--object-detector", "blob",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "features.jsonl").read_text() == ""


def test_run_100_frames(tmp_path):
    frames = [make_frame(blank(32, 24, 10), ts=1000 * i) for i in range(100)]
    write_fixture(tmp_path / "f.ambf", frames)
    assert main(["run", str(tmp_path / "f.ambf"), "--pose-detector", "blob",
                 "--object-detector", "blob", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "features.jsonl").read_text().splitlines()
    assert len(lines) == 100
    assert not any(json.loads(x)["present"] for x in lines)


def test_run_missing_fixture_and_bad_threshold(tmp_path):
    assert main(["run", str(tmp_path / "none.ambf"), "--pose-detector", "blob",
                 "--object-detector", "blob"]) == 2
    fixture = tmp_path / "e.ambf"
    fixture.write_bytes(b"")
    assert main(["run", str(fixture), "--threshold", "0", "--pose-detector", "blob",
                 "--object-detector", "blob"]) == 2


def test_run_corrupt_fixture_exit_3(tmp_path):
    (tmp_path / "x.ambf").write_bytes(b"JUNKJUNKJUNK")
    assert main(["run", str(tmp_path / "x.ambf"), "--pose-detector", "blob",
                 "--object-detector", "blob", "--out", str(tmp_path)]) == 3


def test_aggregate_single_hour(tmp_path):
    sim = generate(simple_config([entry(hm(14), hm(14, 0, 30), Posture.SITTING)],
                                 frame_interval_ms=1000))
    from ambientis.pipeline import run_simulation
    from ambientis.aggregation import write_features
    with open(tmp_path / "f.jsonl", "w") as fh:
        write_features(run_simulation(sim), fh)
    assert main(["aggregate", str(tmp_path / "f.jsonl"), "--frame-interval-ms", "1000",
                 "--out", str(tmp_path)]) == 0
    with open(tmp_path / "hourly.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 24
    busy = [r for r in rows if float(r["presence_minutes"]) > 0]
    assert len(busy) == 1 and busy[0]["hour"] == "14"
    assert float(busy[0]["presence_minutes"]) == pytest.approx(0.5)


def test_aggregate_malformed_line_exit_3(tmp_path, capsys):
    path = tmp_path / "f.jsonl"
    path.write_text('{"timestamp": 1, "present": false, "posture": null, "motion": null}\n'
                    "{not json\n")
    assert main(["aggregate", str(path), "--out", str(tmp_path)]) == 3
    assert "f.jsonl:2" in capsys.readouterr().err


def test_compare_8_vs_8(tmp_path, capsys):
    _days(tmp_path / "n.csv", 8, MONDAY, "normal", 60)
    _days(tmp_path / "i.csv", 8, MONDAY + dt.timedelta(8), "intervention", 40)
    assert main(["compare", str(tmp_path / "n.csv"), str(tmp_path / "i.csv"),
                 "--strategy", "by-index", "--label", "P1", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "P1 (16 days, DoF = 7)" in out
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert {r["dof"] for r in report["rows"] if r["status"] == "ok"} == {7}
    assert (tmp_path / "comparison.txt").read_text() == out


def test_compare_identical_inputs(tmp_path):
    _days(tmp_path / "n.csv", 8, MONDAY, "normal", 60)
    assert main(["compare", str(tmp_path / "n.csv"), str(tmp_path / "n.csv"),
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "comparison.json").read_text())
    assert all(r["status"] == "not testable" for r in report["rows"])


def test_compare_no_pairs_exit_4(tmp_path):
    _days(tmp_path / "n.csv", 8, MONDAY, "normal", 60)
    (tmp_path / "i.csv").write_text((tmp_path / "n.csv").read_text().splitlines()[0] + "\n")
    assert main(["compare", str(tmp_path / "n.csv"), str(tmp_path / "i.csv"),
                 "--out", str(tmp_path)]) == 4


def test_compare_min_frames_filter(tmp_path):
    _days(tmp_path / "n.csv", 8, MONDAY, "normal", 60)
    _days(tmp_path / "i.csv", 8, MONDAY + dt.timedelta(8), "intervention", 40)
    assert main(["compare", str(tmp_path / "n.csv"), str(tmp_path / "i.csv"),
                 "--min-frames", "1000", "--out", str(tmp_path)]) == 4


def test_report_band_change(tmp_path):
    _days(tmp_path / "n.csv", 3, MONDAY, "normal", 60)
    assert main(["report", str(tmp_path / "n.csv"), "--band", "8-10", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "band_change.json").read_text())
    assert summary["band"] == [8, 10] and "band_change_percent" not in summary
    with open(tmp_path / "profiles.csv") as fh:
        assert len(list(csv.reader(fh))) == 2


def test_bad_band_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["report", "x.csv", "--band", "5-2"])
    assert exc.value.code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ambientis", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip()
