"""ambientis command line.

    ambientis simulate SCENARIO --out DIR
    ambientis run FIXTURE --config pipeline.yaml --out DIR
    ambientis aggregate features.jsonl --phases days.csv --config pipeline.yaml --out DIR
    ambientis compare daily_normal.csv daily_intervention.csv --strategy by-weekday --out DIR
    ambientis report daily.csv --band 0-5 --out DIR

Exit status: 0 success, 2 input/file errors, 3 data-format errors,
4 statistical errors (e.g. no day pairs). A comparison with no significant
feature still exits 0.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from ambientis import __version__
from ambientis.aggregation import (
    DailySummary, PROFILE_COLUMNS, Aggregator, band_change, filter_min_frames,
    mean_hourly_profile, read_daily_csv, read_features, write_daily_csv, write_features,
    write_hourly_csv,
)
from ambientis.errors import AmbientisError, DataFormatError, InputError
from ambientis.frames import open_stream
from ambientis.pipeline import Pipeline, PipelineConfig
from ambientis.simulator import (
    generate, oracle_summaries, read_day_phases, resolve_scenario, write_bundle,
)
from ambientis.stats import HourlyMode, Strategy, comparison_table

log = logging.getLogger("ambientis")


def _load_config(args, **overrides) -> PipelineConfig:
    if getattr(args, "config", None):
        return PipelineConfig.from_file(args.config, **overrides)
    return PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})


def _out_dir(args, config: PipelineConfig | None = None) -> Path:
    out = Path(args.out) if args.out else (config.output_dir if config else Path("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = resolve_scenario(args.scenario)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    sim = generate(cfg)
    out = _out_dir(args)
    if args.ledger_only:
        with open(out / "oracle_daily.csv", "w") as fh:
            write_daily_csv(oracle_summaries(sim.ledger), fh)
        print(f"{cfg.name}: {len(sim)} frames (ledger only) -> {out}")
        return 0
    paths = write_bundle(sim, out)
    print(f"{cfg.name}: {len(sim)} frames -> {paths['fixture']}")
    return 0


def cmd_run(args) -> int:
    config = _load_config(
        args, threshold=args.threshold, speed_domain=args.speed_domain,
        pose_detector=args.pose_detector, object_detector=args.object_detector,
        channel_path=Path(args.channel) if args.channel else None,
    )
    fixture = Path(args.fixture)
    if not fixture.exists():
        raise InputError(f"fixture not found: {fixture}")
    if config.channel_path is None and (fixture.parent / "channel.jsonl").exists():
        config = replace(config, channel_path=fixture.parent / "channel.jsonl")
    pipeline = Pipeline.from_config(config)
    out = _out_dir(args, config)
    target = out / "features.jsonl"
    with open_stream(config.stream_config(source="recorded", path=fixture)) as stream, \
            open(target, "w") as fh:
        n = write_features(pipeline.run(stream), fh)
    print(f"{n} frames -> {target}")
    return 0


def cmd_aggregate(args) -> int:
    config = _load_config(args, frame_interval_ms=args.frame_interval_ms,
                          tz_offset_minutes=args.tz_offset)
    phases = read_day_phases(args.phases) if args.phases else None
    agg = Aggregator(config.frame_interval_ms, config.tz_offset_minutes)
    agg.extend(read_features(args.features))
    hourly, daily = agg.summarize(phases, default_phase=args.phase)
    out = _out_dir(args, config)
    with open(out / "hourly.csv", "w") as fh:
        write_hourly_csv(hourly, fh)
    with open(out / "daily.csv", "w") as fh:
        write_daily_csv(daily, fh)
    for phase in sorted({d.phase for d in daily}):
        with open(out / f"daily_{phase}.csv", "w") as fh:
            write_daily_csv([d for d in daily if d.phase == phase], fh)
    print(f"{len(daily)} day(s), {sum(h.presence_minutes > 0 for h in hourly)} "
          f"occupied hour(s) -> {out}")
    return 0


def _phase_rows(path: str, phase: str) -> list[DailySummary]:
    days = read_daily_csv(path)
    if len({d.phase for d in days}) > 1:
        days = [d for d in days if d.phase == phase]
    return days


def cmd_compare(args) -> int:
    strategy = args.strategy
    if strategy is None and args.config:
        strategy = PipelineConfig.from_file(args.config).strategy
    normal = _phase_rows(args.normal, "normal")
    intervention = _phase_rows(args.intervention, "intervention")
    if args.min_frames:
        normal = filter_min_frames(normal, args.min_frames)
        intervention = filter_min_frames(intervention, args.min_frames)
    report = comparison_table(normal, intervention, strategy or Strategy.BY_INDEX.value,
                              args.hourly_mode)
    text = report.to_text(args.label)
    out = _out_dir(args)
    (out / "comparison.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    (out / "comparison.txt").write_text(text)
    print(text, end="")
    return 0


def _parse_band(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like 0-5, got {text!r}") from None
    if not 0 <= lo <= hi <= 23:
        raise argparse.ArgumentTypeError(f"band {text!r} outside 0-23")
    return lo, hi


def cmd_report(args) -> int:
    days = read_daily_csv(args.daily)
    if not days:
        raise DataFormatError(f"{args.daily}: no days")
    out = _out_dir(args)
    phases = sorted({d.phase for d in days})
    profiles = {p: mean_hourly_profile([d for d in days if d.phase == p]) for p in phases}
    with open(out / "profiles.csv", "w") as fh:
        fh.write(",".join(["phase", "days", *PROFILE_COLUMNS]) + "\n")
        for p in phases:
            n = sum(d.phase == p for d in days)
            fh.write(",".join([p, str(n), *(repr(v) for v in profiles[p])]) + "\n")
    cols = ["date", "phase", "appearance_minutes", "standing_ratio", "sitting_ratio",
            "inactivity_ratio", "mean_movement_scale", "mean_movement_speed"]
    with open(out / "daily_features.csv", "w") as fh:
        fh.write(",".join(cols) + "\n")
        for d in sorted(days, key=lambda d: d.date):
            vals = [d.date.isoformat(), d.phase] + [
                "" if getattr(d, c) is None else repr(getattr(d, c)) for c in cols[2:]
            ]
            fh.write(",".join(vals) + "\n")
    summary = {"band": list(args.band), "peak_hour": {p: max(range(24), key=profiles[p].__getitem__)
                                                       for p in phases}}
    if {"normal", "intervention"} <= set(phases):
        try:
            summary["band_change_percent"] = band_change(
                profiles["normal"], profiles["intervention"], args.band)
        except ValueError as exc:
            summary["band_change_percent"] = None
            summary["note"] = str(exc)
    (out / "band_change.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ambientis", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic fixture and its ground truth")
    p.add_argument("scenario", help="scenario file or preset name (p1-mindful-meal, p2-art-crafts)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--ledger-only", action="store_true", help="skip writing frames")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="extract per-frame features from a fixture")
    p.add_argument("fixture")
    p.add_argument("--config")
    p.add_argument("--channel", help="detection channel for scenario detectors")
    p.add_argument("--pose-detector")
    p.add_argument("--object-detector")
    p.add_argument("--threshold", type=int)
    p.add_argument("--speed-domain", choices=["bbox", "active"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("aggregate", help="hourly and daily summaries from features.jsonl")
    p.add_argument("features")
    p.add_argument("--config")
    p.add_argument("--phases", help="CSV with date,phase columns")
    p.add_argument("--phase", default="normal", help="label for every day when --phases is absent")
    p.add_argument("--frame-interval-ms", type=int)
    p.add_argument("--tz-offset", type=int, help="minutes east of UTC")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("compare", help="paired t-tests between two phases")
    p.add_argument("normal")
    p.add_argument("intervention")
    p.add_argument("--config")
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--hourly-mode", choices=[m.value for m in HourlyMode],
                   default=HourlyMode.DAY_MEAN.value)
    p.add_argument("--min-frames", type=int, default=0,
                   help="drop days observed for fewer frames")
    p.add_argument("--label", default="P")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="plot-ready hourly profiles and per-day series")
    p.add_argument("daily")
    p.add_argument("--band", type=_parse_band, default=(0, 5))
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            code = args.func(args)
        except AmbientisError as exc:
            print(f"ambientis: error: {exc}", file=sys.stderr)
            code = exc.exit_code
        finally:
            for w in caught:
                print(f"ambientis: warning: {w.message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
