"""Command-line interface: track, eval, simulate, sweep, ablate."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig
from .metrics import evaluate
from .mot_io import (
    MotParseError,
    atomic_write_text,
    load_detections,
    load_trajectories,
    trajectory_lines,
    write_detections,
    write_trajectories,
)
from .runner import (
    PRESETS,
    format_ablation_table,
    format_sweep_report,
    run_ablation,
    run_sweep,
    track_frames,
)
from .simulator import generate, scenario_by_name, standard_suite


class CliError(Exception):
    pass


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    if not Path(path).exists():
        raise CliError(f"config file not found: {path}")
    return RunConfig.from_file(path)


def _require(value: str, flag: str) -> str:
    if not value:
        raise CliError(f"missing {flag} (flag or config path key)")
    return value


def _cmd_track(args) -> int:
    cfg = _load_config(args.config)
    det_path = _require(args.det or cfg.paths_det, "--det")
    out_path = _require(args.out or cfg.paths_out, "--out")
    if not Path(det_path).exists():
        raise CliError(f"detection file not found: {det_path}")
    frames = load_detections(det_path, sidecar=args.aff)
    hypothesis = track_frames(frames, cfg)
    write_trajectories(out_path, hypothesis)
    print(f"wrote {hypothesis.total_boxes()} boxes for {len(hypothesis.identities())} tracks to {out_path}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    gt_path = _require(args.gt or cfg.paths_gt, "--gt")
    for path in (gt_path, args.hyp):
        if not Path(path).exists():
            raise CliError(f"file not found: {path}")
    gt = load_trajectories(gt_path)
    hyp = load_trajectories(args.hyp)
    threshold = args.iou if args.iou is not None else cfg.eval_iou_threshold
    report = evaluate(gt, hyp, threshold)
    if args.format == "kv":
        print("\n".join(report.as_kv_lines()))
    else:
        print(report.as_table())
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    out_dir = Path(_require(args.out_dir or cfg.paths_out_dir, "--out-dir"))
    try:
        scenario = scenario_by_name(args.scenario)
    except KeyError as exc:
        raise CliError(str(exc)) from exc
    scenario = replace(scenario, seed=args.seed, embed_dim=cfg.embed_dim)
    gt, frames = generate(scenario)

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.scenario}_seed{args.seed}"
    gt_path = out_dir / f"{stem}_gt.txt"
    det_path = out_dir / f"{stem}_det.txt"
    atomic_write_text(gt_path, trajectory_lines(gt.records()))
    write_detections(det_path, frames)
    print(f"wrote {gt_path}")
    print(f"wrote {det_path} (+ sidecar)")
    return 0


def _parse_grid(items: list[str]) -> dict[str, list[str]]:
    grid: dict[str, list[str]] = {}
    for item in items:
        if "=" not in item:
            raise CliError(f"bad --grid entry {item!r}; expected key=v1,v2,...")
        key, values = item.split("=", 1)
        key = key.strip()
        parsed = [v.strip() for v in values.split(",") if v.strip()]
        if not parsed:
            raise CliError(f"bad --grid entry {item!r}: no values")
        grid[key] = parsed
    return grid


def _suite(name: str):
    if name != "standard":
        raise CliError(f"unknown suite {name!r}; only 'standard' is defined")
    return standard_suite()


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    scenarios = _suite(args.suite)
    grid = _parse_grid(args.grid or [])
    try:
        results = run_sweep(
            cfg, grid, scenarios, seeds=range(args.seeds), jobs=args.jobs,
            with_hota=not args.no_hota,
        )
    except ConfigError as exc:
        raise CliError(str(exc)) from exc
    report = format_sweep_report(results)
    if args.out:
        atomic_write_text(args.out, report + "\n")
        print(f"wrote {args.out}")
    else:
        print(report)
    return 0


def _cmd_ablate(args) -> int:
    cfg = _load_config(args.config)
    scenarios = _suite(args.suite)
    results = run_ablation(
        cfg, scenarios, seeds=range(args.seeds), jobs=args.jobs,
        with_hota=not args.no_hota,
    )
    print(format_ablation_table(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motrack",
        description="Motion-gated multi-object tracking, metrics, and occlusion simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="run the tracker over a detection file")
    p_track.add_argument("--det", help="MOT detection file")
    p_track.add_argument("--aff", help="explicit affinity sidecar (default: <det>.aff)")
    p_track.add_argument("--config", help="key = value config file")
    p_track.add_argument("--out", help="hypothesis output file")
    p_track.set_defaults(func=_cmd_track)

    p_eval = sub.add_parser("eval", help="score a hypothesis against ground truth")
    p_eval.add_argument("--gt", help="ground-truth MOT file")
    p_eval.add_argument("--hyp", required=True, help="hypothesis MOT file")
    p_eval.add_argument("--iou", type=float, help="IoU threshold (default from config)")
    p_eval.add_argument("--config", help="key = value config file")
    p_eval.add_argument("--format", choices=("table", "kv"), default="table")
    p_eval.set_defaults(func=_cmd_eval)

    p_sim = sub.add_parser("simulate", help="generate a named scenario to MOT files")
    p_sim.add_argument("--scenario", required=True, help="name from the standard suite")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out-dir", help="output directory")
    p_sim.add_argument("--config", help="key = value config file")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run the suite across a config grid")
    p_sweep.add_argument("--suite", default="standard")
    p_sweep.add_argument("--config", help="key = value config file")
    p_sweep.add_argument("--grid", action="append", help="key=v1,v2,... (repeatable)")
    p_sweep.add_argument("--seeds", type=int, default=100, help="seeds per scenario")
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker threads")
    p_sweep.add_argument("--no-hota", action="store_true", help="skip the HOTA sweep")
    p_sweep.add_argument("--out", help="write the report to a file")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_abl = sub.add_parser(
        "ablate",
        help=f"compare presets {sorted(PRESETS)} over the suite",
    )
    p_abl.add_argument("--suite", default="standard")
    p_abl.add_argument("--config", help="key = value config file")
    p_abl.add_argument("--seeds", type=int, default=100)
    p_abl.add_argument("--jobs", type=int, default=1)
    p_abl.add_argument("--no-hota", action="store_true")
    p_abl.set_defaults(func=_cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, MotParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
