"""Command-line interface.

Subcommands:
    gen       render a scene config to .dvsg grid files plus a JSON manifest
    train-dn  train the decision network on the default synthetic
              distribution and write a checkpoint
    run       run one sequence under one policy, write the decision log CSV
    sweep     vary one axis (t, l, d, f, division, overlap) and write one
              CSV row per value
    trace     per-region agreement-score time series under fixed scheduling

Exit codes: 0 success, 2 configuration error, 3 runtime/data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import dn as dn_mod
from .config import load_config, parse_config
from .core import write_grid
from .errors import ConfigError, DVSError
from .oracle import BackendSpec, SceneSpec, render_sequence
from .pipeline import (
    SWEEP_AXES,
    SweepConfig,
    region_score_trace,
    run_sequence,
    sweep,
    workload_reduction,
    write_report_csv,
    write_tradeoff_csv,
    write_trace_csv,
)
from .region import SCHEME_GRID, DivisionScheme
from .scenes import training_scene_specs
from .sched import AdaptiveConfidence, Fixed, FlowMag, FrameDiff
from .warp import WarpConfig

_WARP_NAMES = {"nearest": "nearest_label", "bilinear": "onehot_bilinear_argmax"}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scene/backend config file")
    parser.add_argument("--seed", type=int, default=None, help="override the scene seed")
    parser.add_argument("--division", default="2x2", choices=sorted(SCHEME_GRID))
    parser.add_argument("--overlap", type=int, default=8, help="overlap depth in pixels")
    parser.add_argument(
        "--policy",
        default="fixed",
        choices=["fixed", "confidence", "framediff", "flowmag"],
    )
    parser.add_argument("--t", type=float, default=0.9, help="confidence threshold")
    parser.add_argument("--l", type=int, default=5, help="fixed update period")
    parser.add_argument("--d", type=float, default=0.02, help="frame difference threshold")
    parser.add_argument("--f", type=float, default=1.0, help="flow magnitude threshold")
    parser.add_argument("--warp", default="nearest", choices=sorted(_WARP_NAMES))
    parser.add_argument(
        "--flow-mode",
        default="direct",
        choices=["direct", "chained"],
        help="key-to-current flow, or per-frame flows composed (noise accumulates)",
    )
    parser.add_argument("--dn", help="decision network checkpoint (policy=confidence)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="output CSV path")


def _load_scene(args) -> tuple[SceneSpec, BackendSpec]:
    if args.config:
        scene, backends = load_config(args.config)
    else:
        scene, backends = parse_config("")  # defaults: empty static scene
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        scene = replace(scene, rng_seed=args.seed)
    return scene, backends


def _build_policy(args):
    if args.policy == "fixed":
        return Fixed(args.l)
    if args.policy == "framediff":
        return FrameDiff(args.d)
    if args.policy == "flowmag":
        return FlowMag(args.f)
    if not args.dn:
        raise ConfigError("policy 'confidence' needs --dn <checkpoint>")
    if not Path(args.dn).exists():
        raise ConfigError(f"decision network checkpoint not found: {args.dn}")
    return AdaptiveConfidence(args.t, dn_mod.load_checkpoint(args.dn))


def _cmd_gen(args) -> int:
    scene, _ = _load_scene(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bundles = render_sequence(scene)
    manifest = {
        "frame_w": scene.frame_w,
        "frame_h": scene.frame_h,
        "num_classes": scene.num_classes,
        "sequence_length": scene.sequence_length,
        "seed": scene.rng_seed,
        "positions": [b.positions.tolist() for b in bundles],
    }
    for b in bundles:
        write_grid(b.image, out / f"frame_{b.index:04d}.image.dvsg")
        write_grid(b.truth_labels, out / f"frame_{b.index:04d}.labels.dvsg")
    (out / "scene.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(bundles)} frames to {out}")
    return 0


def _cmd_train_dn(args) -> int:
    seed = args.seed if args.seed is not None else 0
    backends = BackendSpec()
    if args.config:
        _, backends = load_config(args.config)
    specs = training_scene_specs(seed, n=args.scenes, frames=args.frames)
    sequences = [render_sequence(s) for s in specs]
    scheme = DivisionScheme.from_name(args.division, args.overlap)
    X, y = dn_mod.build_training_set(sequences, scheme, backends, seed=seed)
    reg, report = dn_mod.train(
        (X, y), seed=seed, epochs=args.epochs, batch_size=args.batch_size
    )
    dn_mod.save_checkpoint(reg, args.out)
    print(
        f"trained on {report.n_train} samples "
        f"(holdout {report.n_holdout}): "
        f"holdout mse {report.final_holdout_mse:.5f}, "
        f"mae {report.final_holdout_mae:.5f} -> {args.out}"
    )
    if args.report:
        import csv

        with open(args.report, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "train_mse", "holdout_mse", "holdout_mae"])
            for e, (tr, ho, mae) in enumerate(
                zip(report.train_mse, report.holdout_mse, report.holdout_mae)
            ):
                writer.writerow([e, repr(tr), repr(ho), repr(mae)])
    return 0


def _cmd_run(args) -> int:
    scene, backends = _load_scene(args)
    scheme = DivisionScheme.from_name(args.division, args.overlap)
    policy = _build_policy(args)
    warp_cfg = WarpConfig(sampling=_WARP_NAMES[args.warp])
    bundles = render_sequence(scene)
    report = run_sequence(
        bundles,
        scheme,
        policy,
        backends,
        warp_cfg,
        seed=scene.rng_seed,
        workers=args.workers,
        eval_frames="all" if args.eval_all else "final",
        flow_mode=args.flow_mode,
    )
    if args.out:
        write_report_csv(report, args.out)
    p = report.point
    print(
        f"policy={p.policy}({p.parameter:g}) miou={p.miou:.4f} "
        f"speedup={p.simulated_speedup:.2f}x warp/seg={p.warp_seg_ratio:.2f} "
        f"workload_reduction={workload_reduction(report):.3f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    scene, backends = _load_scene(args)
    scheme = DivisionScheme.from_name(args.division, args.overlap)
    policy = _build_policy(args)
    warp_cfg = WarpConfig(sampling=_WARP_NAMES[args.warp])
    try:
        seeds = tuple(int(s) for s in args.seeds.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --seeds list {args.seeds!r}") from exc
    values: list = []
    for tok in args.values.split(","):
        tok = tok.strip()
        if not tok:
            continue
        values.append(tok if args.axis == "division" else float(tok))
    cfg = SweepConfig(
        scene=scene,
        backends=backends,
        scheme=scheme,
        policy=policy,
        warp_cfg=warp_cfg,
        seeds=seeds,
        workers=args.workers,
        flow_mode=args.flow_mode,
    )
    points = sweep(args.axis, values, cfg)
    if args.out:
        write_tradeoff_csv(points, args.out)
    for value, p in zip(values, points):
        print(
            f"{args.axis}={value} miou={p.miou:.4f} "
            f"speedup={p.simulated_speedup:.2f}x warp/seg={p.warp_seg_ratio:.2f}"
        )
    return 0


def _cmd_trace(args) -> int:
    scene, backends = _load_scene(args)
    scheme = DivisionScheme.from_name(args.division, args.overlap)
    bundles = render_sequence(scene)
    trace = region_score_trace(
        bundles, scheme, backends, period=args.l, seed=scene.rng_seed
    )
    if args.out:
        write_trace_csv(trace, args.out)
        print(f"wrote {len(trace.raw)} series to {args.out}")
    else:
        for name, series in trace.raw.items():
            print(f"{name}: mean={sum(series) / len(series):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dvs",
        description="Region-level dual-path video segmentation scheduler",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="render a scene to grid files")
    _add_common(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    p_train = sub.add_parser("train-dn", help="train the decision network")
    _add_common(p_train)
    p_train.add_argument("--scenes", type=int, default=10)
    p_train.add_argument("--frames", type=int, default=20)
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--batch-size", type=int, default=64)
    p_train.add_argument("--report", help="optional per-epoch CSV")
    p_train.set_defaults(func=_cmd_train_dn)

    p_run = sub.add_parser("run", help="run one sequence under one policy")
    _add_common(p_run)
    p_run.add_argument(
        "--eval-all", action="store_true", help="score every frame, not just the last"
    )
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis, emit CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seeds")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_trace = sub.add_parser("trace", help="agreement-score time series")
    _add_common(p_trace)
    p_trace.set_defaults(func=_cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    needs_out = args.command in ("gen",)
    if needs_out and not args.out:
        parser.error(f"{args.command} requires --out")
    if args.command == "train-dn" and not args.out:
        parser.error("train-dn requires --out")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DVSError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
