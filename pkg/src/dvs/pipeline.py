"""End-to-end runner, cost accounting, and the sweep/trace harnesses.

One run processes a rendered sequence frame by frame: crop every region,
estimate per-region flow from that region's key frame, let the policy
route the region down the segmentation or the warping path, stitch the
per-region outputs by core ownership, and score the stitched map against
ground truth at the evaluation frames (by default only the final frame).

Costs are abstract units per pixel, not wall-clock: every scheduled region
pays flow + decision cost (the decision needs flow-derived features before
it can route anything), segmentation cost is added only when routed there,
and the first frame pays segmentation alone. Speed is reported relative to
running the segmentation backend on every full, undivided frame, which
defines 1x.

Within a frame, regions are independent: their random streams are derived
from (seed, stream, frame, region), so results are identical for any
worker count.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import LabelMap, crop
from .errors import ConfigError, SequenceError
from .metrics import ConfusionMatrix, confidence_score
from .oracle import BackendSpec, FrameBundle, SceneSpec, flow_oracle, render_sequence, seg_oracle
from .region import DivisionScheme, make_regions, stitch
from .rng import STREAM_FLOW, STREAM_SEG, derived_rng
from .sched import (
    AdaptiveConfidence,
    Decision,
    Fixed,
    FlowMag,
    FrameDiff,
    OracleConfidence,
    Policy,
    RegionState,
    apply_decision,
    decide,
    initial_state,
    policy_label,
)
from .warp import WarpConfig, compose_flow, warp_labels

SWEEP_AXES = ("t", "l", "d", "f", "division", "overlap")
FLOW_MODES = ("direct", "chained")


@dataclass(frozen=True)
class CostModel:
    """Abstract per-pixel costs of the three components."""

    seg_cost: float
    flow_cost: float
    dn_cost: float

    @classmethod
    def from_backend(cls, backend: BackendSpec) -> "CostModel":
        return cls(backend.seg_cost, backend.flow_cost, backend.dn_cost)

    def region_cost(self, pixels: int, decision: Decision) -> float:
        base = pixels * (self.flow_cost + self.dn_cost)
        if decision is Decision.SEG:
            base += pixels * self.seg_cost
        return base

    def baseline_frame_cost(self, frame_pixels: int) -> float:
        """Per-frame cost of the undivided all-segmentation baseline."""
        return frame_pixels * self.seg_cost


@dataclass(frozen=True)
class DecisionRecord:
    frame: int
    region: int
    decision: str
    score: float | None  # None for the forced first frame
    cost: float


@dataclass(frozen=True)
class TradeoffPoint:
    """One operating point of a policy: accuracy vs simulated speed."""

    policy: str
    parameter: float
    miou: float
    simulated_speedup: float
    warp_seg_ratio: float
    mean_key_update_period: float
    seg_fraction: float
    workload_reduction: float
    n_seeds: int = 1


@dataclass
class RunReport:
    point: TradeoffPoint
    records: list[DecisionRecord]
    confusion: ConfusionMatrix
    frame_times: list[float]
    n_frames: int
    n_regions: int
    seg_pixels: int
    all_seg_pixels: int
    stitched_final: LabelMap | None = None


def workload_reduction(report: RunReport) -> float:
    """Fraction of segmentation work avoided versus an all-seg run."""
    return 1.0 - report.seg_pixels / report.all_seg_pixels


def _resolve_eval_frames(eval_frames, n: int) -> set[int]:
    if eval_frames == "final":
        return {n - 1}
    if eval_frames == "all":
        return set(range(n))
    frames = set(int(i) for i in eval_frames)
    if any(i < 0 or i >= n for i in frames):
        raise SequenceError(f"evaluation frames {sorted(frames)} outside 0..{n - 1}")
    return frames


def run_sequence(
    bundles: Sequence[FrameBundle],
    scheme: DivisionScheme,
    policy: Policy,
    backends: BackendSpec,
    warp_cfg: WarpConfig = WarpConfig(),
    seed: int = 0,
    *,
    workers: int = 1,
    eval_frames="final",
    flow_mode: str = "direct",
) -> RunReport:
    """Run one sequence under one policy; deterministic in (config, seed).

    ``flow_mode="direct"`` estimates flow straight from each region's key
    frame to the current frame; ``"chained"`` composes per-frame estimates
    instead, so estimation noise accumulates with key age (useful for
    error-accumulation studies).
    """
    n = len(bundles)
    if n < 2:
        raise SequenceError(f"need at least 2 frames, got {n}")
    if flow_mode not in FLOW_MODES:
        raise ConfigError(f"flow_mode must be one of {FLOW_MODES}, got {flow_mode!r}")
    frame_w = bundles[0].image.width
    frame_h = bundles[0].image.height
    num_classes = bundles[0].num_classes
    geoms = make_regions(scheme, frame_w, frame_h)
    n_regions = len(geoms)
    cost = CostModel.from_backend(backends)
    eval_set = _resolve_eval_frames(eval_frames, n)
    oracle_policy = isinstance(policy, OracleConfidence)

    confusion = ConfusionMatrix(num_classes)
    records: list[DecisionRecord] = []
    frame_times: list[float] = []
    seg_pixels = 0
    total_region_pixels = sum(g.pixels for g in geoms)

    # frame 0: forced segmentation, establishes every region's key
    states: list[RegionState] = []
    key_idx = [0] * n_regions
    outputs: list[LabelMap] = []
    t0 = 0.0
    for r, geom in enumerate(geoms):
        img = crop(bundles[0].image, geom)
        seg = seg_oracle(
            img,
            crop(bundles[0].truth_labels, geom),
            backends,
            num_classes,
            derived_rng(seed, STREAM_SEG, 0, r),
        )
        states.append(initial_state(img, seg))
        outputs.append(seg)
        c = geom.pixels * cost.seg_cost
        t0 += c
        seg_pixels += geom.pixels
        records.append(DecisionRecord(0, r, Decision.SEG.value, None, c))
    frame_times.append(t0)
    stitched = stitch(list(zip(geoms, outputs)))
    if 0 in eval_set:
        confusion.accumulate(bundles[0].truth_labels, stitched)

    chained_flow: list = [None] * n_regions

    def region_step(args):
        i, r = args
        geom = geoms[r]
        state = states[r]
        cur_img = crop(bundles[i].image, geom)
        if flow_mode == "direct":
            flow = flow_oracle(
                key_idx[r], i, bundles, geom, backends,
                derived_rng(seed, STREAM_FLOW, i, r),
            )
        else:
            step = flow_oracle(
                i - 1, i, bundles, geom, backends,
                derived_rng(seed, STREAM_FLOW, i, r),
            )
            flow = step if chained_flow[r] is None else compose_flow(chained_flow[r], step)
        seg_out = None
        true_score = None
        if oracle_policy:
            seg_out = seg_oracle(
                cur_img,
                crop(bundles[i].truth_labels, geom),
                backends,
                num_classes,
                derived_rng(seed, STREAM_SEG, i, r),
            )
            true_score = confidence_score(warp_labels(state.key_seg, flow, warp_cfg), seg_out)
        decision, score = decide(policy, state, cur_img, flow, true_score=true_score)
        if decision is Decision.SEG:
            if seg_out is None:
                seg_out = seg_oracle(
                    cur_img,
                    crop(bundles[i].truth_labels, geom),
                    backends,
                    num_classes,
                    derived_rng(seed, STREAM_SEG, i, r),
                )
            out = seg_out
        else:
            out = warp_labels(state.key_seg, flow, warp_cfg)
        new_state = apply_decision(state, decision, cur_img, out)
        return decision, score, out, new_state, flow

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(1, n):
            tasks = [(i, r) for r in range(n_regions)]
            if pool is not None:
                results = list(pool.map(region_step, tasks))
            else:
                results = [region_step(t) for t in tasks]
            ft = 0.0
            outputs = []
            for r, (decision, score, out, new_state, flow) in enumerate(results):
                states[r] = new_state
                chained_flow[r] = None if decision is Decision.SEG else flow
                if decision is Decision.SEG:
                    key_idx[r] = i
                    seg_pixels += geoms[r].pixels
                c = cost.region_cost(geoms[r].pixels, decision)
                ft += c
                outputs.append(out)
                records.append(DecisionRecord(i, r, decision.value, score, c))
            frame_times.append(ft)
            stitched = stitch(list(zip(geoms, outputs)))
            if i in eval_set:
                confusion.accumulate(bundles[i].truth_labels, stitched)
    finally:
        if pool is not None:
            pool.shutdown()

    n_seg = sum(1 for rec in records if rec.decision == Decision.SEG.value)
    n_warp = len(records) - n_seg
    per_region_periods = []
    for r in range(n_regions):
        segs_r = sum(
            1
            for rec in records
            if rec.region == r and rec.decision == Decision.SEG.value
        )
        per_region_periods.append(n / segs_r)
    name, param = policy_label(policy)
    all_seg_pixels = n * total_region_pixels
    point = TradeoffPoint(
        policy=name,
        parameter=param,
        miou=confusion.miou(),
        simulated_speedup=cost.baseline_frame_cost(frame_w * frame_h)
        / (sum(frame_times) / n),
        warp_seg_ratio=n_warp / n_seg,
        mean_key_update_period=float(np.mean(per_region_periods)),
        seg_fraction=n_seg / len(records),
        workload_reduction=1.0 - seg_pixels / all_seg_pixels,
    )
    return RunReport(
        point=point,
        records=records,
        confusion=confusion,
        frame_times=frame_times,
        n_frames=n,
        n_regions=n_regions,
        seg_pixels=seg_pixels,
        all_seg_pixels=all_seg_pixels,
        stitched_final=stitched,
    )


# ---------------------------------------------------------------------------
# Sweep harness
# ---------------------------------------------------------------------------


@dataclass
class SweepConfig:
    """Everything a sweep holds fixed while one axis varies."""

    scene: SceneSpec
    backends: BackendSpec
    scheme: DivisionScheme
    policy: Policy
    warp_cfg: WarpConfig = WarpConfig()
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    eval_frames: str | Sequence[int] = "final"
    workers: int = 1
    flow_mode: str = "direct"


def _apply_axis(cfg: SweepConfig, axis: str, value):
    scheme, policy = cfg.scheme, cfg.policy
    if axis == "t":
        if isinstance(policy, AdaptiveConfidence):
            policy = replace(policy, threshold=float(value))
        elif isinstance(policy, OracleConfidence):
            policy = OracleConfidence(float(value))
        else:
            raise ConfigError("axis 't' needs a confidence policy")
    elif axis == "l":
        policy = Fixed(int(value))
    elif axis == "d":
        policy = FrameDiff(float(value))
    elif axis == "f":
        policy = FlowMag(float(value))
    elif axis == "division":
        scheme = DivisionScheme.from_name(str(value), cfg.scheme.overlap_depth)
    elif axis == "overlap":
        scheme = DivisionScheme.from_name(cfg.scheme.name, int(value))
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    return scheme, policy


def aggregate_reports(reports: Sequence[RunReport]) -> TradeoffPoint:
    """Pool per-seed reports into one operating point.

    Confusion matrices are summed before taking mIoU (one pooled measure,
    not a mean of per-seed mIoUs); counts are pooled likewise; speedup and
    key period are averaged.
    """
    if not reports:
        raise ConfigError("nothing to aggregate")
    pooled = ConfusionMatrix(reports[0].confusion.num_classes)
    for rep in reports:
        pooled.merge(rep.confusion)
    n_seg = sum(
        1 for rep in reports for rec in rep.records if rec.decision == "seg"
    )
    n_all = sum(len(rep.records) for rep in reports)
    seg_px = sum(rep.seg_pixels for rep in reports)
    all_px = sum(rep.all_seg_pixels for rep in reports)
    first = reports[0].point
    return TradeoffPoint(
        policy=first.policy,
        parameter=first.parameter,
        miou=pooled.miou(),
        simulated_speedup=float(np.mean([r.point.simulated_speedup for r in reports])),
        warp_seg_ratio=(n_all - n_seg) / n_seg,
        mean_key_update_period=float(
            np.mean([r.point.mean_key_update_period for r in reports])
        ),
        seg_fraction=n_seg / n_all,
        workload_reduction=1.0 - seg_px / all_px,
        n_seeds=len(reports),
    )


def sweep(axis: str, values: Sequence, cfg: SweepConfig) -> list[TradeoffPoint]:
    """One pooled TradeoffPoint per axis value, same seeds for every value."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    # the scene does not depend on the axis, so sequences are shared
    bundles_by_seed = {
        s: render_sequence(replace(cfg.scene, rng_seed=s)) for s in cfg.seeds
    }
    points = []
    for value in values:
        scheme, policy = _apply_axis(cfg, axis, value)
        reports = [
            run_sequence(
                bundles_by_seed[s],
                scheme,
                policy,
                cfg.backends,
                cfg.warp_cfg,
                seed=s,
                workers=cfg.workers,
                eval_frames=cfg.eval_frames,
                flow_mode=cfg.flow_mode,
            )
            for s in cfg.seeds
        ]
        agg = aggregate_reports(reports)
        if axis in ("division", "overlap"):
            # keep the varied quantity visible in the row
            param = float(value) if axis == "overlap" else _region_count(value)
            agg = replace(agg, parameter=param)
        points.append(agg)
    return points


def _region_count(division_name) -> float:
    """Division names map onto their region counts for CSV-friendly output."""
    from .region import SCHEME_GRID

    rows, cols = SCHEME_GRID[str(division_name).lower()]
    return float(rows * cols)


# ---------------------------------------------------------------------------
# Per-region agreement-score trace
# ---------------------------------------------------------------------------


@dataclass
class TraceResult:
    frames: list[int]
    raw: dict[str, list[float]]
    smoothed: dict[str, list[float]]


def _smooth(series: Sequence[float], window: int) -> list[float]:
    out = []
    for i in range(len(series)):
        lo = max(0, i - window + 1)
        out.append(float(np.mean(series[lo : i + 1])))
    return out


def region_score_trace(
    bundles: Sequence[FrameBundle],
    scheme: DivisionScheme,
    backends: BackendSpec,
    period: int,
    seed: int = 0,
    window: int = 15,
) -> TraceResult:
    """True agreement score per region over time under fixed scheduling.

    Both paths run for every region at every frame (this is measurement,
    not scheduling), keys refresh every ``period`` frames. A single-region
    trace of the undivided frame is included as the series ``frame``.
    """
    names: list[str] = []
    raw: dict[str, list[float]] = {}
    frame_w = bundles[0].image.width
    frame_h = bundles[0].image.height

    layouts = [("region", scheme, 0)]
    if scheme.name != "original":
        layouts.append(("frame", DivisionScheme.from_name("original", 0), 1))
    for prefix, layout, stream in layouts:
        geoms = make_regions(layout, frame_w, frame_h)
        for r, geom in enumerate(geoms):
            name = f"{prefix}_{r}" if prefix == "region" else "frame"
            names.append(name)
            series = []
            state = None
            kidx = 0
            for i in range(1, len(bundles)):
                img = crop(bundles[i].image, geom)
                if state is None:
                    key_img = crop(bundles[0].image, geom)
                    key_seg = seg_oracle(
                        key_img,
                        crop(bundles[0].truth_labels, geom),
                        backends,
                        bundles[0].num_classes,
                        derived_rng(seed, STREAM_SEG, 0, r, stream),
                    )
                    state = initial_state(key_img, key_seg)
                flow = flow_oracle(
                    kidx, i, bundles, geom, backends,
                    derived_rng(seed, STREAM_FLOW, i, r, stream),
                )
                seg_out = seg_oracle(
                    img,
                    crop(bundles[i].truth_labels, geom),
                    backends,
                    bundles[i].num_classes,
                    derived_rng(seed, STREAM_SEG, i, r, stream),
                )
                warp_out = warp_labels(state.key_seg, flow, WarpConfig())
                series.append(confidence_score(warp_out, seg_out))
                decision, _ = decide(Fixed(period), state, img, flow)
                out = seg_out if decision is Decision.SEG else warp_out
                if decision is Decision.SEG:
                    kidx = i
                state = apply_decision(state, decision, img, out)
            raw[name] = series
    smoothed = {name: _smooth(raw[name], window) for name in names}
    return TraceResult(frames=list(range(1, len(bundles))), raw=raw, smoothed=smoothed)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


TRADEOFF_COLUMNS = (
    "policy",
    "parameter",
    "miou",
    "simulated_speedup",
    "warp_seg_ratio",
    "mean_key_update_period",
    "seg_fraction",
    "workload_reduction",
    "n_seeds",
)


def write_tradeoff_csv(points: Sequence[TradeoffPoint], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRADEOFF_COLUMNS)
        for p in points:
            writer.writerow(
                [
                    p.policy,
                    _fmt(p.parameter),
                    _fmt(p.miou),
                    _fmt(p.simulated_speedup),
                    _fmt(p.warp_seg_ratio),
                    _fmt(p.mean_key_update_period),
                    _fmt(p.seg_fraction),
                    _fmt(p.workload_reduction),
                    p.n_seeds,
                ]
            )


def write_report_csv(report: RunReport, path) -> None:
    """Per-(frame, region) decision log; byte-stable for a given run."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", "region", "decision", "score", "cost"])
        for rec in report.records:
            writer.writerow(
                [rec.frame, rec.region, rec.decision, _fmt(rec.score), _fmt(rec.cost)]
            )


def write_trace_csv(trace: TraceResult, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["frame", "series", "raw", "smoothed"])
        for name in trace.raw:
            for i, frame in enumerate(trace.frames):
                writer.writerow(
                    [frame, name, _fmt(trace.raw[name][i]), _fmt(trace.smoothed[name][i])]
                )
