"""Command-line interface: run, eval, bench.

``run`` processes a frame source through the pipeline and serializes the
selected artifacts.  ``eval`` scores saved predictions against fixation
ground truth with the standard five metrics.  ``bench`` measures per-frame
latency on a synthetic (or provided) clip.

Every configuration field can be overridden from the command line with
``--set key=value`` (same syntax as config-file lines); ``--threads``
also honors the BIAS_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import io as bio
from .core import ConfigError, PipelineConfig, load_config, validate_config
from .metrics import (MetricReport, auc_judd, cc, density_from_fixations, nss,
                      shuffled_auc, sim)
from .pipeline import process_stream
from .synthetic import make_bench_clip


def _apply_overrides(cfg: PipelineConfig, pairs: list[str]) -> PipelineConfig:
    if not pairs:
        return cfg
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as tmp:
        tmp.write("\n".join(pairs) + "\n")
        path = tmp.name
    try:
        return load_config(path, base=cfg)
    finally:
        os.unlink(path)


def _resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    cfg = _apply_overrides(cfg, args.set or [])
    threads = args.threads
    if threads is None and os.environ.get("BIAS_THREADS"):
        threads = int(os.environ["BIAS_THREADS"])
    if threads is not None:
        cfg = dataclasses.replace(cfg, threads=threads)
    return validate_config(cfg)


def _parse_raw_dims(spec: str | None) -> tuple[int, int] | None:
    if spec is None:
        return None
    w, _, h = spec.lower().partition("x")
    return int(w), int(h)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file (flat key = value lines)")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config field; repeatable")
    parser.add_argument("--threads", type=int,
                        help="worker threads (default: BIAS_THREADS or config)")


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    frames = bio.prefetch(
        bio.read_frames(args.input, _parse_raw_dims(args.raw_dims)))
    emit = tuple(k.strip() for k in args.emit.split(",") if k.strip())
    n = bio.write_outputs(process_stream(frames, cfg), args.out, emit=emit,
                          image_format=args.format, float_out=args.float_out)
    print(f"frames={n} out={args.out} emit={','.join(emit)}")
    return 0


def _video_prediction_dirs(pred_root: Path) -> dict[str, Path]:
    subdirs = sorted(p for p in pred_root.iterdir() if p.is_dir())
    if subdirs:
        return {p.name: p for p in subdirs}
    return {pred_root.name: pred_root}


def _resolve_gt(gt_path: Path, video: str, single_video: bool):
    """Fixations and optional per-video density dir for one video."""
    if gt_path.is_file():
        return bio.load_fixations_text(gt_path), None
    text_candidates = [
        (gt_path / f"{video}.txt", gt_path / video / "density"),
        (gt_path / video / "fixations.txt", gt_path / video / "density"),
    ]
    if single_video:
        text_candidates.append((gt_path / "fixations.txt", gt_path / "density"))
    for cand, density in text_candidates:
        if cand.is_file():
            return (bio.load_fixations_text(cand),
                    density if density.is_dir() else None)
    map_candidates = [
        (gt_path / video / "fixations", gt_path / video / "density"),
        (gt_path / video, gt_path / video / "density"),
    ]
    if single_video:
        map_candidates.append((gt_path, gt_path / "density"))
    for cand, density in map_candidates:
        if cand.is_dir():
            try:
                return bio.load_fixation_maps(cand), (
                    density if density.is_dir() else None)
            except IOError:
                continue
    raise IOError(f"no ground truth found for video {video!r} under {gt_path}")


def _score_video(pred_dir: Path, fixations: dict, density_dir,
                 pool_points, seed: int, permutations: int) -> MetricReport:
    report = MetricReport(seed=seed)
    pred_files = sorted(
        p for p in pred_dir.iterdir()
        if p.suffix.lower() in bio.IMAGE_EXTENSIONS + (".npy",)
    )
    if not pred_files:
        raise IOError(f"no prediction maps in {pred_dir}")
    densities = bio.load_density_dir(density_dir) if density_dir else {}
    for index, path in enumerate(pred_files):
        points = fixations.get(index)
        if points is None or len(points) == 0:
            continue
        pred = bio.read_saliency_map(path)
        gt_density = densities.get(index)
        if gt_density is None:
            gt_density = density_from_fixations(pred.shape, points)
        elif gt_density.shape != pred.shape:
            raise IOError(f"density/prediction shape mismatch at frame {index}")
        values = {
            "nss": nss(pred, points),
            "cc": cc(pred, gt_density),
            "sim": sim(pred, gt_density) if pred.sum() > 0 else 0.0,
            "auc_judd": auc_judd(pred, points),
        }
        if pool_points is not None and len(pool_points):
            h, w = pred.shape
            inside = pool_points[(pool_points[:, 0] >= 0)
                                 & (pool_points[:, 0] < w)
                                 & (pool_points[:, 1] >= 0)
                                 & (pool_points[:, 1] < h)]
            if len(inside):
                values["shuffled_auc"] = shuffled_auc(
                    pred, points, inside, permutations=permutations,
                    seed=seed ^ index)
        report.add_frame(**values)
    return report


def cmd_eval(args) -> int:
    pred_root = Path(args.input)
    gt_path = Path(args.gt)
    if not pred_root.exists():
        raise IOError(f"prediction path does not exist: {pred_root}")
    videos = _video_prediction_dirs(pred_root)
    single = len(videos) == 1

    gt_by_video = {}
    density_by_video = {}
    for name in videos:
        gt_by_video[name], density_by_video[name] = _resolve_gt(
            gt_path, name, single)
    pools = {}
    if not single:
        for name in videos:
            other = [pts for o, fx in gt_by_video.items() if o != name
                     for pts in fx.values()]
            pools[name] = np.concatenate(other) if other else None
    else:
        pools[next(iter(videos))] = None
        print("note: single video input, shuffled AUC skipped "
              "(needs other videos' fixations)", file=sys.stderr)

    per_video: dict[str, MetricReport] = {}
    for name, pred_dir in videos.items():
        per_video[name] = _score_video(
            pred_dir, gt_by_video[name], density_by_video[name],
            pools[name], args.seed, args.permutations)

    lines = []
    for name, report in per_video.items():
        cells = " ".join(
            f"{metric}={value:.6f}" if value is not None else f"{metric}=nan"
            for metric, value in report.summary().items())
        lines.append(f"video={name} {cells}")
    overall = {}
    for metric in MetricReport._NAMES:
        vals = [r.mean(metric) for r in per_video.values()
                if r.mean(metric) is not None]
        overall[metric] = float(np.mean(vals)) if vals else None
    cells = " ".join(
        f"{metric}={value:.6f}" if value is not None else f"{metric}=nan"
        for metric, value in overall.items())
    lines.append(f"overall seed={args.seed} {cells}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_bench(args) -> int:
    cfg = _resolve_config(args)
    stage_times: dict[str, list[float]] = {}
    for _ in range(args.repeat):
        if args.input:
            frames = bio.prefetch(
                bio.read_frames(args.input, _parse_raw_dims(args.raw_dims)))
        else:
            frames = make_bench_clip(args.frames, seed=args.seed)
        for result in process_stream(frames, cfg):
            for stage, secs in result.timings.items():
                stage_times.setdefault(stage, []).append(secs * 1e3)
    if not stage_times:
        raise IOError("benchmark processed no frames")
    total = np.asarray(stage_times["total"])
    print(f"frames={total.size} threads={cfg.threads} "
          f"size={'input' if args.input else '640x480 synthetic'}")
    for stage, samples in stage_times.items():
        arr = np.asarray(samples)
        print(f"p50_{stage}_ms={np.percentile(arr, 50):.3f} "
              f"p95_{stage}_ms={np.percentile(arr, 95):.3f}")
    print(f"throughput_fps={1e3 / total.mean():.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bias",
        description="Bottom-up video saliency engine: run, evaluate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process frames and write saliency outputs")
    run.add_argument("--input", required=True,
                     help="frame directory, raw RGB24 file, or '-' for stdin")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--emit", default="saliency",
                     help=f"comma list of {','.join(bio.EMIT_KINDS)}")
    run.add_argument("--raw-dims", help="WxH for raw RGB24 input")
    run.add_argument("--format", default="png", choices=("png", "pgm"))
    run.add_argument("--float-out", action="store_true",
                     help="write float32 .npy maps instead of 8-bit images")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score saved predictions against ground truth")
    ev.add_argument("--input", required=True,
                    help="prediction maps: one directory per video, or one video's maps")
    ev.add_argument("--gt", required=True,
                    help="fixation ground truth: 'frame x y' text or fixation-map images")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--permutations", type=int, default=100,
                    help="random negative sets per frame for shuffled AUC")
    ev.add_argument("--out", help="also write the report to this file")
    ev.set_defaults(func=cmd_eval)

    bench = sub.add_parser("bench", help="measure per-frame latency")
    bench.add_argument("--frames", type=int, default=100,
                       help="synthetic clip length")
    bench.add_argument("--repeat", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--input", help="optional real clip instead of synthetic")
    bench.add_argument("--raw-dims", help="WxH for raw RGB24 input")
    _add_common(bench)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IOError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
