"""Command-line surface for the toolkit.

Exit codes are a stable contract: 0 success, 1 check or write failure,
2 usage/input error. Reports go to stdout (text by default, ``--format
json`` for machines); logging goes to stderr. ``PADX_LOG`` overrides
``--log-level``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

import padx
from padx import benchmark as bench
from padx import ica as ica_mod
from padx.core import BBox, BinaryMask
from padx.dataset import class_histogram, load_dataset, split_head_tail, write_dataset
from padx.augment import AugmentConfig, augment_dataset
from padx.errors import (BoundaryViolationError, ConvergenceError, DatasetError,
                         ImageIOError)
from padx.imgio import ImageStore, read_image, write_png
from padx.metrics import Detection, evaluate
from padx.poisson import BlendProblem, blend

GRADCHECK_LIMIT = 1e-5
KSWEEP_VALUES = (2, 4, 8, 16)

logger = logging.getLogger("padx")


def _configure_logging(level_name: str) -> None:
    level_name = os.environ.get("PADX_LOG", level_name)
    level = getattr(logging, level_name.upper(), None)
    if level is None:
        raise ValueError(f"unknown log level '{level_name}'")
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        if not 0 < args.tail_threshold < 1:
            raise ValueError(
                f"--tail-threshold must lie in (0, 1), got {args.tail_threshold}")
        ds = load_dataset(args.annotations)
    except (DatasetError, ValueError) as exc:
        return _fail(str(exc), 2)

    stats = class_histogram(ds)
    head, tail = split_head_tail(stats, args.tail_threshold)
    names = ds.category_names()
    freqs = stats.frequencies

    if args.format == "json":
        doc = {
            "total_instances": stats.total,
            "tail_threshold": args.tail_threshold,
            "categories": [
                {
                    "id": cid,
                    "name": names[cid],
                    "count": stats.counts[cid],
                    "frequency": freqs[cid],
                    "split": "tail" if cid in tail else
                             ("head" if cid in head else "empty"),
                }
                for cid in sorted(stats.counts)
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"{'id':>6}  {'name':<20} {'count':>7} {'freq':>8}  split")
        for cid in sorted(stats.counts):
            split = "tail" if cid in tail else ("head" if cid in head else "empty")
            print(f"{cid:>6}  {names[cid]:<20} {stats.counts[cid]:>7} "
                  f"{freqs[cid]:>8.4f}  {split}")
        print(f"total instances: {stats.total}; "
              f"tail classes: {sorted(tail) if tail else 'none'}")
    return 0


def cmd_augment(args: argparse.Namespace) -> int:
    try:
        cfg = AugmentConfig(
            tail_threshold=args.tail_threshold,
            copies_per_instance=args.copies,
            complexity_weight=args.complexity_weight,
            seed=args.seed,
            min_patch=args.min_patch,
            host_sample_attempts=args.attempts,
        )
        ds = load_dataset(args.annotations)
    except (DatasetError, ValueError) as exc:
        return _fail(str(exc), 2)

    out_dir = Path(args.out)
    store = ImageStore(args.images)
    try:
        augmented, report = augment_dataset(ds, store, cfg, out_dir, jobs=args.jobs)
        write_dataset(augmented, out_dir / "annotations.json")
        with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        return _fail(f"cannot write outputs: {exc}", 1)

    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        if report.warning:
            print(f"warning: {report.warning}")
        print(f"{'class':>6} {'seen':>6} {'generated':>10} {'skipped':>8}")
        for cid, s in sorted(report.per_class.items()):
            print(f"{cid:>6} {s.seen:>6} {s.generated:>10} {s.skipped_total:>8}")
            for reason, count in sorted(s.skipped.items()):
                if count:
                    print(f"{'':>6} {'':>6} {'':>10}   {reason}: {count}")
        print(f"total generated: {report.total_generated}")
    return 0


def cmd_blend(args: argparse.Namespace) -> int:
    try:
        target = read_image(args.target)
        source = read_image(args.source)
        if args.mask is not None:
            mask_img = read_image(args.mask)
            mask = BinaryMask(mask_img.pixels[:, :, 0] >= 128)
        else:
            mask = BinaryMask.full(source.width, source.height)
        problem = BlendProblem(target=target, source=source, mask=mask,
                               offset=(args.offset[0], args.offset[1]))
        result = blend(problem)
    except (BoundaryViolationError, ImageIOError, ValueError) as exc:
        return _fail(str(exc), 2)
    except ConvergenceError as exc:
        return _fail(str(exc), 1)
    try:
        write_png(result, args.out)
    except (ImageIOError, OSError) as exc:
        return _fail(str(exc), 1)
    return 0


def cmd_ica_gradcheck(args: argparse.Namespace) -> int:
    try:
        params, ps = ica_mod.gradcheck_case(
            d=args.d, k=args.k, C=args.c, seed=args.seed,
            m=args.m, eps=args.eps,
        )
        err = ica_mod.grad_check(params, ps, eps=args.eps)
    except ValueError as exc:
        return _fail(str(exc), 2)
    status = "ok" if err <= GRADCHECK_LIMIT else "FAIL"
    print(f"max rel err {err:.3e} (limit {GRADCHECK_LIMIT:.1e}) {status}")
    return 0 if err <= GRADCHECK_LIMIT else 1


def cmd_ica_demo(args: argparse.Namespace) -> int:
    try:
        result = bench.synth_cooccurrence_benchmark(args.seed, steps=args.steps,
                                                    k=args.k)
    except ValueError as exc:
        return _fail(str(exc), 2)
    print(f"baseline accuracy (ambiguous proposals): {result.baseline_accuracy:.4f}")
    print(f"aggregator accuracy (ambiguous proposals): {result.ica_accuracy:.4f}")
    print(f"gap: {result.gap:+.4f}")
    return 0


def cmd_ica_ksweep(args: argparse.Namespace) -> int:
    try:
        print(f"{'k':>4} {'baseline':>10} {'aggregated':>11}")
        for k in KSWEEP_VALUES:
            result = bench.synth_cooccurrence_benchmark(args.seed, steps=args.steps, k=k)
            print(f"{k:>4} {result.baseline_accuracy:>10.4f} {result.ica_accuracy:>11.4f}")
    except ValueError as exc:
        return _fail(str(exc), 2)
    return 0


def _load_predictions(path: str) -> list[Detection]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise DatasetError(f"predictions file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"cannot parse {path}: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(raw, list):
        raise DatasetError(f"{path}: predictions must be a JSON array")
    dets = []
    for i, obj in enumerate(raw):
        ctx = f"predictions[{i}]"
        if not isinstance(obj, dict):
            raise DatasetError(f"{ctx}: expected an object")
        try:
            bbox = obj["bbox"]
            if not isinstance(bbox, list) or len(bbox) != 4:
                raise DatasetError(f"{ctx}.bbox: expected [x, y, w, h]")
            dets.append(Detection(
                image_id=int(obj["image_id"]),
                category_id=int(obj["category_id"]),
                bbox=BBox(int(bbox[0]), int(bbox[1]), int(bbox[2]), int(bbox[3])),
                score=float(obj["score"]),
            ))
        except KeyError as exc:
            raise DatasetError(f"{ctx}: missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{ctx}: {exc}") from exc
    return dets


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        ds = load_dataset(args.annotations)
        dets = _load_predictions(args.predictions)
        result = evaluate(dets, ds, thresh=args.iou_thresh)
    except (DatasetError, ValueError) as exc:
        return _fail(str(exc), 2)

    names = ds.category_names()
    if args.format == "json":
        doc = {
            "mean_ap50": result.mean_ap,
            "iou_threshold": args.iou_thresh,
            "categories": [
                {
                    "id": cid, "name": names[cid], "ap50": ce.ap,
                    "num_gt": ce.num_gt, "tp": ce.tp, "fp": ce.fp, "fn": ce.fn,
                }
                for cid, ce in sorted(result.per_category.items())
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"{'id':>6}  {'name':<20} {'AP50':>8} {'gt':>5} {'tp':>5} {'fp':>5} {'fn':>5}")
        for cid, ce in sorted(result.per_category.items()):
            ap_txt = f"{ce.ap:.4f}" if ce.ap is not None else "   n/a"
            print(f"{cid:>6}  {names[cid]:<20} {ap_txt:>8} "
                  f"{ce.num_gt:>5} {ce.tp:>5} {ce.fp:>5} {ce.fn:>5}")
        print(f"mean AP50: {result.mean_ap:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padx",
        description="Material-aware augmentation, feature fusion, and AP50 "
                    "scoring for long-tailed X-ray detection data.",
    )
    parser.add_argument("--version", action="version", version=padx.__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default="warning",
                        help="debug|info|warning|error (env PADX_LOG overrides)")

    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", parents=[common],
                             help="class histogram and head/tail split")
    p_stats.add_argument("annotations")
    p_stats.add_argument("--tail-threshold", type=float, default=0.1)
    p_stats.add_argument("--format", choices=("text", "json"), default="text")
    p_stats.set_defaults(func=cmd_stats)

    p_aug = sub.add_parser("augment", parents=[common],
                           help="generate blended tail-class samples")
    p_aug.add_argument("annotations")
    p_aug.add_argument("--images", required=True, help="image root directory")
    p_aug.add_argument("--out", required=True, help="output directory")
    p_aug.add_argument("--tail-threshold", type=float, default=0.1)
    p_aug.add_argument("--copies", type=int, default=1,
                       help="augmented copies per tail instance")
    p_aug.add_argument("--complexity-weight", type=float, default=0.5)
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--min-patch", type=int, default=8)
    p_aug.add_argument("--attempts", type=int, default=16,
                       help="host images tried before skipping a pairing")
    p_aug.add_argument("--jobs", type=int, default=1)
    p_aug.add_argument("--format", choices=("text", "json"), default="text")
    p_aug.set_defaults(func=cmd_augment)

    p_blend = sub.add_parser("blend", parents=[common],
                             help="Poisson-blend one source patch into a target")
    p_blend.add_argument("--target", required=True)
    p_blend.add_argument("--source", required=True)
    p_blend.add_argument("--mask", default=None,
                         help="gray PNG, >=128 marks the region; defaults to "
                              "the full source rectangle")
    p_blend.add_argument("--offset", type=int, nargs=2, required=True,
                         metavar=("DX", "DY"))
    p_blend.add_argument("--out", required=True)
    p_blend.set_defaults(func=cmd_blend)

    p_ica = sub.add_parser("ica", parents=[common],
                           help="co-occurrence aggregator checks and demos")
    ica_sub = p_ica.add_subparsers(dest="ica_command", required=True)

    p_gc = ica_sub.add_parser("gradcheck", parents=[common])
    p_gc.add_argument("--d", type=int, default=4)
    p_gc.add_argument("--k", type=int, default=4)
    p_gc.add_argument("--m", type=int, default=None)
    p_gc.add_argument("--c", type=int, default=3)
    p_gc.add_argument("--seed", type=int, default=7)
    p_gc.add_argument("--eps", type=float, default=1e-5)
    p_gc.set_defaults(func=cmd_ica_gradcheck)

    p_demo = ica_sub.add_parser("demo", parents=[common])
    p_demo.add_argument("--seed", type=int, default=1)
    p_demo.add_argument("--steps", type=int, default=bench.DEFAULT_STEPS)
    p_demo.add_argument("--k", type=int, default=ica_mod.DEFAULT_K)
    p_demo.set_defaults(func=cmd_ica_demo)

    p_sweep = ica_sub.add_parser("ksweep", parents=[common])
    p_sweep.add_argument("--seed", type=int, default=1)
    p_sweep.add_argument("--steps", type=int, default=bench.DEFAULT_STEPS)
    p_sweep.set_defaults(func=cmd_ica_ksweep)

    p_eval = sub.add_parser("eval", parents=[common],
                            help="score predictions against ground truth")
    p_eval.add_argument("predictions")
    p_eval.add_argument("annotations")
    p_eval.add_argument("--iou-thresh", type=float, default=0.5)
    p_eval.add_argument("--format", choices=("text", "json"), default="text")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(args.log_level)
    except ValueError as exc:
        return _fail(str(exc), 2)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())
