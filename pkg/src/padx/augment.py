"""Tail-class augmentation pipeline: crop, host pairing, placement, fusion.

For every instance of every tail class (and each requested copy) the pipeline
crops the instance patch, samples a host image containing head-class objects,
pairs the patch with the most contrasting host object, draws a placement over
that host, and fuses the patch in with the Poisson blender. Each successful
job yields one new image file plus one synthetic annotation; originals are
never modified.

Every (instance, copy) job derives its own RNG stream from
(seed, instance id, copy index), so results do not depend on traversal order
or on how many workers run the jobs.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from padx.core import BBox, BinaryMask, ImageBuffer, crop
from padx.dataset import (Dataset, ImageRecord, Instance,
                          class_histogram, split_head_tail)
from padx.errors import ImageIOError, PlacementInfeasibleError
from padx.imgio import ImageStore, write_png
from padx.material import (DEFAULT_COMPLEXITY_WEIGHT, MIN_PATCH,
                           propose_placement, select_host)
from padx.poisson import BlendProblem, blend

logger = logging.getLogger(__name__)

SKIP_INFEASIBLE = "infeasible_placement"
SKIP_UNREADABLE = "unreadable_image"
SKIP_NO_HOST = "no_host_available"


@dataclass(frozen=True)
class AugmentConfig:
    tail_threshold: float = 0.1
    copies_per_instance: int = 1
    complexity_weight: float = DEFAULT_COMPLEXITY_WEIGHT
    seed: int = 0
    min_patch: int = MIN_PATCH
    host_sample_attempts: int = 16

    def __post_init__(self) -> None:
        if not 0 < self.tail_threshold < 1:
            raise ValueError(f"tail_threshold must lie in (0, 1), got {self.tail_threshold}")
        for name in ("copies_per_instance", "min_patch", "host_sample_attempts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass
class ClassAugmentStats:
    seen: int = 0
    generated: int = 0
    skipped: dict[str, int] = field(default_factory=lambda: {
        SKIP_INFEASIBLE: 0, SKIP_UNREADABLE: 0, SKIP_NO_HOST: 0,
    })

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())


@dataclass
class AugmentReport:
    per_class: dict[int, ClassAugmentStats] = field(default_factory=dict)
    tail_classes: list[int] = field(default_factory=list)
    warning: str | None = None

    @property
    def total_generated(self) -> int:
        return sum(s.generated for s in self.per_class.values())

    def to_dict(self) -> dict:
        return {
            "tail_classes": list(self.tail_classes),
            "per_class": {
                str(cid): {
                    "seen": s.seen,
                    "generated": s.generated,
                    "skipped": dict(s.skipped),
                }
                for cid, s in sorted(self.per_class.items())
            },
            "total_generated": self.total_generated,
            "warning": self.warning,
        }


def job_rng(seed: int, instance_id: int, copy_index: int) -> np.random.Generator:
    """Per-job stream: independent of traversal and worker scheduling."""
    mask64 = (1 << 64) - 1
    return np.random.default_rng((seed & mask64, instance_id & mask64, copy_index))


def resize_bilinear(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    """Pixel-center-aligned bilinear resample to (out_w, out_h)."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be positive, got {out_w}x{out_h}")
    if (out_w, out_h) == (img.width, img.height):
        return img
    src = img.pixels.astype(np.float64)
    h, w = src.shape[:2]
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0.0, w - 1.0)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[np.newaxis, :, np.newaxis]
    fy = (ys - y0)[:, np.newaxis, np.newaxis]
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy) + bot * fy
    return ImageBuffer(np.rint(out).astype(np.uint8))


def augment_instance(host_img: ImageBuffer, host_objects: list[Instance],
                     patch: ImageBuffer, cfg: AugmentConfig,
                     rng: np.random.Generator) -> tuple[ImageBuffer, BBox]:
    """Fuse one tail patch over the best-contrasting host object.

    Raises PlacementInfeasibleError (skip signal) when no valid placement
    exists in this host image.
    """
    if not host_objects:
        raise ValueError("host_objects is empty")
    selection = select_host(
        [(inst, host_img) for inst in host_objects], patch, cfg.complexity_weight
    )
    placement, scale = propose_placement(
        selection.instance.bbox, patch.width, patch.height,
        host_img.width, host_img.height, rng, min_patch=cfg.min_patch,
    )
    scaled = patch if scale >= 1.0 else resize_bilinear(patch, placement.w, placement.h)
    problem = BlendProblem(
        target=host_img,
        source=scaled,
        mask=BinaryMask.full(scaled.width, scaled.height),
        offset=(placement.x, placement.y),
    )
    return blend(problem), placement


@dataclass(frozen=True)
class _JobResult:
    instance_id: int
    copy_index: int
    category_id: int
    skip_reason: str | None = None
    composite: ImageBuffer | None = None
    placement: BBox | None = None
    host_record: ImageRecord | None = None


def _run_job(ds_images: dict[int, ImageRecord], host_records: list[ImageRecord],
             head_by_image: dict[int, list[Instance]], store: ImageStore,
             instance: Instance, copy_index: int,
             cfg: AugmentConfig) -> _JobResult:
    rng = job_rng(cfg.seed, instance.id, copy_index)
    base = _JobResult(instance.id, copy_index, instance.category_id)

    try:
        src_img = store.load(ds_images[instance.image_id].file_name)
    except ImageIOError as exc:
        logger.warning("skipping instance %d: %s", instance.id, exc)
        return replace(base, skip_reason=SKIP_UNREADABLE)
    patch = crop(src_img, instance.bbox)

    if not host_records:
        return replace(base, skip_reason=SKIP_NO_HOST)

    saw_unreadable = False
    for _ in range(cfg.host_sample_attempts):
        record = host_records[int(rng.integers(len(host_records)))]
        try:
            host_img = store.load(record.file_name)
        except ImageIOError as exc:
            logger.warning("host image unreadable, resampling: %s", exc)
            saw_unreadable = True
            continue
        try:
            composite, placement = augment_instance(
                host_img, head_by_image[record.id], patch, cfg, rng
            )
        except PlacementInfeasibleError:
            continue
        return _JobResult(instance.id, copy_index, instance.category_id,
                          composite=composite, placement=placement,
                          host_record=record)
    reason = SKIP_UNREADABLE if saw_unreadable else SKIP_INFEASIBLE
    return replace(base, skip_reason=reason)


def augment_dataset(ds: Dataset, store: ImageStore, cfg: AugmentConfig,
                    out_dir: str | Path, jobs: int = 1) -> tuple[Dataset, AugmentReport]:
    """Run the full augmentation pass and write composites under out_dir.

    Returns the enlarged dataset (originals plus appended synthetic records)
    and a per-class report. I/O problems and infeasible pairings are recorded
    as skips, never raised.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    stats = class_histogram(ds)
    head, tail = split_head_tail(stats, cfg.tail_threshold)
    report = AugmentReport(tail_classes=sorted(tail))
    if not tail:
        report.warning = "no tail classes at this threshold; nothing to augment"
        logger.warning(report.warning)
        return ds, report

    images_by_id = ds.images_by_id()
    head_by_image: dict[int, list[Instance]] = {}
    for ann in ds.annotations:
        if ann.category_id in head:
            head_by_image.setdefault(ann.image_id, []).append(ann)
    host_records = sorted(
        (images_by_id[iid] for iid in head_by_image), key=lambda r: r.id
    )

    for cid in sorted(tail):
        report.per_class[cid] = ClassAugmentStats()

    job_args = []
    for ann in sorted(ds.annotations, key=lambda a: a.id):
        if ann.category_id not in tail:
            continue
        report.per_class[ann.category_id].seen += 1
        for copy_index in range(cfg.copies_per_instance):
            job_args.append((ann, copy_index))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                lambda args: _run_job(images_by_id, host_records, head_by_image,
                                      store, args[0], args[1], cfg),
                job_args,
            ))
    else:
        results = [
            _run_job(images_by_id, host_records, head_by_image, store, ann, ci, cfg)
            for ann, ci in job_args
        ]

    # Deterministic merge: id assignment follows (instance id, copy index),
    # never worker completion order.
    results.sort(key=lambda r: (r.instance_id, r.copy_index))
    next_image_id = max((im.id for im in ds.images), default=0) + 1
    next_ann_id = max((a.id for a in ds.annotations), default=0) + 1
    new_images: list[ImageRecord] = []
    new_anns: list[Instance] = []
    for res in results:
        if res.skip_reason is not None:
            report.per_class[res.category_id].skipped[res.skip_reason] += 1
            continue
        stem = Path(res.host_record.file_name).stem
        file_name = f"{stem}__aug_{res.instance_id}_{res.copy_index}.png"
        write_png(res.composite, out_dir / file_name)
        new_images.append(ImageRecord(
            id=next_image_id, file_name=file_name,
            width=res.composite.width, height=res.composite.height,
        ))
        new_anns.append(Instance(
            id=next_ann_id, image_id=next_image_id,
            category_id=res.category_id, bbox=res.placement, synthetic=True,
        ))
        report.per_class[res.category_id].generated += 1
        next_image_id += 1
        next_ann_id += 1

    augmented = Dataset(
        images=ds.images + tuple(new_images),
        annotations=ds.annotations + tuple(new_anns),
        categories=ds.categories,
    )
    return augmented, report
