"""Detection dataset ingestion, statistics, and tail-class patch extraction.

The on-disk format is a COCO-style JSON subset with three top-level arrays:
``images`` (id, file_name, width, height), ``annotations`` (id, image_id,
category_id, bbox as [x, y, w, h] in pixels, optional ``synthetic`` flag) and
``categories`` (id, name). Unknown keys are dropped with a warning; output is
written in a canonical order (everything sorted by id) so repeated writes are
byte-stable.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from padx.core import BBox, ImageBuffer, crop
from padx.errors import DatasetError
from padx.imgio import ImageStore

logger = logging.getLogger(__name__)

_IMAGE_KEYS = {"id", "file_name", "width", "height"}
_ANN_KEYS = {"id", "image_id", "category_id", "bbox", "synthetic"}
_CAT_KEYS = {"id", "name"}
_TOP_KEYS = {"images", "annotations", "categories"}


@dataclass(frozen=True)
class ImageRecord:
    id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class Instance:
    id: int
    image_id: int
    category_id: int
    bbox: BBox
    synthetic: bool = False


@dataclass(frozen=True)
class Category:
    id: int
    name: str


@dataclass(frozen=True)
class Dataset:
    images: tuple[ImageRecord, ...]
    annotations: tuple[Instance, ...]
    categories: tuple[Category, ...]

    def __post_init__(self) -> None:
        _check_unique_ids(self.images, "image")
        _check_unique_ids(self.annotations, "annotation")
        _check_unique_ids(self.categories, "category")
        images_by_id = {im.id: im for im in self.images}
        cat_ids = {c.id for c in self.categories}
        for ann in self.annotations:
            if ann.image_id not in images_by_id:
                raise DatasetError(
                    f"annotation {ann.id} references missing image id {ann.image_id}"
                )
            if ann.category_id not in cat_ids:
                raise DatasetError(
                    f"annotation {ann.id} references missing category id {ann.category_id}"
                )
            im = images_by_id[ann.image_id]
            b = ann.bbox
            if b.x < 0 or b.y < 0 or b.x2 > im.width or b.y2 > im.height:
                raise DatasetError(
                    f"annotation {ann.id} bbox ({b.x}, {b.y}, {b.w}, {b.h}) exceeds "
                    f"image {im.id} bounds {im.width}x{im.height}"
                )

    def images_by_id(self) -> dict[int, ImageRecord]:
        return {im.id: im for im in self.images}

    def annotations_of_image(self, image_id: int) -> list[Instance]:
        return [a for a in self.annotations if a.image_id == image_id]

    def category_names(self) -> dict[int, str]:
        return {c.id: c.name for c in self.categories}


@dataclass(frozen=True)
class ClassStats:
    counts: dict[int, int] = field(default_factory=dict)
    total: int = 0

    @property
    def frequencies(self) -> dict[int, float]:
        if self.total == 0:
            return {cid: 0.0 for cid in self.counts}
        return {cid: n / self.total for cid, n in self.counts.items()}


def _check_unique_ids(records, kind: str) -> None:
    seen: set[int] = set()
    for rec in records:
        if rec.id in seen:
            raise DatasetError(f"duplicate {kind} id {rec.id}")
        seen.add(rec.id)


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise DatasetError(f"{context}: missing required field '{key}'")
    return obj[key]


def _as_int(value, context: str) -> int:
    if isinstance(value, bool):
        raise DatasetError(f"{context}: expected integer, got boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise DatasetError(f"{context}: expected integer pixel value, got {value!r}")


def _warn_unknown(obj: dict, known: set, context: str) -> None:
    extra = set(obj) - known
    if extra:
        logger.warning("%s: dropping unknown keys %s", context, sorted(extra))


def load_dataset(path: str | Path) -> Dataset:
    """Parse and fully validate an annotation file."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise DatasetError(f"annotation file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(
            f"cannot parse {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc

    if not isinstance(raw, dict):
        raise DatasetError(f"{path}: top level must be a JSON object")
    for key in _TOP_KEYS:
        if key not in raw or not isinstance(raw[key], list):
            raise DatasetError(f"{path}: missing or non-array top-level key '{key}'")
    _warn_unknown(raw, _TOP_KEYS, str(path))

    images = []
    for i, obj in enumerate(raw["images"]):
        ctx = f"images[{i}]"
        _warn_unknown(obj, _IMAGE_KEYS, ctx)
        images.append(ImageRecord(
            id=_as_int(_require(obj, "id", ctx), f"{ctx}.id"),
            file_name=str(_require(obj, "file_name", ctx)),
            width=_as_int(_require(obj, "width", ctx), f"{ctx}.width"),
            height=_as_int(_require(obj, "height", ctx), f"{ctx}.height"),
        ))

    annotations = []
    for i, obj in enumerate(raw["annotations"]):
        ctx = f"annotations[{i}]"
        _warn_unknown(obj, _ANN_KEYS, ctx)
        bbox_raw = _require(obj, "bbox", ctx)
        if not isinstance(bbox_raw, list) or len(bbox_raw) != 4:
            raise DatasetError(f"{ctx}.bbox: expected [x, y, w, h]")
        x, y, w, h = (_as_int(v, f"{ctx}.bbox[{j}]") for j, v in enumerate(bbox_raw))
        if w <= 0 or h <= 0:
            raise DatasetError(f"{ctx}.bbox: non-positive extent w={w}, h={h}")
        annotations.append(Instance(
            id=_as_int(_require(obj, "id", ctx), f"{ctx}.id"),
            image_id=_as_int(_require(obj, "image_id", ctx), f"{ctx}.image_id"),
            category_id=_as_int(_require(obj, "category_id", ctx), f"{ctx}.category_id"),
            bbox=BBox(x, y, w, h),
            synthetic=bool(obj.get("synthetic", False)),
        ))

    categories = []
    for i, obj in enumerate(raw["categories"]):
        ctx = f"categories[{i}]"
        _warn_unknown(obj, _CAT_KEYS, ctx)
        categories.append(Category(
            id=_as_int(_require(obj, "id", ctx), f"{ctx}.id"),
            name=str(_require(obj, "name", ctx)),
        ))

    return Dataset(tuple(images), tuple(annotations), tuple(categories))


def write_dataset(ds: Dataset, path: str | Path) -> None:
    """Serialize in canonical order; load(write(ds)) reproduces ds exactly."""
    doc = {
        "images": [
            {"id": im.id, "file_name": im.file_name, "width": im.width, "height": im.height}
            for im in sorted(ds.images, key=lambda im: im.id)
        ],
        "annotations": [
            _ann_to_json(a) for a in sorted(ds.annotations, key=lambda a: a.id)
        ],
        "categories": [
            {"id": c.id, "name": c.name}
            for c in sorted(ds.categories, key=lambda c: c.id)
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ann_to_json(a: Instance) -> dict:
    obj = {
        "id": a.id,
        "image_id": a.image_id,
        "category_id": a.category_id,
        "bbox": [a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h],
    }
    if a.synthetic:
        obj["synthetic"] = True
    return obj


def class_histogram(ds: Dataset) -> ClassStats:
    """Instance counts per category; categories with no instances count 0."""
    counts = {c.id: 0 for c in ds.categories}
    for ann in ds.annotations:
        counts[ann.category_id] += 1
    return ClassStats(counts=counts, total=len(ds.annotations))


def split_head_tail(stats: ClassStats, threshold: float = 0.1) -> tuple[set[int], set[int]]:
    """Partition populated categories: tail iff count < threshold * max count.

    The inequality is strict, so a category exactly at the threshold is head.
    Categories with zero instances belong to neither set (there is nothing to
    resample for them).
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    populated = {cid: n for cid, n in stats.counts.items() if n > 0}
    if not populated:
        return set(), set()
    cutoff = threshold * max(populated.values())
    tail = {cid for cid, n in populated.items() if n < cutoff}
    head = set(populated) - tail
    return head, tail


def extract_instances(ds: Dataset, category_id: int,
                      store: ImageStore) -> list[tuple[ImageBuffer, Instance]]:
    """Crop one patch per annotation of the category. Never skips silently."""
    if category_id not in {c.id for c in ds.categories}:
        raise DatasetError(f"unknown category id {category_id}")
    images = ds.images_by_id()
    out = []
    cache: dict[int, ImageBuffer] = {}
    for ann in ds.annotations:
        if ann.category_id != category_id:
            continue
        if ann.image_id not in cache:
            cache[ann.image_id] = store.load(images[ann.image_id].file_name)
        out.append((crop(cache[ann.image_id], ann.bbox), ann))
    return out
