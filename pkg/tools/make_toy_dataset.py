#!/usr/bin/env python3
"""Regenerate the committed toy detection dataset (tests/data/toy).

12 pseudocolor 96x96 scans, three categories: 'block' (head, dark blue),
'disc' (head, orange), 'rod' (tail, dark red, exactly 2 instances so it
falls under the default 0.1 tail threshold). All objects sit >= 12 px from
the border and are at least 14 px on a side, so every (rod, host) pairing
admits a placement and the augmentation acceptance counts are exact.

Deterministic: one fixed seed, byte-stable PNG and JSON output.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from padx.core import BBox, ImageBuffer
from padx.dataset import Category, Dataset, ImageRecord, Instance, write_dataset
from padx.imgio import write_png

SIZE = 96
SEED = 20240
N_IMAGES = 12


def draw_rect(px: np.ndarray, box: BBox, color, rng) -> None:
    block = np.array(color, dtype=np.float64) + rng.normal(0, 6, (box.h, box.w, 3))
    px[box.y:box.y2, box.x:box.x2] = np.clip(block, 0, 255).astype(np.uint8)


def draw_disc(px: np.ndarray, box: BBox, color, rng) -> None:
    yy, xx = np.mgrid[0:box.h, 0:box.w]
    cy, cx = (box.h - 1) / 2, (box.w - 1) / 2
    inside = ((yy - cy) / (box.h / 2)) ** 2 + ((xx - cx) / (box.w / 2)) ** 2 <= 1.0
    patch = px[box.y:box.y2, box.x:box.x2].astype(np.float64)
    tint = np.array(color, dtype=np.float64) + rng.normal(0, 6, (box.h, box.w, 3))
    patch[inside] = np.clip(tint, 0, 255)[inside]
    px[box.y:box.y2, box.x:box.x2] = patch.astype(np.uint8)


def random_box(rng, w_range, h_range, taken: list[BBox]) -> BBox:
    for _ in range(200):
        w = int(rng.integers(*w_range))
        h = int(rng.integers(*h_range))
        x = int(rng.integers(12, SIZE - 12 - w))
        y = int(rng.integers(12, SIZE - 12 - h))
        box = BBox(x, y, w, h)
        if all(x >= b.x2 + 2 or b.x >= box.x2 + 2 or y >= b.y2 + 2 or b.y >= box.y2 + 2
               for b in taken):
            return box
    raise RuntimeError("could not place a non-overlapping box")


def main(out_root: Path) -> None:
    rng = np.random.default_rng(SEED)
    img_dir = out_root / "images"
    img_dir.mkdir(parents=True, exist_ok=True)

    images: list[ImageRecord] = []
    annotations: list[Instance] = []
    ann_id = 1
    rod_images = {3, 8}  # exactly two tail instances in the whole set

    for image_id in range(1, N_IMAGES + 1):
        base = np.array([208, 228, 214], dtype=np.float64)
        px = np.clip(
            base + rng.normal(0, 4, (SIZE, SIZE, 3)), 0, 255
        ).astype(np.uint8)
        taken: list[BBox] = []

        for _ in range(int(rng.integers(2, 4))):  # blocks: 2..3 per image
            box = random_box(rng, (16, 30), (16, 30), taken)
            draw_rect(px, box, (45, 60, 150), rng)
            annotations.append(Instance(ann_id, image_id, 1, box))
            ann_id += 1
            taken.append(box)

        box = random_box(rng, (14, 24), (14, 24), taken)  # one disc per image
        draw_disc(px, box, (235, 160, 70), rng)
        annotations.append(Instance(ann_id, image_id, 2, box))
        ann_id += 1
        taken.append(box)

        if image_id in rod_images:
            box = random_box(rng, (10, 13), (16, 20), taken)
            draw_rect(px, box, (140, 40, 45), rng)
            annotations.append(Instance(ann_id, image_id, 3, box))
            ann_id += 1
            taken.append(box)

        name = f"scan_{image_id:02d}.png"
        write_png(ImageBuffer(px), img_dir / name)
        images.append(ImageRecord(image_id, name, SIZE, SIZE))

    ds = Dataset(
        images=tuple(images),
        annotations=tuple(annotations),
        categories=(Category(1, "block"), Category(2, "disc"), Category(3, "rod")),
    )
    write_dataset(ds, out_root / "annotations.json")
    counts = {cid: sum(1 for a in annotations if a.category_id == cid) for cid in (1, 2, 3)}
    print(f"wrote {len(images)} images, {len(annotations)} annotations to {out_root}")
    print(f"counts: {counts}")


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data/toy")
    main(root)
