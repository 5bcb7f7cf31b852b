"""Material-aware placement: attenuation contrast, structural complexity,
host selection, and placement search.

X-ray attenuation tracks material density: metallic objects absorb more and
render darker, organic ones lighter. With only a rendered scan available the
attenuation of a region is estimated from its grayscale darkness, mapped to
[0, 1] (0 = fully transparent, 1 = maximally attenuating). Structural
complexity is the mean gradient magnitude of the region, normalized by the
largest magnitude an 8-bit raster can produce (255 * sqrt(2)).

A tail patch is paired with the host object that maximizes

    |attenuation(host) - attenuation(patch)| + weight * complexity(host)

so low-attenuation items land on dark, cluttered hosts and vice versa,
instead of the uniform random placement of plain copy-paste.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from padx.core import BBox, BinaryMask, ImageBuffer, check_box_inside, to_grayscale
from padx.dataset import Instance
from padx.errors import PlacementInfeasibleError

MAX_GRADIENT = 255.0 * math.sqrt(2.0)
DEFAULT_COMPLEXITY_WEIGHT = 0.5
MIN_PATCH = 8


@dataclass(frozen=True)
class AttenuationScore:
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"attenuation must lie in [0, 1], got {self.value}")


@dataclass(frozen=True)
class HostSelection:
    instance: Instance
    contrast: float
    complexity: float
    combined: float


def attenuation_score(img: ImageBuffer, region: BBox | BinaryMask) -> AttenuationScore:
    """1 - mean(gray)/255 over the region: darker regions attenuate more."""
    gray = to_grayscale(img).pixels[:, :, 0]
    if isinstance(region, BBox):
        check_box_inside(region, img.width, img.height)
        values = gray[region.y:region.y2, region.x:region.x2]
    else:
        if (region.width, region.height) != (img.width, img.height):
            raise ValueError(
                f"mask {region.width}x{region.height} does not match "
                f"image {img.width}x{img.height}"
            )
        values = gray[region.bits]
    return AttenuationScore(1.0 - float(values.mean()) / 255.0)


def gradient_magnitude(img: ImageBuffer) -> np.ndarray:
    """Per-pixel gradient magnitude of the grayscale image.

    Central differences in the interior, one-sided at the raster border
    (np.gradient semantics).
    """
    gray = to_grayscale(img).pixels[:, :, 0].astype(np.float64)
    if gray.shape[0] == 1:
        gy = np.zeros_like(gray)
    else:
        gy = np.gradient(gray, axis=0)
    if gray.shape[1] == 1:
        gx = np.zeros_like(gray)
    else:
        gx = np.gradient(gray, axis=1)
    return np.sqrt(gx * gx + gy * gy)


def gradient_energy(img: ImageBuffer, region: BBox) -> float:
    """Mean normalized gradient magnitude over the region, clamped to [0, 1]."""
    check_box_inside(region, img.width, img.height)
    if region.area < 4:
        raise ValueError(f"region of {region.area} px is too small to score (need >= 4)")
    mag = gradient_magnitude(img)
    mean = float(mag[region.y:region.y2, region.x:region.x2].mean())
    return min(1.0, max(0.0, mean / MAX_GRADIENT))


def select_host(hosts: Sequence[tuple[Instance, ImageBuffer]],
                tail_patch: ImageBuffer,
                complexity_weight: float = DEFAULT_COMPLEXITY_WEIGHT) -> HostSelection:
    """Pick the host maximizing attenuation contrast plus weighted complexity.

    Ties break toward the lowest instance id, so the result is invariant
    under permutation of the candidate list.
    """
    if not hosts:
        raise ValueError("host candidate list is empty")
    patch_att = attenuation_score(tail_patch, BBox(0, 0, tail_patch.width, tail_patch.height))
    best: HostSelection | None = None
    for inst, img in hosts:
        contrast = abs(attenuation_score(img, inst.bbox).value - patch_att.value)
        complexity = gradient_energy(img, inst.bbox)
        combined = contrast + complexity_weight * complexity
        cand = HostSelection(inst, contrast, complexity, combined)
        if best is None or combined > best.combined \
                or (combined == best.combined and inst.id < best.instance.id):
            best = cand
    return best


def propose_placement(host_box: BBox, patch_w: int, patch_h: int,
                      image_w: int, image_h: int,
                      rng: np.random.Generator,
                      min_patch: int = MIN_PATCH) -> tuple[BBox, float]:
    """Sample a placement box centered in the host region.

    The patch is uniformly downscaled (aspect preserved, scale <= 1) just
    enough to fit the image with a 1-pixel margin on every side; the center
    is drawn uniformly over the host-box pixels that keep the box in bounds.
    Pairings that cannot yield at least a min_patch x min_patch box raise
    PlacementInfeasibleError, which callers treat as a skip signal.
    """
    if patch_w <= 0 or patch_h <= 0:
        raise ValueError(f"patch must have positive extent, got {patch_w}x{patch_h}")
    if host_box.w < min_patch or host_box.h < min_patch:
        raise PlacementInfeasibleError(
            f"host box {host_box.w}x{host_box.h} is smaller than the "
            f"minimum patch size {min_patch}x{min_patch}"
        )
    avail_w = image_w - 2
    avail_h = image_h - 2
    scale = min(1.0, avail_w / patch_w, avail_h / patch_h)
    w = min(int(patch_w * scale), avail_w)
    h = min(int(patch_h * scale), avail_h)
    if w < min_patch or h < min_patch:
        raise PlacementInfeasibleError(
            f"patch {patch_w}x{patch_h} shrinks below {min_patch}x{min_patch} "
            f"inside a {image_w}x{image_h} image"
        )

    # Integer center range keeping the box inside the 1-pixel margin.
    cx_lo = max(host_box.x, 1 + w // 2)
    cx_hi = min(host_box.x2 - 1, image_w - 1 - w + w // 2)
    cy_lo = max(host_box.y, 1 + h // 2)
    cy_hi = min(host_box.y2 - 1, image_h - 1 - h + h // 2)
    if cx_lo > cx_hi or cy_lo > cy_hi:
        raise PlacementInfeasibleError(
            f"no in-bounds placement of a {w}x{h} patch has its center "
            f"inside host box ({host_box.x}, {host_box.y}, {host_box.w}, {host_box.h})"
        )
    cx = int(rng.integers(cx_lo, cx_hi + 1))
    cy = int(rng.integers(cy_lo, cy_hi + 1))
    return BBox(cx - w // 2, cy - h // 2, w, h), scale
