"""Raster, box, and mask primitives shared by every other module.

Conventions (fixed project-wide):
  * pixel origin at the top-left, y grows downward, arrays index [y, x];
  * 4-connectivity for region boundaries and Laplacian stencils;
  * grayscale uses ITU-R BT.601 weights (0.299, 0.587, 0.114).

All types are immutable value objects after construction and all operations
are pure functions, so they are safe to share across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from padx.errors import BoundsError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


class ImageBuffer:
    """8-bit raster with 1 (gray) or 3 (RGB) channels, row-major."""

    __slots__ = ("_px",)

    def __init__(self, pixels) -> None:
        arr = np.asarray(pixels, dtype=np.uint8)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w) or (h, w, 1|3) pixel array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._px = arr

    @property
    def width(self) -> int:
        return self._px.shape[1]

    @property
    def height(self) -> int:
        return self._px.shape[0]

    @property
    def channels(self) -> int:
        return self._px.shape[2]

    @property
    def pixels(self) -> np.ndarray:
        """Read-only (height, width, channels) uint8 view."""
        return self._px

    def tobytes(self) -> bytes:
        return self._px.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self._px.shape == other._px.shape and np.array_equal(self._px, other._px)

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height}, channels={self.channels})"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box: (x, y) is the top-left corner, w/h its extent."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive extent, got w={self.w}, h={self.h}")

    @property
    def x2(self) -> int:
        """One past the right edge."""
        return self.x + self.w

    @property
    def y2(self) -> int:
        """One past the bottom edge."""
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains_point(self, px: int, py: int) -> bool:
        return self.x <= px < self.x2 and self.y <= py < self.y2


def check_box_inside(box: BBox, width: int, height: int) -> None:
    """Raise BoundsError naming the first offending coordinate."""
    if box.x < 0:
        raise BoundsError(f"box left edge x={box.x} is negative")
    if box.y < 0:
        raise BoundsError(f"box top edge y={box.y} is negative")
    if box.x2 > width:
        raise BoundsError(f"box right edge x+w={box.x2} exceeds image width {width}")
    if box.y2 > height:
        raise BoundsError(f"box bottom edge y+h={box.y2} exceeds image height {height}")


class BinaryMask:
    """Boolean pixel membership for a region; True marks interior pixels."""

    __slots__ = ("_bits",)

    def __init__(self, bits) -> None:
        arr = np.asarray(bits, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if not arr.any():
            raise ValueError("mask must contain at least one interior pixel")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self._bits.shape[1]

    @property
    def height(self) -> int:
        return self._bits.shape[0]

    @property
    def bits(self) -> np.ndarray:
        """Read-only (height, width) boolean view."""
        return self._bits

    @property
    def count(self) -> int:
        return int(self._bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self._bits.shape == other._bits.shape and np.array_equal(self._bits, other._bits)

    def __repr__(self) -> str:
        return f"BinaryMask({self.width}x{self.height}, interior={self.count})"


def crop(img: ImageBuffer, box: BBox) -> ImageBuffer:
    """Extract the sub-raster covered by ``box``. Box must lie inside the image."""
    check_box_inside(box, img.width, img.height)
    return ImageBuffer(img.pixels[box.y:box.y2, box.x:box.x2])


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """BT.601 luma; 1-channel input is returned unchanged (same object)."""
    if img.channels == 1:
        return img
    px = img.pixels.astype(np.float64)
    r, g, b = GRAY_WEIGHTS
    gray = r * px[:, :, 0] + g * px[:, :, 1] + b * px[:, :, 2]
    return ImageBuffer(np.rint(gray).astype(np.uint8))


def boundary_of(mask: BinaryMask) -> set[tuple[int, int]]:
    """Outer boundary: lattice pixels not in the region but 4-adjacent to it.

    Coordinates are returned as (x, y) and may fall outside the mask's own
    w x h grid (for example all around a full-rectangle mask); callers working
    in a larger raster translate them as needed.
    """
    bits = mask.bits
    ys, xs = np.nonzero(bits)
    h, w = bits.shape
    out: set[tuple[int, int]] = set()
    for dx, dy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
        nx = xs + dx
        ny = ys + dy
        inside = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
        in_region = np.zeros_like(inside)
        in_region[inside] = bits[ny[inside], nx[inside]]
        keep = ~in_region
        out.update(zip(nx[keep].tolist(), ny[keep].tolist()))
    return out
