"""Image file codecs and directory-backed image stores.

PNG (8-bit gray or RGB) is the only write format and round-trips losslessly.
JPEG is decode-only. Alpha channels and 16-bit rasters are rejected.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from padx.core import ImageBuffer
from padx.errors import ImageIOError


def read_image(path: str | Path) -> ImageBuffer:
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode not in ("L", "RGB"):
                raise ImageIOError(
                    f"unsupported image mode '{im.mode}' in {path}: "
                    "only 8-bit gray or RGB rasters are supported"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise ImageIOError(f"image file not found: {path}") from exc
    except UnidentifiedImageError as exc:
        raise ImageIOError(f"cannot decode image file: {path}") from exc
    except OSError as exc:
        raise ImageIOError(f"cannot read image file {path}: {exc}") from exc
    return ImageBuffer(arr)


def write_png(img: ImageBuffer, path: str | Path) -> None:
    path = Path(path)
    px = img.pixels
    if img.channels == 1:
        pil = Image.fromarray(px[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(px, mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"cannot write PNG {path}: {exc}") from exc


class ImageStore:
    """Reads rasters by relative file name from a root directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def path_of(self, file_name: str) -> Path:
        return self.root / file_name

    def load(self, file_name: str) -> ImageBuffer:
        return read_image(self.path_of(file_name))
