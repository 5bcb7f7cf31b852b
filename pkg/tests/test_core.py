import numpy as np
import pytest
from hypothesis import given, strategies as st

from padx.core import (BBox, BinaryMask, ImageBuffer, boundary_of, crop,
                       to_grayscale)
from padx.errors import BoundsError
from padx.imgio import read_image, write_png


def rand_image(rng, w, h, c=3) -> ImageBuffer:
    return ImageBuffer(rng.integers(0, 256, (h, w, c), dtype=np.uint8))


class TestImageBuffer:
    def test_rejects_bad_channel_count(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((4, 4, 2), dtype=np.uint8))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((0, 4, 3), dtype=np.uint8))

    def test_grayscale_2d_input_becomes_one_channel(self):
        img = ImageBuffer(np.zeros((4, 5), dtype=np.uint8))
        assert (img.width, img.height, img.channels) == (5, 4, 1)

    def test_pixels_are_immutable(self):
        img = ImageBuffer(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0, 0] = 1


class TestBBox:
    def test_rejects_nonpositive_extent(self):
        with pytest.raises(ValueError):
            BBox(0, 0, 0, 5)
        with pytest.raises(ValueError):
            BBox(0, 0, 5, -1)


class TestCrop:
    def test_full_image_crop_is_identity(self):
        rng = np.random.default_rng(1)
        img = rand_image(rng, 6, 4)
        assert crop(img, BBox(0, 0, 6, 4)) == img

    def test_center_block(self):
        img = ImageBuffer(np.arange(16, dtype=np.uint8).reshape(4, 4))
        out = crop(img, BBox(1, 1, 2, 2))
        # 4x4 row-major values 0..15: center block rows (1,2), cols (1,2)
        assert out.pixels[:, :, 0].tolist() == [[5, 6], [9, 10]]

    def test_out_of_bounds_names_coordinate(self):
        img = ImageBuffer(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(BoundsError, match="x\\+w=5"):
            crop(img, BBox(3, 3, 2, 2))

    @given(st.data())
    def test_crop_composes(self, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 31)))
        img = rand_image(rng, 12, 10)
        ax = data.draw(st.integers(0, 5))
        ay = data.draw(st.integers(0, 4))
        aw = data.draw(st.integers(2, 12 - ax))
        ah = data.draw(st.integers(2, 10 - ay))
        a = BBox(ax, ay, aw, ah)
        bx = data.draw(st.integers(0, aw - 1))
        by = data.draw(st.integers(0, ah - 1))
        b = BBox(bx, by, data.draw(st.integers(1, aw - bx)),
                 data.draw(st.integers(1, ah - by)))
        combined = BBox(a.x + b.x, a.y + b.y, b.w, b.h)
        assert crop(crop(img, a), b) == crop(img, combined)


class TestGrayscale:
    def test_uniform_gray_input(self):
        img = ImageBuffer(np.full((3, 3, 3), 128, dtype=np.uint8))
        assert np.all(to_grayscale(img).pixels == 128)

    def test_pure_red(self):
        img = ImageBuffer(np.zeros((2, 2, 3), dtype=np.uint8))
        px = img.pixels.copy()
        px[:, :, 0] = 255
        # round(0.299 * 255) = round(76.245) = 76
        assert np.all(to_grayscale(ImageBuffer(px)).pixels == 76)

    def test_single_channel_returned_unchanged(self):
        img = ImageBuffer(np.arange(9, dtype=np.uint8).reshape(3, 3))
        assert to_grayscale(img) is img

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        img = rand_image(rng, 5, 5)
        once = to_grayscale(img)
        assert to_grayscale(once) is once


def ring_oracle(bits: np.ndarray) -> set[tuple[int, int]]:
    """Brute-force outer boundary by scanning the padded lattice."""
    h, w = bits.shape
    out = set()
    for y in range(-1, h + 1):
        for x in range(-1, w + 1):
            if 0 <= x < w and 0 <= y < h and bits[y, x]:
                continue
            for dx, dy in ((0, -1), (-1, 0), (1, 0), (0, 1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and bits[ny, nx]:
                    out.add((x, y))
                    break
    return out


class TestBoundary:
    def test_single_interior_pixel(self):
        bits = np.zeros((5, 5), dtype=bool)
        bits[2, 2] = True
        assert boundary_of(BinaryMask(bits)) == {(1, 2), (3, 2), (2, 1), (2, 3)}

    def test_inset_rectangle_ring(self):
        bits = np.zeros((6, 7), dtype=bool)
        bits[1:5, 1:6] = True
        assert boundary_of(BinaryMask(bits)) == ring_oracle(bits)

    def test_two_disjoint_pixels(self):
        bits = np.zeros((7, 7), dtype=bool)
        bits[1, 1] = True
        bits[5, 5] = True
        assert boundary_of(BinaryMask(bits)) == ring_oracle(bits)

    def test_full_mask_ring_lies_outside_grid(self):
        mask = BinaryMask.full(3, 2)
        ring = boundary_of(mask)
        assert ring == ring_oracle(mask.bits)
        assert (-1, 0) in ring and (3, 0) in ring

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError):
            BinaryMask(np.zeros((3, 3), dtype=bool))

    @given(st.integers(0, 2 ** 31))
    def test_boundary_disjoint_from_region(self, seed):
        rng = np.random.default_rng(seed)
        bits = rng.random((6, 6)) < 0.4
        if not bits.any():
            bits[2, 3] = True
        mask = BinaryMask(bits)
        inside = {(x, y) for y, x in zip(*np.nonzero(bits))}
        assert boundary_of(mask) & inside == set()


class TestImageIO:
    def test_rgb_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rand_image(rng, 17, 9)
        write_png(img, tmp_path / "x.png")
        assert read_image(tmp_path / "x.png") == img

    def test_gray_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        img = rand_image(rng, 8, 8, c=1)
        write_png(img, tmp_path / "g.png")
        assert read_image(tmp_path / "g.png") == img

    def test_jpeg_decodes(self, tmp_path):
        from PIL import Image
        Image.new("RGB", (6, 5), (10, 20, 30)).save(tmp_path / "x.jpg", quality=95)
        img = read_image(tmp_path / "x.jpg")
        assert (img.width, img.height, img.channels) == (6, 5, 3)

    def test_alpha_rejected(self, tmp_path):
        from PIL import Image
        from padx.errors import ImageIOError
        Image.new("RGBA", (4, 4)).save(tmp_path / "a.png")
        with pytest.raises(ImageIOError, match="RGBA"):
            read_image(tmp_path / "a.png")

    def test_16bit_rejected(self, tmp_path):
        from PIL import Image
        from padx.errors import ImageIOError
        Image.new("I;16", (4, 4)).save(tmp_path / "d.png")
        with pytest.raises(ImageIOError, match="mode"):
            read_image(tmp_path / "d.png")

    def test_missing_file_names_path(self, tmp_path):
        from padx.errors import ImageIOError
        with pytest.raises(ImageIOError, match="nope.png"):
            read_image(tmp_path / "nope.png")
