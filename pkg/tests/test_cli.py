import json

import numpy as np
import pytest

from conftest import run_cli, tree_bytes
from padx import __version__
from padx.imgio import read_image


class TestStats:
    def test_text_report_flags_tail(self, toy_dir):
        proc = run_cli("stats", toy_dir / "annotations.json")
        assert proc.returncode == 0
        assert "tail" in proc.stdout
        assert "rod" in proc.stdout

    def test_json_matches_text(self, toy_dir):
        proc = run_cli("stats", toy_dir / "annotations.json", "--format", "json")
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        by_name = {c["name"]: c for c in doc["categories"]}
        assert by_name["rod"]["split"] == "tail"
        assert by_name["block"]["split"] == "head"
        assert doc["total_instances"] == sum(c["count"] for c in doc["categories"])

    def test_bad_threshold_usage_error(self, toy_dir):
        proc = run_cli("stats", toy_dir / "annotations.json",
                       "--tail-threshold", "1.5")
        assert proc.returncode == 2
        assert "tail-threshold" in proc.stderr

    def test_missing_file_exit_2(self, tmp_path):
        proc = run_cli("stats", tmp_path / "nope.json")
        assert proc.returncode == 2

    def test_unknown_flag_exit_2(self, toy_dir):
        proc = run_cli("stats", toy_dir / "annotations.json", "--bogus")
        assert proc.returncode == 2


class TestBlend:
    def test_self_paste_equals_target(self, toy_dir, tmp_path):
        # region inset by 1 inside the crop: blend identity, byte-exact
        target = toy_dir / "images" / "scan_01.png"
        src_img = read_image(target)
        from padx.core import BBox, ImageBuffer, crop
        from padx.imgio import write_png
        patch = crop(src_img, BBox(20, 24, 16, 12))
        write_png(patch, tmp_path / "patch.png")
        mask = np.zeros((12, 16), dtype=np.uint8)
        mask[1:11, 1:15] = 255
        write_png(ImageBuffer(mask), tmp_path / "mask.png")
        out = tmp_path / "out.png"
        proc = run_cli("blend", "--target", target, "--source",
                       tmp_path / "patch.png", "--mask", tmp_path / "mask.png",
                       "--offset", "20", "24", "--out", out)
        assert proc.returncode == 0, proc.stderr
        assert read_image(out) == src_img

    def test_golden_fixture(self, blend_dir, tmp_path):
        out = tmp_path / "blended.png"
        proc = run_cli("blend", "--target", blend_dir / "target.png",
                       "--source", blend_dir / "source.png",
                       "--offset", "17", "21", "--out", out)
        assert proc.returncode == 0, proc.stderr
        assert out.read_bytes() == (blend_dir / "golden.png").read_bytes()

    def test_out_of_bounds_offset_exit_2(self, blend_dir, tmp_path):
        proc = run_cli("blend", "--target", blend_dir / "target.png",
                       "--source", blend_dir / "source.png",
                       "--offset", "40", "40", "--out", tmp_path / "x.png")
        assert proc.returncode == 2
        assert "strictly inside" in proc.stderr

    def test_explicit_mask(self, blend_dir, tmp_path):
        mask = np.zeros((12, 16), dtype=np.uint8)
        mask[3:9, 4:12] = 255
        from padx.core import ImageBuffer
        from padx.imgio import write_png
        write_png(ImageBuffer(mask), tmp_path / "mask.png")
        proc = run_cli("blend", "--target", blend_dir / "target.png",
                       "--source", blend_dir / "source.png",
                       "--mask", tmp_path / "mask.png",
                       "--offset", "17", "21", "--out", tmp_path / "m.png")
        assert proc.returncode == 0, proc.stderr


class TestIca:
    def test_gradcheck_passes(self):
        proc = run_cli("ica", "gradcheck", "--d", "4", "--k", "4", "--seed", "7")
        assert proc.returncode == 0, proc.stderr
        assert "max rel err" in proc.stdout

    def test_demo_reports_gap(self):
        proc = run_cli("ica", "demo", "--seed", "1")
        assert proc.returncode == 0, proc.stderr
        lines = proc.stdout.strip().splitlines()
        baseline = float(lines[0].rsplit(":", 1)[1])
        fused = float(lines[1].rsplit(":", 1)[1])
        assert fused >= baseline + 0.25

    def test_ksweep_prints_row_per_k(self):
        proc = run_cli("ica", "ksweep", "--seed", "1", "--steps", "200")
        assert proc.returncode == 0, proc.stderr
        rows = proc.stdout.strip().splitlines()
        ks = [int(r.split()[0]) for r in rows[1:]]
        assert ks == [2, 4, 8, 16]


class TestEval:
    @pytest.fixture
    def gt_file(self, tmp_path):
        doc = {
            "images": [{"id": 1, "file_name": "a.png", "width": 200, "height": 200}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 10, 10]},
                {"id": 2, "image_id": 1, "category_id": 1, "bbox": [100, 100, 10, 10]},
            ],
            "categories": [{"id": 1, "name": "thing"}],
        }
        path = tmp_path / "gt.json"
        path.write_text(json.dumps(doc))
        return path

    def test_perfect_predictions(self, gt_file, tmp_path):
        preds = [
            {"image_id": 1, "category_id": 1, "bbox": [0, 0, 10, 10], "score": 1.0},
            {"image_id": 1, "category_id": 1, "bbox": [100, 100, 10, 10], "score": 1.0},
        ]
        pred_file = tmp_path / "p.json"
        pred_file.write_text(json.dumps(preds))
        proc = run_cli("eval", pred_file, gt_file, "--format", "json")
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        assert doc["mean_ap50"] == pytest.approx(1.0)

    def test_empty_predictions(self, gt_file, tmp_path):
        pred_file = tmp_path / "p.json"
        pred_file.write_text("[]")
        proc = run_cli("eval", pred_file, gt_file, "--format", "json")
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["mean_ap50"] == 0.0

    def test_hand_computed_ap_row(self, gt_file, tmp_path):
        preds = [
            {"image_id": 1, "category_id": 1, "bbox": [50, 50, 10, 10], "score": 0.95},
            {"image_id": 1, "category_id": 1, "bbox": [0, 0, 10, 10], "score": 0.90},
        ]
        pred_file = tmp_path / "p.json"
        pred_file.write_text(json.dumps(preds))
        proc = run_cli("eval", pred_file, gt_file, "--format", "json")
        doc = json.loads(proc.stdout)
        assert doc["categories"][0]["ap50"] == pytest.approx(51 * 0.5 / 101, abs=1e-9)

    def test_schema_mismatch_exit_2(self, gt_file, tmp_path):
        pred_file = tmp_path / "p.json"
        pred_file.write_text(json.dumps([{"image_id": 1}]))
        proc = run_cli("eval", pred_file, gt_file)
        assert proc.returncode == 2
        assert "missing field" in proc.stderr


class TestAugmentCli:
    def test_deterministic_output_trees(self, toy_dir, tmp_path):
        ann = toy_dir / "annotations.json"
        images = toy_dir / "images"
        runs = {}
        for name, jobs in (("a", 1), ("b", 1), ("c", 4)):
            out = tmp_path / name
            proc = run_cli("augment", ann, "--images", images, "--out", out,
                           "--seed", "42", "--jobs", str(jobs))
            assert proc.returncode == 0, proc.stderr
            runs[name] = tree_bytes(out)
        assert runs["a"] == runs["b"] == runs["c"]

    def test_no_tail_classes_reports_zero(self, tmp_path):
        doc = {
            "images": [{"id": 1, "file_name": "a.png", "width": 32, "height": 32}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 8, 8]},
                {"id": 2, "image_id": 1, "category_id": 2, "bbox": [8, 8, 8, 8]},
            ],
            "categories": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
        }
        ann = tmp_path / "ann.json"
        ann.write_text(json.dumps(doc))
        proc = run_cli("augment", ann, "--images", tmp_path, "--out",
                       tmp_path / "out", "--format", "json")
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        assert report["total_generated"] == 0
        assert report["warning"]

    def test_missing_image_is_skip_not_fatal(self, toy_copy, tmp_path):
        from padx.dataset import load_dataset
        ds = load_dataset(toy_copy / "annotations.json")
        tail_image_ids = {a.image_id for a in ds.annotations if a.category_id == 3}
        victim = ds.images_by_id()[min(tail_image_ids)]
        (toy_copy / "images" / victim.file_name).unlink()

        proc = run_cli("augment", toy_copy / "annotations.json",
                       "--images", toy_copy / "images",
                       "--out", tmp_path / "out", "--format", "json")
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        assert report["per_class"]["3"]["skipped"]["unreadable_image"] >= 1

    def test_unreadable_annotations_exit_2(self, tmp_path):
        proc = run_cli("augment", tmp_path / "missing.json", "--images",
                       tmp_path, "--out", tmp_path / "out")
        assert proc.returncode == 2


class TestTopLevel:
    def test_version(self):
        proc = run_cli("--version")
        assert proc.returncode == 0
        assert proc.stdout.strip() == __version__

    def test_env_log_level_override(self, toy_dir):
        proc = run_cli("stats", toy_dir / "annotations.json",
                       env={"PADX_LOG": "bogus"})
        assert proc.returncode == 2
