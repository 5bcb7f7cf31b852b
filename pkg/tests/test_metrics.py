import numpy as np
import pytest
from hypothesis import given, strategies as st

from padx.core import BBox
from padx.dataset import Category, Dataset, ImageRecord, Instance
from padx.errors import DatasetError
from padx.metrics import (Detection, average_precision, evaluate, iou,
                          match_detections)


def gt(ann_id, image_id, cid, box) -> Instance:
    return Instance(ann_id, image_id, cid, BBox(*box))


def det(image_id, cid, box, score) -> Detection:
    return Detection(image_id, cid, BBox(*box), score)


def simple_dataset(annotations, categories=(1,)) -> Dataset:
    return Dataset(
        images=(ImageRecord(1, "a.png", 200, 200), ImageRecord(2, "b.png", 200, 200)),
        annotations=tuple(annotations),
        categories=tuple(Category(c, f"c{c}") for c in categories),
    )


boxes = st.tuples(st.integers(0, 50), st.integers(0, 50),
                  st.integers(1, 40), st.integers(1, 40))


class TestIou:
    def test_identical(self):
        assert iou(BBox(3, 4, 10, 12), BBox(3, 4, 10, 12)) == 1.0

    def test_disjoint(self):
        assert iou(BBox(0, 0, 5, 5), BBox(10, 10, 5, 5)) == 0.0

    def test_quarter_overlap(self):
        # intersection 25, union 175
        assert iou(BBox(0, 0, 10, 10), BBox(5, 5, 10, 10)) == pytest.approx(
            1.0 / 7.0, abs=1e-12)

    def test_touching_edges_counts_as_disjoint(self):
        assert iou(BBox(0, 0, 5, 5), BBox(5, 0, 5, 5)) == 0.0

    @given(boxes, boxes)
    def test_symmetric(self, a, b):
        assert iou(BBox(*a), BBox(*b)) == iou(BBox(*b), BBox(*a))

    @given(boxes, boxes)
    def test_range(self, a, b):
        v = iou(BBox(*a), BBox(*b))
        assert 0.0 <= v <= 1.0


class TestMatching:
    def test_perfect_match(self):
        labels = match_detections(
            [det(1, 1, (0, 0, 10, 10), 0.9)], [gt(1, 1, 1, (0, 0, 10, 10))])
        assert labels.tolist() == [True]

    def test_double_detection_penalty(self):
        dets = [det(1, 1, (0, 0, 10, 10), 0.9), det(1, 1, (1, 0, 10, 10), 0.8)]
        labels = match_detections(dets, [gt(1, 1, 1, (0, 0, 10, 10))])
        assert labels.tolist() == [True, False]

    def test_below_threshold_is_fp(self):
        # IoU 4x10 / (100 + 100 - 40) = 0.25 < 0.5
        labels = match_detections(
            [det(1, 1, (6, 0, 10, 10), 0.9)], [gt(1, 1, 1, (0, 0, 10, 10))])
        assert labels.tolist() == [False]

    def test_highest_iou_wins(self):
        gts = [gt(1, 1, 1, (0, 0, 10, 10)), gt(2, 1, 1, (2, 0, 10, 10))]
        dets = [det(1, 1, (2, 0, 10, 10), 0.9), det(1, 1, (0, 0, 10, 10), 0.8)]
        labels = match_detections(dets, gts)
        assert labels.tolist() == [True, True]

    def test_score_order_decides_priority(self):
        gts = [gt(1, 1, 1, (0, 0, 10, 10))]
        dets = [det(1, 1, (0, 0, 10, 10), 0.5), det(1, 1, (0, 0, 10, 10), 0.9)]
        labels = match_detections(dets, gts)
        assert labels.tolist() == [False, True]


class TestAveragePrecision:
    def test_single_true_positive(self):
        assert average_precision([True], 1) == pytest.approx(1.0)

    def test_no_detections(self):
        assert average_precision([], 3) == 0.0

    def test_fp_then_tp_two_gt(self):
        # precision envelope is 0.5 up to recall 0.5, zero afterwards
        ap = average_precision([False, True], 2)
        assert ap == pytest.approx(51 * 0.5 / 101, abs=1e-9)

    def test_undefined_when_no_gt_and_no_dets(self):
        assert average_precision([], 0) is None

    def test_zero_when_dets_but_no_gt(self):
        assert average_precision([False, False], 0) == 0.0

    def test_negative_gt_rejected(self):
        with pytest.raises(ValueError):
            average_precision([True], -1)

    @given(st.lists(st.booleans(), min_size=1, max_size=30))
    def test_bounded(self, flags):
        num_gt = max(1, sum(flags))
        ap = average_precision(flags, num_gt)
        assert 0.0 <= ap <= 1.0

    @given(st.lists(st.booleans(), min_size=2, max_size=30))
    def test_removing_fp_never_hurts(self, flags):
        if not any(not f for f in flags):
            return
        num_gt = max(1, sum(flags))
        base = average_precision(flags, num_gt)
        drop = flags.index(False)
        better = average_precision(flags[:drop] + flags[drop + 1:], num_gt)
        assert better >= base - 1e-12


class TestEvaluate:
    def test_perfect_predictions(self):
        anns = [gt(1, 1, 1, (0, 0, 10, 10)), gt(2, 2, 1, (5, 5, 20, 20)),
                gt(3, 1, 2, (50, 50, 8, 8))]
        ds = simple_dataset(anns, categories=(1, 2))
        dets = [det(a.image_id, a.category_id,
                    (a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h), 1.0) for a in anns]
        result = evaluate(dets, ds)
        assert result.mean_ap == pytest.approx(1.0)
        assert all(ce.ap == pytest.approx(1.0) for ce in result.per_category.values())

    def test_empty_detections(self):
        ds = simple_dataset([gt(1, 1, 1, (0, 0, 10, 10))])
        result = evaluate([], ds)
        assert result.per_category[1].ap == 0.0
        assert result.mean_ap == 0.0
        assert result.per_category[1].fn == 1

    def test_mixed_two_class_hand_case(self):
        # class 1: two GTs, an FP at 0.95 then a TP at 0.9 -> 51*0.5/101
        # class 2: one GT detected perfectly -> 1.0
        ds = simple_dataset(
            [gt(1, 1, 1, (0, 0, 10, 10)), gt(2, 1, 1, (100, 100, 10, 10)),
             gt(3, 1, 2, (50, 50, 10, 10))],
            categories=(1, 2),
        )
        dets = [
            det(1, 1, (40, 40, 10, 10), 0.95),
            det(1, 1, (0, 0, 10, 10), 0.90),
            det(1, 2, (50, 50, 10, 10), 0.80),
        ]
        result = evaluate(dets, ds)
        expected_c1 = 51 * 0.5 / 101
        assert result.per_category[1].ap == pytest.approx(expected_c1, abs=1e-9)
        assert result.per_category[2].ap == pytest.approx(1.0)
        assert result.mean_ap == pytest.approx((expected_c1 + 1.0) / 2, abs=1e-9)
        assert (result.per_category[1].tp, result.per_category[1].fp,
                result.per_category[1].fn) == (1, 1, 1)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        ds = simple_dataset(
            [gt(i, 1 + i % 2, 1, (10 * i, 10, 9, 9)) for i in range(1, 8)])
        dets = [
            det(1 + i % 2, 1, (10 * i + int(rng.integers(0, 3)), 10, 9, 9),
                float(np.round(rng.uniform(0.1, 0.99), 6)))
            for i in range(1, 8)
        ]
        base = evaluate(dets, ds)
        for _ in range(5):
            perm = list(dets)
            rng.shuffle(perm)
            result = evaluate(perm, ds)
            assert result.mean_ap == pytest.approx(base.mean_ap, abs=1e-12)

    def test_unknown_category_rejected(self):
        ds = simple_dataset([gt(1, 1, 1, (0, 0, 10, 10))])
        with pytest.raises(DatasetError, match="category id 9"):
            evaluate([det(1, 9, (0, 0, 10, 10), 0.5)], ds)

    def test_category_without_gt_excluded_from_mean(self):
        ds = simple_dataset([gt(1, 1, 1, (0, 0, 10, 10))], categories=(1, 2))
        dets = [det(1, 1, (0, 0, 10, 10), 1.0)]
        result = evaluate(dets, ds)
        assert result.per_category[2].ap is None
        assert result.mean_ap == pytest.approx(1.0)

    def test_detection_score_out_of_range(self):
        with pytest.raises(ValueError):
            det(1, 1, (0, 0, 5, 5), 1.5)
