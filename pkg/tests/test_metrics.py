import numpy as np
import pytest

from dvs.core import FlowField, Image, LabelMap
from dvs.errors import ClassRangeError, ShapeError, UndefinedMeasureError
from dvs.metrics import ConfusionMatrix, confidence_score, flow_magnitude, frame_difference

from reference import (
    confidence_score_ref,
    flow_magnitude_ref,
    frame_difference_ref,
    miou_ref,
)


class TestConfidenceScore:
    def test_identical_maps_score_one(self, rng):
        lab = LabelMap(rng.integers(0, 6, size=(9, 9)))
        assert confidence_score(lab, lab) == 1.0

    def test_total_disagreement_scores_zero(self):
        a = LabelMap(np.zeros((4, 4), dtype=np.int32))
        b = LabelMap(np.ones((4, 4), dtype=np.int32))
        assert confidence_score(a, b) == 0.0

    def test_half_agreement(self):
        o = LabelMap(np.array([[0, 0, 1, 1]]))
        s = LabelMap(np.array([[0, 1, 1, 0]]))
        assert confidence_score(o, s) == 0.5

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            confidence_score(
                LabelMap(np.zeros((2, 2), dtype=np.int32)),
                LabelMap(np.zeros((2, 3), dtype=np.int32)),
            )

    def test_symmetry_and_permutation_invariance(self, rng):
        a = rng.integers(0, 4, size=(6, 6))
        b = rng.integers(0, 4, size=(6, 6))
        s1 = confidence_score(LabelMap(a), LabelMap(b))
        s2 = confidence_score(LabelMap(b), LabelMap(a))
        assert s1 == s2
        perm = rng.permutation(36)
        ap = a.ravel()[perm].reshape(6, 6)
        bp = b.ravel()[perm].reshape(6, 6)
        assert confidence_score(LabelMap(ap), LabelMap(bp)) == s1

    def test_matches_hamming_complement_on_random_maps(self, rng):
        for _ in range(20):
            a = LabelMap(rng.integers(0, 5, size=(16, 16)))
            b = LabelMap(rng.integers(0, 5, size=(16, 16)))
            expected = confidence_score_ref(a, b)
            assert confidence_score(a, b) == expected


class TestFrameDifference:
    def test_identical_frames(self, rng):
        img = Image(rng.random((5, 5, 3)).astype(np.float32))
        assert frame_difference(img, img) == 0.0

    def test_white_vs_black(self):
        a = Image(np.ones((4, 4, 3)))
        b = Image(np.zeros((4, 4, 3)))
        assert frame_difference(a, b) == pytest.approx(1.0, abs=1e-7)

    def test_two_pixel_example(self):
        a = Image(np.array([[[1.0], [0.5]]]))
        b = Image(np.array([[[0.5], [0.5]]]))
        assert frame_difference(a, b) == pytest.approx(0.25, abs=1e-12)

    def test_symmetric_nonnegative_zero_iff_equal(self, rng):
        a = Image(rng.random((6, 6, 3)).astype(np.float32))
        b = Image(rng.random((6, 6, 3)).astype(np.float32))
        d_ab = frame_difference(a, b)
        assert d_ab == frame_difference(b, a)
        assert d_ab > 0.0
        assert frame_difference(a, a) == 0.0

    def test_squared_variant(self):
        a = Image(np.array([[[1.0], [0.5]]]))
        b = Image(np.array([[[0.5], [0.5]]]))
        assert frame_difference(a, b, squared=True) == pytest.approx(0.125, abs=1e-12)

    def test_matches_reference(self, rng):
        for _ in range(10):
            a = Image(rng.random((16, 16, 3)).astype(np.float32))
            b = Image(rng.random((16, 16, 3)).astype(np.float32))
            assert frame_difference(a, b) == pytest.approx(
                frame_difference_ref(a, b), abs=1e-12
            )


class TestFlowMagnitude:
    def test_zero_flow(self):
        assert flow_magnitude(FlowField(np.zeros((4, 4, 2)))) == 0.0

    def test_three_four_five(self):
        flow = np.zeros((3, 3, 2))
        flow[:, :, 0] = 3.0
        flow[:, :, 1] = 4.0
        assert flow_magnitude(FlowField(flow)) == pytest.approx(5.0, abs=1e-12)

    def test_two_pixel_average(self):
        flow = FlowField(np.array([[[1.0, 0.0], [0.0, 1.0]]]))
        assert flow_magnitude(flow) == pytest.approx(1.0, abs=1e-12)

    def test_scales_linearly(self, rng):
        flow = rng.normal(size=(8, 8, 2)).astype(np.float32)
        base = flow_magnitude(FlowField(flow))
        # dyadic factors are exact in float32 storage
        for k in (-2.0, 0.5, 4.0):
            assert flow_magnitude(FlowField(k * flow)) == pytest.approx(
                abs(k) * base, rel=1e-12
            )
        assert flow_magnitude(FlowField(3.0 * flow)) == pytest.approx(
            3.0 * base, rel=1e-6
        )

    def test_matches_reference(self, rng):
        for _ in range(10):
            flow = FlowField(rng.normal(size=(16, 16, 2)).astype(np.float32))
            assert flow_magnitude(flow) == pytest.approx(
                flow_magnitude_ref(flow), abs=1e-12
            )


class TestConfusionAndMiou:
    def test_perfect_prediction(self, rng):
        truth = LabelMap(rng.integers(0, 4, size=(8, 8)))
        cm = ConfusionMatrix(4).accumulate(truth, truth)
        assert cm.miou() == 1.0

    def test_hand_example(self):
        truth = LabelMap(np.array([[0, 0, 1, 1]]))
        pred = LabelMap(np.array([[0, 1, 1, 1]]))
        cm = ConfusionMatrix(2).accumulate(truth, pred)
        assert cm.miou() == pytest.approx(7 / 12, abs=1e-12)

    def test_total_disagreement_with_two_classes(self):
        truth = LabelMap(np.array([[0, 0, 1, 1]]))
        pred = LabelMap(np.array([[1, 1, 0, 0]]))
        cm = ConfusionMatrix(2).accumulate(truth, pred)
        assert cm.miou() == 0.0

    def test_absent_classes_excluded(self):
        truth = LabelMap(np.array([[0, 0]]))
        pred = LabelMap(np.array([[0, 0]]))
        cm = ConfusionMatrix(5).accumulate(truth, pred)
        assert cm.miou() == 1.0

    def test_empty_matrix_undefined(self):
        with pytest.raises(UndefinedMeasureError):
            ConfusionMatrix(3).miou()

    def test_class_range_checked(self):
        truth = LabelMap(np.array([[0, 3]]))
        pred = LabelMap(np.array([[0, 0]]))
        with pytest.raises(ClassRangeError):
            ConfusionMatrix(3).accumulate(truth, pred)

    def test_accumulation_is_additive_and_merge_matches(self, rng):
        t1 = LabelMap(rng.integers(0, 3, size=(6, 6)))
        p1 = LabelMap(rng.integers(0, 3, size=(6, 6)))
        t2 = LabelMap(rng.integers(0, 3, size=(6, 6)))
        p2 = LabelMap(rng.integers(0, 3, size=(6, 6)))
        both = ConfusionMatrix(3).accumulate(t1, p1).accumulate(t2, p2)
        merged = ConfusionMatrix(3).accumulate(t1, p1)
        merged.merge(ConfusionMatrix(3).accumulate(t2, p2))
        assert np.array_equal(both.counts, merged.counts)
        assert both.total() == 72

    def test_relabeling_invariance(self, rng):
        truth = rng.integers(0, 4, size=(8, 8))
        pred = rng.integers(0, 4, size=(8, 8))
        base = ConfusionMatrix(4).accumulate(LabelMap(truth), LabelMap(pred)).miou()
        perm = rng.permutation(4)
        remapped = (
            ConfusionMatrix(4)
            .accumulate(LabelMap(perm[truth]), LabelMap(perm[pred]))
            .miou()
        )
        assert remapped == pytest.approx(base, abs=1e-12)

    def test_matches_reference(self, rng):
        for _ in range(10):
            truth = LabelMap(rng.integers(0, 5, size=(16, 16)))
            pred = LabelMap(rng.integers(0, 5, size=(16, 16)))
            cm = ConfusionMatrix(5).accumulate(truth, pred)
            assert cm.miou() == pytest.approx(miou_ref(truth, pred, 5), abs=1e-12)
