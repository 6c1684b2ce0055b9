import numpy as np
import pytest

from dvs.core import FlowField, Image, LabelMap
from dvs.errors import ConfigError, ShapeError
from dvs.warp import WarpConfig, compose_flow, warp_image, warp_labels

from reference import warp_image_ref, warp_nearest_ref

NEAREST = WarpConfig("nearest_label", "clamp")
BILINEAR = WarpConfig("onehot_bilinear_argmax", "clamp")


def uniform_flow(h, w, u, v):
    flow = np.zeros((h, w, 2))
    flow[:, :, 0] = u
    flow[:, :, 1] = v
    return FlowField(flow)


class TestWarpLabels:
    def test_zero_flow_is_identity_both_modes(self, rng):
        lab = LabelMap(rng.integers(0, 6, size=(12, 12)))
        zero = FlowField(np.zeros((12, 12, 2)))
        for cfg in (NEAREST, BILINEAR):
            out = warp_labels(lab, zero, cfg)
            assert np.array_equal(out.data, lab.data)

    def test_unit_shift_on_column_pattern(self):
        # labels depend only on x; flow (1,0) shifts them right by one
        base = np.tile(np.arange(4, dtype=np.int32), (4, 1))
        lab = LabelMap(base)
        out = warp_labels(lab, uniform_flow(4, 4, 1.0, 0.0), NEAREST)
        assert np.array_equal(out.data[:, 1:], base[:, :-1])
        # clamped border repeats the first source column
        assert np.array_equal(out.data[:, 0], base[:, 0])

    def test_integer_shift_matches_hand_shift_interior(self, rng):
        for _ in range(10):
            lab = LabelMap(rng.integers(0, 5, size=(10, 10)))
            a, b = int(rng.integers(-3, 4)), int(rng.integers(-3, 4))
            out = warp_labels(lab, uniform_flow(10, 10, a, b), NEAREST)
            ys, xs = np.mgrid[0:10, 0:10]
            inner = (
                (ys - b >= 0) & (ys - b < 10) & (xs - a >= 0) & (xs - a < 10)
            )
            shifted = lab.data[(ys - b)[inner], (xs - a)[inner]]
            assert np.array_equal(out.data[inner], shifted)

    def test_constant_map_stays_constant(self, rng):
        lab = LabelMap(np.full((8, 8), 3, dtype=np.int32))
        flow = FlowField(rng.normal(scale=3.0, size=(8, 8, 2)))
        for cfg in (NEAREST, BILINEAR):
            assert (warp_labels(lab, flow, cfg).data == 3).all()

    def test_label_closure(self, rng):
        present = {0, 2, 5}
        lab = LabelMap(rng.choice(sorted(present), size=(9, 9)))
        flow = FlowField(rng.normal(scale=2.0, size=(9, 9, 2)))
        for cfg in (NEAREST, BILINEAR):
            out = warp_labels(lab, flow, cfg)
            assert set(np.unique(out.data)) <= present

    def test_keep_source_retains_key_label_outside(self):
        lab = LabelMap(np.arange(16, dtype=np.int32).reshape(4, 4))
        # flow pushes every source position out of the frame
        cfg = WarpConfig("nearest_label", "keep_source")
        out = warp_labels(lab, uniform_flow(4, 4, 100.0, 0.0), cfg)
        assert np.array_equal(out.data, lab.data)

    def test_bilinear_tie_breaks_to_smallest_id(self):
        # source position exactly between labels 1 (left) and 0 (right)
        lab = LabelMap(np.array([[1, 0]]))
        flow = np.zeros((1, 2, 2))
        flow[0, 1, 0] = 0.5  # pixel 1 samples x=0.5
        out = warp_labels(lab, FlowField(flow), BILINEAR)
        assert out.data[0, 1] == 0

    def test_matches_naive_reference(self, rng):
        for _ in range(5):
            lab = LabelMap(rng.integers(0, 4, size=(8, 8)))
            flow = FlowField(rng.normal(scale=1.5, size=(8, 8, 2)).astype(np.float32))
            out = warp_labels(lab, flow, NEAREST)
            ref = warp_nearest_ref(lab, flow)
            assert np.array_equal(out.data, ref.data)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            warp_labels(
                LabelMap(np.zeros((4, 4), dtype=np.int32)),
                FlowField(np.zeros((4, 5, 2))),
            )

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            WarpConfig("cubic", "clamp")
        with pytest.raises(ConfigError):
            WarpConfig("nearest_label", "wrap")


class TestWarpImage:
    def test_zero_flow_identity(self, rng):
        img = Image(rng.random((6, 6, 3)).astype(np.float32))
        out = warp_image(img, FlowField(np.zeros((6, 6, 2))))
        assert np.array_equal(out.data, img.data)

    def test_integer_shift_interior(self, rng):
        img = Image(rng.random((8, 8, 1)).astype(np.float32))
        out = warp_image(img, uniform_flow(8, 8, 2.0, 0.0))
        np.testing.assert_allclose(out.data[:, 2:], img.data[:, :-2], atol=1e-7)

    def test_halfpixel_shift_averages_neighbours(self):
        img = Image(np.array([[[0.0], [1.0]]]))
        out = warp_image(img, uniform_flow(1, 2, 0.5, 0.0))
        assert out.data[0, 1, 0] == pytest.approx(0.5, abs=1e-7)

    def test_matches_naive_reference(self, rng):
        for _ in range(5):
            img = Image(rng.random((7, 7, 3)).astype(np.float32))
            flow = FlowField(rng.normal(scale=1.5, size=(7, 7, 2)).astype(np.float32))
            out = warp_image(img, flow)
            ref = warp_image_ref(img, flow)
            np.testing.assert_allclose(out.data, ref.data, atol=1e-6)


class TestComposeFlow:
    def test_uniform_flows_compose_exactly(self, rng):
        lab = LabelMap(rng.integers(0, 4, size=(16, 16)))
        f1 = uniform_flow(16, 16, 2.0, 0.0)
        f2 = uniform_flow(16, 16, 1.0, 1.0)
        two_step = warp_labels(warp_labels(lab, f1, NEAREST), f2, NEAREST)
        composed = warp_labels(lab, compose_flow(f1, f2), NEAREST)
        # away from clamped borders the two agree exactly
        inner = (slice(4, None), slice(4, None))
        assert np.array_equal(two_step.data[inner], composed.data[inner])

    def test_composition_on_boundary_free_map(self, rng):
        # piecewise-constant map whose single block stays interior
        base = np.zeros((20, 20), dtype=np.int32)
        base[8:12, 8:12] = 1
        lab = LabelMap(base)
        f1 = uniform_flow(20, 20, 1.0, 2.0)
        f2 = uniform_flow(20, 20, 2.0, -1.0)
        two_step = warp_labels(warp_labels(lab, f1, NEAREST), f2, NEAREST)
        composed = warp_labels(lab, compose_flow(f1, f2), NEAREST)
        mismatch = np.count_nonzero(two_step.data != composed.data)
        assert mismatch / base.size < 0.02
