"""Additive layer model: render/adjoint pair and the projected solver."""

import numpy as np
import pytest

from conftest import centered_depths, random_truth_field
from lflc.layers import (
    LayerStack,
    SolverConfig,
    adjoint_scatter,
    load_layer_stack,
    optimize_layers,
    render_additive,
    save_layer_stack,
)
from lflc.lightfield import angular_offset, psnr_masked


def naive_render(stack: LayerStack, angular_dims):
    """Per-ray gather loop straight off the additive model definition."""
    S, T = angular_dims
    K, C, H, W = stack.images.shape
    out = np.zeros((C, T, S, H, W))
    mask = np.zeros((T, S, H, W), dtype=bool)
    for t in range(T):
        for s in range(S):
            a_s, a_t = angular_offset(s, S), angular_offset(t, T)
            for v in range(H):
                for u in range(W):
                    acc = np.zeros(C)
                    good = True
                    for k, depth in enumerate(stack.depths):
                        uu, vv = u + depth * a_s, v + depth * a_t
                        if 0 <= uu < W and 0 <= vv < H:
                            acc += stack.images[k, :, vv, uu]
                        else:
                            good = False
                    mask[t, s, v, u] = good
                    if good:
                        out[:, t, s, v, u] = acc
    return out, mask


class TestRenderAdditive:
    def test_matches_naive_gather(self):
        rng = np.random.default_rng(10)
        for K, dims, size in [(3, (3, 3), 6), (2, (4, 2), 5), (3, (5, 5), 4)]:
            images = rng.uniform(0, 1.0 / K, (K, 1, size, size))
            stack = LayerStack(centered_depths(K), images)
            out, mask = render_additive(stack, dims)
            ref_out, ref_mask = naive_render(stack, dims)
            np.testing.assert_array_equal(mask, ref_mask)
            np.testing.assert_allclose(out[:, ref_mask], ref_out[:, ref_mask], atol=1e-14)

    def test_zero_stack_renders_zero(self):
        stack = LayerStack((-1, 0, 1), np.zeros((3, 1, 4, 4)))
        out, mask = render_additive(stack, (3, 3))
        assert np.all(out == 0)
        assert mask.any()

    def test_central_view_fully_valid(self):
        stack = LayerStack((-1, 0, 1), np.zeros((3, 1, 8, 8)))
        _, mask = render_additive(stack, (5, 5))
        assert mask[2, 2].all()  # zero offsets: every lookup lands in range

    def test_mask_margin_geometry(self):
        # depth 1 with offset +2 pushes lookups off the right/bottom edge
        stack = LayerStack((0, 1), np.zeros((2, 1, 8, 8)))
        _, mask = render_additive(stack, (5, 5))
        corner = mask[4, 4]  # offsets (+2, +2)
        assert corner[:6, :6].all()
        assert not corner[6:, :].any() and not corner[:, 6:].any()

    def test_layer_bound_enforced(self):
        with pytest.raises(ValueError):
            LayerStack((-1, 0, 1), np.full((3, 1, 2, 2), 0.5))
        with pytest.raises(ValueError):
            LayerStack((0, 1, 2), np.full((3, 1, 2, 2), -0.1))

    def test_depths_strictly_increasing(self):
        with pytest.raises(ValueError):
            LayerStack((1, 0, -1), np.zeros((3, 1, 2, 2)))


class TestAdjoint:
    def test_inner_product_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            K = int(rng.integers(2, 4))
            S, T = int(rng.integers(3, 6)), int(rng.integers(3, 6))
            H = W = int(rng.integers(8, 17))
            images = rng.uniform(0, 1.0 / K, (K, 1, H, W))
            stack = LayerStack(centered_depths(K), images)
            field = rng.random((1, T, S, H, W))
            rendered, mask = render_additive(stack, (S, T))
            lhs = float(np.sum(rendered[:, mask] * field[:, mask]))
            grad = adjoint_scatter(field, mask, stack.depths, spatial_dims=(W, H))
            rhs = float(np.sum(stack.images * grad))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)

    def test_scatter_of_masked_delta(self):
        # a single valid ray scatters into exactly K layer pixels
        stack = LayerStack((-1, 0, 1), np.zeros((3, 1, 8, 8)))
        _, mask = render_additive(stack, (3, 3))
        field = np.zeros((1, 3, 3, 8, 8))
        t, s, v, u = 0, 2, 4, 4  # offsets a_s=1, a_t=-1
        assert mask[t, s, v, u]
        field[0, t, s, v, u] = 1.0
        grad = adjoint_scatter(field, mask, stack.depths, spatial_dims=(8, 8))
        assert np.sum(grad != 0) == 3
        for k, depth in enumerate(stack.depths):
            assert grad[k, 0, v - depth, u + depth] == 1.0


class TestOptimizeLayers:
    def test_recovers_exact_target(self):
        rng = np.random.default_rng(12)
        lf, mask, _ = random_truth_field(rng, height=16, width=16, views=(3, 3))
        stack, history = optimize_layers(
            lf, config=SolverConfig(max_iterations=300, tolerance=0.0)
        )
        rendered, _ = render_additive(stack, lf.angular_dims)
        assert psnr_masked(lf.samples, rendered, mask) >= 45.0
        assert len(history) >= 2

    def test_history_monotone_nonincreasing(self):
        rng = np.random.default_rng(13)
        lf, _, _ = random_truth_field(rng, height=12, width=12, views=(3, 3))
        _, history = optimize_layers(lf, config=SolverConfig(max_iterations=100))
        diffs = np.diff(np.array(history))
        assert np.all(diffs <= 0)

    def test_projection_keeps_bound(self):
        rng = np.random.default_rng(14)
        lf, _, _ = random_truth_field(rng, height=10, width=10, views=(3, 3))
        stack, _ = optimize_layers(lf, config=SolverConfig(max_iterations=50))
        assert stack.images.min() >= 0.0
        assert stack.images.max() <= stack.bound + 1e-12

    def test_history_starts_at_constant_init_loss(self):
        rng = np.random.default_rng(15)
        lf, mask, _ = random_truth_field(rng, height=10, width=10, views=(3, 3))
        _, history = optimize_layers(lf, config=SolverConfig(max_iterations=1))
        init = LayerStack(
            (-1, 0, 1), np.full((3, 1, 10, 10), float(lf.samples.mean()) / 3.0)
        )
        rendered, _ = render_additive(init, lf.angular_dims)
        expected = 0.5 * float(np.sum((lf.samples[:, mask] - rendered[:, mask]) ** 2))
        np.testing.assert_allclose(history[0], expected, rtol=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(16)
        lf, _, _ = random_truth_field(rng, height=10, width=10, views=(3, 3))
        a, ha = optimize_layers(lf, config=SolverConfig(max_iterations=40))
        b, hb = optimize_layers(lf, config=SolverConfig(max_iterations=40))
        np.testing.assert_array_equal(a.images, b.images)
        assert ha == hb

    def test_extreme_depth_leaves_only_central_view(self):
        # the zero-offset view is always fully valid, so the mask can shrink
        # to exactly that view but never empty out
        stack = LayerStack((0, 50), np.zeros((2, 1, 6, 6)))
        _, mask = render_additive(stack, (3, 3))
        assert mask[1, 1].all()
        assert mask.sum() == 36


class TestLayerStackIO:
    def test_save_load_roundtrip(self, tmp_path):
        rng = np.random.default_rng(18)
        stack = LayerStack((-1, 0, 1), rng.uniform(0, 1 / 3, (3, 1, 8, 8)))
        save_layer_stack(stack, tmp_path)
        again = load_layer_stack(tmp_path)
        assert again.depths == stack.depths
        # stored at 8 bits on the K-scaled range
        assert np.max(np.abs(again.images - stack.images)) <= 0.5 / 255 / 3 + 1e-12

    def test_color_roundtrip(self, tmp_path):
        rng = np.random.default_rng(19)
        stack = LayerStack((0, 1), rng.uniform(0, 0.5, (2, 3, 4, 4)))
        save_layer_stack(stack, tmp_path)
        again = load_layer_stack(tmp_path)
        assert again.images.shape == stack.images.shape
