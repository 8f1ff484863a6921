"""Tests for the numpy layer kernels, SGD and early stopping."""

import math

import numpy as np
import pytest

from lungfuse.config import SGDConfig
from lungfuse.diagnostics import (
    LAYER_TOLERANCE,
    conv_check,
    dense_check,
    gap_check,
    layer_gradchecks,
    relu_check,
    softmax_check,
)
from lungfuse.errors import ModelError
from lungfuse.nn import (
    Conv3DLayer,
    DenseLayer,
    EarlyStopping,
    check_gradients,
    conv3d_forward,
    dense_backward,
    dense_forward,
    global_avg_pool,
    global_avg_pool_backward,
    he_uniform,
    numeric_gradient,
    relative_error,
    relu,
    relu_backward,
    sgd_step,
    softmax,
    softmax_ce,
    window_intensity,
)
from lungfuse.nn.layers import same_padding
from lungfuse.nn.optim import zeros_like_params


def conv(kernels: np.ndarray, stride: int = 1) -> Conv3DLayer:
    return Conv3DLayer(kernels, np.zeros(kernels.shape[0]), stride)


# ── Dense ──


class TestDense:
    def test_identity(self):
        x = np.array([1.0, -2.0, 3.5])
        np.testing.assert_array_equal(dense_forward(DenseLayer(np.eye(3), np.zeros(3)), x), x)

    def test_zero_weight_gives_bias(self):
        layer = DenseLayer(np.zeros((2, 3)), np.array([4.0, -1.0]))
        out = dense_forward(layer, np.random.default_rng(0).normal(size=(5, 3)))
        assert np.all(out == np.array([4.0, -1.0]))

    def test_batched_backward_sums(self):
        rng = np.random.default_rng(1)
        layer = DenseLayer(rng.normal(size=(2, 3)), rng.normal(size=2))
        x = rng.normal(size=(4, 3))
        dy = rng.normal(size=(4, 2))
        _, dw, db = dense_backward(layer, x, dy)
        single = [dense_backward(layer, x[i], dy[i]) for i in range(4)]
        np.testing.assert_allclose(dw, sum(s[1] for s in single))
        np.testing.assert_allclose(db, sum(s[2] for s in single))

    def test_gradcheck(self):
        assert dense_check(np.random.default_rng(2)) < LAYER_TOLERANCE

    def test_shape_mismatch(self):
        with pytest.raises(ModelError) as exc:
            dense_forward(DenseLayer(np.eye(3), np.zeros(3)), np.ones(4))
        assert exc.value.code == "shape_mismatch"

    def test_he_uniform_bounds(self):
        w = he_uniform(np.random.default_rng(3), (50, 24), 24)
        assert np.all(np.abs(w) <= math.sqrt(6 / 24))
        assert DenseLayer.init(np.random.default_rng(3), 24, 50).bias.tolist() == [0.0] * 50


# ── Conv3D ──


class TestConv3D:
    def test_unit_kernel_is_identity(self):
        x = np.random.default_rng(4).normal(size=(1, 4, 5, 6))
        np.testing.assert_array_equal(conv3d_forward(conv(np.ones((1, 1, 1, 1, 1))), x), x)

    def test_all_ones_counts(self):
        y = conv3d_forward(conv(np.ones((1, 1, 3, 3, 3))), np.ones((1, 5, 5, 5)))
        assert y[0, 2, 2, 2] == 27.0
        assert y[0, 0, 0, 0] == 8.0
        assert y[0, 0, 2, 2] == 18.0

    @pytest.mark.parametrize("n,k,s", [(5, 3, 1), (6, 3, 2), (7, 3, 2), (8, 5, 2), (1, 3, 1), (9, 1, 3), (4, 3, 3)])
    def test_same_padding_shape(self, n, k, s):
        out, before, after = same_padding(n, k, s)
        assert out == math.ceil(n / s)
        assert before + after == max((out - 1) * s + k - n, 0)
        assert after - before in (0, 1)
        layer = conv(np.ones((2, 1, k, k, k)), s)
        assert conv3d_forward(layer, np.ones((1, n, n, n))).shape == (2, out, out, out)

    def test_stride_two_samples_every_other_voxel(self):
        x = np.arange(6**3, dtype=np.float64).reshape((1, 6, 6, 6))
        y = conv3d_forward(conv(np.ones((1, 1, 1, 1, 1)), 2), x)
        np.testing.assert_array_equal(y, x[:, ::2, ::2, ::2])

    def test_gradcheck(self):
        assert conv_check(np.random.default_rng(5)) < LAYER_TOLERANCE

    def test_strided_gradcheck(self):
        assert conv_check(np.random.default_rng(6), stride=2, n=6) < LAYER_TOLERANCE

    def test_even_kernel_rejected(self):
        with pytest.raises(ModelError) as exc:
            conv(np.ones((1, 1, 2, 2, 2)))
        assert exc.value.code == "even_kernel"

    def test_channel_mismatch(self):
        with pytest.raises(ModelError) as exc:
            conv3d_forward(conv(np.ones((1, 2, 3, 3, 3))), np.ones((1, 1, 4, 4, 4)))
        assert exc.value.code == "shape_mismatch"


# ── Activations, pooling, loss ──


class TestActivations:
    def test_relu(self):
        assert relu(np.array([-3.0, 2.0])).tolist() == [0.0, 2.0]
        assert relu_backward(np.array([-3.0, 2.0]), np.array([5.0, 5.0])).tolist() == [0.0, 5.0]

    def test_relu_gradcheck(self):
        assert relu_check(np.random.default_rng(8)) < LAYER_TOLERANCE

    def test_gap_constant(self):
        x = np.full((2, 3, 4, 4, 4), 2.5)
        np.testing.assert_array_equal(global_avg_pool(x), np.full((2, 3), 2.5))

    def test_gap_backward_uniform(self):
        grad = global_avg_pool_backward((1, 2, 2, 2, 2), np.array([[8.0, 16.0]]))
        assert np.all(grad[0, 0] == 1.0)
        assert np.all(grad[0, 1] == 2.0)
        assert gap_check(np.random.default_rng(9)) < LAYER_TOLERANCE

    def test_window_intensity(self):
        out = window_intensity(np.array([-2000.0, -1000.0, -300.0, 400.0, 900.0]), (-1000.0, 400.0))
        np.testing.assert_allclose(out, [-1.0, -1.0, 0.0, 1.0, 1.0])


class TestSoftmaxCE:
    def test_uniform_logits(self):
        loss, probs, _ = softmax_ce(np.zeros(4), 2)
        np.testing.assert_allclose(probs, 0.25)
        assert loss == pytest.approx(math.log(4))

    def test_large_logit_is_stable(self):
        loss, probs, grad = softmax_ce(np.array([1000.0, 0.0, 0.0, 0.0]), 0)
        assert loss == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.isfinite(probs))
        assert np.all(np.isfinite(grad))

    def test_gradient_matches_differences(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            z = rng.normal(size=4) * 3.0
            label = int(rng.integers(4))
            _, _, dz = softmax_ce(z, label)
            numeric = numeric_gradient(lambda: softmax_ce(z, label)[0], z)
            assert np.max(np.abs(numeric - dz)) < 1e-6

    def test_probabilities(self):
        p = softmax(np.random.default_rng(11).normal(size=(20, 4)) * 10)
        assert np.all(p > 0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)

    def test_batch_is_mean(self):
        z = np.random.default_rng(12).normal(size=(3, 4))
        labels = np.array([0, 3, 1])
        loss, _, grad = softmax_ce(z, labels)
        singles = [softmax_ce(z[i], labels[i]) for i in range(3)]
        assert loss == pytest.approx(np.mean([s[0] for s in singles]))
        np.testing.assert_allclose(grad, np.stack([s[2] for s in singles]) / 3)

    def test_non_finite_logits(self):
        with pytest.raises(ModelError) as exc:
            softmax_ce(np.array([0.0, np.nan, 0.0, 0.0]), 0)
        assert exc.value.code == "non_finite_logits"

    def test_invalid_label(self):
        with pytest.raises(ModelError) as exc:
            softmax_ce(np.zeros(4), 4)
        assert exc.value.code == "invalid_label"


def test_layer_gradchecks_all_pass():
    errors = layer_gradchecks(seed=3)
    assert set(errors) == {"dense", "conv3d", "conv3d_stride2", "relu", "global_avg_pool", "softmax_ce"}
    assert all(e < LAYER_TOLERANCE for e in errors.values())


@pytest.mark.parametrize("seed", range(100))
def test_layer_gradcheck_fuzz(seed):
    rng = np.random.default_rng([7, seed])
    errors = {
        "dense": dense_check(rng, n_in=int(rng.integers(1, 10)), n_out=int(rng.integers(1, 6))),
        "conv3d": conv_check(
            rng, channels=int(rng.integers(1, 3)), n=int(rng.integers(3, 6)), stride=int(rng.integers(1, 3)),
        ),
        "relu": relu_check(rng),
        "global_avg_pool": gap_check(rng),
        "softmax_ce": softmax_check(rng, classes=int(rng.integers(2, 6))),
    }
    assert max(errors.values()) < LAYER_TOLERANCE, errors


# ── Gradient checking ──


class TestGradCheck:
    def test_relative_error(self):
        assert relative_error(1.0, 1.0) == 0.0
        assert relative_error(1.0, 3.0) == pytest.approx(0.5)

    def test_detects_wrong_gradient(self):
        w = np.array([1.0, 2.0, 3.0])
        report = check_gradients(lambda: float(np.sum(w**2)), {"w": w}, {"w": w.copy()}, None)
        assert not report.passed(1e-3)
        assert report.errors["w"] == pytest.approx(1 / 3, rel=1e-3)

    def test_restores_parameters(self):
        w = np.array([0.5, -0.5])
        check_gradients(lambda: float(np.sum(w**3)), {"w": w}, {"w": 3 * w**2}, None)
        assert w.tolist() == [0.5, -0.5]


# ── SGD / early stopping ──


class TestSGD:
    def test_plain_step(self):
        cfg = SGDConfig(learning_rate=0.1, momentum=0.0)
        p = {"w": np.array([1.0, -2.0])}
        g = {"w": np.array([0.5, 0.25])}
        new, _ = sgd_step(p, g, zeros_like_params(p), cfg)
        np.testing.assert_array_equal(new["w"], p["w"] - 0.1 * g["w"])
        assert p["w"].tolist() == [1.0, -2.0]

    def test_zero_gradient_keeps_params(self):
        cfg = SGDConfig(learning_rate=0.1, momentum=0.9)
        p = {"w": np.array([3.0, 4.0])}
        v = zeros_like_params(p)
        for _ in range(10):
            p, v = sgd_step(p, {"w": np.zeros(2)}, v, cfg)
        assert p["w"].tolist() == [3.0, 4.0]

    def test_quadratic_bowl(self):
        # heavy-ball contraction per step is sqrt(momentum)
        cfg = SGDConfig(learning_rate=0.1, momentum=0.9)
        p = {"w": np.array([1.0, 1.0])}
        v = zeros_like_params(p)
        norms = []
        for _ in range(300):
            p, v = sgd_step(p, {"w": p["w"].copy()}, v, cfg)
            norms.append(float(np.linalg.norm(p["w"])))
        assert norms[-1] < 1e-6
        assert all(norms[t] <= math.sqrt(2) * 0.9 ** ((t + 1) / 2) + 1e-12 for t in range(300))

    def test_shape_mismatch(self):
        cfg = SGDConfig()
        p = {"w": np.zeros(2)}
        with pytest.raises(ModelError) as exc:
            sgd_step(p, {"w": np.zeros(3)}, zeros_like_params(p), cfg)
        assert exc.value.code == "shape_mismatch"
        with pytest.raises(ModelError):
            sgd_step(p, {"b": np.zeros(2)}, zeros_like_params(p), cfg)


class TestEarlyStopping:
    def test_patience_one(self):
        stopper = EarlyStopping(patience=1)
        assert stopper.update(1, 1.0)
        assert not stopper.update(2, 1.1)
        assert not stopper.should_stop
        assert not stopper.update(3, 1.2)
        assert stopper.should_stop
        assert stopper.best_epoch == 1
        assert stopper.best == 1.0

    def test_improvement_resets(self):
        stopper = EarlyStopping(patience=2)
        for epoch, value in enumerate([1.0, 1.1, 1.2, 0.9, 1.0, 1.0], start=1):
            stopper.update(epoch, value)
        assert stopper.best_epoch == 4
        assert not stopper.should_stop

    def test_min_delta(self):
        stopper = EarlyStopping(patience=1, min_delta=0.1)
        stopper.update(1, 1.0)
        assert not stopper.update(2, 0.95)

    def test_invalid_patience(self):
        with pytest.raises(ModelError):
            EarlyStopping(patience=0)
