import math

import numpy as np
import pytest

from icsecure.nn import (
    AdamState,
    DenseNetworkSpec,
    ParameterSet,
    adam_step,
    backward,
    bce_loss,
    forward,
    init_params,
    params_from_blob,
    params_to_blob,
    predict,
    sgd_step,
)


def reference_forward(dims, params, x, output_activation):
    """Independent straight-line evaluation of the same arithmetic."""
    a = np.asarray(x, dtype=np.float64)
    for l in range(len(dims) - 1):
        z = a @ params.weights[l] + params.biases[l]
        if l < len(dims) - 2:
            a = np.where(z > 0, z, 0.0)
        elif output_activation == "sigmoid":
            a = 1.0 / (1.0 + np.exp(-z))
        else:
            a = z
    return a


def finite_difference_grads(spec, params, x, t, h=1e-5):
    """Central finite differences of the BCE loss wrt every parameter."""
    grads = ParameterSet(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )
    for arrs, outs in ((params.weights, grads.weights), (params.biases, grads.biases)):
        for arr, out in zip(arrs, outs):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                lp = bce_loss(forward(spec, params, x)[-1], np.atleast_2d(t))
                arr[idx] = orig - h
                lm = bce_loss(forward(spec, params, x)[-1], np.atleast_2d(t))
                arr[idx] = orig
                out[idx] = (lp - lm) / (2 * h)
    return grads


def assert_grads_close(analytic, numeric, rtol=1e-4):
    for a, n in zip(analytic.weights + analytic.biases, numeric.weights + numeric.biases):
        scale = np.maximum(np.abs(n), 1e-8)
        assert np.all(np.abs(a - n) / scale < rtol)


class TestForward:
    def test_zero_net_sigmoid_outputs_half(self):
        spec = DenseNetworkSpec((3, 4, 2))
        params = ParameterSet(
            [np.zeros((3, 4)), np.zeros((4, 2))],
            [np.zeros(4), np.zeros(2)],
        )
        out = predict(spec, params, np.array([1.0, -2.0, 0.5]))
        np.testing.assert_allclose(out, [0.5, 0.5])

    def test_identity_1x1_net(self):
        spec = DenseNetworkSpec((1, 1), output_activation="identity")
        params = ParameterSet([np.ones((1, 1))], [np.zeros(1)])
        assert predict(spec, params, np.array([2.0]))[0] == 2.0

    def test_matches_reference_reimplementation(self):
        rng = np.random.default_rng(42)
        spec = DenseNetworkSpec((4, 8, 3))
        params = init_params(spec, rng)
        x = rng.normal(size=4)
        got = predict(spec, params, x)
        want = reference_forward(spec.layer_dims, params, x, "sigmoid")
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-15)

    def test_shape_mismatch_rejected(self):
        spec = DenseNetworkSpec((3, 2))
        params = init_params(spec, np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward(spec, params, np.zeros(5))

    def test_sigmoid_outputs_in_open_interval(self):
        rng = np.random.default_rng(3)
        spec = DenseNetworkSpec((5, 6, 4))
        params = init_params(spec, rng)
        out = predict(spec, params, rng.normal(size=(10, 5)))
        assert np.all(out > 0) and np.all(out < 1)


class TestBceLoss:
    def test_half_prediction_is_ln2(self):
        assert math.isclose(bce_loss([0.5], [1.0]), math.log(2), rel_tol=1e-12)

    def test_perfect_prediction_near_zero(self):
        assert bce_loss([1.0, 0.0], [1.0, 0.0]) <= 1e-11

    def test_two_element_example(self):
        # mean of -ln(0.9) twice
        assert math.isclose(bce_loss([0.9, 0.1], [1.0, 0.0]), 0.10536051565782628, rel_tol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bce_loss([0.5, 0.5], [1.0])

    def test_nonnegative_random(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = rng.uniform(0, 1, size=8)
            t = rng.integers(0, 2, size=8).astype(float)
            assert bce_loss(p, t) >= 0.0


def jitter(params, rng, scale=0.05):
    """Move parameters off exact ReLU kinks before finite-difference checks."""
    for arr in params.weights + params.biases:
        arr += rng.normal(scale=scale, size=arr.shape)


class TestBackward:
    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n_layers = int(rng.integers(1, 4))
            dims = tuple(int(rng.integers(1, 11)) for _ in range(n_layers + 1))
            spec = DenseNetworkSpec(dims)
            params = init_params(spec, rng)
            jitter(params, rng)
            x = rng.normal(size=dims[0])
            t = rng.integers(0, 2, size=dims[-1]).astype(float)
            _, analytic = backward(spec, params, x, t)
            numeric = finite_difference_grads(spec, params, x, t)
            assert_grads_close(analytic, numeric)

    def test_zero_gradient_at_perfect_targets(self):
        spec = DenseNetworkSpec((2, 2))
        params = ParameterSet([np.zeros((2, 2))], [np.zeros(2)])
        # sigmoid(0) = 0.5 exactly; targets equal predictions
        _, grads = backward(spec, params, np.array([1.0, 2.0]), np.array([0.5, 0.5]))
        total = sum(np.abs(g).sum() for g in grads.weights + grads.biases)
        assert total < 1e-9

    def test_single_neuron_bias_gradient(self):
        # p = sigmoid(0) = 0.5, t = 1 => dL/dbias = p - t = -0.5
        spec = DenseNetworkSpec((1, 1))
        params = ParameterSet([np.zeros((1, 1))], [np.zeros(1)])
        _, grads = backward(spec, params, np.array([3.0]), np.array([1.0]))
        assert math.isclose(grads.biases[0][0], -0.5, rel_tol=1e-12)

    def test_identity_output_rejected(self):
        spec = DenseNetworkSpec((2, 1), output_activation="identity")
        params = init_params(spec, np.random.default_rng(0))
        with pytest.raises(ValueError):
            backward(spec, params, np.zeros(2), np.zeros(1))


class TestOptimizers:
    def setup_scalar(self):
        spec = DenseNetworkSpec((1, 1))
        params = ParameterSet([np.array([[1.0]])], [np.array([0.0])])
        return spec, params

    def test_adam_zero_gradient_keeps_params(self):
        _, params = self.setup_scalar()
        grads = ParameterSet([np.zeros((1, 1))], [np.zeros(1)])
        state = AdamState.for_params(params)
        adam_step(params, grads, state, 0.001)
        assert params.weights[0][0, 0] == 1.0
        assert state.step == 1

    def test_adam_first_step_size_is_lr(self):
        # step 1 with constant gradient g: update = lr * g/|g| (eps-corrected)
        _, params = self.setup_scalar()
        grads = ParameterSet([np.array([[0.4]])], [np.zeros(1)])
        state = AdamState.for_params(params)
        adam_step(params, grads, state, 0.01)
        assert math.isclose(params.weights[0][0, 0], 1.0 - 0.01, rel_tol=1e-6)

    def test_adam_determinism(self):
        rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
        spec = DenseNetworkSpec((3, 4, 1))
        runs = []
        for rng in (rng1, rng2):
            params = init_params(spec, rng)
            state = AdamState.for_params(params)
            for _ in range(20):
                x = rng.normal(size=(8, 3))
                t = rng.integers(0, 2, size=(8, 1)).astype(float)
                _, grads = backward(spec, params, x, t)
                adam_step(params, grads, state, 0.01)
            runs.append(params)
        for a, b in zip(runs[0].weights, runs[1].weights):
            assert np.array_equal(a, b)

    def test_sgd_zero_lr_keeps_params(self):
        _, params = self.setup_scalar()
        grads = ParameterSet([np.array([[0.5]])], [np.array([0.1])])
        sgd_step(params, grads, 0.0)
        assert params.weights[0][0, 0] == 1.0

    def test_sgd_arithmetic(self):
        _, params = self.setup_scalar()
        grads = ParameterSet([np.array([[0.5]])], [np.array([0.0])])
        sgd_step(params, grads, 0.1)
        assert math.isclose(params.weights[0][0, 0], 0.95, rel_tol=1e-15)

    def test_descent_on_convex_quadratic(self):
        # SGD and Adam both step against the gradient sign
        for val in (2.0, -2.0):
            params = ParameterSet([np.array([[val]])], [np.array([0.0])])
            grads = ParameterSet([np.array([[2 * val]])], [np.array([0.0])])
            sgd_step(params, grads, 0.1)
            assert abs(params.weights[0][0, 0]) < abs(val)


class TestSerialization:
    def test_blob_round_trip_exact(self):
        rng = np.random.default_rng(9)
        spec = DenseNetworkSpec((5, 7, 2))
        params = init_params(spec, rng)
        blob, manifest = params_to_blob(params)
        restored = params_from_blob(blob, manifest)
        for a, b in zip(params.weights + params.biases, restored.weights + restored.biases):
            assert np.array_equal(a, b)
