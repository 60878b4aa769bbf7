"""Unit tests for Adam and momentum SGD."""

import numpy as np
import pytest

from hcloss.engine import Tensor
from hcloss.errors import NonFiniteError, ShapeError
from hcloss.optim import Adam, AdamState, MomentumSGD, adam_step, make_optimizer, momentum_sgd_step


def quadratic_grad(p):
    return 2.0 * p


class TestAdam:
    """Tests for Adam."""

    def test_first_step_moves_by_learning_rate(self):
        """Test that bias correction makes the first step exactly lr per coordinate."""
        params = {"w": np.array([1.0, -3.0])}
        adam_step(params, {"w": np.array([0.5, -7.0])}, AdamState(lr=0.1))
        np.testing.assert_allclose(params["w"], [0.9, -2.9], rtol=1e-6)

    def test_zero_gradient_leaves_parameters(self):
        """Test that zero gradients move nothing but still count steps."""
        params = {"w": np.array([1.0, 2.0])}
        state = AdamState()
        for _ in range(5):
            adam_step(params, {"w": np.zeros(2)}, state)
        np.testing.assert_array_equal(params["w"], [1.0, 2.0])
        assert state.t == 5

    def test_minimises_quadratic(self):
        """Test that Adam drives a quadratic to its minimum."""
        p = Tensor(np.array([3.0, -2.0]), requires_grad=True, name="p")
        opt = Adam([p], lr=0.05)
        for _ in range(1000):
            opt.zero_grad()
            (p * p).sum().backward()
            opt.step()
        np.testing.assert_allclose(p.data, 0.0, atol=5e-2)

    def test_non_finite_gradient_updates_nothing(self):
        """Test that a NaN gradient aborts the whole step and names the parameter."""
        params = {"a": np.ones(2), "b": np.ones(2)}
        with pytest.raises(NonFiniteError, match="'b'"):
            adam_step(params, {"a": np.ones(2), "b": np.array([np.nan, 0.0])}, AdamState())
        np.testing.assert_array_equal(params["a"], 1.0)

    def test_shape_mismatch(self):
        """Test that a gradient of the wrong shape is rejected."""
        with pytest.raises(ShapeError):
            adam_step({"w": np.ones(2)}, {"w": np.ones(3)}, AdamState())


class TestMomentumSGD:
    """Tests for momentum SGD."""

    def test_plain_gradient_descent_converges(self):
        """Test that zero momentum is plain gradient descent."""
        params = {"w": np.array([4.0, -1.0])}
        velocity = {}
        for _ in range(60):
            momentum_sgd_step(params, {"w": quadratic_grad(params["w"])}, velocity, lr=0.25, momentum=0.0)
        np.testing.assert_allclose(params["w"], 0.0, atol=1e-12)

    def test_velocity_accumulates(self):
        """Test that velocity carries over between steps."""
        params = {"w": np.array([0.0])}
        velocity = {}
        momentum_sgd_step(params, {"w": np.array([1.0])}, velocity, lr=1.0, momentum=0.9)
        momentum_sgd_step(params, {"w": np.array([1.0])}, velocity, lr=1.0, momentum=0.9)
        np.testing.assert_allclose(velocity["w"], [1.9])
        np.testing.assert_allclose(params["w"], [-2.9])

    def test_frozen_tensor_is_skipped(self):
        """Test that tensors without gradients are left alone."""
        live = Tensor(np.array([1.0]), requires_grad=True, name="live")
        frozen = Tensor(np.array([1.0]), requires_grad=False, name="frozen")
        opt = MomentumSGD([live, frozen], lr=0.1)
        (live * frozen).sum().backward()
        opt.step()
        assert live.data[0] == pytest.approx(0.9)
        assert frozen.data[0] == 1.0


def test_make_optimizer_by_name():
    """Test that optimizers are built by name and unknown names rejected."""
    p = Tensor(np.zeros(1), requires_grad=True, name="p")
    assert isinstance(make_optimizer("adam", [p], 0.001), Adam)
    assert isinstance(make_optimizer("msgd", [p], 0.01, momentum=0.5), MomentumSGD)
    with pytest.raises(ValueError, match="Unknown optimizer"):
        make_optimizer("rmsprop", [p], 0.01)


def test_duplicate_parameter_names():
    """Test that parameter names must be unique."""
    with pytest.raises(ValueError, match="unique"):
        Adam([Tensor(np.zeros(1), name="w"), Tensor(np.zeros(1), name="w")])
