"""Unit tests for the Shannon information and intra-class variance losses."""

import numpy as np
import pytest

from hcloss.engine import Tensor, softmax
from hcloss.errors import DistributionError, NonFiniteError, ShapeError
from hcloss.losses import (
    CentroidBank,
    combined_loss,
    cross_entropy,
    entropy,
    intra_class_variance_loss,
    kl_divergence,
    shannon_info_loss,
    shannon_info_loss_from_scores,
)


class TestInformationIdentities:
    """Mean information equals cross-entropy and entropy plus divergence on one-hot targets."""

    def test_three_way_equivalence(self, rng):
        """Test that mean information, cross-entropy and entropy plus KL agree on one-hot targets."""
        scores = rng.normal(size=(8, 5))
        labels = rng.integers(0, 5, size=8)
        probs = softmax(Tensor(scores)).data

        info = shannon_info_loss(Tensor(probs), labels).item()
        from_scores = shannon_info_loss_from_scores(Tensor(scores), labels).item()
        onehot = np.eye(5)[labels]
        ce = np.mean([cross_entropy(q, p) for q, p in zip(onehot, probs)])
        decomposed = np.mean([entropy(q) + kl_divergence(q, p) for q, p in zip(onehot, probs)])

        assert info == pytest.approx(from_scores, abs=1e-12)
        assert info == pytest.approx(ce, abs=1e-12)
        assert info == pytest.approx(decomposed, abs=1e-12)

    def test_soft_targets_satisfy_gibbs_decomposition(self):
        """Test that cross-entropy splits into entropy and KL for soft targets."""
        q, p = np.array([0.2, 0.3, 0.5]), np.array([0.6, 0.1, 0.3])
        assert cross_entropy(q, p) == pytest.approx(entropy(q) + kl_divergence(q, p), abs=1e-12)
        assert kl_divergence(q, p) > 0
        assert kl_divergence(q, q) == 0.0

    def test_entropy_of_one_hot_is_zero(self):
        """Test that a one-hot distribution has zero entropy."""
        assert entropy(np.array([0.0, 1.0, 0.0])) == 0.0

    def test_kl_undefined_when_p_vanishes(self):
        """Test that KL is refused when p is zero where q is not."""
        with pytest.raises(DistributionError, match="vanishes"):
            kl_divergence(np.array([0.5, 0.5]), np.array([1.0, 0.0]))

    def test_rejects_non_distribution(self):
        """Test that a vector not summing to one is rejected."""
        with pytest.raises(DistributionError):
            entropy(np.array([0.5, 0.6]))


class TestShannonInfo:
    """Tests for the Shannon information loss."""

    def test_uniform_scores_give_log_k(self):
        """Test that uniform scores cost log K per sample."""
        loss = shannon_info_loss_from_scores(Tensor(np.zeros((3, 10))), np.array([0, 4, 9]))
        assert loss.item() == pytest.approx(np.log(10.0), abs=1e-12)

    def test_underflow_is_divergence(self):
        """Test that a zero probability on the true class is non-finite."""
        probs = Tensor(np.array([[1.0, 0.0]]))
        with pytest.raises(NonFiniteError):
            shannon_info_loss(probs, np.array([1]))

    def test_label_out_of_range(self):
        """Test that a label outside the score columns is rejected."""
        with pytest.raises(ShapeError, match=r"\[0, 3\)"):
            shannon_info_loss_from_scores(Tensor(np.zeros((2, 3))), np.array([0, 3]))


class TestIntraClassVariance:
    """Tests for the intra-class variance loss."""

    def test_matches_direct_mean_squared_distance(self, rng):
        """Test the loss against a direct mean squared distance."""
        x = rng.normal(size=(7, 2))
        c = rng.normal(size=(2, 3))
        labels = np.array([0, 1, 2, 2, 1, 0, 0])
        expected = np.mean(np.sum((x - c[:, labels].T) ** 2, axis=1))
        value = intra_class_variance_loss(Tensor(x), labels, CentroidBank(c)).item()
        assert value == pytest.approx(expected, rel=1e-12)

    def test_zero_when_points_sit_on_centroids(self):
        """Test that embeddings on their centroids cost nothing."""
        c = np.array([[1.0, -1.0], [2.0, 0.5]])
        x = c[:, [1, 0, 1]].T
        assert intra_class_variance_loss(Tensor(x), np.array([1, 0, 1]), CentroidBank(c)).item() == 0.0

    def test_dimension_mismatch(self):
        """Test that embedding and centroid widths must agree."""
        with pytest.raises(ShapeError):
            intra_class_variance_loss(Tensor(np.zeros((2, 3))), np.array([0, 1]), CentroidBank.zeros(2, 2))


class TestCombinedLoss:
    """Tests for combined_loss."""

    def test_zero_lambda_total_is_shannon_term(self, rng):
        """Test that lambda 0 keeps the variance term off the tape."""
        scores, x = Tensor(rng.normal(size=(5, 3)), requires_grad=True), Tensor(rng.normal(size=(5, 2)), requires_grad=True)
        bank = CentroidBank(rng.normal(size=(2, 3)))
        labels = np.array([0, 1, 2, 0, 1])

        breakdown = combined_loss(scores, x, labels, bank, 0.0)

        assert breakdown.total == breakdown.l0
        assert breakdown.l_var > 0
        breakdown.objective.backward()
        assert x.grad is None
        assert bank.C.grad is None

    def test_total_adds_weighted_variance(self, rng):
        """Test that the total is L0 plus lambda times the variance term."""
        scores, x = Tensor(rng.normal(size=(4, 3))), Tensor(rng.normal(size=(4, 2)))
        breakdown = combined_loss(scores, x, np.array([0, 1, 2, 0]), CentroidBank(rng.normal(size=(2, 3))), 0.3)
        assert breakdown.total == pytest.approx(breakdown.l0 + 0.3 * breakdown.l_var, rel=1e-12)
        assert breakdown.objective.item() == pytest.approx(breakdown.total, rel=1e-12)

    def test_negative_lambda(self):
        """Test that a negative lambda is rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            combined_loss(Tensor(np.zeros((1, 2))), Tensor(np.zeros((1, 2))), np.array([0]), CentroidBank.zeros(2, 2), -0.1)
