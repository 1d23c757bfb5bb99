"""Model probabilities, likelihood, and derivatives against hand and
finite-difference oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetpref import (
    DimensionMismatchError,
    ModelParams,
    PreferenceDataset,
    PreferenceSample,
    ValidationError,
    grad_gamma,
    grad_theta,
    hessian_blocks,
    neg_log_likelihood,
    preference_prob,
    scale_value,
)
from hetpref.model import sigmoid

from helpers import fd_grad_gamma, fd_grad_theta, fd_jacobian, random_dataset, random_params, rel_err


def one_sample_dataset(psi0, psi, z, y):
    return PreferenceDataset(
        psi0=np.array([psi0]), psi=np.array([psi]), z=np.array([z]), y=np.array([float(y)])
    )


class TestScaleValue:
    def test_zero_gamma_returns_anchor(self):
        sample = PreferenceSample(psi0=1.0, psi=np.array([2.0, 3.0]), z=np.array([1.0]), y=1)
        params = ModelParams(theta=np.array([0.5]), gamma=np.zeros(2))
        assert scale_value(params, sample) == 1.0

    def test_direct_substitution(self):
        sample = PreferenceSample(psi0=1.0, psi=np.array([1.0, 1.0]), z=np.array([1.0]), y=0)
        params = ModelParams(theta=np.array([0.0]), gamma=np.array([0.5, 1.0 / 3.0]))
        assert scale_value(params, sample) == pytest.approx(11.0 / 6.0, abs=1e-15)

    def test_cubic_quadratic_features_can_go_negative(self):
        # context x = -1 through the simulation feature maps psi0=x, psi=(x^3, x^2)
        x = -1.0
        sample = PreferenceSample(psi0=x, psi=np.array([x**3, x**2]), z=np.array([1.0]), y=0)
        params = ModelParams(theta=np.array([0.0]), gamma=np.array([0.5, 1.0 / 3.0]))
        assert scale_value(params, sample) == pytest.approx(-7.0 / 6.0, abs=1e-15)

    def test_dimension_mismatch_reports_lengths(self):
        sample = PreferenceSample(psi0=0.0, psi=np.array([1.0, 2.0]), z=np.array([1.0]), y=1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([1.0]))
        with pytest.raises(DimensionMismatchError, match="expected length 2, got 1"):
            scale_value(params, sample)


class TestPreferenceProb:
    def test_zero_reward_difference(self):
        sample = PreferenceSample(psi0=3.0, psi=np.array([1.0]), z=np.array([0.0]), y=1)
        params = ModelParams(theta=np.array([2.0]), gamma=np.array([1.0]))
        assert preference_prob(params, sample) == 0.5

    def test_zero_scale_erases_signal(self):
        sample = PreferenceSample(psi0=0.0, psi=np.array([0.0]), z=np.array([5.0]), y=1)
        params = ModelParams(theta=np.array([3.0]), gamma=np.array([7.0]))
        assert preference_prob(params, sample) == 0.5

    def test_log3_logit(self):
        sample = PreferenceSample(psi0=1.0, psi=np.array([0.0]), z=np.array([math.log(3.0)]), y=1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([0.0]))
        assert preference_prob(params, sample) == pytest.approx(0.75, abs=1e-15)

    @given(st.floats(-1e6, 1e6), st.floats(-30.0, 30.0))
    def test_open_interval_and_symmetry(self, z, scale):
        sample = PreferenceSample(psi0=scale, psi=np.array([0.0]), z=np.array([z]), y=1)
        mirrored = PreferenceSample(psi0=scale, psi=np.array([0.0]), z=np.array([-z]), y=1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([0.0]))
        p = preference_prob(params, sample)
        assert 0.0 < p < 1.0
        assert preference_prob(params, mirrored) == pytest.approx(1.0 - p, abs=1e-12)

    def test_negating_theta_flips_probability(self):
        rng = np.random.default_rng(11)
        data = random_dataset(rng, 20, 3, 2)
        params = random_params(rng, 3, 2)
        flipped = ModelParams(theta=-params.theta, gamma=params.gamma)
        for i in range(data.n):
            s = data.sample(i)
            assert preference_prob(flipped, s) == pytest.approx(
                1.0 - preference_prob(params, s), abs=1e-12
            )

    def test_negating_gamma_flips_probability_when_anchor_is_zero(self):
        rng = np.random.default_rng(12)
        data = PreferenceDataset(
            psi0=np.zeros(20),
            psi=rng.normal(size=(20, 2)),
            z=rng.normal(size=(20, 3)),
            y=rng.integers(0, 2, 20).astype(float),
        )
        params = random_params(rng, 3, 2)
        flipped = ModelParams(theta=params.theta, gamma=-params.gamma)
        for i in range(data.n):
            s = data.sample(i)
            assert preference_prob(flipped, s) == pytest.approx(
                1.0 - preference_prob(params, s), abs=1e-12
            )

    def test_homogeneous_reduction_is_plain_logistic(self):
        # anchor 1 with zero gamma collapses to the classic pairwise logit model
        rng = np.random.default_rng(13)
        z = rng.normal(size=(25, 3))
        data = PreferenceDataset(
            psi0=np.ones(25), psi=rng.normal(size=(25, 2)), z=z,
            y=rng.integers(0, 2, 25).astype(float),
        )
        theta = rng.normal(size=3)
        params = ModelParams(theta=theta, gamma=np.zeros(2))
        for i in range(data.n):
            assert preference_prob(params, data.sample(i)) == pytest.approx(
                float(sigmoid(theta @ z[i])), abs=1e-15
            )


class TestNegLogLikelihood:
    def test_single_sample_at_even_odds(self):
        data = one_sample_dataset(0.0, [0.0], [0.0], 1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([1.0]))
        assert neg_log_likelihood(params, data) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_two_even_odds_samples_average(self):
        data = PreferenceDataset(
            psi0=np.zeros(2), psi=np.zeros((2, 1)), z=np.zeros((2, 1)), y=np.array([0.0, 1.0])
        )
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([1.0]))
        assert neg_log_likelihood(params, data) == pytest.approx(math.log(2.0), abs=1e-15)

    def test_log3_logit_correct_label(self):
        data = one_sample_dataset(1.0, [0.0], [math.log(3.0)], 1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([0.0]))
        assert neg_log_likelihood(params, data) == pytest.approx(-math.log(0.75), abs=1e-14)

    def test_extreme_logit_stays_finite(self):
        # mu underflows to 0 against the label; the stable form returns |logit|
        data = one_sample_dataset(1.0, [0.0], [-800.0], 1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([0.0]))
        loss = neg_log_likelihood(params, data)
        assert math.isfinite(loss)
        assert loss == pytest.approx(800.0, rel=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        data = random_dataset(rng, 10, 2, 2)
        params = random_params(rng, 2, 2)
        assert neg_log_likelihood(params, data) >= 0.0


class TestGradients:
    def test_balanced_residuals_give_zero_gradients(self):
        # same features, one win and one loss at even odds: residuals cancel
        data = PreferenceDataset(
            psi0=np.ones(2), psi=np.ones((2, 2)), z=np.ones((2, 3)), y=np.array([0.0, 1.0])
        )
        params = ModelParams(theta=np.zeros(3), gamma=np.zeros(2))
        np.testing.assert_allclose(grad_theta(params, data), np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(grad_gamma(params, data), np.zeros(2), atol=1e-15)

    def test_single_sample_theta_gradient(self):
        data = one_sample_dataset(1.0, [0.0], [1.0], 1)
        params = ModelParams(theta=np.array([0.0]), gamma=np.array([0.0]))
        grad = grad_theta(params, data)
        np.testing.assert_allclose(grad, [-0.5], atol=1e-12)
        np.testing.assert_allclose(grad, fd_grad_theta(params, data), atol=1e-6)

    def test_zero_theta_kills_gamma_gradient(self):
        rng = np.random.default_rng(5)
        data = random_dataset(rng, 30, 3, 2)
        params = ModelParams(theta=np.zeros(3), gamma=rng.normal(size=2))
        np.testing.assert_allclose(grad_gamma(params, data), np.zeros(2), atol=1e-15)

    def test_single_sample_gamma_gradient(self):
        data = one_sample_dataset(0.0, [1.0], [1.0], 1)
        params = ModelParams(theta=np.array([1.0]), gamma=np.array([0.0]))
        grad = grad_gamma(params, data)
        np.testing.assert_allclose(grad, [-0.5], atol=1e-12)
        np.testing.assert_allclose(grad, fd_grad_gamma(params, data), atol=1e-6)

    def test_matches_finite_differences_at_random_points(self):
        rng = np.random.default_rng(2024)
        for _ in range(20):
            d1 = int(rng.integers(1, 5))
            d2 = int(rng.integers(1, 5))
            n = int(rng.integers(2, 51))
            data = random_dataset(rng, n, d1, d2)
            params = random_params(rng, d1, d2, scale=0.7)
            assert rel_err(grad_theta(params, data), fd_grad_theta(params, data)) <= 1e-5
            assert rel_err(grad_gamma(params, data), fd_grad_gamma(params, data)) <= 1e-5

    def test_population_gradient_vanishes_at_simulation_truth(self):
        # Monte-Carlo oracle: at the generating parameters the expected
        # gradient is zero, so the empirical one is O(1/sqrt(n)).
        from hetpref import SimSpec, generate

        n = 100_000
        spec = SimSpec(n=n, seed=2028)
        data = generate(spec)
        params = spec.true_params
        bound = 3.0 / math.sqrt(n)
        assert np.max(np.abs(grad_theta(params, data))) < bound
        assert np.max(np.abs(grad_gamma(params, data))) < bound


class TestHessianBlocks:
    def test_zero_theta_balanced_labels(self):
        data = PreferenceDataset(
            psi0=np.zeros(2),
            psi=np.array([[1.0, 2.0], [1.0, 2.0]]),
            z=np.array([[2.0], [2.0]]),
            y=np.array([0.0, 1.0]),
        )
        params = ModelParams(theta=np.array([0.0]), gamma=np.array([1.0, 1.0]))
        h_tt, h_gg, h_gt = hessian_blocks(params, data)
        np.testing.assert_allclose(h_gg, np.zeros((2, 2)), atol=1e-15)
        np.testing.assert_allclose(h_gt, np.zeros((2, 1)), atol=1e-15)

    def test_nonconvexity_construction(self):
        # two samples with zero theta: the cross block alone is -1, so the
        # joint curvature matrix has a negative determinant
        data = PreferenceDataset(
            psi0=np.zeros(2),
            psi=np.array([[1.0], [2.0]]),
            z=np.array([[2.0], [1.0]]),
            y=np.array([1.0, 1.0]),
        )
        params = ModelParams(theta=np.array([0.0]), gamma=np.array([0.0]))
        h_tt, h_gg, h_gt = hessian_blocks(params, data)
        np.testing.assert_allclose(h_gt, [[-1.0]], atol=1e-15)
        np.testing.assert_allclose(h_gg, [[0.0]], atol=1e-15)
        joint = np.block([[h_tt, h_gt.T], [h_gt, h_gg]])
        assert np.linalg.det(joint) < 0

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            d1, d2, n = 3, 2, 12
            data = random_dataset(rng, n, d1, d2)
            params = random_params(rng, d1, d2, scale=0.6)
            h_tt, h_gg, h_gt = hessian_blocks(params, data)

            def gt_of_theta(theta):
                return grad_theta(ModelParams(theta, params.gamma), data)

            def gg_of_gamma(gamma):
                return grad_gamma(ModelParams(params.theta, gamma), data)

            def gt_of_gamma(gamma):
                return grad_theta(ModelParams(params.theta, gamma), data)

            assert rel_err(fd_jacobian(gt_of_theta, params.theta.copy()), h_tt) <= 1e-5
            assert rel_err(fd_jacobian(gg_of_gamma, params.gamma.copy()), h_gg) <= 1e-5
            # cross block: d(grad_theta)/d(gamma) has shape (d1, d2) = h_gt.T
            assert rel_err(fd_jacobian(gt_of_gamma, params.gamma.copy()), h_gt.T) <= 1e-5

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_within_blocks_are_psd(self, seed):
        rng = np.random.default_rng(seed)
        d1 = int(rng.integers(1, 4))
        d2 = int(rng.integers(1, 4))
        data = random_dataset(rng, int(rng.integers(2, 30)), d1, d2)
        params = random_params(rng, d1, d2)
        h_tt, h_gg, _ = hessian_blocks(params, data)
        assert np.linalg.eigvalsh(h_tt).min() >= -1e-10
        assert np.linalg.eigvalsh(h_gg).min() >= -1e-10


class TestValidation:
    def test_rejects_bad_label(self):
        with pytest.raises(ValidationError, match="y=2"):
            PreferenceDataset(
                psi0=np.zeros(1), psi=np.zeros((1, 1)), z=np.zeros((1, 1)), y=np.array([2.0])
            )

    def test_rejects_empty_dataset(self):
        with pytest.raises(ValidationError, match="at least one sample"):
            PreferenceDataset(
                psi0=np.zeros(0), psi=np.zeros((0, 1)), z=np.zeros((0, 1)), y=np.zeros(0)
            )

    def test_rejects_nan_feature(self):
        with pytest.raises(ValidationError, match="non-finite"):
            PreferenceDataset(
                psi0=np.array([np.nan]), psi=np.zeros((1, 1)), z=np.zeros((1, 1)), y=np.array([1.0])
            )

    def test_rejects_nonfinite_params(self):
        with pytest.raises(ValidationError):
            ModelParams(theta=np.array([np.inf]), gamma=np.array([0.0]))

    def test_from_samples_round_trip(self):
        rng = np.random.default_rng(3)
        data = random_dataset(rng, 5, 2, 3)
        rebuilt = PreferenceDataset.from_samples(data.samples)
        np.testing.assert_array_equal(rebuilt.z, data.z)
        np.testing.assert_array_equal(rebuilt.psi, data.psi)
        np.testing.assert_array_equal(rebuilt.y, data.y)

    def test_mismatched_sample_lengths_rejected(self):
        good = PreferenceSample(psi0=0.0, psi=np.zeros(2), z=np.zeros(3), y=0)
        bad = PreferenceSample(psi0=0.0, psi=np.zeros(2), z=np.zeros(2), y=0)
        with pytest.raises(DimensionMismatchError):
            PreferenceDataset.from_samples([good, bad])
