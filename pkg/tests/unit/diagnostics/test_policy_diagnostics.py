"""
Testes Unitários para histogramas de ação e campo de gradiente de Q
"""

import csv

import numpy as np
import pytest

from core.errors import ConfigurationError
from diagnostics.policy_diagnostics import action_histogram, finite_difference_field, q_action_gradient_field
from interfaces.rl_interfaces import IQFunction


class QuadraticQ(IQFunction):
    """Q(s, a) = −‖a‖², com gradiente −2a."""

    def q_values(self, s, a):
        return -np.sum(np.asarray(a) ** 2, axis=1)

    def features(self, s, a):
        return np.asarray(a)

    def q_and_action_grad(self, s, a):
        return self.q_values(s, a), -2.0 * np.asarray(a)


class TestActionHistogram:
    """Testes do histograma de ações."""

    def test_constant_action_single_bin(self, trajectory_factory):
        trajectory = trajectory_factory(10, seed=1)
        trajectory.actions[:] = 0.05

        histogram = action_histogram([trajectory], bins=20)

        assert histogram.frequencies.shape == (2, 20)
        np.testing.assert_allclose(histogram.frequencies.sum(axis=1), 1.0)
        assert histogram.frequencies[0, 10] == 1.0
        assert histogram.bang_bang_index == 0.0

    def test_bang_bang_actions(self):
        actions = np.array([[-1.0, 1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, -1.0]])

        assert action_histogram(actions, bins=10).bang_bang_index == 1.0

    def test_out_of_range_actions_clipped(self):
        histogram = action_histogram(np.array([[3.0], [-3.0]]), bins=4)

        np.testing.assert_allclose(histogram.frequencies[0], [0.5, 0.0, 0.0, 0.5])

    def test_empty_rejected(self, trajectory_factory):
        with pytest.raises(ConfigurationError):
            action_histogram([trajectory_factory(0)])

    def test_csv(self, tmp_path):
        path = tmp_path / "hist.csv"
        action_histogram(np.array([[0.0, 0.5]]), bins=2).to_csv(str(path), label="online")

        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))

        assert rows[0] == ["label", "dim", "bin", "left", "right", "frequency"]
        assert len(rows) == 1 + 2 * 2
        assert rows[1][0] == "online"


class TestGradientField:
    """Testes do campo ∂Q/∂a."""

    def test_quadratic_field(self):
        field = q_action_gradient_field(QuadraticQ(), np.zeros(3), np.zeros(2), grid=5)

        gx, gy = np.meshgrid(field.xs, field.ys)
        np.testing.assert_allclose(field.gradient[..., 0], -2.0 * gx)
        np.testing.assert_allclose(field.gradient[..., 1], -2.0 * gy)
        assert field.q[2, 2] == 0.0

    def test_fixed_dimension_keeps_base_action(self):
        field = q_action_gradient_field(QuadraticQ(), np.zeros(3), np.array([0.0, 0.5, 0.0]), dims=(0, 2), grid=3)

        # −‖a‖² inclui a dimensão fixa: Q no centro = −0.25
        assert field.q[1, 1] == pytest.approx(-0.25)

    def test_matches_finite_differences(self, tiny_critic):
        base = np.array([0.1, -0.2])
        s = np.array([0.3, -0.5, 0.8])
        field = q_action_gradient_field(tiny_critic, s, base, grid=5, low=-0.9, high=0.9)

        reference = finite_difference_field(tiny_critic, s, field, base)

        np.testing.assert_allclose(field.gradient, reference, atol=1e-6)

    def test_invalid_dims(self):
        with pytest.raises(ConfigurationError):
            q_action_gradient_field(QuadraticQ(), np.zeros(3), np.zeros(2), dims=(0, 0))
        with pytest.raises(ConfigurationError):
            q_action_gradient_field(QuadraticQ(), np.zeros(3), np.zeros(2), dims=(0, 2))

    def test_csv_header(self, tmp_path):
        path = tmp_path / "field.csv"
        q_action_gradient_field(QuadraticQ(), np.zeros(3), np.zeros(2), grid=3).to_csv(str(path))

        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))

        assert rows[0] == ["a0", "a1", "q", "dq_dx", "dq_dy"]
        assert len(rows) == 10
