"""
Testes Unitários para o núcleo de diferenciação reversa
Forward/backward, normalizações, tapes antigos e verificação por diferenças centrais.
"""

import numpy as np
import pytest

from core.autodiff import LayerSpec, MlpParams, TapeGradients, backward, build_layers, forward, init_mlp
from core.errors import ConfigurationError, StaleTapeError
from core.gradcheck import finite_difference, gradient_check, relative_error


def _scalar_objective(params: MlpParams, x: np.ndarray, upstream: np.ndarray, mode: str = "train"):
    out, tape = forward(params, x, mode, update_stats=False)
    return float(np.sum(out * upstream)), backward(tape, upstream)


class TestMlpParams:
    """Testes de estrutura dos parâmetros."""

    def test_expected_shapes(self):
        params = init_mlp(build_layers([4, 5, 3], "tanh", hidden_norm="layer_norm"), np.random.default_rng(0))

        assert params.tensors["W0"].shape == (5, 4)
        assert params.tensors["b0"].shape == (5,)
        assert params.tensors["g0"].shape == (5,)
        assert "g1" not in params.tensors
        assert params.num_parameters() == 5 * 4 + 5 + 5 + 5 + 3 * 5 + 3

    def test_incompatible_layers_rejected(self):
        layers = [LayerSpec(3, 4, "relu"), LayerSpec(5, 1)]

        with pytest.raises(ConfigurationError):
            init_mlp(layers, np.random.default_rng(0))

    def test_unknown_activation_rejected(self):
        with pytest.raises(ConfigurationError):
            LayerSpec(2, 2, activation="gelu")

    def test_copy_is_independent(self):
        params = init_mlp(build_layers([2, 3, 1], "relu"), np.random.default_rng(0))
        clone = params.copy()
        clone.tensors["W0"] += 1.0

        assert not np.allclose(params.tensors["W0"], clone.tensors["W0"])

    def test_batch_norm_running_stats_initialized(self):
        params = init_mlp(build_layers([2, 3, 1], "relu", hidden_norm="batch_norm"), np.random.default_rng(0))

        np.testing.assert_array_equal(params.running_mean[0], np.zeros(3))
        np.testing.assert_array_equal(params.running_var[0], np.ones(3))


class TestForward:
    """Testes do forward."""

    def test_vector_input_keeps_rank(self):
        params = init_mlp(build_layers([3, 4, 2], "tanh"), np.random.default_rng(0))
        out, _ = forward(params, np.ones(3))

        assert out.shape == (2,)

    def test_batch_matches_rows(self):
        params = init_mlp(build_layers([3, 4, 2], "tanh"), np.random.default_rng(0))
        x = np.random.default_rng(1).normal(size=(5, 3))
        batch, _ = forward(params, x)

        for i in range(5):
            single, _ = forward(params, x[i])
            np.testing.assert_allclose(batch[i], single, atol=1e-14)

    def test_wrong_width_rejected(self):
        params = init_mlp(build_layers([3, 2], "tanh"), np.random.default_rng(0))

        with pytest.raises(ConfigurationError):
            forward(params, np.ones((2, 4)))

    def test_batch_norm_train_updates_running_stats(self):
        params = init_mlp(build_layers([2, 3, 1], "relu", hidden_norm="batch_norm"), np.random.default_rng(0))
        x = np.random.default_rng(1).normal(size=(8, 2))

        forward(params, x, "train", update_stats=False)
        np.testing.assert_array_equal(params.running_mean[0], np.zeros(3))

        forward(params, x, "train", update_stats=True)
        assert not np.allclose(params.running_mean[0], 0.0)

    def test_batch_norm_train_requires_two_rows(self):
        params = init_mlp(build_layers([2, 3, 1], "relu", hidden_norm="batch_norm"), np.random.default_rng(0))

        with pytest.raises(ConfigurationError):
            forward(params, np.ones((1, 2)), "train")

    def test_unknown_mode_rejected(self):
        params = init_mlp(build_layers([2, 1], "relu"), np.random.default_rng(0))

        with pytest.raises(ConfigurationError):
            forward(params, np.ones(2), "predict")


class TestBackward:
    """Gradientes exatos contra diferenças centrais."""

    @pytest.mark.parametrize("norm", ["none", "layer_norm", "batch_norm"])
    @pytest.mark.parametrize("activation", ["tanh", "relu"])
    def test_parameter_gradients_match_finite_differences(self, norm, activation):
        gen = np.random.default_rng(7)
        params = init_mlp(build_layers([3, 6, 5, 2], activation, hidden_norm=norm), gen)
        x = gen.normal(size=(6, 3))
        upstream = gen.normal(size=(6, 2))

        error = gradient_check(lambda p: _scalar_objective(p, x, upstream), params)

        assert error < 1e-4

    def test_input_gradient_matches_finite_differences(self):
        gen = np.random.default_rng(3)
        params = init_mlp(build_layers([4, 7, 1], "tanh", hidden_norm="layer_norm"), gen)
        x = gen.normal(size=(3, 4))
        upstream = gen.normal(size=(3, 1))
        _, tape = forward(params, x)
        analytic = backward(tape, upstream).input_grad

        numeric = finite_difference(lambda z: float(np.sum(forward(params, z)[0] * upstream)), x)

        assert relative_error(analytic, numeric) < 1e-6

    def test_hidden_upstream_adds_feature_gradient(self):
        gen = np.random.default_rng(4)
        params = init_mlp(build_layers([3, 5, 4, 1], "tanh"), gen)
        x = gen.normal(size=(4, 3))
        dphi = gen.normal(size=(4, 4))

        def objective(p):
            out, tape = forward(p, x)
            value = float(np.sum(out)) + float(np.sum(tape.hidden(1) * dphi))
            return value, backward(tape, np.ones_like(out), {1: dphi})

        assert gradient_check(objective, params) < 1e-4

    def test_stale_tape_rejected(self):
        params = init_mlp(build_layers([2, 3, 1], "relu"), np.random.default_rng(0))
        out, tape = forward(params, np.ones((2, 2)))
        params.mark_modified()

        with pytest.raises(StaleTapeError):
            backward(tape, np.ones_like(out))

    def test_upstream_shape_checked(self):
        params = init_mlp(build_layers([2, 3, 1], "relu"), np.random.default_rng(0))
        _, tape = forward(params, np.ones((2, 2)))

        with pytest.raises(ConfigurationError):
            backward(tape, np.ones((3, 1)))

    def test_gradients_congruent_with_parameters(self):
        params = init_mlp(build_layers([2, 3, 1], "relu", hidden_norm="layer_norm"), np.random.default_rng(0))
        out, tape = forward(params, np.ones((2, 2)))
        grads = backward(tape, np.ones_like(out))

        assert list(grads.tensors) == params.names()
        for name, g in grads.tensors.items():
            assert g.shape == params.tensors[name].shape


class TestTapeGradients:

    def test_add_and_scale(self):
        a = TapeGradients({"W0": np.ones((2, 2))})
        b = TapeGradients({"W0": 2.0 * np.ones((2, 2))})

        np.testing.assert_array_equal((a + b).scaled(0.5).tensors["W0"], 1.5 * np.ones((2, 2)))

    def test_is_finite(self):
        assert not TapeGradients({"W0": np.array([np.nan])}).is_finite()
