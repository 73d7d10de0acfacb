import numpy as np
import pytest

from relu_landscape import model, optimize


class TestGradientDescent:
    def test_start_at_teacher(self):
        V = model.standard_teacher(3)
        rec = optimize.gradient_descent(V, V, optimize.GDConfig(0.1))
        assert rec.iterations == 0
        assert rec.converged

    def test_single_neuron_converges(self):
        V = model.standard_teacher(1, 3)
        rec = optimize.gradient_descent(np.array([[0.3, 0.4, -0.2]]), V,
                                        optimize.GDConfig(0.5, max_iters=50_000,
                                                          grad_norm_stop=1e-10))
        assert rec.converged
        np.testing.assert_allclose(rec.params, V, atol=1e-8)

    def test_monotone_with_small_steps(self):
        V = model.standard_teacher(3)
        W0 = optimize.xavier_init(3, 3, 3, seed=2)
        rec = optimize.gradient_descent(W0, V, optimize.GDConfig(0.1 / 6, max_iters=2000,
                                                                 log_stride=1))
        Fs = np.array([row[1] for row in rec.trajectory])
        assert np.all(np.diff(Fs) <= 1e-15)

    def test_max_iters(self):
        V = model.standard_teacher(2)
        rec = optimize.gradient_descent(np.array([[0.5, 0.5], [0.2, -0.1]]), V,
                                        optimize.GDConfig(0.01, max_iters=10))
        assert rec.termination == "max_iters"
        assert rec.iterations == 10

    def test_divergence_guard(self):
        V = model.standard_teacher(2)
        rec = optimize.gradient_descent(np.array([[0.5, 0.5], [0.2, -0.1]]), V,
                                        optimize.GDConfig(1e4, max_iters=100, log_stride=1))
        assert rec.termination in ("diverged", "non_differentiable")

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            optimize.GDConfig(0.0)


class TestInits:
    def test_xavier_statistics(self):
        W = optimize.xavier_init(400, 4, 50, seed=0)
        assert W.shape == (400, 50)
        assert W.mean() == pytest.approx(0.0, abs=0.01)
        assert W.var() == pytest.approx(1 / 50, rel=0.05)

    def test_xavier_deterministic(self):
        np.testing.assert_array_equal(optimize.xavier_init(3, 3, 3, 9),
                                      optimize.xavier_init(3, 3, 3, 9))

    def test_large_norm(self):
        W = optimize.large_norm_init(5, 5, 5, seed=1)
        assert np.linalg.norm(W, axis=1).sum() == pytest.approx(50.0)


class TestPerturbedGradientDescent:
    def test_zero_noise_equals_gd(self):
        V = model.standard_teacher(2)
        W0 = np.array([[0.6, 0.3], [0.2, 0.9]])
        gd = optimize.gradient_descent(W0, V, optimize.GDConfig(0.2, max_iters=50,
                                                               grad_norm_stop=1e-300))
        pgd = optimize.perturbed_gradient_descent(W0, V, optimize.PGDConfig(0.2, 0.0, 50))
        np.testing.assert_array_equal(gd.params, pgd.params)

    def test_deterministic(self):
        V = model.standard_teacher(2)
        W0 = np.array([[0.6, 0.3], [0.2, 0.9]])
        cfg = optimize.PGDConfig(0.1, 1e-2, 30, seed=5)
        a = optimize.perturbed_gradient_descent(W0, V, cfg)
        b = optimize.perturbed_gradient_descent(W0, V, cfg)
        np.testing.assert_array_equal(a.params, b.params)

    def test_shared_shift(self):
        # zero gradient: every neuron receives the same perturbation
        W0 = np.zeros((3, 4))
        rec = optimize.perturbed_gradient_descent(
            W0, None, optimize.PGDConfig(0.1, 1.0, 5, seed=1),
            grad_fn=np.zeros_like, objective_fn=lambda X: 0.0)
        assert np.ptp(rec.params, axis=0).max() == 0.0
        assert np.abs(rec.params).max() > 0


class TestRecipe:
    def test_values(self):
        r = optimize.pgd_recipe(0.4, 2.0, 0.1, 10)
        assert r.step_size == pytest.approx(0.5 * 0.4 * 0.01 / 256)
        assert r.noise_level == pytest.approx(0.1 / 40)
        rate = r.step_size * 0.4 * 0.01 / 64
        assert r.iters == pytest.approx(np.log(0.1) / np.log1p(-rate), rel=1e-9)

    def test_invalid(self):
        with pytest.raises(ValueError):
            optimize.pgd_recipe(0.0, 1.0, 0.1, 2)
        with pytest.raises(ValueError):
            optimize.pgd_recipe(1.0, 1.0, 0.1, 2, safety=1.0)
