import numpy as np
import pytest

from relu_landscape import model, probes
from relu_landscape.errors import InvalidParams


class TestNonconvexity:
    def test_frozen_exact_value(self):
        assert probes.nonconvexity_exact(0.5, 0.5, 0.1) == pytest.approx(-0.12606332126090722,
                                                                        rel=1e-12)

    def test_stated_form_differs_from_exact(self):
        # ratio (a1 + a2)(1 + eps) sqrt(1 + eps^2); see the decisions ledger
        a1, a2, eps = 0.3, 0.7, 0.1
        ratio = probes.nonconvexity_formula(a1, a2, eps) / probes.nonconvexity_exact(a1, a2, eps)
        assert ratio == pytest.approx((a1 + a2) * (1 + eps) * np.sqrt(1 + eps ** 2), rel=1e-12)

    @pytest.mark.parametrize("a1", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("eps", [1e-3, 1e-2, 1e-1])
    def test_hessian_matches_exact(self, a1, eps):
        w = probes.nonconvexity_witness(model.standard_teacher(3), a1, 1 - a1, eps)
        assert w.value < 0
        assert w.value == pytest.approx(w.exact_value, rel=1e-9)
        assert np.linalg.norm(w.point - w.base) <= 2 * eps

    def test_base_is_global_minimum(self):
        w = probes.nonconvexity_witness(model.standard_teacher(2), 0.4, 0.6, 0.01)
        assert model.objective(w.base, model.standard_teacher(2)) <= 1e-12

    def test_invalid(self):
        with pytest.raises(InvalidParams):
            probes.nonconvexity_witness(np.eye(2), 0.0, 1.0, 0.1)
        with pytest.raises(InvalidParams):
            probes.nonconvexity_witness(np.eye(2), 0.5, 0.5, 0.0)


class TestOPSC:
    def test_frozen_value(self):
        w = probes.opsc_witness(model.standard_teacher(2), 0.5, 0.5, 1e-3)
        assert w.normalized_form == pytest.approx(0.0012732361494419034, rel=1e-9)
        assert w.in_neighborhood

    def test_normalized_form_vanishes_linearly(self):
        eps = [1e-4, 1e-3, 1e-2]
        forms = [probes.opsc_witness(model.standard_teacher(2), 0.5, 0.5, e).normalized_form
                 for e in eps]
        assert probes.loglog_slope(eps, forms) == pytest.approx(1.0, abs=0.1)


class TestPL:
    def test_frozen_value(self):
        w = probes.pl_witness(model.standard_teacher(2), 0.5, 0.5, 0.01)
        assert w.F == pytest.approx(4.243792341984687e-07, rel=1e-9)

    def test_zero_eps_is_global_minimum(self):
        w = probes.pl_witness(model.standard_teacher(2), 0.5, 0.5, 0.0)
        assert w.F == pytest.approx(0.0, abs=1e-14)

    def test_ratio_vanishes(self):
        ratios = [probes.pl_witness(model.standard_teacher(2), 0.5, 0.5, e).pl_ratio
                  for e in (1e-1, 1e-2, 1e-3)]
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] < 1e-2


class TestSampling:
    base = probes.balanced_base(model.standard_teacher(3), 2)

    def test_deterministic(self):
        a = probes.sample_orthogonal_neighborhood(self.base, 0.1, seed=4)
        b = probes.sample_orthogonal_neighborhood(self.base, 0.1, seed=4)
        np.testing.assert_array_equal(a.deltas, b.deltas)

    def test_norms_clipped(self):
        p = probes.sample_orthogonal_neighborhood(self.base, 1e-3, variance=1.0, seed=1)
        assert np.linalg.norm(p.deltas, axis=1).max() <= 1e-3 * (1 + 1e-12)

    def test_orthogonal_projection(self):
        p = probes.sample_orthogonal_neighborhood(self.base, 0.1, seed=2, orthogonal=True)
        assert probes.in_orthogonal_neighborhood(p.point, self.base, 0.1)

    def test_adversarial_groups_sum_to_zero(self):
        p = probes.sample_orthogonal_neighborhood(self.base, 0.01, mode="adversarial", seed=3, m=2)
        np.testing.assert_allclose(p.deltas.reshape(3, 2, 3).sum(axis=1), 0, atol=1e-15)
        assert np.linalg.norm(p.deltas, axis=1).max() <= 0.01 * (1 + 1e-12)

    def test_adversarial_needs_group_size(self):
        with pytest.raises(InvalidParams):
            probes.sample_orthogonal_neighborhood(self.base, 0.1, mode="adversarial")

    def test_unknown_mode(self):
        with pytest.raises(InvalidParams):
            probes.sample_orthogonal_neighborhood(self.base, 0.1, mode="uniform")


def _orthogonal_deltas(V, m, eps, same=False, zero_sum=False):
    k, d = V.shape
    D = np.zeros((k * m, d))
    for i in range(k):
        for j in range(m):
            o = (i + 1 + (0 if same else j)) % d
            D[i * m + j, o] = eps
        if zero_sum:
            D[i * m:(i + 1) * m] -= D[i * m:(i + 1) * m].mean(axis=0)
    return D


class TestCurvatureBreakdown:
    V = model.standard_teacher(3, 4)

    def _bd(self, m, D):
        base = probes.balanced_base(self.V, m)
        return probes.curvature_breakdown(self.V, m, probes.OrthogonalPerturbation(base, D, 1e-3))

    def test_single_student(self):
        bd = self._bd(1, _orthogonal_deltas(self.V, 1, 1e-3))
        assert bd.lhs / bd.group_norms.sum() >= 0.25

    @pytest.mark.parametrize("m", [2, 3])
    def test_identical_deltas(self, m):
        bd = self._bd(m, _orthogonal_deltas(self.V, m, 1e-3, same=True))
        assert bd.normalized_lhs >= 0.9 * m * (0.25 - 1 / (2 * np.pi))
        assert bd.margin > 0

    def test_zero_group_sums(self):
        bd = self._bd(2, _orthogonal_deltas(self.V, 2, 1e-3, zero_sum=True))
        np.testing.assert_allclose(bd.group_norms, 0, atol=1e-30)
        assert abs(bd.normalized_lhs) < 1e-2

    def test_unbalanced_base_rejected(self):
        base = probes.balanced_base(self.V, 2)
        base[0] *= 1.5
        base[1] *= 0.5
        with pytest.raises(InvalidParams):
            probes.curvature_breakdown(self.V, 2, probes.OrthogonalPerturbation(base, 0 * base, 1e-3))

    def test_wrong_shape(self):
        with pytest.raises(InvalidParams):
            base = probes.balanced_base(self.V, 2)
            probes.curvature_breakdown(self.V, 3, probes.OrthogonalPerturbation(base, 0 * base, 1e-3))
