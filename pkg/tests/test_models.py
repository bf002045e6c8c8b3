import numpy as np
import pytest

from hyperlab import models
from hyperlab.errors import (ConfigError, MissingEntropyPair, NonHyperbolic,
                             OutOfDomain)
from hyperlab.models import (GENUINELY_NONLINEAR, LINEARLY_DEGENERATE,
                             NEITHER, classify_field, eigensystem,
                             entropy_compatibility_residual, model_from_name,
                             normalize_speeds)


def sample_box(lo, hi, k=7):
    axes = [np.linspace(a, b, k) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


class TestEigensystem:
    def test_psystem_speeds_at_unit_volume(self):
        m = models.p_system(k=1.0, gamma=2.0)
        es = eigensystem(m, [1.0, 0.0])
        assert es.lambdas == pytest.approx([-np.sqrt(2.0), np.sqrt(2.0)], abs=1e-12)

    def test_scalar_burgers(self):
        m = models.burgers()
        es = eigensystem(m, [3.0])
        assert es.lambdas[0] == 3.0
        assert es.right[0, 0] == 1.0 and es.left[0, 0] == 1.0

    def test_diagonal_linear_system(self):
        m = models.linear_system(1, 0, 0, 2)
        es = eigensystem(m, [0.3, -0.7])
        assert es.lambdas == pytest.approx([1.0, 2.0])
        assert es.right == pytest.approx(np.eye(2))

    @pytest.mark.parametrize("u", [[0.5, 0.0], [1.0, 0.3], [2.0, -0.4]])
    def test_normalization_and_duality(self, u):
        m = models.p_system()
        es = eigensystem(m, u)
        A = m.jac(u)
        for i in range(2):
            assert np.linalg.norm(es.right[i]) == pytest.approx(1.0, abs=models.TOL_EIG)
            assert np.linalg.norm(A @ es.right[i] - es.lambdas[i] * es.right[i]) < models.TOL_EIG
            assert np.linalg.norm(es.left[i] @ A - es.lambdas[i] * es.left[i]) < models.TOL_EIG
        assert es.left @ es.right.T == pytest.approx(np.eye(2), abs=models.TOL_EIG)

    def test_strict_hyperbolicity_gap(self):
        m = models.p_system()
        for u in sample_box([0.3, -0.5], [2.0, 0.5], k=5):
            lam = eigensystem(m, u).lambdas
            assert lam[1] - lam[0] > models.TOL_GAP

    def test_rotation_matrix_is_rejected(self):
        m = models.linear_system(0, 1, -1, 0)
        with pytest.raises(NonHyperbolic):
            eigensystem(m, [0.0, 0.0])

    def test_coincident_eigenvalues_rejected(self):
        m = models.linear_system(1, 0, 0, 1)
        with pytest.raises(NonHyperbolic):
            eigensystem(m, [0.0, 0.0])

    def test_out_of_domain(self):
        m = models.p_system()
        with pytest.raises(OutOfDomain):
            eigensystem(m, [-1.0, 0.0])


class TestClassifyField:
    def test_psystem_both_families_gnl(self):
        m = models.p_system()
        samples = sample_box([0.5, -0.5], [2.0, 0.5], k=4)
        for i in range(2):
            fc = classify_field(m, i, samples)
            assert fc.tag == GENUINELY_NONLINEAR

    def test_psystem_orientations_are_consistent(self):
        # oriented indicator must be positive for both families
        m = models.p_system()
        samples = sample_box([0.5, -0.5], [2.0, 0.5], k=3)
        for i in range(2):
            fc = classify_field(m, i, samples)
            g = fc.orientation * np.array(
                [models.gnl_indicator(m, i, u) for u in samples])
            assert np.all(g > 0)

    def test_advection_linearly_degenerate(self):
        m = models.advection(0.7)
        fc = classify_field(m, 0, np.linspace(-1, 1, 9)[:, None])
        assert fc.tag == LINEARLY_DEGENERATE

    def test_cubic_neither(self):
        m = models.cubic_flux()
        samples = np.linspace(-1, 1, 9)[:, None]
        fc = classify_field(m, 0, samples)
        assert fc.tag == NEITHER
        # indicator is 6u at the samples
        assert fc.g_min == pytest.approx(-6.0, rel=1e-4)
        assert fc.g_max == pytest.approx(6.0, rel=1e-4)


class TestEntropyPairs:
    def test_burgers_pair_compatible(self):
        m = models.burgers()
        res = entropy_compatibility_residual(m, np.linspace(-2, 2, 21)[:, None])
        assert res <= 1e-8

    def test_psystem_pair_compatible(self):
        m = models.p_system()
        res = entropy_compatibility_residual(m, sample_box([0.5, -0.5], [2.0, 0.5], k=5))
        assert res <= 1e-6

    def test_wrong_entropy_flux_detected(self):
        m = models.burgers()
        bad = models.FluxModel(
            name="burgers-bad-q", n=1, flux=m.flux, jacobian=m.jacobian,
            entropy=m.entropy, entropy_flux=lambda u: np.asarray(u)[..., 0] ** 3)
        res = entropy_compatibility_residual(bad, [np.array([1.0])])
        assert res == pytest.approx(1.0, abs=1e-6)

    def test_missing_pair_raises(self):
        with pytest.raises(MissingEntropyPair):
            entropy_compatibility_residual(models.cubic_flux(), [np.array([0.0])])

    def test_declared_convex_entropies_have_pd_hessian(self):
        for m, pts in [(models.burgers(), np.linspace(-2, 2, 5)[:, None]),
                       (models.p_system(), sample_box([0.5, -0.5], [2.0, 0.5], k=3))]:
            assert m.entropy_convex
            for u in pts:
                H = m.entropy_hessian(u)
                assert np.all(np.linalg.eigvalsh(H) > 0)


class TestNormalizeSpeeds:
    def test_endpoint_and_midpoint_maps(self):
        # lambda = +-M map to the target endpoints, 0 to the midpoint
        m = models.advection(1.0)
        t = normalize_speeds(m, M=1.0)
        assert models.eigenvalues(t, [0.0])[0] == pytest.approx(1.0)
        m = models.advection(-1.0)
        t = normalize_speeds(m, M=1.0)
        assert models.eigenvalues(t, [0.0])[0] == pytest.approx(0.0)
        m = models.advection(0.0)
        t = normalize_speeds(m, M=1.0)
        assert models.eigenvalues(t, [0.0])[0] == pytest.approx(0.5)

    def test_burgers_transformed_flux_and_speeds(self):
        m = normalize_speeds(models.burgers(), M=1.0)
        for u in np.linspace(-1, 1, 11):
            assert m.f(np.array([u]))[0] == pytest.approx((u * u / 2 + u) / 2)
            assert models.eigenvalues(m, [u])[0] == pytest.approx((u + 1) / 2)

    def test_target_interval_one_two(self):
        m = normalize_speeds(models.burgers(), M=1.0, target=(1.0, 2.0))
        lam = [models.eigenvalues(m, [u])[0] for u in np.linspace(-1, 1, 11)]
        assert min(lam) == pytest.approx(1.0) and max(lam) == pytest.approx(2.0)

    def test_shocks_map_to_shocks(self):
        # rh residual vanishes for the mapped triple (u-, u+, (lam+M)/(2M))
        from hyperlab.riemann import rh_residual
        m = models.burgers()
        t = normalize_speeds(m, M=1.0)
        u_minus, u_plus, lam = np.array([1.0]), np.array([0.0]), 0.5
        assert rh_residual(m, u_minus, u_plus, lam) < 1e-14
        assert rh_residual(t, u_minus, u_plus, (lam + 1.0) / 2.0) < 1e-14

    def test_entropy_pair_transforms_consistently(self):
        t = normalize_speeds(models.p_system(), M=3.0)
        res = entropy_compatibility_residual(t, sample_box([0.5, -0.5], [2.0, 0.5], k=4))
        assert res <= 1e-6

    def test_speed_bound_violation(self):
        from hyperlab.errors import SpeedBoundViolated
        with pytest.raises(SpeedBoundViolated):
            normalize_speeds(models.burgers(), M=0.5,
                             check_states=[np.array([1.0])])


class TestRegistry:
    @pytest.mark.parametrize("name,n", [
        ("burgers", 1), ("cubic", 1), ("advection:2", 1),
        ("psystem:1,2", 2), ("linear2:1,0,0,2", 2)])
    def test_round_trip(self, name, n):
        m = model_from_name(name)
        assert m.n == n

    def test_unknown_model(self):
        with pytest.raises(ConfigError):
            model_from_name("kdv")

    def test_bad_arguments(self):
        with pytest.raises(ConfigError):
            model_from_name("linear2:1,2")
