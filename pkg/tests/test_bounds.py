import numpy as np
import pytest

from qrlev.angles import PrincipalAngles, principal_angles
from qrlev.bounds import (
    HypothesisError,
    bound_c1,
    bound_t1,
    bound_t2,
    bound_t3_1,
    bound_t3_2,
    bound_t3_3,
    bound_t3_4,
    delta_q_first_order,
    first_order_policy_ok,
    qr_q_difference,
    rdot_rinv,
    sandwich_holds,
)
from qrlev.generate import gaussian_matrix, random_orthonormal, randsvd_matrix
from qrlev.leverage import MatrixStats, leverage_from_basis, matrix_stats
from qrlev.linalg import householder_qr, project_complement, solve_upper
from qrlev.perturb import PerturbationMetrics, measure, normwise_perturbation


def angles_of(sin_max, cos_min=1.0, n=3):
    cosines = np.full(n, cos_min)
    sines = np.full(n, sin_max)
    return PrincipalAngles(cosines=cosines, sines=sines)


def metrics_of(eps_two=0.0, eps_fro=0.0, eps_two_perp=0.0, eps_fro_perp=0.0,
               eps_row=None, eps_row_perp=None, m=4):
    zero = np.zeros(m)
    return PerturbationMetrics(
        eps_two=eps_two,
        eps_fro=eps_fro,
        eps_two_perp=eps_two_perp,
        eps_fro_perp=eps_fro_perp,
        eps_row=zero if eps_row is None else np.asarray(eps_row, float),
        eps_row_perp=zero if eps_row_perp is None else np.asarray(eps_row_perp, float),
    )


def stats_of(kappa2=1.0, stable_rank=25.0):
    return MatrixStats(
        kappa2=kappa2,
        stable_rank=stable_rank,
        two_norm=1.0,
        frobenius_norm=np.sqrt(stable_rank),
        sigma_min=1.0 / kappa2,
    )


class TestBoundT1:
    def test_zero_angle_zero_bound(self):
        lev = np.array([0.1, 0.5, 0.9])
        report = bound_t1(lev, angles_of(0.0))
        np.testing.assert_array_equal(report.per_index_bound, 0.0)

    def test_endpoint_scores(self):
        report = bound_t1(np.array([0.0, 1.0]), angles_of(1e-3))
        np.testing.assert_allclose(report.per_index_bound, 1e-6, rtol=1e-12)

    def test_sandwich_present_only_for_m_2n(self):
        lev6 = np.full(6, 0.5)
        assert bound_t1(lev6, angles_of(0.1, n=3)).lower is not None
        lev7 = np.full(7, 0.5)
        assert bound_t1(lev7, angles_of(0.1, n=3)).lower is None

    def test_complement_forces_flip(self):
        rng = np.random.default_rng(2)
        q = random_orthonormal(10, 5, rng)
        comp = householder_qr(
            project_complement(q, gaussian_matrix(10, 5, rng))
        ).q
        lev = leverage_from_basis(q)
        lev_tilde = leverage_from_basis(comp)
        report = bound_t1(lev, principal_angles(q, comp))
        np.testing.assert_allclose(report.lower, 1.0 - lev, atol=1e-12)
        np.testing.assert_allclose(report.upper, 1.0 - lev, atol=1e-12)
        assert sandwich_holds(report, lev_tilde).all()

    def test_holds_with_observed(self):
        lev = np.array([0.2, 0.8])
        report = bound_t1(lev, angles_of(1e-4), observed=np.array([1e-9, 1e-9]))
        assert report.holds.all()


class TestBoundC1:
    def test_full_score(self):
        report = bound_c1(np.array([1.0]), angles_of(1e-4))
        np.testing.assert_allclose(report.per_index_bound, [1e-8], rtol=1e-12)

    def test_frozen_small_score_case(self):
        report = bound_c1(np.array([1e-10]), angles_of(1e-8, cos_min=1.0))
        assert report.per_index_bound[0] == pytest.approx(2.001e-3, rel=1e-3)

    def test_zero_score_flagged(self):
        report = bound_c1(np.array([0.0, 0.5]), angles_of(1e-4))
        assert np.isnan(report.per_index_bound[0])
        assert np.isfinite(report.per_index_bound[1])

    def test_covers_rotation_experiment(self):
        rng = np.random.default_rng(3)
        q = random_orthonormal(120, 6, rng)
        from qrlev.perturb import rotation_perturbation

        q_tilde = rotation_perturbation(q, 1e-5, rng)
        lev = leverage_from_basis(q)
        rel = np.abs(leverage_from_basis(q_tilde) - lev) / lev
        report = bound_c1(lev, principal_angles(q, q_tilde), observed=rel)
        assert report.holds.all()


class TestBoundT2:
    def test_projected_zero_for_range_preserving(self):
        a = random_orthonormal(30, 4, 2)
        delta = a @ (1e-3 * gaussian_matrix(4, 4, 3))
        metrics = measure(a, delta)
        projected, general = bound_t2(
            leverage_from_basis(a), matrix_stats(a), metrics
        )
        assert np.all(projected.per_index_bound <= 1e-12)
        assert np.all(general.per_index_bound > 0)

    def test_full_score_unit_kappa(self):
        projected, general = bound_t2(
            np.array([1.0]), stats_of(), metrics_of(eps_two=1e-8, m=1)
        )
        assert general.per_index_bound[0] == pytest.approx(1e-16, rel=1e-12)

    def test_hypothesis_enforced(self):
        with pytest.raises(HypothesisError, match="T2"):
            bound_t2(np.array([0.5]), stats_of(kappa2=100.0),
                     metrics_of(eps_two=0.02, m=1))


class TestBoundT31:
    def test_zero_perturbation(self):
        report = bound_t3_1(np.array([0.5]), stats_of(), metrics_of(m=1))
        np.testing.assert_array_equal(report.per_index_bound, 0.0)

    def test_frozen_direct_substitution(self):
        report = bound_t3_1(
            np.array([0.5]), stats_of(kappa2=1.0, stable_rank=25.0),
            metrics_of(eps_fro=1e-8, m=1),
        )
        assert report.per_index_bound[0] == pytest.approx(6.0000018e-7, rel=1e-9)

    def test_hypothesis_enforced(self):
        with pytest.raises(HypothesisError, match="T3_1"):
            bound_t3_1(np.array([0.5]), stats_of(kappa2=1e6),
                       metrics_of(eps_two=1e-3, eps_fro=1e-3, m=1))


class TestBoundT32:
    def test_zero(self):
        report = bound_t3_2(stats_of(), metrics_of(m=3))
        np.testing.assert_array_equal(report.per_index_bound, 0.0)

    def test_unperturbed_row_gets_global_term(self):
        report = bound_t3_2(
            stats_of(stable_rank=25.0),
            metrics_of(eps_fro=1e-8, eps_row=[0.0, 1e-7], m=2),
        )
        global_term = 2 * np.sqrt(2.0) * 5.0 * 1e-8
        assert report.per_index_bound[0] == pytest.approx(global_term, rel=1e-12)
        assert report.per_index_bound[1] == pytest.approx(
            2e-7 + global_term, rel=1e-12
        )

    def test_hypothesis_strict(self):
        with pytest.raises(HypothesisError, match="T3_2"):
            bound_t3_2(stats_of(kappa2=10.0), metrics_of(eps_two=0.1, m=1))


class TestBoundT33:
    def test_half_substitution_matches_t3_2(self):
        eps_row = np.array([1e-8, 3e-8, 0.0])
        m2 = metrics_of(eps_fro=1e-8, eps_row=eps_row, m=3)
        m3 = metrics_of(
            eps_fro_perp=0.5e-8, eps_row_perp=eps_row / 2, m=3
        )
        r2 = bound_t3_2(stats_of(), m2)
        r3 = bound_t3_3(stats_of(), m3)
        np.testing.assert_allclose(
            r3.per_index_bound, r2.per_index_bound, rtol=1e-14
        )

    def test_counterexample_row_dominates(self):
        # Row with eps_row 0 but eps_row_perp 1: the projected bound's
        # local term exceeds the unprojected bound's local term there.
        m2 = metrics_of(eps_fro=0.5, eps_row=[0.0], m=1, eps_two=1e-4)
        m3 = metrics_of(eps_fro_perp=0.5, eps_row_perp=[1.0], m=1, eps_two=1e-4)
        r2 = bound_t3_2(stats_of(), m2)
        r3 = bound_t3_3(stats_of(), m3)
        assert r3.per_index_bound[0] > r2.per_index_bound[0]

    def test_range_preserving_vanishes(self):
        a = random_orthonormal(30, 4, 5)
        delta = a @ (1e-4 * gaussian_matrix(4, 4, 6))
        report = bound_t3_3(matrix_stats(a), measure(a, delta))
        assert np.all(report.per_index_bound <= 1e-12)


class TestBoundT34:
    def test_zero(self):
        report = bound_t3_4(np.zeros(4), 25)
        np.testing.assert_array_equal(report.per_index_bound, 0.0)

    def test_frozen_uniform_eta(self):
        report = bound_t3_4(np.full(3, 1e-8), 25)
        np.testing.assert_allclose(
            report.per_index_bound, 7.271067811865476e-7, rtol=1e-12
        )

    def test_kappa_independence(self):
        eta = np.full(5, 1e-8)
        b1 = bound_t3_4(eta, 25, kappa2=1.0)
        b2 = bound_t3_4(eta, 25, kappa2=1e5)
        np.testing.assert_array_equal(b1.per_index_bound, b2.per_index_bound)

    def test_hypothesis(self):
        with pytest.raises(HypothesisError, match="T3_4"):
            bound_t3_4(np.full(3, 1e-3), 25, kappa2=1e4)

    def test_negative_eta_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            bound_t3_4(np.array([-1e-8]), 25)


def test_monotone_in_perturbation_magnitude():
    lev = np.array([1e-6, 0.03, 0.4, 0.97])
    for x in (1e-9, 1e-6):
        lo, hi = angles_of(x), angles_of(2 * x)
        assert np.all(
            bound_t1(lev, hi).per_index_bound
            >= bound_t1(lev, lo).per_index_bound
        )
        assert np.all(
            bound_c1(lev, hi).per_index_bound
            >= bound_c1(lev, lo).per_index_bound
        )
        stats = stats_of(kappa2=5.0)
        for maker in (
            lambda s: metrics_of(eps_two=s, eps_two_perp=s / 3, m=4),
            lambda s: metrics_of(eps_two=s, eps_two_perp=s, m=4),
        ):
            p_lo, g_lo = bound_t2(lev, stats, maker(x))
            p_hi, g_hi = bound_t2(lev, stats, maker(2 * x))
            assert np.all(p_hi.per_index_bound >= p_lo.per_index_bound)
            assert np.all(g_hi.per_index_bound >= g_lo.per_index_bound)
        assert np.all(
            bound_t3_1(lev, stats, metrics_of(eps_fro=2 * x, m=4)).per_index_bound
            >= bound_t3_1(lev, stats, metrics_of(eps_fro=x, m=4)).per_index_bound
        )
        assert np.all(
            bound_t3_2(stats, metrics_of(eps_fro=2 * x, eps_row=[2 * x] * 4, m=4)).per_index_bound
            >= bound_t3_2(stats, metrics_of(eps_fro=x, eps_row=[x] * 4, m=4)).per_index_bound
        )
        assert np.all(
            bound_t3_3(stats, metrics_of(eps_fro_perp=2 * x, eps_row_perp=[2 * x] * 4, m=4)).per_index_bound
            >= bound_t3_3(stats, metrics_of(eps_fro_perp=x, eps_row_perp=[x] * 4, m=4)).per_index_bound
        )
        assert np.all(
            bound_t3_4(np.full(4, 2 * x), 25).per_index_bound
            >= bound_t3_4(np.full(4, x), 25).per_index_bound
        )


def test_first_order_policy():
    # Bound is ~7.27e-7 everywhere; the policy allows 1 percent of
    # indices above it as long as nothing exceeds ten times it.
    eta = np.full(100, 1e-8)
    report = bound_t3_4(eta, 25, observed=np.full(100, 1e-9))
    assert first_order_policy_ok(report)
    assert report.holds.all()

    one_outlier = np.full(100, 1e-9)
    one_outlier[0] = 5e-6  # above bound, below the 10x cap
    report = bound_t3_4(eta, 25, observed=one_outlier)
    assert not report.holds[0]
    assert first_order_policy_ok(report)

    two_outliers = one_outlier.copy()
    two_outliers[1] = 1e-6
    report = bound_t3_4(eta, 25, observed=two_outliers)
    assert not first_order_policy_ok(report)

    capped_out = np.full(100, 1e-9)
    capped_out[0] = 8e-6  # beyond ten times the bound
    report = bound_t3_4(eta, 25, observed=capped_out)
    assert not first_order_policy_ok(report)


class TestRdotRinv:
    def test_identity_direction(self):
        # delta equal to the matrix itself: q.T delta r**-1 is the
        # identity, eps_f is 1, and the result is the identity.
        a = gaussian_matrix(12, 4, 3)
        rr = rdot_rinv(a, a)
        np.testing.assert_allclose(rr.matrix, np.eye(4), atol=1e-12)

    def test_symmetric_part_identity(self):
        a = gaussian_matrix(15, 5, 4)
        delta = 1e-4 * gaussian_matrix(15, 5, 5)
        rr = rdot_rinv(a, delta)
        q, r = householder_qr(a)
        eps_f = np.linalg.norm(delta) / np.linalg.norm(a)
        c = solve_upper(r, (q.T @ delta).T, transpose=True).T
        np.testing.assert_allclose(
            rr.matrix + rr.matrix.T, (c + c.T) / eps_f, atol=1e-10
        )

    def test_strictly_lower_exactly_zero(self):
        a = gaussian_matrix(10, 4, 6)
        rr = rdot_rinv(a, gaussian_matrix(10, 4, 7))
        assert np.array_equal(np.tril(rr.matrix, -1), np.zeros((4, 4)))

    def test_norm_bound(self):
        rng = np.random.default_rng(91)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(n, 50))
            a = randsvd_matrix(m, n, 10.0 ** rng.uniform(0, 3), rng)
            delta = 1e-5 * np.linalg.norm(a) * rng.standard_normal((m, n))
            rr = rdot_rinv(a, delta)
            stats = matrix_stats(a)
            limit = np.sqrt(2.0 * stats.stable_rank) * stats.kappa2
            assert rr.fro_norm <= limit * (1.0 + 1e-10)

    def test_finite_difference_convergence(self):
        a = randsvd_matrix(20, 5, 10.0, 8)
        direction = gaussian_matrix(20, 5, 9)
        direction *= np.linalg.norm(a) / np.linalg.norm(direction)
        formula = rdot_rinv(a, direction).matrix  # eps_f == 1
        r0 = householder_qr(a).r

        def fd_err(t):
            rt = householder_qr(a + t * direction).r
            fd = solve_upper(r0, ((rt - r0) / t).T, transpose=True).T
            return np.linalg.norm(fd - formula)

        order = np.log10(fd_err(1e-4) / fd_err(1e-5))
        assert order >= 0.9

    def test_zero_delta_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            rdot_rinv(np.eye(3), np.zeros((3, 3)))


class TestDeltaQFirstOrder:
    def test_zero_delta(self):
        np.testing.assert_array_equal(
            delta_q_first_order(np.eye(4), np.zeros((4, 4))), np.zeros((4, 4))
        )

    def test_quadratic_decay(self):
        a = randsvd_matrix(60, 12, 50.0, 13)
        direction = gaussian_matrix(60, 12, 14)
        direction *= np.linalg.norm(a) / np.linalg.norm(direction)

        def residual(eps):
            delta = eps * direction
            return np.linalg.norm(
                qr_q_difference(a, delta) - delta_q_first_order(a, delta)
            )

        ratio = residual(1e-4) / residual(1e-5)
        assert 30.0 <= ratio <= 300.0

    def test_row_bound_chaining(self):
        # Row norms of the prediction obey the scaled local+global bound.
        a = randsvd_matrix(40, 6, 20.0, 15)
        delta = normwise_perturbation(a, 1e-8, "fro", 16)
        pred = delta_q_first_order(a, delta)
        lev = leverage_from_basis(householder_qr(a).q)
        stats = matrix_stats(a)
        metrics = measure(a, delta)
        rows_pred = np.linalg.norm(pred, axis=1)
        limit = np.sqrt(lev) * (
            metrics.eps_row + np.sqrt(2 * stats.stable_rank) * metrics.eps_fro
        ) * stats.kappa2
        assert np.all(rows_pred <= limit * (1.0 + 1e-10) + 1e-15)

    def test_hypothesis_violation(self):
        a = randsvd_matrix(10, 3, 100.0, 17)
        with pytest.raises(HypothesisError, match="first-order"):
            delta_q_first_order(a, 10.0 * a)
