import math

import numpy as np
import pytest

from corrupt_recover.certificate import (
    CardinalityError,
    build_dual_vector,
    build_reduced_solution,
    build_reduced_system,
    check_recovery_conditions,
    check_reduced_norm_condition,
    check_support_matrix_rank,
    detect_support,
    format_report,
    sparse_projection_norm,
    support_uncertainty,
    threshold_half,
    verify_dual_certificate,
)
from corrupt_recover.fourier import dft
from corrupt_recover.problem import SyntheticConfig, generate_synthetic, random_instance
from corrupt_recover.solver import SolverConfig, solve


def test_detect_support_relative_threshold():
    v = np.array([1.0, 1e-12, 0.0, -2.0])
    np.testing.assert_array_equal(detect_support(v, 1e-9), [0, 3])
    assert detect_support(np.zeros(3), 1e-9).size == 0


# ---------------------------------------------------------------------------
# verification route


def test_ground_truth_is_certified():
    inst = random_instance(n=17, m=12, k_x=1, k_f=1, seed=4)
    cert = verify_dual_certificate(inst, inst.x0, inst.f0)
    assert cert.passed
    assert cert.margin > 1e-6
    assert cert.feas_residual == 0.0
    assert cert.eq_residual <= 1e-10
    assert cert.rank.full_rank
    # the dual vector honours the fixed corruption signs
    np.testing.assert_allclose(cert.h[inst.s_f], inst.sigma_f, atol=1e-12)


def test_unitary_case_dual_vector_is_explicit():
    # with m = n and no corruption the least-norm completion is simply
    # the transform of the support signs
    inst = random_instance(n=16, m=16, k_x=3, k_f=0, seed=2)
    cert = verify_dual_certificate(inst, inst.x0, inst.f0)
    assert cert.passed
    expected = inst.operator.dense()[:, inst.s_x] @ inst.sigma_x
    np.testing.assert_allclose(cert.h, expected, atol=1e-10)


def test_infeasible_candidate_is_rejected():
    inst = random_instance(n=17, m=12, k_x=1, k_f=1, seed=4)
    bad = inst.x0.copy()
    bad[inst.s_x[0]] *= -1.0  # sign flip breaks the measurement coupling
    cert = verify_dual_certificate(inst, bad, inst.f0)
    assert not cert.passed
    assert cert.reason == "candidate is infeasible"
    assert cert.feas_residual > 1e-6


def test_feasible_but_suboptimal_candidate_is_rejected():
    # (0, b) always satisfies the constraint yet is not l1-minimal here
    inst = random_instance(n=31, m=24, k_x=2, k_f=3, seed=1)
    cert = verify_dual_certificate(inst, np.zeros(31), inst.b)
    assert cert.feas_residual == 0.0
    assert not cert.passed
    assert cert.margin_signal < 0


def test_oversized_supports_are_rejected():
    inst = random_instance(n=11, m=5, k_x=3, k_f=3, seed=0)
    cert = verify_dual_certificate(inst, inst.x0, inst.f0)
    assert not cert.passed
    assert cert.reason == "supports exceed measurement count"
    assert not cert.rank.full_rank


@pytest.mark.parametrize("seed", range(15))
def test_certificate_agrees_with_solver(seed):
    # whenever the certificate passes, the solver must reproduce the
    # ground truth; checked across small random geometries
    inst = random_instance(n=17, m=9 + seed % 8, k_x=1, k_f=1, seed=seed)
    cert = verify_dual_certificate(inst, inst.x0, inst.f0)
    if cert.passed:
        sol = solve(inst.operator, inst.b, SolverConfig())
        from corrupt_recover.problem import rre

        assert rre(sol.x_hat, sol.f_hat, inst.x0, inst.f0) < 1e-8


# ---------------------------------------------------------------------------
# constructive route


def test_built_dual_vector_satisfies_the_equalities():
    for seed in range(10):
        inst = random_instance(n=23, m=17, k_x=2, k_f=2, seed=seed)
        h, gram_min = build_dual_vector(inst)
        assert gram_min > 0
        np.testing.assert_allclose(h[inst.s_f], inst.sigma_f, atol=0)
        g = inst.lam * inst.operator.apply_adjoint(h)
        assert float(np.abs(g[inst.s_x] - inst.sigma_x).max()) < 1e-10


def test_built_dual_vector_rejects_thin_clean_block():
    inst = random_instance(n=17, m=5, k_x=4, k_f=2, seed=0)
    with pytest.raises(CardinalityError):
        build_dual_vector(inst)


def test_reduced_system_shapes_and_identity():
    inst = random_instance(n=23, m=17, k_x=2, k_f=2, seed=3)
    phi, w = build_reduced_system(inst)
    sfc = inst.m - inst.s_f.size
    sxc = inst.n - inst.s_x.size
    assert phi.shape == (inst.n, sfc + sxc)
    assert w.shape == (inst.n,)
    h, _ = build_dual_vector(inst)
    q = build_reduced_solution(inst, h)
    assert q.shape == (sfc + sxc,)
    resid = float(np.abs(phi @ q - w).max())
    assert resid < 1e-12


def test_reduced_system_without_corruption_has_plain_sign_rhs():
    inst = random_instance(n=23, m=17, k_x=2, k_f=0, seed=3)
    phi, w = build_reduced_system(inst)
    sxc = inst.n - inst.s_x.size
    np.testing.assert_array_equal(w[:sxc], np.zeros(sxc))
    np.testing.assert_array_equal(w[sxc:], inst.sigma_x)


def test_reduced_system_needs_clean_rows():
    inst = random_instance(n=9, m=4, k_x=1, k_f=4, seed=0)
    with pytest.raises(ValueError):
        build_reduced_system(inst)


def test_threshold_half_examples():
    out = threshold_half(np.array([0.6, 0.4 + 0.1j, -0.5]))
    np.testing.assert_array_equal(out, [0.6, 0.0, -0.5])
    # modulus exactly 1/2 is kept
    assert threshold_half(np.array([0.3 + 0.4j]))[0] == 0.3 + 0.4j


# ---------------------------------------------------------------------------
# sparse projection norm


def test_projection_norm_rank_one_row_space():
    phi = np.array([[1.0, 1.0]])
    assert math.isclose(sparse_projection_norm(phi, 1), 1 / math.sqrt(2), rel_tol=1e-12)
    assert math.isclose(sparse_projection_norm(phi, 2), 1.0, rel_tol=1e-12)


def test_projection_norm_full_row_space_is_one():
    assert math.isclose(sparse_projection_norm(np.eye(2), 1), 1.0, rel_tol=1e-12)


def test_projection_norm_monotone_and_bounded():
    rng = np.random.default_rng(0)
    phi = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
    vals = [sparse_projection_norm(phi, k) for k in range(1, 8)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert all(v <= 1.0 + 1e-12 for v in vals)
    assert math.isclose(vals[-1], 1.0, rel_tol=1e-12)


def test_projection_norm_enumeration_guard():
    with pytest.raises(ValueError):
        sparse_projection_norm(np.eye(50), 25)
    with pytest.raises(ValueError):
        sparse_projection_norm(np.eye(3), 0)


def test_projection_norm_on_reference_toy():
    # frozen from the brute-force oracle on this exact instance
    inst = random_instance(n=13, m=13, k_x=1, k_f=10, seed=5)
    phi, _ = build_reduced_system(inst)
    k = (inst.m - inst.s_f.size) - inst.s_x.size
    assert k == 2
    assert phi.shape == (13, 15)
    xi = sparse_projection_norm(phi, k)
    assert math.isclose(xi, 0.999347661472, abs_tol=1e-9)
    assert xi < 1.0


def test_reduced_norm_condition_hand_example():
    q = np.array([0.3, 0.3])
    res = check_reduced_norm_condition(q, xi_k=0.5, k=4)
    assert math.isclose(res.rhs, 1.0)
    # both entries fall below 1/2 so the threshold route drops them
    assert math.isclose(res.lhs_threshold_route, math.hypot(0.3, 0.3), rel_tol=1e-12)
    assert math.isclose(res.lhs_plain_route, 2.0 * math.hypot(0.3, 0.3), rel_tol=1e-12)
    assert res.passed_threshold_route and res.passed_plain_route


def test_reduced_norm_condition_non_contractive():
    res = check_reduced_norm_condition(np.array([0.1]), xi_k=1.0, k=1)
    assert not res.passed_threshold_route and not res.passed_plain_route
    assert "not contractive" in res.reason
    with pytest.raises(ValueError):
        check_reduced_norm_condition(np.array([0.1]), xi_k=-0.1, k=1)
    with pytest.raises(ValueError):
        check_reduced_norm_condition(np.array([0.1]), xi_k=0.5, k=0)


# ---------------------------------------------------------------------------
# rank checks


def test_rank_of_unitary_block_equals_lambda():
    inst = random_instance(n=16, m=16, k_x=3, k_f=0, seed=2, lam=1.75)
    rank = check_support_matrix_rank(inst)
    assert rank.full_rank
    assert math.isclose(rank.min_singular, 1.75, rel_tol=1e-12)
    assert math.isclose(rank.schur_min_eig, 1.75**2, rel_tol=1e-12)


def test_rank_verdicts_agree_between_svd_and_schur():
    rng = np.random.default_rng(1)
    for _ in range(60):
        n = int(rng.integers(8, 24))
        m = int(rng.integers(4, n + 1))
        k_x = int(rng.integers(1, max(2, min(4, m // 2) + 1)))
        k_f = int(rng.integers(0, min(4, m - k_x) + 1))
        if m - k_f < k_x:
            continue
        inst = random_instance(n=n, m=m, k_x=k_x, k_f=k_f, seed=int(rng.integers(2**31)))
        rank = check_support_matrix_rank(inst)
        assert rank.full_rank == (rank.schur_min_eig > 1e-10)


# ---------------------------------------------------------------------------
# support-size uncertainty


def test_uncertainty_examples():
    e3 = np.zeros(7)
    e3[3] = 1.0
    assert support_uncertainty(e3) == (1, 7, True)
    comb = np.array([1.0, 0.0, 1.0, 0.0])
    nnz_t, nnz_f, holds = support_uncertainty(comb)
    assert (nnz_t, nnz_f, holds) == (2, 2, False)
    with pytest.raises(ValueError):
        support_uncertainty(np.zeros(5))


def test_uncertainty_holds_for_prime_lengths():
    rng = np.random.default_rng(3)
    for _ in range(300):
        z = np.zeros(13, dtype=np.complex128)
        k = int(rng.integers(1, 14))
        idx = rng.choice(13, size=k, replace=False)
        z[idx] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        nnz_t, nnz_f, holds = support_uncertainty(z)
        assert holds, (nnz_t, nnz_f)


def test_uncertainty_counts_match_transform():
    z = np.ones(5)
    nnz_t, nnz_f, holds = support_uncertainty(z)
    assert nnz_t == 5
    assert nnz_f == int(np.sum(np.abs(dft(z)) > 1e-9 * 5))
    assert holds


# ---------------------------------------------------------------------------
# full report


def test_report_cardinality_threshold_value():
    # (32/3) * 5 * ln(2*5/0.1), frozen
    inst = random_instance(n=101, m=90, k_x=5, k_f=10, seed=0)
    report = check_recovery_conditions(inst, epsilon=0.1)
    cond = report.condition("clean_rows_cardinality")
    assert math.isclose(cond.threshold, 245.60907658603153, rel_tol=1e-12)
    assert cond.value == 80.0
    assert cond.passed is False
    assert report.condition("n_prime").passed is True


def test_report_rho_values_and_sparsity_gap():
    inst = random_instance(n=71, m=67, k_x=1, k_f=33, seed=0)
    report = check_recovery_conditions(inst, epsilon=0.1)
    assert math.isclose(report.rho1, math.sqrt(71 / 67), rel_tol=1e-12)
    assert report.k == 67 - 33 - 1
    assert report.condition("clean_rows_cardinality").passed is True
    assert report.condition("corrupt_rows_cardinality").passed is True
    assert report.condition("sparsity_gap_positive").passed is True
    u = math.sqrt(2.0 * math.log(2.0 * 1 / 0.1))
    sfc = 67 - 33
    rho2 = (math.sqrt(67 / sfc) * math.sqrt(6.0) * (1.0 + u)
            + math.sqrt(6.0) * (1.0 + u) * math.sqrt(71 / sfc))
    assert math.isclose(report.rho2, rho2, rel_tol=1e-12)


def test_report_certificate_records_on_good_instance():
    inst = random_instance(n=23, m=17, k_x=2, k_f=2, seed=3)
    report = check_recovery_conditions(inst, epsilon=0.1)
    assert report.condition("gram_invertible").passed is True
    assert report.condition("certificate_equality_residual").passed is True
    assert report.condition("support_matrix_full_rank").passed is True
    assert report.dual_vector is not None
    assert report.reduced_solution is not None
    assert math.isfinite(report.q_norm2)
    # informational probability records never flip the overall verdict
    prob = report.condition("gram_concentration_prob_clean")
    assert prob.passed is None
    assert prob.value <= 1.0


def test_report_marks_cardinality_failure_without_crash():
    inst = random_instance(n=17, m=5, k_x=4, k_f=2, seed=0)
    report = check_recovery_conditions(inst, epsilon=0.1)
    assert report.condition("gram_invertible").passed is False
    assert not report.all_conditions_pass


def test_hoeffding_calibration_identity():
    # the per-coordinate failure probability 2 exp(-u^2/2) equals
    # epsilon / k_x at u = sqrt(2 ln(2 k_x / epsilon))
    for k_x, eps in ((1, 0.1), (5, 0.05), (13, 0.3)):
        u = math.sqrt(2.0 * math.log(2.0 * k_x / eps))
        assert math.isclose(2.0 * math.exp(-u * u / 2.0) * k_x, eps, rel_tol=1e-12)


def test_report_domain_validation():
    inst = random_instance(n=23, m=17, k_x=2, k_f=2, seed=3)
    with pytest.raises(ValueError):
        check_recovery_conditions(inst, epsilon=1.0 / 3.0)
    with pytest.raises(ValueError):
        check_recovery_conditions(inst, epsilon=0.0)
    with pytest.raises(ValueError):
        check_recovery_conditions(inst, epsilon=0.1, c=1.5)


def test_report_serialization(tmp_path):
    inst = random_instance(n=23, m=17, k_x=2, k_f=2, seed=3)
    report = check_recovery_conditions(inst, epsilon=0.1)
    text = format_report(report, extra_lines=["extra value=1 threshold=- status=info"])
    lines = text.splitlines()
    assert lines[0] == "corrupt-recover-certificate-report v1"
    assert "n=23" in lines[1]
    assert lines[-1].startswith("extra")
    for line in lines[2:]:
        assert " status=" in line
        status = line.rsplit("status=", 1)[1].split()[0]
        assert status in ("pass", "fail", "info")
    path = tmp_path / "report.txt"
    report.save(path)
    assert path.read_text().splitlines()[0] == lines[0]
