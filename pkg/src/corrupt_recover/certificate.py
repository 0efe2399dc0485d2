"""Dual certificates, sufficient conditions, and support-geometry checks.

For an instance with signal support s_x, corruption support s_f and
sign vectors sigma_x, sigma_f, a dual vector h in C^m certifies that
(x0, f0) is the unique optimum of the coupled l1 program when

    lam * A*(s_x, :) h = sigma_x,      h(s_f) = sigma_f,
    ||lam * A*(s_x^c, :) h||_inf < 1,  ||h(s_f^c)||_inf < 1,

and the stacked support matrix B = [lam*A(:, s_x), I(:, s_f)] has full
column rank.  The module builds candidate h vectors, reduces the
equality system to a smaller dense one, and evaluates every numeric
condition of the recovery guarantee on concrete instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fourier import dft
from .primes import is_prime
from .problem import ProblemInstance

DEFAULT_SUPPORT_TOL = 1e-9
SUBSET_ENUMERATION_GUARD = 10**6


class CardinalityError(ValueError):
    """Support sizes rule the construction out before any algebra runs."""


def detect_support(v, rel_tol: float = DEFAULT_SUPPORT_TOL) -> np.ndarray:
    """Indices with modulus above rel_tol times the largest modulus."""
    v = np.asarray(v, dtype=np.complex128)
    moduli = np.abs(v)
    peak = moduli.max() if v.size else 0.0
    if peak == 0.0:
        return np.empty(0, dtype=np.int64)
    return np.flatnonzero(moduli > rel_tol * peak).astype(np.int64)


def _complement(idx: np.ndarray, size: int) -> np.ndarray:
    mask = np.ones(size, dtype=bool)
    mask[idx] = False
    return np.flatnonzero(mask).astype(np.int64)


def _adjoint_block(op, signal_rows, meas_cols) -> np.ndarray:
    """Dense A*(signal_rows, meas_cols), shape (len(signal_rows), len(meas_cols))."""
    return op.dense_submatrix(meas_cols, signal_rows).conj().T


# ---------------------------------------------------------------------------
# rank of the stacked support matrix


@dataclass(eq=False)
class RankReport:
    full_rank: bool
    min_singular: float
    schur_min_eig: float  # smallest eigenvalue of lam^2 A*(s_x,s_f^c) A(s_f^c,s_x)


def check_support_matrix_rank(inst: ProblemInstance,
                              s_x: np.ndarray | None = None,
                              s_f: np.ndarray | None = None) -> RankReport:
    """Full-rank test for B = [lam*A(:, s_x), I(:, s_f)].

    Reports the smallest singular value of the dense B and the smallest
    eigenvalue of the equivalent Schur block; B has full column rank
    exactly when that block is positive definite (and the column count
    fits at all).
    """
    op = inst.operator
    s_x = inst.s_x if s_x is None else np.asarray(s_x, dtype=np.int64)
    s_f = inst.s_f if s_f is None else np.asarray(s_f, dtype=np.int64)
    m = op.m
    k_x, k_f = s_x.size, s_f.size
    if k_x + k_f == 0:
        return RankReport(True, math.inf, math.inf)
    if k_x + k_f > m:
        return RankReport(False, 0.0, 0.0)

    cols = []
    if k_x:
        cols.append(inst.lam * op.dense_submatrix(np.arange(m), s_x))
    if k_f:
        eye = np.zeros((m, k_f), dtype=np.complex128)
        eye[s_f, np.arange(k_f)] = 1.0
        cols.append(eye)
    B = np.hstack(cols)
    svals = np.linalg.svd(B, compute_uv=False)
    min_sv = float(svals[-1])
    tol = max(B.shape) * np.finfo(np.float64).eps * float(svals[0])

    if k_x:
        sfc = _complement(s_f, m)
        block = op.dense_submatrix(sfc, s_x)
        gram_svals = np.linalg.svd(block, compute_uv=False) if min(block.shape) else np.zeros(1)
        schur_min = float(inst.lam ** 2 * gram_svals[-1] ** 2) if block.shape[0] >= 1 else 0.0
        if block.shape[0] < k_x:
            schur_min = 0.0
    else:
        schur_min = math.inf
    return RankReport(bool(min_sv > tol), min_sv, schur_min)


# ---------------------------------------------------------------------------
# dual certificate verification for arbitrary candidates


@dataclass(eq=False)
class DualCertificate:
    passed: bool
    margin: float
    margin_signal: float
    margin_corruption: float
    eq_residual: float
    feas_residual: float
    rank: RankReport
    h: np.ndarray | None
    reason: str = ""


def verify_dual_certificate(inst: ProblemInstance, x_cand, f_cand,
                            eq_tol: float = 1e-10,
                            required_margin: float = 1e-6,
                            support_tol: float = DEFAULT_SUPPORT_TOL) -> DualCertificate:
    """Try to certify that (x_cand, f_cand) is the unique optimum.

    Checks the candidate is feasible for the instance data, fixes h on
    the detected corruption support to the candidate signs, completes
    the remaining equality constraints by the least-norm solution, then
    checks both strict sup-norm inequalities against ``required_margin``
    and the stacked support matrix for full rank.  A pass is a proof of
    unique optimality; a fail is only a failure to exhibit a
    certificate along this route.
    """
    op = inst.operator
    lam = inst.lam
    m, n = op.m, op.n
    x_cand = np.asarray(x_cand, dtype=np.complex128)
    f_cand = np.asarray(f_cand, dtype=np.complex128)
    if x_cand.shape != (n,) or f_cand.shape != (m,):
        raise ValueError("candidate shapes disagree with the operator")

    feas = lam * op.apply(x_cand) + f_cand - inst.b
    feas_residual = float(np.linalg.norm(feas))
    b_scale = max(1.0, float(np.linalg.norm(inst.b)))

    s_x = detect_support(x_cand, support_tol)
    s_f = detect_support(f_cand, support_tol)
    sigma_x = x_cand[s_x] / np.abs(x_cand[s_x]) if s_x.size else np.empty(0, np.complex128)
    sigma_f = f_cand[s_f] / np.abs(f_cand[s_f]) if s_f.size else np.empty(0, np.complex128)
    sfc = _complement(s_f, m)
    sxc = _complement(s_x, n)

    rank = check_support_matrix_rank(inst, s_x, s_f)
    if feas_residual > eq_tol * b_scale:
        return DualCertificate(False, -math.inf, -math.inf, -math.inf, math.inf,
                               feas_residual, rank, None, "candidate is infeasible")
    if s_x.size + s_f.size > m:
        return DualCertificate(False, -math.inf, -math.inf, -math.inf, math.inf,
                               feas_residual, rank, None,
                               "supports exceed measurement count")

    # equality block on the free coordinates h(s_f^c)
    M = lam * _adjoint_block(op, s_x, sfc)
    rhs = sigma_x - lam * _adjoint_block(op, s_x, s_f) @ sigma_f
    if M.shape[1] == 0:
        h_free = np.empty(0, dtype=np.complex128)
        eq_residual = float(np.linalg.norm(rhs))
    else:
        h_free, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        eq_residual = float(np.linalg.norm(M @ h_free - rhs))
    if eq_residual > eq_tol * max(1.0, float(np.linalg.norm(rhs))):
        return DualCertificate(False, -math.inf, -math.inf, -math.inf, eq_residual,
                               feas_residual, rank, None,
                               "equality system inconsistent")

    h = np.zeros(m, dtype=np.complex128)
    h[s_f] = sigma_f
    h[sfc] = h_free

    g = lam * op.apply_adjoint(h)
    off_signal = float(np.abs(g[sxc]).max()) if sxc.size else 0.0
    off_corrupt = float(np.abs(h[sfc]).max()) if sfc.size else 0.0
    margin_signal = 1.0 - off_signal
    margin_corruption = 1.0 - off_corrupt
    margin = min(margin_signal, margin_corruption)

    passed = (rank.full_rank and margin_signal > required_margin
              and margin_corruption > required_margin)
    reason = "" if passed else "strict inequality or rank check failed"
    return DualCertificate(passed, margin, margin_signal, margin_corruption,
                           eq_residual, feas_residual, rank, h, reason)


# ---------------------------------------------------------------------------
# constructive route: explicit dual vector and reduced system


def build_dual_vector(inst: ProblemInstance) -> tuple[np.ndarray, float]:
    """Closed-form candidate h from the instance's ground-truth supports.

    h(s_f) = sigma_f and h(s_f^c) is the minimum-norm solution of the
    signal-side equality block, computed through a QR factorization of
    the clean-row column block (never an explicit inverse).  Also
    returns the smallest eigenvalue of the Gram block.  Raises
    :class:`CardinalityError` when that block is singular, which is the
    regime where the clean-row count is too small relative to the
    signal support for the guarantee to apply.
    """
    op = inst.operator
    lam = inst.lam
    m = op.m
    s_x, s_f = inst.s_x, inst.s_f
    sigma_x, sigma_f = inst.sigma_x, inst.sigma_f
    if s_x is None or s_f is None:
        raise ValueError("instance lacks ground-truth supports")
    sfc = _complement(s_f, m)

    h = np.zeros(m, dtype=np.complex128)
    h[s_f] = sigma_f
    if s_x.size == 0:
        return h, math.inf

    # column block A(s_f^c, s_x); its squared singular values are the
    # Gram spectrum
    block = op.dense_submatrix(sfc, s_x)
    if block.shape[0] < block.shape[1]:
        raise CardinalityError(
            "clean rows fewer than signal support entries; the cardinality "
            "requirement |s_f^c| >= (32/3)|s_x| ln(2|s_x|/eps) cannot hold")
    svals = np.linalg.svd(block, compute_uv=False)
    gram_min = float(svals[-1] ** 2)
    tol = max(block.shape) * np.finfo(np.float64).eps * float(svals[0])
    if svals[-1] <= tol:
        raise CardinalityError(
            "clean-row Gram block is singular; too few clean rows relative "
            "to the signal support (cardinality requirement "
            "|s_f^c| >= (32/3)|s_x| ln(2|s_x|/eps) is violated or tight)")

    rhs = sigma_x - lam * _adjoint_block(op, s_x, s_f) @ sigma_f
    q_fac, r_fac = np.linalg.qr(block)
    # block (block* block)^(-1) rhs  ==  Q R^{-*} rhs
    h[sfc] = (q_fac @ np.linalg.solve(r_fac.conj().T, rhs)) / lam
    return h, gram_min


def build_reduced_system(inst: ProblemInstance) -> tuple[np.ndarray, np.ndarray]:
    """Dense reduced system (Phi, w) whose solutions extend to dual vectors.

    Unknowns are q = [h(s_f^c); t] with t = -lam * A*(s_x^c, :) h; the
    two block rows encode the off-support adjoint values and the
    signal-side equality constraints.
    """
    op = inst.operator
    lam = inst.lam
    m, n = op.m, op.n
    s_x, s_f = inst.s_x, inst.s_f
    if s_x is None or s_f is None:
        raise ValueError("instance lacks ground-truth supports")
    sfc = _complement(s_f, m)
    sxc = _complement(s_x, n)
    if sfc.size == 0:
        raise ValueError("empty clean-row set leaves no unknowns to solve for")

    top = np.hstack([
        lam * _adjoint_block(op, sxc, sfc),
        np.eye(sxc.size, dtype=np.complex128),
    ])
    bottom = np.hstack([
        lam * _adjoint_block(op, s_x, sfc),
        np.zeros((s_x.size, sxc.size), dtype=np.complex128),
    ])
    phi = np.vstack([top, bottom])

    sigma_f = inst.sigma_f if inst.sigma_f is not None else np.empty(0, np.complex128)
    w_top = -lam * _adjoint_block(op, sxc, s_f) @ sigma_f if s_f.size else np.zeros(sxc.size, np.complex128)
    if s_f.size:
        w_bottom = inst.sigma_x - lam * _adjoint_block(op, s_x, s_f) @ sigma_f
    else:
        w_bottom = inst.sigma_x.copy()
    return phi, np.concatenate([w_top, w_bottom])


def build_reduced_solution(inst: ProblemInstance, h: np.ndarray) -> np.ndarray:
    """Reduced-system solution q induced by a dual vector h."""
    op = inst.operator
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (op.m,):
        raise ValueError("h must be a measurement-length vector")
    sfc = _complement(inst.s_f, op.m)
    sxc = _complement(inst.s_x, op.n)
    tail = -inst.lam * op.apply_adjoint(h)[sxc]
    return np.concatenate([h[sfc], tail])


def threshold_half(q) -> np.ndarray:
    """Zero every entry with modulus strictly below 1/2 (keep at exactly 1/2)."""
    q = np.asarray(q, dtype=np.complex128)
    out = q.copy()
    out[np.abs(q) < 0.5] = 0.0
    return out


# ---------------------------------------------------------------------------
# k-sparse operator norm of the reduced-system projection


def sparse_projection_norm(system_matrix: np.ndarray, k: int,
                           guard: int = SUBSET_ENUMERATION_GUARD) -> float:
    """Largest l2 norm of P x over k-sparse unit vectors, brute force.

    P is the orthogonal projector onto the row space of the system
    matrix (the range of its conjugate transpose).  Enumerates every
    k-subset of coordinates, so it refuses once C(d, k) exceeds
    ``guard``.  The value is nondecreasing in k and never exceeds 1.
    """
    phi = np.asarray(system_matrix, dtype=np.complex128)
    if phi.ndim != 2:
        raise ValueError("expected a matrix")
    d = phi.shape[1]
    if not (1 <= k <= d):
        raise ValueError(f"k must lie in [1, {d}]")
    if math.comb(d, k) > guard:
        raise ValueError(
            f"C({d},{k}) = {math.comb(d, k)} subsets exceed the enumeration "
            f"guard {guard}; brute force refused")

    u, svals, _ = np.linalg.svd(phi.conj().T, full_matrices=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0.0
    basis = u[:, svals > svals[0] * max(phi.shape) * np.finfo(np.float64).eps]
    # ||P(:, S)||_2 equals the spectral norm of the basis row block S
    best = 0.0
    for subset in combinations(range(d), k):
        rows = basis[list(subset), :]
        top = float(np.linalg.svd(rows, compute_uv=False)[0])
        if top > best:
            best = top
    return min(best, 1.0)


@dataclass(eq=False)
class NormConditionResult:
    lhs_threshold_route: float   # uses the thresholded reduced solution
    lhs_plain_route: float       # uses only ||q||_2
    rhs: float
    margin_threshold_route: float
    margin_plain_route: float
    passed_threshold_route: bool
    passed_plain_route: bool
    reason: str = ""


def check_reduced_norm_condition(q: np.ndarray, xi_k: float, k: int) -> NormConditionResult:
    """Evaluate both sufficient-condition routes against sqrt(k)/2.

    The threshold route bounds ||q||_2 + xi/(1-xi) * ||T(q)||_2 with T
    the half-threshold map; the plain route bounds (1 + xi/(1-xi)) *
    ||q||_2.  Either one passing (with xi_k < 1) certifies recovery for
    the instance the reduced solution came from.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if xi_k < 0:
        raise ValueError("xi_k cannot be negative")
    q = np.asarray(q, dtype=np.complex128)
    rhs = math.sqrt(k) / 2.0
    if xi_k >= 1.0:
        return NormConditionResult(math.inf, math.inf, rhs, -math.inf, -math.inf,
                                   False, False,
                                   "projection norm not contractive (xi_k >= 1)")
    amplify = xi_k / (1.0 - xi_k)
    qn = float(np.linalg.norm(q))
    lhs_thr = qn + amplify * float(np.linalg.norm(threshold_half(q)))
    lhs_plain = (1.0 + amplify) * qn
    return NormConditionResult(
        lhs_thr, lhs_plain, rhs,
        rhs - lhs_thr, rhs - lhs_plain,
        lhs_thr <= rhs, lhs_plain <= rhs,
    )


# ---------------------------------------------------------------------------
# support-size uncertainty check


def support_uncertainty(z, zero_tol: float = DEFAULT_SUPPORT_TOL) -> tuple[int, int, bool]:
    """Support counts of z and its spectrum, and whether they sum to n+1.

    For prime length n, every nonzero vector satisfies
    ||z||_0 + ||dft(z)||_0 >= n + 1; composite lengths can violate it.
    Entries count as nonzero above zero_tol times the peak modulus.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("expected a nonempty 1-d vector")
    if not np.any(z):
        raise ValueError("the zero vector has no support to count")
    nnz_time = int(detect_support(z, zero_tol).size)
    nnz_freq = int(detect_support(dft(z), zero_tol).size)
    return nnz_time, nnz_freq, nnz_time + nnz_freq >= z.size + 1


# ---------------------------------------------------------------------------
# full numeric evaluation of the recovery guarantee


@dataclass(eq=False)
class ConditionRecord:
    name: str
    value: float
    threshold: float
    passed: bool | None  # None marks an informational record
    note: str = ""


@dataclass(eq=False)
class CertificateReport:
    n: int
    m: int
    lam: float
    epsilon: float
    c: float
    k: int
    rho1: float
    rho2: float
    dual_vector: np.ndarray | None
    reduced_solution: np.ndarray | None
    q_norm2: float
    q_norm_inf: float
    b_min_singular: float
    schur_min_eig: float
    gram_min_eig: float
    xi_k: float | None
    conditions: list[ConditionRecord] = field(default_factory=list)

    @property
    def all_conditions_pass(self) -> bool:
        return all(c.passed is not False for c in self.conditions)

    def condition(self, name: str) -> ConditionRecord:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def save(self, path, extra_lines: list[str] | None = None) -> None:
        write_report(self, path, extra_lines)


def check_recovery_conditions(inst: ProblemInstance, epsilon: float,
                              c: float = 0.5) -> CertificateReport:
    """Evaluate every numeric condition of the recovery guarantee.

    Produces one record per condition (primality, the two cardinality
    lower bounds, the main sampling inequality, rank and Gram checks,
    the certificate equalities and strict inequalities, and the
    probabilistic norm bounds evaluated as plain event truths on this
    instance).  Probabilities of success are reported as informational
    values, never asserted.
    """
    if not (0.0 < epsilon < 1.0 / 3.0):
        raise ValueError("epsilon must lie in (0, 1/3)")
    if not (0.0 < c < 1.0):
        raise ValueError("c must lie in (0, 1)")
    if inst.s_x is None or inst.s_f is None:
        raise ValueError("instance lacks ground-truth supports")

    op = inst.operator
    n, m, lam = inst.n, inst.m, inst.lam
    k_x, k_f = int(inst.s_x.size), int(inst.s_f.size)
    sfc_size = m - k_f
    k = sfc_size - k_x
    conds: list[ConditionRecord] = []

    conds.append(ConditionRecord("n_prime", float(n), math.nan, is_prime(n)))

    if k_x > 0:
        log_term = math.log(2.0 * k_x / epsilon)
        card_threshold = (32.0 / 3.0) * k_x * log_term
        u = math.sqrt(2.0 * log_term)
    else:
        card_threshold = 0.0
        u = 0.0
    conds.append(ConditionRecord("clean_rows_cardinality", float(sfc_size),
                                 card_threshold, sfc_size >= card_threshold))
    conds.append(ConditionRecord("corrupt_rows_cardinality", float(k_f),
                                 card_threshold, k_f >= card_threshold))
    conds.append(ConditionRecord("sparsity_gap_positive", float(k), 1.0, k >= 1))

    rho1 = math.sqrt(n / m) * lam
    if sfc_size > 0:
        rho2 = (math.sqrt(m / sfc_size) * math.sqrt(6.0) * (1.0 / lam + u)
                + math.sqrt(6.0) * (1.0 + lam * u) * math.sqrt(n / sfc_size))
    else:
        rho2 = math.inf
    lhs_main = rho1 * math.sqrt(k_f) + rho2 * math.sqrt(k_x)
    rhs_main = 0.5 * c * math.sqrt(k) if k >= 1 else math.nan
    conds.append(ConditionRecord("main_sampling_inequality", lhs_main, rhs_main,
                                 bool(k >= 1 and lhs_main <= rhs_main)))

    rank = check_support_matrix_rank(inst)
    conds.append(ConditionRecord("support_matrix_full_rank", rank.min_singular,
                                 0.0, rank.full_rank,
                                 note=f"schur_min_eig={rank.schur_min_eig:.6e}"))

    h = None
    q = None
    gram_min = math.nan
    q_norm2 = math.nan
    q_norm_inf = math.nan
    try:
        h, gram_min = build_dual_vector(inst)
    except CardinalityError as exc:
        conds.append(ConditionRecord("gram_invertible", 0.0, 0.0, False, note=str(exc)))
    else:
        conds.append(ConditionRecord("gram_invertible", gram_min, 0.0, gram_min > 0.0))
        g = lam * op.apply_adjoint(h)
        eq_res = float(np.abs(g[inst.s_x] - inst.sigma_x).max()) if k_x else 0.0
        conds.append(ConditionRecord("certificate_equality_residual", eq_res,
                                     1e-10, eq_res <= 1e-10))
        sxc = _complement(inst.s_x, n)
        sfc = _complement(inst.s_f, m)
        off_signal = float(np.abs(g[sxc]).max()) if sxc.size else 0.0
        off_corrupt = float(np.abs(h[sfc]).max()) if sfc.size else 0.0
        conds.append(ConditionRecord("certificate_offsupport_signal", off_signal,
                                     1.0, off_signal < 1.0))
        conds.append(ConditionRecord("certificate_offsupport_corruption", off_corrupt,
                                     1.0, off_corrupt < 1.0))

        if sfc.size:
            q = build_reduced_solution(inst, h)
            q_norm2 = float(np.linalg.norm(q))
            q_norm_inf = float(np.abs(q).max()) if q.size else 0.0
            conds.append(ConditionRecord("reduced_solution_inf_half", q_norm_inf,
                                         0.5, q_norm_inf < 0.5,
                                         note="strict 1/2 route"))
            bound_q = rho1 * math.sqrt(k_f) + rho2 * math.sqrt(k_x)
            conds.append(ConditionRecord("bound_reduced_norm", q_norm2, bound_q,
                                         q_norm2 <= bound_q))

        # probabilistic norm bounds, evaluated as plain events here
        if k_x and inst.s_f.size:
            cross = _adjoint_block(op, inst.s_x, inst.s_f) @ inst.sigma_f
            cross_norm = float(np.linalg.norm(cross))
        else:
            cross_norm = 0.0
        bound_cross = math.sqrt(2.0 * k_x * log_term) if k_x else 0.0
        conds.append(ConditionRecord("bound_sign_cross_term", cross_norm,
                                     bound_cross, cross_norm <= bound_cross))

        sfc_norm = float(np.linalg.norm(h[sfc])) if sfc.size else 0.0
        if sfc_size > 0:
            bound_clean = (math.sqrt(m / sfc_size) * math.sqrt(6.0)
                           * (1.0 / lam + u) * math.sqrt(k_x))
        else:
            bound_clean = 0.0
        conds.append(ConditionRecord("bound_dual_clean_block", sfc_norm,
                                     bound_clean, sfc_norm <= bound_clean))
        h_norm = float(np.linalg.norm(h))
        conds.append(ConditionRecord("bound_dual_norm", h_norm,
                                     math.sqrt(k_f) + bound_clean,
                                     h_norm <= math.sqrt(k_f) + bound_clean))

    if k_x:
        prob_clean = 1.0 - 2.0 * k_x * math.exp(-3.0 * sfc_size / (32.0 * k_x))
        prob_corrupt = 1.0 - 2.0 * k_x * math.exp(-3.0 * k_f / (32.0 * k_x)) if k_f else math.nan
        conds.append(ConditionRecord("gram_concentration_prob_clean", prob_clean,
                                     math.nan, None))
        conds.append(ConditionRecord("gram_concentration_prob_corrupt", prob_corrupt,
                                     math.nan, None))

    return CertificateReport(
        n=n, m=m, lam=lam, epsilon=epsilon, c=c, k=k,
        rho1=rho1, rho2=rho2,
        dual_vector=h, reduced_solution=q,
        q_norm2=q_norm2, q_norm_inf=q_norm_inf,
        b_min_singular=rank.min_singular,
        schur_min_eig=rank.schur_min_eig,
        gram_min_eig=gram_min,
        xi_k=None,
        conditions=conds,
    )


# ---------------------------------------------------------------------------
# report files


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def format_report(report: CertificateReport, extra_lines: list[str] | None = None) -> str:
    lines = ["corrupt-recover-certificate-report v1"]
    head = {
        "n": report.n, "m": report.m, "lambda": _fmt(report.lam),
        "epsilon": _fmt(report.epsilon), "c": _fmt(report.c), "k": report.k,
        "rho1": _fmt(report.rho1), "rho2": _fmt(report.rho2),
        "q_norm2": _fmt(report.q_norm2), "q_norm_inf": _fmt(report.q_norm_inf),
        "b_min_singular": _fmt(report.b_min_singular),
        "schur_min_eig": _fmt(report.schur_min_eig),
        "xi_k": "skipped" if report.xi_k is None else _fmt(report.xi_k),
    }
    lines.append(" ".join(f"{k}={v}" for k, v in head.items()))
    for cond in report.conditions:
        status = "info" if cond.passed is None else ("pass" if cond.passed else "fail")
        thr = "-" if math.isnan(cond.threshold) else _fmt(cond.threshold)
        line = f"{cond.name} value={_fmt(cond.value)} threshold={thr} status={status}"
        if cond.note:
            line += f" note={cond.note!r}"
        lines.append(line)
    for extra in extra_lines or []:
        lines.append(extra)
    return "\n".join(lines) + "\n"


def write_report(report: CertificateReport, path,
                 extra_lines: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_report(report, extra_lines))
