"""Sparse signal recovery from subsampled Fourier measurements that are
hit by sparse, arbitrarily large corruptions.

Core pieces: a matrix-free partial-DFT operator (fourier), instance
generation and metrics (problem), an l1+l1 splitting solver (solver),
dual-certificate and recovery-condition checks (certificate), and the
experiment harness with CSV/SVG emission (experiments).
"""

from .certificate import (CertificateReport, check_recovery_conditions,
                          check_support_matrix_rank, sparse_projection_norm,
                          support_uncertainty, verify_dual_certificate)
from .fourier import PRNG_NAME, PartialFourierOperator, dft, idft, sample_random_subset
from .problem import (ProblemInstance, SyntheticConfig, best_kterm_error,
                      complex_sign, generate_synthetic, ksparse_indicator,
                      random_instance, rre, srre)
from .solver import Solution, SolverConfig, prox_l1, solve

__all__ = [
    "CertificateReport", "PRNG_NAME", "PartialFourierOperator",
    "ProblemInstance", "Solution", "SolverConfig", "SyntheticConfig",
    "best_kterm_error", "check_recovery_conditions", "check_support_matrix_rank",
    "complex_sign", "dft", "generate_synthetic", "idft", "ksparse_indicator",
    "prox_l1", "random_instance", "rre", "sample_random_subset",
    "solve", "sparse_projection_norm", "srre", "support_uncertainty",
    "verify_dual_certificate",
]

__version__ = "0.1.0"
