"""Row-subsampled unitary DFT operators with matrix-free adjoints.

The sensing matrix is sqrt(n/m) times m selected rows of the n-point
unitary DFT (or of its conjugate).  Every entry then has modulus
1/sqrt(m) and every column has unit l2 norm, so the operator's rows are
orthogonal with squared norm n/m.  Applications run through the FFT,
which stays O(n log n) for arbitrary lengths, prime n included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: PRNG behind all seeded sampling in this package, recorded in metadata.
PRNG_NAME = "numpy-pcg64"


def dft(x: np.ndarray) -> np.ndarray:
    """Unitary forward DFT, entries exp(-2*pi*i*j*k/n)/sqrt(n), zero-based."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("dft expects a nonempty 1-d vector")
    return np.fft.fft(x, norm="ortho")


def idft(x: np.ndarray) -> np.ndarray:
    """Inverse (conjugate transpose) of :func:`dft`."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("idft expects a nonempty 1-d vector")
    return np.fft.ifft(x, norm="ortho")


def dft_direct(x: np.ndarray) -> np.ndarray:
    """O(n^2) unitary DFT used to cross-check the FFT path in tests."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("dft_direct expects a nonempty 1-d vector")
    n = x.size
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) @ x / np.sqrt(n)


def sample_random_subset(n: int, m: int, seed: int) -> np.ndarray:
    """Draw m distinct indices from range(n), every m-subset equiprobable.

    Partial Fisher-Yates over an explicit index pool, driven by a seeded
    PCG64 generator.  Deterministic for a fixed seed.  Returns the
    indices sorted ascending.
    """
    if n < 1 or m < 1 or m > n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = np.arange(n)
    for i in range(m):
        j = int(rng.integers(i, n))
        pool[i], pool[j] = pool[j], pool[i]
    return np.sort(pool[:m])


@dataclass(frozen=True, eq=False)
class PartialFourierOperator:
    """Partial Fourier sensing operator applied via FFTs.

    Parameters
    ----------
    n : int
        Signal length.
    lambda_rows : array of int
        Sorted distinct DFT row indices in [0, n), one per measurement.
    conjugated : bool
        When True the rows come from the conjugate (inverse) DFT matrix,
        the variant used for spectra of spatial-domain measurements.
    """

    n: int
    lambda_rows: np.ndarray
    conjugated: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        rows = np.asarray(self.lambda_rows, dtype=np.int64)
        if rows.ndim != 1 or rows.size == 0:
            raise ValueError("lambda_rows must be a nonempty 1-d index array")
        if rows.size > self.n:
            raise ValueError("more rows than signal dimensions")
        if rows.min() < 0 or rows.max() >= self.n:
            raise ValueError("row indices out of range")
        if np.any(np.diff(rows) <= 0):
            raise ValueError("lambda_rows must be sorted and distinct")
        object.__setattr__(self, "lambda_rows", rows)

    @property
    def m(self) -> int:
        return int(self.lambda_rows.size)

    @property
    def scale(self) -> float:
        return float(np.sqrt(self.n / self.m))

    @classmethod
    def random(cls, n: int, m: int, seed: int, conjugated: bool = False):
        """Operator with a uniformly random m-row subset (see
        :func:`sample_random_subset` for the sampling scheme)."""
        return cls(n, sample_random_subset(n, m, seed), conjugated)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Forward application, an m-vector of scaled DFT coefficients."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise ValueError(f"expected shape ({self.n},), got {x.shape}")
        spectrum = np.fft.ifft(x, norm="ortho") if self.conjugated else np.fft.fft(x, norm="ortho")
        return self.scale * spectrum[self.lambda_rows]

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        """Exact adjoint: zero-fill the m values, inverse-transform, scale."""
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.m,):
            raise ValueError(f"expected shape ({self.m},), got {y.shape}")
        full = np.zeros(self.n, dtype=np.complex128)
        full[self.lambda_rows] = y
        out = np.fft.fft(full, norm="ortho") if self.conjugated else np.fft.ifft(full, norm="ortho")
        return self.scale * out

    def dense_submatrix(self, rows, cols) -> np.ndarray:
        """Dense block of the operator for certificate linear algebra.

        ``rows`` index measurements in [0, m); ``cols`` index signal
        entries in [0, n).  Entry (i, j) is
        exp(-+ 2*pi*i*lambda_rows[rows[i]]*cols[j]/n) / sqrt(m),
        sign flipped for the conjugated variant.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.m):
            raise ValueError("measurement row indices out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= self.n):
            raise ValueError("signal column indices out of range")
        sign = 1.0 if self.conjugated else -1.0
        freqs = self.lambda_rows[rows]
        phase = sign * 2j * np.pi * np.outer(freqs, cols) / self.n
        return np.exp(phase) / np.sqrt(self.m)

    def dense(self) -> np.ndarray:
        """Full m-by-n dense matrix (small problems only)."""
        return self.dense_submatrix(np.arange(self.m), np.arange(self.n))
