"""Problem instances, synthetic generation, recovery metrics, file IO.

An instance couples a sparse signal x0 (length n) and a sparse
corruption f0 (length m) to measurements b = lam * A x0 + f0, where A
is a partial Fourier operator.  Recovery minimizes ||x||_1 + ||f||_1
subject to the same coupling, so (x0, f0) is always the feasible point
the solver is judged against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import PRNG_NAME, PartialFourierOperator, sample_random_subset
from .seeding import hash64

# Child-stream tags for hash64(seed, tag); fixed so instances replay.
_TAG_ROWS = 0
_TAG_CORRUPT_SUPPORT = 1
_TAG_SIGNAL_SUPPORT = 2
_TAG_SIGNAL_VALUES = 3
_TAG_CORRUPT_VALUES = 4


def complex_sign(z):
    """Phase of each entry: z/|z| for nonzero z, exactly 0 at z = 0."""
    arr = np.asarray(z, dtype=np.complex128)
    out = np.zeros_like(arr)
    nz = arr != 0
    np.divide(arr, np.abs(arr), out=out, where=nz)
    if arr.ndim == 0:
        return complex(out)
    return out


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero (nonnegative input)."""
    if x < 0:
        raise ValueError("negative sizes make no sense here")
    return int(math.floor(x + 0.5))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _positive_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    # strictly positive values in (0, 1]
    return 1.0 - rng.random(size)


@dataclass(eq=False)
class SyntheticConfig:
    """Knobs for the standard synthetic ensemble.

    theta_m is the sampling fraction (m = round(theta_m * n)), theta_f
    the corrupted fraction of measurements.  The signal support size is
    round(0.2 n / ln(0.2 n)), a contiguous block at a random offset,
    values strictly positive.  The corruption is scaled so its l2 norm
    is corruption_energy_ratio times the signal's.
    """

    n: int
    theta_m: float
    theta_f: float
    corruption_energy_ratio: float = 100.0
    seed: int = 0


def signal_support_size(n: int) -> int:
    """round(0.2 n / ln(0.2 n)); needs 0.2 n > e so the ratio is sane."""
    if 0.2 * n <= math.e:
        raise ValueError(f"n={n} too small for the sparsity rule 0.2n/ln(0.2n)")
    return round_half_away(0.2 * n / math.log(0.2 * n))


def synthetic_signal(n: int, seed: int) -> np.ndarray:
    """Sparse positive signal of the synthetic ensemble, without measurements.

    Support is a contiguous block of signal_support_size(n) entries at a
    uniformly random offset; values are strictly positive uniform (0, 1].
    Uses the same child streams as :func:`generate_synthetic`, so the
    signal inside a generated instance replays from the same seed.
    """
    k_x = signal_support_size(n)
    if k_x >= n:
        raise ValueError("signal support would fill the whole signal")
    offset_rng = _rng(hash64(seed, _TAG_SIGNAL_SUPPORT))
    j = int(offset_rng.integers(0, n - k_x + 1))
    x0 = np.zeros(n, dtype=np.complex128)
    x0[j:j + k_x] = _positive_uniform(_rng(hash64(seed, _TAG_SIGNAL_VALUES)), k_x)
    return x0


@dataclass(eq=False)
class ProblemInstance:
    n: int
    m: int
    lam: float
    operator: PartialFourierOperator
    x0: np.ndarray | None
    f0: np.ndarray | None
    b: np.ndarray
    s_x: np.ndarray | None
    s_f: np.ndarray | None
    sigma_x: np.ndarray | None
    sigma_f: np.ndarray | None
    meta: dict = field(default_factory=dict)

    def save(self, path) -> None:
        save_instance(self, path)

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        return load_instance(path)


def generate_synthetic(cfg: SyntheticConfig, lam: float = 1.0) -> ProblemInstance:
    """Draw one instance of the synthetic ensemble.

    The measurement row set, the corrupted-row set, the signal block
    offset and both value vectors come from independent child streams
    of cfg.seed, so changing one draw never disturbs the others.
    """
    if cfg.n < 1:
        raise ValueError("n must be positive")
    if not (0.0 < cfg.theta_m <= 1.0):
        raise ValueError("theta_m must lie in (0, 1]")
    if not (0.0 <= cfg.theta_f < 1.0):
        raise ValueError("theta_f must lie in [0, 1)")
    if cfg.corruption_energy_ratio < 100.0:
        raise ValueError("corruption_energy_ratio below 100 is out of contract")
    if lam <= 0:
        raise ValueError("lam must be positive")

    n = cfg.n
    m = round_half_away(cfg.theta_m * n)
    if m < 1:
        raise ValueError("theta_m rounds to zero measurements")
    k_x = signal_support_size(n)
    k_f = round_half_away(cfg.theta_f * m)
    if k_x >= n:
        raise ValueError("signal support would fill the whole signal")
    if k_f > m:
        raise ValueError("more corrupted rows than measurements")

    rows = sample_random_subset(n, m, hash64(cfg.seed, _TAG_ROWS))
    op = PartialFourierOperator(n, rows)

    if k_f:
        s_f = sample_random_subset(m, k_f, hash64(cfg.seed, _TAG_CORRUPT_SUPPORT))
    else:
        s_f = np.empty(0, dtype=np.int64)

    x0 = synthetic_signal(n, cfg.seed)
    s_x = np.flatnonzero(x0).astype(np.int64)

    f0 = np.zeros(m, dtype=np.complex128)
    if k_f:
        raw = _positive_uniform(_rng(hash64(cfg.seed, _TAG_CORRUPT_VALUES)), k_f)
        target = cfg.corruption_energy_ratio * np.linalg.norm(x0)
        f0[s_f] = raw * (target / np.linalg.norm(raw))

    b = lam * op.apply(x0) + f0
    meta = {
        "generator": "synthetic",
        "prng": PRNG_NAME,
        "ratio": cfg.corruption_energy_ratio,
        "seed": cfg.seed,
        "theta_f": cfg.theta_f,
        "theta_m": cfg.theta_m,
    }
    return ProblemInstance(
        n=n, m=m, lam=float(lam), operator=op,
        x0=x0, f0=f0, b=b,
        s_x=s_x, s_f=s_f,
        sigma_x=complex_sign(x0[s_x]), sigma_f=complex_sign(f0[s_f]),
        meta=meta,
    )


def random_instance(n: int, m: int, k_x: int, k_f: int, seed: int,
                    lam: float = 1.0, ratio: float = 100.0,
                    values: str = "complex",
                    conjugated: bool = False) -> ProblemInstance:
    """Instance with explicit support sizes and uniformly random supports.

    Unlike :func:`generate_synthetic` the signal support is a uniform
    random subset (not a block) and entries may be complex Gaussian, so
    arbitrary sign patterns get exercised.  ``values`` is "complex" or
    "positive".
    """
    if not (1 <= m <= n):
        raise ValueError("need 1 <= m <= n")
    if not (1 <= k_x < n):
        raise ValueError("need 1 <= k_x < n")
    if not (0 <= k_f <= m):
        raise ValueError("need 0 <= k_f <= m")
    if values not in ("complex", "positive"):
        raise ValueError("values must be 'complex' or 'positive'")

    op = PartialFourierOperator(n, sample_random_subset(n, m, hash64(seed, _TAG_ROWS)),
                                conjugated=conjugated)
    s_x = sample_random_subset(n, k_x, hash64(seed, _TAG_SIGNAL_SUPPORT))
    if k_f:
        s_f = sample_random_subset(m, k_f, hash64(seed, _TAG_CORRUPT_SUPPORT))
    else:
        s_f = np.empty(0, dtype=np.int64)

    def draw(rng, size):
        if values == "complex":
            v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            # keep entries bounded away from zero so supports are clean
            return complex_sign(v) * (0.1 + np.abs(v))
        return _positive_uniform(rng, size).astype(np.complex128)

    x0 = np.zeros(n, dtype=np.complex128)
    x0[s_x] = draw(_rng(hash64(seed, _TAG_SIGNAL_VALUES)), k_x)
    f0 = np.zeros(m, dtype=np.complex128)
    if k_f:
        raw = draw(_rng(hash64(seed, _TAG_CORRUPT_VALUES)), k_f)
        f0[s_f] = raw * (ratio * np.linalg.norm(x0) / np.linalg.norm(raw))

    b = lam * op.apply(x0) + f0
    meta = {"generator": "random", "prng": PRNG_NAME, "ratio": ratio, "seed": seed}
    return ProblemInstance(
        n=n, m=m, lam=float(lam), operator=op,
        x0=x0, f0=f0, b=b,
        s_x=s_x, s_f=s_f,
        sigma_x=complex_sign(x0[s_x]), sigma_f=complex_sign(f0[s_f]),
        meta=meta,
    )


# ---------------------------------------------------------------------------
# metrics


def rre(x_hat, f_hat, x0, f0) -> float:
    """Relative recovery error of the stacked pair (x, f)."""
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    f_hat = np.asarray(f_hat, dtype=np.complex128)
    x0 = np.asarray(x0, dtype=np.complex128)
    f0 = np.asarray(f0, dtype=np.complex128)
    denom = math.hypot(np.linalg.norm(x0), np.linalg.norm(f0))
    if denom == 0:
        raise ValueError("ground truth is identically zero")
    num = math.hypot(np.linalg.norm(x_hat - x0), np.linalg.norm(f_hat - f0))
    return num / denom


def srre(x_hat, x_ref) -> float:
    """Relative error of a signal estimate against a reference signal."""
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    x_ref = np.asarray(x_ref, dtype=np.complex128)
    denom = np.linalg.norm(x_ref)
    if denom == 0:
        raise ValueError("reference signal is identically zero")
    return float(np.linalg.norm(x_hat - x_ref) / denom)


def best_kterm_error(y, k: int) -> float:
    """l1 norm of everything outside the k largest-modulus entries."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1:
        raise ValueError("expected a 1-d vector")
    if not (0 <= k <= y.size):
        raise ValueError(f"k must lie in [0, {y.size}]")
    if k == y.size:
        return 0.0
    moduli = np.sort(np.abs(y))
    return float(moduli[: y.size - k].sum())


def ksparse_indicator(y, k: int) -> float:
    """best_kterm_error normalized by ||y||_2; 0 iff y is k-sparse."""
    y = np.asarray(y, dtype=np.complex128)
    norm = np.linalg.norm(y)
    if norm == 0:
        raise ValueError("indicator undefined for the zero vector")
    return best_kterm_error(y, k) / float(norm)


# ---------------------------------------------------------------------------
# instance files: line-oriented text, exact float round trip

_MAGIC = "corrupt-recover-instance v1"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _fmt_complex(z: complex) -> str:
    return f"{_fmt(z.real)},{_fmt(z.imag)}"


def _parse_complex(line: str) -> complex:
    re_s, im_s = line.split(",")
    return complex(float(re_s), float(im_s))


def save_instance(inst: ProblemInstance, path) -> None:
    header = {
        "n": inst.n,
        "m": inst.m,
        "lambda": _fmt(inst.lam),
        "conjugated": int(inst.operator.conjugated),
    }
    for key in sorted(inst.meta):
        val = inst.meta[key]
        header[key] = _fmt(val) if isinstance(val, float) else val
    lines = [_MAGIC, " ".join(f"{k}={v}" for k, v in header.items())]

    def section(name, rows):
        lines.append(f"[{name}]")
        lines.extend(rows)

    section("lambda_rows", (str(i) for i in inst.operator.lambda_rows))
    if inst.s_x is not None:
        section("s_x", (str(i) for i in inst.s_x))
    if inst.s_f is not None:
        section("s_f", (str(i) for i in inst.s_f))
    if inst.x0 is not None:
        section("x0", (_fmt_complex(z) for z in inst.x0))
    if inst.f0 is not None:
        section("f0", (_fmt_complex(z) for z in inst.f0))
    section("b", (_fmt_complex(z) for z in inst.b))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0] != _MAGIC:
        raise ValueError(f"{path}: not a recognized instance file")
    header = {}
    for tok in raw[1].split():
        key, _, val = tok.partition("=")
        header[key] = val
    try:
        n = int(header["n"])
        m = int(header["m"])
        lam = float(header["lambda"])
        conjugated = bool(int(header.get("conjugated", "0")))
    except KeyError as exc:
        raise ValueError(f"{path}: missing header key {exc}") from exc

    sections: dict[str, list[str]] = {}
    current = None
    for line in raw[2:]:
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is None:
            raise ValueError(f"{path}: content before first section")
        else:
            sections[current].append(line)

    if "lambda_rows" not in sections or "b" not in sections:
        raise ValueError(f"{path}: lambda_rows and b sections are required")
    rows = np.array([int(s) for s in sections["lambda_rows"]], dtype=np.int64)
    op = PartialFourierOperator(n, rows, conjugated=conjugated)
    if rows.size != m:
        raise ValueError(f"{path}: header m disagrees with lambda_rows")

    def vec(name, size):
        if name not in sections:
            return None
        vals = np.array([_parse_complex(s) for s in sections[name]], dtype=np.complex128)
        if vals.size != size:
            raise ValueError(f"{path}: section {name} has wrong length")
        return vals

    def idx(name):
        if name not in sections:
            return None
        return np.array([int(s) for s in sections[name]], dtype=np.int64)

    x0 = vec("x0", n)
    f0 = vec("f0", m)
    b = vec("b", m)
    s_x = idx("s_x")
    s_f = idx("s_f")
    if s_x is None and x0 is not None:
        s_x = np.flatnonzero(x0).astype(np.int64)
    if s_f is None and f0 is not None:
        s_f = np.flatnonzero(f0).astype(np.int64)

    meta = {k: v for k, v in header.items() if k not in ("n", "m", "lambda", "conjugated")}
    return ProblemInstance(
        n=n, m=m, lam=lam, operator=op,
        x0=x0, f0=f0, b=b,
        s_x=s_x, s_f=s_f,
        sigma_x=None if (x0 is None or s_x is None) else complex_sign(x0[s_x]),
        sigma_f=None if (f0 is None or s_f is None) else complex_sign(f0[s_f]),
        meta=meta,
    )
