"""Phase maps, image-domain benchmarks, sparsity curves, grid CSV/SVG IO.

Every trial gets a seed derived from its grid position alone, so cells
replay independently of scheduling; trials are independent work items
that can be fanned out over a process pool (size from the
CORRUPT_RECOVER_THREADS environment variable unless given explicitly).
"""

from __future__ import annotations

import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .fourier import PRNG_NAME, PartialFourierOperator, dft, sample_random_subset
from .primes import nonprimes_in_range, primes_in_range
from .problem import (SyntheticConfig, generate_synthetic, round_half_away,
                      rre, signal_support_size, srre, synthetic_signal)
from .seeding import hash64
from .solver import SolverConfig, config_digest, solve

log = logging.getLogger(__name__)

THREADS_ENV_VAR = "CORRUPT_RECOVER_THREADS"

DEFAULT_THETA_M = tuple(round(0.1 * i, 1) for i in range(1, 11))
DEFAULT_THETA_F = (0.05, 0.15, 0.25, 0.35)

# reserved child-stream tags (instance generation uses 0..4)
_TAG_DIMENSIONS = 101
_TAG_FILE_PICK = 102
_TAG_PATCH_CORNER = 103
_TAG_ROWS = 104
_TAG_CORRUPT_SUPPORT = 105
_TAG_CORRUPT_VALUES = 106

_FAMILY_TAGS = {"gaussian": 201, "synthetic-sparse": 202, "image-spectrum": 203}

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".pgm")


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV_VAR, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV_VAR, env)
    return 1


def _map_trials(fn, payloads, workers: int):
    if workers <= 1 or len(payloads) < 2:
        yield from map(fn, payloads)
        return
    chunk = max(1, len(payloads) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, payloads, chunksize=chunk)


@dataclass(eq=False)
class PhaseGrid:
    theta_m: tuple
    theta_f: tuple
    values: np.ndarray   # rows follow theta_m, columns theta_f
    runs: np.ndarray
    skipped: np.ndarray
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# success-rate phase map over the synthetic ensemble


@dataclass(eq=False)
class PhaseMapConfig:
    theta_m_grid: tuple = DEFAULT_THETA_M
    theta_f_grid: tuple = DEFAULT_THETA_F
    n_mode: str = "primes"            # or "nonprimes"
    n_range: tuple = (128, 512)
    n_count: int = 20
    runs_per_triple: int = 25
    success_rre: float = 1e-8
    master_seed: int = 0
    lam: float = 1.0
    corruption_energy_ratio: float = 100.0
    solver: SolverConfig = field(default_factory=SolverConfig)


def draw_dimensions(cfg: PhaseMapConfig) -> list[int]:
    """Seeded sample of n_count dimensions from the configured pool."""
    lo, hi = cfg.n_range
    if cfg.n_mode == "primes":
        pool = primes_in_range(lo, hi)
    elif cfg.n_mode == "nonprimes":
        pool = nonprimes_in_range(lo, hi)
    else:
        raise ValueError(f"unknown n_mode {cfg.n_mode!r}")
    if len(pool) < cfg.n_count:
        raise ValueError(f"only {len(pool)} candidate dimensions in {cfg.n_range}, "
                         f"need {cfg.n_count}")
    picks = sample_random_subset(len(pool), cfg.n_count,
                                 hash64(cfg.master_seed, _TAG_DIMENSIONS))
    return [pool[i] for i in picks]


def _phase_trial(payload):
    (row, col, n, theta_m, theta_f, ratio, lam, seed, solver_cfg, success_rre) = payload
    try:
        inst = generate_synthetic(
            SyntheticConfig(n=n, theta_m=theta_m, theta_f=theta_f,
                            corruption_energy_ratio=ratio, seed=seed), lam)
    except ValueError:
        return row, col, "skipped"
    if inst.s_x.size >= inst.m:
        return row, col, "skipped"
    sol = solve(inst.operator, inst.b, replace(solver_cfg, lam=lam))
    err = rre(sol.x_hat, sol.f_hat, inst.x0, inst.f0)
    return row, col, "success" if err < success_rre else "failure"


def run_phase_map(cfg: PhaseMapConfig, workers: int | None = None,
                  progress: bool = False) -> PhaseGrid:
    """Success-rate grid over (theta_m, theta_f).

    Cell value is the success fraction over executed trials; trials
    whose configuration is infeasible after rounding are counted as
    skipped, never averaged in.  Per-trial seeds depend only on
    (master_seed, cell position, dimension index, run index).
    """
    workers = resolve_workers(workers)
    dims = draw_dimensions(cfg)
    payloads = []
    for i, tm in enumerate(cfg.theta_m_grid):
        for j, tf in enumerate(cfg.theta_f_grid):
            for ni in range(len(dims)):
                for r in range(cfg.runs_per_triple):
                    seed = hash64(cfg.master_seed, i, j, ni, r)
                    payloads.append((i, j, dims[ni], tm, tf,
                                     cfg.corruption_energy_ratio, cfg.lam, seed,
                                     cfg.solver, cfg.success_rre))
    shape = (len(cfg.theta_m_grid), len(cfg.theta_f_grid))
    successes = np.zeros(shape)
    runs = np.zeros(shape, dtype=np.int64)
    skipped = np.zeros(shape, dtype=np.int64)
    done = 0
    for row, col, outcome in _map_trials(_phase_trial, payloads, workers):
        if outcome == "skipped":
            skipped[row, col] += 1
        else:
            runs[row, col] += 1
            if outcome == "success":
                successes[row, col] += 1
        done += 1
        if progress and (done % 50 == 0 or done == len(payloads)):
            print(f"phase-map: {done}/{len(payloads)} trials", file=sys.stderr, flush=True)

    values = np.full(shape, np.nan)
    np.divide(successes, runs, out=values, where=runs > 0)
    metadata = {
        "experiment": "phase_map",
        "master_seed": cfg.master_seed,
        "n_mode": cfg.n_mode,
        "n_range": list(cfg.n_range),
        "dimensions": dims,
        "runs_per_triple": cfg.runs_per_triple,
        "lambda": cfg.lam,
        "success_rre": cfg.success_rre,
        "prng": PRNG_NAME,
        "solver_digest": config_digest(cfg.solver),
    }
    return PhaseGrid(tuple(cfg.theta_m_grid), tuple(cfg.theta_f_grid),
                     values, runs, skipped, metadata)


# ---------------------------------------------------------------------------
# image-domain benchmark: recover patch spectra from corrupted samples


@dataclass(eq=False)
class ImageExpConfig:
    corpus_dir: str = ""
    patch_sizes: tuple = (8, 16, 32)
    theta_m_grid: tuple = DEFAULT_THETA_M
    theta_f_grid: tuple = DEFAULT_THETA_F
    patches_per_cell: int = 200
    master_seed: int = 0
    corruption_energy_ratio: float = 100.0
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(
        tol_primal=1e-9, tol_dual=1e-9, max_iter=20_000))


def list_corpus(corpus_dir) -> list[str]:
    try:
        names = sorted(os.listdir(corpus_dir))
    except OSError as exc:
        raise ValueError(f"cannot read corpus directory {corpus_dir}: {exc}") from exc
    files = [os.path.join(corpus_dir, f) for f in names
             if f.lower().endswith(_IMAGE_SUFFIXES)]
    if not files:
        raise ValueError(f"no image files found under {corpus_dir}")
    return files


def load_grayscale_patch(path, size: int, seed: int) -> np.ndarray:
    """Random size*size grayscale patch from one image, flattened row-major.

    Values are scaled to [0, 1] (255 maps to 1.0); the top-left corner
    is uniform over all valid positions under the given seed.  Raises
    ValueError when the image decodes smaller than the patch.
    """
    from PIL import Image

    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
    h, w = gray.shape
    if h < size or w < size:
        raise ValueError(f"{path}: image {h}x{w} smaller than patch {size}x{size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    top = int(rng.integers(0, h - size + 1))
    left = int(rng.integers(0, w - size + 1))
    return gray[top:top + size, left:left + size].reshape(-1)


def _image_trial(payload):
    (row, col, size, theta_m, theta_f, ratio, seed, files, solver_cfg) = payload
    n = size * size
    m = round_half_away(theta_m * n)
    k_f = round_half_away(theta_f * m)
    if m < 1 or k_f > m:
        return row, col, "skipped", 0.0
    pick = np.random.Generator(np.random.PCG64(hash64(seed, _TAG_FILE_PICK)))
    path = files[int(pick.integers(0, len(files)))]
    try:
        patch = load_grayscale_patch(path, size, hash64(seed, _TAG_PATCH_CORNER))
    except (ValueError, OSError) as exc:
        log.warning("skipping patch draw: %s", exc)
        return row, col, "skipped", 0.0

    spectrum = dft(patch)
    ref_norm = np.linalg.norm(spectrum)
    if ref_norm == 0.0:
        return row, col, "skipped", 0.0

    op = PartialFourierOperator(
        n, sample_random_subset(n, m, hash64(seed, _TAG_ROWS)), conjugated=True)
    f0 = np.zeros(m, dtype=np.complex128)
    if k_f:
        s_f = sample_random_subset(m, k_f, hash64(seed, _TAG_CORRUPT_SUPPORT))
        rng_f = np.random.Generator(np.random.PCG64(hash64(seed, _TAG_CORRUPT_VALUES)))
        raw = 1.0 - rng_f.random(k_f)
        f0[s_f] = raw * (ratio * ref_norm / np.linalg.norm(raw))
    b = op.apply(spectrum) + f0
    sol = solve(op, b, replace(solver_cfg, lam=1.0))
    return row, col, "done", srre(sol.x_hat, spectrum)


def run_image_experiment(cfg: ImageExpConfig, workers: int | None = None,
                         progress: bool = False) -> dict[int, PhaseGrid]:
    """Mean spectral relative error per (theta_m, theta_f) cell and patch size.

    Measurements are spatial-domain samples of the patch plus sparse
    corruption; the unknown is the patch's unitary DFT, sensed through
    the conjugated operator with lam = 1.
    """
    if not cfg.corpus_dir:
        raise ValueError("corpus_dir is required")
    files = tuple(list_corpus(cfg.corpus_dir))
    workers = resolve_workers(workers)
    out: dict[int, PhaseGrid] = {}
    for size in cfg.patch_sizes:
        payloads = []
        for i, tm in enumerate(cfg.theta_m_grid):
            for j, tf in enumerate(cfg.theta_f_grid):
                for p in range(cfg.patches_per_cell):
                    seed = hash64(cfg.master_seed, size, i, j, p)
                    payloads.append((i, j, size, tm, tf,
                                     cfg.corruption_energy_ratio, seed, files,
                                     cfg.solver))
        shape = (len(cfg.theta_m_grid), len(cfg.theta_f_grid))
        total = np.zeros(shape)
        runs = np.zeros(shape, dtype=np.int64)
        skipped = np.zeros(shape, dtype=np.int64)
        done = 0
        for row, col, outcome, err in _map_trials(_image_trial, payloads, workers):
            if outcome == "skipped":
                skipped[row, col] += 1
            else:
                runs[row, col] += 1
                total[row, col] += err
            done += 1
            if progress and (done % 20 == 0 or done == len(payloads)):
                print(f"image-exp size {size}: {done}/{len(payloads)} patches",
                      file=sys.stderr, flush=True)
        values = np.full(shape, np.nan)
        np.divide(total, runs, out=values, where=runs > 0)
        metadata = {
            "experiment": "image_srre",
            "patch_size": size,
            "master_seed": cfg.master_seed,
            "patches_per_cell": cfg.patches_per_cell,
            "corpus_files": len(files),
            "lambda": 1.0,
            "prng": PRNG_NAME,
            "solver_digest": config_digest(cfg.solver),
        }
        out[size] = PhaseGrid(tuple(cfg.theta_m_grid), tuple(cfg.theta_f_grid),
                              values, runs, skipped, metadata)
    return out


# ---------------------------------------------------------------------------
# compressibility curves


def run_sparsity_curve(families, n: int, samples: int = 200, seed: int = 0,
                       corpus_dir: str | None = None,
                       patch_size: int | None = None) -> tuple[np.ndarray, dict]:
    """Mean k-sparse indicator over k = 1..n for each signal family.

    Families: "gaussian" (real iid standard normal), "synthetic-sparse"
    (the block-sparse positive ensemble) and "image-spectrum" (unitary
    DFT of random grayscale patches; needs corpus_dir, and patch_size
    squared must equal n).
    """
    families = list(families)
    for fam in families:
        if fam not in _FAMILY_TAGS:
            raise ValueError(f"unknown family {fam!r}")
    files = None
    if "image-spectrum" in families:
        if not corpus_dir:
            raise ValueError("image-spectrum family requires a corpus")
        size = patch_size if patch_size is not None else int(round(math.sqrt(n)))
        if size * size != n:
            raise ValueError("patch_size**2 must equal n for image spectra")
        files = list_corpus(corpus_dir)

    ks = np.arange(1, n + 1)
    curves: dict[str, np.ndarray] = {}
    for fam in families:
        acc = np.zeros(n)
        used = 0
        for i in range(samples):
            s = hash64(seed, _FAMILY_TAGS[fam], i)
            if fam == "gaussian":
                y = np.random.Generator(np.random.PCG64(s)).standard_normal(n)
            elif fam == "synthetic-sparse":
                y = synthetic_signal(n, s)
            else:
                pick = np.random.Generator(np.random.PCG64(hash64(s, _TAG_FILE_PICK)))
                path = files[int(pick.integers(0, len(files)))]
                try:
                    patch = load_grayscale_patch(path, size, hash64(s, _TAG_PATCH_CORNER))
                except (ValueError, OSError) as exc:
                    log.warning("skipping spectrum draw: %s", exc)
                    continue
                if not np.any(patch):
                    continue
                y = dft(patch)
            norm = np.linalg.norm(y)
            moduli = np.sort(np.abs(np.asarray(y, dtype=np.complex128)))
            prefix = np.concatenate([[0.0], np.cumsum(moduli)])
            acc += prefix[n - ks] / norm
            used += 1
        if used == 0:
            raise ValueError(f"no usable samples for family {fam!r}")
        curves[fam] = acc / used
    return ks, curves


# ---------------------------------------------------------------------------
# synthetic stand-in corpus (piecewise-smooth grayscale images)


def synthesize_corpus(dir_path, count: int = 20, size: int = 128, seed: int = 0) -> list[str]:
    """Write piecewise-smooth grayscale PNGs for corpus-driven runs.

    Smooth cosine backgrounds plus soft-edged ellipses, mildly blurred;
    a stand-in with natural-image-like compressible spectra for when no
    photographic corpus is mounted.
    """
    from PIL import Image

    os.makedirs(dir_path, exist_ok=True)
    paths = []
    yy, xx = np.mgrid[0:size, 0:size] / float(size)
    for i in range(count):
        rng = np.random.Generator(np.random.PCG64(hash64(seed, 301, i)))
        img = np.zeros((size, size))
        for _ in range(3):
            fx, fy = rng.uniform(0.5, 3.0, size=2)
            phase = rng.uniform(0, 2 * np.pi)
            img += rng.uniform(0.1, 0.4) * np.cos(2 * np.pi * (fx * xx + fy * yy) + phase)
        img += rng.uniform(-0.5, 0.5) * (xx - 0.5) + rng.uniform(-0.5, 0.5) * (yy - 0.5)
        for _ in range(int(rng.integers(2, 5))):
            cx, cy = rng.uniform(0.15, 0.85, size=2)
            rx, ry = rng.uniform(0.05, 0.3, size=2)
            d = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2
            img += rng.uniform(-0.6, 0.6) / (1.0 + np.exp(np.clip(40.0 * (d - 1.0), -60.0, 60.0)))
        kernel = np.ones(3) / 3.0
        img = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, img)
        img = np.apply_along_axis(lambda c: np.convolve(c, kernel, mode="same"), 0, img)
        lo, hi = img.min(), img.max()
        img = 0.05 + 0.9 * (img - lo) / (hi - lo if hi > lo else 1.0)
        path = os.path.join(dir_path, f"synthetic_{i:03d}.png")
        Image.fromarray((img * 255).astype(np.uint8), mode="L").save(path)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# grid CSV and SVG emission


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_grid_csv(grid: PhaseGrid, path) -> None:
    """theta_m,theta_f,value,runs,skipped; one row per cell, row-major."""
    lines = ["theta_m,theta_f,value,runs,skipped"]
    for i, tm in enumerate(grid.theta_m):
        for j, tf in enumerate(grid.theta_f):
            lines.append(f"{_fmt(tm)},{_fmt(tf)},{_fmt(grid.values[i, j])},"
                         f"{int(grid.runs[i, j])},{int(grid.skipped[i, j])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> PhaseGrid:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "theta_m,theta_f,value,runs,skipped":
        raise ValueError(f"{path}: unexpected CSV header")
    rows = [line.split(",") for line in lines[1:] if line]
    theta_m = sorted({float(r[0]) for r in rows})
    theta_f = sorted({float(r[1]) for r in rows})
    index_m = {v: i for i, v in enumerate(theta_m)}
    index_f = {v: j for j, v in enumerate(theta_f)}
    shape = (len(theta_m), len(theta_f))
    values = np.full(shape, np.nan)
    runs = np.zeros(shape, dtype=np.int64)
    skipped = np.zeros(shape, dtype=np.int64)
    for r in rows:
        i, j = index_m[float(r[0])], index_f[float(r[1])]
        values[i, j] = float(r[2])
        runs[i, j] = int(r[3])
        skipped[i, j] = int(r[4])
    return PhaseGrid(tuple(theta_m), tuple(theta_f), values, runs, skipped, {})


def _ramp(value: float) -> str:
    """Monotone grayscale ramp: clamp to [0,1], larger value, larger
    (lexicographically) lowercase hex fill."""
    if math.isnan(value):
        return "#808080"
    level = int(round(255 * min(1.0, max(0.0, value))))
    return f"#{level:02x}{level:02x}{level:02x}"


def write_grid_svg(grid: PhaseGrid, path, title: str = "") -> None:
    """One rect per cell with a <title> child carrying the exact value.

    theta_m runs down the vertical axis (first row on top), theta_f
    along the horizontal axis.
    """
    cell_w, cell_h = 56, 36
    left, top, right, bottom = 96, 48, 24, 64
    nrow, ncol = len(grid.theta_m), len(grid.theta_f)
    width = left + ncol * cell_w + right
    height = top + nrow * cell_h + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    for i, tm in enumerate(grid.theta_m):
        y = top + i * cell_h
        parts.append(f'<text x="{left - 8}" y="{y + cell_h / 2 + 4:.1f}" '
                     f'text-anchor="end" font-size="11">{tm:g}</text>')
        for j, tf in enumerate(grid.theta_f):
            x = left + j * cell_w
            val = float(grid.values[i, j])
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_ramp(val)}" stroke="#404040" stroke-width="0.5">'
                f'<title>{_fmt(val)}</title></rect>')
    for j, tf in enumerate(grid.theta_f):
        x = left + j * cell_w + cell_w / 2
        parts.append(f'<text x="{x:.1f}" y="{top + nrow * cell_h + 16}" '
                     f'text-anchor="middle" font-size="11">{tf:g}</text>')
    parts.append(f'<text x="{left + ncol * cell_w / 2:.1f}" '
                 f'y="{top + nrow * cell_h + 40}" text-anchor="middle" '
                 f'font-size="12">theta_f</text>')
    mid_y = top + nrow * cell_h / 2
    parts.append(f'<text x="20" y="{mid_y:.1f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 20 {mid_y:.1f})">theta_m</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def write_curve_csv(ks: np.ndarray, curves: dict, n: int, path) -> None:
    """family,k,k_over_n,value rows, families in sorted order."""
    lines = ["family,k,k_over_n,value"]
    for fam in sorted(curves):
        curve = curves[fam]
        for k, v in zip(ks, curve):
            lines.append(f"{fam},{int(k)},{_fmt(k / n)},{_fmt(v)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_CURVE_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def write_curve_svg(ks: np.ndarray, curves: dict, n: int, path) -> None:
    width, height = 640, 420
    left, top, right, bottom = 64, 24, 24, 56
    plot_w, plot_h = width - left - right, height - top - bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#404040"/>',
    ]
    ymax = max(1e-12, max(float(np.nanmax(c)) for c in curves.values()))
    for idx, fam in enumerate(sorted(curves)):
        curve = curves[fam]
        pts = []
        for k, v in zip(ks, curve):
            x = left + plot_w * (k / n)
            y = top + plot_h * (1.0 - float(v) / ymax)
            pts.append(f"{x:.2f},{y:.2f}")
        color = _CURVE_COLORS[idx % len(_CURVE_COLORS)]
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"><title>{fam}</title></polyline>')
        parts.append(f'<text x="{left + 12}" y="{top + 18 + 16 * idx}" font-size="12" '
                     f'fill="{color}">{fam}</text>')
    parts.append(f'<text x="{left + plot_w / 2:.1f}" y="{height - 16}" '
                 f'text-anchor="middle" font-size="12">k / n</text>')
    mid_y = top + plot_h / 2
    parts.append(f'<text x="18" y="{mid_y:.1f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 18 {mid_y:.1f})">mean k-sparse indicator</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def write_manifest(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
