"""Command-line front end.

Subcommands: gen, solve, certify, phase-map, image-exp, sparsity-curve.
Options may also come from a flat config file of ``key = value`` lines
(--config); explicit flags win, unknown keys are rejected.  Every run
writes a manifest echoing the fully resolved configuration.  Exit codes:
0 success, 1 usage or input error, 2 non-convergence or a failed
certificate/condition check.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import certificate as cert
from .experiments import (ImageExpConfig, PhaseMapConfig, run_image_experiment,
                          run_phase_map, run_sparsity_curve, write_curve_csv,
                          write_curve_svg, write_grid_csv, write_grid_svg,
                          write_manifest)
from .fourier import PRNG_NAME
from .problem import ProblemInstance, SyntheticConfig, generate_synthetic, rre
from .solver import (MAX_ITER_REACHED, Solution, SolverConfig, config_digest,
                     solve)


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1 in this tool, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_float_list(text: str) -> tuple:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}")


def _parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad int list {text!r}")


def _parse_range(text: str) -> tuple:
    try:
        lo, _, hi = text.partition(":")
        out = (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected LO:HI")
    if out[0] > out[1]:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


# option name -> (type parser, default); used both for flags and config files
_OPTION_TYPES = {
    "n": int, "seed": int, "runs": int, "n_count": int, "threads": int,
    "max_iter": int, "patch_size": _parse_int_list,
    "theta_m": _parse_float_list, "theta_f": _parse_float_list,
    "lambda": float, "eta": float, "epsilon": float, "c": float,
    "ratio": float, "penalty": float, "tol_primal": float, "tol_dual": float,
    "margin": float, "success_rre": float,
    "n_mode": str, "n_range": _parse_range, "out": str, "corpus": str,
    "instance": str, "solution": str, "families": str,
}


def _read_config_file(path, known: set[str]) -> dict:
    """Flat ``key = value`` lines; '#' comments; unknown keys rejected."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise SystemExit(_fail(f"cannot read config file: {exc}"))
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if not eq or not key:
            raise SystemExit(_fail(f"config line {lineno}: expected 'key = value'"))
        if key not in known:
            raise SystemExit(_fail(f"config line {lineno}: unknown key {key!r}"))
        try:
            values[key] = _OPTION_TYPES[key](val)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise SystemExit(_fail(f"config line {lineno}: {exc}"))
    return values


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _resolve(args, defaults: dict) -> dict:
    """Merge defaults, config file and explicit flags (flags win)."""
    known = set(defaults)
    from_file = _read_config_file(args.config, known) if args.config else {}
    resolved = dict(defaults)
    resolved.update(from_file)
    for key in defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
    return resolved


def _add_options(parser, names):
    parser.add_argument("--config", help="flat key = value config file")
    for name in names:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, type=_OPTION_TYPES[name], default=None)


def _solver_config(opts) -> SolverConfig:
    cfg = SolverConfig()
    if opts.get("lambda") is not None:
        cfg.lam = opts["lambda"]
    for key, attr in (("eta", "eta"), ("penalty", "penalty"), ("max_iter", "max_iter"),
                      ("tol_primal", "tol_primal"), ("tol_dual", "tol_dual")):
        if opts.get(key) is not None:
            setattr(cfg, attr, opts[key])
    return cfg


def _ensure_out(opts) -> str:
    out = opts.get("out") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _manifest(out_dir, command, opts, extras=None, started=None):
    payload = {
        "command": command,
        "config": {k: v for k, v in sorted(opts.items())},
        "prng": PRNG_NAME,
    }
    if started is not None:
        payload["wall_time_s"] = round(time.monotonic() - started, 3)
    payload.update(extras or {})
    write_manifest(os.path.join(out_dir, f"{command.replace('-', '_')}_manifest.json"),
                   payload)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    defaults = {"n": None, "theta_m": None, "theta_f": None, "lambda": 1.0,
                "ratio": 100.0, "seed": 0, "out": "."}
    opts = _resolve(args, defaults)
    if opts["n"] is None or opts["theta_m"] is None or opts["theta_f"] is None:
        return _fail("gen requires --n, --theta-m and --theta-f")
    theta_m = opts["theta_m"][0] if isinstance(opts["theta_m"], tuple) else opts["theta_m"]
    theta_f = opts["theta_f"][0] if isinstance(opts["theta_f"], tuple) else opts["theta_f"]
    started = time.monotonic()
    try:
        inst = generate_synthetic(
            SyntheticConfig(n=opts["n"], theta_m=theta_m, theta_f=theta_f,
                            corruption_energy_ratio=opts["ratio"], seed=opts["seed"]),
            lam=opts["lambda"])
    except ValueError as exc:
        return _fail(str(exc))
    out = _ensure_out(opts)
    path = os.path.join(out, "instance.txt")
    inst.save(path)
    _manifest(out, "gen", opts, {"outputs": [path]}, started)
    print(f"wrote {path}: n={inst.n} m={inst.m} s_x={inst.s_x.size} s_f={inst.s_f.size}")
    return 0


def cmd_solve(args) -> int:
    defaults = {"instance": None, "lambda": None, "eta": 0.0, "penalty": None,
                "max_iter": None, "tol_primal": None, "tol_dual": None, "out": "."}
    opts = _resolve(args, defaults)
    if not opts["instance"]:
        return _fail("solve requires --instance")
    started = time.monotonic()
    try:
        inst = ProblemInstance.load(opts["instance"])
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    cfg = _solver_config(opts)
    if opts.get("lambda") is None:
        cfg.lam = inst.lam
    try:
        sol = solve(inst.operator, inst.b, cfg)
    except ValueError as exc:
        return _fail(str(exc))
    out = _ensure_out(opts)
    path = os.path.join(out, "solution.txt")
    sol.save(path)
    _manifest(out, "solve", opts,
              {"outputs": [path], "solver_digest": config_digest(cfg),
               "status": sol.status, "iterations": sol.iterations},
              started)
    print(f"status={sol.status} iterations={sol.iterations} "
          f"objective={sol.objective:.12g}")
    if inst.x0 is not None and inst.f0 is not None:
        err = rre(sol.x_hat, sol.f_hat, inst.x0, inst.f0)
        print(f"rre={err:.17g}")
    return 2 if sol.status == MAX_ITER_REACHED else 0


def cmd_certify(args) -> int:
    defaults = {"instance": None, "solution": None, "epsilon": 0.1, "c": 0.5,
                "margin": 1e-6, "out": "."}
    opts = _resolve(args, defaults)
    if not opts["instance"]:
        return _fail("certify requires --instance")
    started = time.monotonic()
    try:
        inst = ProblemInstance.load(opts["instance"])
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    if opts["solution"]:
        try:
            sol = Solution.load(opts["solution"])
        except (OSError, ValueError) as exc:
            return _fail(str(exc))
        x_cand, f_cand = sol.x_hat, sol.f_hat
    elif inst.x0 is not None and inst.f0 is not None:
        x_cand, f_cand = inst.x0, inst.f0
    else:
        return _fail("instance has no ground truth; pass --solution")

    # supports and signs under test come from the candidate pair
    s_x = cert.detect_support(x_cand)
    s_f = cert.detect_support(f_cand)
    shadow = ProblemInstance(
        n=inst.n, m=inst.m, lam=inst.lam, operator=inst.operator,
        x0=x_cand, f0=f_cand, b=inst.b, s_x=s_x, s_f=s_f,
        sigma_x=(x_cand[s_x] / np.abs(x_cand[s_x])) if s_x.size else np.empty(0, np.complex128),
        sigma_f=(f_cand[s_f] / np.abs(f_cand[s_f])) if s_f.size else np.empty(0, np.complex128),
        meta=inst.meta)

    try:
        report = cert.check_recovery_conditions(shadow, opts["epsilon"], opts["c"])
    except ValueError as exc:
        return _fail(str(exc))
    verdict = cert.verify_dual_certificate(shadow, x_cand, f_cand,
                                           required_margin=opts["margin"])
    report.conditions.append(cert.ConditionRecord(
        "dual_certificate_margin", verdict.margin, opts["margin"], verdict.passed,
        note=verdict.reason))

    sfc = inst.m - s_f.size
    k = sfc - s_x.size
    xi_note = "skipped"
    if k >= 1 and sfc >= 1:
        d = sfc + (inst.n - s_x.size)
        if math.comb(d, k) <= cert.SUBSET_ENUMERATION_GUARD:
            phi, _ = cert.build_reduced_system(shadow)
            report.xi_k = cert.sparse_projection_norm(phi, k)
            xi_note = format(report.xi_k, ".17g")
            report.conditions.append(cert.ConditionRecord(
                "xi_k_contractive", report.xi_k, 1.0, report.xi_k < 1.0,
                note=f"c_candidate={1.0 - report.xi_k:.6g}"))
            if report.reduced_solution is not None:
                norm_check = cert.check_reduced_norm_condition(
                    report.reduced_solution, report.xi_k, k)
                report.conditions.append(cert.ConditionRecord(
                    "reduced_norm_threshold_route", norm_check.lhs_threshold_route,
                    norm_check.rhs, norm_check.passed_threshold_route))
                report.conditions.append(cert.ConditionRecord(
                    "reduced_norm_plain_route", norm_check.lhs_plain_route,
                    norm_check.rhs, norm_check.passed_plain_route))

    out = _ensure_out(opts)
    path = os.path.join(out, "certificate_report.txt")
    report.save(path)
    _manifest(out, "certify", opts,
              {"outputs": [path], "certificate_passed": verdict.passed,
               "xi_k": xi_note}, started)
    print(f"wrote {path}")
    print(f"certificate={'pass' if verdict.passed else 'fail'} "
          f"margin={verdict.margin:.6g} b_full_rank={verdict.rank.full_rank}")
    return 0 if verdict.passed else 2


def cmd_phase_map(args) -> int:
    defaults = {"theta_m": None, "theta_f": None, "n_mode": "primes",
                "n_range": None, "n_count": 20, "runs": 25, "seed": 0,
                "lambda": 1.0, "ratio": 100.0, "success_rre": 1e-8,
                "threads": None, "out": ".", "max_iter": None,
                "tol_primal": None, "tol_dual": None, "penalty": None, "eta": 0.0}
    opts = _resolve(args, defaults)
    if opts["n_range"] is None:
        # non-prime sweeps default to the narrower range
        opts["n_range"] = (128, 512) if opts["n_mode"] == "primes" else (128, 256)
    started = time.monotonic()
    cfg = PhaseMapConfig(
        n_mode=opts["n_mode"], n_range=opts["n_range"], n_count=opts["n_count"],
        runs_per_triple=opts["runs"], success_rre=opts["success_rre"],
        master_seed=opts["seed"], lam=opts["lambda"],
        corruption_energy_ratio=opts["ratio"], solver=_solver_config(opts))
    if opts["theta_m"]:
        cfg.theta_m_grid = opts["theta_m"]
    if opts["theta_f"]:
        cfg.theta_f_grid = opts["theta_f"]
    try:
        grid = run_phase_map(cfg, workers=opts["threads"], progress=True)
    except ValueError as exc:
        return _fail(str(exc))
    out = _ensure_out(opts)
    csv_path = os.path.join(out, "phase_map.csv")
    svg_path = os.path.join(out, "phase_map.svg")
    write_grid_csv(grid, csv_path)
    write_grid_svg(grid, svg_path, title="success rate")
    _manifest(out, "phase-map", opts,
              {"outputs": [csv_path, svg_path], "grid_metadata": grid.metadata},
              started)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def cmd_image_exp(args) -> int:
    defaults = {"corpus": None, "patch_size": (8, 16, 32), "theta_m": None,
                "theta_f": None, "runs": 200, "seed": 0, "ratio": 100.0,
                "threads": None, "out": ".", "max_iter": None,
                "tol_primal": None, "tol_dual": None, "penalty": None, "eta": 0.0}
    opts = _resolve(args, defaults)
    if not opts["corpus"]:
        return _fail("image-exp requires --corpus pointing at a grayscale image directory")
    if not os.path.isdir(opts["corpus"]):
        return _fail(f"corpus directory not found: {opts['corpus']}")
    started = time.monotonic()
    solver_cfg = ImageExpConfig().solver
    override = _solver_config(opts)
    for key in ("eta", "penalty", "max_iter", "tol_primal", "tol_dual"):
        if opts.get(key) is not None:
            setattr(solver_cfg, key, getattr(override, key))
    cfg = ImageExpConfig(
        corpus_dir=opts["corpus"], patch_sizes=opts["patch_size"],
        patches_per_cell=opts["runs"], master_seed=opts["seed"],
        corruption_energy_ratio=opts["ratio"], solver=solver_cfg)
    if opts["theta_m"]:
        cfg.theta_m_grid = opts["theta_m"]
    if opts["theta_f"]:
        cfg.theta_f_grid = opts["theta_f"]
    try:
        grids = run_image_experiment(cfg, workers=opts["threads"], progress=True)
    except ValueError as exc:
        return _fail(str(exc))
    out = _ensure_out(opts)
    outputs = []
    for size, grid in grids.items():
        csv_path = os.path.join(out, f"image_srre_{size}.csv")
        svg_path = os.path.join(out, f"image_srre_{size}.svg")
        write_grid_csv(grid, csv_path)
        write_grid_svg(grid, svg_path, title=f"mean SRRE, {size}x{size} patches")
        outputs += [csv_path, svg_path]
    _manifest(out, "image-exp", opts, {"outputs": outputs}, started)
    print("wrote " + ", ".join(outputs))
    return 0


def cmd_sparsity_curve(args) -> int:
    defaults = {"families": "gaussian,synthetic-sparse,image-spectrum",
                "n": 1024, "runs": 200, "seed": 0, "corpus": None,
                "patch_size": None, "out": "."}
    opts = _resolve(args, defaults)
    families = [f.strip() for f in opts["families"].split(",") if f.strip()]
    if "image-spectrum" in families and not opts["corpus"]:
        families = [f for f in families if f != "image-spectrum"]
        print("no corpus given; dropping the image-spectrum family", file=sys.stderr)
    if not families:
        return _fail("no families left to sample")
    patch = opts["patch_size"]
    patch_size = patch[0] if isinstance(patch, tuple) else patch
    started = time.monotonic()
    try:
        ks, curves = run_sparsity_curve(families, opts["n"], samples=opts["runs"],
                                        seed=opts["seed"], corpus_dir=opts["corpus"],
                                        patch_size=patch_size)
    except ValueError as exc:
        return _fail(str(exc))
    out = _ensure_out(opts)
    csv_path = os.path.join(out, "sparsity_curve.csv")
    svg_path = os.path.join(out, "sparsity_curve.svg")
    write_curve_csv(ks, curves, opts["n"], csv_path)
    write_curve_svg(ks, curves, opts["n"], svg_path)
    _manifest(out, "sparsity-curve", opts, {"outputs": [csv_path, svg_path]}, started)
    print(f"wrote {csv_path} and {svg_path}")
    return 0


# ---------------------------------------------------------------------------


_SUBCOMMANDS = {
    "gen": (cmd_gen, ["n", "theta_m", "theta_f", "lambda", "ratio", "seed", "out"]),
    "solve": (cmd_solve, ["instance", "lambda", "eta", "penalty", "max_iter",
                          "tol_primal", "tol_dual", "out"]),
    "certify": (cmd_certify, ["instance", "solution", "epsilon", "c", "margin", "out"]),
    "phase-map": (cmd_phase_map, ["theta_m", "theta_f", "n_mode", "n_range",
                                  "n_count", "runs", "seed", "lambda", "ratio",
                                  "success_rre", "threads", "out", "max_iter",
                                  "tol_primal", "tol_dual", "penalty", "eta"]),
    "image-exp": (cmd_image_exp, ["corpus", "patch_size", "theta_m", "theta_f",
                                  "runs", "seed", "ratio", "threads", "out",
                                  "max_iter", "tol_primal", "tol_dual", "penalty",
                                  "eta"]),
    "sparsity-curve": (cmd_sparsity_curve, ["families", "n", "runs", "seed",
                                            "corpus", "patch_size", "out"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corrupt-recover",
                     description="sparse recovery from corrupted Fourier samples")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (_, options) in _SUBCOMMANDS.items():
        sub = subs.add_parser(name)
        _add_options(sub, options)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = _SUBCOMMANDS[args.command][0]
    try:
        return handler(args)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
