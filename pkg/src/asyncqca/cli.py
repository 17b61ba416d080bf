"""Command-line entry point.

Subcommands: sweep, exact, classical, map-qcp, critical, meanfield.
Exit codes: 0 success, 2 usage/config error, 3 numerical failure.

Probabilities are exposed in the parametrization used throughout the package
(q-dec is the decay probability of an isolated particle, p-coag / p-branch /
p-plus are flip probabilities of the pairwise processes). Grid-valued flags
accept `lo:hi:count`; site patterns accept `o`/`x` as ASCII aliases for the
empty/occupied symbols.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    tomllib = None

import numpy as np

from . import analysis, classical, exact, io, meanfield, qcp
from .exact import CapacityError, StateError
from .meanfield import MeanFieldError
from .params import GateParams, ParameterError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _grid(spec: str) -> np.ndarray:
    """`lo:hi:count` -> inclusive linspace; a bare number -> length-1 grid."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParameterError(f"grid spec {spec!r} is not lo:hi:count")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ParameterError("grid needs at least one point")
        return np.linspace(lo, hi, count)
    return np.array([float(spec)])


def _params_from_args(args, p_branch=None, lam=None) -> GateParams:
    return GateParams(
        p_dec=1.0 - args.q_dec,
        p_coag=args.p_coag,
        p_branch=args.p_branch if p_branch is None else p_branch,
        p_plus=args.p_plus,
        lam=args.lam if lam is None else lam,
    )


def _outdir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _param_config(args, **extra) -> dict:
    cfg = {
        "q_dec": args.q_dec, "p_coag": args.p_coag, "p_plus": args.p_plus,
        "p_branch": getattr(args, "p_branch", None), "lambda": getattr(args, "lam", None),
    }
    cfg.update(extra)
    return cfg


def cmd_sweep(args) -> int:
    lam_grid = _grid(args.lam)
    p_grid = _grid(args.p_branch)
    base = _params_from_args(args, p_branch=0.0, lam=0.0)
    pd = analysis.sweep(base, lam_grid, p_grid, iters=args.iters, threads=args.threads)
    out = _outdir(args)
    rows = [
        (lam_grid[i], p_grid[j], pd.n_inf[i, j])
        for i in range(len(lam_grid))
        for j in range(len(p_grid))
    ]
    files = [io.write_csv(out / "sweep.csv", ["lambda", "p_branch", "n_inf"], rows)]
    if args.pgm:
        # p_branch grows upward in the figure convention, so flip rows
        files.append(io.write_pgm(out / "sweep.pgm", pd.n_inf.T[::-1]))
    cfg = _param_config(args, **{"lambda": args.lam, "p_branch": args.p_branch,
                                 "iters": args.iters, "init": pd.init_label})
    io.write_manifest(out / "sweep_manifest.json", cfg, outputs=files)
    return EXIT_OK


def cmd_exact(args) -> int:
    pattern = args.pattern if args.pattern else "x" * args.L
    bits = exact.parse_pattern(pattern)
    if args.L and args.L != len(bits):
        raise ParameterError("--L disagrees with the pattern length")
    mode = {"dense": "Dense", "trajectory": "Trajectory"}[args.mode]
    cfg = exact.EvolutionConfig(order=args.order, boundary=args.boundary,
                                steps=args.steps, mode=mode,
                                n_samples=args.samples, rng_seed=args.seed)
    params = _params_from_args(args)
    series = exact.evolve(pattern, params, cfg)
    L = len(bits)
    header = ["t", "mean_density", "purity"]
    for k in range(L):
        header += [f"n_{k}", f"sx_{k}", f"sy_{k}"]
    rows = []
    for t, obs in enumerate(series):
        row = [float(t), obs.density, obs.purity]
        for k in range(L):
            row += [obs.n[k], obs.sx[k], obs.sy[k]]
        rows.append(row)
    out = _outdir(args)
    files = [io.write_csv(out / "exact.csv", header, rows)]
    run_cfg = _param_config(args, pattern=pattern, mode=args.mode, steps=args.steps,
                            samples=args.samples, boundary=args.boundary,
                            order=args.order)
    io.write_manifest(out / "exact_manifest.json", run_cfg, seed=args.seed,
                      outputs=files)
    return EXIT_OK


def cmd_classical(args) -> int:
    pattern = args.initial if args.initial else "x" * args.L
    params = _params_from_args(args)
    stats = classical.sample_statistics(args.L, args.T, args.trials, params,
                                        initial=pattern, rng_seed=args.seed,
                                        boundary=args.boundary)
    out = _outdir(args)
    rows = list(zip(stats.t, stats.density, stats.density_err,
                    stats.survival, stats.survival_err))
    files = [io.write_csv(out / "classical.csv",
                          ["t", "density", "density_err", "survival", "survival_err"],
                          rows)]
    run_cfg = _param_config(args, L=args.L, T=args.T, trials=args.trials,
                            initial=pattern, boundary=args.boundary)
    io.write_manifest(out / "classical_manifest.json", run_cfg, seed=args.seed,
                      outputs=files)
    if args.verify_exact:
        dev = _verify_against_exact(args.L, args.T, params, pattern, args.boundary)
        print(f"max-abs deviation vs exact diagonal oracle: {dev:.3e}")
    return EXIT_OK


def _verify_against_exact(L, T, params, pattern, boundary) -> float:
    """Distribution-level cross-check of the sampler's transition matrix."""
    if L > exact.DENSE_LMAX:
        raise ParameterError(f"--verify-exact needs L <= {exact.DENSE_LMAX}")
    if params.lam != 0.0:
        raise ParameterError("--verify-exact is a diagonal-channel check (lambda = 0)")
    M = classical.transition_matrix(L, params, boundary)
    bits = exact.parse_pattern(pattern)
    v = np.zeros(2 ** L)
    v[int("".join(map(str, bits)), 2)] = 1.0
    rho = exact.initial_row(pattern)
    cfg = exact.EvolutionConfig(boundary=boundary)
    dev = 0.0
    for _ in range(T):
        v = M @ v
        rho = exact.step_dense(rho, params, cfg)
        dev = max(dev, float(np.abs(np.diag(rho.rho).real - v).max()))
    return dev


def cmd_map_qcp(args) -> int:
    params = _params_from_args(args)
    # rates are read per unit time; --dt only sets the step whose
    # discretization validity is being checked
    rates = qcp.map_qca_to_qcp(params, dt=1.0)
    _, invalid = qcp.qcp_coefficients(dataclasses.replace(rates, dt=args.dt))
    doc = {
        "gamma": rates.gamma, "kappa_c": rates.kappa_c, "kappa_b": rates.kappa_b,
        "omega": rates.omega, "dt": args.dt, "g": rates.g,
        "negative_kc": rates.negative_kc, "discretization_valid": not invalid,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_critical(args) -> int:
    lam_grid = _grid(args.lam)
    base = _params_from_args(args, p_branch=0.0, lam=0.0)
    rows = []
    n_found = 0
    for lam in lam_grid:
        rep = analysis.classify_transition(lam, base, iters=args.iters)
        g_c = None
        if rep.p_c is not None and rep.p_c > 0.0:
            n_found += 1
            try:
                g_c = qcp.g_ratio(base.with_branch(rep.p_c).with_lam(lam))
            except qcp.UndefinedRatioError:
                print(f"warning: g undefined at lambda={lam:g} "
                      "(no incoherent branching)", file=sys.stderr)
        else:
            print(f"warning: no n=0.1 crossing at lambda={lam:g}", file=sys.stderr)
        rows.append((lam, rep.p_c, rep.order, rep.jump, rep.hysteresis, g_c))
    if n_found == 0:
        print("error: no critical point found on the whole lambda range",
              file=sys.stderr)
        return EXIT_NUMERICAL
    out = _outdir(args)
    files = [io.write_csv(out / "critical.csv",
                          ["lambda", "p_c", "order", "jump", "hysteresis", "g_c"],
                          rows)]
    summary = {"lambda_star": None, "g_star": None}
    try:
        lam_star = analysis.find_lambda_star(
            base, bracket=(float(lam_grid.min()), float(lam_grid.max())),
            iters=args.iters)
        rep = analysis.classify_transition(lam_star, base, iters=args.iters)
        summary["lambda_star"] = lam_star
        if rep.p_c is not None and rep.p_c > 0.0:
            try:
                summary["g_star"] = qcp.g_ratio(
                    base.with_branch(rep.p_c).with_lam(lam_star))
            except qcp.UndefinedRatioError:
                pass
    except analysis.BracketError as err:
        print(f"warning: no order change on this range ({err})", file=sys.stderr)
    (out / "critical_summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    files.append(out / "critical_summary.json")
    cfg = _param_config(args, **{"lambda": args.lam, "iters": args.iters})
    io.write_manifest(out / "critical_manifest.json", cfg, outputs=files)
    return EXIT_OK


def cmd_meanfield(args) -> int:
    params = _params_from_args(args)
    s = meanfield.MFState(args.n0, args.x0, args.y0).validate()
    rows = [(0.0, s.n, s.x, s.y)]
    for t in range(1, args.iters + 1):
        s = meanfield.mf_step_full(s, params)
        rows.append((float(t), s.n, s.x, s.y))
    out = _outdir(args)
    files = [io.write_csv(out / "meanfield.csv", ["t", "n", "x", "y"], rows)]
    cfg = _param_config(args, n0=args.n0, x0=args.x0, y0=args.y0, iters=args.iters)
    io.write_manifest(out / "meanfield_manifest.json", cfg, outputs=files)
    return EXIT_OK


def _add_param_flags(p, branch_grid=False, lam_grid=False):
    p.add_argument("--q-dec", type=float, default=0.1,
                   help="survival probability of an isolated particle (default 0.1)")
    p.add_argument("--p-coag", type=float, default=0.1)
    p.add_argument("--p-plus", type=float, default=0.1)
    if branch_grid:
        p.add_argument("--p-branch", default="0:1:201",
                       help="value or lo:hi:count grid")
    else:
        p.add_argument("--p-branch", type=float, default=0.5)
    if lam_grid:
        p.add_argument("--lambda", dest="lam", default="0:1:201",
                       help="value or lo:hi:count grid")
    else:
        p.add_argument("--lambda", dest="lam", type=float, default=0.0)


def _add_run_flags(p):
    p.add_argument("--config", help="JSON or TOML file of flag defaults")
    p.add_argument("--output-dir",
                   default=os.environ.get("ASYNCQCA_OUTDIR", "."),
                   help="defaults to $ASYNCQCA_OUTDIR or the working directory")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asyncqca", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="stationary mean-field phase diagram")
    _add_param_flags(p, branch_grid=True, lam_grid=True)
    _add_run_flags(p)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--pgm", action="store_true", help="also write a PGM heatmap")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exact", help="exact row-channel evolution")
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument("--L", type=int, default=0, help="row length (or infer from pattern)")
    p.add_argument("--pattern", default="", help="initial row, e.g. oxxo")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--mode", choices=["dense", "trajectory"], default="dense")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boundary", choices=["FixedEmpty", "Periodic"],
                   default="FixedEmpty")
    p.add_argument("--order", default="LeftToRight")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("classical", help="classical cellular-automaton sampling")
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument("--L", type=int, default=64)
    p.add_argument("--T", type=int, default=200)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--initial", default="", help="initial pattern (default all occupied)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boundary", choices=["FixedEmpty", "Periodic"],
                   default="FixedEmpty")
    p.add_argument("--verify-exact", action="store_true",
                   help="cross-check the sampler's channel against the exact diagonal")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("map-qcp", help="rate dictionary to the quantum contact process")
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument("--dt", type=float, default=1.0)
    p.set_defaults(func=cmd_map_qcp)

    p = sub.add_parser("critical", help="critical line, order classification, g")
    _add_param_flags(p, lam_grid=True)
    _add_run_flags(p)
    p.add_argument("--iters", type=int, default=1000)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("meanfield", help="dump a single mean-field iteration")
    _add_param_flags(p)
    _add_run_flags(p)
    p.add_argument("--n0", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=1000)
    p.set_defaults(func=cmd_meanfield)
    return ap


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ParameterError(f"config file {path} not found")
    if p.suffix == ".toml":
        if tomllib is None:
            raise ParameterError("TOML config files need python >= 3.11")
        return tomllib.loads(p.read_text(encoding="utf-8"))
    return json.loads(p.read_text(encoding="utf-8"))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if args.config:
            # file values become defaults; explicit flags still win on re-parse
            values = _load_config_file(args.config)
            values.pop("config", None)
            known = {a.dest for sp in ap._subparsers._group_actions
                     for a in sp.choices[args.command]._actions}
            bad = set(values) - known
            if bad:
                raise ParameterError(f"unknown config keys: {sorted(bad)}")
            ap_fresh = build_parser()
            for sp_action in ap_fresh._subparsers._group_actions:
                sp_action.choices[args.command].set_defaults(**values)
            args = ap_fresh.parse_args(argv)
        return args.func(args)
    except (ParameterError, CapacityError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (MeanFieldError, StateError, analysis.FitInvalidError,
            FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
