"""Command-line entry point: ``skpsolve {solve,multi,verify,spectrum}``.

Exit codes: 0 success, 1 invalid configuration or violated hypothesis,
2 non-convergence or a failed postcondition/check.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import ENV_PREFIX, load_config
from .domain import closed_form_eigenpairs_1d, eigenbasis
from .exceptions import CalibrationError, ConfigurationError, HypothesisViolation, ParameterError
from .export import (canonical_json, coordinate_columns, ensure_dir, envelope, write_json,
                     write_profile, write_table)
from .minimax import (FlowConfig, build_endpoints, find_sign_changing, find_signed_solution,
                      fountain_estimates, fountain_trends, mirror_residual,
                      multi_start_sign_changing)
from .minimax.report import sign_changes
from .operator import default_geometry
from .verify import format_text, run_all

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2
FOUNTAIN_K_MAX = 10


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration (overrides config file and environment)")
    g.add_argument("--config", help="flat 'key = value' configuration file")
    for flag, typ, dest in [("--a", float, "a"), ("--b", float, "b"), ("--p", float, "p"),
                            ("--alpha-plus", float, "alpha_plus"),
                            ("--alpha-minus", float, "alpha_minus"),
                            ("--dim", int, "dim"), ("--n", int, "n"), ("--m", int, "m"),
                            ("--tol", float, "tol"), ("--max-iter", int, "max_iter"),
                            ("--path-nodes", int, "path_nodes"), ("--seed", int, "seed"),
                            ("--R", float, "R"), ("--output", str, "output_dir")]:
        g.add_argument(flag, type=typ, dest=dest, default=None)
    return common


def build_parser():
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="skpsolve",
        description="Minimax solver for a Kirchhoff-type equation with a Poisson potential.",
        epilog=f"Environment variables {ENV_PREFIX}<KEY> (for example {ENV_PREFIX}B=0) "
               "override the config file; flags override both.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="compute one solution")
    s.add_argument("--branch", choices=["positive", "negative", "sign-changing"],
                   default="positive")
    mt = sub.add_parser("multi", parents=[common], help="multi-start sign-changing search")
    mt.add_argument("--k", type=int, default=3, help="tail space index (support is Y_{k-1})")
    mt.add_argument("--count", type=int, default=64, help="number of random starts")
    mt.add_argument("--workers", type=int, default=1, help="parallel starts (result unchanged)")
    v = sub.add_parser("verify", parents=[common], help="run the numerical check battery")
    v.add_argument("--json", action="store_true", help="print the report as JSON")
    sub.add_parser("spectrum", parents=[common], help="export eigenpairs and level estimates")
    return parser


_CONFIG_KEYS = ("a", "b", "p", "alpha_plus", "alpha_minus", "dim", "n", "m", "tol",
                "max_iter", "path_nodes", "seed", "R", "output_dir")


def _flow_config(cfg):
    return FlowConfig(tol=cfg.tol, max_iter=cfg.max_iter, path_nodes=cfg.path_nodes)


def _streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def cmd_solve(cfg, branch, out=None):
    out = sys.stdout if out is None else out
    problem = cfg.problem()
    problem.nonlinearity.require_hypotheses()
    basis = eigenbasis(problem.domain, cfg.m)
    flow_cfg = _flow_config(cfg)
    rng_geo, rng_ends = _streams(cfg.seed, 2)
    if branch == "sign-changing":
        report = find_sign_changing(problem, basis, flow_cfg, R=cfg.R, m=cfg.m, rng=rng_geo)
    else:
        geometry, _, delta_m = default_geometry(problem, basis, cfg.m, rng=rng_geo)
        ends = build_endpoints(problem, basis, rng=rng_ends)
        sign = 1 if branch == "positive" else -1
        report = find_signed_solution(problem, sign, basis, flow_cfg, ends, geometry)
        report.extras["delta_m"] = delta_m
        if problem.nonlinearity.is_odd:
            report.extras["mirror_residual"] = mirror_residual(problem, report.u)
    outdir = ensure_dir(cfg.output_dir)
    payload = envelope("solve", cfg.canonical(), {"report": report.summary()},
                       extra_inputs={"branch": branch})
    write_json(os.path.join(outdir, "solution.json"), payload)
    write_profile(os.path.join(outdir, "profile.csv"), problem.domain, report.u,
                  problem.state(report.u).phi)
    print(f"branch={report.branch} J={report.energy:.12g} residual={report.residual:.3e} "
          f"iterations={report.iterations} converged={report.converged}", file=out)
    failed = [k for k, ok in report.checks.items() if not ok]
    if failed:
        print("failed checks: " + ", ".join(failed), file=out)
    print(f"wrote {outdir}/solution.json and {outdir}/profile.csv", file=out)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_multi(cfg, k, count, workers=1, out=None):
    out = sys.stdout if out is None else out
    problem = cfg.problem()
    problem.nonlinearity.require_hypotheses()
    if not problem.nonlinearity.is_odd:
        raise HypothesisViolation(
            "multi needs an odd nonlinearity (f odd, i.e. alpha_plus == alpha_minus); "
            f"got alpha_plus={cfg.alpha_plus}, alpha_minus={cfg.alpha_minus}"
        )
    if count < 1:
        raise ConfigurationError("count must be at least 1")
    basis = eigenbasis(problem.domain, cfg.m)
    if not 2 <= k <= basis.n_blocks:
        raise ConfigurationError(f"k must lie in 2..{basis.n_blocks}, got {k}")
    (rng_rows,) = _streams(cfg.seed, 1)
    rows = fountain_estimates(problem, basis, [k], m=cfg.m, rng=rng_rows)
    result = multi_start_sign_changing(problem, basis, k, count, _flow_config(cfg), m=cfg.m,
                                       seed=cfg.seed, workers=workers, rows=rows)
    outdir = ensure_dir(cfg.output_dir)
    sols = result.solutions
    table = [[i + 1 for i in range(len(sols))],
             [s.energy for s in sols], [s.norm for s in sols],
             [s.norm_plus for s in sols], [s.norm_minus for s in sols],
             [s.residual for s in sols], [s.extras["mirror_residual"] for s in sols],
             [sign_changes(s.u) for s in sols], [s.extras["start"] for s in sols]]
    write_table(os.path.join(outdir, "solutions.csv"),
                ["index", "energy", "norm", "norm_plus", "norm_minus", "residual",
                 "mirror_residual", "sign_changes", "start"], table)
    names, coords = coordinate_columns(problem.domain)
    write_table(os.path.join(outdir, "multi_profiles.csv"),
                names + [f"u{i + 1}" for i in range(len(sols))], coords + [s.u for s in sols])
    body = {
        "k": k, "count": count, "r_k": result.r_k, "b_lower": result.b_lower,
        "found_distinct": len(sols), "levels": result.levels(),
        "solutions": [s.summary() for s in sols], "attempts": result.attempts,
    }
    payload = envelope("multi", cfg.canonical(), body, extra_inputs={"k": k, "count": count})
    write_json(os.path.join(outdir, "multi.json"), payload)
    print(f"found {len(sols)} distinct sign-changing solutions (k={k}, {count} starts, "
          f"b_k lower bound {result.b_lower:.6g})", file=out)
    for i, s in enumerate(sols, 1):
        print(f"  {i}: J={s.energy:.12g} residual={s.residual:.3e} "
              f"sign_changes={sign_changes(s.u)}", file=out)
    print(f"wrote {outdir}/solutions.csv, multi_profiles.csv and multi.json", file=out)
    return EXIT_OK if len(sols) >= 1 else EXIT_FAILED


def cmd_verify(cfg, as_json=False, out=None):
    out = sys.stdout if out is None else out
    problem = cfg.problem()
    basis = eigenbasis(problem.domain, max(64, cfg.m))
    reports = run_all(problem, basis, seed=cfg.seed, m=cfg.m)
    if as_json:
        payload = envelope("verify", cfg.canonical(),
                           {"checks": [r.as_dict() for r in reports],
                            "passed": all(r.passed for r in reports)})
        print(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False), file=out)
    else:
        print(format_text(reports), file=out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_spectrum(cfg, out=None):
    out = sys.stdout if out is None else out
    problem = cfg.problem()
    dom = problem.domain
    basis = eigenbasis(dom, cfg.m)
    outdir = ensure_dir(cfg.output_dir)
    block = np.empty(basis.m_max, dtype=int)
    for b, idx in enumerate(basis.groups, 1):
        block[list(idx)] = b
    cols = [list(range(1, basis.m_max + 1)), block.tolist(), basis.eigenvalues]
    header = ["index", "block", "eigenvalue"]
    if dom.dim == 1:
        lam, _ = closed_form_eigenpairs_1d(dom.n, basis.m_max)
        cols.append(lam)
        header.append("closed_form")
    write_table(os.path.join(outdir, "eigenvalues.csv"), header, cols)
    names, coords = coordinate_columns(dom)
    write_table(os.path.join(outdir, "eigenvectors.csv"),
                names + [f"e{j + 1}" for j in range(basis.m_max)],
                coords + list(basis.vectors.T))
    k_max = min(FOUNTAIN_K_MAX, basis.n_blocks)
    (rng,) = _streams(cfg.seed, 1)
    rows = fountain_estimates(problem, basis, range(2, k_max + 1), rng=rng)
    write_table(os.path.join(outdir, "fountain.csv"), ["k", "beta_k", "r_k", "b_k_lower"],
                [[r.k for r in rows], [r.beta for r in rows], [r.r for r in rows],
                 [r.b_lower for r in rows]])
    trends = fountain_trends(rows)
    print(f"lambda_1={basis.eigenvalues[0]:.10g} (pi^2={np.pi**2:.10g})", file=out)
    print("fountain trends: " + canonical_json(trends), file=out)
    print(f"wrote {outdir}/eigenvalues.csv, eigenvectors.csv and fountain.csv", file=out)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "solve":
            return cmd_solve(cfg, args.branch)
        if args.command == "multi":
            return cmd_multi(cfg, args.k, args.count, args.workers)
        if args.command == "verify":
            return cmd_verify(cfg, args.json)
        return cmd_spectrum(cfg)
    except (ConfigurationError, HypothesisViolation, ParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as err:
        print(f"calibration failed: {err} (suggested mu: {err.suggested_mu:g})", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
