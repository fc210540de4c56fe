"""Command-line front end: `roughbound <study> --config cfg [--seed N] [--out DIR]`.

Subcommands: sample, solve, convergence, cocycle, stability, invariants.
Every run is reproducible from (config, seed) alone; floats are written at 17
significant digits so reruns are byte-identical.  Each domain error maps to a
distinct nonzero exit code, and the process exits 0 iff all requested checks
pass; one machine-parseable `CHECK name PASS|FAIL value=... threshold=...`
line is printed per check.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import studies
from .config import (build_diffusion_from, build_drift_from, build_problem,
                     build_scale_from, build_y0_from, parse_config,
                     parse_float_list, parse_int_list, parse_levels)
from .errors import (AprioriBoundViolation, ChenViolation, ConfigError,
                     ContractionFailure, CovarianceNotPD,
                     DirichletRegularityError, GridMismatch, IoError,
                     RegularityError, RoughboundError, ScaleIndexError,
                     ScaleUnderflow, SingularLift)
from .rough_driver import sample_fbm, save_csv
from .solver import solve_global, solve_young_dirichlet
from .spectral_scale import NEUMANN

EXIT_CODES = (
    (DirichletRegularityError, 9),
    (RegularityError, 10),
    (ConfigError, 2),
    (GridMismatch, 3),
    (ChenViolation, 4),
    (CovarianceNotPD, 5),
    (ScaleUnderflow, 6),
    (SingularLift, 7),
    (ContractionFailure, 8),
    (IoError, 11),
    (AprioriBoundViolation, 12),
    (ScaleIndexError, 13),
)


def _exit_code(exc: RoughboundError) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def _out_path(out_dir: str, name: str) -> str:
    if not os.path.isdir(out_dir):
        raise IoError(out_dir)
    return os.path.join(out_dir, name)


def _write_rows(path: str, header: str, rows) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise IoError(path) from exc


def _fmt(v) -> str:
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{float(v):.17g}"
    return str(v)


def _emit(check: studies.Check, sink) -> bool:
    line = check.line()
    print(line)
    if sink is not None:
        sink.append(line)
    return check.ok


# -- subcommand bodies ------------------------------------------------------------


def cmd_sample(cfg: dict, out: str) -> list:
    D = sample_fbm(cfg["H"], cfg["n"], cfg["T"], seed=cfg["seed"],
                   gamma=cfg.get("gamma"), gamma_slack=cfg["gamma_slack"])
    save_csv(D, _out_path(out, "driver.csv"))
    meta = [("H", D.H), ("n", D.n), ("T", D.T), ("gamma", D.gamma),
            ("seed", cfg["seed"]), ("lift", D.lift)]
    _write_rows(_out_path(out, "driver.meta"), "key,value", meta)
    return [studies.Check("sample_written", float(D.n), float(cfg["n"]),
                          D.n == cfg["n"])]


def cmd_solve(cfg: dict, out: str) -> list:
    spec = build_problem(cfg)
    if spec.scale.bc == NEUMANN:
        res = solve_global(spec)
    else:
        res = solve_young_dirichlet(spec)
    path = res.path.restricted(cfg["out_stride"]) if cfg["out_stride"] > 1 else res.path
    rows = [(t, k, path.y[i, k])
            for i, t in enumerate(path.times) for k in range(spec.scale.K)]
    _write_rows(_out_path(out, "solution.csv"), "time,mode,coefficient", rows)
    sup = float(np.max(spec.scale.norm(path.y, spec.solution_alpha)))
    checks = [
        studies.Check("solve_completed", float(path.times[-1]), spec.horizon,
                      abs(path.times[-1] - spec.horizon) < 1e-12),
        studies.Check("solve_sup_norm_finite", sup, 1e8, np.isfinite(sup)),
    ]
    summary = [c.line() for c in checks]
    summary.append(f"iterations={res.iterations}")
    summary.append(f"windows={len(res.window_ends)}")
    summary.append(f"apriori_m1={res.apriori_m1:.17g}")
    summary.append(f"apriori_m2={res.apriori_m2:.17g}")
    _write_rows(_out_path(out, "summary.txt"), "line", [(s,) for s in summary])
    return checks


def cmd_convergence(cfg: dict, out: str) -> list:
    scale = build_scale_from(cfg)
    F = build_diffusion_from(cfg, scale)
    y0 = build_y0_from(cfg, scale)
    levels = parse_levels(cfg["levels"])
    gamma = cfg.get("gamma") or cfg["H"] - cfg["gamma_slack"]
    study = studies.sewing_study(
        scale, F, y0, H=cfg["H"], n=cfg["n"], T=cfg["T"], gamma=gamma,
        seeds=range(cfg["seed"], cfg["seed"] + cfg["seeds"]),
        levels=levels, beta=cfg["beta"], young=scale.bc != NEUMANN)
    _write_rows(_out_path(out, "convergence.csv"), "level,defect,beta",
                [(int(l), float(d), study.beta)
                 for l, d in zip(study.levels, study.mean_defects)])
    return [studies.Check("sewing_slope", study.slope, study.target, study.ok)]


def cmd_cocycle(cfg: dict, out: str) -> list:
    scale = build_scale_from(cfg)
    F = build_diffusion_from(cfg, scale)
    y0 = build_y0_from(cfg, scale)
    gamma = cfg.get("gamma") or cfg["H"] - cfg["gamma_slack"]
    study = studies.cocycle_study(
        scale, F, y0, H=cfg["H"], master_n=cfg["n"], T=cfg["T"], gamma=gamma,
        seeds=range(cfg["seed"], cfg["seed"] + cfg["seeds"]),
        resolutions=parse_int_list(cfg["resolutions"]),
        t=cfg["t"], tau=cfg["tau"], drift=build_drift_from(cfg, scale))
    _write_rows(_out_path(out, "cocycle.csv"), "resolution,defect",
                list(zip(study.resolutions, study.mean_defects)))
    return [studies.Check("cocycle_refinement_ratio", study.final_ratio, 1.5,
                          study.final_ratio >= 1.5)]


def cmd_stability(cfg: dict, out: str) -> list:
    scale = build_scale_from(cfg)
    F = build_diffusion_from(cfg, scale)
    y0 = build_y0_from(cfg, scale)
    gamma = cfg.get("gamma") or cfg["H"] - cfg["gamma_slack"]
    driver_study, initial_study = studies.stability_study(
        scale, F, y0, H=cfg["H"], n=cfg["n"], T=cfg["T"], gamma=gamma,
        seed=cfg["seed"], gamma_prime=cfg["gamma_prime"],
        lambdas=parse_float_list(cfg["lambdas"]),
        eps0=parse_float_list(cfg["eps0"]),
        drift=build_drift_from(cfg, scale))
    rows = []
    for st in (driver_study, initial_study):
        rows.extend((st.kind, p, r) for p, r in zip(st.predictors, st.responses))
    _write_rows(_out_path(out, "stability.csv"), "kind,predictor,response", rows)
    return [
        studies.Check("stability_driver_linearity", driver_study.max_rel_dev,
                      0.20, driver_study.ok),
        studies.Check("stability_initial_linearity", initial_study.max_rel_dev,
                      0.20, initial_study.ok),
    ]


def cmd_invariants(cfg: dict, out: str | None) -> list:
    scale = build_scale_from(cfg)
    checks = studies.invariants_battery(
        scale, H=cfg["H"], n=min(cfg["n"], 64), T=cfg["T"],
        seeds=range(cfg["seed"], cfg["seed"] + cfg["seeds"]),
        rng_seed=cfg["seed"])
    if out is not None:
        _write_rows(_out_path(out, "invariants.txt"), "line",
                    [(c.line(),) for c in checks])
    return checks


_COMMANDS = {
    "sample": cmd_sample,
    "solve": cmd_solve,
    "convergence": cmd_convergence,
    "cocycle": cmd_cocycle,
    "stability": cmd_stability,
    "invariants": cmd_invariants,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughbound",
        description="Desk-scale rough boundary-noise studies")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key=value file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None,
                       help="existing output directory for CSV artifacts")
        p.add_argument("--levels", default=None,
                       help="override dyadic levels, e.g. 4..10")
    return parser


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.levels is not None:
            parse_levels(args.levels)
            cfg["levels"] = args.levels
        needs_out = args.command != "invariants"
        if needs_out and args.out is None:
            raise ConfigError(f"--out is required for `{args.command}`")
        checks = _COMMANDS[args.command](cfg, args.out)
    except RoughboundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    all_ok = True
    for check in checks:
        print(check.line())
        all_ok = all_ok and check.ok
    return 0 if all_ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
