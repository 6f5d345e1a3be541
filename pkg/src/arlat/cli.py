"""``arlat solve|transient|verify|sweep --config <path> --out <dir>``.

Exit codes: 0 success, 1 invalid input, 2 resonance singularity,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfgmod
from .errors import ArlatError, InvalidInputError, ResonanceError, UnsupportedConversionError
from .oracle import fd_solve, max_gap
from .output import ensure_dir, write_json, write_table
from .output import fmt as f
from .problem import from_chip
from .propagator import IntegratorConfig, propagator_matrix
from .steady import (
    _solve_system,
    check_periodicity,
    check_symmetry,
    concatenate,
    phase_ratio,
    residual_check,
    solve_fixed_point,
)
from .transient import decay_rate, iterate_passes, spectral_radius

EXIT_OK, EXIT_INVALID, EXIT_RESONANCE, EXIT_VERIFY = 0, 1, 2, 3

SOLUTION_COLUMNS = ("t", "variable_id", "re", "im", "intensity", "mode", "segment")
WAVEGUIDE_COLUMNS = ("z", "mode", "re", "im", "intensity")
TRANSIENT_COLUMNS = ("run", "k", "error", "log10_error", "remaining_population")
SWEEP_COLUMNS = ("value", "norm_a0", "condition_estimate", "spectral_radius", "resonance")
REPORT_COLUMNS = ("check", "value", "tolerance", "asserted", "passed")

DEFAULT_TOLERANCES = {"fixed_point": 1e-10, "symmetry": 1e-6, "periodicity": 1e-6, "oracle_gap": 5e-3, "residual": 1e-4}
# the qubit oracle bound is the looser 1e-2
QUBIT_ORACLE_GAP = 1e-2


class VerificationFailed(ArlatError):
    pass


def _integrator(cfg):
    return IntegratorConfig(step=cfg.integrator.step, scheme=cfg.integrator.scheme)


def _steady(cfg):
    chip, fb, src = cfgmod.build_model(cfg)
    u = propagator_matrix(chip, cfg=_integrator(cfg))
    ss = solve_fixed_point(u, fb, src, samples=cfg.integrator.samples_per_segment, rcond_min=cfg.solver.rcond_min)
    return chip, fb, src, u, ss


def _write_solution(out, fmt, chip, ss, sol):
    V, T = sol.values.shape
    write_table(
        out, "solution", SOLUTION_COLUMNS,
        [
            np.tile(sol.t, V),
            np.repeat(np.arange(1, V + 1), T),
            sol.values.real.ravel(),
            sol.values.imag.ravel(),
            sol.intensity().ravel(),
            sol.mode.ravel(),
            sol.segment.ravel(),
        ],
        fmt,
    )
    traj = ss.trajectory
    Z, n = traj.shape
    write_table(
        out, "waveguides", WAVEGUIDE_COLUMNS,
        [np.tile(ss.z, n), np.repeat(np.arange(1, n + 1), Z), traj.T.real.ravel(), traj.T.imag.ravel(),
         (np.abs(traj.T) ** 2).ravel()],
        fmt,
    )


def _summary(chip, u, ss, sol):
    return {
        "fixed_point_residual": ss.residual,
        "condition_estimate": ss.condition_estimate,
        "symmetry_gap": check_symmetry(sol),
        "periodicity_gap": check_periodicity(sol),
        "max_junction_gap": float(sol.junction_gaps.max()) if sol.junction_gaps.size else 0.0,
        "phase_ratio": list(phase_ratio(sol)),
        "a0": list(ss.a0),
        "unitarity_error": u.unitarity_error(),
        "n_modes": chip.n_modes,
        "n_segments": chip.n_segments,
        "topology": chip.topology,
    }


def cmd_solve(cfg, out, fmt):
    chip, fb, src, u, ss = _steady(cfg)
    sol = concatenate(chip, ss)
    _write_solution(out, fmt, chip, ss, sol)
    write_json(out / "summary.json", _summary(chip, u, ss, sol))
    return EXIT_OK


def cmd_transient(cfg, out, fmt):
    chip, fb, src = cfgmod.build_model(cfg)
    u = propagator_matrix(chip, cfg=_integrator(cfg))
    tc = cfg.transient
    runs, cols = [], [[] for _ in TRANSIENT_COLUMNS]
    a_inf = None
    for run, start in enumerate(tc.starts, start=1):
        x0 = None
        if start != "alpha":
            if a_inf is None:
                a_inf, _ = _solve_system(np.eye(chip.n_modes) - fb.matrix(chip.n_modes) @ u.matrix,
                                         src.array, cfg.solver.rcond_min)
            x0 = float(start) * a_inf
        trace = iterate_passes(u, fb, src, k_max=tc.k_max, tol=tc.tol, start=x0, rcond_min=cfg.solver.rcond_min)
        k = np.arange(len(trace.errors))
        with np.errstate(divide="ignore"):
            log_err = np.log10(trace.errors)
        for col, data in zip(cols, (np.full(k.size, run), k, trace.errors, log_err, trace.remaining_population)):
            col.extend(data.tolist())
        runs.append({
            "run": run,
            "start": start,
            "status": trace.status,
            "passes": trace.passes,
            "final_error": float(trace.errors[-1]),
            "decay_rate": decay_rate(trace.errors),
        })
        rho = trace.spectral_radius, trace.rho_converged
    write_table(out, "transient", TRANSIENT_COLUMNS, cols, fmt)
    write_json(out / "summary.json", {"spectral_radius": rho[0], "spectral_radius_converged": rho[1], "runs": runs})
    return EXIT_OK


def _verify_checks(cfg):
    chip, fb, src, u, ss = _steady(cfg)
    sol = concatenate(chip, ss)
    tols = dict(DEFAULT_TOLERANCES)
    if cfg.model in ("qubit", "qubit_crossed"):
        tols["oracle_gap"] = QUBIT_ORACLE_GAP
    tols.update(cfg.verify.tolerances)
    # the z-reversal properties only hold for constant single-rail chains
    symmetric = cfg.model in ("chain", "two_time") and chip.is_constant
    asserted = {name: tols[name] is not None for name in tols}
    for name in ("symmetry", "periodicity"):
        if name not in cfg.verify.tolerances:
            asserted[name] = symmetric

    values = {
        "fixed_point": ss.residual,
        "symmetry": check_symmetry(sol),
        "periodicity": check_periodicity(sol),
        "oracle_gap": np.nan,
        "residual": np.nan,
    }
    notes = {}
    try:
        problem = from_chip(chip, fb, src)
    except UnsupportedConversionError as exc:
        problem = None
        notes["oracle"] = f"skipped: {exc}"
        asserted["oracle_gap"] = asserted["residual"] = False
    if problem is not None:
        values["residual"] = residual_check(sol, problem)
        h = cfg.verify.oracle_step or chip.tau / 2000
        ref = fd_solve(problem, h)
        values["oracle_gap"] = max_gap(sol, ref)
        notes["oracle_step"] = ref.step
        notes["oracle_rcond"] = ref.params["rcond"]

    report = []
    for name in cfgmod.CHECKS:
        tol = tols[name]
        val = float(values[name])
        ok = bool(np.isfinite(val) and tol is not None and val <= tol) if asserted[name] else True
        report.append({"check": name, "value": val, "tolerance": tol, "asserted": asserted[name], "passed": ok})
    return report, notes


def cmd_verify(cfg, out, fmt):
    report, notes = _verify_checks(cfg)
    _write_report(out, fmt, report)
    passed = all(r["passed"] for r in report)
    write_json(out / "summary.json", {"passed": passed, "checks": report, "notes": notes})
    if not passed:
        failed = ", ".join(f"{r['check']}={r['value']:.3e} > {r['tolerance']:.1e}" for r in report if not r["passed"])
        raise VerificationFailed(f"verification failed: {failed}")
    return EXIT_OK


def _write_report(out, fmt, report):
    path = out / f"report.{fmt}"
    if fmt == "json":
        return write_json(path, {"columns": list(REPORT_COLUMNS),
                                 "rows": [[r[c] for c in REPORT_COLUMNS] for r in report]})
    lines = [",".join(REPORT_COLUMNS)]
    for r in report:
        tol = "" if r["tolerance"] is None else f(r["tolerance"])
        lines.append(",".join([r["check"], f(r["value"]), tol, f(r["asserted"]), f(r["passed"])]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def sweep_point(data: dict):
    """``(norm_a0, condition_estimate, spectral_radius, resonance)`` for one config dict."""
    cfg = cfgmod.RunConfig.from_dict(data)
    chip, fb, src = cfgmod.build_model(cfg)
    u = propagator_matrix(chip, cfg=_integrator(cfg))
    fu_f = fb.matrix(chip.n_modes)
    rho = spectral_radius(u.matrix, fu_f).radius
    try:
        a0, rcond = _solve_system(np.eye(chip.n_modes) - fu_f @ u.matrix, src.array, cfg.solver.rcond_min)
    except ResonanceError as exc:
        return np.nan, exc.rcond, rho, True
    return float(np.linalg.norm(a0)), rcond, rho, False


def sweep_values(cfg):
    sw = cfg.sweep
    if sw.parameter is None:
        raise InvalidInputError("sweep.parameter is required for a sweep")
    return np.sort(np.linspace(float(sw.start), float(sw.stop), sw.count))


def cmd_sweep(cfg, out, fmt, jobs=1):
    values = sweep_values(cfg)
    points = [cfg.with_value(cfg.sweep.parameter, float(v)).to_dict() for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(sweep_point, points))
    else:
        results = [sweep_point(p) for p in points]
    norm, rcond, rho, flag = (list(c) for c in zip(*results))
    write_table(out, "sweep", SWEEP_COLUMNS, [values, norm, rcond, rho, flag], fmt)
    write_json(out / "summary.json", {
        "parameter": cfg.sweep.parameter,
        "count": len(values),
        "resonances": int(sum(flag)),
        "max_norm_a0": float(np.nanmax(norm)) if not all(flag) else None,
    })
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "transient": cmd_transient, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser():
    p = argparse.ArgumentParser(prog="arlat", description="Lattice solver for advanced-retarded equations.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=cfgmod.FORMATS, default=None, help="overrides output.format")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweep")
    return p


def run(command, cfg, out, fmt=None, jobs=1) -> int:
    fmt = fmt or cfg.output.format
    out = ensure_dir(out)
    (out / "config.json").write_text(cfgmod.dumps(cfg), encoding="utf-8", newline="\n")
    if command == "sweep":
        return cmd_sweep(cfg, out, fmt, jobs=max(1, jobs))
    return COMMANDS[command](cfg, out, fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise InvalidInputError("--jobs must be >= 1")
        cfg = cfgmod.load(args.config)
        return run(args.command, cfg, args.out, args.format, args.jobs)
    except VerificationFailed as exc:
        print(f"arlat: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ResonanceError as exc:
        print(f"arlat: resonance: condition estimate {exc.rcond:.3e} below {exc.threshold:.1e}", file=sys.stderr)
        return EXIT_RESONANCE
    except (ArlatError, OSError) as exc:
        print(f"arlat: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
