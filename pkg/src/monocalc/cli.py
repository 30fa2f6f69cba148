"""Command line runner for scenario files.

Exit codes: 0 accept (or pass), 1 reject (or fail), 2 inconclusive,
64 invalid input, 70 solver failure.
"""
import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import kernels
from .limit_probe import ACCEPT, INCONCLUSIVE, REJECT, liminf_probe
from .operator_core import NonMonotoneError, min_monotonicity_gap
from .representability import certify_representative, fitzpatrick_values, representative_value
from .resolvent_engine import SolverFailure, solve_inclusion, verify_solution
from .scenario import Scenario, ScenarioError, load_scenario
from .variational_calc import (ScheduleFamily, merge_verdicts, variational_composition_probe,
                               variational_sum_probe)

EXIT_ACCEPT, EXIT_REJECT, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_SOFTWARE = 64, 70
VERDICT_EXIT = {ACCEPT: EXIT_ACCEPT, REJECT: EXIT_REJECT, INCONCLUSIVE: EXIT_INCONCLUSIVE}

STEP_COLUMNS = ["schedule_id", "n", "param_n", "residual_x", "w_norm", "verdict_partial"]
SUBCOMMANDS = {"my-eval": "my_eval", "probe": "probe", "varsum": "varsum",
               "varcomp": "varcomp", "fitz": "fitzpatrick", "certify": "certify"}


def _f(x):
    return repr(float(x))


def _clean(o):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.generic):
        o = o.item()
    if isinstance(o, float) and not np.isfinite(o):
        return None
    return o


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ------------------------------------------------------------- probe tasks

def _probe_one(config, index):
    """Run schedule ``index`` of a probe-type scenario; picklable for workers."""
    sc = Scenario.from_dict(config)
    sched = sc.schedule_family()[index]
    tol = sc.tolerances
    z = sc.target()
    if sc.task == "probe":
        rep = liminf_probe(sc.probe_sequence(sched), z, sched, tol["accept"], tol["reject"],
                           tol["solver"], sc.max_iter)
    elif sc.task == "varsum":
        fam = ScheduleFamily([sched], "pair")
        rep = variational_sum_probe(sc.operator("T1"), sc.operator("T2"), z, fam, tol["accept"],
                                    tol["reject"], tol["solver"], tol["inner"],
                                    sc.max_iter).reports[0]
    else:
        fam = ScheduleFamily([sched], "lambda")
        rep = variational_composition_probe(sc.operator("T"), sc.linear_op(), z,
                                            sc.normed_space_y(), fam, tol["accept"],
                                            tol["reject"], tol["solver"], tol["inner"],
                                            sc.max_iter).reports[0]
    partial = rep.partial_verdicts(tol["accept"], tol["reject"])
    rows = [[index + 1, n, _f(p), _f(r), _f(w), v]
            for n, (p, r, w, v) in enumerate(zip(rep.params, rep.residuals, rep.w_norms,
                                                 partial), start=1)]
    return {"rows": rows, "verdict": rep.verdict, "residuals": list(rep.residuals),
            "truncated": rep.truncated, "diagnostics": rep.diagnostics,
            "tail_slope": rep.tail_slope, "schedule": sched.to_dict()}


def _map(fn, config, n_items, jobs):
    if jobs > 1 and n_items > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n_items)) as ex:
            return list(ex.map(fn, [config] * n_items, range(n_items)))
    return [fn(config, i) for i in range(n_items)]


def _run_probe(sc, out, jobs):
    config = sc.to_dict()
    scheds = sc.schedule_family()
    results = _map(_probe_one, config, len(scheds), jobs)
    rows = [r for res in results for r in res["rows"]]
    verdicts = [res["verdict"] for res in results]
    verdict = merge_verdicts(verdicts)
    finals = [res["residuals"][-1] for res in results if res["residuals"]]
    if sc.task != "probe" or len(scheds) > 1:
        rows.append(["merged", "", "", _f(max(finals)) if finals else "", "", verdict])
    _write_csv(os.path.join(out, "steps.csv"), STEP_COLUMNS, rows)
    failed = any(res["truncated"] for res in results)
    all_res = [r for res in results for r in res["residuals"]]
    summary = {
        "verdict": verdict,
        "max_residual": max(all_res) if all_res else None,
        "schedules": [{"id": i + 1, "verdict": res["verdict"], "schedule": res["schedule"],
                       "final_residual": res["residuals"][-1] if res["residuals"] else None,
                       "tail_slope": res["tail_slope"], "diagnostics": res["diagnostics"]}
                      for i, res in enumerate(results)],
    }
    if failed:
        summary["truncated"] = [i + 1 for i, res in enumerate(results) if res["truncated"]]
    if failed and verdict == INCONCLUSIVE:
        summary["error"] = "solver failure"
        return summary, EXIT_SOFTWARE
    return summary, VERDICT_EXIT[verdict]


# ------------------------------------------------------------- other tasks

def _run_my_eval(sc, out, jobs):
    T = sc.operator("T")
    X, XS = sc.evaluation_points()
    tol = sc.tolerances["solver"]
    d = sc.normed_space().dim
    header = (["index"] + [f"x{i}" for i in range(d)] + [f"x_star{i}" for i in range(d)]
              + [f"z{i}" for i in range(d)] + [f"t_star{i}" for i in range(d)]
              + ["residual", "verified_residual", "iterations"])
    rows, worst, error = [], 0.0, None
    for k, (x, xs) in enumerate(zip(X, XS)):
        try:
            sol = solve_inclusion(T, x, xs, sc.lam, tol, sc.max_iter)
        except SolverFailure as exc:
            error = f"point {k}: {exc}"
            break
        vr = verify_solution(T, sol)
        worst = max(worst, sol.residual, vr)
        if vr > tol:
            error = f"point {k}: re-verified residual {vr:.3e} above tol {tol:.1e}"
        rows.append([k, *map(_f, x), *map(_f, xs), *map(_f, sol.z), *map(_f, sol.t_star),
                     _f(sol.residual), _f(vr), sol.iterations])
        if error:
            break
    _write_csv(os.path.join(out, "my_eval.csv"), header, rows)
    summary = {"verdict": "fail" if error else "ok", "max_residual": worst, "n_points": len(rows)}
    if error:
        summary["error"] = error
        return summary, EXIT_SOFTWARE
    return summary, 0


def _run_fitzpatrick(sc, out, jobs):
    G = sc.operator("G")
    X, XS = sc.evaluation_points()
    phi = fitzpatrick_values(G, X, XS)
    pi = np.einsum("ij,ij->i", X, XS)
    d = G.space.dim
    header = (["index"] + [f"x{i}" for i in range(d)] + [f"x_star{i}" for i in range(d)]
              + ["phi", "pi", "min_gap", "h"])
    rows = []
    for k, (x, xs) in enumerate(zip(X, XS)):
        gap = min_monotonicity_gap(G, (x, xs))
        h = representative_value(G, (x, xs))
        rows.append([k, *map(_f, x), *map(_f, xs), _f(phi[k]), _f(pi[k]), _f(gap), _f(h)])
    _write_csv(os.path.join(out, "fitzpatrick.csv"), header, rows)
    excess = phi - pi
    return {"verdict": "ok", "max_residual": None, "n_points": len(rows),
            "max_phi_minus_pi": float(excess.max()), "min_phi_minus_pi": float(excess.min())}, 0


def _run_certify(sc, out, jobs):
    G = sc.operator("G")
    rep = certify_representative(G, sc.grid_spec(), sc.tolerances["certify"])
    cert = rep.to_json()
    with open(os.path.join(out, "certificate.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(cert), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    eq = rep.equality_points
    d = G.space.dim
    header = [f"x{i}" for i in range(d)] + [f"x_star{i}" for i in range(d)]
    _write_csv(os.path.join(out, "equality_points.csv"), header,
               [[_f(v) for v in row] for row in eq])
    summary = {"verdict": rep.status, "max_residual": None, "min_slack": rep.min_slack,
               "coverage": rep.coverage(G), "n_infinite": rep.n_infinite, "notes": rep.notes}
    return summary, 0 if rep.status == "pass" else 1


_RUNNERS = {"my_eval": _run_my_eval, "probe": _run_probe, "varsum": _run_probe,
            "varcomp": _run_probe, "fitzpatrick": _run_fitzpatrick, "certify": _run_certify}


# ------------------------------------------------------------- entry points

def execute(sc, jobs=1):
    """Run a validated scenario, writing artifacts into ``sc.out``.

    Returns ``(summary, exit_code)``.
    """
    out = sc.out
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    try:
        summary, code = _RUNNERS[sc.task](sc, out, jobs)
    except (SolverFailure, ArithmeticError) as exc:
        summary, code = {"verdict": "error", "max_residual": None,
                         "error": f"{type(exc).__name__}: {exc}"}, EXIT_SOFTWARE
    summary.update({
        "task": sc.task,
        "exit_code": code,
        "wall_time": time.perf_counter() - t0,
        "seed": sc.seed,
        "backend": kernels.BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": sc.to_dict(),
    })
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return summary, code


def run_scenario(path, overrides=None, jobs=1, task=None):
    """Load, validate and run a scenario file; returns the process exit code.

    Nothing is written when the scenario is invalid (exit 64).
    """
    try:
        sc = load_scenario(path, overrides)
        if task is not None and sc.task != task:
            raise ScenarioError(f"scenario task is {sc.task!r}, subcommand expects {task!r}")
    except (ScenarioError, NonMonotoneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    summary, code = execute(sc, jobs)
    print(f"{sc.task}: {summary['verdict']} (exit {code}) -> {sc.out}")
    return code


def _default_jobs():
    try:
        return max(1, int(os.environ.get("MONO_JOBS", "1")))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(prog="monocalc",
                                     description="Run monotone-operator scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in [*SUBCOMMANDS, "run"]:
        p = sub.add_parser(name, help="run the scenario's own task" if name == "run"
                           else f"run a {SUBCOMMANDS[name]} scenario")
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", help="output directory (overrides the scenario)")
        p.add_argument("--seed", type=int, help="random seed (overrides the scenario)")
        p.add_argument("--tol-solver", type=float)
        p.add_argument("--tol-inner", type=float)
        p.add_argument("--tol-accept", type=float)
        p.add_argument("--tol-reject", type=float)
        p.add_argument("--tol-certify", type=float)
        p.add_argument("--jobs", type=int, default=_default_jobs(),
                       help="worker processes for independent schedules (env MONO_JOBS)")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which collides with "inconclusive"
        return EXIT_USAGE if exc.code else 0
    overrides = {"out": args.out, "seed": args.seed, "tol_solver": args.tol_solver,
                 "tol_inner": args.tol_inner, "tol_accept": args.tol_accept,
                 "tol_reject": args.tol_reject, "tol_certify": args.tol_certify}
    task = None if args.command == "run" else SUBCOMMANDS[args.command]
    return run_scenario(args.scenario, overrides, max(1, args.jobs), task)


if __name__ == "__main__":
    sys.exit(main())
