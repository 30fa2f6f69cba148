"""Exit criteria of the build, one test per criterion.

Each test prints a single ``criterion k: PASS|FAIL ...`` line (repeated in
the terminal summary) and then asserts the criterion.
"""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record_acceptance
from monocalc import (
    ACCEPT, REJECT, Composition, GridSpec, LinearOp, NonMonotoneError, NormedSpace, Schedule,
    SolverFailure, Yosida, abs_operator, certify_representative, fitzpatrick_value,
    fitzpatrick_values, graph, identity, indicator_ball, indicator_box, liminf_probe, lift_eval,
    linear, min_monotonicity_gap, moreau_yosida, pointwise_sum_contains, sample_graph,
    solve_inclusion, variational_composition_probe, variational_sum_probe, verify_solution, zero,
)

pytestmark = pytest.mark.acceptance

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
TOL_ACCEPT, TOL_REJECT = 1e-4, 1e-2


def report(k, ok, detail):
    record_acceptance(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def a(*v):
    return np.array(v, dtype=float)


def test_hilbert_yosida():
    rng = np.random.default_rng(1)
    S = NormedSpace(1, 2.0)
    # prox of |.|, of the indicator of [-1, 1], and of x^2 / 2
    cases = {
        "abs": (abs_operator(S), lambda x, l: np.sign(x) * np.maximum(np.abs(x) - l, 0.0)),
        "normal[-1,1]": (indicator_box(S, a(-1), a(1)), lambda x, l: np.clip(x, -1.0, 1.0)),
        "identity": (identity(S), lambda x, l: x / (1.0 + l)),
    }
    X = rng.uniform(-3, 3, 100)
    t0 = time.perf_counter()
    worst = 0.0
    for T, prox in cases.values():
        for lam in (1.0, 0.1, 0.01):
            for x in X:
                got = moreau_yosida(T, lam, a(x))[0]
                worst = max(worst, abs(got - (x - prox(x, lam)) / lam))
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-6 and dt < 5.0, f"max |T_lam - (x - prox)/lam| = {worst:.2e}, {dt:.2f}s")


def _zoo(sp, rng):
    n = sp.dim
    B = rng.normal(size=(n, n))
    return [abs_operator(sp, rng.normal(size=n) * 0.3),
            indicator_ball(sp, rng.normal(size=n) * 0.3, 1.0),
            indicator_box(sp, -np.ones(n), np.ones(n)),
            linear(sp, 0.3 * B @ B.T + (B - B.T)), zero(sp), identity(sp)]


def test_residual_contract():
    rng = np.random.default_rng(2)
    tol = 1e-8
    n_ok = n_fail = n_silent = 0
    worst = 0.0
    for k in range(200):
        sp = NormedSpace(int(rng.integers(1, 4)), float(rng.choice([1.5, 2.0, 3.0])))
        T = _zoo(sp, rng)[k % 6]
        x, xs = rng.normal(size=sp.dim) * 2, rng.normal(size=sp.dim) * 2
        lam = 10 ** rng.uniform(-2, 1)
        try:
            sol = solve_inclusion(T, x, xs, lam, tol)
        except SolverFailure:
            n_fail += 1
            continue
        r = verify_solution(T, sol)
        worst = max(worst, r)
        if r <= tol:
            n_ok += 1
        else:
            n_silent += 1
    ok = n_silent == 0 and n_ok + n_fail == 200
    report(2, ok, f"{n_ok} verified, {n_fail} explicit failures, {n_silent} silent; "
                  f"worst re-verified residual {worst:.2e}")


def test_constant_sequence_probe():
    rng = np.random.default_rng(0)
    S = NormedSpace(2, 2.0)
    zoo = {"abs": abs_operator(S), "ball": indicator_ball(S, a(0, 0), 1.0),
           "box": indicator_box(S, a(-1, -1), a(1, 1)), "linear": linear(S, [[1, 2], [-2, 0.5]]),
           "zero": zero(S), "identity": identity(S)}
    ax = np.linspace(-3, 3, 61)
    grid = np.array(np.meshgrid(ax, ax)).reshape(2, -1).T
    sched = Schedule.eps()
    t0 = time.perf_counter()
    n_acc = n_rej = 0
    worst_acc, least_rej = 0.0, np.inf
    for T in zoo.values():
        seq = lambda n, T=T: T
        G = sample_graph(T, rng.uniform(-2, 2, (50, 2)))
        dense = sample_graph(T, grid)
        for u, us in G:
            rep = liminf_probe(seq, (u, us), sched, TOL_ACCEPT, TOL_REJECT)
            n_acc += rep.verdict == ACCEPT
            worst_acc = max(worst_acc, rep.residuals[-1])
        bad = []
        while len(bad) < 50:
            k = rng.integers(len(G))
            z = (G.points[k] + rng.normal(0, 0.5, 2), G.covectors[k] + rng.normal(0, 0.5, 2))
            if min_monotonicity_gap(dense, z) <= -0.05:
                bad.append(z)
        for z in bad:
            rep = liminf_probe(seq, z, sched, TOL_ACCEPT, TOL_REJECT)
            n_rej += rep.verdict == REJECT
            least_rej = min(least_rej, min(rep.residuals[-5:]))
    dt = time.perf_counter() - t0
    ok = n_acc == 300 and n_rej == 300 and dt < 30.0
    report(3, ok, f"accept {n_acc}/300 (max final residual {worst_acc:.1e}), reject "
                  f"{n_rej}/300 (min tail residual {least_rej:.3f}), {dt:.1f}s")


def test_moving_family():
    S = NormedSpace(1, 2.0)
    seq = lambda n: abs_operator(S, a(1.0 / n))
    cases = [((a(0.0), a(-1.0)), ACCEPT), ((a(0.5), a(1.0)), ACCEPT), ((a(0.0), a(2.0)), REJECT)]
    ok = True
    got = []
    for z, want in cases:
        reps = [liminf_probe(seq, z, Schedule.eps(eps0)) for eps0 in (1.0, 0.1)]
        ok &= all(r.verdict == want for r in reps) and reps[0].residuals == reps[1].residuals
        got.append(reps[0].verdict)
    report(4, ok, f"verdicts {got} identical for eps0 in (1, 0.1)")


def _yosida_probe(T, z, sched):
    lams = sched.values()
    return liminf_probe(lambda n: Yosida(T, lams[n - 1]), z, sched, TOL_ACCEPT, TOL_REJECT)


def test_yosida_graph_convergence():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    # the scalar subdifferential; J is the identity on the line for every p
    S1 = NormedSpace(1, 1.5)
    T1 = abs_operator(S1)
    G1 = sample_graph(T1, rng.uniform(-3, 3, (50, 1)))
    sched = Schedule.lam()
    reps = [_yosida_probe(T1, (u, us), sched) for u, us in G1]
    n1 = sum(r.verdict == ACCEPT for r in reps)
    r1 = max(r.residuals[-1] for r in reps)
    rej1 = _yosida_probe(T1, (a(0.0), a(2.0)), sched).verdict
    # the l1 subdifferential in the plane, on the parameter range resolved in double precision
    S2 = NormedSpace(2, 1.5)
    T2 = abs_operator(S2)
    G2 = sample_graph(T2, rng.uniform(-3, 3, (10, 2)))
    short = Schedule.lam(N=16)
    reps = [_yosida_probe(T2, (u, us), short) for u, us in G2]
    n2 = sum(r.verdict == ACCEPT for r in reps)
    rej2 = _yosida_probe(T2, (a(0.0, 0.0), a(2.0, 0.0)), short).verdict
    dt = time.perf_counter() - t0
    ok = n1 == 50 and rej1 == REJECT and n2 == 10 and rej2 == REJECT
    report(5, ok, f"R: accept {n1}/50 (max final residual {r1:.1e}), (0,2) {rej1}; "
                  f"R^2 p=1.5 N=16: accept {n2}/10, ((0,0),(2,0)) {rej2}; {dt:.1f}s")


def test_variational_sum_tangent_balls():
    S = NormedSpace(2, 2.0)
    C, D = indicator_ball(S, a(0, 0), 1.0), indicator_ball(S, a(2, 0), 1.0)
    t0 = time.perf_counter()
    acc = variational_sum_probe(C, D, (a(1, 0), a(0, 1)))
    rej = variational_sum_probe(C, D, (a(2, 0), a(0, 0)))
    pointwise = pointwise_sum_contains(C, D, a(1, 0), a(0, 1))
    dt = time.perf_counter() - t0
    n_sched = len({(s.first, s.second, s.decay) for s in acc.schedules})
    ok = (acc.verdict == ACCEPT and all(r.verdict == ACCEPT for r in acc.reports)
          and n_sched == 3 and not pointwise and rej.verdict == REJECT and dt < 60.0)
    report(6, ok, f"((1,0),(0,1)) {acc.verdict} on {n_sched} schedules, pointwise sum "
                  f"contains it: {pointwise}; ((2,0),(0,0)) {rej.verdict}; {dt:.1f}s")


def test_composition_lift():
    rng = np.random.default_rng(7)
    worst = worst_closed = 0.0
    n_member = 0
    for k in range(100):
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        Sx = NormedSpace(m, float(rng.choice([1.5, 2.0, 3.0])))
        A = LinearOp(rng.normal(size=(m, n)))
        y = rng.uniform(-2, 2, n)
        lam = 10 ** rng.uniform(-2, 0.5)
        T = _zoo(Sx, rng)[k % 6]
        # direct: A* J(Ay - R_lam Ay) / lam from its own resolvent solve
        direct = A.adjoint(moreau_yosida(T, lam, A(y)))
        lift = lift_eval(Yosida(T, lam), A, y, A(y))
        lifted = lift.extract_ystar(rng.normal(size=n))
        worst = max(worst, float(np.max(np.abs(direct - lifted))))
        n_member += lift.contains(direct, np.zeros(m), tol=1e-6)
        n_member += not lift.contains(direct + 1e-3, np.zeros(m), tol=1e-6)
    # Euclidean Yosida of the l1 subdifferential is a clipped ramp
    for _ in range(20):
        A = rng.normal(size=(3, 2))
        y, lam = rng.uniform(-2, 2, 2), 10 ** rng.uniform(-2, 0.5)
        got = Composition(abs_operator(NormedSpace(3, 2.0)), LinearOp(A), lam,
                          NormedSpace(2, 2.0)).apply(y)
        worst_closed = max(worst_closed, float(np.max(np.abs(got - A.T @ np.clip(A @ y / lam,
                                                                               -1, 1)))))
    S1, S2 = NormedSpace(1, 2.0), NormedSpace(2, 2.0)
    E = LinearOp(np.array([[1.0], [0.0]]))
    ball = indicator_ball(S2, a(0, 0), 1.0)
    acc = variational_composition_probe(ball, E, (a(1.0), a(2.0)), S1).verdict
    rej = variational_composition_probe(ball, E, (a(0.5), a(1.0)), S1).verdict
    ok = (worst <= 1e-6 and worst_closed <= 1e-6 and n_member == 200
          and acc == ACCEPT and rej == REJECT)
    report(7, ok, f"lift vs direct max diff {worst:.1e} over 100 cases, membership checks "
                  f"{n_member}/200, closed form {worst_closed:.1e}; "
                  f"(1,2) {acc}, (0.5,1) {rej}")


def _identity_samples(step):
    S = NormedSpace(1, 2.0)
    return graph(S, [(y, y) for y in np.arange(-2, 2 + step / 2, step)])


def _sign_samples(step):
    S = NormedSpace(1, 2.0)
    return sample_graph(abs_operator(S), np.arange(-3, 3 + step / 2, step)[:, None])


def test_fitzpatrick_identities():
    rng = np.random.default_rng(8)
    graphs = [_sign_samples(0.05), _identity_samples(0.05)]
    on_graph = max(abs(fitzpatrick_value(G, (y, ys)) - float(y @ ys))
                   for G in graphs for y, ys in G)
    G = graphs[0]
    X, XS = rng.uniform(-3, 3, (1000, 1)), rng.uniform(-3, 3, (1000, 1))
    phi = fitzpatrick_values(G, X, XS)
    pi = np.sum(X * XS, axis=1)
    gaps = np.array([min_monotonicity_gap(G, (x, xs)) for x, xs in zip(X, XS)])
    mismatches = int(np.sum((phi <= pi) != (gaps >= 0)))
    quarter = fitzpatrick_value(_identity_samples(0.01), (a(1.0), a(0.0)))
    ok = on_graph <= 1e-12 and mismatches == 0 and abs(quarter - 0.25) <= 1e-6
    report(8, ok, f"max |phi - pi| on graph {on_graph:.1e}; polar mismatches {mismatches}/1000; "
                  f"phi(1,0) = {quarter:.8f}")


def test_representability_certificate():
    grid = GridSpec(-2.0, 2.0, 0.1)
    parts = []
    ok = True
    for name, G in (("sign", _sign_samples(0.05)), ("identity", _identity_samples(0.05))):
        rep = certify_representative(G, grid)
        cover = rep.coverage(G)
        ok &= rep.status == "pass" and rep.min_slack >= -1e-8 and cover <= grid.step
        parts.append(f"{name} {rep.status} (min slack {rep.min_slack:.1e}, "
                     f"{len(rep.equality_points)} equality points, coverage {cover:.1e})")
    try:
        certify_representative(graph(NormedSpace(1, 2.0), [(0, 1), (1, 0)], monotone=False))
        typed = False
    except NonMonotoneError:
        typed = True
    ok &= typed
    parts.append(f"non-monotone graph raises NonMonotoneError: {typed}")
    report(9, ok, "; ".join(parts))


def _run_cli(path, out):
    return subprocess.run([sys.executable, "-m", "monocalc.cli", "run", "--scenario", str(path),
                           "--out", str(out)], capture_output=True, text=True).returncode


def test_determinism(tmp_path):
    files = sorted(SCENARIOS.glob("*.json"))
    n_csv = 0
    differing = []
    for path in files:
        outs = [tmp_path / f"{path.stem}_{k}" for k in range(2)]
        codes = [_run_cli(path, o) for o in outs]
        if codes[0] != codes[1]:
            differing.append(f"{path.stem} exit codes {codes}")
        for f in sorted(outs[0].glob("*.csv")):
            n_csv += 1
            if f.read_bytes() != (outs[1] / f.name).read_bytes():
                differing.append(f"{path.stem}/{f.name}")
    ok = not differing and n_csv > 0
    report(10, ok, f"{len(files)} scenarios, {n_csv} CSV files byte-identical across two runs"
                   + (f"; differing: {differing}" if differing else ""))
