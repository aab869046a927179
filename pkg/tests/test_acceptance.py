"""Exit criteria, one test per criterion, each at its fixed tolerance."""
import math
import time

import numpy as np
import pytest

from mfqsolve import resources as res
from mfqsolve.baselines import analytic, euler, rk4
from mfqsolve.copysolver import assemble_block_system, deviation_profile, residual, solve_history
from mfqsolve.experiments import VALIDITY_TOL, ExperimentConfig, run
from mfqsolve.ode import OdeSpec
from mfqsolve.qubit import bell_circuit, measure, plus_state
from oracles import rk4_fine

criterion = pytest.mark.criterion
S = 1 / math.sqrt(2)
FIG2 = OdeSpec(cubic_coeff=2.0, dt=0.05, steps=30, x0=0.1)
FIG2_BRANCHES = [(2.0, 0.1), (2.0, 0.2), (2.0, 0.3), (8.0, 0.1), (16.0, 0.1)]


def best_time(fn, repeat=5):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


@criterion(1, "Bell amplitudes exact to 1e-12, < 1 ms")
def test_bell_state_exactness():
    psi = bell_circuit()
    assert np.max(np.abs(psi.amplitudes - np.array([S, 0, 0, S]))) < 1e-12
    assert best_time(bell_circuit) < 1e-3


@criterion(2, "Born frequencies within 4 sigma over 5 seeds (|+>, Bell), < 1 s")
def test_born_statistics():
    shots = 10_000

    def check():
        for state in (plus_state(), bell_circuit()):
            p = state.probabilities
            for seed in range(5):
                rec = measure(state, shots, seed=seed)
                for i, pi in enumerate(p):
                    bound = 4 * math.sqrt(pi * (1 - pi) / shots)
                    assert abs(rec.frequency(i) - pi) <= bound + 1e-15

    t0 = time.perf_counter()
    check()
    assert time.perf_counter() - t0 < 1.0


@criterion(3, "first solver step equals Euler to 1e-12 for alpha in {2,8,16}, x0 in {.1,.2,.3}, N=15")
def test_first_step_identity():
    for alpha in (2.0, 8.0, 16.0):
        for x0 in (0.1, 0.2, 0.3):
            ode = OdeSpec(cubic_coeff=alpha, dt=0.05, steps=1, x0=x0)
            xq = solve_history(ode, 15).x_est()[1]
            assert abs(xq - euler(ode).x[1]) < 1e-12


@criterion(4, "linear ODE: alpha=0, N=5, T=50 marginal equals Euler to 1e-10")
def test_linear_exactness():
    ode = OdeSpec(cubic_coeff=0.0, dt=0.05, steps=50, x0=0.1)
    assert np.max(np.abs(solve_history(ode, 5).x_est() - euler(ode).x)) < 1e-10


@criterion(5, "block-system residual < 1e-10 for (N=3,T=10), (N=5,T=5), < 1 s")
def test_block_system_equivalence():
    t0 = time.perf_counter()
    for n, steps in [(3, 10), (5, 5)]:
        ode = FIG2.with_(steps=steps)
        assert residual(assemble_block_system(ode, n), solve_history(ode, n)) < 1e-10
    assert time.perf_counter() - t0 < 1.0


@criterion(6, "validity window: N=15 max dev k<=15 < max dev 16..30; dev(15) < locked tol; < 30 s")
def test_validity_window():
    t0 = time.perf_counter()
    dev = dict(deviation_profile(FIG2, 15))
    elapsed = time.perf_counter() - t0
    inside = max(dev[k] for k in range(16))
    outside = max(dev[k] for k in range(16, 31))
    assert inside < outside
    assert dev[15] < VALIDITY_TOL
    assert elapsed < 30.0


@criterion(7, "1/N suppression: deviation at step 5 non-increasing over N = 5, 10, 15")
def test_one_over_n_suppression():
    ode = FIG2.with_(steps=5)
    devs = [dict(deviation_profile(ode, n))[5] for n in (5, 10, 15)]
    assert devs[1] <= devs[0] + 1e-12 and devs[2] <= devs[1] + 1e-12, devs


@criterion(8, "convergence: Euler ratio 2 +- 0.2, RK4 ratio 16 +- 3 (closed form checked to 1e-6)")
def test_convergence_orders():
    for t in (0.25, 0.5, 1.0):
        assert abs(analytic(FIG2, t) - rk4_fine(0.1, 2.0, t, 1e-4)) < 1e-6

    def err(method, dt):
        ode = FIG2.with_(dt=dt, steps=int(round(1.0 / dt)))
        tr = method(ode)
        return np.max(np.abs(tr.x - analytic(ode, tr.t)))

    assert abs(err(euler, 0.05) / err(euler, 0.025) - 2) <= 0.2
    assert abs(err(rk4, 0.05) / err(rk4, 0.025) - 16) <= 3


@criterion(9, "fixed points: RK4 within 1e-3 by t=5; quantum within 5e-2 inside window (k <= N)")
def test_fixed_points():
    for alpha, x0 in FIG2_BRANCHES:
        fp = 1 / math.sqrt(alpha)
        ode = OdeSpec(cubic_coeff=alpha, dt=0.05, steps=100, x0=x0)
        assert abs(rk4(ode).x[-1] - fp) < 1e-3
    gaps = {}
    for alpha, x0 in FIG2_BRANCHES:
        fp = 1 / math.sqrt(alpha)
        xq = solve_history(OdeSpec(cubic_coeff=alpha, dt=0.05, steps=15, x0=x0), 15).x_est()
        gaps[(alpha, x0)] = float(np.min(np.abs(xq - fp)))
    assert all(g < 5e-2 for g in gaps.values()), gaps


@criterion(10, "resources: runtime 1e20 s, infidelity 1e-29, qubits 823/665 vs 655, NWP 30")
def test_resource_arithmetic():
    assert res.runtime(1e29, 1e-9) == 1e20
    assert res.fidelity_requirement(1e29)[1] == 1e-29
    est = res.estimate(**res.LORENZ)
    rows = {r.quantity: r for r in res.report(est, lorenz=True)}
    assert rows["state_qubits"].computed == 823
    assert rows["state_qubits_from_10^200"].computed == 665
    assert rows["state_qubits"].paper_printed == 655
    assert rows["state_qubits_from_10^200"].paper_printed == 655
    assert rows["nwp_state_qubits_1e9_vars"].computed == 30
    assert rows["runtime_s"].computed == 1e20 and rows["infidelity"].computed == 1e-29


@criterion(11, "determinism: repeated experiments give bitwise-identical CSV")
def test_determinism(tmp_path):
    for name in ("fig2_left", "fig2_right", "fig3", "error_growth"):
        a = run(ExperimentConfig(name, str(tmp_path / "a"), seed=7, fmt="csv"))
        b = run(ExperimentConfig(name, str(tmp_path / "b"), seed=7, fmt="csv"))
        assert a.paths["csv"].read_bytes() == b.paths["csv"].read_bytes(), name
