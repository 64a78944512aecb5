"""Acceptance criteria 1-7, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line (also repeated in
the terminal summary) and then asserts the criterion at its stated tolerance.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from fracstab.gronwall import (
    BoundInputs,
    gronwall_ml_bound,
    gronwall_series_bound,
    picard_oracle,
    quadrature_error_estimate,
    uniform_grid,
)
from fracstab.io import load_system, parse_system, serialize_system, system_to_dict
from fracstab.mittag_leffler import ml_eval
from fracstab.solver import HistoryFn, InputSignal, Nonlinearity, SystemSpec, solve_fdde
from fracstab.stability import (
    VIOLATION_RTOL,
    StabilityParams,
    criterion_special_case,
    criterion_theorem31,
    verify_by_simulation,
)

from oracles import ml_half_erfc, random_system

DATA = Path(__file__).parent / "data" / "systems"


def record(number: int, ok: bool, seconds: float, limit: float, detail: str) -> None:
    status = "PASS" if ok and seconds < limit else "FAIL"
    line = f"criterion {number}: {status}  ({seconds:.2f} s of {limit:g} s)  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_mittag_leffler_reductions():
    start = time.perf_counter()
    z_exp = np.linspace(-5.0, 5.0, 101)
    err_exp = max(abs(ml_eval(1.0, z).value - math.exp(z)) for z in z_exp)
    z_half = np.linspace(0.0, 3.0, 101)
    err_half = max(abs(ml_eval(0.5, z, 1e-10).value - ml_half_erfc(z)) for z in z_half)
    elapsed = time.perf_counter() - start
    ok = err_exp <= 1e-10 and err_half <= 1e-9
    record(1, ok, elapsed, 1.0, f"exp err {err_exp:.2e}, erfc err {err_half:.2e}")
    assert err_exp <= 1e-10
    assert err_half <= 1e-9
    assert elapsed < 1.0


def test_criterion_2_gronwall_dominance():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    grid = uniform_grid(1.0, 512)
    worst_excess = -math.inf
    worst_series = 0.0
    for i in range(20):
        q = float(rng.choice([0.3, 0.5, 0.8, 1.0]))
        g = rng.uniform(0.05, 0.5)
        # nondecreasing: positive start plus nonnegative increments
        a = rng.uniform(0.1, 2.0) + np.concatenate(
            [[0.0], np.cumsum(rng.exponential(rng.uniform(0.0, 0.01), grid.size - 1))]
        )
        inp = BoundInputs(q, grid, a, np.full_like(grid, g))
        oracle = picard_oracle(inp, a, 40)
        err = quadrature_error_estimate(inp, a, 40)
        ml = gronwall_ml_bound(inp).ml_form
        worst_excess = max(worst_excess, float(np.max(oracle - ml - 10.0 * err)))

        const = BoundInputs(q, grid, np.full_like(grid, a[0]), np.full_like(grid, g))
        diff = gronwall_series_bound(const, 60).series_form - gronwall_ml_bound(const).ml_form
        worst_series = max(worst_series, float(np.max(np.abs(diff))))
    elapsed = time.perf_counter() - start
    ok = worst_excess <= 0.0 and worst_series <= 1e-6
    record(2, ok, elapsed, 30.0,
           f"max(oracle - ml - 10 err) {worst_excess:.2e}, series vs ml {worst_series:.2e}")
    assert worst_excess <= 0.0
    assert worst_series <= 1e-6
    assert elapsed < 30.0


def test_criterion_3_solver_order():
    start = time.perf_counter()
    sys_ = SystemSpec(0.5, [[-1.0]])
    exact = math.exp(1.0) * math.erfc(1.0)
    errors = [
        abs(solve_fdde(sys_, HistoryFn.constant([1.0]), InputSignal.zero(), 1.0, n).states[-1, 0]
            - exact)
        for n in (256, 512, 1024)
    ]
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    elapsed = time.perf_counter() - start
    ok = min(ratios) >= 2.5
    record(3, ok, elapsed, 10.0,
           f"errors {', '.join(f'{e:.2e}' for e in errors)}; ratios "
           f"{ratios[0]:.3f}, {ratios[1]:.3f}")
    assert min(ratios) >= 2.5
    assert elapsed < 10.0


def test_criterion_4_soundness_sweep():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    systems = []
    draws = 0
    while len(systems) < 50:
        draws += 1
        sys_, params = random_system(rng)
        if criterion_theorem31(sys_, params).satisfied:
            systems.append((sys_, params))

    violations = envelope_violations = failures = 0
    worst_eps = worst_env = 0.0
    offenders = []
    for k, (sys_, params) in enumerate(systems):
        rep = verify_by_simulation(sys_, params, samples=100, steps=512, seed=1000 * k)
        violations += rep.violations
        envelope_violations += rep.envelope_violations
        failures += rep.errors
        worst_eps = max(worst_eps, rep.max_sup_norm / params.epsilon)
        ratio = max(s.envelope_ratio for s in rep.completed)
        worst_env = max(worst_env, ratio)
        if rep.envelope_violations:
            offenders.append(f"#{k} (n={sys_.n}, p={sys_.p}, q={sys_.q:g}, ratio {ratio:.4f})")
    elapsed = time.perf_counter() - start
    eps_ok = violations == 0 and failures == 0
    env_ok = envelope_violations == 0
    detail = (
        f"{draws} draws for 50 satisfied systems; epsilon violations {violations} "
        f"(worst sup/eps {worst_eps:.3f}, slack {VIOLATION_RTOL:g}); "
        f"envelope violations {envelope_violations} (worst ratio {worst_env:.4f})"
    )
    if offenders:
        detail += "; above envelope: " + ", ".join(offenders)
    record(4, eps_ok and env_ok, elapsed, 300.0, detail)
    assert failures == 0
    assert violations == 0
    assert envelope_violations == 0, detail
    assert elapsed < 300.0


def _random_case_system(rng, kind):
    n = int(rng.integers(1, 4))
    p = int(rng.integers(0, 3))
    q = float(rng.uniform(0.3, 1.0))
    mats = [rng.normal(0, 0.2, (n, n)) for _ in range(p + 1)]
    b0 = rng.normal(0, 0.5, (n, int(rng.integers(1, 3))))
    if kind == "zero":
        f = Nonlinearity.zero()
    elif kind == "tanh":
        f = Nonlinearity.tanh(rng.uniform(-0.5, 0.5, n))
    else:
        f = Nonlinearity.sin_plus_offset(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3, n))
    return SystemSpec(q, mats[0], mats[1:], list(rng.uniform(0.1, 2.0, p)), b0, f)


def test_criterion_5_reduction_equalities():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    mismatches = 0
    checks = 0
    for _ in range(100):
        delta = rng.uniform(0.2, 2.0)
        T = rng.uniform(0.1, 2.0)
        eps = delta * rng.uniform(1.1, 50.0)
        params_free = StabilityParams(delta, eps, 0.0, T)
        params_u = StabilityParams(delta, eps, rng.uniform(0.0, 1.0), T)
        cases = [
            (1, _random_case_system(rng, "sin"), params_free),
            (2, _random_case_system(rng, "tanh"), params_u),
            (3, _random_case_system(rng, "zero"), params_u),
        ]
        for case, sys_, params in cases:
            a = criterion_special_case(sys_, params, case).lhs
            b = criterion_theorem31(sys_, params).lhs
            checks += 1
            if not (a == b or abs(a - b) <= 1e-14 * abs(b)):
                mismatches += 1
    elapsed = time.perf_counter() - start
    record(5, mismatches == 0, elapsed, math.inf, f"{checks} comparisons, {mismatches} mismatches")
    assert mismatches == 0


def test_criterion_6_monotonicity():
    start = time.perf_counter()
    rng = np.random.default_rng(6)

    def lhs(q, sigma, L, m, q_u, T, delta, p):
        f = Nonlinearity.sin_plus_offset(L, [m]) if (L or m) else Nonlinearity.zero()
        sys_ = SystemSpec(q, [[sigma]], [[[0.0]]] * p, [1.0] * p, [[1.0]], f)
        return criterion_theorem31(sys_, StabilityParams(delta, 1e6, q_u, T)).lhs

    decreases = []
    names = ("T", "sigma", "L", "m", "q_u")
    for i in range(1000):
        base = dict(
            q=float(rng.uniform(0.3, 1.0)), sigma=rng.uniform(0, 0.5), L=rng.uniform(0, 0.5),
            m=rng.uniform(0, 1.0), q_u=rng.uniform(0, 1.0), T=rng.uniform(0.05, 2.0),
            delta=rng.uniform(0.1, 2.0), p=int(rng.integers(0, 3)),
        )
        name = names[i % len(names)]
        bumped = dict(base, **{name: base[name] + rng.uniform(1e-6, 0.5)})
        lo, hi = lhs(**base), lhs(**bumped)
        if hi < lo:
            decreases.append((name, lo, hi))
    elapsed = time.perf_counter() - start
    record(6, not decreases, elapsed, math.inf, f"1000 draws, {len(decreases)} decreases")
    assert not decreases


def test_criterion_7_round_trip_and_determinism(tmp_path):
    start = time.perf_counter()
    files = sorted(DATA.glob("*.toml"))
    assert len(files) == 10
    bad = []
    for path in files:
        first = load_system(path)
        text = serialize_system(first)
        second = parse_system(text)
        if system_to_dict(second) != system_to_dict(first) or serialize_system(second) != text:
            bad.append(path.name)

    outputs = []
    for k in range(2):
        out = tmp_path / f"verify{k}.csv"
        subprocess.run(
            [sys.executable, "-m", "fracstab", "verify", "--system",
             str(DATA / "two_delay_tanh.toml"), "--delta", "0.5", "--epsilon", "3", "--qu", "0.1",
             "--horizon", "1", "--samples", "20", "--steps", "128", "--seed", "11",
             "--out", str(out)],
            check=True, capture_output=True,
        )
        outputs.append(out.read_bytes())
    identical = outputs[0] == outputs[1] and len(outputs[0]) > 0
    elapsed = time.perf_counter() - start
    record(7, not bad and identical, elapsed, math.inf,
           f"round trip failures {len(bad)}/10, verify CSV identical: {identical}")
    assert not bad, bad
    assert identical
