"""Acceptance criteria 1-10.

Each ``test_criterion_*`` checks one criterion at its stated tolerance and
records a PASS/FAIL line that pytest prints in an "acceptance criteria"
section at the end of the run. Cells that are known to miss their tolerance
are listed in ``KNOWN_DEVIATIONS``; the criterion line reports them as a
FAIL, and each one also has its own strict-xfail test so the deviation
cannot silently disappear or spread.

Running ``python tests/test_acceptance.py`` prints the same lines without
pytest.
"""

import os
import subprocess
import sys
import time
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

import acceptance_log
from fracpc.bench import BenchCell, run_cell, run_table
from fracpc.gm import GMParams, Verdict, gm_classify, gm_determinant, gm_equilibrium, gm_trace, sector_threshold, threshold_quantity
from fracpc.model import DerivativeKind, FractionalIVP, Scheme, SolverConfig, make_grid
from fracpc.problems import builtin, empirical_order
from fracpc.schemes import StepContext, correct_abc, correct_caputo, correct_cf, correct_classical, solve
from fracpc.specfun import gamma

from oracles import cycle_amplitudes, kernel_oracle_worst


# (table, method, alpha, dt denominator) -> why the cell misses its tolerance
KNOWN_DEVIATIONS = {
    (2, "ppc", 1.0, 16): "coupled predictor history is about 4x more accurate than tabulated",
    (2, "ppc", 1.0, 64): "coupled predictor history is about 3.6x more accurate than tabulated",
    (2, "ppc", 1.0, 200): "coupled predictor history is about 3.4x more accurate than tabulated",
    (2, "ppc", 1.0, 700): "coupled predictor history is about 3.4x more accurate than tabulated",
    (3, "ppc", 0.87, 200): "tabulated value belongs to dt = 1/500",
    (3, "ias", 0.87, 200): "tabulated value belongs to dt = 1/500",
}


def _key(cell):
    return (cell.table, cell.method, cell.alpha, cell.dt.denominator)


@lru_cache(maxsize=None)
def _table(number):
    start = time.perf_counter()
    results = run_table(number)
    return results, time.perf_counter() - start


def _ratio_check(results, keep, lo, hi):
    """Split in-scope cells into (checked, failed, documented-deviation) lists."""
    checked, failed, documented = [], [], []
    for r in results:
        if not keep(r.cell):
            continue
        ok = lo <= r.ratio <= hi
        if _key(r.cell) in KNOWN_DEVIATIONS:
            documented.append((r, ok))
        else:
            checked.append(r)
            if not ok:
                failed.append(r)
    return checked, failed, documented


def _describe(r):
    c = r.cell
    return f"{c.method} a={c.alpha} dt=1/{c.dt.denominator} ratio={r.ratio:.3f}"


def _table_criterion(number, criterion, keep, lo, hi, budget, extra_ok=True, extra_text=""):
    results, elapsed = _table(number)
    checked, failed, documented = _ratio_check(results, keep, lo, hi)
    missed = [r for r, ok in documented if not ok]
    total = len(checked) + len(documented)
    ok = not failed and not missed and elapsed < budget and extra_ok
    text = f"table {number}: {total - len(failed) - len(missed)}/{total} cells in [{lo:.3g}, {hi:.3g}]"
    if missed:
        text += "; known deviations: " + ", ".join(_describe(r) for r in missed)
    if failed:
        text += "; unexpected failures: " + ", ".join(_describe(r) for r in failed)
    acceptance_log.record(criterion, ok, text + extra_text, elapsed)
    assert not failed, [_describe(r) for r in failed]
    assert elapsed < budget
    assert extra_ok, extra_text


# 1 ---------------------------------------------------------------------------------------

def test_criterion_1_kernel_oracle():
    start = time.perf_counter()
    worst = kernel_oracle_worst(count=200, seed=20240601)
    elapsed = time.perf_counter() - start
    top = max(worst.values())
    ok = top <= 1e-8 and elapsed < 10
    acceptance_log.record(1, ok, f"9 kernels x 200 tuples, worst relative error {top:.2e} (<= 1e-8)", elapsed)
    assert top <= 1e-8, worst
    assert elapsed < 10


# 2 ---------------------------------------------------------------------------------------

def _ctx(kind, states, f_hist, dt=0.05):
    ivp = FractionalIVP(lambda t, y: -y, [states[0]], kind, 1.0)
    return StepContext.from_history(ivp, SolverConfig(), make_grid(dt, 45 * dt), np.asarray(states), np.asarray(f_hist))


def test_criterion_2_reduction_identities():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    cf_exact, cap_worst, abc_worst = True, 0.0, 0.0
    dt = 0.05
    for _ in range(40):
        m = int(rng.integers(1, 40))
        y, f = rng.normal(size=m + 1), rng.normal(size=m + 1)
        fp = np.array([rng.normal()])
        classical = correct_classical(_ctx("classical", y, f), None, fp)
        cf_exact &= bool(np.array_equal(correct_cf(_ctx("cf", y, f), None, fp), classical))
        cap = correct_caputo(_ctx("caputo", y, f), None, fp)
        if m == 1:
            prev = y[0] + dt / 2 * (f[0] + f[1])
        else:
            prev = correct_caputo(_ctx("caputo", y[:m], f[:m]), None, np.array([f[m]]))
        inc_c, inc_cl = (cap - prev)[0], (classical - y[m])[0]
        cap_worst = max(cap_worst, abs(inc_c - inc_cl) / max(abs(inc_cl), 1e-300))
        abc = correct_abc(_ctx("abc", y, f), None, fp)
        abc_worst = max(abc_worst, abs(abc[0] - cap[0]) / max(abs(cap[0]), 1e-300))
    elapsed = time.perf_counter() - start
    ok = cf_exact and cap_worst <= 1e-12 and abc_worst <= 1e-12 and elapsed < 1
    acceptance_log.record(
        2, ok,
        f"CF==classical bitwise: {cf_exact}; Caputo increment rel {cap_worst:.1e}; ABC vs Caputo rel {abc_worst:.1e}",
        elapsed,
    )
    assert cf_exact
    assert cap_worst <= 1e-12
    assert abc_worst <= 1e-12
    assert elapsed < 1


# 3 ---------------------------------------------------------------------------------------

def test_criterion_3_table_one():
    results, _ = _table(1)
    err = {(r.cell.method, r.cell.dt.denominator): r.max_abs_error for r in results}
    order = empirical_order(err[("ppc", 16)], err[("ppc", 64)], 4)
    _table_criterion(
        1, 3, lambda c: True, 1 / 3, 3, budget=5,
        extra_ok=order >= 2.5, extra_text=f"; PPC order 1/16->1/64 = {order:.2f} (>= 2.5)",
    )


# 4 ---------------------------------------------------------------------------------------

def test_criterion_4_table_two():
    _table_criterion(2, 4, lambda c: c.method in ("ppc", "ppc-caputo-alpha1", "ab2"), 1 / 3, 3, budget=30)


# 5 ---------------------------------------------------------------------------------------

def test_criterion_5_table_three():
    _table_criterion(3, 5, lambda c: True, 0.8, 1.2, budget=60)


# 6 ---------------------------------------------------------------------------------------

def test_criterion_6_table_four():
    results, _ = _table(4)
    by = {(r.cell.method, r.cell.alpha, r.cell.dt): r.max_abs_error for r in results}
    ordered = all(by[("ppc", a, dt)] < by[("ias", a, dt)] for (m, a, dt) in by if m == "ppc")
    _table_criterion(
        4, 6, lambda c: True, 0.5, 2, budget=30,
        extra_ok=ordered, extra_text=f"; error(PPC) < error(IAS) in every cell: {ordered}",
    )


# 7 ---------------------------------------------------------------------------------------

def test_criterion_7_constant_field():
    start = time.perf_counter()
    c, y0, worst = 1.5, 0.25, 0.0
    for alpha in (0.3, 0.7, 1.0):
        ivp = FractionalIVP(lambda t, y: np.array([c]), [y0], DerivativeKind.CAPUTO, alpha)
        tr = solve(ivp, SolverConfig(), make_grid(0.01, 2))
        exact = y0 + c * tr.t**alpha / gamma(alpha + 1)
        worst = max(worst, float(np.max(np.abs(tr.states[:, 0] - exact))))
    elapsed = time.perf_counter() - start
    acceptance_log.record(7, worst <= 1e-10, f"Caputo PPC with f = c, max deviation {worst:.1e} (<= 1e-10)", elapsed)
    assert worst <= 1e-10


# 8 ---------------------------------------------------------------------------------------

def _sig4(x, ref):
    return float(f"{x:.4g}") == float(f"{ref:.4g}")


def test_criterion_8_gm_algebra():
    start = time.perf_counter()
    p = GMParams()
    eq = gm_equilibrium(p)
    checks = {
        "equilibrium": np.max(np.abs(eq - [7 / 4, 49 / 32])) <= 1e-12,
        "trace": abs(gm_trace(p) - 6 / 7) <= 1e-12,
        "determinant": abs(gm_determinant(p) - 8) <= 1e-12,
        "threshold": _sig4(threshold_quantity(p), 392 / 9),
        "sector 0.85": _sig4(sector_threshold(0.85), 18.3497),
        "sector 0.95": _sig4(sector_threshold(0.95), 162.4476),
        "verdicts": [gm_classify(a, p).verdict for a in (0.85, 0.95, 1.0)]
        == [Verdict.ASYMPTOTICALLY_STABLE, Verdict.UNSTABLE, Verdict.UNSTABLE],
    }
    elapsed = time.perf_counter() - start
    ok = all(checks.values()) and elapsed < 1
    bad = [k for k, v in checks.items() if not v]
    acceptance_log.record(8, ok, "equilibrium, trace, determinant, thresholds, verdicts" + (f"; failed: {bad}" if bad else ""), elapsed)
    assert not bad, bad
    assert elapsed < 1


# 9 ---------------------------------------------------------------------------------------

def _gm_run(alpha):
    ivp = builtin("gierer-meinhardt").make_ivp(alpha=alpha)
    return solve(ivp, SolverConfig(), make_grid(0.01, 100))


def test_criterion_9_gm_dynamics():
    start = time.perf_counter()
    eq = gm_equilibrium(GMParams())
    stable = _gm_run(0.85)
    dist = float(np.linalg.norm(stable.states[-1] - eq))
    osc = _gm_run(0.95)
    window = osc.t >= 75
    a = osc.states[window, 0]
    amplitude = float(a.max() - a.min())
    cycles = cycle_amplitudes(a)
    decaying = len(cycles) >= 2 and all(x > y for x, y in zip(cycles, cycles[1:]))
    elapsed = time.perf_counter() - start
    ok = dist <= 0.05 and amplitude >= 0.1 and not decaying and elapsed < 60
    acceptance_log.record(
        9, ok,
        f"a=0.85 distance to E* {dist:.4f} (<= 0.05); a=0.95 amplitude {amplitude:.3f} (>= 0.1), "
        f"{len(cycles)} cycles, monotonically decaying: {decaying}",
        elapsed,
    )
    assert dist <= 0.05
    assert amplitude >= 0.1
    assert not decaying
    assert elapsed < 60


# 10 --------------------------------------------------------------------------------------

def test_criterion_10_bench_determinism(tmp_path):
    start = time.perf_counter()
    env = {**os.environ, "PYTHONPATH": os.pathsep.join(sys.path)}
    payloads = []
    for run, threads in enumerate(("4", "1", "4")):
        out = tmp_path / f"t3_{run}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "fracpc", "bench", "--table", "3", "--out", str(out)],
            env={**env, "FRACPC_THREADS": threads}, capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        payloads.append(out.read_bytes())
    same = all(p == payloads[0] for p in payloads)
    acceptance_log.record(10, same, "three bench --table 3 runs (4, 1, 4 threads) byte-identical", time.perf_counter() - start)
    assert same


# known deviations, one strict xfail each ---------------------------------------------------

def _deviation_cells():
    from fracpc.bench import table_cells

    cells = [c for n in (2, 3) for c in table_cells(n) if _key(c) in KNOWN_DEVIATIONS]
    return [pytest.param(c, id=f"t{c.table}-{c.method}-a{c.alpha}-dt1_{c.dt.denominator}",
                         marks=pytest.mark.xfail(strict=True, reason=KNOWN_DEVIATIONS[_key(c)])) for c in cells]


@pytest.mark.parametrize("cell", _deviation_cells())
def test_known_deviation_cell(cell):
    lo, hi = (1 / 3, 3) if cell.table == 2 else (0.8, 1.2)
    results, _ = _table(cell.table)
    ratio = next(r.ratio for r in results if r.cell == cell)
    assert lo <= ratio <= hi


@pytest.mark.parametrize("scheme", [Scheme.PROPOSED_PC, Scheme.IMPROVED_AS])
def test_table_three_large_order_column_matches_at_finer_step(scheme):
    values = {Scheme.PROPOSED_PC: 4.4095e-7, Scheme.IMPROVED_AS: 1.1253e-6}
    cell = BenchCell(3, scheme.value, "power-rhs", DerivativeKind.CAPUTO, scheme, 0.87, Fraction(1, 500), 3, values[scheme], {"beta": 0.9})
    assert 0.8 <= run_cell(cell).ratio <= 1.2


if __name__ == "__main__":
    import inspect
    import tempfile

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            args = [Path(tempfile.mkdtemp())] if inspect.signature(fn).parameters else []
            try:
                fn(*args)
            except AssertionError:
                pass
    for number in sorted(acceptance_log.LINES):
        print(acceptance_log.LINES[number])
