"""Re-run the published error tables cell by cell."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .model import DerivativeKind, Scheme, SolverConfig, UniformGrid
from .problems import builtin, max_abs_error
from .schemes import solve

BENCH_COLUMNS = ("method", "alpha", "dt", "max_abs_error", "paper_value", "ratio")


@dataclass(frozen=True)
class BenchCell:
    table: int
    method: str
    problem: str
    kind: DerivativeKind
    scheme: Scheme
    alpha: float
    dt: Fraction
    span: int
    paper_value: float
    params: dict = field(default_factory=dict)

    def grid(self):
        n = Fraction(self.span) / self.dt
        assert n.denominator == 1
        return UniformGrid(float(self.dt), int(n))


@dataclass(frozen=True)
class BenchResult:
    cell: BenchCell
    max_abs_error: float

    @property
    def ratio(self):
        return self.max_abs_error / self.cell.paper_value

    def row(self):
        c = self.cell
        return (c.method, c.alpha, float(c.dt), self.max_abs_error, c.paper_value, self.ratio)


def _fr(denominators):
    return [Fraction(1, d) for d in denominators]


_CL, _CA = DerivativeKind.CLASSICAL, DerivativeKind.CAPUTO
_PPC, _IAS, _AS, _AB2 = Scheme.PROPOSED_PC, Scheme.IMPROVED_AS, Scheme.CLASSICAL_AS, Scheme.TWO_STEP_AB

# (method label, kind, scheme, reference values in column order)
_CLASSICAL_ROWS = {
    1: (
        "exp-linear", 1, _fr([16, 64, 200, 1024]),
        [
            ("ppc-caputo-alpha1", _CA, _PPC, [2.6019e-3, 7.8442e-5, 2.9104e-6, 2.2690e-8]),
            ("ppc", _CL, _PPC, [4.7391e-3, 9.6052e-5, 3.3246e-6, 2.5281e-8]),
            ("as", _CL, _AS, [2.0657e-2, 3.9611e-4, 1.3570e-5, 1.0281e-7]),
            ("ab2", _CL, _AB2, [2.0503e-1, 1.4503e-2, 1.5223e-3, 5.8597e-5]),
        ],
    ),
    2: (
        "cos-riccati", 30, _fr([16, 64, 200, 700]),
        [
            ("ppc-caputo-alpha1", _CA, _PPC, [8.3152e-3, 2.2772e-5, 6.5114e-7, 2.6151e-8]),
            ("ppc", _CL, _PPC, [8.9834e-3, 1.0474e-4, 3.1725e-6, 7.1930e-8]),
            ("as", _CL, _AS, [2.2712e-2, 3.4369e-4, 1.1236e-5, 2.6193e-7]),
            ("ab2", _CL, _AB2, [2.1387e-2, 1.3589e-3, 1.3984e-4, 1.1436e-5]),
        ],
    ),
}

# (alpha, dt) columns, then per-method reference values
_FRACTIONAL_ROWS = {
    3: (
        "power-rhs", 3, {"beta": 0.9},
        [(0.25, 100), (0.25, 800), (0.56, 100), (0.56, 400), (0.87, 100), (0.87, 200)],
        [
            ("ppc", _PPC, [6.8792e-5, 6.2948e-6, 2.8000e-5, 3.6996e-6, 7.6132e-6, 4.4095e-7]),
            ("ias", _IAS, [3.9492e-4, 3.6137e-5, 8.4439e-5, 1.1157e-5, 1.9429e-5, 1.1253e-6]),
        ],
    ),
    4: (
        "poly-manufactured", 1, {},
        [(0.4, 64), (0.4, 512), (0.65, 64), (0.65, 512), (0.9, 64), (0.9, 512)],
        [
            ("ppc", _PPC, [7.6806e-4, 6.4455e-5, 3.1549e-3, 4.5513e-4, 6.4490e-3, 8.2593e-4]),
            ("ias", _IAS, [5.7442e-3, 7.0486e-4, 8.8970e-3, 1.1129e-3, 1.2365e-2, 1.5685e-3]),
        ],
    ),
}

TABLE_IDS = (1, 2, 3, 4)


def table_cells(table):
    """All in-scope cells of a published table, in row-major order."""
    if table in _CLASSICAL_ROWS:
        problem, span, dts, rows = _CLASSICAL_ROWS[table]
        return [
            BenchCell(table, label, problem, kind, scheme, 1.0, dt, span, value)
            for label, kind, scheme, values in rows
            for dt, value in zip(dts, values)
        ]
    if table in _FRACTIONAL_ROWS:
        problem, span, params, columns, rows = _FRACTIONAL_ROWS[table]
        return [
            BenchCell(table, label, problem, _CA, scheme, alpha, Fraction(1, den), span, value, params)
            for label, scheme, values in rows
            for (alpha, den), value in zip(columns, values)
        ]
    raise ValueError(f"unknown table {table!r}; choose from {TABLE_IDS}")


def run_cell(cell):
    problem = builtin(cell.problem)
    ivp = problem.make_ivp(alpha=cell.alpha, kind=cell.kind, **cell.params)
    traj = solve(ivp, SolverConfig(scheme=cell.scheme), cell.grid())
    err = max_abs_error(traj, lambda t: problem.exact(t, alpha=cell.alpha, **cell.params))
    return BenchResult(cell, err)


def worker_count():
    env = os.environ.get("FRACPC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_table(table, workers=None):
    """Run every cell of ``table``; results come back in cell order."""
    cells = table_cells(table)
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1:
        return [run_cell(c) for c in cells]
    with ThreadPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(run_cell, cells))
