"""
Solver Service - Orchestrates solves, table sweeps and curve data.

Flow (run_table):
    [1] Resolve the sweep: a named table or an explicit (problem, orders, eps) list
    [2] Submit every (k, eps) cell to the thread pool via loop.run_in_executor
    [3] Gather in submission order (deterministic output assembly)
    [4] Assemble the pandas frame; optionally append the printed values

Cells go through the disk cache when settings.cache_enabled is set.
Failures stay per-cell: a failed cell is a null row entry, never an exception.
"""

import asyncio
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, partial
from pathlib import Path
from typing import Any, Sequence

import logfire
import pandas as pd

from config import SolverSettings, get_settings
from constants import CurveMetric, TableDefinition
from exceptions import ApproximantError, InvalidParameterError
from models.problem_models import ProblemInfo
from models.report_models import TableCell
from services.diagnostics import compute_cell, curve_frame, table_frame
from services.problem_catalog import builtin, list_problems
from services.problem_solver import ProblemSolution, solve_problem
from services.reference_tables import ReferenceTableLoader
from services.table_cache import TableCellCache, cell_key

__all__ = ["SolverService", "Sweep", "solution_record"]


@dataclass(frozen=True)
class Sweep:
    """One table's worth of cells."""

    problem: str
    orders: tuple[int, ...]
    epsilons: tuple[float, ...]
    p0: float | None = None
    with_error: bool = False
    with_root: bool = False
    name: str | None = None

    @classmethod
    def named(cls, name: str) -> "Sweep":
        """Sweep behind one of the reproducible tables.

        Raises:
            InvalidParameterError: Unknown table name
        """
        definition = TableDefinition.TABLES.get(name)
        if definition is None:
            raise InvalidParameterError(
                f"Unknown table '{name}'", {"table": name, "available": list(TableDefinition.NAMES)}
            )
        return cls(
            problem=definition["problem"],
            orders=tuple(definition["orders"]),
            epsilons=tuple(definition["epsilons"]),
            with_error=definition["with_error"],
            with_root=definition.get("with_root", False),
            name=name,
        )


def _complex_record(value: complex) -> float | list[float]:
    value = complex(value)
    return value.real if value.imag == 0 else [value.real, value.imag]


def solution_record(solution: ProblemSolution) -> dict[str, Any]:
    """JSON-ready parameter dump of a solved problem."""
    form = solution.form
    return {
        "problem": solution.problem.name,
        "order": solution.order,
        "epsilon": solution.problem.parameters.epsilon,
        "p0": solution.problem.parameters.p0,
        "c": _complex_record(form.prefactor.leading_scale),
        "sigma": form.prefactor.zero_exponent,
        "step": form.step,
        "factors": [
            {
                "kind": factor.kind.value,
                "A": _complex_record(factor.A),
                "n": _complex_record(factor.n),
                "b": _complex_record(factor.b),
            }
            for factor in form.factors
        ],
        "theta": dict(zip(solution.problem.parameter_names, solution.theta)),
        "constraint_residuals": list(solution.residuals),
        "native_condition_residuals": solution.condition_residuals(),
        "moment_residual": form.residual,
        "alternates": [
            {"theta": list(c.theta), "quality": c.quality} for c in solution.alternates
        ],
    }


@dataclass
class SolverService:
    """
    Runs solves and sweeps for the CLI and the HTTP surface.

    Designed as a singleton per process (see api.routers.approximants).
    """

    settings: SolverSettings = field(default_factory=get_settings)
    _executor: ThreadPoolExecutor | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self._executor = ThreadPoolExecutor(
            max_workers=self.settings.max_workers, thread_name_prefix="approximant-cell"
        )

    @cached_property
    def cache(self) -> TableCellCache | None:
        """Disk cache for table cells, None when disabled."""
        if not self.settings.cache_enabled:
            return None
        return TableCellCache(
            cache_dir=Path(self.settings.cache_dir), cache_size_mb=self.settings.cache_size_mb
        )

    @cached_property
    def references(self) -> ReferenceTableLoader:
        return ReferenceTableLoader()

    def problems(self) -> list[ProblemInfo]:
        return list_problems()

    def solve(
        self, problem: str, order: int, epsilon: float | None = None, p0: float | None = None
    ) -> ProblemSolution:
        """Solve one problem at one order.

        Raises:
            ApproximantError: With problem/order/eps context in details
        """
        try:
            return solve_problem(builtin(problem, epsilon, p0), order, self.settings)
        except ApproximantError as e:
            e.details.setdefault("problem", problem)
            e.details.setdefault("order", order)
            e.details.setdefault("epsilon", epsilon)
            raise

    def _cell(self, sweep: Sweep, order: int, epsilon: float) -> TableCell:
        compute = partial(
            compute_cell,
            sweep.problem,
            order,
            epsilon,
            p0=sweep.p0,
            with_error=sweep.with_error,
            with_root=sweep.with_root,
            settings=self.settings,
        )
        if self.cache is None:
            return compute()
        key = cell_key(
            sweep.problem, order, epsilon, sweep.p0, sweep.with_error, sweep.with_root, self.settings
        )
        return self.cache.get_or_compute(key, compute)

    async def run_cells_async(self, sweep: Sweep) -> list[TableCell]:
        """All cells of a sweep, concurrently; results keep submission order."""
        loop = asyncio.get_running_loop()
        tasks = [
            loop.run_in_executor(self._executor, self._cell, sweep, k, eps)
            for k in sweep.orders
            for eps in sweep.epsilons
        ]
        cells = await asyncio.gather(*tasks)
        failed = sum(cell.failed for cell in cells)
        logfire.info(
            "Sweep finished",
            problem=sweep.problem,
            table=sweep.name,
            cells=len(cells),
            failed=failed,
        )
        return list(cells)

    async def run_table_async(self, sweep: Sweep, compare: bool = False) -> pd.DataFrame:
        cells = await self.run_cells_async(sweep)
        frame = table_frame(
            cells, epsilons=sweep.epsilons, with_error=sweep.with_error, with_root=sweep.with_root
        )
        if compare and sweep.name is not None:
            frame = self.references.compare(sweep.name, frame)
        return frame

    async def run_curve_async(
        self,
        problem: str,
        orders: Sequence[int],
        epsilon: float | None = None,
        p0: float | None = None,
        metric: str = CurveMetric.DEFECT,
    ) -> pd.DataFrame:
        """Per-point curve columns for each order; failed orders stay as null columns."""
        spec = builtin(problem, epsilon, p0)
        loop = asyncio.get_running_loop()

        def attempt(k: int) -> ProblemSolution | None:
            try:
                return solve_problem(spec, k, self.settings)
            except ApproximantError as e:
                logfire.warning(
                    "Curve order failed", problem=problem, order=k, epsilon=epsilon, error_type=e.error_type
                )
                return None

        solutions = await asyncio.gather(
            *(loop.run_in_executor(self._executor, attempt, k) for k in orders)
        )
        return await loop.run_in_executor(
            self._executor,
            partial(
                curve_frame,
                spec,
                dict(zip(orders, solutions)),
                metric=metric,
                settings=self.settings,
            ),
        )

    def run_table(self, sweep: Sweep, compare: bool = False) -> pd.DataFrame:
        return asyncio.run(self.run_table_async(sweep, compare))

    def run_curve(self, problem: str, orders: Sequence[int], **kwargs) -> pd.DataFrame:
        return asyncio.run(self.run_curve_async(problem, orders, **kwargs))

    def close(self) -> None:
        self._executor.shutdown(wait=False)
        if "cache" in self.__dict__ and self.cache is not None:
            self.cache.close()
