"""
Approximant API Endpoints.

Flow:
    [1] GET  /api/v1/problems - catalog listing
    [2] POST /api/v1/solve    - one problem at one order -> approximant parameters
    [3] POST /api/v1/table    - named table or explicit sweep -> rows (null cells for failures)

Status codes:
    400 - usage errors (unknown problem, invalid parameter, order too low)
    422 - solver failures (no solution, degenerate moments, ...)
    500 - anything unexpected
"""

import asyncio
from functools import lru_cache
from typing import Annotated

from fastapi import APIRouter, Depends, HTTPException
import logfire

from exceptions import USAGE_ERROR_TYPES, ApproximantError
from models.api_models import (
    ErrorResponse,
    ProblemListResponse,
    SolveRequest,
    SolveResponse,
    TableRequest,
    TableResponse,
)
from services.solver_service import SolverService, Sweep, solution_record
from utils import frame_records, json_safe

router = APIRouter(prefix="/api/v1", tags=["approximants"])


@lru_cache(maxsize=1)
def get_solver_service() -> SolverService:
    """
    Get singleton SolverService (cached via @lru_cache).

    Returns:
        SolverService: Singleton service instance
    """
    logfire.info("Initializing singleton SolverService")
    return SolverService()


def _http_error(e: ApproximantError) -> HTTPException:
    status_code = 400 if e.error_type in USAGE_ERROR_TYPES else 422
    logfire.error(
        f"Approximant error ({e.error_type})",
        error_message=e.message,
        error_details=e.details,
    )
    return HTTPException(status_code=status_code, detail=json_safe(e.to_record()))


@router.get("/problems", response_model=ProblemListResponse)
async def problems(
    service: Annotated[SolverService, Depends(get_solver_service)],
) -> ProblemListResponse:
    return ProblemListResponse(problems=service.problems())


@router.post(
    "/solve",
    response_model=SolveResponse,
    responses={400: {"model": ErrorResponse}, 422: {"model": ErrorResponse}},
)
async def solve(
    request: SolveRequest,
    service: Annotated[SolverService, Depends(get_solver_service)],
) -> SolveResponse:
    """Solve one problem; the shooting search runs in a worker thread."""
    logfire.info("Solve request", problem=request.problem, order=request.order, epsilon=request.epsilon)
    try:
        solution = await asyncio.to_thread(
            service.solve, request.problem, request.order, request.epsilon, request.p0
        )
    except ApproximantError as e:
        raise _http_error(e) from e
    return SolveResponse.model_validate(json_safe(solution_record(solution)))


@router.post(
    "/table",
    response_model=TableResponse,
    responses={400: {"model": ErrorResponse}},
)
async def table(
    request: TableRequest,
    service: Annotated[SolverService, Depends(get_solver_service)],
) -> TableResponse:
    """Table rows; orders that fail to solve come back as null cells."""
    try:
        if request.name is not None:
            sweep = Sweep.named(request.name)
        else:
            sweep = Sweep(
                problem=request.problem,
                orders=tuple(request.orders),
                epsilons=tuple(request.epsilons),
                p0=request.p0,
                with_error=request.with_error,
            )
        frame = await service.run_table_async(sweep, compare=request.compare)
    except ApproximantError as e:
        raise _http_error(e) from e
    return TableResponse(
        name=sweep.name,
        problem=sweep.problem,
        columns=[str(c) for c in frame.columns],
        rows=frame_records(frame),
    )
