"""FastAPI application for the factor approximant solver."""

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import logfire

from api.routers.approximants import router as approximants_router
from constants import APIConfig
from exceptions import USAGE_ERROR_TYPES, ApproximantError
from utils import json_safe

# Configure logfire for local console logging only (no cloud service)
logfire.configure(send_to_logfire=False)

__all__ = [
    "app",
    "approximant_error_handler",
    "global_exception_handler",
    "root",
]


app = FastAPI(
    title=APIConfig.TITLE,
    description=APIConfig.DESCRIPTION,
    version=APIConfig.VERSION,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(ApproximantError)
async def approximant_error_handler(request: Request, exc: ApproximantError):
    """Handle approximant errors raised outside the routers' own mapping."""
    logfire.error(f"Approximant error: {exc.message}", details=exc.details)
    return JSONResponse(
        status_code=400 if exc.error_type in USAGE_ERROR_TYPES else 422,
        content=json_safe(exc.to_record()),
    )


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Handle all unhandled exceptions."""
    logfire.exception(
        f"Unhandled exception in {request.method} {request.url.path}: {exc}"
    )
    return JSONResponse(
        status_code=500,
        content={
            "error": "InternalServerError",
            "message": "An unexpected error occurred",
        },
    )


app.include_router(approximants_router)


@app.get("/")
async def root():
    """Service banner with the available endpoints."""
    return {
        "title": APIConfig.TITLE,
        "version": APIConfig.VERSION,
        "endpoints": ["/api/v1/problems", "/api/v1/solve", "/api/v1/table"],
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "main:app",
        host=APIConfig.DEFAULT_HOST,
        port=APIConfig.DEFAULT_PORT,
        reload=True,
        log_level="info",
    )
