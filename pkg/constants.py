"""Application constants."""


# API Configuration
class APIConfig:
    """API configuration constants."""

    VERSION = "1.0.0"
    TITLE = "Factor Approximant Solver API"
    DESCRIPTION = (
        "Sums truncated asymptotic series into self-similar factor approximants "
        "and solves initial- and boundary-value ODE benchmarks"
    )

    # Default server settings
    DEFAULT_HOST = "0.0.0.0"
    DEFAULT_PORT = 8000


class ExitCode:
    """CLI exit codes."""

    SUCCESS = 0
    USAGE = 2
    SOLVER_FAILURE = 3


class OutputFormat:
    """Output formats accepted by the CLI."""

    CSV = "csv"
    JSON = "json"
    TEXT = "text"

    ALL = (CSV, JSON, TEXT)
    TEXT_SIGNIFICANT_DIGITS = 6


class TableDefinition:
    """Sweeps behind the reproducible accuracy tables.

    Each entry: problem, epsilons, orders, whether the solution error
    (and therefore a reference solution) is part of the table, and whether
    the root-approximant defect is listed alongside.
    """

    TABLES = {
        "table1": {
            "problem": "boundary_layer",
            "epsilons": (0.1,),
            "orders": tuple(range(8, 18)),
            "with_error": True,
        },
        "table2": {
            "problem": "boundary_layer",
            "epsilons": (1.0, 10.0),
            "orders": (4, 5, 6, 7),
            "with_error": True,
        },
        "table3": {
            "problem": "gp_vortex",
            "epsilons": (1.0,),
            "orders": (2, 3, 4, 5, 6),
            "with_error": False,
            "with_root": True,
        },
        "table4": {
            "problem": "stokes_oseen",
            "epsilons": (0.1, 1.0, 10.0),
            "orders": tuple(range(4, 13)),
            "with_error": False,
        },
        "table5": {
            "problem": "strongly_singular",
            "epsilons": (0.1, 1.0, 10.0),
            "orders": (3, 5, 7, 9, 11),
            "with_error": False,
        },
    }

    NAMES = tuple(TABLES)


class CurveMetric:
    """Per-point quantities the curve command can emit."""

    DEFECT = "defect"
    ERROR = "error"

    ALL = (DEFECT, ERROR)
