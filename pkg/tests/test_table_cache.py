from config import SolverSettings
from models.report_models import TableCell
from services.table_cache import TableCellCache, cell_key, settings_fingerprint


def test_fingerprint_ignores_cache_plumbing(solver_settings):
    other = solver_settings.model_copy(update={"cache_dir": "/elsewhere", "max_workers": 3})
    assert settings_fingerprint(other) == settings_fingerprint(solver_settings)
    tighter = solver_settings.model_copy(update={"grid_points": 11})
    assert settings_fingerprint(tighter) != settings_fingerprint(solver_settings)


def test_cell_key_separates_epsilon(solver_settings):
    a = cell_key("stokes_oseen", 5, 0.1, None, False, False, solver_settings)
    b = cell_key("stokes_oseen", 5, 1.0, None, False, False, solver_settings)
    assert a != b
    hash(a)


def test_get_or_compute_hits_after_first_miss(tmp_path, solver_settings: SolverSettings):
    cache = TableCellCache(cache_dir=tmp_path / "cells", cache_size_mb=1)
    assert cache.available
    calls = []

    def compute():
        calls.append(1)
        return TableCell(problem="stokes_oseen", order=5, epsilon=0.1, max_defect=0.0035)

    key = cell_key("stokes_oseen", 5, 0.1, None, False, False, solver_settings)
    first = cache.get_or_compute(key, compute)
    second = cache.get_or_compute(key, compute)
    assert first == second
    assert len(calls) == 1

    cache.clear()
    cache.get_or_compute(key, compute)
    assert len(calls) == 2
    cache.close()


def test_failed_cells_are_cached(tmp_path, solver_settings):
    cache = TableCellCache(cache_dir=tmp_path, cache_size_mb=1)
    failed = TableCell(problem="strongly_singular", order=4, epsilon=1.0, error_type="no_solution", message="m")
    key = cell_key("strongly_singular", 4, 1.0, None, False, False, solver_settings)
    cache.get_or_compute(key, lambda: failed)
    again = cache.get_or_compute(key, lambda: TableCell(problem="x", order=0))
    assert again.failed
    assert again.error_type == "no_solution"
    cache.close()
