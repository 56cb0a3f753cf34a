"""Published accuracy tables. Full sweeps carry the `published` marker; spot checks always run."""

import math

import pytest

from config import SolverSettings
from services.reference_tables import ReferenceTableLoader
from services.solver_service import SolverService, Sweep

@pytest.fixture(scope="module")
def service():
    service = SolverService(settings=SolverSettings(_env_file=None, cache_enabled=False))
    yield service
    service.close()


@pytest.fixture(scope="module")
def published() -> ReferenceTableLoader:
    return ReferenceTableLoader()


def _within(value, printed: float, rel: float) -> bool:
    return value is not None and not math.isnan(value) and abs(value - printed) <= rel * printed


def _rows(frame):
    return frame.set_index("k")


@pytest.mark.published
def test_vortex_factor_and_root_defects(service, published):
    frame = _rows(service.run_table(Sweep.named("table3")))
    for k in range(2, 7):
        printed = published.value("table3", k, "D_factor")
        assert _within(frame.loc[k, "D_factor"], printed, 0.25), (k, frame.loc[k, "D_factor"])
    for k in range(2, 6):
        printed = published.value("table3", k, "D_root")
        assert _within(frame.loc[k, "D_root"], printed, 0.20), (k, frame.loc[k, "D_root"])
    assert frame.loc[6, "D_root"] is None or math.isnan(frame.loc[6, "D_root"])
    for k in range(3, 6):
        assert frame.loc[k, "D_factor"] < frame.loc[k, "D_root"]


@pytest.mark.published
def test_boundary_layer_moderate_eps(service, published):
    frame = _rows(service.run_table(Sweep.named("table2")))
    for k in (4, 5, 6, 7):
        for column, rel in (("D_eps1", 0.30), ("Delta_eps1", 0.30), ("delta_eps1", 0.35)):
            printed = published.value("table2", k, column)
            assert _within(frame.loc[k, column], printed, rel), (k, column, frame.loc[k, column])


@pytest.mark.published
def test_boundary_layer_small_eps_spot_checks(service, published):
    sweep = Sweep(problem="boundary_layer", orders=(10, 13, 17), epsilons=(0.1,), with_error=True, name="table1")
    frame = _rows(service.run_table(sweep))
    for k in (10, 13, 17):
        for column in ("D", "Delta"):
            printed = published.value("table1", k, column)
            assert _within(frame.loc[k, column], printed, 0.40), (k, column, frame.loc[k, column])
    assert frame.loc[10, "D"] > frame.loc[13, "D"] > frame.loc[17, "D"]


@pytest.mark.parametrize(
    "problem, table, eps, k, printed",
    [
        ("boundary_layer", "table2", 1.0, 5, 0.42),
        ("stokes_oseen", "table4", 0.1, 5, 0.0035),
        ("stokes_oseen", "table4", 1.0, 8, 0.00095),
        ("strongly_singular", "table5", 0.1, 3, 0.0035),
        ("strongly_singular", "table5", 1.0, 9, 0.0017),
        ("strongly_singular", "table5", 10.0, 11, 0.078),
    ],
)
def test_defect_spot_checks(service, published, problem, table, eps, k, printed):
    assert published.value(table, k, f"D_eps{eps:g}") == pytest.approx(printed)
    frame = service.run_table(Sweep(problem=problem, orders=(k,), epsilons=(eps,)))
    assert _within(frame.loc[0, "D"], printed, 0.40), frame.loc[0, "D"]


def test_boundary_layer_order_counts_the_leading_term(service, published):
    frame = service.run_table(Sweep(problem="boundary_layer", orders=(5,), epsilons=(1.0,), with_error=True))
    assert _within(frame.loc[0, "D"], published.value("table2", 5, "D_eps1"), 0.30), frame.loc[0, "D"]
    assert _within(frame.loc[0, "Delta"], published.value("table2", 5, "Delta_eps1"), 0.30), frame.loc[0, "Delta"]


def test_vortex_fifth_order_spot_check(service, published):
    frame = service.run_table(Sweep(problem="gp_vortex", orders=(5,), epsilons=(1.0,)))
    assert _within(frame.loc[0, "D"], published.value("table3", 5, "D_factor"), 0.25), frame.loc[0, "D"]
