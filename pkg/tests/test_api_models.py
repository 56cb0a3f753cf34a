import pytest
from pydantic import ValidationError

from models.api_models import RunConfig, TableRequest


def test_run_config_round_trips_through_json():
    config = RunConfig(problem="stokes_oseen", orders=(4, 5), epsilons=(0.1, 1.0), format="json", seed=3)
    assert RunConfig.model_validate_json(config.model_dump_json()) == config
    assert config.epsilon == 0.1


@pytest.mark.parametrize(
    "field, value",
    [("format", "xml"), ("metric", "energy"), ("name", "table9"), ("orders", (0,)), ("grid_points", 2)],
)
def test_run_config_rejects(field, value):
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})


def test_run_config_forbids_unknown_keys():
    with pytest.raises(ValidationError):
        RunConfig.model_validate({"problem": "bell", "order": 3})


def test_flags_override_and_unset_flags_keep_values():
    base = RunConfig(problem="bell", orders=(3,), compare=True)
    merged = base.merged(problem=None, orders=(), epsilons=(2.0,), compare=None, format="text")
    assert merged.problem == "bell"
    assert merged.orders == (3,)
    assert merged.epsilons == (2.0,)
    assert merged.compare is True
    assert merged.format == "text"


def test_settings_overrides():
    assert RunConfig().settings_overrides() == {}
    overrides = RunConfig(grid_points=11, tolerance=1e-6).settings_overrides()
    assert overrides == {"grid_points": 11, "acceptance_tolerance": 1e-6, "constraint_tolerance": 1e-6}


def test_table_request_needs_a_name_or_an_explicit_sweep():
    TableRequest(name="table3")
    TableRequest(problem="bell", orders=[3])
    with pytest.raises(ValidationError):
        TableRequest(problem="bell")
