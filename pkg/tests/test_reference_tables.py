import json

import pandas as pd
import pytest
from pydantic import ValidationError

from constants import TableDefinition
from exceptions import InvalidParameterError
from services.reference_tables import ReferenceTableLoader


@pytest.fixture(scope="module")
def loader() -> ReferenceTableLoader:
    return ReferenceTableLoader()


def test_every_reproducible_table_has_published_values(loader):
    assert set(loader.names) == set(TableDefinition.NAMES)


@pytest.mark.parametrize("name", TableDefinition.NAMES)
def test_published_orders_match_the_sweeps(loader, name):
    assert tuple(loader.table(name)["k"]) == tuple(TableDefinition.TABLES[name]["orders"])


def test_value_lookup(loader):
    assert loader.value("table3", 3, "D_factor") == pytest.approx(0.017)
    assert loader.value("table2", 7, "Delta_eps1") == pytest.approx(0.00064)
    assert loader.value("table3", 9, "D_factor") is None
    assert loader.value("table3", 3, "missing") is None


def test_unknown_table(loader):
    with pytest.raises(InvalidParameterError):
        loader.table("table9")


def test_compare_appends_printed_and_deviation(loader):
    computed = pd.DataFrame({"k": [2, 3], "D_factor": [0.12, 0.034], "D_root": [None, 0.25]})
    merged = loader.compare("table3", computed)
    assert "D_factor_printed" in merged.columns
    assert merged.loc[1, "D_factor_rel_dev"] == pytest.approx(1.0)
    assert merged.loc[0, "D_factor_rel_dev"] == pytest.approx(0.0)
    assert pd.isna(merged.loc[0, "D_root_rel_dev"])


def test_missing_manifest(tmp_path):
    with pytest.raises(FileNotFoundError):
        ReferenceTableLoader(manifest_path=tmp_path / "absent.json")


def test_rows_need_an_order(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"tables": {"t": {"rows": [{"D": 1.0}]}}}))
    with pytest.raises(ValidationError):
        ReferenceTableLoader(manifest_path=path)
