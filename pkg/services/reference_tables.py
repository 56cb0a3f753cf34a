"""
Reference Table Loader - Published accuracy values for the reproducible tables.

Architecture:
    - Manifest-driven: values defined in assets/tables/reference_values.json
    - Validation: Pydantic models ensure every row carries k and numeric (or null) columns
    - Comparison: appends `<column>_printed` and `<column>_rel_dev` to a computed table

Used by: the CLI table command (--compare) and the accuracy tests.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import logfire
import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator

from exceptions import InvalidParameterError

__all__ = ["ReferenceTableLoader", "ReferenceTableModel", "ManifestModel", "DEFAULT_MANIFEST"]

DEFAULT_MANIFEST = Path(__file__).resolve().parent.parent / "assets" / "tables" / "reference_values.json"


class ReferenceTableModel(BaseModel):
    """One published table: rows keyed by order k."""

    title: str = ""
    rows: list[dict[str, float | None]] = Field(min_length=1)

    @field_validator("rows")
    @classmethod
    def _rows_have_order(cls, rows):
        for row in rows:
            if "k" not in row or row["k"] is None:
                raise ValueError("every row needs an order k")
        return rows


class ManifestModel(BaseModel):
    """Pydantic model for the reference manifest."""

    version: str = "1.0"
    tables: dict[str, ReferenceTableModel] = Field(description="Table name to published rows")


@dataclass
class ReferenceTableLoader:
    """Loads published values and lines them up against computed tables."""

    manifest_path: Path = DEFAULT_MANIFEST
    _tables: dict[str, pd.DataFrame] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        """Load and validate the manifest.

        Raises:
            FileNotFoundError: If the manifest file doesn't exist
            ValidationError: If the manifest structure is invalid
        """
        if not self.manifest_path.exists():
            raise FileNotFoundError(f"Manifest file not found: {self.manifest_path}")

        with open(self.manifest_path, "r") as f:
            manifest = ManifestModel.model_validate(json.load(f))

        for name, table in manifest.tables.items():
            frame = pd.DataFrame(table.rows)
            frame["k"] = frame["k"].astype(int)
            self._tables[name] = frame
        logfire.info(f"Loaded reference manifest with {len(self._tables)} tables")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._tables)

    def table(self, name: str) -> pd.DataFrame:
        """Published rows of `name` as a DataFrame (copy).

        Raises:
            InvalidParameterError: No published values for `name`
        """
        if name not in self._tables:
            raise InvalidParameterError(
                f"No published values for table '{name}'", {"table": name, "available": list(self._tables)}
            )
        return self._tables[name].copy()

    def value(self, name: str, k: int, column: str) -> float | None:
        frame = self.table(name)
        match = frame.loc[frame["k"] == k, column] if column in frame else pd.Series(dtype=float)
        if match.empty or pd.isna(match.iloc[0]):
            return None
        return float(match.iloc[0])

    def compare(self, name: str, computed: pd.DataFrame) -> pd.DataFrame:
        """Append printed values and relative deviations (computed - printed) / printed."""
        published = self.table(name)
        merged = computed.merge(published, on="k", how="left", suffixes=("", "_printed"))
        for column in computed.columns:
            if column == "k" or column not in published.columns:
                continue
            printed = merged[f"{column}_printed"].astype(float)
            values = merged[column].astype(float)
            with np.errstate(all="ignore"):
                merged[f"{column}_rel_dev"] = (values - printed) / printed
        return merged
