"""
Table Cell Cache - Disk-based cache for computed accuracy-table cells.

Caching Strategy:
    - Cache key: (problem, order, eps, p0, error/root flags, solver fingerprint) tuple
    - Storage: diskcache.Cache with configurable size limit
    - Eviction: LRU (handled by diskcache)
    - Format: TableCell.model_dump() dictionaries

Flow:
    [1] Check cache for the cell key
    [2] If hit: Rebuild the TableCell
    [3] If miss: Compute the cell, cache it, and return

Failed cells are cached too: a solve that fails under fixed settings fails again.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import diskcache
import logfire

from config import SolverSettings
from models.report_models import TableCell

CellKey = tuple

_FINGERPRINT_EXCLUDE = {"cache_enabled", "cache_dir", "cache_size_mb", "max_workers"}


def settings_fingerprint(settings: SolverSettings) -> tuple:
    """Settings that change a cell's numbers, as a hashable tuple."""
    values = settings.model_dump(exclude=_FINGERPRINT_EXCLUDE)
    return tuple(sorted(values.items()))


def cell_key(
    name: str,
    order: int,
    epsilon: float,
    p0: float | None,
    with_error: bool,
    with_root: bool,
    settings: SolverSettings,
) -> CellKey:
    return (name, order, epsilon, p0, with_error, with_root, settings_fingerprint(settings))


@dataclass
class TableCellCache:
    """Manages cached table cells with diskcache."""

    cache_dir: Path
    cache_size_mb: int
    _cache: diskcache.Cache | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        """Initialize diskcache.Cache; the cache is disabled if the directory is unusable."""
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            size_limit_bytes = self.cache_size_mb * 1024 * 1024
            self._cache = diskcache.Cache(str(self.cache_dir), size_limit=size_limit_bytes)
            logfire.info(
                f"TableCellCache initialized with cache_dir={self.cache_dir}, size_limit={self.cache_size_mb}MB"
            )
        except OSError as e:
            logfire.error(f"Failed to initialize diskcache: {e}")
            self._cache = None

    @property
    def available(self) -> bool:
        return self._cache is not None

    def get_or_compute(self, key: CellKey, compute: Callable[[], TableCell]) -> TableCell:
        """Return the cached cell or compute and store it.

        Args:
            key: Cell key from cell_key()
            compute: Zero-argument callable producing the cell

        Returns:
            TableCell: Cached or freshly computed cell
        """
        if self._cache is None:
            return compute()

        cached = self._cache.get(key)
        if cached is not None:
            logfire.debug(f"Cache hit for cell {key[:3]}")
            return TableCell.model_validate(cached)

        logfire.debug(f"Cache miss for cell {key[:3]}")
        cell = compute()
        try:
            self._cache[key] = cell.model_dump()
        except (OSError, diskcache.Timeout) as e:
            logfire.warning(f"Failed to cache table cell: {e}")
        return cell

    def clear(self) -> None:
        if self._cache is not None:
            self._cache.clear()

    def close(self) -> None:
        if self._cache is not None:
            self._cache.close()
