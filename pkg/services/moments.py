"""Log-derivative moments of normalized series.

If s(x) = prod_i (1 + A_i x)^{n_i} exactly, then B_m = sum_i n_i A_i^m,
where B_m = (-1)^{m-1} m l_m and l_m are the coefficients of ln s(x).
"""

from typing import Iterable

import numpy as np

from exceptions import NotNormalizedError, OrderTooLowError
from models.factor_models import Factor, MomentVector
from models.series_models import TruncatedSeries
from services.series import log

__all__ = ["moments_from_series", "factor_moments", "NORMALIZATION_TOLERANCE"]

NORMALIZATION_TOLERANCE = 1e-12


def moments_from_series(s: TruncatedSeries) -> MomentVector:
    """Moments B_1..B_k of a series normalized to a_0 = 1.

    Raises:
        NotNormalizedError: If a_0 != 1
        OrderTooLowError: If the series has order 0
    """
    if abs(s[0] - 1.0) > NORMALIZATION_TOLERANCE:
        raise NotNormalizedError(
            "Moments require a normalized series with a_0 = 1", {"a0": [s[0].real, s[0].imag]}
        )
    if s.order < 1:
        raise OrderTooLowError("Moments need a series of order at least 1", {"order": s.order})

    ell = log(s).coefficients
    m = np.arange(1, s.order + 1)
    values = (-1.0) ** (m - 1) * m * ell[1:]
    return MomentVector(values=tuple(complex(v) for v in values))


def factor_moments(factors: Iterable[Factor], order: int) -> MomentVector:
    """Power sums of a factor set, including exponential rates at m = 1."""
    factors = tuple(factors)
    values = [sum((f.moment(m) for f in factors), 0j) for m in range(1, order + 1)]
    return MomentVector(values=tuple(values))
