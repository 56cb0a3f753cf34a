"""
Self-similar root approximants of the vortex profile.

R_k(r) = c_k r P_k(r^2)^{e_k}, with c_k = p_top^{-e_k} so that R_k -> 1 as r -> inf.
Only the closed forms for k = 2..5 are available.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from exceptions import UnsupportedProblemError
from models.report_models import DefectReport
from services.problem_catalog import builtin

__all__ = [
    "RootForm",
    "root_approximant",
    "large_r_expansion",
    "defect_of_root",
    "LARGE_R_COEFFICIENTS",
    "AVAILABLE_ORDERS",
]

# phi(r) = 1 - r^-2/2 - 9 r^-4/8 - 161 r^-6/16 + ...
LARGE_R_COEFFICIENTS = (Fraction(1), Fraction(-1, 2), Fraction(-9, 8), Fraction(-161, 16))

_F = Fraction
_FORMS: dict[int, tuple[tuple[Fraction, ...], Fraction]] = {
    2: ((_F(1), _F(1, 4)), _F(-1, 2)),
    3: ((_F(1), _F(1, 2), _F(1, 4)), _F(-1, 4)),
    4: ((_F(1), _F(3, 4), _F(3, 16), _F(1, 16)), _F(-1, 6)),
    5: ((_F(1), _F(1), _F(9, 68), _F(1, 34), _F(1, 136)), _F(-1, 8)),
}

AVAILABLE_ORDERS = tuple(_FORMS)


@dataclass(frozen=True)
class RootForm:
    """c r P(r^2)^e with exact rational polynomial coefficients (ascending powers)."""

    order: int
    polynomial: tuple[Fraction, ...]
    outer_exponent: Fraction

    @property
    def scale(self) -> float:
        return float(self.polynomial[-1]) ** (-float(self.outer_exponent))

    def _polynomial(self) -> Polynomial:
        return Polynomial([float(p) for p in self.polynomial])

    def evaluate_with_derivatives(self, r) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """R, dR/dr and d2R/dr2, finite at r = 0."""
        r = np.asarray(r, dtype=float)
        e = float(self.outer_exponent)
        P = self._polynomial()
        w = r**2
        p, p1, p2 = P(w), P.deriv(1)(w), P.deriv(2)(w)
        G = p**e
        G_w = e * p ** (e - 1) * p1
        G_ww = e * (e - 1) * p ** (e - 2) * p1**2 + e * p ** (e - 1) * p2
        c = self.scale
        return c * r * G, c * (G + 2 * w * G_w), c * (6 * r * G_w + 4 * r**3 * G_ww)

    def evaluate(self, r):
        return self.evaluate_with_derivatives(r)[0]

    def large_r_expansion(self, order: int) -> tuple[Fraction, ...]:
        """Coefficients of R_k in powers of u = r^-2 through u^order, exactly."""
        top = self.polynomial[-1]
        q = [p / top for p in reversed(self.polynomial)]
        q += [Fraction(0)] * max(0, order + 1 - len(q))
        e = self.outer_exponent
        # (1 + q_1 u + ...)^e by the J.C.P. Miller recurrence
        f = [Fraction(1)]
        for n in range(1, order + 1):
            acc = sum(((e + 1) * j - n) * q[j] * f[n - j] for j in range(1, n + 1))
            f.append(acc / n)
        return tuple(f)


def root_approximant(k: int) -> RootForm:
    """Closed-form root approximant of order k.

    Raises:
        UnsupportedProblemError: No closed form for this order
    """
    if k not in _FORMS:
        raise UnsupportedProblemError(
            f"No root approximant of order {k}", {"order": k, "available": list(AVAILABLE_ORDERS)}
        )
    polynomial, exponent = _FORMS[k]
    return RootForm(order=k, polynomial=polynomial, outer_exponent=exponent)


def large_r_expansion(k: int, order: int) -> tuple[Fraction, ...]:
    return root_approximant(k).large_r_expansion(order)


def defect_of_root(k: int, grid) -> DefectReport:
    """Defect of R_k in the vortex equation; r = 0 is excluded."""
    grid = np.asarray(grid, dtype=float)
    vortex = builtin("gp_vortex")
    u, u1, u2 = root_approximant(k).evaluate_with_derivatives(grid)
    with np.errstate(all="ignore"):
        residual = vortex.native_residual(grid, u, u1, u2, vortex.parameters)
    return DefectReport.from_residuals(grid, residual, order=k)
