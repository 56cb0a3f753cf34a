"""
Built-in benchmark problems.

Each entry pairs a native ODE E[u] = 0 with a working-variable equation whose
power series is generated order by order:

    linear_singular    eps u'' + 2u' + u/eps = 0,             u(0) = 1, u'(0) = -1/eps
    carrier_transfer   (eps u + t) u' + u - 1 = 0,             u(0) = 2
    logistic           eps u' = u (1 - u),                     u(0) = p0
    kink               (eps/2) u'' + u - u^3 = 0,              u(0) = 0, u(+-inf) = +-1
    bell               (eps/2) u'' - u + u^3 = 0,              u'(0) = 0, u(+-inf) = 0
    boundary_layer     eps u'' + t u' - t u = 0,               u(0) = 0, u(1) = e
    gp_vortex          u'' + u'/r - u/r^2 + u - u^3 = 0,       u(0) = 0, u(inf) = 1
    stokes_oseen       u'' + 2u'/r + eps u u' = 0,             u(1) = 0, u(inf) = 1
    strongly_singular  u'' + u'/r + u'^2 + eps u u' = 0,       u(1) = 0, u(inf) = 1
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from exceptions import InvalidParameterError, UnknownProblemError
from models.problem_models import (
    Condition,
    ProblemInfo,
    ProblemParameters,
    ProblemSpec,
    ReferenceSetup,
    VariableTransform,
)

__all__ = ["builtin", "list_problems", "problem_names", "DEFAULT_P0"]

DEFAULT_P0 = 2.0
_WIDE_BRACKET = ((1e-3, 100.0),)
_SIGNED_BRACKET = ((-10.0, -1e-3), (1e-3, 10.0))


def _identity(t):
    t = np.asarray(t, dtype=float)
    return t, np.ones_like(t), np.zeros_like(t)


def _linear(scale: float, shift: float = 0.0):
    """scale * t + shift with its t-derivatives."""

    def triple(t):
        t = np.asarray(t, dtype=float)
        return scale * t + shift, np.full_like(t, scale), np.zeros_like(t)

    return triple


def _constant(value: float):
    def triple(t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, value), np.zeros_like(t), np.zeros_like(t)

    return triple


def _shifted(offset: float) -> VariableTransform:
    return VariableTransform(
        working=_linear(1.0, -offset),
        inverse=lambda s: np.asarray(s, dtype=float) + offset,
        description=f"x = r - {offset:g}",
    )


# linear_singular


def _linear_singular(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon

    def exact(t):
        u = np.exp(-np.asarray(t, dtype=float) / eps)
        return u, -u / eps, u / eps**2

    return ProblemSpec(
        name="linear_singular",
        description="Singular linear initial value problem with an instanton-type solution",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: p.epsilon * u2 + 2.0 * u1 + u / p.epsilon,
        series_residual=lambda y, x, p: p.epsilon * y.derivative(2) + 2 * y.derivative() + y / p.epsilon,
        coefficient_presets=lambda theta, p: {0: 1.0, 1: -1.0 / p.epsilon},
        order_offset=2,
        transform=VariableTransform(working=_identity, inverse=lambda s: np.asarray(s, dtype=float)),
        domain=(0.0, 10.0 * abs(eps)),
        conditions=(Condition.value(0.0, 1.0), Condition.derivative(0.0, -1.0 / eps)),
        native_conditions=(Condition.value(0.0, 1.0), Condition.derivative(0.0, -1.0 / eps)),
        working_variable="t",
        exact=exact,
        reference=ReferenceSetup(
            kind="ivp",
            rhs=lambda t, y: np.array([y[1], -(2.0 * y[1] + y[0] / eps) / eps]),
            initial_state=(1.0, -1.0 / eps),
        ),
    )


# carrier_transfer: z = x + u, x = t / eps


def _carrier_transfer(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon

    def exact(t):
        x = np.asarray(t, dtype=float) / eps
        R = np.sqrt(4.0 + 2.0 * x + x**2)
        return R - x, ((1.0 + x) / R - 1.0) / eps, 3.0 / R**3 / eps**2

    return ProblemSpec(
        name="carrier_transfer",
        description="Nonlinear carrier-transfer initial value problem",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: (p.epsilon * u + t) * u1 + u - 1.0,
        series_residual=lambda z, x, p: z * z.derivative() - x - 1,
        coefficient_presets=lambda theta, p: {0: 2.0},
        order_offset=1,
        transform=VariableTransform(
            working=_linear(1.0 / eps),
            inverse=lambda s: np.asarray(s, dtype=float) * eps,
            offset=_linear(-1.0 / eps),
            description="x = t/eps, u = z(x) - x",
        ),
        domain=(0.0, 10.0 * abs(eps)),
        conditions=(Condition.value(0.0, 2.0),),
        native_conditions=(Condition.value(0.0, 2.0),),
        exact=exact,
        reference=ReferenceSetup(
            kind="ivp",
            rhs=lambda t, y: np.array([(1.0 - y[0]) / (eps * y[0] + t)]),
            initial_state=(2.0,),
        ),
    )


# logistic: x = exp(-t/eps), x y' = y (y - 1)


def _logistic(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon
    p0 = params.p0
    K = 1.0 / p0 - 1.0

    def working(t):
        s = np.exp(-np.asarray(t, dtype=float) / eps)
        return s, -s / eps, s / eps**2

    def exact(t):
        u = 1.0 / (1.0 + K * np.exp(-np.asarray(t, dtype=float) / eps))
        u1 = u * (1.0 - u) / eps
        return u, u1, u1 * (1.0 - 2.0 * u) / eps

    return ProblemSpec(
        name="logistic",
        description="Logistic equation with initial value p0",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: p.epsilon * u1 - u * (1.0 - u),
        series_residual=lambda y, x, p: x * y.derivative() - y * y + y,
        coefficient_presets=lambda theta, p: {0: 1.0, 1: theta[0]},
        order_offset=0,
        transform=VariableTransform(
            working=working,
            inverse=lambda s: -eps * np.log(np.asarray(s, dtype=float)),
            description="x = exp(-t/eps)",
        ),
        domain=(0.0, 10.0 * abs(eps)),
        conditions=(Condition.value(0.0, 1.0), Condition.value(1.0, p0)),
        native_conditions=(Condition.value(0.0, p0),),
        parameter_names=("a1",),
        parameter_brackets=_SIGNED_BRACKET,
        min_order=3,
        exact=exact,
        reference=ReferenceSetup(
            kind="ivp",
            rhs=lambda t, y: np.array([y[0] * (1.0 - y[0]) / eps]),
            initial_state=(p0,),
        ),
    )


# kink: u = y(z) - 2, z = exp(2x / sqrt(eps))


def _kink(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon
    root = math.sqrt(eps)

    def working(x):
        z = np.exp(2.0 * np.asarray(x, dtype=float) / root)
        return z, 2.0 * z / root, 4.0 * z / eps

    def exact(x):
        u = np.tanh(np.asarray(x, dtype=float) / root)
        return u, (1.0 - u**2) / root, -2.0 * u * (1.0 - u**2) / eps

    return ProblemSpec(
        name="kink",
        description="Kink soliton of the stationary nonlinear Schrodinger equation",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: 0.5 * p.epsilon * u2 + u - u**3,
        series_residual=lambda y, z, p: (
            2 * z * z * y.derivative(2) + 2 * z * y.derivative() + 6 - 11 * y + 6 * y * y - y * y * y
        ),
        coefficient_presets=lambda theta, p: {0: 1.0, 1: theta[0]},
        order_offset=0,
        transform=VariableTransform(
            working=working,
            inverse=lambda z: 0.5 * root * np.log(np.asarray(z, dtype=float)),
            offset=_constant(-2.0),
            description="z = exp(2x/sqrt(eps)), u = y(z) - 2",
        ),
        domain=(-6.0 * root, 6.0 * root),
        conditions=(Condition.value(0.0, 1.0), Condition.value(1.0, 2.0)),
        native_conditions=(Condition.value(0.0, 0.0),),
        parameter_names=("a1",),
        working_variable="z",
        native_variable="x",
        exact=exact,
    )


# bell: u = y(z), z = exp(x sqrt(2/eps)), series odd in z


def _bell(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon
    kappa = math.sqrt(2.0 / eps)

    def working(x):
        z = np.exp(kappa * np.asarray(x, dtype=float))
        return z, kappa * z, kappa**2 * z

    def exact(x):
        arg = kappa * np.asarray(x, dtype=float)
        sech = 1.0 / np.cosh(arg)
        u = math.sqrt(2.0) * sech
        return u, -kappa * u * np.tanh(arg), kappa**2 * u * (1.0 - 2.0 * sech**2)

    return ProblemSpec(
        name="bell",
        description="Bell soliton of the stationary nonlinear Schrodinger equation",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: 0.5 * p.epsilon * u2 - u + u**3,
        series_residual=lambda y, z, p: z * z * y.derivative(2) + z * y.derivative() - y + y * y * y,
        coefficient_presets=lambda theta, p: {0: 0.0, 1: theta[0]},
        order_offset=0,
        transform=VariableTransform(
            working=working,
            inverse=lambda z: np.log(np.asarray(z, dtype=float)) / kappa,
            description="z = exp(x sqrt(2/eps))",
        ),
        domain=(-6.0 * math.sqrt(eps), 6.0 * math.sqrt(eps)),
        conditions=(Condition.value(0.0, 0.0), Condition.derivative(1.0, 0.0)),
        native_conditions=(Condition.derivative(0.0, 0.0),),
        parameter_names=("a1",),
        leading_exponent=1,
        step=2,
        working_variable="z",
        native_variable="x",
        exact=exact,
    )


# boundary_layer: u = exp(x) z(x)


def _boundary_layer(params: ProblemParameters) -> ProblemSpec:
    eps = params.epsilon

    def multiplier(x):
        m = np.exp(np.asarray(x, dtype=float))
        return m, m, m

    return ProblemSpec(
        name="boundary_layer",
        description="Singularly perturbed two-point boundary-layer problem",
        parameters=params,
        native_residual=lambda t, u, u1, u2, p: p.epsilon * u2 + t * u1 - t * u,
        series_residual=lambda z, x, p: (
            p.epsilon * z.derivative(2) + (2 * p.epsilon + x) * z.derivative() + p.epsilon * z
        ),
        coefficient_presets=lambda theta, p: {0: 0.0, 1: theta[0]},
        order_offset=2,
        transform=VariableTransform(
            working=_identity,
            inverse=lambda s: np.asarray(s, dtype=float),
            multiplier=multiplier,
            description="u = exp(x) z(x)",
        ),
        domain=(0.0, 1.0),
        conditions=(Condition.value(0.0, 0.0), Condition.value(1.0, 1.0)),
        native_conditions=(Condition.value(0.0, 0.0), Condition.value(1.0, math.e)),
        parameter_names=("z1",),
        parameter_brackets=_WIDE_BRACKET,
        leading_exponent=1,
        min_order=2,
        order_shift=1,
        native_variable="x",
        reference=ReferenceSetup(
            kind="bvp",
            rhs=lambda x, y: np.array([y[1], x * (y[0] - y[1]) / eps]),
            left_value=0.0,
            right_value=math.e,
            slope_guesses=(1.0, 2.0),
        ),
    )


# gp_vortex: series odd in r, constraint u(inf) = 1


def _gp_vortex(params: ProblemParameters) -> ProblemSpec:
    return ProblemSpec(
        name="gp_vortex",
        description="Gross-Pitaevskii vortex core profile",
        parameters=params,
        native_residual=lambda r, u, u1, u2, p: u2 + u1 / r - u / r**2 + u - u**3,
        series_residual=lambda y, r, p: (
            r * r * y.derivative(2) + r * y.derivative() - y + r * r * y - r * r * y * y * y
        ),
        coefficient_presets=lambda theta, p: {0: 0.0, 1: theta[0]},
        order_offset=0,
        transform=VariableTransform(working=_identity, inverse=lambda s: np.asarray(s, dtype=float), description="r"),
        domain=(0.0, 20.0),
        conditions=(Condition.value(0.0, 0.0), Condition.asymptotic(1.0, 0.0)),
        native_conditions=(Condition.value(0.0, 0.0),),
        parameter_names=("a1",),
        leading_exponent=1,
        step=2,
        min_order=1,
        working_variable="r",
        native_variable="r",
    )


# stokes_oseen / strongly_singular: x = r - 1, equations multiplied by r = 1 + x


def _stokes_oseen(params: ProblemParameters) -> ProblemSpec:
    return ProblemSpec(
        name="stokes_oseen",
        description="Stokes-Oseen model of viscous flow past a sphere",
        parameters=params,
        native_residual=lambda r, u, u1, u2, p: u2 + 2.0 * u1 / r + p.epsilon * u * u1,
        series_residual=lambda y, x, p: (
            (1 + x) * y.derivative(2) + 2 * y.derivative() + p.epsilon * (1 + x) * y * y.derivative()
        ),
        coefficient_presets=lambda theta, p: {0: 0.0, 1: theta[0]},
        order_offset=2,
        transform=_shifted(1.0),
        domain=(1.0, 50.0),
        conditions=(Condition.value(0.0, 0.0), Condition.asymptotic(1.0, 0.0)),
        native_conditions=(Condition.value(1.0, 0.0),),
        parameter_names=("a1",),
        parameter_brackets=_WIDE_BRACKET,
        leading_exponent=1,
        min_order=2,
        order_shift=1,
        native_variable="r",
    )


def _strongly_singular(params: ProblemParameters) -> ProblemSpec:
    return ProblemSpec(
        name="strongly_singular",
        description="Strongly singular variant with a quadratic gradient term",
        parameters=params,
        native_residual=lambda r, u, u1, u2, p: u2 + u1 / r + u1**2 + p.epsilon * u * u1,
        series_residual=lambda y, x, p: (
            (1 + x) * y.derivative(2)
            + y.derivative()
            + (1 + x) * y.derivative() * y.derivative()
            + p.epsilon * (1 + x) * y * y.derivative()
        ),
        coefficient_presets=lambda theta, p: {0: 0.0, 1: theta[0]},
        order_offset=2,
        transform=_shifted(1.0),
        domain=(1.0, 50.0),
        conditions=(Condition.value(0.0, 0.0), Condition.asymptotic(1.0, 0.0)),
        native_conditions=(Condition.value(1.0, 0.0),),
        parameter_names=("a1",),
        parameter_brackets=_WIDE_BRACKET,
        leading_exponent=1,
        min_order=2,
        order_shift=1,
        native_variable="r",
    )


@dataclass(frozen=True)
class _CatalogEntry:
    builder: Callable[[ProblemParameters], ProblemSpec]
    domain_label: str
    positive_epsilon: bool = False
    uses_epsilon: bool = True
    uses_p0: bool = False


_CATALOG: dict[str, _CatalogEntry] = {
    "linear_singular": _CatalogEntry(_linear_singular, "t in [0, 10|eps|]"),
    "carrier_transfer": _CatalogEntry(_carrier_transfer, "t in [0, 10|eps|]"),
    "logistic": _CatalogEntry(_logistic, "t in [0, 10|eps|]", uses_p0=True),
    "kink": _CatalogEntry(_kink, "x in [-6 sqrt(eps), 6 sqrt(eps)]", positive_epsilon=True),
    "bell": _CatalogEntry(_bell, "x in [-6 sqrt(eps), 6 sqrt(eps)]", positive_epsilon=True),
    "boundary_layer": _CatalogEntry(_boundary_layer, "x in [0, 1]", positive_epsilon=True),
    "gp_vortex": _CatalogEntry(_gp_vortex, "r in [0, 20]", uses_epsilon=False),
    "stokes_oseen": _CatalogEntry(_stokes_oseen, "r in [1, 50]", positive_epsilon=True),
    "strongly_singular": _CatalogEntry(_strongly_singular, "r in [1, 50]", positive_epsilon=True),
}


def problem_names() -> tuple[str, ...]:
    return tuple(_CATALOG)


def builtin(name: str, epsilon: float | None = None, p0: float | None = None) -> ProblemSpec:
    """Fully populated problem for `name` at the given parameters.

    Raises:
        UnknownProblemError: `name` is not in the catalog
        InvalidParameterError: epsilon or p0 outside the problem's validity range
    """
    entry = _CATALOG.get(name)
    if entry is None:
        raise UnknownProblemError(
            f"Unknown problem '{name}'", {"problem": name, "available": list(_CATALOG)}
        )

    eps = 1.0 if epsilon is None else float(epsilon)
    if not math.isfinite(eps) or eps == 0.0:
        raise InvalidParameterError("epsilon must be finite and nonzero", {"problem": name, "epsilon": eps})
    if entry.positive_epsilon and eps <= 0.0:
        raise InvalidParameterError("epsilon must be positive", {"problem": name, "epsilon": eps})

    initial = None
    if entry.uses_p0:
        initial = DEFAULT_P0 if p0 is None else float(p0)
        if not math.isfinite(initial) or initial <= 0.0:
            raise InvalidParameterError("p0 must be positive", {"problem": name, "p0": initial})

    return entry.builder(ProblemParameters(epsilon=eps, p0=initial))


def list_problems() -> list[ProblemInfo]:
    infos = []
    for name, entry in _CATALOG.items():
        spec = builtin(name)
        parameters = []
        if entry.uses_epsilon:
            parameters.append("eps > 0" if entry.positive_epsilon else "eps != 0")
        if entry.uses_p0:
            parameters.append("p0 > 0")
        infos.append(
            ProblemInfo(
                name=name,
                description=spec.description,
                domain=entry.domain_label,
                parameters=tuple(parameters),
                has_exact=spec.has_exact,
                has_reference=spec.has_exact or spec.reference is not None,
                min_order=spec.min_order,
            )
        )
    return infos
