"""
Factor approximant construction from moments.

Every order reduces to a power-sum problem sum_i w_i A_i^j = P_j, j = 0..L-1:
    - rate form: P_j = B_{j+1}, w_i = n_i A_i; a zero node is the exponential limit e^{w x}
    - exponent form: P_0 = S (prescribed sum of exponents), P_j = B_j, w_i = n_i

Flow (even L):
    [1] Scale nodes by a typical magnitude rho
    [2] Hankel least squares -> monic polynomial -> companion eigenvalues (nodes)
    [3] Vandermonde least squares -> weights
    [4] Newton polish, merge coincident nodes, drop null factors, classify zero nodes
    [5] On failure retry with looser rank cutoffs, deflation to fewer nodes, seeded jitter

Flow (odd L, node A_1 = 1 fixed):
    [1] Secant on n_1 from a multistart grid; each trial runs the even reduction on P_j - n_1
        and scores the last equation
    [2] Newton polish of the full system for every converged start
    [3] Pick among accepted candidates by residual, then smallest sum|Im n|, then smallest sum|n|
    [4] No start accepted: free fit with fewer nodes; a node landing on 1 is pinned there

Values below the rounding floor of their order are zeroed first, so a moment that vanishes
analytically reaches the solver as zero and not as cancellation noise.
"""

from dataclasses import dataclass, field
from typing import Literal

import logfire
import numpy as np
from scipy.linalg import companion, hankel, lstsq
from scipy.optimize import newton

from config import SolverSettings, get_settings
from exceptions import (
    ApproximantError,
    ConjugationBrokenError,
    DegenerateMomentError,
    InvalidConditionError,
    NoSolutionError,
)
from models.factor_models import Factor, FactorForm, FactorKind, MomentVector
from models.series_models import Prefactor

__all__ = [
    "solve_even",
    "solve_odd",
    "solve",
    "solve_power_sums",
    "PowerSumSolution",
    "TIE_BREAK_RULE",
]

Mode = Literal["rate", "exponent"]

TIE_BREAK_RULE = "smallest full-system residual, then smallest sum|Im n_i|, then smallest sum|n_i|"

_RCOND_LADDER = (1e-10, 1e-8, 1e-6)
_PARTNER_TOLERANCE = 1e-6
_MULTISTART_FACTORS = (-2.0, -1.0, 0.0, 1.0, 2.0)
_MOMENT_NOISE = 1e-12
_RESIDUAL_TIE = 1e-3


@dataclass
class PowerSumSolution:
    """Nodes and weights in scaled coordinates (A = rho * node)."""

    nodes: np.ndarray
    weights: np.ndarray
    node_free: np.ndarray
    residual: float = np.inf
    hankel_rank: int | None = None

    def copy(self) -> "PowerSumSolution":
        return PowerSumSolution(
            self.nodes.copy(),
            self.weights.copy(),
            self.node_free.copy(),
            self.residual,
            self.hankel_rank,
        )


@dataclass
class _PowerSumSystem:
    """One scaled power-sum system and the numerics to solve it."""

    values: np.ndarray
    mode: Mode
    settings: SolverSettings
    real: bool
    rho: float = field(init=False)
    scaled: np.ndarray = field(init=False, repr=False)
    magnitude: float = field(init=False)

    def __post_init__(self):
        self.rho = _node_scale(self.values)
        self.scaled = self.values / self.rho ** np.arange(self.values.size)
        peak = float(np.max(np.abs(self.scaled))) if self.scaled.size else 0.0
        self.magnitude = peak if peak > 0.0 else 1.0

    @property
    def length(self) -> int:
        return self.values.size

    # numerics on scaled coordinates

    def residual_vector(self, nodes, weights, values=None) -> np.ndarray:
        values = self.scaled if values is None else values
        if nodes.size == 0:
            return -values
        powers = np.vander(nodes, values.size, increasing=True).T
        return powers @ weights - values

    def relative_residual(self, nodes, weights, values=None) -> float:
        r = self.residual_vector(nodes, weights, values)
        value = float(np.max(np.abs(r))) / self.magnitude if r.size else 0.0
        return value if np.isfinite(value) else np.inf

    def prony(self, values: np.ndarray, p: int, rcond: float) -> tuple[np.ndarray, np.ndarray, int]:
        """Nodes from the Hankel system, weights from the Vandermonde system."""
        length = values.size
        rows = length - p
        H = hankel(values[:rows], values[rows - 1 : length - 1])
        q, _, rank, _ = lstsq(H, -values[p:length], cond=rcond)
        polynomial = np.concatenate(([1.0 + 0j], q[::-1]))
        nodes = np.linalg.eigvals(companion(polynomial)) if p > 1 else np.array([-q[0]])
        V = np.vander(nodes, length, increasing=True).T
        weights = lstsq(V, values, cond=rcond)[0]
        return nodes.astype(complex), weights.astype(complex), int(rank)

    def polish(self, solution: PowerSumSolution) -> PowerSumSolution:
        """Newton refinement with least-squares steps (Gauss-Newton when overdetermined)."""
        s = self.settings
        nodes, weights, free = solution.nodes.copy(), solution.weights.copy(), solution.node_free
        best = solution.copy()
        best.residual = self.relative_residual(nodes, weights)
        j = np.arange(self.length)

        for _ in range(s.newton_max_iterations):
            if best.residual <= s.newton_tolerance or nodes.size == 0:
                break
            powers = np.vander(nodes, self.length, increasing=True).T
            dpowers = np.zeros_like(powers)
            dpowers[1:] = j[1:, None] * powers[:-1]
            J = np.hstack([(dpowers * weights)[:, free], powers])
            r = powers @ weights - self.scaled
            step = lstsq(J, -r, cond=s.hankel_rank_tolerance)[0]
            if not np.all(np.isfinite(step)):
                break
            n_free = int(free.sum())
            nodes = nodes.copy()
            nodes[free] += step[:n_free]
            weights = weights + step[n_free:]
            current = self.relative_residual(nodes, weights)
            if current < best.residual:
                best = PowerSumSolution(nodes.copy(), weights.copy(), free.copy(), current, solution.hankel_rank)
            elif current > 1e3 * best.residual:
                break
        return best

    def tidy(self, solution: PowerSumSolution) -> PowerSumSolution:
        """Merge coincident nodes, drop null factors, pin zero nodes."""
        s = self.settings
        nodes, weights, free = list(solution.nodes), list(solution.weights), list(solution.node_free)

        merged_nodes, merged_weights, merged_free = [], [], []
        for A, w, is_free in sorted(zip(nodes, weights, free), key=lambda t: t[2]):
            for idx, B in enumerate(merged_nodes):
                if abs(A - B) <= s.pairing_tolerance * max(1.0, abs(B)):
                    merged_weights[idx] += w
                    break
            else:
                merged_nodes.append(A)
                merged_weights.append(w)
                merged_free.append(is_free)

        # zero nodes are judged in unscaled coordinates
        reach = max([1.0] + [abs(self.rho * A) for A in merged_nodes])
        kept_nodes, kept_weights, kept_free = [], [], []
        for A, w, is_free in zip(merged_nodes, merged_weights, merged_free):
            contribution = abs(w) * max(1.0, abs(A)) ** (self.length - 1)
            if contribution <= s.weight_drop_tolerance * self.magnitude:
                continue
            if is_free and abs(self.rho * A) < s.node_zero_tolerance * reach:
                if self.mode == "exponent":
                    raise NoSolutionError(
                        "Zero node is incompatible with a prescribed exponent sum",
                        {"weight": abs(w)},
                    )
                A, is_free = 0j, False
            kept_nodes.append(A)
            kept_weights.append(w)
            kept_free.append(is_free)

        return PowerSumSolution(
            np.array(kept_nodes, dtype=complex),
            np.array(kept_weights, dtype=complex),
            np.array(kept_free, dtype=bool),
            solution.residual,
            solution.hankel_rank,
        )

    def pair_conjugates(self, solution: PowerSumSolution) -> PowerSumSolution:
        """Snap real nodes onto the axis and complex nodes into exact conjugate pairs."""
        if not self.real:
            return solution
        s = self.settings
        nodes, weights = solution.nodes.copy(), solution.weights.copy()
        unpaired = set(range(nodes.size))
        while unpaired:
            i = unpaired.pop()
            A = nodes[i]
            if abs(A.imag) <= s.pairing_tolerance * max(1.0, abs(A)):
                nodes[i] = A.real
                if abs(weights[i].imag) > _PARTNER_TOLERANCE * max(1.0, abs(weights[i])):
                    raise ConjugationBrokenError(
                        "Real node carries a complex weight", {"node": [A.real, A.imag]}
                    )
                weights[i] = weights[i].real
                continue
            candidates = [
                (abs(nodes[j] - np.conj(A)), j) for j in unpaired
            ]
            distance, j = min(candidates, default=(np.inf, -1))
            if distance > _PARTNER_TOLERANCE * max(1.0, abs(A)):
                raise ConjugationBrokenError(
                    "Complex node has no conjugate partner",
                    {"node": [A.real, A.imag], "distance": float(distance)},
                )
            unpaired.discard(j)
            node = 0.5 * (A + np.conj(nodes[j]))
            weight = 0.5 * (weights[i] + np.conj(weights[j]))
            nodes[i], nodes[j] = node, np.conj(node)
            weights[i], weights[j] = weight, np.conj(weight)
        result = PowerSumSolution(nodes, weights, solution.node_free, solution.residual, solution.hankel_rank)
        result.residual = self.relative_residual(nodes, weights)
        return result

    def finish(self, solution: PowerSumSolution) -> PowerSumSolution:
        """Polish, tidy, polish again and enforce conjugate symmetry."""
        polished = self.polish(solution)
        tidied = self.polish(self.tidy(polished))
        return self.pair_conjugates(tidied)


def _node_scale(values: np.ndarray) -> float:
    """Typical node magnitude estimated from growth of the power sums."""
    magnitudes = np.abs(values)
    if magnitudes.size < 2 or not np.any(magnitudes[1:] > 0):
        return 1.0
    reference = magnitudes[0] if magnitudes[0] > 0 else float(np.max(magnitudes))
    ratios = [
        (magnitudes[j] / reference) ** (1.0 / j)
        for j in range(1, magnitudes.size)
        if magnitudes[j] > 0
    ]
    rho = float(max(ratios))
    if not np.isfinite(rho) or rho <= 0.0:
        return 1.0
    return float(np.clip(rho, 1e-8, 1e8))


def _drop_noise(values: np.ndarray, mode: Mode) -> np.ndarray:
    """Zero every P_j below _MOMENT_NOISE * reach^m, m the power of A it sums."""
    powers = np.arange(values.size) + (1 if mode == "rate" else 0)
    magnitudes = np.abs(values)
    usable = (powers > 0) & (magnitudes > 0)
    if not np.any(usable):
        return values
    reach = float(np.max(magnitudes[usable] ** (1.0 / powers[usable])))
    floor = _MOMENT_NOISE * reach ** powers.astype(float)
    noise = (powers > 0) & (magnitudes <= floor)
    if np.any(noise):
        logfire.debug("Moments at rounding level zeroed", indices=np.flatnonzero(noise).tolist())
    return np.where(noise, 0.0, values)


def _negligible(system: _PowerSumSystem, values: np.ndarray) -> bool:
    return values.size == 0 or float(np.max(np.abs(values))) <= _MOMENT_NOISE * system.magnitude


def _solve_free(system: _PowerSumSystem, p: int, seed: int) -> PowerSumSolution:
    """Even reduction: p free nodes fitted to all values, with retries."""
    s = system.settings
    values = system.scaled
    if p == 0 or float(np.max(np.abs(values))) == 0.0:
        empty = PowerSumSolution(np.zeros(0, complex), np.zeros(0, complex), np.zeros(0, bool))
        empty.residual = system.relative_residual(empty.nodes, empty.weights)
        return empty

    best: PowerSumSolution | None = None
    attempts = [(p, s.hankel_rank_tolerance)]
    attempts += [(p, rcond) for rcond in _RCOND_LADDER]
    attempts += [(free, s.hankel_rank_tolerance) for free in range(p - 1, 0, -1)]

    for free, rcond in attempts:
        try:
            nodes, weights, rank = system.prony(values, free, rcond)
            if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
                continue
            start = PowerSumSolution(nodes, weights, np.ones(free, dtype=bool), hankel_rank=rank)
            candidate = system.finish(start)
        except (ApproximantError, np.linalg.LinAlgError, ValueError) as e:
            logfire.debug("Prony attempt failed", free_nodes=free, rcond=rcond, error=str(e))
            continue
        if best is None or candidate.residual < best.residual:
            best = candidate
        if candidate.residual <= s.acceptance_tolerance:
            if free < p:
                logfire.info("Prony reduction deflated", requested=p, used=free)
            return candidate

    rng = np.random.default_rng(seed)
    if best is not None and best.nodes.size:
        for _ in range(s.jitter_restarts):
            jitter = 1e-3 * (rng.standard_normal(best.nodes.size) + 1j * rng.standard_normal(best.nodes.size))
            start = best.copy()
            start.nodes = np.where(start.node_free, start.nodes + jitter, start.nodes)
            try:
                candidate = system.finish(start)
            except ApproximantError:
                continue
            if candidate.residual < best.residual:
                best = candidate
            if candidate.residual <= s.acceptance_tolerance:
                return candidate

    if best is None:
        raise DegenerateMomentError(
            "Hankel system stayed singular after deflation",
            {"free_nodes": p, "values": system.length},
        )
    return best


def _score_fixed(system: _PowerSumSystem, p: int, n1: complex) -> complex:
    """Residual of the last equation after fitting p free nodes to P_j - n_1 A_1^j."""
    fixed = 1.0 / system.rho
    powers = fixed ** np.arange(system.length)
    shifted = system.scaled - n1 * powers
    head = shifted[:-1]
    if _negligible(system, head):
        return shifted[-1]
    nodes, weights, _ = system.prony(head, p, system.settings.hankel_rank_tolerance)
    return complex(np.sum(weights * nodes ** (system.length - 1)) - shifted[-1])


def _solve_fixed(system: _PowerSumSystem, p: int, start_scale: complex, seed: int = 0) -> PowerSumSolution:
    """Odd reduction: node A_1 = 1 fixed, secant on n_1, full polish."""
    s = system.settings
    fixed = 1.0 / system.rho

    if p == 0:
        weight = system.scaled[0]
        start = PowerSumSolution(np.array([fixed], complex), np.array([weight], complex), np.array([False]))
        return system.finish(start)

    scale = start_scale if abs(start_scale) > 0 else 1.0
    starts = []
    for t in _MULTISTART_FACTORS + (0.0,):
        value = scale * t
        if all(abs(value - other) > 1e-14 for other in starts):
            starts.append(value)

    def score(n1):
        value = _score_fixed(system, p, n1)
        return value.real if system.real else value

    accepted: list[PowerSumSolution] = []
    best: PowerSumSolution | None = None
    for x0 in starts:
        x0 = x0.real if system.real else x0
        h = 1e-3 * max(abs(x0), abs(scale))
        try:
            n1 = newton(score, x0, x1=x0 + h, tol=1e-14 * max(1.0, abs(scale)), maxiter=60)
            if not np.isfinite(n1):
                continue
            shifted = system.scaled - n1 * fixed ** np.arange(system.length)
            if _negligible(system, shifted[:-1]):
                nodes, weights, rank = np.zeros(0, complex), np.zeros(0, complex), 0
            else:
                nodes, weights, rank = system.prony(shifted[:-1], p, s.hankel_rank_tolerance)
            start = PowerSumSolution(
                np.concatenate(([fixed], nodes)),
                np.concatenate(([n1], weights)),
                np.concatenate(([False], np.ones(nodes.size, dtype=bool))),
                hankel_rank=rank,
            )
            candidate = system.finish(start)
        except (RuntimeError, ApproximantError, np.linalg.LinAlgError, ValueError, ZeroDivisionError) as e:
            logfire.debug("Odd multistart failed", start=complex(x0), error=str(e))
            continue
        if best is None or candidate.residual < best.residual:
            best = candidate
        if candidate.residual <= s.acceptance_tolerance:
            accepted.append(candidate)

    if not accepted:
        deflated = _pin_unit_node(system, p, seed)
        if deflated is not None:
            return deflated
        raise NoSolutionError(
            "No multistart of the odd-order system converged",
            {
                "best_residual": None if best is None else float(best.residual),
                "starts": len(starts),
            },
        )

    logfire.debug("Odd multistarts accepted", accepted=len(accepted), starts=len(starts))
    return min(accepted, key=lambda candidate: _tie_break_key(system, candidate))


def _tie_break_key(system: _PowerSumSystem, candidate: PowerSumSolution) -> tuple[int, float, float]:
    """Order of TIE_BREAK_RULE; residuals closer than the tie width compare equal."""
    tie = _RESIDUAL_TIE * system.settings.acceptance_tolerance
    n = _exponents(system, candidate)
    return (
        int(candidate.residual // tie),
        round(float(np.sum(np.abs(n.imag))), 8),
        float(np.sum(np.abs(n))),
    )


def _pin_unit_node(system: _PowerSumSystem, p: int, seed: int) -> PowerSumSolution | None:
    """Surplus order: fit with at most p free nodes; a node at 1 becomes the fixed node."""
    s = system.settings
    try:
        solution = _solve_free(system, p, seed)
    except ApproximantError as e:
        logfire.debug("Deflated odd fit failed", free_nodes=p, error=str(e))
        return None
    if solution.residual > s.acceptance_tolerance:
        return None

    fixed = 1.0 / system.rho
    free = np.flatnonzero(solution.node_free)
    if free.size:
        i = free[np.argmin(np.abs(solution.nodes[free] - fixed))]
        if abs(solution.nodes[i] - fixed) <= _PARTNER_TOLERANCE * max(1.0, abs(fixed)):
            pinned = solution.copy()
            pinned.nodes[i] = fixed
            pinned.node_free[i] = False
            try:
                pinned = system.finish(pinned)
            except ApproximantError:
                pinned.residual = np.inf
            if pinned.residual <= s.acceptance_tolerance:
                solution = pinned
    logfire.debug("Odd reduction deflated", requested=p + 1, used=int(solution.nodes.size))
    return solution


def _exponents(system: _PowerSumSystem, solution: PowerSumSolution) -> np.ndarray:
    mask = solution.nodes != 0
    if system.mode == "exponent":
        return solution.weights[mask]
    return solution.weights[mask] / (system.rho * solution.nodes[mask])


def solve_power_sums(
    values,
    *,
    mode: Mode = "rate",
    fix_unit_node: bool = False,
    free_nodes: int | None = None,
    start_scale: complex | None = None,
    real: bool | None = None,
    settings: SolverSettings | None = None,
) -> tuple[list[Factor], float]:
    """Solve sum_i w_i A_i^j = P_j and return factors in unscaled coordinates.

    Args:
        values: P_0..P_{L-1}
        mode: "rate" (w = n A, zero node -> exponential) or "exponent" (w = n)
        fix_unit_node: Fix one node at A = 1 (odd count of unknowns)
        free_nodes: Number of free nodes; defaults to L // 2
        start_scale: Scale of the n_1 multistart grid (B_1 of the series)
        real: Treat the values as real (conjugate pairing); inferred when None
        settings: Solver tolerances

    Returns:
        (factors, relative residual)
    """
    settings = settings or get_settings()
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise DegenerateMomentError("Moments are not finite", {"values": values.size})
    if real is None:
        real = bool(np.all(np.abs(values.imag) <= 1e-12 * max(1.0, float(np.max(np.abs(values))))))
    if real:
        values = values.real.astype(complex)
    values = _drop_noise(values, mode)

    system = _PowerSumSystem(values, mode, settings, real)
    p = values.size // 2 if free_nodes is None else free_nodes

    if fix_unit_node:
        scale = start_scale if start_scale is not None else values[0]
        solution = _solve_fixed(system, p, scale, settings.seed)
    else:
        solution = _solve_free(system, p, settings.seed)

    if solution.residual > settings.acceptance_tolerance:
        raise NoSolutionError(
            "Power-sum system has no accurate solution",
            {"best_residual": float(solution.residual), "values": system.length, "mode": mode},
        )

    return _to_factors(system, solution), float(solution.residual)


def _to_factors(system: _PowerSumSystem, solution: PowerSumSolution) -> list[Factor]:
    factors = []
    for node, weight, free in zip(solution.nodes, solution.weights, solution.node_free):
        if node == 0:
            factors.append(Factor.exponential(complex(weight)))
            continue
        # pinned nonzero nodes are the unit node A_1 = 1
        A = complex(system.rho * node) if free else 1.0 + 0j
        n = weight if system.mode == "exponent" else weight / A
        factors.append(Factor.power(A, complex(n)))
    return sorted(factors, key=_factor_order)


def _factor_order(factor: Factor):
    if factor.kind is FactorKind.EXPONENTIAL:
        return (3, 0.0, 0.0)
    A = factor.A
    if A == 1:
        return (0, 0.0, 0.0)
    is_complex = abs(A.imag) > 0
    return (2 if is_complex else 1, round(A.real, 12), A.imag)


def _form(
    factors: list[Factor],
    residual: float,
    order: int,
    prefactor: Prefactor | None,
    step: int,
    real: bool,
) -> FactorForm:
    return FactorForm(
        prefactor=prefactor or Prefactor.unit(),
        factors=tuple(factors),
        order=order,
        step=step,
        real=real,
        residual=residual,
    )


def solve_even(
    B: MomentVector,
    *,
    prefactor: Prefactor | None = None,
    step: int = 1,
    settings: SolverSettings | None = None,
) -> FactorForm:
    """Factor approximant of even order 2p: p free factors matching B_1..B_2p.

    Raises:
        DegenerateMomentError: Hankel system singular beyond deflation
        NoSolutionError: Newton did not reach the acceptance tolerance
    """
    if B.order % 2:
        raise InvalidConditionError("solve_even needs an even number of moments", {"order": B.order})
    real = B.is_real()
    factors, residual = solve_power_sums(B.as_array(), mode="rate", real=real, settings=settings)
    logfire.debug("Even factor approximant", order=B.order, factors=len(factors))
    return _form(factors, residual, B.order, prefactor, step, real)


def solve_odd(
    B: MomentVector,
    *,
    prefactor: Prefactor | None = None,
    step: int = 1,
    settings: SolverSettings | None = None,
) -> FactorForm:
    """Factor approximant of odd order 2p+1 with A_1 = 1 fixed.

    Raises:
        NoSolutionError: No multistart converged
    """
    if B.order % 2 == 0:
        raise InvalidConditionError("solve_odd needs an odd number of moments", {"order": B.order})
    values = B.as_array()
    real = B.is_real()
    factors, residual = solve_power_sums(
        values,
        mode="rate",
        fix_unit_node=True,
        free_nodes=(B.order - 1) // 2,
        start_scale=values[0],
        real=real,
        settings=settings,
    )
    logfire.debug("Odd factor approximant", order=B.order, factors=len(factors))
    return _form(factors, residual, B.order, prefactor, step, real)


def solve(
    B: MomentVector,
    *,
    prefactor: Prefactor | None = None,
    step: int = 1,
    exponent_sum: complex | None = None,
    settings: SolverSettings | None = None,
) -> FactorForm:
    """Dispatch on the number of equations.

    Without `exponent_sum` this is solve_even / solve_odd by the parity of k.
    With it, sum_i n_i = exponent_sum is the zeroth equation, so k + 1 equations
    decide the structure: A_1 = 1 is fixed exactly when k + 1 is odd.
    """
    if exponent_sum is None:
        if B.order % 2 == 0:
            return solve_even(B, prefactor=prefactor, step=step, settings=settings)
        return solve_odd(B, prefactor=prefactor, step=step, settings=settings)

    moments = B.as_array()
    values = np.concatenate(([exponent_sum], moments))
    real = B.is_real() and abs(complex(exponent_sum).imag) == 0
    odd = values.size % 2 == 1
    factors, residual = solve_power_sums(
        values,
        mode="exponent",
        fix_unit_node=odd,
        free_nodes=(values.size - 1) // 2 if odd else values.size // 2,
        start_scale=moments[0],
        real=real,
        settings=settings,
    )
    logfire.debug(
        "Factor approximant with exponent sum",
        order=B.order,
        exponent_sum=complex(exponent_sum).real,
        factors=len(factors),
    )
    return _form(factors, residual, B.order, prefactor, step, real)
