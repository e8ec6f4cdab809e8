"""Fractional programming solvers.

:func:`dinkelbach` is a generic driver for ``max f(x)/g(x)``.  It is used with
a one-dimensional inner solver for the min-form GEE (:func:`maximize_gee1`) and
per block inside the alternating maximisation of the product-form GEE
(:func:`alternating_gee2`).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List

from .core import InnerSolverFailure, NonConvergenceError, PowerLimits
from .gee import Gee1Params, Gee2Params, PowerCost, PowerProfile, gee2_numerator

logger = logging.getLogger(__name__)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fn: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-10, max_iter: int = 500) -> tuple[float, float]:
    """Maximise a unimodal function on ``[lo, hi]``.

    The end points are evaluated as well, so maxima sitting on the boundary
    (saturated powers) are returned exactly.

    Returns:
        ``(x, fn(x))``
    """
    if hi < lo:
        raise ValueError("empty interval")
    f_lo, f_hi = fn(lo), fn(hi)
    if hi - lo <= tol:
        return (lo, f_lo) if f_lo >= f_hi else (hi, f_hi)
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fn(x2)
    x_best, f_best = (x1, f1) if f1 >= f2 else (x2, f2)
    # the interior estimate never beats a boundary point by construction only
    # for strictly unimodal functions; check the end points explicitly
    if f_lo >= f_best:
        x_best, f_best = lo, f_lo
    if f_hi > f_best:
        x_best, f_best = hi, f_hi
    return x_best, f_best


@dataclass
class DinkelbachResult:
    x_star: Any
    lambda_star: float
    iterations: int
    converged: bool
    #: lambda_0, lambda_1, ... (the last entry is ``lambda_star``)
    lambdas: List[float] = field(default_factory=list)
    #: F(lambda_n) for every evaluated lambda
    f_values: List[float] = field(default_factory=list)


def dinkelbach(f: Callable, g: Callable, inner_max: Callable[[float], Any],
               lambda0: float = 0.0, eps: float = 1e-9, max_iter: int = 100) -> DinkelbachResult:
    """Maximise ``f(x)/g(x)`` by locating the zero of ``F(lam) = max_x f(x) - lam g(x)``.

    Args:
        f: numerator, ``f >= 0`` on the feasible set.
        g: denominator, ``g > 0`` on the feasible set.
        inner_max: returns a maximiser of ``f(x) - lam * g(x)`` for a given ``lam``.
            The result is globally optimal only if this maximiser is global.
        lambda0: initial ratio, must satisfy ``F(lambda0) >= 0``.
        eps: stop once ``F(lam) <= eps``.
        max_iter: iteration cap.

    Raises:
        NonConvergenceError: ``max_iter`` iterations without ``F(lam) <= eps``.
        InnerSolverFailure: ``inner_max`` raised.
    """
    lam = lambda0
    lambdas = [lam]
    f_values = []
    for n in range(max_iter):
        try:
            x = inner_max(lam)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise InnerSolverFailure(f"inner maximisation failed at lambda={lam!r}") from exc
        fx, gx = f(x), g(x)
        big_f = fx - lam * gx
        f_values.append(big_f)
        if big_f <= eps:
            return DinkelbachResult(x, lam, n + 1, True, lambdas, f_values)
        lam = fx / gx
        lambdas.append(lam)
    raise NonConvergenceError(f"Dinkelbach did not converge in {max_iter} iterations "
                              f"(lambda={lam!r}, F={f_values[-1]!r})")


@dataclass
class SolveReport:
    profile: PowerProfile
    gee: float
    #: objective value after every iteration (Dinkelbach ratios or GEE per round)
    trajectory: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True


def _pow2m1(x):
    return math.expm1(x * math.log(2.0))


def maximize_gee1(params: Gee1Params, cost: PowerCost, limits: PowerLimits,
                  n_s: float = 1.0, n_r: float = 1.0, eps: float = 1e-9,
                  tol: float = 1e-10, max_iter: int = 100) -> SolveReport:
    """Global maximiser of the min-form GEE (outer bound, DF).

    With a target sum rate ``t`` both rate constraints are tight at the
    cheapest powers ``P_S(t) = N_R/alpha2 (2^(t/a2) - 1)`` and
    ``P_R(t) = N_S/alpha1 (2^(t/a1) - 1)``, so the problem reduces to
    ``max_t t / (phi P_S(t) + psi P_R(t) + P_c)`` over ``[0, t_max]``: a linear
    over convex ratio handled by Dinkelbach with a concave 1-D inner problem.
    """
    t_max = min(params.a1 * math.log2(1.0 + params.alpha1 * limits.p_r_max / n_s),
                params.a2 * math.log2(1.0 + params.alpha2 * limits.p_s_max / n_r))

    def powers(t):
        p_s = n_r / params.alpha2 * _pow2m1(t / params.a2)
        p_r = n_s / params.alpha1 * _pow2m1(t / params.a1)
        # guard against rounding past the box at t = t_max
        return min(p_s, limits.p_s_max), min(p_r, limits.p_r_max)

    def consumed(t):
        p_s, p_r = powers(t)
        return cost.consumed(p_s, p_r)

    def inner(lam):
        return golden_section_max(lambda t: t - lam * consumed(t), 0.0, t_max, tol=tol)[0]

    res = dinkelbach(lambda t: t, consumed, inner, eps=eps, max_iter=max_iter)
    p_s, p_r = powers(res.x_star)
    ratio = res.x_star / consumed(res.x_star)
    return SolveReport(PowerProfile(p_s, p_r), ratio, res.lambdas[1:], res.iterations, res.converged)


def _block_step(params: Gee2Params, cost: PowerCost, fixed: float, upper: float,
                over_sources: bool, eps: float, tol: float) -> float:
    """Best power of one block (sources or relay) with the other one fixed."""
    if fixed == 0.0:
        # zero rate whatever we do; minimal power is the unique maximiser
        return 0.0
    if over_sources:
        num = lambda x: gee2_numerator(params, x, fixed)  # noqa: E731
        den = lambda x: cost.consumed(x, fixed)  # noqa: E731
    else:
        num = lambda x: gee2_numerator(params, fixed, x)  # noqa: E731
        den = lambda x: cost.consumed(fixed, x)  # noqa: E731

    def inner(lam):
        return golden_section_max(lambda x: num(x) - lam * den(x), 0.0, upper, tol=tol)[0]

    return dinkelbach(num, den, inner, eps=eps).x_star


def _gee2(params, cost, p_s, p_r):
    rate = gee2_numerator(params, p_s, p_r)
    return rate / cost.consumed(p_s, p_r) if rate > 0 else 0.0


def alternating_gee2(params: Gee2Params, cost: PowerCost, limits: PowerLimits,
                     eps: float = 1e-10, p_r_init: float | None = None, max_iter: int = 1000,
                     retry_degenerate: bool = True, inner_eps: float = 1e-12,
                     tol: float = 1e-10) -> SolveReport:
    """Alternating maximisation of the product-form GEE over ``(P_S, P_R)``.

    Each half step solves a strictly pseudo-concave 1-D fractional problem.
    The iteration stops when two consecutive GEE values differ by less than
    ``eps``.  A half step is only accepted if it does not lower the GEE, so
    the trajectory is nondecreasing.

    If the run ends at the trivial point (GEE 0) and ``retry_degenerate`` is
    set, it is restarted once from ``p_r_init = p_r_max``.
    """
    if p_r_init is None:
        p_r_init = limits.p_r_max
    if not 0.0 <= p_r_init <= limits.p_r_max:
        raise ValueError("p_r_init must lie in [0, p_r_max]")

    p_r = p_r_init
    p_s = None
    current = -math.inf
    trajectory: List[float] = []
    converged = False
    n = 0
    for n in range(1, max_iter + 1):
        cand_s = _block_step(params, cost, p_r, limits.p_s_max, True, inner_eps, tol)
        value = _gee2(params, cost, cand_s, p_r)
        if p_s is None or value >= current:
            p_s, current = cand_s, value
        cand_r = _block_step(params, cost, p_s, limits.p_r_max, False, inner_eps, tol)
        value = _gee2(params, cost, p_s, cand_r)
        if value >= current:
            p_r, current = cand_r, value
        trajectory.append(current)
        if len(trajectory) > 1 and abs(trajectory[-1] - trajectory[-2]) < eps:
            converged = True
            break
    if not converged:
        raise NonConvergenceError(f"alternating maximisation stalled after {max_iter} rounds")

    if current == 0.0 and retry_degenerate and p_r_init < limits.p_r_max:
        logger.info("alternating maximisation hit the trivial point; restarting from full power")
        return alternating_gee2(params, cost, limits, eps, limits.p_r_max, max_iter,
                                retry_degenerate=False, inner_eps=inner_eps, tol=tol)
    return SolveReport(PowerProfile(p_s, p_r), current, trajectory, n, converged)
