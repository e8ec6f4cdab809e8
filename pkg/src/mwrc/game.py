"""Competitive power control: best responses, best-response dynamics, Nash checks.

The sources (one player controlling the common user power) and the relay
each maximise their own energy efficiency ``R / (P + P_c,own)``.  The best
responses are characterised by a scalar fixed-point equation whose left-hand
side is increasing in the player's own power, so they are found by root
bracketing.  ``C(x) / C'(x)`` is evaluated as ``(1 + x) ln(1 + x)``, which
does not depend on the base of the logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

from scipy import optimize

from .core import BracketFailure, NonConvergenceError, PowerLimits, Scheme
from .gee import (
    Gee1Params,
    Gee2Params,
    PowerCost,
    PowerProfile,
    RateParams,
    numerator,
    params_for,
    product_snr,
)

_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class GameSpec:
    scheme: Scheme
    rate_params: RateParams
    cost: PowerCost
    limits: PowerLimits
    n_s: float = 1.0
    n_r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if self.scheme in (Scheme.OUTER_BOUND, Scheme.DF):
            if not isinstance(self.rate_params, Gee1Params):
                raise ValueError(f"{self.scheme} needs min-form rate parameters")
        elif not isinstance(self.rate_params, Gee2Params):
            raise ValueError(f"{self.scheme} needs product-form rate parameters")

    @classmethod
    def for_scheme(cls, scheme, cost: PowerCost, limits: PowerLimits,
                   n_s: float = 1.0, n_r: float = 1.0) -> "GameSpec":
        return cls(Scheme.parse(scheme), params_for(scheme, n_s, n_r), cost, limits, n_s, n_r)

    @property
    def min_form(self) -> bool:
        return isinstance(self.rate_params, Gee1Params)

    def rate(self, p_s: float, p_r: float) -> float:
        return numerator(self.rate_params, p_s, p_r, self.n_s, self.n_r)

    def utilities(self, p_s: float, p_r: float) -> Tuple[float, float]:
        r = self.rate(p_s, p_r)
        return r / (p_s + self.cost.p_c_s), r / (p_r + self.cost.p_c_r)

    def gee(self, p_s: float, p_r: float) -> float:
        r = self.rate(p_s, p_r)
        return r / self.cost.consumed(p_s, p_r) if r > 0 else 0.0


def _x_ln(x: float) -> float:
    """``(1 + x) ln(1 + x)``, the base-free form of ``C(x) / C'(x)``."""
    return (1.0 + x) * math.log1p(x)


def _x_ln_over_x(x: float) -> float:
    """``(1 + x) ln(1 + x) / x``, equal to 1 at ``x = 0``."""
    return 1.0 if x == 0.0 else (1.0 + x) * math.log1p(x) / x


def _increasing_root(h: Callable[[float], float], start: float) -> float:
    """Root of an increasing ``h`` with ``h(0) < 0``, bracketed by doubling from ``start``."""
    hi = start
    for _ in range(_MAX_DOUBLINGS + 1):
        if h(hi) >= 0.0:
            return optimize.brentq(h, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        hi *= 2.0
    raise BracketFailure(f"no sign change on [0, {hi / 2.0:.3g}]")


def saturation_power_sources(spec: GameSpec, p_r: float) -> float:
    """Stationary point of the sources' utility, ignoring the power cap (``P_S`` bar)."""
    pc = spec.cost.p_c_s
    if spec.min_form:
        prm = spec.rate_params
        scale = spec.n_r / prm.alpha2
        return _increasing_root(lambda p: scale * _x_ln(prm.alpha2 * p / spec.n_r) - p - pc,
                                spec.limits.p_s_max)
    prm = spec.rate_params

    # C/C' over d(gamma)/dp with p_r cancelled, so tiny p_r cannot underflow
    def h(p):
        den = prm.a * p + prm.b * p_r + prm.c
        return _x_ln_over_x(product_snr(prm, p, p_r)) * p * den / (prm.b * p_r + prm.c) - p - pc

    return _increasing_root(h, spec.limits.p_s_max)


def saturation_power_relay(spec: GameSpec, p_s: float) -> float:
    """Stationary point of the relay's utility, ignoring the power cap (``P_R`` bar)."""
    pc = spec.cost.p_c_r
    if spec.min_form:
        prm = spec.rate_params
        scale = spec.n_s / prm.alpha1
        return _increasing_root(lambda p: scale * _x_ln(prm.alpha1 * p / spec.n_s) - p - pc,
                                spec.limits.p_r_max)
    prm = spec.rate_params

    def h(p):
        den = prm.a * p_s + prm.b * p + prm.c
        return _x_ln_over_x(product_snr(prm, p_s, p)) * p * den / (prm.a * p_s + prm.c) - p - pc

    return _increasing_root(h, spec.limits.p_r_max)


def br_sources(spec: GameSpec, p_r: float) -> float:
    """Best response of the sources to relay power ``p_r``.

    Zero when the relay is silent: the utility is then identically zero and
    the smallest power is chosen.
    """
    if not 0.0 <= p_r <= spec.limits.p_r_max * (1 + 1e-12):
        raise ValueError("p_r outside [0, p_r_max]")
    if p_r == 0.0:
        return 0.0
    best = min(spec.limits.p_s_max, saturation_power_sources(spec, p_r))
    if spec.min_form:
        prm = spec.rate_params
        # beyond this power the uplink no longer limits the sum rate
        knee = spec.n_r / prm.alpha2 * ((1.0 + prm.alpha1 * p_r / spec.n_s) ** (prm.a1 / prm.a2) - 1.0)
        best = min(best, knee)
    return best


def br_relay(spec: GameSpec, p_s: float) -> float:
    """Best response of the relay to source power ``p_s`` (zero when ``p_s == 0``)."""
    if not 0.0 <= p_s <= spec.limits.p_s_max * (1 + 1e-12):
        raise ValueError("p_s outside [0, p_s_max]")
    if p_s == 0.0:
        return 0.0
    best = min(spec.limits.p_r_max, saturation_power_relay(spec, p_s))
    if spec.min_form:
        prm = spec.rate_params
        knee = spec.n_s / prm.alpha1 * ((1.0 + prm.alpha2 * p_s / spec.n_r) ** (prm.a2 / prm.a1) - 1.0)
        best = min(best, knee)
    return best


@dataclass
class BrdTrace:
    #: (p_s, p_r, u_s, u_r) after every round
    sequence: List[Tuple[float, float, float, float]] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    @property
    def profile(self) -> PowerProfile:
        p_s, p_r, _, _ = self.sequence[-1]
        return PowerProfile(p_s, p_r)


def brd(spec: GameSpec, p_s_init: Optional[float] = None, p_r_init: Optional[float] = None,
        eps: float = 1e-9, max_iter: int = 1000) -> BrdTrace:
    """Best-response dynamics from a relay power (sources move first) or a source power (relay first).

    Stops when neither utility changes by more than ``eps`` between rounds.

    Raises:
        NonConvergenceError: no convergence within ``max_iter`` rounds.
    """
    if (p_s_init is None) == (p_r_init is None):
        raise ValueError("give exactly one of p_s_init and p_r_init")
    trace = BrdTrace()
    p_s, p_r = p_s_init, p_r_init
    if p_r is not None and not 0.0 <= p_r <= spec.limits.p_r_max:
        raise ValueError("p_r_init outside [0, p_r_max]")
    if p_s is not None and not 0.0 <= p_s <= spec.limits.p_s_max:
        raise ValueError("p_s_init outside [0, p_s_max]")
    sources_first = p_r_init is not None
    for n in range(1, max_iter + 1):
        if sources_first:
            p_s = br_sources(spec, p_r)
            p_r = br_relay(spec, p_s)
        else:
            p_r = br_relay(spec, p_s)
            p_s = br_sources(spec, p_r)
        u_s, u_r = spec.utilities(p_s, p_r)
        trace.sequence.append((p_s, p_r, u_s, u_r))
        trace.iterations = n
        if n > 1:
            prev = trace.sequence[-2]
            if max(abs(u_s - prev[2]), abs(u_r - prev[3])) < eps:
                trace.converged = True
                return trace
    raise NonConvergenceError(f"best-response dynamics did not settle in {max_iter} rounds")


def is_nash(spec: GameSpec, profile: PowerProfile, tol: float = 1e-6) -> bool:
    """True if neither player can gain by deviating, up to ``tol``.

    Accepts either powers within ``tol`` of the best responses or utilities
    within ``tol`` (relative to max(1, utility)) of the best-response utility.
    """
    p_s, p_r = profile.p_s, profile.p_r
    b_s, b_r = br_sources(spec, p_r), br_relay(spec, p_s)
    if abs(b_s - p_s) <= tol and abs(b_r - p_r) <= tol:
        return True
    u_s, u_r = spec.utilities(p_s, p_r)
    best_s = spec.utilities(b_s, p_r)[0]
    best_r = spec.utilities(p_s, b_r)[1]
    return (best_s - u_s <= tol * max(1.0, abs(u_s))
            and best_r - u_r <= tol * max(1.0, abs(u_r)))
