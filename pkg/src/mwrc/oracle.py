"""Brute-force reference computations used to check the closed forms and the solvers.

* exact sum-rate maximisation over a 3-user rate region by vertex enumeration,
* the rate regions behind the outer bound, DF, AF-SND and NNC,
* dense grid search of the GEE over the power box,
* a sweep of the NNC compression noise.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import DegenerateRegion, PowerLimits, SymmetricChannel, capacity
from .gee import PowerCost, PowerProfile, numerator, params_for

_PAIRS = ((0, 1), (1, 2), (0, 2))


@dataclass
class RateRegion:
    """Rate tuples ``R >= 0`` with ``coeffs . R <= rhs`` for every constraint."""

    constraints: List[Tuple[Tuple[int, int, int], float]] = field(default_factory=list)

    def add(self, members: Sequence[int], rhs: float) -> "RateRegion":
        coeffs = tuple(1 if i in members else 0 for i in range(3))
        # an empty achievable set for this subset shows up as a zero bound
        self.constraints.append((coeffs, max(0.0, float(rhs))))
        return self

    def __post_init__(self):
        for coeffs, rhs in self.constraints:
            if len(coeffs) != 3 or any(c not in (0, 1) for c in coeffs):
                raise ValueError("coefficients must be 0/1 3-vectors")
            if rhs < 0:
                raise ValueError("bounds must be >= 0")

    def contains(self, rates, tol: float = 1e-12) -> bool:
        r = np.asarray(rates, dtype=float)
        if np.any(r < -tol):
            return False
        return all(np.dot(c, r) <= b + tol for c, b in self.constraints)


_TRIPLE_CACHE: dict = {}


def lp_max_sum_rate(region: RateRegion, tol: float = 1e-10) -> float:
    """Maximum of ``R1 + R2 + R3`` over ``region``, exact up to rounding.

    Every vertex is the intersection of three active planes (constraints or
    nonnegativity); all of them are solved for, the feasible ones kept, and
    the best sum returned.

    Raises:
        DegenerateRegion: no feasible vertex (or the region is unbounded).
    """
    if not region.constraints:
        raise DegenerateRegion("region has no constraints")
    a = np.array([c for c, _ in region.constraints], dtype=float)
    b = np.array([r for _, r in region.constraints], dtype=float)
    if np.any(a.sum(axis=0) == 0):
        raise DegenerateRegion("some rate is unconstrained")
    planes = np.vstack([a, -np.eye(3)])
    rhs = np.concatenate([b, np.zeros(3)])
    m = len(planes)
    idx = _TRIPLE_CACHE.get(m)
    if idx is None:
        idx = np.array(list(itertools.combinations(range(m), 3)))
        _TRIPLE_CACHE[m] = idx
    mats = planes[idx]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-9
    points = np.linalg.solve(mats[ok], rhs[idx[ok]][:, :, None])[:, :, 0]
    scale = max(1.0, float(np.max(np.abs(b))))
    feasible = np.all(points @ planes.T <= rhs + tol * scale, axis=1)
    if not feasible.any():
        raise DegenerateRegion("no feasible vertex")
    return float(points[feasible].sum(axis=1).max())


def outer_bound_region(ch: SymmetricChannel) -> RateRegion:
    reg = RateRegion()
    for pair in _PAIRS:
        reg.add(pair, capacity(ch.p_r / ch.n_s))
    for k in range(3):
        reg.add((k,), capacity(ch.p_s / ch.n_r))
    return reg


def df_region(ch: SymmetricChannel) -> RateRegion:
    """Multiple access at the relay intersected with the side-information broadcast."""
    reg = RateRegion()
    for size in (1, 2, 3):
        for sub in itertools.combinations(range(3), size):
            reg.add(sub, capacity(size * ch.p_s / ch.n_r))
    for pair in _PAIRS:
        reg.add(pair, capacity(ch.p_r / ch.n_s))
    return reg


def af_snd_region(ch: SymmetricChannel) -> RateRegion:
    """Single rates and the pairs ``{k, l(k)}`` with amplified relay noise."""
    den = ch.n_r * ch.p_r + ch.n_s * (ch.n_r + 3.0 * ch.p_s)
    reg = RateRegion()
    for k in range(3):
        reg.add((k,), capacity(ch.p_r * ch.p_s / den))
    # l(k) runs over the other users, so the pairs {k, l(k)} are all three pairs
    for pair in _PAIRS:
        reg.add(pair, capacity(2.0 * ch.p_r * ch.p_s / den))
    return reg


def nnc_region(ch: SymmetricChannel, q0: float) -> RateRegion:
    """Region for a fixed compression noise ``q0`` (strict inequalities closed)."""
    if not q0 > 0:
        raise ValueError("q0 must be > 0")
    single = capacity(ch.p_s / (ch.n_r + q0))
    pair = min(capacity(2.0 * ch.p_s / (ch.n_r + q0)),
               capacity(ch.p_r / ch.n_s) - capacity(ch.n_r / q0))
    reg = RateRegion()
    for k in range(3):
        reg.add((k,), single)
    for p in _PAIRS:
        reg.add(p, pair)
    return reg


def nnc_q0_sweep(ch: SymmetricChannel, q0_grid: Optional[Sequence[float]] = None,
                 refinements: int = 3) -> Tuple[float, float]:
    """Best compression noise and sum rate over a grid of ``q0`` values.

    The default is a logarithmic grid over twelve decades around ``N_S``,
    refined a few times around the best point.

    Returns:
        ``(best_q0, best_sum_rate)``
    """
    def best_on(grid):
        rates = [lp_max_sum_rate(nnc_region(ch, q)) for q in grid]
        i = int(np.argmax(rates))
        return i, rates[i]

    if q0_grid is not None:
        grid = np.asarray(q0_grid, dtype=float)
        i, r = best_on(grid)
        return float(grid[i]), r
    grid = ch.n_s * np.logspace(-6, 6, 241)
    for _ in range(refinements + 1):
        i, r = best_on(grid)
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        best_q = grid[i]
        grid = np.geomspace(lo, hi, 101)
    return float(best_q), r


def grid_search_gee(scheme, cost: PowerCost, limits: PowerLimits, grid_n: int = 1001,
                    n_s: float = 1.0, n_r: float = 1.0) -> Tuple[PowerProfile, float]:
    """Best GEE over a uniform ``grid_n x grid_n`` power grid that includes the box edges."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    params = params_for(scheme, n_s, n_r)
    p_s = np.linspace(0.0, limits.p_s_max, grid_n)
    p_r = np.linspace(0.0, limits.p_r_max, grid_n)
    best_val, best = -math.inf, (0.0, 0.0)
    # row blocks keep memory flat for large grids
    step = max(1, 2_000_000 // grid_n)
    for start in range(0, grid_n, step):
        ps = p_s[start:start + step, None]
        rate = numerator(params, ps * np.ones((1, grid_n)), p_r[None, :] * np.ones_like(ps), n_s, n_r)
        gee = rate / cost.consumed(ps, p_r[None, :])
        i, j = np.unravel_index(int(np.argmax(gee)), gee.shape)
        if gee[i, j] > best_val:
            best_val, best = float(gee[i, j]), (float(p_s[start + i]), float(p_r[j]))
    return PowerProfile(*best), best_val
