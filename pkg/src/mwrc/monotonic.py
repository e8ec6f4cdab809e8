"""Global maximisation of the product-form GEE by monotonic optimisation.

Dinkelbach's outer loop needs the *global* maximum of the non-convex
parametric problem

    max  alpha C(gamma(P_S, P_R)) - lam (phi P_S + psi P_R + P_c)

over the power box.  With an auxiliary variable ``t`` it becomes a monotonic
problem in canonical form,

    max  alpha C(gamma(P_S, P_R)) + t
    s.t. t + lam (phi P_S + psi P_R) <= K,   K = lam (phi P_S^max + psi P_R^max),

over ``[0, P_S^max] x [0, P_R^max] x [0, K]``, which is solved with the
polyblock outer approximation algorithm.

Two implementations are provided.  :func:`polyblock_maximize` is the plain
algorithm for any increasing objective and constraint, meant for small
problems.  The GEE subproblem uses a compiled variant that adds box reduction
(every vertex keeps a lower corner below which no point can beat the
incumbent) and projects each selected vertex towards its lower corner rather
than towards the origin.  Both refinements cut the number of vertices by
orders of magnitude.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numba
import numpy as np
from scipy import optimize

from .core import NonConvergenceError, PowerLimits
from .fractional import SolveReport, dinkelbach
from .gee import Gee2Params, PowerCost, PowerProfile, gee2_numerator

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class Box3:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo, up = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != (3,) or up.shape != (3,):
            raise ValueError("Box3 needs 3-vectors")
        if np.any(lo < 0) or np.any(lo > up):
            raise ValueError("need 0 <= lower <= upper")


@dataclass
class Polyblock:
    """Result of a polyblock run: remaining vertices and the incumbent."""

    vertices: np.ndarray
    best_feasible: np.ndarray
    best_value: float
    upper_bound: float
    iterations: int
    #: global upper bound after each iteration (nonincreasing)
    upper_history: List[float] = field(default_factory=list)
    #: incumbent value after each iteration (nondecreasing)
    lower_history: List[float] = field(default_factory=list)


def project_to_boundary(v: np.ndarray, constraint: Callable[[np.ndarray], float], rhs: float,
                        tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Point ``s v`` on the segment ``[0, v]`` where an increasing ``constraint`` hits ``rhs``.

    Bisection on ``s``.  The returned point is feasible and
    ``rhs - constraint(s v) <= tol * max(1, |rhs|)``.
    """
    v = np.asarray(v, dtype=float)
    if constraint(v) <= rhs:
        return v.copy()
    lo, hi = 0.0, 1.0
    scale = max(1.0, abs(rhs))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        g = constraint(mid * v)
        if g <= rhs:
            lo = mid
            if rhs - g <= tol * scale:
                break
        else:
            hi = mid
    return lo * v


def _proper_children(rest: np.ndarray, kids: np.ndarray) -> np.ndarray:
    """Children not dominated by a surviving vertex or by another child."""
    if len(kids) == 0:
        return kids
    allv = np.concatenate([rest, kids])
    ge = np.all(allv[None, :, :] >= kids[:, None, :], axis=2)
    gt = np.any(allv[None, :, :] > kids[:, None, :], axis=2)
    idx = np.arange(len(kids))
    own = len(rest) + idx
    ge[idx, own] = False
    # exact duplicates among children: keep the first copy
    later = np.zeros_like(ge)
    later[:, len(rest):] = idx[None, :] > idx[:, None]
    dominated = ge & (gt | (np.arange(len(allv))[None, :] < len(rest)) | ~later)
    return kids[~dominated.any(axis=1)]


def polyblock_maximize(objective: Callable[[np.ndarray], float],
                       constraint: Callable[[np.ndarray], float], rhs: float,
                       upper: np.ndarray, eps: float = 1e-6, max_vertices: int = 100_000,
                       max_iter: int = 100_000) -> Polyblock:
    """Maximise an increasing ``objective`` over ``{0 <= x <= upper, constraint(x) <= rhs}``.

    ``constraint`` must be increasing with ``constraint(0) <= rhs``.  The
    vertex with the largest bound is refined first; ties go to the
    lexicographically smallest vertex.  Dominated vertices and vertices
    whose bound cannot beat the incumbent by more than ``eps`` are dropped.

    Raises:
        NonConvergenceError: vertex or iteration budget exhausted.
    """
    upper = np.asarray(upper, dtype=float)
    best_x = np.zeros_like(upper)
    best_val = objective(best_x)
    verts = [upper.copy()]
    upper_hist: List[float] = []
    lower_hist: List[float] = []
    it = 0
    while True:
        verts = [u for u in verts if objective(u) - best_val > eps]
        if not verts:
            bound = best_val
            break
        bounds = [objective(u) for u in verts]
        j = min(range(len(verts)), key=lambda i: (-bounds[i], tuple(verts[i])))
        bound, v = bounds[j], verts[j]
        upper_hist.append(bound)
        lower_hist.append(best_val)
        if constraint(v) <= rhs:
            best_x, best_val = v, bound
            lower_hist[-1] = best_val
            break
        it += 1
        if it > max_iter:
            raise NonConvergenceError(f"polyblock hit {max_iter} iterations (gap {bound - best_val:.3g})")
        z = project_to_boundary(v, constraint, rhs)
        fz = objective(z)
        if fz > best_val:
            best_x, best_val = z, fz
        verts_arr = np.array(verts)
        star = np.all(verts_arr > z, axis=1)
        star[j] = True
        kids = []
        for u in verts_arr[star]:
            for k in range(u.size):
                if u[k] > z[k]:
                    w = u.copy()
                    w[k] = z[k]
                    kids.append(w)
        rest = verts_arr[~star]
        kids = _proper_children(rest, np.array(kids).reshape(-1, upper.size))
        verts = list(rest) + list(kids)
        if len(verts) > max_vertices:
            raise NonConvergenceError(f"polyblock exceeded {max_vertices} vertices")
    return Polyblock(np.array(verts).reshape(-1, upper.size), best_x, best_val,
                     max(bound, best_val), it, upper_hist, lower_hist)


# --------------------------------------------------------------------------
# compiled polyblock for the GEE subproblem


@numba.njit(cache=True)
def _rate(alpha, a, b, c, p_s, p_r):
    return alpha * math.log1p(p_s * p_r / (a * p_s + b * p_r + c)) / _LN2


@numba.njit(cache=True)
def _reduce(alpha, a, b, c, w, k, gam, v, out_lo, out_up):
    """Shrink the box ``[0, v]`` to the part that may hold points with value >= gam.

    Writes the lower and upper corner and returns the new bound, or -inf
    when the box can be discarded.
    """
    need = gam - v[2]
    if need <= 0.0:
        lo_s = 0.0
        lo_r = 0.0
    else:
        q = math.expm1(need / alpha * _LN2)
        den = v[1] - a * q
        if den <= 0.0:
            return -np.inf
        lo_s = q * (b * v[1] + c) / den
        den = v[0] - b * q
        if den <= 0.0:
            return -np.inf
        lo_r = q * (a * v[0] + c) / den
    lo_t = max(0.0, gam - _rate(alpha, a, b, c, v[0], v[1]))
    out_lo[0] = lo_s
    out_lo[1] = lo_r
    out_lo[2] = lo_t
    slack = k
    for i in range(3):
        if out_lo[i] > v[i]:
            return -np.inf
        slack -= w[i] * out_lo[i]
    if slack < 0.0:
        return -np.inf
    for i in range(3):
        out_up[i] = v[i]
        if w[i] > 0.0:
            out_up[i] = min(v[i], out_lo[i] + slack / w[i])
    bound = _rate(alpha, a, b, c, out_up[0], out_up[1]) + out_up[2]
    if bound < gam:
        return -np.inf
    return bound


@numba.njit(cache=True)
def _lex_less(x, y):
    for i in range(3):
        if x[i] < y[i]:
            return True
        if x[i] > y[i]:
            return False
    return False


@numba.njit(cache=True)
def _polyblock_gee(alpha, a, b, c, w, k, upper, eps, capacity, max_iter):
    # returns status 0 (converged), 1 (vertex budget) or 2 (iteration budget)
    up = np.empty((capacity, 3))
    lo = np.empty((capacity, 3))
    bnd = np.empty(capacity)
    kid_up = np.empty((3 * capacity, 3))
    kid_lo = np.empty((3 * capacity, 3))
    kid_bnd = np.empty(3 * capacity)
    upper_hist = np.empty(max_iter + 1)
    lower_hist = np.empty(max_iter + 1)
    buf_lo = np.empty(3)
    buf_up = np.empty(3)
    cand = np.empty(3)

    best_x = np.zeros(3)
    best_x[2] = k
    best = k  # (0, 0, K) is feasible with zero rate
    n = 0
    b0 = _reduce(alpha, a, b, c, w, k, best + eps, upper, buf_lo, buf_up)
    if b0 > -np.inf:
        up[0] = buf_up
        lo[0] = buf_lo
        bnd[0] = b0
        n = 1
    it = 0
    status = 2
    n_hist = 0
    max_alive = n
    while True:
        gam = best + eps
        # drop hopeless vertices and pick the one with the largest bound
        j = -1
        i = 0
        while i < n:
            if bnd[i] < gam:
                n -= 1
                up[i] = up[n]
                lo[i] = lo[n]
                bnd[i] = bnd[n]
                continue
            if j < 0 or bnd[i] > bnd[j] or (bnd[i] == bnd[j] and _lex_less(up[i], up[j])):
                j = i
            i += 1
        if j < 0:
            upper_hist[n_hist] = best
            lower_hist[n_hist] = best
            n_hist += 1
            status = 0
            break
        # stored bounds go stale as the incumbent improves
        nb = _reduce(alpha, a, b, c, w, k, gam, up[j], buf_lo, buf_up)
        if nb < bnd[j]:
            if nb == -np.inf:
                n -= 1
                up[j] = up[n]
                lo[j] = lo[n]
                bnd[j] = bnd[n]
            else:
                up[j] = buf_up
                lo[j] = buf_lo
                bnd[j] = nb
            continue
        upper_hist[n_hist] = max(bnd[j], best)
        lower_hist[n_hist] = best
        n_hist += 1
        v = up[j].copy()
        gv = w[0] * v[0] + w[1] * v[1] + v[2]
        if gv <= k:
            best = bnd[j]
            best_x[:] = v
            upper_hist[n_hist - 1] = best
            lower_hist[n_hist - 1] = best
            status = 0
            break
        if it >= max_iter:
            break
        it += 1
        # ray from the lower corner through v meets the linear constraint at z
        ga = w[0] * lo[j, 0] + w[1] * lo[j, 1] + lo[j, 2]
        z = lo[j] + (v - lo[j]) * ((k - ga) / (gv - ga))
        fz = _rate(alpha, a, b, c, z[0], z[1]) + z[2]
        if fz > best:
            best = fz
            best_x[:] = z
        gam = best + eps
        # replace v and every vertex strictly above z by their children
        m = 0
        i = 0
        while i < n:
            star = i == j
            if not star:
                star = up[i, 0] > z[0] and up[i, 1] > z[1] and up[i, 2] > z[2]
            if star:
                for d in range(3):
                    if up[i, d] > z[d]:
                        cand[:] = up[i]
                        cand[d] = z[d]
                        kb = _reduce(alpha, a, b, c, w, k, gam, cand, buf_lo, buf_up)
                        if kb > -np.inf:
                            kid_up[m] = buf_up
                            kid_lo[m] = buf_lo
                            kid_bnd[m] = kb
                            m += 1
                if i == j:
                    j = -1
                n -= 1
                up[i] = up[n]
                lo[i] = lo[n]
                bnd[i] = bnd[n]
                if j == n:
                    j = i
                continue
            i += 1
        # keep only children not dominated by another vertex
        for p in range(m):
            u = kid_up[p]
            proper = True
            for i in range(n):
                if up[i, 0] >= u[0] and up[i, 1] >= u[1] and up[i, 2] >= u[2]:
                    proper = False
                    break
            if proper:
                for q in range(m):
                    if q == p:
                        continue
                    o = kid_up[q]
                    if o[0] >= u[0] and o[1] >= u[1] and o[2] >= u[2]:
                        if o[0] > u[0] or o[1] > u[1] or o[2] > u[2] or q < p:
                            proper = False
                            break
            if proper:
                if n >= capacity:
                    return best_x, best, upper_hist[:n_hist], lower_hist[:n_hist], it, max_alive, 1
                up[n] = u
                lo[n] = kid_lo[p]
                bnd[n] = kid_bnd[p]
                n += 1
        max_alive = max(max_alive, n)
    return best_x, best, upper_hist[:n_hist], lower_hist[:n_hist], it, max_alive, status


@dataclass
class InnerSolution:
    profile: PowerProfile
    #: value of the parametric objective ``rate - lam * consumed power``
    value: float
    #: certified upper bound on the global maximum of that objective
    bound: float
    iterations: int
    upper_history: List[float] = field(default_factory=list)
    lower_history: List[float] = field(default_factory=list)


def _polish(params: Gee2Params, cost: PowerCost, limits: PowerLimits, lam: float,
            x0: tuple) -> tuple:
    """Local ascent on ``rate - lam * power`` from the polyblock incumbent."""
    scale = np.array([limits.p_s_max, limits.p_r_max])

    def neg(u):
        x = u * scale
        return -(gee2_numerator(params, x[0], x[1]) - lam * (cost.phi * x[0] + cost.psi * x[1]))

    # work on the unit box so that the tolerances do not depend on the power units
    res = optimize.minimize(neg, np.asarray(x0, float) / scale, method="L-BFGS-B",
                            bounds=[(0.0, 1.0), (0.0, 1.0)])
    u = np.clip(res.x, 0.0, 1.0)
    return min(float(u[0] * scale[0]), limits.p_s_max), min(float(u[1] * scale[1]), limits.p_r_max)


#: default polyblock tolerance relative to the full-power sum rate
REL_EPS_MONO = 1e-3


def default_eps_mono(params: Gee2Params, limits: PowerLimits) -> float:
    """Absolute polyblock tolerance used when none is given.

    The vertex count grows like ``1/eps`` near an interior optimum, and
    scaling the tolerance with the largest attainable rate keeps it
    independent of the units of power.
    """
    return REL_EPS_MONO * gee2_numerator(params, limits.p_s_max, limits.p_r_max)


def inner_subproblem_global(params: Gee2Params, cost: PowerCost, limits: PowerLimits, lam: float,
                            eps_mono: Optional[float] = None, max_vertices: int = 100_000,
                            max_iter: int = 2_000_000, polish: bool = True) -> InnerSolution:
    """Globally maximise ``alpha C(gamma) - lam (phi P_S + psi P_R + P_c)`` over the power box.

    The returned value is within ``eps_mono`` (absolute) of the global
    maximum, which is certified by ``bound``.  With ``polish`` the incumbent
    is refined by a local bounded quasi-Newton ascent; this never lowers the
    value and usually closes the remaining gap to rounding level.

    Raises:
        NonConvergenceError: vertex or iteration budget exhausted.
    """
    if not lam >= 0:
        raise ValueError("lam must be >= 0")
    if eps_mono is None:
        eps_mono = default_eps_mono(params, limits)
    k = lam * (cost.phi * limits.p_s_max + cost.psi * limits.p_r_max)
    const = k + lam * cost.p_c
    w = np.array([lam * cost.phi, lam * cost.psi, 1.0])
    upper = np.array([limits.p_s_max, limits.p_r_max, k])
    x, best, up_h, lo_h, it, alive, status = _polyblock_gee(
        params.alpha, params.a, params.b, params.c, w, k, upper, eps_mono, max_vertices, max_iter)
    if status == 1:
        raise NonConvergenceError(f"polyblock exceeded {max_vertices} vertices "
                                  f"(gap {up_h[-1] - lo_h[-1]:.3g})")
    if status == 2:
        raise NonConvergenceError(f"polyblock hit {max_iter} iterations (gap {up_h[-1] - lo_h[-1]:.3g})")

    def value(p_s, p_r):
        return gee2_numerator(params, p_s, p_r) - lam * cost.consumed(p_s, p_r)

    p_s, p_r = float(x[0]), float(x[1])
    val = value(p_s, p_r)
    if polish:
        cand = _polish(params, cost, limits, lam, (p_s, p_r))
        if value(*cand) > val:
            p_s, p_r = cand
            val = value(p_s, p_r)
    bound = max(float(up_h[-1]) - const, val)
    logger.debug("polyblock lam=%.6g: %d iterations, %d live vertices max, gap %.3g",
                 lam, it, alive, bound - val)
    return InnerSolution(PowerProfile(p_s, p_r), val, bound, it,
                         [u - const for u in up_h], [v - const for v in lo_h])


def gee2_global(params: Gee2Params, cost: PowerCost, limits: PowerLimits, eps: float = 1e-9,
                eps_mono: Optional[float] = None, max_iter: int = 100, max_vertices: int = 100_000,
                polish: bool = True) -> SolveReport:
    """Globally optimal product-form GEE via Dinkelbach with a polyblock inner solver."""
    bounds: List[float] = []

    def inner(lam):
        sol = inner_subproblem_global(params, cost, limits, lam, eps_mono, max_vertices,
                                      polish=polish)
        bounds.append(sol.bound)
        return (sol.profile.p_s, sol.profile.p_r)

    def f(x):
        return gee2_numerator(params, x[0], x[1])

    def g(x):
        return cost.consumed(x[0], x[1])

    res = dinkelbach(f, g, inner, eps=eps, max_iter=max_iter)
    p_s, p_r = res.x_star
    gee = f(res.x_star) / g(res.x_star)
    logger.debug("gee2_global: lambdas=%s bounds=%s", res.lambdas, bounds)
    return SolveReport(PowerProfile(p_s, p_r), gee, res.lambdas[1:], res.iterations, res.converged)


def certified_gap(params: Gee2Params, cost: PowerCost, limits: PowerLimits, gee: float,
                  eps_mono: Optional[float] = None) -> float:
    """Upper bound on ``GEE* - gee`` from one polyblock run at ``lam = gee``.

    Uses ``max_x f(x) - lam g(x) <= bound`` and ``g >= P_c``.
    """
    sol = inner_subproblem_global(params, cost, limits, gee, eps_mono, polish=False)
    return max(sol.bound, 0.0) / cost.p_c
