"""Named end-to-end checks shared by ``mwrc verify`` and the acceptance tests.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import mpmath
import numpy as np
from scipy import optimize

from . import rates
from .core import PowerLimits, Scheme, SymmetricChannel, linear_to_db, snr_db_to_linear
from .fractional import alternating_gee2, dinkelbach, maximize_gee1
from .game import GameSpec, br_relay, br_sources, brd, is_nash
from .gee import PowerCost, PowerProfile, gee1_params_for, gee2_params_for, is_product_form
from .monotonic import gee2_global
from .oracle import (
    af_snd_region,
    df_region,
    grid_search_gee,
    lp_max_sum_rate,
    nnc_q0_sweep,
    nnc_region,
    outer_bound_region,
)
from .power_model import LinkBudget, scheme_power_profile


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<24} {self.detail} ({self.seconds:.2f} s)"


def _timed(name: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def cooperative_gee(scheme, cost: PowerCost, limits: PowerLimits, n: float = 1.0,
                    solver: str = "alternating") -> tuple:
    """Cooperative optimum ``(gee, profile, iterations)`` with the solver suited to ``scheme``."""
    scheme = Scheme.parse(scheme)
    if not is_product_form(scheme):
        rep = maximize_gee1(gee1_params_for(scheme), cost, limits, n, n)
    elif solver == "monotonic":
        rep = gee2_global(gee2_params_for(scheme, n, n), cost, limits)
    else:
        rep = alternating_gee2(gee2_params_for(scheme, n, n), cost, limits)
    return rep.gee, rep.profile, rep.iterations


# ---------------------------------------------------------------- analytic


def check_theorem1_threshold() -> CheckResult:
    def run():
        found = rates.df_capacity_threshold_db()
        expected = linear_to_db(rates.theorem1_threshold_snr())
        return abs(found - expected) <= 0.01, f"bisection {found:.5f} dB vs 3+2*sqrt(3) = {expected:.5f} dB"

    res = _timed("theorem1_threshold", run)
    res.passed &= res.seconds < 1.0
    return res


def check_df_nnc_crossing() -> CheckResult:
    def run():
        x = rates.df_nnc_crossing_db()
        return abs(x - 14.27) <= 0.05, f"crossing {x:.4f} dB, target 14.27 +- 0.05 dB"

    res = _timed("df_nnc_crossing", run)
    res.passed &= res.seconds < 1.0
    return res


def check_theorem2_gaps() -> CheckResult:
    def run():
        g_nnc = rates.high_snr_gap(Scheme.NNC, 1e6)
        g_snd = rates.high_snr_gap(Scheme.AF_SND, 1e6)
        ok = abs(g_nnc - 0.877) <= 1e-3 and abs(g_snd - 1.5) <= 1e-3
        return ok, f"outer-NNC {g_nnc:.5f} bit, outer-AF-SND {g_snd:.5f} bit at 60 dB"

    return _timed("theorem2_gaps", run)


def check_af_ian_gap() -> CheckResult:
    def run():
        g = rates.high_snr_gap(Scheme.AF_IAN, 1e6)
        return abs(g - 2.0) <= 1e-3, f"DF-AF-IAN {g:.5f} bit at 60 dB"

    return _timed("af_ian_gap", run)


def dof_estimate(scheme, s: float = 1e9, span: float = 2.0) -> float:
    """High-SNR slope of the sum rate in bits per doubling of the SNR around ``s``."""
    lo = SymmetricChannel.completely_symmetric(s / span)
    hi = SymmetricChannel.completely_symmetric(s * span)
    return (rates.sum_rate(scheme, hi).value - rates.sum_rate(scheme, lo).value) / (2 * math.log2(span))


_DOF = {Scheme.OUTER_BOUND: 1.5, Scheme.NNC: 1.5, Scheme.AF_SND: 1.5, Scheme.DF: 1.0, Scheme.AF_IAN: 1.0}


def check_dof() -> CheckResult:
    """``rate / log2(S)`` at ``S = 1e9`` against the degrees of freedom, to 0.01."""
    def run():
        ok = True
        parts = []
        ch = SymmetricChannel.completely_symmetric(1e9)
        for scheme, d in _DOF.items():
            ratio = rates.sum_rate(scheme, ch).value / math.log2(1e9)
            ok &= abs(ratio - d) <= 0.01
            parts.append(f"{scheme} {ratio:.4f}")
        return ok, "rate/log2(S): " + "; ".join(parts)

    return _timed("dof", run)


def check_dof_slope() -> CheckResult:
    """High-SNR slope of the rate per log2(S) around ``S = 1e9`` against the degrees of freedom."""
    def run():
        slopes = {s: dof_estimate(s) for s in _DOF}
        ok = all(abs(slopes[s] - d) <= 0.01 for s, d in _DOF.items())
        return ok, "slope: " + "; ".join(f"{s} {v:.4f}" for s, v in slopes.items())

    return _timed("dof_slope", run)


def random_channels(n: int, seed: int = 0) -> List[SymmetricChannel]:
    rng = np.random.default_rng(seed)
    p = 10.0 ** rng.uniform(-3, 3, size=(n, 2))
    noise = 10.0 ** rng.uniform(-2, 2, size=(n, 2))
    return [SymmetricChannel(*p[i], *noise[i]) for i in range(n)]


def _af_ian_strict_gap_mp(ch: SymmetricChannel, digits: int = 60) -> float:
    """AF-IAN rate minus its full-power rate, evaluated with ``digits`` significant digits.

    At very low SNR the two agree to second order and their difference is
    far below double precision.
    """
    with mpmath.workdps(digits):
        ps, pr, ns, nr = (mpmath.mpf(float(x)) for x in (ch.p_s, ch.p_r, ch.n_s, ch.n_r))
        den = nr * pr + 3 * ps * ns + ns * nr
        scheduled = mpmath.log1p(3 * ps * pr / den)
        full = 3 * mpmath.log1p(pr * ps / (pr * ps + den))
        return float((scheduled - full) / mpmath.log(2))


def check_rate_orderings(n: int = 10_000) -> CheckResult:
    def run():
        worst = -math.inf
        strict_fail = 0
        for ch in random_channels(n, seed=1):
            nnc = rates.nnc_rate(ch).value
            snd = rates.af_snd_rate(ch).value
            ian = rates.af_ian_rate(ch).value
            worst = max(worst, snd - nnc, ian - snd)
            if ch.p_s > 0 and ch.p_r > 0 and not ian > rates.af_ian_max_power_rate(ch).value:
                if not _af_ian_strict_gap_mp(ch) > 0:
                    strict_fail += 1
        return worst <= 1e-12 and strict_fail == 0, (
            f"{n} channels: max ordering violation {worst:.2e}, strict AF-IAN failures {strict_fail}")

    return _timed("rate_orderings", run)


def check_oracle_equivalence(n: int = 100) -> CheckResult:
    def run():
        worst = 0.0
        worst_q = 0.0
        for ch in random_channels(n, seed=2):
            pairs = [(outer_bound_region(ch), rates.outer_bound(ch).value),
                     (df_region(ch), rates.df_rate(ch).value),
                     (af_snd_region(ch), rates.af_snd_rate(ch).value)]
            nnc = rates.nnc_rate(ch)
            pairs.append((nnc_region(ch, nnc.q0_opt), nnc.value))
            for region, closed in pairs:
                worst = max(worst, abs(lp_max_sum_rate(region) - closed))
            q, _ = nnc_q0_sweep(ch)
            worst_q = max(worst_q, abs(q / nnc.q0_opt - 1.0))
        return worst <= 1e-9 and worst_q <= 0.01, (
            f"{n} channels: max |LP - closed form| {worst:.2e}, max q0 rel. error {worst_q:.2e}")

    res = _timed("oracle_equivalence", run)
    res.passed &= res.seconds < 30.0
    return res


def random_gee2_instances(n: int = 20, seed: int = 3):
    rng = np.random.default_rng(seed)
    out = []
    schemes = (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN)
    for i in range(n):
        n_s, n_r = rng.uniform(0.5, 2.0, 2)
        cost = PowerCost(phi=rng.uniform(3, 6), psi=rng.uniform(1, 3), p_c=rng.uniform(0.2, 3))
        limits = PowerLimits(*rng.uniform(0.1, 20.0, 2))
        out.append((schemes[i % 3], gee2_params_for(schemes[i % 3], n_s, n_r), cost, limits, n_s, n_r))
    return out


def check_solver_agreement(n: int = 20) -> CheckResult:
    def run():
        worst_rel = 0.0
        worst_grid = -math.inf
        for scheme, params, cost, limits, n_s, n_r in random_gee2_instances(n):
            alt = alternating_gee2(params, cost, limits).gee
            glob = gee2_global(params, cost, limits).gee
            _, grid = grid_search_gee(scheme, cost, limits, 1001, n_s, n_r)
            worst_rel = max(worst_rel, abs(alt - glob) / glob)
            worst_grid = max(worst_grid, grid - alt, grid - glob)
        return worst_rel <= 1e-4 and worst_grid <= 1e-4, (
            f"{n} instances: max rel. |alt - global| {worst_rel:.2e}, max grid excess {worst_grid:.2e}")

    res = _timed("solver_agreement", run)
    res.passed &= res.seconds < 300.0
    return res


def check_dinkelbach_analytic() -> CheckResult:
    def run():
        f = lambda x: math.log2(1.0 + x)  # noqa: E731
        g = lambda x: x + 1.0  # noqa: E731
        upper = 1e3

        def inner(lam):
            # f - lam g is concave; its stationary point solves 1 / ((1 + x) ln 2) = lam
            slope = lambda x: 1.0 / ((1.0 + x) * math.log(2.0)) - lam  # noqa: E731
            if slope(upper) >= 0:
                return upper
            if slope(0.0) <= 0:
                return 0.0
            return optimize.brentq(slope, 0.0, upper, xtol=1e-15, rtol=1e-15)

        res = dinkelbach(f, g, inner, eps=1e-14)
        x_err = abs(res.x_star - (math.e - 1.0))
        l_err = abs(res.lambda_star - 1.0 / (math.e * math.log(2.0)))
        increasing = all(b > a for a, b in zip(res.lambdas, res.lambdas[1:]))
        return x_err <= 1e-8 and l_err <= 1e-8 and increasing, (
            f"|x - (e-1)| {x_err:.1e}, |lam - 1/(e ln2)| {l_err:.1e}, "
            f"{len(res.lambdas)} increasing lambdas: {increasing}")

    return _timed("dinkelbach_analytic", run)


# ---------------------------------------------------------------- game


def br_inequality_slack(gamma: np.ndarray, d: float) -> np.ndarray:
    """Slack of ``gamma <= ln(1+gamma) + gamma (1+gamma)/(gamma+d) ln(1+gamma)``."""
    lg = np.log1p(gamma)
    return lg + gamma * (1 + gamma) / (gamma + d) * lg - gamma


def game_specs(limits: PowerLimits | None = None, cost: PowerCost | None = None) -> List[GameSpec]:
    limits = limits or PowerLimits.symmetric(10.0)
    cost = cost or PowerCost(3.0, 1.0, 1.0, 0.75, 0.25)
    return [GameSpec.for_scheme(s, cost, limits) for s in Scheme]


def check_game_suite(n_inits: int = 100) -> CheckResult:
    def run():
        specs = game_specs()
        trivial = all(is_nash(s, PowerProfile(0.0, 0.0)) for s in specs)
        rng = np.random.default_rng(4)
        converged = 0
        nash = 0
        for i in range(n_inits):
            base = specs[i % len(specs)]
            cost = PowerCost(rng.uniform(3, 6), rng.uniform(1, 3), 1.0,
                             rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0))
            limits = PowerLimits(*rng.uniform(0.1, 50.0, 2))
            spec = GameSpec.for_scheme(base.scheme, cost, limits, *rng.uniform(0.5, 2.0, 2))
            if i % 2:
                tr = brd(spec, p_r_init=rng.uniform(0, limits.p_r_max), eps=1e-9, max_iter=1000)
            else:
                tr = brd(spec, p_s_init=rng.uniform(0, limits.p_s_max), eps=1e-9, max_iter=1000)
            converged += tr.converged
            nash += is_nash(spec, tr.profile, tol=1e-6)
        mono = True
        for spec in specs:
            grid = np.linspace(0.0, spec.limits.p_r_max, 201)
            b_s = [br_sources(spec, x) for x in grid]
            b_r = [br_relay(spec, x) for x in np.linspace(0.0, spec.limits.p_s_max, 201)]
            mono &= bool(np.all(np.diff(b_s) >= -1e-12) and np.all(np.diff(b_r) >= -1e-12))
        gam = np.concatenate([[0.0], np.logspace(-8, 6, 2001)])
        ineq = all(np.all(br_inequality_slack(gam, d) >= -1e-12 * np.maximum(1.0, gam)) for d in (2 / 3, 1.0))
        ok = trivial and converged == n_inits and nash == n_inits and mono and ineq
        return ok, (f"(0,0) NE for all: {trivial}; BRD converged {converged}/{n_inits}, "
                    f"NE {nash}/{n_inits}; BR monotone: {mono}; inequality holds: {ineq}")

    return _timed("game_suite", run)


# ---------------------------------------------------------------- sweeps

UNIT_NOISE_COST = PowerCost(3.0, 1.0, 1.0, 0.75, 0.25)
SATURATION_SNR_DB = (0.0, 2.5, 5.0, 10.0, 20.0, 30.0)


def check_gee_saturation() -> CheckResult:
    def run():
        table = {s: [cooperative_gee(s, UNIT_NOISE_COST, PowerLimits.symmetric(snr_db_to_linear(x)))[0]
                     for x in SATURATION_SNR_DB] for s in Scheme}
        i5 = SATURATION_SNR_DB.index(5.0)
        saturated = all(max(abs(v - vals[i5]) for v in vals[i5:]) <= 1e-6 for vals in table.values())
        df_best = all(table[Scheme.DF][i] > max(table[s][i] for s in (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN))
                      for i in range(len(SATURATION_SNR_DB)))
        sat = {str(s): round(v[-1], 5) for s, v in table.items()}
        return saturated and df_best, f"saturated from 5 dB: {saturated}; DF best: {df_best}; GEE {sat}"

    return _timed("gee_saturation", run)


def check_competitive_gap() -> CheckResult:
    def run():
        gaps: Dict[Scheme, float] = {}
        for x in (0.0, 10.0, 20.0):
            limits = PowerLimits.symmetric(snr_db_to_linear(x))
            for spec in game_specs(limits, UNIT_NOISE_COST):
                if spec.scheme is Scheme.OUTER_BOUND:
                    continue
                coop = cooperative_gee(spec.scheme, UNIT_NOISE_COST, limits)[0]
                ne = spec.gee(*brd(spec, p_r_init=limits.p_r_max).sequence[-1][:2])
                gaps[spec.scheme] = max(gaps.get(spec.scheme, 0.0), (coop - ne) / coop)
        others = [gaps[s] for s in (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN)]
        ok = gaps[Scheme.DF] <= 0.01 and min(others) >= 0.05
        return ok, "relative price of anarchy " + ", ".join(f"{s} {g:.4f}" for s, g in gaps.items())

    return _timed("competitive_gap", run)


B2B_SNR_DB = tuple(float(x) for x in range(-10, 42, 2))
#: start of the saturated high-SNR end of the board-to-board sweep
B2B_HIGH_SNR_DB = 30.0


def b2b_gee(scheme, snr_db: float, lb: LinkBudget | None = None, pessimistic_nnc: bool = False,
            solver: str = "alternating") -> tuple:
    """Board-to-board GEE in bit/J with the optimal powers, at received SNR ``snr_db``."""
    lb = lb or LinkBudget()
    scheme = Scheme.parse(scheme)
    cost_scheme = Scheme.DF if scheme is Scheme.OUTER_BOUND else scheme
    cost = scheme_power_profile(cost_scheme, pessimistic_nnc=pessimistic_nnc)
    gee, profile, iters = cooperative_gee(scheme, cost, lb.limits_for_snr_db(snr_db),
                                          lb.effective_noise(), solver)
    return gee * lb.bandwidth_hz, profile, iters


def check_b2b_ranking() -> CheckResult:
    def run():
        names = [Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN, Scheme.DF]
        rows = []
        for x in B2B_SNR_DB:
            vals = {s: b2b_gee(s, x)[0] for s in names}
            vals["NNC-pess"] = b2b_gee(Scheme.NNC, x, pessimistic_nnc=True)[0]
            rows.append((x, vals))
        snd_best = all(v[Scheme.AF_SND] > max(v[s] for s in names if s is not Scheme.AF_SND)
                       and v[Scheme.AF_SND] > v["NNC-pess"] for x, v in rows if x >= 10.0)
        df_best = all(v[Scheme.DF] > max(v[s] for s in names if s is not Scheme.DF)
                      and v[Scheme.DF] > v["NNC-pess"] for x, v in rows if x < 10.0)
        pess = all(v["NNC-pess"] > v[Scheme.DF] for x, v in rows if x >= B2B_HIGH_SNR_DB)
        ok = snd_best and df_best and pess
        return ok, (f"AF-SND best for SNR >= 10 dB: {snd_best}; DF best below: {df_best}; "
                    f"pessimistic NNC beats DF from {B2B_HIGH_SNR_DB:g} dB: {pess}")

    return _timed("b2b_ranking", run)


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "theorem1_threshold": check_theorem1_threshold,
    "df_nnc_crossing": check_df_nnc_crossing,
    "theorem2_gaps": check_theorem2_gaps,
    "af_ian_gap": check_af_ian_gap,
    "dof": check_dof,
    "dof_slope": check_dof_slope,
    "rate_orderings": check_rate_orderings,
    "oracle_equivalence": check_oracle_equivalence,
    "solver_agreement": check_solver_agreement,
    "dinkelbach_analytic": check_dinkelbach_analytic,
    "game_suite": check_game_suite,
    "gee_saturation": check_gee_saturation,
    "competitive_gap": check_competitive_gap,
    "b2b_ranking": check_b2b_ranking,
}


def run_all(names=None) -> List[CheckResult]:
    names = list(CHECKS) if names is None else list(names)
    return [CHECKS[n]() for n in names]
