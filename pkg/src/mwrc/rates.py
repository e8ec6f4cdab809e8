"""Closed-form achievable sum rates of the symmetric 3-way relay channel.

Every function takes a :class:`~mwrc.core.SymmetricChannel` and returns a
:class:`SumRate` in bit/s/Hz.  The analytic comparison results (capacity
threshold for DF, high-SNR gaps, DF/NNC crossing) live here too.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy import optimize

from .core import Scheme, SymmetricChannel, UnsupportedScheme, capacity, snr_db_to_linear


class Branch(str, enum.Enum):
    UPLINK = "UplinkLimited"
    DOWNLINK = "DownlinkLimited"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SumRate:
    value: float
    active_branch: Optional[Branch] = None
    #: optimal compression noise, NNC only (None when the relay is silent)
    q0_opt: Optional[float] = None

    def __float__(self) -> float:
        return self.value


def _min_form(downlink: float, uplink: float) -> SumRate:
    # ties go to the downlink term
    if downlink <= uplink:
        return SumRate(downlink, Branch.DOWNLINK)
    return SumRate(uplink, Branch.UPLINK)


def outer_bound(ch: SymmetricChannel) -> SumRate:
    """Upper bound on the sum capacity (cut-set uplink, side-information downlink)."""
    return _min_form(1.5 * capacity(ch.p_r / ch.n_s), 3.0 * capacity(ch.p_s / ch.n_r))


def df_rate(ch: SymmetricChannel) -> SumRate:
    return _min_form(1.5 * capacity(ch.p_r / ch.n_s), capacity(3.0 * ch.p_s / ch.n_r))


def nnc_rate(ch: SymmetricChannel) -> SumRate:
    """Noisy network coding with non-unique decoding.

    ``q0_opt`` is the compression noise at which the uplink and downlink
    constraints of the NNC region meet, ``N_S (N_R + 2 P_S) / P_R``.
    """
    if ch.p_r == 0:
        return SumRate(0.0)
    gamma = 2.0 * ch.p_s * ch.p_r / (ch.n_r * ch.p_r + 2.0 * ch.p_s * ch.n_s + ch.n_s * ch.n_r)
    q0 = ch.n_s * (ch.n_r + 2.0 * ch.p_s) / ch.p_r
    return SumRate(1.5 * capacity(gamma), q0_opt=q0)


def af_snd_rate(ch: SymmetricChannel) -> SumRate:
    gamma = 2.0 * ch.p_s * ch.p_r / (ch.n_r * ch.p_r + 3.0 * ch.p_s * ch.n_s + ch.n_s * ch.n_r)
    return SumRate(1.5 * capacity(gamma))


def af_ian_rate(ch: SymmetricChannel) -> SumRate:
    """AF relaying, interference treated as noise, with the 3-slot power schedule."""
    gamma = 3.0 * ch.p_s * ch.p_r / (ch.n_r * ch.p_r + 3.0 * ch.p_s * ch.n_s + ch.n_s * ch.n_r)
    return SumRate(capacity(gamma))


def af_ian_max_power_rate(ch: SymmetricChannel) -> SumRate:
    """AF-IAN when every node simply transmits at full power all the time."""
    ps, pr, ns, nr = ch.p_s, ch.p_r, ch.n_s, ch.n_r
    denom = pr * ps + pr * nr + 3.0 * ps * ns + nr * ns
    return SumRate(3.0 * capacity(pr * ps / denom))


def af_ian_no_timesharing_rate(ch: SymmetricChannel) -> SumRate:
    """AF-IAN with one user switched off for the whole transmission."""
    gamma = 2.0 * ch.p_s * ch.p_r / (ch.n_r * ch.p_r + 2.0 * ch.p_s * ch.n_s + ch.n_s * ch.n_r)
    return SumRate(capacity(gamma))


def _af_ian_slot_rate(ch: SymmetricChannel, p: float) -> float:
    """Sum rate of one AF-IAN slot where the two active users send ``p`` and ``3 P_S - p``."""
    ps, pr, ns, nr = ch.p_s, ch.p_r, ch.n_s, ch.n_r
    if not 0.0 <= p <= 3.0 * ps:
        raise ValueError("p must lie in [0, 3 P_S]")
    p_q, p_l = p, 3.0 * ps - p
    noise = pr * nr + (p_q + p_l + nr) * ns
    return (capacity(pr * p_q / noise) + capacity(pr * p_l / (pr * p_q + noise))) / 3.0


_RATE_FUNCS = {
    Scheme.OUTER_BOUND: outer_bound,
    Scheme.DF: df_rate,
    Scheme.NNC: nnc_rate,
    Scheme.AF_SND: af_snd_rate,
    Scheme.AF_IAN: af_ian_rate,
}


def sum_rate(scheme, ch: SymmetricChannel) -> SumRate:
    return _RATE_FUNCS[Scheme.parse(scheme)](ch)


def theorem1_holds(ch: SymmetricChannel, rtol: float = 1e-12) -> bool:
    """True when DF achieves the outer bound, i.e. the sum capacity is known.

    The condition is ``P_R/N_S <= (1 + 3 P_S/N_R)^(2/3) - 1``; ``rtol`` absorbs
    rounding at the boundary.
    """
    lhs = ch.p_r / ch.n_s
    rhs = (1.0 + 3.0 * ch.p_s / ch.n_r) ** (2.0 / 3.0) - 1.0
    return lhs <= rhs * (1.0 + rtol)


def theorem1_threshold_snr() -> float:
    """Completely symmetric SNR (linear) up to which DF is capacity achieving."""
    return 3.0 + 2.0 * math.sqrt(3.0)


# reference scheme and limiting gap of each scheme at high SNR
_GAP_REFERENCE = {
    Scheme.NNC: Scheme.OUTER_BOUND,
    Scheme.AF_SND: Scheme.OUTER_BOUND,
    Scheme.AF_IAN: Scheme.DF,
    Scheme.OUTER_BOUND: Scheme.OUTER_BOUND,
    Scheme.DF: Scheme.OUTER_BOUND,
}


def gap_reference(scheme) -> Scheme:
    """Scheme against which :func:`high_snr_gap` measures ``scheme``."""
    return _GAP_REFERENCE[Scheme.parse(scheme)]


def high_snr_gap(scheme, s: float) -> float:
    """Rate gap in bits to the reference scheme on the completely symmetric channel.

    NNC and AF-SND are compared with the outer bound, AF-IAN with DF (both have
    one degree of freedom), DF with the outer bound.
    """
    scheme = Scheme.parse(scheme)
    ch = SymmetricChannel.completely_symmetric(s)
    return sum_rate(gap_reference(scheme), ch).value - sum_rate(scheme, ch).value


def gap_limit(scheme) -> float:
    """Limit of :func:`high_snr_gap` as the SNR grows without bound."""
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.NNC:
        return 1.5 * math.log2(1.5)
    if scheme is Scheme.AF_SND:
        return 1.5
    if scheme is Scheme.AF_IAN:
        return 2.0
    if scheme is Scheme.OUTER_BOUND:
        return 0.0
    if scheme is Scheme.DF:
        return math.inf
    raise UnsupportedScheme(str(scheme))


def _df_minus_nnc_db(x_db: float) -> float:
    ch = SymmetricChannel.completely_symmetric(snr_db_to_linear(x_db))
    return df_rate(ch).value - nnc_rate(ch).value


def df_nnc_crossing_db(lo_db: float = 8.1, hi_db: float = 30.0, xtol: float = 1e-10) -> float:
    """SNR in dB where DF and NNC give the same sum rate (completely symmetric channel)."""
    f_lo, f_hi = _df_minus_nnc_db(lo_db), _df_minus_nnc_db(hi_db)
    if f_lo * f_hi > 0:
        raise ValueError(f"DF - NNC has no sign change on [{lo_db}, {hi_db}] dB")
    return optimize.bisect(_df_minus_nnc_db, lo_db, hi_db, xtol=xtol)


def df_capacity_threshold_db(lo_db: float = 0.0, hi_db: float = 20.0, xtol: float = 1e-6,
                             atol: float = 1e-12) -> float:
    """Largest completely symmetric SNR (dB) at which DF meets the outer bound.

    Found by bisection on ``outer_bound - df_rate <= atol``, independently of
    the closed-form threshold.
    """
    def meets(x_db):
        ch = SymmetricChannel.completely_symmetric(snr_db_to_linear(x_db))
        return outer_bound(ch).value - df_rate(ch).value <= atol

    if not meets(lo_db) or meets(hi_db):
        raise ValueError("bracket does not straddle the DF capacity threshold")
    while hi_db - lo_db > xtol:
        mid = 0.5 * (lo_db + hi_db)
        if meets(mid):
            lo_db = mid
        else:
            hi_db = mid
    return 0.5 * (lo_db + hi_db)
