"""Global energy efficiency (GEE) objectives and individual utilities.

Two functional families cover all schemes:

* ``min``-form (outer bound, DF)::

      min{a1 C(alpha1 P_R/N_S), a2 C(alpha2 P_S/N_R)} / (phi P_S + psi P_R + P_c)

* product form (AF-SND, AF-IAN, NNC)::

      alpha C(P_S P_R / (a P_S + b P_R + c)) / (phi P_S + psi P_R + P_c)

GEE is returned per Hz of bandwidth (bit/J/Hz); multiply by the bandwidth for bit/J.
The numerator helpers accept numpy arrays so the grid oracle can vectorise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    MIN_FORM_SCHEMES,
    PRODUCT_FORM_SCHEMES,
    PowerLimits,
    Scheme,
    UnsupportedScheme,
    capacity,
)


def _positive(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"{name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class Gee1Params:
    a1: float
    alpha1: float
    a2: float
    alpha2: float

    def __post_init__(self):
        _positive(self, ("a1", "alpha1", "a2", "alpha2"))


@dataclass(frozen=True)
class Gee2Params:
    alpha: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        _positive(self, ("alpha", "a", "b", "c"))

    def d(self) -> float:
        return self.c / (self.a * self.b)


RateParams = Union[Gee1Params, Gee2Params]


@dataclass(frozen=True)
class PowerCost:
    """Amplifier inefficiencies and circuit powers.

    ``phi`` covers the amplifiers of all three users (so ``phi >= 3``).
    ``p_c`` is the total circuit power entering the GEE denominator, while
    ``p_c_s`` and ``p_c_r`` are the circuit powers seen by the sources and the
    relay in the competitive utilities.
    """

    phi: float = 3.0
    psi: float = 1.0
    p_c: float = 1.0
    p_c_s: float = 0.75
    p_c_r: float = 0.25

    def __post_init__(self):
        _positive(self, ("phi", "psi", "p_c", "p_c_s", "p_c_r"))
        if self.phi < 3.0:
            raise ValueError("phi accounts for three user amplifiers and must be >= 3")
        if self.psi < 1.0:
            raise ValueError("psi must be >= 1")

    def consumed(self, p_s, p_r):
        return self.phi * p_s + self.psi * p_r + self.p_c


@dataclass(frozen=True)
class PowerProfile:
    p_s: float
    p_r: float

    def __post_init__(self):
        if not (math.isfinite(self.p_s) and math.isfinite(self.p_r)) or self.p_s < 0 or self.p_r < 0:
            raise ValueError("powers must be finite and >= 0")

    def within(self, limits: PowerLimits, atol: float = 1e-12) -> bool:
        return self.p_s <= limits.p_s_max + atol and self.p_r <= limits.p_r_max + atol


_GEE1_TABLE = {
    Scheme.OUTER_BOUND: Gee1Params(a1=1.5, alpha1=1.0, a2=3.0, alpha2=1.0),
    Scheme.DF: Gee1Params(a1=1.5, alpha1=1.0, a2=1.0, alpha2=3.0),
}


def gee1_params_for(scheme) -> Gee1Params:
    scheme = Scheme.parse(scheme)
    if scheme not in _GEE1_TABLE:
        raise UnsupportedScheme(f"{scheme} has no min-form GEE parameterisation")
    return _GEE1_TABLE[scheme]


def gee2_params_for(scheme, n_s: float = 1.0, n_r: float = 1.0) -> Gee2Params:
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.AF_SND:
        return Gee2Params(alpha=1.5, a=1.5 * n_s, b=0.5 * n_r, c=0.5 * n_s * n_r)
    if scheme is Scheme.AF_IAN:
        return Gee2Params(alpha=1.0, a=n_s, b=n_r / 3.0, c=n_s * n_r / 3.0)
    if scheme is Scheme.NNC:
        return Gee2Params(alpha=1.5, a=n_s, b=0.5 * n_r, c=0.5 * n_s * n_r)
    raise UnsupportedScheme(f"{scheme} has no product-form GEE parameterisation")


def params_for(scheme, n_s: float = 1.0, n_r: float = 1.0) -> RateParams:
    scheme = Scheme.parse(scheme)
    if scheme in MIN_FORM_SCHEMES:
        return gee1_params_for(scheme)
    return gee2_params_for(scheme, n_s, n_r)


def gee1_numerator(params: Gee1Params, p_s, p_r, n_s: float = 1.0, n_r: float = 1.0):
    down = params.a1 * capacity(params.alpha1 * p_r / n_s)
    up = params.a2 * capacity(params.alpha2 * p_s / n_r)
    return np.minimum(down, up) if isinstance(down, np.ndarray) else min(down, up)


def product_snr(params: Gee2Params, p_s, p_r):
    """``P_S P_R / (a P_S + b P_R + c)``, increasing in both powers."""
    return p_s * p_r / (params.a * p_s + params.b * p_r + params.c)


def gee2_numerator(params: Gee2Params, p_s, p_r):
    return params.alpha * capacity(product_snr(params, p_s, p_r))


def numerator(params: RateParams, p_s, p_r, n_s: float = 1.0, n_r: float = 1.0):
    """Sum rate of either family at ``(p_s, p_r)``."""
    if isinstance(params, Gee1Params):
        return gee1_numerator(params, p_s, p_r, n_s, n_r)
    return gee2_numerator(params, p_s, p_r)


def gee_value(scheme, profile: PowerProfile, cost: PowerCost, n_s: float = 1.0,
              n_r: float = 1.0, params: RateParams | None = None) -> float:
    """GEE of ``scheme`` at ``profile``: sum rate over total consumed power."""
    if params is None:
        params = params_for(scheme, n_s, n_r)
    rate = numerator(params, profile.p_s, profile.p_r, n_s, n_r)
    if rate == 0:
        return 0.0
    return rate / cost.consumed(profile.p_s, profile.p_r)


def utilities(scheme, profile: PowerProfile, cost: PowerCost, n_s: float = 1.0,
              n_r: float = 1.0, params: RateParams | None = None) -> tuple[float, float]:
    """Individual energy efficiencies ``(u_S, u_R)`` of the sources and the relay."""
    if params is None:
        params = params_for(scheme, n_s, n_r)
    rate = numerator(params, profile.p_s, profile.p_r, n_s, n_r)
    return rate / (profile.p_s + cost.p_c_s), rate / (profile.p_r + cost.p_c_r)


def is_product_form(scheme) -> bool:
    return Scheme.parse(scheme) in PRODUCT_FORM_SCHEMES
