"""Shared channel types, scheme identifiers and unit helpers.

All powers are linear watts and all rates are bit/s/Hz (base-2 logarithms).
Decibels only appear at the command-line boundary.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class MwrcError(Exception):
    """Base class for errors raised by this package."""


class NonConvergenceError(MwrcError, RuntimeError):
    """An iterative solver hit its iteration or vertex budget."""


class InnerSolverFailure(MwrcError, RuntimeError):
    """A subproblem solver passed to a driver failed."""


class BracketFailure(MwrcError, ValueError):
    """No sign change was found while bracketing a root."""


class DegenerateRegion(MwrcError, ValueError):
    """A rate region has no feasible vertex."""


class UnsupportedScheme(MwrcError, ValueError):
    """The requested relaying scheme is not valid for this operation."""


class Scheme(str, enum.Enum):
    OUTER_BOUND = "OuterBound"
    DF = "DF"
    NNC = "NNC"
    AF_SND = "AfSnd"
    AF_IAN = "AfIan"

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key or member.name.replace("_", "").lower() == key:
                return member
        raise UnsupportedScheme(f"unknown scheme {value!r}")

    def __str__(self) -> str:
        return self.value


#: schemes whose sum rate is a minimum of an uplink and a downlink term
MIN_FORM_SCHEMES = (Scheme.OUTER_BOUND, Scheme.DF)
#: schemes whose sum rate is alpha * C(P_S P_R / (a P_S + b P_R + c))
PRODUCT_FORM_SCHEMES = (Scheme.AF_SND, Scheme.AF_IAN, Scheme.NNC)
ALL_SCHEMES = (Scheme.OUTER_BOUND, Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN, Scheme.DF)


def capacity(x):
    """Gaussian capacity ``log2(1 + x)``, accurate for small ``x``."""
    if isinstance(x, np.ndarray):
        return np.log1p(x) / math.log(2.0)
    return math.log1p(x) / math.log(2.0)


def snr_db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    if isinstance(x, np.ndarray):
        return 10.0 * np.log10(x)
    return 10.0 * math.log10(x)


def _check_finite_nonneg(name, value):
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class SymmetricChannel:
    """Symmetric 3-user relay channel: common user power, relay power and noises."""

    p_s: float
    p_r: float
    n_s: float = 1.0
    n_r: float = 1.0

    def __post_init__(self):
        for name in ("p_s", "p_r", "n_s", "n_r"):
            _check_finite_nonneg(name, getattr(self, name))
        if self.n_s <= 0 or self.n_r <= 0:
            raise ValueError("noise powers must be strictly positive")

    @classmethod
    def completely_symmetric(cls, snr: float, noise: float = 1.0) -> "SymmetricChannel":
        """Channel with ``P_S = P_R = snr * noise`` and ``N_S = N_R = noise``."""
        p = snr * noise
        return cls(p, p, noise, noise)

    def is_completely_symmetric(self, rtol: float = 1e-12) -> bool:
        return math.isclose(self.p_s / self.n_r, self.p_r / self.n_s, rel_tol=rtol, abs_tol=0.0)

    def snr(self) -> float:
        """Common SNR ``P_S/N_R == P_R/N_S``; only defined when both ratios agree."""
        if not self.is_completely_symmetric():
            raise ValueError("snr() needs p_s/n_r == p_r/n_s")
        return self.p_s / self.n_r


@dataclass(frozen=True)
class PowerLimits:
    p_s_max: float
    p_r_max: float

    def __post_init__(self):
        for name in ("p_s_max", "p_r_max"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def symmetric(cls, p_max: float) -> "PowerLimits":
        return cls(p_max, p_max)
