"""Circuit power and link budget of a 200 GHz board-to-board link.

Each scheme gets its own circuit power depending on how many messages the
users and the relay have to decode.  The link budget turns transmit powers
in watts into received SNRs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import PowerLimits, Scheme, UnsupportedScheme, snr_db_to_linear
from .gee import PowerCost

BOLTZMANN = 1.380649e-23  # J/K

# RF component figures behind the frontend powers (W); kept for reference only
MIXER_W = 0.017
LO_DRIVER_W = 0.024
LNA_W = 0.018
ADC_W = 0.406  # per converter, two per receiver
DAC_W = 0.400  # per converter, two per transmitter


@dataclass(frozen=True)
class ComponentPowers:
    p_rx: float
    p_adc: float
    p_dec: float
    p_dac: float
    p_tx: float
    eta: float

    def __post_init__(self):
        for name in ("p_rx", "p_adc", "p_dec", "p_dac", "p_tx"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")

    @property
    def p_c_analog(self) -> float:
        return self.p_rx + self.p_adc + self.p_dac + self.p_tx


def default_component_powers() -> ComponentPowers:
    return ComponentPowers(p_rx=0.346, p_adc=0.812, p_dec=0.300, p_dac=0.800, p_tx=0.058, eta=0.062)


def scheme_power_profile(scheme, cp: ComponentPowers | None = None,
                         pessimistic_nnc: bool = False) -> PowerCost:
    """Amplifier factors and circuit powers of ``scheme`` on the board-to-board hardware.

    ``p_c_s`` is the circuit power of one user; ``p_c = 3 p_c_s + p_c_r``.
    ``pessimistic_nnc`` charges NNC one extra decoder per user and four at the
    relay.
    """
    scheme = Scheme.parse(scheme)
    cp = cp or default_component_powers()
    analog, dec = cp.p_c_analog, cp.p_dec
    af_relay = cp.p_rx + cp.p_tx  # amplifies in the analog domain
    if scheme is Scheme.DF:
        p_c_s, p_c_r = analog + 2 * dec, analog + 3 * dec
    elif scheme is Scheme.AF_IAN:
        p_c_s, p_c_r = analog + dec, af_relay
    elif scheme is Scheme.AF_SND:
        p_c_s, p_c_r = analog + 2 * dec, af_relay
    elif scheme is Scheme.NNC:
        if pessimistic_nnc:
            p_c_s, p_c_r = analog + 3 * dec, analog + 4 * dec
        else:
            p_c_s, p_c_r = analog + 2 * dec, analog + 0.1 * dec
    else:
        raise UnsupportedScheme(f"{scheme} has no hardware power model")
    return PowerCost(phi=3.0 / cp.eta, psi=1.0 / cp.eta, p_c=3 * p_c_s + p_c_r,
                     p_c_s=p_c_s, p_c_r=p_c_r)


@dataclass(frozen=True)
class LinkBudget:
    gain_db: float = -65.8
    bandwidth_hz: float = 25e9
    temperature_k: float = 290.0

    def __post_init__(self):
        if not math.isfinite(self.gain_db):
            raise ValueError("gain_db must be finite")
        if not self.bandwidth_hz > 0 or not self.temperature_k > 0:
            raise ValueError("bandwidth and temperature must be > 0")

    @property
    def gain(self) -> float:
        return snr_db_to_linear(self.gain_db)

    def noise_power(self) -> float:
        """Thermal noise ``k_B T B`` in watts."""
        return BOLTZMANN * self.temperature_k * self.bandwidth_hz

    def effective_noise(self) -> float:
        """Noise referred to the transmitter: the ``N`` to use with unit-gain rate formulas."""
        return self.noise_power() / self.gain

    def limits_for_snr_db(self, snr_db: float) -> PowerLimits:
        """Common transmit power cap that yields received SNR ``snr_db`` at full power."""
        return PowerLimits.symmetric(snr_db_to_linear(snr_db) * self.effective_noise())


def effective_channel(lb: LinkBudget, p_tx_w: float) -> float:
    """Received SNR (linear) for transmit power ``p_tx_w``."""
    return p_tx_w * lb.gain / lb.noise_power()


def thermal_noise(temperature_k: float, bandwidth_hz: float) -> float:
    return BOLTZMANN * temperature_k * bandwidth_hz
