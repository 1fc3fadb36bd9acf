"""Far-field ULA physics: array response, Fraunhofer range, THz channel gain, rate.

The array has half-wavelength spacing, so the phase progression per element is
pi * sin(angle) and every direction maps to a point of the sine-space domain
[-1, 1]. Free-space spreading and molecular absorption set the channel gain;
the absorption coefficient is a configuration scalar rather than a value
computed from atmospheric conditions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class FarFieldWarning(UserWarning):
    """Raised (as a warning) when a link distance is inside the Fraunhofer range."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0.0:
        raise ValueError(f"power must be positive, got {watt!r}")
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array with half-wavelength element spacing.

    Parameters
    ----------
    n_antennas : number of elements (>= 2)
    carrier_freq : carrier frequency in Hz
    """

    n_antennas: int
    carrier_freq: float

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 2:
            raise ValueError(f"need an integer antenna count >= 2, got {self.n_antennas!r}")
        if not (math.isfinite(self.carrier_freq) and self.carrier_freq > 0.0):
            raise ValueError(f"carrier frequency must be positive, got {self.carrier_freq!r}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0


@dataclass(frozen=True)
class LinkBudget:
    """Link-level power quantities, all in linear SI units.

    tx_power in W, noise_psd in W/Hz, bandwidth in Hz, absorption_coeff in 1/m.
    Use :meth:`from_db` for the dBm / dBm-per-Hz form used in configuration.
    """

    tx_power: float
    noise_psd: float
    bandwidth: float
    absorption_coeff: float = 0.0

    def __post_init__(self):
        for name in ("tx_power", "noise_psd", "bandwidth"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not (math.isfinite(self.absorption_coeff) and self.absorption_coeff >= 0.0):
            raise ValueError(f"absorption_coeff must be >= 0, got {self.absorption_coeff!r}")

    @classmethod
    def from_db(
        cls,
        tx_power_dbm: float,
        noise_psd_dbmhz: float,
        bandwidth_hz: float,
        absorption_coeff_per_m: float = 0.0,
    ) -> "LinkBudget":
        return cls(
            tx_power=dbm_to_watt(tx_power_dbm),
            noise_psd=dbm_to_watt(noise_psd_dbmhz),
            bandwidth=bandwidth_hz,
            absorption_coeff=absorption_coeff_per_m,
        )


def array_response(sin_dir: float, cfg: ArrayConfig) -> np.ndarray:
    """Array response vector for a direction given as sin(angle).

    Element n (0-based) is exp(-j * n * pi * sin_dir); every element has unit
    modulus and element 0 is exactly 1.
    """
    if not -1.0 <= sin_dir <= 1.0:
        raise ValueError(f"sine direction must lie in [-1, 1], got {sin_dir!r}")
    n = np.arange(cfg.n_antennas)
    return np.exp(-1j * np.pi * sin_dir * n)


def response_matrix(sin_dirs: np.ndarray, cfg: ArrayConfig) -> np.ndarray:
    """Stack of array response vectors, one row per direction."""
    s = np.asarray(sin_dirs, dtype=float)
    if np.any(np.abs(s) > 1.0):
        raise ValueError("sine directions must lie in [-1, 1]")
    n = np.arange(cfg.n_antennas)
    return np.exp(-1j * np.pi * np.outer(s, n))


def fraunhofer_distance(cfg: ArrayConfig) -> float:
    """Far-field boundary 2*A^2/lambda of the array aperture A = (N-1)*lambda/2."""
    return (cfg.n_antennas - 1) ** 2 * cfg.wavelength / 2.0


def channel_gain(distance, budget: LinkBudget, cfg: ArrayConfig):
    """Amplitude channel gain: free-space spreading times molecular absorption.

    gain = c / (4 * pi * d * f_c) * exp(-K * d / 2)

    Accepts a scalar or an array of distances. Emits FarFieldWarning when any
    distance falls inside the Fraunhofer range, where the planar-wave model is
    not strictly valid.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("distance must be positive")
    if np.any(d < fraunhofer_distance(cfg)):
        warnings.warn(
            "link distance inside the Fraunhofer range; far-field model inaccurate",
            FarFieldWarning,
            stacklevel=2,
        )
    gain = SPEED_OF_LIGHT / (4.0 * np.pi * d * cfg.carrier_freq)
    gain = gain * np.exp(-0.5 * budget.absorption_coeff * d)
    return float(gain) if np.isscalar(distance) else gain


def achievable_rate(bf_gain, distance, budget: LinkBudget, cfg: ArrayConfig):
    """Shannon rate in bit/s for a given beamforming gain and link distance.

    rate = B * log2(1 + P_t * h0^2 * bf_gain / (N_0 * B))

    Vectorises over matching arrays of gains and distances.
    """
    g = np.asarray(bf_gain, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("beamforming gain must be non-negative")
    h0 = np.asarray(channel_gain(distance, budget, cfg))
    snr = budget.tx_power * h0 * h0 * g / (budget.noise_psd * budget.bandwidth)
    rate = budget.bandwidth * np.log2(1.0 + snr)
    return float(rate) if (np.isscalar(bf_gain) and np.isscalar(distance)) else rate
