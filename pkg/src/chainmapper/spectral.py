"""Spectral densities of bosonic environments.

A spectral density J(w) >= 0 encodes the system-bath coupling weight per
frequency; the measure J(w) dw is what the chain mapping tridiagonalizes.
Frequencies are in cm^-1, temperatures in Kelvin, time in (cm^-1)^-1 with
hbar = 1.

Zero-temperature densities live on [0, hard_cutoff].  Finite temperature is
absorbed into the density itself (``thermalize``), which extends the support
to [-hard_cutoff, hard_cutoff] so that the mapped chain always starts from
its vacuum.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import NumericalError, ParameterError

__all__ = [
    "KB_CM_PER_K",
    "SpectralDensity",
    "Lorentzian",
    "Ohmic",
    "Tabulated",
    "inverse_temperature",
    "reorganization_tail_ratio",
    "choose_hard_cutoff",
]

# Boltzmann constant in cm^-1 per Kelvin; fixes beta = 1/(k_B T).
KB_CM_PER_K = 0.6950348


def inverse_temperature(temperature_K: float) -> float:
    """beta = 1/(k_B T) in (cm^-1)^-1; returns inf at T = 0."""
    if temperature_K < 0:
        raise ParameterError(f"temperature must be >= 0 K, got {temperature_K}")
    if temperature_K == 0:
        return math.inf
    return 1.0 / (KB_CM_PER_K * temperature_K)


def _x_coth_x(x):
    """x*coth(x), even and analytic at 0; x >= 0 elementwise."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-4
    safe = np.where(small, 1.0, x)
    out = safe / np.tanh(safe)
    # series keeps full precision where tanh would lose digits
    return np.where(small, 1.0 + x * x / 3.0, out)


class SpectralDensity:
    """Base class for parametrized spectral-density families.

    Subclasses implement the zero-temperature closed form through
    :meth:`bare` and :meth:`bare_over_omega`; evaluation at finite
    temperature, support handling and the thermal transform are shared.

    Parameters
    ----------
    hard_cutoff : float
        Upper support edge in cm^-1.  The density is treated as zero
        beyond it.
    temperature_K : float
        Environment temperature.  0 keeps the bare density on
        [0, hard_cutoff]; T > 0 selects the thermalized density
        J_T(w) = sign(w) J(|w|) [1 + coth(w/(2 k_B T))] / 2 on the
        doubled support.
    """

    def __init__(self, hard_cutoff: float, temperature_K: float = 0.0):
        if not hard_cutoff > 0:
            raise ParameterError(f"hard_cutoff must be > 0, got {hard_cutoff}")
        if temperature_K < 0:
            raise ParameterError(f"temperature must be >= 0 K, got {temperature_K}")
        self.hard_cutoff = float(hard_cutoff)
        self.temperature_K = float(temperature_K)

    # -- closed forms, no support clamp ------------------------------------

    def bare(self, omega):
        """J(w) at T = 0, evaluated from the family's closed form."""
        raise NotImplementedError

    def bare_over_omega(self, omega):
        """J(w)/w, kept finite at w = 0 where the family allows it."""
        raise NotImplementedError

    # -- generic evaluation -------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        if self.temperature_K == 0:
            return (0.0, self.hard_cutoff)
        return (-self.hard_cutoff, self.hard_cutoff)

    def __call__(self, omega):
        return self.evaluate(omega)

    def evaluate(self, omega):
        """J(w), or J_T(w) at finite temperature; zero outside the support."""
        w = np.asarray(omega, dtype=float)
        scalar = w.ndim == 0
        w = np.atleast_1d(w)
        lo, hi = self.support
        inside = (w >= lo) & (w <= hi)
        out = np.zeros_like(w)
        if self.temperature_K == 0:
            out[inside] = self.bare(w[inside])
        else:
            beta = inverse_temperature(self.temperature_K)
            ws = w[inside]
            aw = np.abs(ws)
            # sign(w) J(|w|)/2  +  (J(|w|)/|w|) * x coth(x) / beta,  x = beta|w|/2
            odd = 0.5 * np.sign(ws) * self.bare(aw)
            even = self.bare_over_omega(aw) * _x_coth_x(0.5 * beta * aw) / beta
            out[inside] = odd + even
        out = np.maximum(out, 0.0)  # clamp float noise
        return float(out[0]) if scalar else out

    def thermalize(self, temperature_K: float) -> "SpectralDensity":
        """Absorb a bath temperature into the density.

        Returns the same family with the temperature tag set, so that
        :meth:`evaluate` yields J_T(w) on [-hard_cutoff, hard_cutoff].
        T = 0 returns ``self`` unchanged.
        """
        if temperature_K < 0:
            raise ParameterError(f"temperature must be >= 0 K, got {temperature_K}")
        if self.temperature_K != 0:
            raise ParameterError("thermalize expects a zero-temperature density")
        if temperature_K == 0:
            return self
        return self._with_temperature(temperature_K)

    def _with_temperature(self, temperature_K):
        raise NotImplementedError

    # -- quadrature hints ----------------------------------------------------

    def frequency_scale(self) -> float:
        """Characteristic frequency used for cutoff grids and step sizes."""
        raise NotImplementedError

    def peaks(self) -> list[tuple[float, float]]:
        """(center, width) pairs of sharp features inside the support."""
        return []

    def origin_exponent(self) -> float | None:
        """p such that J ~ |w|^p near w = 0, when p is fractional.

        None means the density is piecewise analytic around 0 and plain
        panel splitting suffices.
        """
        return None

    def segment_points(self) -> list[float]:
        """Interior frequencies where the density is not smooth."""
        return []

    def describe(self) -> dict:
        """Parameter map used in metadata and serialized configs."""
        raise NotImplementedError


class Lorentzian(SpectralDensity):
    """Antisymmetrized Lorentzian line at ``center`` with half-width ``width``.

        J(w) = (coupling^2/pi) * 4*width*center*w
               / ([width^2 + (w+center)^2] [width^2 + (w-center)^2])

    For width << center this models a single damped mode: an oscillator at
    ``center`` leaking into the vacuum at rate ``width``.
    """

    def __init__(self, coupling, width, center, hard_cutoff=None,
                 temperature_K=0.0):
        if coupling < 0:
            raise ParameterError(f"coupling must be >= 0, got {coupling}")
        if not width > 0:
            raise ParameterError(f"width must be > 0, got {width}")
        if not center > 0:
            raise ParameterError(f"center must be > 0, got {center}")
        if hard_cutoff is None:
            hard_cutoff = 10.0 * center
        super().__init__(hard_cutoff, temperature_K)
        self.coupling = float(coupling)
        self.width = float(width)
        self.center = float(center)

    def bare_over_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        g, c = self.width, self.center
        denom = (g * g + (w + c) ** 2) * (g * g + (w - c) ** 2)
        return (self.coupling**2 / math.pi) * 4.0 * g * c / denom

    def bare(self, omega):
        w = np.asarray(omega, dtype=float)
        return w * self.bare_over_omega(w)

    def _with_temperature(self, temperature_K):
        return Lorentzian(self.coupling, self.width, self.center,
                          self.hard_cutoff, temperature_K)

    def frequency_scale(self):
        return self.center

    def peaks(self):
        pts = [(self.center, self.width)]
        if self.temperature_K > 0:
            pts.insert(0, (-self.center, self.width))
        lo, hi = self.support
        return [(c, w) for c, w in pts if lo < c < hi]

    def describe(self):
        return {
            "family": "lorentzian",
            "coupling": self.coupling,
            "width": self.width,
            "center": self.center,
            "hard_cutoff": self.hard_cutoff,
            "temperature_K": self.temperature_K,
        }


class Ohmic(SpectralDensity):
    """Ohmic family with exponential cutoff.

        J(w) = (coupling^2/pi) * w^s / (s! * cutoff^(s-1)) * exp(-w/cutoff)

    ``exponent`` s < 1 is sub-Ohmic, s = 1 Ohmic, s > 1 super-Ohmic;
    s! = Gamma(s+1) for fractional s.
    """

    def __init__(self, coupling, exponent, cutoff, hard_cutoff=None,
                 temperature_K=0.0):
        if coupling < 0:
            raise ParameterError(f"coupling must be >= 0, got {coupling}")
        if not exponent > 0:
            raise ParameterError(f"exponent must be > 0, got {exponent}")
        if not cutoff > 0:
            raise ParameterError(f"cutoff must be > 0, got {cutoff}")
        if hard_cutoff is None:
            hard_cutoff = 10.0 * cutoff
        super().__init__(hard_cutoff, temperature_K)
        self.coupling = float(coupling)
        self.exponent = float(exponent)
        self.cutoff = float(cutoff)
        self._norm = (self.coupling**2 / math.pi
                      / math.gamma(self.exponent + 1.0)
                      / self.cutoff ** (self.exponent - 1.0))

    def bare(self, omega):
        w = np.asarray(omega, dtype=float)
        return self._norm * w**self.exponent * np.exp(-w / self.cutoff)

    def bare_over_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        with np.errstate(divide="ignore"):
            power = w ** (self.exponent - 1.0)
        return self._norm * power * np.exp(-w / self.cutoff)

    def _with_temperature(self, temperature_K):
        return Ohmic(self.coupling, self.exponent, self.cutoff,
                     self.hard_cutoff, temperature_K)

    def frequency_scale(self):
        return self.cutoff

    def origin_exponent(self):
        s = self.exponent
        p = s if self.temperature_K == 0 else s - 1.0
        if float(p).is_integer():
            return None
        return p

    def describe(self):
        return {
            "family": "ohmic",
            "coupling": self.coupling,
            "exponent": self.exponent,
            "cutoff": self.cutoff,
            "hard_cutoff": self.hard_cutoff,
            "temperature_K": self.temperature_K,
        }


class Tabulated(SpectralDensity):
    """Density given on a grid of (frequency, value) samples.

    Evaluation interpolates piecewise linearly between samples and is zero
    outside the sampled range; this is the documented lower-accuracy path.
    """

    def __init__(self, frequencies, values, hard_cutoff=None,
                 temperature_K=0.0):
        freq = np.asarray(frequencies, dtype=float)
        vals = np.asarray(values, dtype=float)
        if freq.ndim != 1 or freq.size < 2 or freq.shape != vals.shape:
            raise ParameterError("need matching 1-d arrays with >= 2 samples")
        if np.any(np.diff(freq) <= 0):
            raise ParameterError("frequencies must be strictly increasing")
        if freq[0] < 0:
            raise ParameterError("tabulated grid must start at >= 0")
        if np.any(vals < -1e-12 * max(vals.max(initial=0.0), 1.0)):
            raise ParameterError("tabulated density has negative values")
        if hard_cutoff is None:
            hard_cutoff = float(freq[-1])
        if hard_cutoff > freq[-1]:
            raise ParameterError("hard_cutoff beyond the sampled range")
        super().__init__(hard_cutoff, temperature_K)
        self.frequencies = freq
        self.values = np.maximum(vals, 0.0)

    def bare(self, omega):
        w = np.asarray(omega, dtype=float)
        return np.interp(w, self.frequencies, self.values, left=0.0, right=0.0)

    def bare_over_omega(self, omega):
        w = np.asarray(omega, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.bare(w) / w
        if self.frequencies[0] == 0.0:
            # linear leading segment: J/w -> slope at the origin
            slope = ((self.values[1] - self.values[0])
                     / (self.frequencies[1] - self.frequencies[0]))
            limit = slope if self.values[0] == 0.0 else math.inf
            ratio = np.where(np.asarray(w) == 0.0, limit, ratio)
        return ratio

    def _with_temperature(self, temperature_K):
        return Tabulated(self.frequencies, self.values, self.hard_cutoff,
                         temperature_K)

    def frequency_scale(self):
        return float(self.frequencies[-1])

    def segment_points(self):
        lo, hi = self.support
        pts = [float(w) for w in self.frequencies if lo < w < hi]
        if self.temperature_K > 0:
            pts = [-p for p in reversed(pts) if -p > lo] + pts
        return pts

    def describe(self):
        return {
            "family": "tabulated",
            "frequencies": self.frequencies.tolist(),
            "values": self.values.tolist(),
            "hard_cutoff": self.hard_cutoff,
            "temperature_K": self.temperature_K,
        }


# -- hard-cutoff selection ----------------------------------------------------


def _quad(f, a, b, points=None):
    kwargs = {"epsabs": 0.0, "epsrel": 1e-12, "limit": 400, "full_output": 1}
    if points is not None and np.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kwargs["points"] = pts
    res = integrate.quad(f, a, b, **kwargs)
    if len(res) > 3:
        raise NumericalError(
            f"quadrature failed on [{a}, {b}]: {res[3]} (value {res[0]:.3e}, "
            f"error estimate {res[1]:.3e})")
    return res[0]


def reorganization_tail_ratio(sd: SpectralDensity, omega_hc: float) -> float:
    """Fraction of the reorganization energy ignored beyond ``omega_hc``.

    Computes int_{omega_hc}^inf J/w dw divided by int_0^inf J/w dw by
    adaptive quadrature on the family's nominal (uncut, T = 0) form.
    """
    if not omega_hc > 0:
        raise ParameterError(f"omega_hc must be > 0, got {omega_hc}")
    f = sd.bare_over_omega
    pts = [c for c, _ in sd.peaks() if c > 0]
    scale = sd.frequency_scale()
    if isinstance(sd, Tabulated):
        top = float(sd.frequencies[-1])
        total = _quad(f, 0.0, top, points=sd.segment_points())
        tail = 0.0 if omega_hc >= top else _quad(
            f, omega_hc, top, points=sd.segment_points())
    else:
        split = max(40.0 * scale, 2.0 * omega_hc)
        total = _quad(f, 0.0, split, points=pts) + _quad(f, split, math.inf)
        if omega_hc >= split:
            tail = _quad(f, omega_hc, math.inf)
        else:
            tail = _quad(f, omega_hc, split, points=pts) + _quad(f, split, math.inf)
    if total <= 0:
        raise NumericalError("total reorganization integral is not positive")
    return tail / total


def choose_hard_cutoff(sd: SpectralDensity, tol: float) -> float:
    """Smallest cutoff on a geometric grid meeting the tail criterion.

    Scans omega_hc = 2^k * frequency_scale, k = 0, 1, ..., and returns the
    first value whose neglected relative reorganization energy is <= tol.
    """
    if not 0 < tol <= 1:
        raise ParameterError(f"tol must be in (0, 1], got {tol}")
    scale = sd.frequency_scale()
    for k in range(49):
        cutoff = scale * 2.0**k
        if reorganization_tail_ratio(sd, cutoff) <= tol:
            return cutoff
    raise NumericalError("tail criterion not met for any cutoff on the grid")
