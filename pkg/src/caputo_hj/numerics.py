"""Special functions and power-series helpers.

Gamma is evaluated with the Lanczos approximation (g = 7, nine coefficients).
Power series in the variable ``z = t**alpha`` are stored with a power-of-two
scale so that series with a small radius of convergence (whose raw
coefficients overflow a double after a few hundred terms) remain
representable: the true n-th coefficient is ``coefficients[n] * scale**n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "PowerSeries",
    "gamma",
    "lgamma",
    "series_eval",
    "radius_estimate",
]

GAMMA_MAX_ARG = 171.0

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the domain of a special function or operator."""


def _lanczos_sum(z: float) -> float:
    # z = x - 1
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    return acc


def _check_arg(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma argument must be positive and finite, got {x!r}")
    return x


def gamma(x: float) -> float:
    """Gamma function for ``0 < x <= 171``.

    Positive integers return the exact factorial. Arguments below 1/2 go
    through the reflection formula.
    """
    x = _check_arg(x)
    if x > GAMMA_MAX_ARG:
        raise DomainError(f"gamma({x}) overflows a double")
    if x == int(x):
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # split t**(z + 1/2) so the intermediate does not overflow near x = 171
    half = t ** (0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_sum(z)


def lgamma(x: float) -> float:
    """Natural log of Gamma for any positive finite ``x`` (no overflow cap)."""
    x = _check_arg(x)
    if x == int(x) and x <= GAMMA_MAX_ARG:
        return math.log(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def gamma_ratio(a: float, b: float) -> float:
    """``Gamma(a) / Gamma(b)``, through log-gamma once either factor overflows."""
    if a <= GAMMA_MAX_ARG and b <= GAMMA_MAX_ARG:
        return gamma(a) / gamma(b)
    return math.exp(lgamma(a) - lgamma(b))


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series ``sum_n coefficients[n] * (scale * t**alpha)**n``.

    ``coefficients[0]`` is the value at ``t = 0``. ``scale`` is a power of two
    so that rescaling is exact; with ``scale == 1`` the stored coefficients
    are the true ones.
    """

    coefficients: tuple[float, ...]
    alpha: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if len(self.coefficients) == 0:
            raise ValueError("a power series needs at least one coefficient")
        if not self.alpha > 0:
            raise ValueError(f"exponent step must be positive, got {self.alpha}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def __len__(self) -> int:
        return len(self.coefficients)

    def coefficient(self, n: int) -> float:
        """True n-th coefficient; may be ``inf`` when it overflows."""
        with np.errstate(over="ignore"):
            return float(self.coefficients[n] * np.float64(self.scale) ** n)

    def combine(self, a: float, other: PowerSeries, b: float) -> PowerSeries:
        """Return ``a * self + b * other`` (same alpha and scale required)."""
        if other.alpha != self.alpha or other.scale != self.scale:
            raise ValueError("series must share alpha and scale")
        n = max(len(self), len(other))
        c1 = np.zeros(n)
        c2 = np.zeros(n)
        c1[: len(self)] = self.coefficients
        c2[: len(other)] = other.coefficients
        return PowerSeries(tuple(a * c1 + b * c2), self.alpha, self.scale)


def series_eval(s: PowerSeries, t, n_terms: int | None = None):
    """Partial sum of the first ``n_terms`` terms at ``t >= 0`` (scalar or array)."""
    if n_terms is None:
        n_terms = len(s)
    if n_terms < 1 or n_terms > len(s):
        raise ValueError(f"n_terms must be in [1, {len(s)}], got {n_terms}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("series_eval needs t >= 0")
    w = s.scale * t_arr**s.alpha
    acc = np.full_like(w, s.coefficients[n_terms - 1])
    for c in reversed(s.coefficients[: n_terms - 1]):
        acc = acc * w + c
    return float(acc) if acc.ndim == 0 else acc


def radius_estimate(s: PowerSeries, window: int) -> float:
    """Estimate the convergence boundary of the series in the ``t`` variable.

    Uses a sliding-window ratio test on the trailing ``window`` coefficients:
    the magnitude ratios ``|f_n / f_{n-1}|`` are fitted linearly against
    ``1/n`` and the intercept extrapolates the limit ``1/R`` in
    ``z = t**alpha``. Returns ``inf`` for terminating series and for
    coefficients decaying faster than any geometric sequence.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    c = np.abs(np.asarray(s.coefficients, dtype=float))
    if len(c) < 2 * window:
        raise ValueError(f"need at least {2 * window} coefficients, got {len(c)}")
    if not np.any(c[1:]):
        if c[0] == 0:
            raise DomainError("cannot estimate the radius of the zero series")
        return math.inf
    tail = c[-(window + 1):]
    if not np.all(tail):
        if np.any(c[len(c) - 2 * window:]):
            raise DomainError("trailing coefficients contain zeros; ratio test undefined")
        # terminating polynomial
        return math.inf
    n = np.arange(len(c) - window, len(c), dtype=float)
    ratios = tail[1:] / tail[:-1]
    slope, intercept = np.polyfit(1.0 / n, ratios, 1)
    # super-geometric decay: ratios tend to zero
    if intercept <= 1e-3 * ratios.max() or ratios[-1] < 1e-12:
        return math.inf
    radius_z = 1.0 / (intercept * s.scale)
    return radius_z ** (1.0 / s.alpha)
