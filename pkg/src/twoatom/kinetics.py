"""Closed-form emission-count and detection-density curves.

With n0 molecules photodissociated at t = 0, the expected numbers of first
and second photons recorded up to time t are

    N_f(t) = n0 (1 - exp(-G_f t))
    N_s(t) = N_f(t) - n0 * G_f / (G_s - G_f) * (exp(-G_f t) - exp(-G_s t))

while each detector accumulates N_i(t) = n0 (1 - exp(-G t)) with G the
single-atom rate.  All three are compatible exactly when G_f = 2 G and
G_s = G.  The G_s -> G_f limit of N_s is removable; below a relative rate
difference of `DEGENERATE_SWITCH` the analytic limit

    N_s(t) = n0 (1 - exp(-G t) - G t exp(-G t))

is used instead.  Differences of exponentials are evaluated through expm1
so the near-degenerate regime stays accurate to machine precision.

The coincidence density is the distribution of the detector time
difference t1 - t2 under random equiprobable assignment of the two photons:
the signed second-emission delay, i.e. (G_s / 2) exp(-G_s |tau|).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

#: relative rate difference below which the degenerate N_s limit is used
DEGENERATE_SWITCH = 1e-9


@dataclass(frozen=True)
class RateTriple:
    """Single-atom, first-emission and second-emission rates (inverse time)."""

    gamma: float
    gamma_f: float
    gamma_s: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.gamma_f > 0 and self.gamma_s > 0):
            raise InvalidParameterError("all rates must be strictly positive")

    @classmethod
    def compatible(cls, gamma: float) -> "RateTriple":
        """The compatibility point: first rate 2*gamma, second rate gamma."""
        return cls(gamma=gamma, gamma_f=2.0 * gamma, gamma_s=gamma)


@dataclass(frozen=True)
class CountSnapshot:
    """Expected cumulative counts at one time."""

    t: float
    n_first: float
    n_second: float
    n_total: float
    n_per_detector: float


def _validate_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameterError("t must be nonnegative")
    return t


def second_count_fraction(t, gamma_f: float, gamma_s: float):
    """N_s(t) / n0, handling the removable G_s = G_f singularity."""
    t = np.asarray(t, dtype=float)
    if abs(gamma_s - gamma_f) / gamma_f < DEGENERATE_SWITCH:
        g = gamma_f
        return -np.expm1(-g * t) - g * t * np.exp(-g * t)
    delta = gamma_s - gamma_f
    # exp(-G_f t) - exp(-G_s t) = -exp(-G_f t) * expm1(-(G_s - G_f) t)
    diff = -np.exp(-gamma_f * t) * np.expm1(-delta * t)
    return -np.expm1(-gamma_f * t) - gamma_f / delta * diff


def cumulative_counts(t: float, rates: RateTriple, n0: float) -> CountSnapshot:
    """Expected first / second / total / per-detector counts up to time t."""
    if n0 <= 0:
        raise InvalidParameterError("n0 must be positive")
    t = float(t)
    if t < 0:
        raise InvalidParameterError("t must be nonnegative")
    n_f = n0 * -np.expm1(-rates.gamma_f * t)
    n_s = n0 * float(second_count_fraction(t, rates.gamma_f, rates.gamma_s))
    n = n_f + n_s
    return CountSnapshot(
        t=t,
        n_first=float(n_f),
        n_second=n_s,
        n_total=float(n),
        n_per_detector=float(n) / 2.0,
    )


def detection_densities(t, rates: RateTriple):
    """Normalized detection densities (n_f, n_s, n_i) at time(s) t.

    n_f = G_f exp(-G_f t); n_s is the exact derivative of N_s / n0;
    n_i = G exp(-G t).  Vectorized over t.
    """
    tt = _validate_times(t)
    n_f = rates.gamma_f * np.exp(-rates.gamma_f * tt)
    if abs(rates.gamma_s - rates.gamma_f) / rates.gamma_f < DEGENERATE_SWITCH:
        g = rates.gamma_f
        n_s = g * g * tt * np.exp(-g * tt)
    else:
        delta = rates.gamma_s - rates.gamma_f
        diff = -np.exp(-rates.gamma_f * tt) * np.expm1(-delta * tt)
        n_s = rates.gamma_f * rates.gamma_s / delta * diff
    n_i = rates.gamma * np.exp(-rates.gamma * tt)
    return n_f, n_s, n_i


def coincidence_density(tau, rates: RateTriple):
    """Density of the detector time difference t1 - t2 (two-sided exponential)."""
    tau = np.asarray(tau, dtype=float)
    return 0.5 * rates.gamma_s * np.exp(-rates.gamma_s * np.abs(tau))


def tabulate_densities(rates: RateTriple, t) -> np.ndarray:
    """Stacked table with columns (t, n_f, n_s, n_i) for CSV emission."""
    tt = _validate_times(t)
    n_f, n_s, n_i = detection_densities(tt, rates)
    return np.column_stack([tt, n_f, n_s, n_i])
