"""Circular model for wrapped phase increments.

A phase walk observed after time t, wrapped to (-pi, pi], concentrates
near 0 for t much shorter than the coherence time and flattens toward
uniform for t much longer.  The family used to describe this is the von
Mises distribution

    p(theta) = exp(kappa * cos(theta - mu)) / (2 * pi * I0(kappa))

with concentration kappa = tau_bar / t, the inverse of the variance
ratio t / tau_bar.  kappa = 0 is exactly uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "VonMisesModel",
    "FitResult",
    "UnboundedKappaError",
    "InsufficientDataError",
    "bessel_i0",
    "pdf",
    "discretized_probs",
    "max_uniform_deviation",
    "fit_vonmises",
    "sample",
]

_TWO_PI = 2.0 * math.pi

# bisection bracket for the concentration solver; I1/I0 at the upper end
# is 0.9995, far beyond any regime this model is used in
_KAPPA_MAX = 1000.0


class UnboundedKappaError(ValueError):
    """Mean resultant length so close to 1 that kappa diverges."""


class InsufficientDataError(ValueError):
    """Too few samples to fit a concentration."""


@dataclass(frozen=True)
class VonMisesModel:
    """Concentration and location of a von Mises distribution.

    The location is fixed at 0 in this package: increments of a detrended
    phase walk are symmetric about zero.
    """

    kappa: float
    mu: float = 0.0

    def __post_init__(self) -> None:
        if not self.kappa >= 0 or math.isinf(self.kappa):
            raise ValueError(f"kappa must be finite and >= 0, got {self.kappa!r}")

    @property
    def variance_ratio(self) -> float:
        """The variance parameter t / tau_bar = 1 / kappa (inf at kappa 0)."""
        return math.inf if self.kappa == 0 else 1.0 / self.kappa


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Parameters
    ----------
    x : float or array_like
        Argument; I0 is even, so the absolute value is used.

    Returns
    -------
    float or ndarray
        I0(x), relative error below 1e-12 on [0, 700].

    Raises
    ------
    OverflowError
        When the result exceeds the double range (|x| beyond ~713).
    """
    result = special.i0(np.abs(x))
    if np.any(np.isinf(result)):
        raise OverflowError(f"bessel_i0 overflows double precision at x = {x!r}")
    return float(result) if np.ndim(x) == 0 else result


def pdf(theta, model: VonMisesModel | float):
    """von Mises density at wrapped angles.

    Parameters
    ----------
    theta : float or array_like
        Angles in radians (any real value; the density is 2*pi periodic).
    model : VonMisesModel or float
        Model, or the concentration kappa directly (location 0).

    Returns
    -------
    float or ndarray
        exp(kappa*cos(theta - mu)) / (2*pi*I0(kappa)), evaluated in
        exponentially scaled form so any kappa representable in a double
        is safe.
    """
    if not isinstance(model, VonMisesModel):
        model = VonMisesModel(float(model))
    theta = np.asarray(theta, dtype=np.float64)
    # exp(k cos) / I0(k) == exp(k (cos - 1)) / (exp(-k) I0(k)), overflow free
    scaled = np.exp(model.kappa * (np.cos(theta - model.mu) - 1.0))
    out = scaled / (_TWO_PI * special.i0e(model.kappa))
    return float(out) if out.ndim == 0 else out


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    """Adaptive Simpson quadrature with absolute tolerance tol."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fb, m, fm, whole, tol, depth=48)

def _simpson_step(f, a, b, fa, fb, m, fm, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_step(f, a, m, fa, fm, lm, flm, left, half, depth - 1) + _simpson_step(
        f, m, b, fm, fb, rm, frm, right, half, depth - 1
    )


def discretized_probs(kappa: float, bits_per_sample: int) -> np.ndarray:
    """Probability mass of each of the 2**k uniform phase bins.

    Bin i covers (-pi + i*delta, -pi + (i+1)*delta], delta = 2*pi/2**k,
    matching the pipeline's discretize.  Each bin is integrated by
    adaptive Simpson quadrature to an absolute tolerance of 1e-12.

    Parameters
    ----------
    kappa : float
        Concentration, >= 0.
    bits_per_sample : int
        Bin count exponent k, 1..16.

    Returns
    -------
    ndarray
        2**k probabilities; sums to 1 within quadrature tolerance and is
        symmetric about theta = 0 (p[i] == p[2**k - 1 - i]).
    """
    if not 1 <= bits_per_sample <= 16:
        raise ValueError(f"bits_per_sample must be in [1, 16], got {bits_per_sample}")
    model = VonMisesModel(float(kappa))
    if model.kappa == 0.0:
        n = 1 << bits_per_sample
        return np.full(n, 1.0 / n)
    n = 1 << bits_per_sample
    edges = -math.pi + _TWO_PI * np.arange(n + 1) / n
    k = model.kappa
    norm = _TWO_PI * special.i0e(k)  # hoisted: the quadrature calls f per point

    def f(t: float) -> float:
        return math.exp(k * (math.cos(t) - 1.0)) / norm

    # integrate the lower half and mirror; the density is even in theta
    half = np.array(
        [_adaptive_simpson(f, edges[i], edges[i + 1], 1e-12) for i in range(n // 2)]
    )
    return np.concatenate([half, half[::-1]])


def max_uniform_deviation(kappa: float, bits_per_sample: int) -> float:
    """Largest distance of any bin probability from the uniform 2**-k.

    max_i |p_i - 2**-k|: the worst-case single-symbol bias of an ideal
    discretizer fed by a von Mises phase.  Exactly 0 at kappa = 0 and
    strictly increasing in kappa.
    """
    probs = discretized_probs(kappa, bits_per_sample)
    if kappa == 0.0:
        return 0.0
    return float(np.max(np.abs(probs - 1.0 / probs.size)))


@dataclass(frozen=True)
class FitResult:
    """Maximum likelihood fit of a concentration, location held at 0."""

    model: VonMisesModel
    n_samples: int
    mean_resultant_length: float
    mean_direction: float

    @property
    def variance_ratio(self) -> float:
        return self.model.variance_ratio


def fit_vonmises(samples, tol: float = 1e-9) -> FitResult:
    """Fit the concentration kappa by maximum likelihood.

    The mean resultant length R = |sum(exp(j*theta))| / N determines the
    estimate through I1(kappa)/I0(kappa) = R, solved by bisection on
    [0, 1000] to the given interval tolerance.

    Parameters
    ----------
    samples : array_like
        Wrapped phase samples, at least 10 of them.
    tol : float
        Bisection interval width at which to stop.

    Returns
    -------
    FitResult
        Fitted model plus the sufficient statistics.

    Raises
    ------
    InsufficientDataError
        Fewer than 10 samples.
    UnboundedKappaError
        R >= 1 - 1e-12; all samples point the same way and the estimate
        diverges.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size < 10:
        raise InsufficientDataError(
            f"need at least 10 samples to fit, got {samples.size}"
        )
    resultant = complex(np.exp(1j * samples).mean())
    r_bar = abs(resultant)
    if r_bar >= 1.0 - 1e-12:
        raise UnboundedKappaError(
            "mean resultant length is 1 to machine precision; kappa unbounded"
        )

    def ratio(kappa: float) -> float:
        # I1/I0 via the exponentially scaled pair, stable for large kappa
        return special.i1e(kappa) / special.i0e(kappa)

    lo, hi = 0.0, _KAPPA_MAX
    if ratio(hi) <= r_bar:
        kappa = hi  # beyond the bracket; clamp (R < 1 - 1e-12 keeps this finite)
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if ratio(mid) < r_bar:
                lo = mid
            else:
                hi = mid
        kappa = 0.5 * (lo + hi)
    return FitResult(
        model=VonMisesModel(kappa=kappa, mu=0.0),
        n_samples=int(samples.size),
        mean_resultant_length=r_bar,
        mean_direction=float(np.angle(resultant)),
    )


def sample(
    model: VonMisesModel | float,
    n: int,
    seed: int | np.random.Generator | None = 0,
) -> np.ndarray:
    """Draw n wrapped angles from the model, in (-pi, pi]."""
    if not isinstance(model, VonMisesModel):
        model = VonMisesModel(float(model))
    rng = np.random.default_rng(seed)
    if model.kappa == 0.0:
        draws = rng.uniform(-math.pi, math.pi, size=n)
    else:
        draws = rng.vonmises(model.mu, model.kappa, size=n)
    # numpy returns values in [-pi, pi]; fold the closed lower edge
    return np.where(draws <= -math.pi, math.pi, draws)
