"""Riemann-Liouville fractional integral and the piecewise Peano kernels.

The operator implemented here is the left-sided fractional integral

    J_a^alpha f(x) = (1/Gamma(alpha)) * int_a^x (x - t)**(alpha - 1) f(t) dt

with ``J_a^0`` the identity operator.  Four kernels accompany it:

* ``kernel_p1`` -- the classical Montgomery kernel, piecewise linear in t
  with a unit jump at t = x;
* ``kernel_p2`` -- ``kernel_p1`` scaled by (b - x)**(1 - alpha) * Gamma(alpha);
* ``kernel_k1`` -- the midpoint-shifted variant with branch roots at
  (a + x)/2 and (b + x)/2, same fractional prefactor, divided by (b - a);
* ``kernel_k``  -- the alpha = 1 midpoint-shifted kernel without prefactor
  (Tong-Guan form); ``kernel_k1`` at alpha = 1 equals ``kernel_k / (b - a)``.

For alpha > 1 the prefactor (b - x)**(1 - alpha) diverges as x -> b, so
kernel evaluation and every identity built on it enforce the endpoint
guard x <= b - endpoint_guard*(b - a) and raise :class:`EndpointGuardError`
instead of returning huge values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import (
    DEFAULT_CONFIG,
    ConvergenceError,
    QuadratureConfig,
    gamma,
    integrate_weighted,
)

__all__ = [
    "Interval",
    "FracPoint",
    "EndpointGuardError",
    "rl_integral",
    "rl_monomial_oracle",
    "kernel_p1",
    "kernel_p2",
    "kernel_k1",
    "kernel_k",
]


class EndpointGuardError(ValueError):
    """x is too close to b for the fractional prefactor to stay bounded."""


@dataclass(frozen=True)
class Interval:
    """A closed real interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"interval endpoints must be finite, got {self!r}")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got a={self.a!r}, b={self.b!r}")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b


@dataclass(frozen=True)
class FracPoint:
    """An evaluation point (x, alpha) on an interval, alpha >= 1."""

    interval: Interval
    x: float
    alpha: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.x) or not self.interval.contains(self.x):
            raise ValueError(
                f"x={self.x!r} outside interval [{self.interval.a}, {self.interval.b}]"
            )
        if not (math.isfinite(self.alpha) and self.alpha >= 1.0):
            raise ValueError(f"alpha must be >= 1, got {self.alpha!r}")

    def check_guard(self, guard: float) -> None:
        """Raise EndpointGuardError when alpha > 1 and x sits in the
        exclusion zone near b (where (b-x)**(1-alpha) blows up)."""
        _check_guard(self.interval, self.x, self.alpha, guard)


def _check_guard(iv: Interval, x: float, alpha: float, guard: float) -> None:
    if alpha > 1.0 and x > iv.b - guard * iv.width:
        raise EndpointGuardError(
            f"x={x!r} violates the endpoint guard: need "
            f"x <= b - {guard!r}*(b-a) = {iv.b - guard * iv.width!r} when alpha > 1"
        )


# ---------------------------------------------------------------------------
# Riemann-Liouville operator
# ---------------------------------------------------------------------------


def rl_integral(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    alpha: float,
    x: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    breakpoints: Sequence[float] = (),
) -> float:
    """J_a^alpha f(x) for alpha >= 0.

    alpha = 0 is the identity operator (evaluated exactly, never as a
    quadrature limit); x = a gives 0 for alpha > 0.  Breakpoints of f
    inside (a, x) may be supplied for kernel-type integrands.
    """
    a = float(a)
    x = float(x)
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha >= 0.0):
        raise ValueError(f"alpha must be >= 0, got {alpha!r}")
    if not (math.isfinite(a) and math.isfinite(x)) or x < a:
        raise ValueError(f"need a <= x with both finite, got a={a!r}, x={x!r}")
    if alpha == 0.0:
        return float(np.asarray(f(np.float64(x)), dtype=np.float64))
    if x == a:
        return 0.0
    res = integrate_weighted(f, a, x, alpha, breakpoints, cfg)
    if not res.converged:
        raise ConvergenceError(
            f"fractional integral did not converge on [{a}, {x}] with alpha={alpha}",
            res,
        )
    return res.value / gamma(alpha)


def rl_monomial_oracle(a: float, alpha: float, beta: float, x: float) -> float:
    """Exact J_a^alpha applied to t -> (t - a)**beta:

        Gamma(beta + 1) / Gamma(alpha + beta + 1) * (x - a)**(alpha + beta)
    """
    a = float(a)
    x = float(x)
    alpha = float(alpha)
    beta = float(beta)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise ValueError(f"alpha must be > 0, got {alpha!r}")
    if not (math.isfinite(beta) and beta >= 0.0):
        raise ValueError(f"beta must be >= 0, got {beta!r}")
    if not (math.isfinite(a) and math.isfinite(x)) or x < a:
        raise ValueError(f"need x >= a with both finite, got a={a!r}, x={x!r}")
    return gamma(beta + 1.0) / gamma(alpha + beta + 1.0) * (x - a) ** (alpha + beta)


# ---------------------------------------------------------------------------
# Peano kernels
# ---------------------------------------------------------------------------
# The *_values helpers evaluate the kernel formulas on arrays without
# domain checks; integrands built from them may be probed a few ulp
# outside [a, b] by the weighted substitution.


def _p1_values(iv: Interval, x: float, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t < x, t - iv.a, t - iv.b) / iv.width


def _shifted_values(iv: Interval, x: float, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t < x, t - 0.5 * (iv.a + x), t - 0.5 * (iv.b + x))


def _frac_prefactor(iv: Interval, x: float, alpha: float) -> float:
    # (b - x)**0 == 1 even at x == b, so alpha == 1 never diverges
    return (iv.b - x) ** (1.0 - alpha) * gamma(alpha)


def _check_point(iv: Interval, x: float, t: float) -> None:
    if not iv.contains(x):
        raise ValueError(f"x={x!r} outside interval [{iv.a}, {iv.b}]")
    if not iv.contains(t):
        raise ValueError(f"t={t!r} outside interval [{iv.a}, {iv.b}]")


def _check_alpha_ge1(alpha: float) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise ValueError(f"alpha must be >= 1, got {alpha!r}")
    return alpha


def kernel_p1(iv: Interval, x: float, t: float) -> float:
    """Montgomery kernel: (t-a)/(b-a) for t < x, (t-b)/(b-a) for t >= x."""
    _check_point(iv, x, t)
    return float(_p1_values(iv, x, np.float64(t)))


def kernel_p2(iv: Interval, x: float, t: float, alpha: float,
              guard: float = DEFAULT_CONFIG.endpoint_guard) -> float:
    """Fractional Montgomery kernel: kernel_p1 * (b-x)**(1-alpha) * Gamma(alpha)."""
    alpha = _check_alpha_ge1(alpha)
    _check_point(iv, x, t)
    _check_guard(iv, x, alpha, guard)
    return float(_p1_values(iv, x, np.float64(t))) * _frac_prefactor(iv, x, alpha)


def kernel_k1(iv: Interval, x: float, t: float, alpha: float,
              guard: float = DEFAULT_CONFIG.endpoint_guard) -> float:
    """Midpoint-shifted fractional kernel:

        (t - (a+x)/2) * (b-x)**(1-alpha) * Gamma(alpha) / (b-a)   for t < x,
        (t - (b+x)/2) * (b-x)**(1-alpha) * Gamma(alpha) / (b-a)   for t >= x.
    """
    alpha = _check_alpha_ge1(alpha)
    _check_point(iv, x, t)
    _check_guard(iv, x, alpha, guard)
    return (
        float(_shifted_values(iv, x, np.float64(t)))
        * _frac_prefactor(iv, x, alpha)
        / iv.width
    )


def kernel_k(iv: Interval, x: float, t: float) -> float:
    """Tong-Guan kernel: t - (a+x)/2 for t < x, t - (b+x)/2 for t >= x.

    Carries no 1/(b-a) factor; kernel_k1(iv, x, t, 1) == kernel_k(iv, x, t)/(b-a).
    """
    _check_point(iv, x, t)
    return float(_shifted_values(iv, x, np.float64(t)))
