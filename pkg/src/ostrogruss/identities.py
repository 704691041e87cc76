"""Residual evaluators for the Montgomery-type identities.

Every operation returns an :class:`IdentityReport` with the full term
breakdown of the right-hand side.  Residuals are judged against a scaled
tolerance ``max(abs_tol, rel_tol_identity * scale)`` where ``scale`` is the
largest absolute constituent term: the fractional identities contain terms
growing like (b - x)**(1 - alpha), and an unscaled absolute test would
spuriously fail near the endpoint-guard boundary.

The default ``rel_tol_identity`` of 1e-7 sits one to two orders above the
quadrature tolerances to absorb error accumulation across terms.  Every
J-term is computed by an independent quadrature call, so a sign error in a
single term cannot be masked by shared subexpressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .fractional import (
    FracPoint,
    Interval,
    _p1_values,
    _shifted_values,
)
from .numerics import (
    DEFAULT_CONFIG,
    ConvergenceError,
    QuadratureConfig,
    QuadResult,
    gamma,
    integrate,
    integrate_weighted,
)

if TYPE_CHECKING:  # pragma: no cover
    from .corpus import FunctionSpec

__all__ = [
    "IdentityReport",
    "REL_TOL_IDENTITY",
    "montgomery_classic_residual",
    "frac_montgomery_p2_residual",
    "frac_montgomery_k1_residual",
    "kernel_split_residual",
    "moment_reduction_residual",
    "tong_guan_residual",
]

REL_TOL_IDENTITY = 1e-7


@dataclass(frozen=True)
class IdentityReport:
    """LHS, RHS, residual and pass flag for one identity check.

    ``terms`` holds the named signed contributions whose sum is ``rhs``;
    ``scale`` is the largest absolute value among lhs and all terms;
    ``err_estimate`` the summed quadrature error estimates of every
    constituent integral.
    """

    lhs: float
    rhs: float
    residual: float
    scale: float
    tolerance: float
    passed: bool
    err_estimate: float
    terms: dict[str, float]


def _fval(func: Callable, t: float) -> float:
    return float(np.asarray(func(np.float64(t)), dtype=np.float64))


def _checked(res: QuadResult, what: str) -> QuadResult:
    if not res.converged:
        raise ConvergenceError(f"quadrature for {what} did not converge", res)
    return res


def _j_apply(
    g: Callable,
    a: float,
    b: float,
    order: float,
    cfg: QuadratureConfig,
    breakpoints=(),
    what: str = "J term",
) -> tuple[float, float]:
    """(J_a^order g)(b) and its error estimate; order 0 is the identity map."""
    if order == 0.0:
        return _fval(g, b), 0.0
    res = _checked(integrate_weighted(g, a, b, order, breakpoints, cfg), what)
    gm = gamma(order)
    return res.value / gm, res.err_estimate / gm


def _assemble(
    lhs: float,
    lhs_err: float,
    named: dict[str, tuple[float, float]],
    cfg: QuadratureConfig,
    rel_tol_identity: float,
) -> IdentityReport:
    terms = {name: value for name, (value, _) in named.items()}
    rhs = math.fsum(terms.values())
    residual = lhs - rhs
    scale = max(abs(lhs), *(abs(v) for v in terms.values()))
    tolerance = max(cfg.abs_tol, rel_tol_identity * scale)
    err = lhs_err + math.fsum(e for _, e in named.values())
    return IdentityReport(
        lhs=lhs,
        rhs=rhs,
        residual=residual,
        scale=scale,
        tolerance=tolerance,
        passed=abs(residual) <= tolerance,
        err_estimate=err,
        terms=terms,
    )


# ---------------------------------------------------------------------------
# Classical Montgomery identity:
#   f(x) = mean(f) + int_a^b P1(x,t) f'(t) dt
# ---------------------------------------------------------------------------


def montgomery_classic_residual(
    f: "FunctionSpec",
    iv: Interval,
    x: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    if not iv.contains(x):
        raise ValueError(f"x={x!r} outside interval [{iv.a}, {iv.b}]")
    lhs = _fval(f.f, x)
    mean = _checked(integrate(f.f, iv.a, iv.b, (), cfg), "integral mean")
    kern = _checked(
        integrate(lambda t: _p1_values(iv, x, t) * f.f_prime(t), iv.a, iv.b, [x], cfg),
        "P1 kernel integral",
    )
    named = {
        "integral_mean": (mean.value / iv.width, mean.err_estimate / iv.width),
        "kernel_integral": (kern.value, kern.err_estimate),
    }
    return _assemble(lhs, 0.0, named, cfg, rel_tol_identity)


# ---------------------------------------------------------------------------
# Fractional Montgomery identity, P2-kernel form:
#   f(x) = Gamma(alpha) (b-x)**(1-alpha) / (b-a) * J_a^alpha f(b)
#          - J_a^(alpha-1)(P2(x,.) f)(b) + J_a^alpha(P2(x,.) f')(b)
# ---------------------------------------------------------------------------


def frac_montgomery_p2_residual(
    f: "FunctionSpec",
    pt: FracPoint,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    pt.check_guard(cfg.endpoint_guard)
    iv, x, alpha = pt.interval, pt.x, pt.alpha
    a, b, w = iv.a, iv.b, iv.width
    pre = (b - x) ** (1.0 - alpha) * gamma(alpha)

    jf, jf_err = _j_apply(f.f, a, b, alpha, cfg, what="J^alpha f")
    p2f, p2f_err = _j_apply(
        lambda t: _p1_values(iv, x, t) * pre * f.f(t),
        a, b, alpha - 1.0, cfg, [x], "J^(alpha-1)(P2 f)",
    )
    p2fp, p2fp_err = _j_apply(
        lambda t: _p1_values(iv, x, t) * pre * f.f_prime(t),
        a, b, alpha, cfg, [x], "J^alpha(P2 f')",
    )
    c1 = pre / w
    named = {
        "weighted_mean_term": (c1 * jf, abs(c1) * jf_err),
        "p2_f_term": (-p2f, p2f_err),
        "p2_fprime_term": (p2fp, p2fp_err),
    }
    return _assemble(_fval(f.f, x), 0.0, named, cfg, rel_tol_identity)


# ---------------------------------------------------------------------------
# Fractional Montgomery identity, K1-kernel form (five terms):
#   f(x) = (alpha+1) Gamma(alpha) (b-x)**(1-alpha)/(b-a) * J_a^alpha f(b)
#          - J_a^(alpha-1)(P2(x,.) f)(b)
#          - (b-x)**(2-alpha) Gamma(alpha)/(b-a) * J_a^(alpha-1) f(b)
#          - (b-x)**(1-alpha) (x-a)/(b-a)**(2-alpha) * f(a)
#          + 2 J_a^alpha(K1(x,.) f')(b)
# ---------------------------------------------------------------------------


def _k1_identity_terms(
    f: "FunctionSpec", pt: FracPoint, cfg: QuadratureConfig
) -> dict[str, tuple[float, float]]:
    """The five named right-hand-side terms with their error estimates.

    Shared with the fractional inequality check, whose left side is built
    from exactly these evaluators.
    """
    iv, x, alpha = pt.interval, pt.x, pt.alpha
    a, b, w = iv.a, iv.b, iv.width
    pre = (b - x) ** (1.0 - alpha) * gamma(alpha)

    jf, jf_err = _j_apply(f.f, a, b, alpha, cfg, what="J^alpha f")
    p2f, p2f_err = _j_apply(
        lambda t: _p1_values(iv, x, t) * pre * f.f(t),
        a, b, alpha - 1.0, cfg, [x], "J^(alpha-1)(P2 f)",
    )
    jlow, jlow_err = _j_apply(f.f, a, b, alpha - 1.0, cfg, what="J^(alpha-1) f")
    k1fp, k1fp_err = _j_apply(
        lambda t: _shifted_values(iv, x, t) * (pre / w) * f.f_prime(t),
        a, b, alpha, cfg, [x], "J^alpha(K1 f')",
    )

    c_mean = (alpha + 1.0) * pre / w
    c_low = (b - x) ** (2.0 - alpha) * gamma(alpha) / w
    boundary = (b - x) ** (1.0 - alpha) * (x - a) / w ** (2.0 - alpha) * _fval(f.f, a)
    return {
        "weighted_mean_term": (c_mean * jf, abs(c_mean) * jf_err),
        "p2_f_term": (-p2f, p2f_err),
        "lower_order_term": (-c_low * jlow, abs(c_low) * jlow_err),
        "boundary_term": (-boundary, 0.0),
        "k1_kernel_term": (2.0 * k1fp, 2.0 * k1fp_err),
    }


def frac_montgomery_k1_residual(
    f: "FunctionSpec",
    pt: FracPoint,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    pt.check_guard(cfg.endpoint_guard)
    named = _k1_identity_terms(f, pt, cfg)
    return _assemble(_fval(f.f, pt.x), 0.0, named, cfg, rel_tol_identity)


# ---------------------------------------------------------------------------
# Kernel-splitting step:
#   J_a^alpha(K1(x,.) f')(b) = (1/2) J_a^alpha(P2(x,.) f')(b)
#       + (b-x)**(1-alpha)/(2(b-a)) * int_a^b (b-t)**(alpha-1) (t-x) f'(t) dt
# ---------------------------------------------------------------------------


def kernel_split_residual(
    f: "FunctionSpec",
    pt: FracPoint,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    pt.check_guard(cfg.endpoint_guard)
    iv, x, alpha = pt.interval, pt.x, pt.alpha
    a, b, w = iv.a, iv.b, iv.width
    pre = (b - x) ** (1.0 - alpha) * gamma(alpha)

    lhs, lhs_err = _j_apply(
        lambda t: _shifted_values(iv, x, t) * (pre / w) * f.f_prime(t),
        a, b, alpha, cfg, [x], "J^alpha(K1 f')",
    )
    p2fp, p2fp_err = _j_apply(
        lambda t: _p1_values(iv, x, t) * pre * f.f_prime(t),
        a, b, alpha, cfg, [x], "J^alpha(P2 f')",
    )
    moment = _checked(
        integrate_weighted(lambda t: (t - x) * f.f_prime(t), a, b, alpha, (), cfg),
        "first-moment integral",
    )
    c_mom = (b - x) ** (1.0 - alpha) / (2.0 * w)
    named = {
        "half_p2_fprime_term": (0.5 * p2fp, 0.5 * p2fp_err),
        "first_moment_term": (c_mom * moment.value, abs(c_mom) * moment.err_estimate),
    }
    return _assemble(lhs, lhs_err, named, cfg, rel_tol_identity)


# ---------------------------------------------------------------------------
# Moment-reduction step (integration by parts):
#   int_a^b (b-t)**(alpha-1) (t-x) f'(t) dt
#       = (x-a)(b-a)**(alpha-1) f(a) + (b-x) Gamma(alpha) J_a^(alpha-1) f(b)
#         - Gamma(alpha+1) J_a^alpha f(b)
# ---------------------------------------------------------------------------


def moment_reduction_residual(
    f: "FunctionSpec",
    pt: FracPoint,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    pt.check_guard(cfg.endpoint_guard)
    iv, x, alpha = pt.interval, pt.x, pt.alpha
    a, b, w = iv.a, iv.b, iv.width

    moment = _checked(
        integrate_weighted(lambda t: (t - x) * f.f_prime(t), a, b, alpha, (), cfg),
        "first-moment integral",
    )
    jlow, jlow_err = _j_apply(f.f, a, b, alpha - 1.0, cfg, what="J^(alpha-1) f")
    jf, jf_err = _j_apply(f.f, a, b, alpha, cfg, what="J^alpha f")

    g_alpha = gamma(alpha)
    named = {
        "boundary_term": ((x - a) * w ** (alpha - 1.0) * _fval(f.f, a), 0.0),
        "lower_order_term": ((b - x) * g_alpha * jlow, (b - x) * g_alpha * jlow_err),
        "full_order_term": (-gamma(alpha + 1.0) * jf, gamma(alpha + 1.0) * jf_err),
    }
    return _assemble(moment.value, moment.err_estimate, named, cfg, rel_tol_identity)


# ---------------------------------------------------------------------------
# Halved Montgomery identity (alpha = 1 reduction, Tong-Guan kernel):
#   f(x)/2 = mean(f) + [(x-b) f(b) - (x-a) f(a)] / (2(b-a))
#            + (1/(b-a)) * int_a^b K(x,t) f'(t) dt
#
# The kernel integral carries the 1/(b-a) prefactor: this is what the
# five-term identity reduces to at alpha = 1 (its last term is
# 2 J_a^1(K1 f') = (2/(b-a)) int K f'), and the Cheng-type bound follows
# from it with the same factor.  Without the prefactor the identity only
# holds on unit-width intervals.
# ---------------------------------------------------------------------------


def tong_guan_residual(
    f: "FunctionSpec",
    iv: Interval,
    x: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    rel_tol_identity: float = REL_TOL_IDENTITY,
) -> IdentityReport:
    if not iv.contains(x):
        raise ValueError(f"x={x!r} outside interval [{iv.a}, {iv.b}]")
    a, b, w = iv.a, iv.b, iv.width
    lhs = 0.5 * _fval(f.f, x)
    mean = _checked(integrate(f.f, a, b, (), cfg), "integral mean")
    kern = _checked(
        integrate(lambda t: _shifted_values(iv, x, t) * f.f_prime(t), a, b, [x], cfg),
        "K kernel integral",
    )
    boundary = ((x - b) * _fval(f.f, b) - (x - a) * _fval(f.f, a)) / (2.0 * w)
    named = {
        "integral_mean": (mean.value / w, mean.err_estimate / w),
        "boundary_term": (boundary, 0.0),
        "kernel_integral": (kern.value / w, kern.err_estimate / w),
    }
    return _assemble(lhs, 0.0, named, cfg, rel_tol_identity)
