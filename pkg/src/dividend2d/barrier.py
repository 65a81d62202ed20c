"""Barrier-reflection valuation and its residual self-checks.

``v1_barrier`` sums the two-family exponential series below the barrier;
``pide_residual`` and ``boundary_residual`` plug any valuation back into
the governing integro-differential equation and the on-barrier flux
condition by finite differences plus quadrature, giving an independent
consistency check whose size should be dominated by the stencil error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .gammas import GammaSequences, sequences_for
from .model import (
    BarrierSpec,
    ModelParams,
    Region,
    Reserves,
    classify_point,
    require_exponential,
    validate_barrier,
    validate_model,
)


class AnalyticDomainError(ValueError):
    """The series solution is not defined at the requested point."""


class StencilError(ValueError):
    """A finite-difference stencil would leave the valid region."""


@dataclass(frozen=True)
class BarrierValuation:
    value: float
    terms_used: int
    tail_estimate: float
    sequences_ref: str


def _check_domain(u: Reserves, barrier: BarrierSpec, params: ModelParams) -> None:
    require_exponential(params.claims)
    if not barrier.is_reflection(params):
        raise AnalyticDomainError(
            "series solution is derived for the reflection drift only; "
            "use the simulator for general rates"
        )
    region = classify_point(u, barrier)
    if region == Region.OUTSIDE_QUADRANT:
        raise AnalyticDomainError(f"point {u} lies outside the positive quadrant")
    if region == Region.INTERIOR:
        raise AnalyticDomainError(
            f"point {u} lies strictly above the barrier; the series covers the"
            " region below it (use the simulator for interior starts)"
        )
    if not u.u1 < u.u2:
        raise AnalyticDomainError(
            f"series solution needs u1 < u2, got u1={u.u1}, u2={u.u2};"
            " route u1 >= u2 starts to the simulator"
        )
    if u.u2 > barrier.b:
        # u2 == b occurs only at the corner (0, b), where the matching
        # constant makes the value vanish at the build tolerance
        raise AnalyticDomainError(f"series converges only for u2 <= b ({u.u2} > {barrier.b})")


def _series_terms(
    u: Reserves, seqs: GammaSequences, alpha: float, primed: bool
) -> np.ndarray:
    g1, g2, g3, ds = seqs.arrays(primed)
    rho = (g3 + g2 + alpha) / (g1 + g2 + alpha)
    return ds * (np.exp(g1 * u.u1) - rho * np.exp(g3 * u.u1)) * np.exp(g2 * (u.u2 - seqs.b))


def v1_barrier(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    tol: float = 1e-12,
    sequences: GammaSequences | None = None,
) -> BarrierValuation:
    """Expected discounted dividends until ruin, started below the barrier.

    Terms of both series are summed in full; ``terms_used`` reports how
    many were needed before each term fell below ``tol`` relative to the
    running sum, and ``tail_estimate`` bounds the truncation left beyond
    the built sequences (last-term magnitude; the term ratio decays to 0
    so this is conservative).
    """
    validate_model(params)
    validate_barrier(barrier, params)
    _check_domain(u, barrier, params)
    alpha = require_exponential(params.claims).rate
    seqs = sequences if sequences is not None else sequences_for(barrier, params)
    t_base = _series_terms(u, seqs, alpha, primed=False)
    t_primed = seqs.E * _series_terms(u, seqs, alpha, primed=True)
    value = float(np.sum(t_base) + np.sum(t_primed))

    combined = np.abs(t_base) + np.abs(t_primed)
    partial = np.cumsum(t_base + t_primed)
    scale = np.maximum(np.abs(partial), 1e-300)
    small = combined <= tol * scale
    below = np.nonzero(small)[0]
    terms_used = int(below[0]) + 1 if below.size else len(combined)
    tail = float(combined[-1])
    return BarrierValuation(
        value=value,
        terms_used=terms_used,
        tail_estimate=tail,
        sequences_ref=seqs.key,
    )


def v1_value(
    u1: float,
    u2: float,
    barrier: BarrierSpec,
    params: ModelParams,
    sequences: GammaSequences | None = None,
) -> float:
    """Bare series value, for stencils and sweeps."""
    return v1_barrier(Reserves(u1, u2), barrier, params, sequences=sequences).value


def _default_step(u: Reserves) -> float:
    return 1e-4 * max(1.0, abs(u.u1), abs(u.u2))


def _integral_term(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    V,
    quad_tol: float = 1e-10,
) -> float:
    """lam * int_0^min(u1,u2) V(u - (v,v)) dF(v) for exponential claims.

    Along the down-diagonal the gap u2 - u1 is constant and the point
    stays below the barrier, so the integrand has no interior kinks for
    valid inputs; the ray only meets an axis at the endpoint.
    """
    alpha = require_exponential(params.claims).rate
    upper = min(u.u1, u.u2)
    if upper <= 0.0:
        return 0.0

    def integrand(v: float) -> float:
        return V(u.u1 - v, u.u2 - v) * alpha * math.exp(-alpha * v)

    val, _ = quad(integrand, 0.0, upper, epsabs=quad_tol, limit=200)
    return params.lam * val


def pide_residual(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    h: float | None = None,
    value_fn=None,
) -> float:
    """Residual of the valuation equation at an interior point below the barrier.

    Central differences of step h for the gradient, adaptive quadrature
    for the claim integral.  For the exact solution the result is O(h^2)
    plus quadrature error.  ``value_fn(u1, u2)`` substitutes another
    candidate solution (diagnostics and harness tests).
    """
    if h is None:
        h = _default_step(u)
    _check_domain(u, barrier, params)
    if classify_point(u, barrier) != Region.COMPLEMENT:
        raise StencilError("residual needs a point strictly below the barrier")
    safe = (
        u.u1 > 2.0 * h
        and u.u2 > 2.0 * h
        and u.u2 + 2.0 * h < barrier.line_height(u.u1 + 2.0 * h)
        and u.u1 + 2.0 * h < u.u2 - 2.0 * h
    )
    if not safe:
        raise StencilError(f"stencil of step {h} leaves the valid region around {u}")
    if value_fn is None:
        seqs = sequences_for(barrier, params)
        V = lambda x1, x2: v1_value(x1, x2, barrier, params, sequences=seqs)
    else:
        V = value_fn
    dv1 = (V(u.u1 + h, u.u2) - V(u.u1 - h, u.u2)) / (2.0 * h)
    dv2 = (V(u.u1, u.u2 + h) - V(u.u1, u.u2 - h)) / (2.0 * h)
    lamq = params.lam + params.q
    return (
        params.c1 * dv1
        + params.c2 * dv2
        - lamq * V(u.u1, u.u2)
        + _integral_term(u, barrier, params, V=V)
    )


def boundary_residual(
    u_on_line: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    h: float | None = None,
) -> float:
    """Residual of the on-barrier flux condition, one-sided from below.

    The diverted drift dotted with the value gradient must equal the
    total payout rate delta0; derivatives are second-order one-sided
    stencils into the no-payout side.
    """
    if h is None:
        h = _default_step(u_on_line)
    if classify_point(u_on_line, barrier) != Region.ON_LINE:
        raise StencilError(f"{u_on_line} is not on the barrier line")
    if not u_on_line.u1 > 2.0 * h:
        raise StencilError("need u1 > 2h to difference along u1")
    _check_domain(u_on_line, barrier, params)
    seqs = sequences_for(barrier, params)
    V = lambda x1, x2: v1_value(x1, x2, barrier, params, sequences=seqs)
    u1, u2 = u_on_line.u1, u_on_line.u2
    d1 = (3.0 * V(u1, u2) - 4.0 * V(u1 - h, u2) + V(u1 - 2.0 * h, u2)) / (2.0 * h)
    d2 = (3.0 * V(u1, u2) - 4.0 * V(u1, u2 - h) + V(u1, u2 - 2.0 * h)) / (2.0 * h)
    return (
        (params.c1 + 1.0) * d1
        + (params.c2 - barrier.a) * d2
        - barrier.delta0
    )
