"""Exponent triples and coefficients behind the barrier-value series.

The expected discounted dividend under reflection separates into terms
``D_k * (exp(g1*u1) - rho*exp(g3*u1)) * exp(g2*u2)``.  For a fixed slope
the admissible pairs ``(g, g2)`` solve one quadratic; two families of
triples are generated recursively, one seeded from the barrier slope
``a`` and one from the auxiliary slope ``a' = (a - c2)/(c1 + 1)``.  The
recursion is tied together by the linkage ``g3[k] - a*g2[k] =
g1[k+1] - a*g2[k+1]`` (same slope ``a`` for both families), which makes
the on-barrier flux sum telescope.

Raw ``D_k`` coefficients underflow for large k because they carry
``exp(-g2*b)``; all arithmetic therefore runs on the rescaled
``D_scaled = D * exp(g2*b)``, which decays to zero instead.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import (
    BarrierSpec,
    ModelParams,
    NonConvergenceError,
    ParameterError,
    require_exponential,
    validate_barrier,
    validate_model,
)


@dataclass(frozen=True)
class GammaStep:
    """One exponent triple with its coefficient and root discriminants.

    ``D_scaled = D * exp(g2 * b)`` is the representation actually used in
    series sums; ``D`` itself may underflow to 0 at large k (kept for
    diagnostics only).
    """

    g1: float
    g2: float
    g3: float
    D: float
    disc_g2: float
    disc_g1: float
    D_scaled: float


@dataclass(frozen=True)
class GammaSequences:
    """Both triple families, the matching constant E, and the slopes."""

    steps: tuple[GammaStep, ...]
    primed_steps: tuple[GammaStep, ...]
    E: float
    a_prime: float
    a: float
    b: float
    tail_ratio: float  # achieved relative size of the last E-sum terms

    @property
    def key(self) -> str:
        """Identifier for valuations produced from these sequences."""
        return f"gamma[a={self.a!r},b={self.b!r},terms={len(self.steps)}]"

    def arrays(self, primed: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(g1, g2, g3, D_scaled) as vectors for one family."""
        steps = self.primed_steps if primed else self.steps
        g1 = np.array([s.g1 for s in steps])
        g2 = np.array([s.g2 for s in steps])
        g3 = np.array([s.g3 for s in steps])
        ds = np.array([s.D_scaled for s in steps])
        return g1, g2, g3, ds


def _quadratic_roots(A: float, B: float, C: float) -> tuple[float, float, float]:
    """Roots of A x^2 + B x + C as (larger, smaller, discriminant).

    The root of larger magnitude comes from the non-cancelling branch,
    the other from the product of roots; coefficients grow with k so the
    naive formula would lose digits.
    """
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        raise NonConvergenceError(f"negative discriminant {disc} in root recursion")
    sq = math.sqrt(disc)
    r1 = (-B - sq) / (2.0 * A) if B >= 0.0 else (-B + sq) / (2.0 * A)
    r2 = C / (A * r1) if r1 != 0.0 else -B / A
    return (max(r1, r2), min(r1, r2), disc)


def _sqeq_coeffs(g2: float, params: ModelParams) -> tuple[float, float, float]:
    """Coefficients of the pair quadratic in g at fixed g2."""
    alpha = require_exponential(params.claims).rate
    c1, c2, lam, q = params.c1, params.c2, params.lam, params.q
    B = (c1 + c2) * g2 + (alpha * c1 - q - lam)
    C = c2 * g2 * g2 + (alpha * c2 - q - lam) * g2 - alpha * q
    return c1, B, C


def sqeq_residual(g: float, g2: float, params: ModelParams) -> float:
    """Relative residual of (g, g2) in the pair quadratic."""
    A, B, C = _sqeq_coeffs(g2, params)
    scale = abs(A * g * g) + abs(B * g) + abs(C)
    return abs(A * g * g + B * g + C) / max(scale, 1e-300)


def gamma2_initial(m: float, params: ModelParams) -> float:
    """Unique positive root of the slope-m seed quadratic.

    Substituting ``g1 = m*g2`` into the pair quadratic yields a quadratic
    in g2 with constant term ``-alpha*q < 0`` whose leading coefficient
    is positive for the barrier slope and, thanks to ``c1 > c2``, for the
    auxiliary slope as well.
    """
    alpha = require_exponential(params.claims).rate
    c1, c2, lam, q = params.c1, params.c2, params.lam, params.q
    A = (m * m + m) * c1 + (1.0 + m) * c2
    if not A > 0.0:
        raise ParameterError(
            [f"seed quadratic has non-positive leading coefficient {A} for slope {m}"]
        )
    B = m * (alpha * c1 - q - lam) + alpha * c2 - q - lam
    C = -alpha * q
    # C < 0 so the roots straddle zero; the larger root is the positive one.
    root, _, _ = _quadratic_roots(A, B, C)
    return root


def _gamma2_initial_disc(m: float, params: ModelParams) -> float:
    alpha = require_exponential(params.claims).rate
    c1, c2, lam, q = params.c1, params.c2, params.lam, params.q
    A = (m * m + m) * c1 + (1.0 + m) * c2
    B = m * (alpha * c1 - q - lam) + alpha * c2 - q - lam
    return B * B + 4.0 * alpha * q * A


def solve_g1_g3(g2: float, params: ModelParams) -> tuple[float, float]:
    """Both roots of the pair quadratic at fixed ``g2``; g1 > g3."""
    A, B, C = _sqeq_coeffs(g2, params)
    hi, lo, _ = _quadratic_roots(A, B, C)
    return (hi, lo)


def _disc_g1(g2: float, params: ModelParams) -> float:
    A, B, C = _sqeq_coeffs(g2, params)
    return B * B - 4.0 * A * C


def advance_gamma2(prev: GammaStep, slope: float, params: ModelParams) -> float:
    """Next g2: the larger root of the linkage-substituted quadratic.

    With ``s = g3[k] - slope*g2[k]``, requiring ``s + slope*g2`` to solve
    the pair quadratic at ``g2`` gives a quadratic in ``g2`` whose roots
    are the previous g2 and the next one; the larger root is the next.
    """
    g2, _ = _advance_gamma2_disc(prev.g3 - slope * prev.g2, slope, params)
    if not g2 > prev.g2:
        raise NonConvergenceError(
            f"g2 recursion not increasing: {g2} after {prev.g2}"
        )
    return g2


def _advance_gamma2_disc(s: float, slope: float, params: ModelParams) -> tuple[float, float]:
    alpha = require_exponential(params.claims).rate
    c1, c2, lam, q = params.c1, params.c2, params.lam, params.q
    a = slope
    A = (a * a + a) * c1 + (1.0 + a) * c2
    B = s * (2.0 * c1 * a + c1 + c2) - (lam + q) * (1.0 + a) + alpha * (a * c1 + c2)
    C = c1 * s * s + (c1 * alpha - lam - q) * s - alpha * q
    root, _, disc = _quadratic_roots(A, B, C)
    return root, disc


def _flux(g: float, g2: float, barrier: BarrierSpec, params: ModelParams) -> float:
    """Coefficient of a series term in the on-barrier flux condition."""
    return g * (params.c1 + 1.0) + g2 * (params.c2 - barrier.a)


def _rho(g1: float, g2: float, g3: float, alpha: float) -> float:
    return (g3 + g2 + alpha) / (g1 + g2 + alpha)


def _build_family(
    seed_slope: float,
    barrier: BarrierSpec,
    params: ModelParams,
    scaled_d0: float | None,
    max_terms: int,
) -> list[GammaStep]:
    """One family of steps with rescaled coefficients.

    ``scaled_d0 = None`` marks the primed family, whose raw D0 is 1, so
    its rescaled seed is exp(g2*b).
    """
    alpha = require_exponential(params.claims).rate
    a = barrier.a
    g2 = gamma2_initial(seed_slope, params)
    disc2 = _gamma2_initial_disc(seed_slope, params)
    g1 = seed_slope * g2
    # companion root via the product of roots (g1 is a root by construction)
    _, _, C = _sqeq_coeffs(g2, params)
    g3 = C / (params.c1 * g1)
    if scaled_d0 is None:
        scaled = math.exp(g2 * barrier.b)
    else:
        scaled = scaled_d0 / _flux(g1, g2, barrier, params)
    d_raw = scaled * math.exp(-g2 * barrier.b)
    steps = [GammaStep(g1, g2, g3, d_raw, disc2, _disc_g1(g2, params), scaled)]
    for _ in range(max_terms - 1):
        prev = steps[-1]
        s = prev.g3 - a * prev.g2
        g2n, disc2n = _advance_gamma2_disc(s, a, params)
        if not g2n > prev.g2:
            raise NonConvergenceError(f"g2 recursion not increasing at k={len(steps)}")
        g1n = s + a * g2n
        _, _, Cn = _sqeq_coeffs(g2n, params)
        g3n = Cn / (params.c1 * g1n)
        ratio = (
            _rho(prev.g1, prev.g2, prev.g3, alpha)
            * _flux(prev.g3, prev.g2, barrier, params)
            / _flux(g1n, g2n, barrier, params)
        )
        scaled = prev.D_scaled * ratio
        d_raw = scaled * math.exp(-g2n * barrier.b)  # underflows to 0 at large k
        steps.append(GammaStep(g1n, g2n, g3n, d_raw, disc2n, _disc_g1(g2n, params), scaled))
    return steps


def _corner_term(step: GammaStep, alpha: float) -> float:
    """Series term at the corner (0, b): D_scaled * (1 - rho)."""
    return step.D_scaled * (step.g1 - step.g3) / (step.g1 + step.g2 + alpha)


def build_sequences(
    barrier: BarrierSpec,
    params: ModelParams,
    max_terms: int = 200,
    tail_tol: float = 1e-12,
    min_terms: int = 2,
) -> GammaSequences:
    """Construct both families plus E, truncated by the corner-sum tails.

    Terms are added until the k-th contribution to both corner sums (the
    numerator and denominator of E) drops below ``tail_tol`` relative to
    the running totals, but never fewer than ``min_terms``.  E then
    zeroes the value at (0, b) by construction, up to the shared
    truncation.
    """
    validate_model(params)
    validate_barrier(barrier, params)
    alpha = require_exponential(params.claims).rate
    if not barrier.is_reflection(params):
        raise ParameterError(
            ["series solution needs the reflection drift delta = (c1 + 1, c2 - a)"]
        )
    a_prime = (barrier.a - params.c2) / (params.c1 + 1.0)
    if not 2 <= min_terms <= max_terms:
        raise ParameterError([f"need 2 <= min_terms <= max_terms, got {min_terms}, {max_terms}"])

    steps = _build_family(barrier.a, barrier, params, barrier.delta0, max_terms)
    primed = _build_family(a_prime, barrier, params, None, max_terms)

    num = den = 0.0
    k_stop = None
    tail = math.inf
    for k in range(max_terms):
        tn = _corner_term(steps[k], alpha)
        td = _corner_term(primed[k], alpha)
        num += tn
        den += td
        if k >= 1:
            tail = max(abs(tn) / max(abs(num), 1e-300), abs(td) / max(abs(den), 1e-300))
            if tail < tail_tol and k + 1 >= min_terms:
                k_stop = k + 1
                break
    if k_stop is None:
        raise NonConvergenceError(
            f"corner sums not converged in {max_terms} terms (tail ratio {tail:.2e})"
        )
    E = -num / den
    return GammaSequences(
        steps=tuple(steps[:k_stop]),
        primed_steps=tuple(primed[:k_stop]),
        E=E,
        a_prime=a_prime,
        a=barrier.a,
        b=barrier.b,
        tail_ratio=tail,
    )


@lru_cache(maxsize=128)
def sequences_for(
    barrier: BarrierSpec,
    params: ModelParams,
    max_terms: int = 200,
    tail_tol: float = 1e-12,
    min_terms: int = 2,
) -> GammaSequences:
    """Cached :func:`build_sequences`; triples depend on (barrier, params) only."""
    return build_sequences(barrier, params, max_terms, tail_tol, min_terms)


def sequences_to_csv(seqs: GammaSequences) -> str:
    """Diagnostic dump, one row per k."""
    out = io.StringIO()
    out.write("k,g1,g2,g3,D,g1p,g2p,g3p,Dp\n")
    for k, (s, p) in enumerate(zip(seqs.steps, seqs.primed_steps)):
        out.write(
            f"{k},{s.g1!r},{s.g2!r},{s.g3!r},{s.D!r},"
            f"{p.g1!r},{p.g2!r},{p.g3!r},{p.D!r}\n"
        )
    return out.getvalue()


def invariant_violations(
    seqs: GammaSequences, params: ModelParams, rel_tol: float = 1e-9
) -> list[str]:
    """Check sign, ordering, monotonicity, linkage and root residuals.

    Returns human-readable violation strings; empty means all hold.
    """
    a = seqs.a
    out: list[str] = []
    for name, steps, slope0 in (
        ("base", seqs.steps, a),
        ("primed", seqs.primed_steps, seqs.a_prime),
    ):
        for k, s in enumerate(steps):
            if not s.g2 > 0.0:
                out.append(f"{name}[{k}]: g2 <= 0 ({s.g2})")
            if not s.g3 < 0.0:
                out.append(f"{name}[{k}]: g3 >= 0 ({s.g3})")
            if not s.g1 > s.g3:
                out.append(f"{name}[{k}]: g1 <= g3")
            if not (s.disc_g2 > 0.0 and s.disc_g1 > 0.0):
                out.append(f"{name}[{k}]: non-positive discriminant")
            for g in (s.g1, s.g3):
                r = sqeq_residual(g, s.g2, params)
                if r > rel_tol:
                    out.append(f"{name}[{k}]: pair-quadratic residual {r:.2e}")
            if k > 0:
                p = steps[k - 1]
                if not s.g2 > p.g2:
                    out.append(f"{name}[{k}]: g2 not increasing")
                if not s.g3 < p.g3:
                    out.append(f"{name}[{k}]: g3 not decreasing")
                link = (p.g3 - a * p.g2) - (s.g1 - a * s.g2)
                scale = max(abs(p.g3), abs(a * p.g2), abs(s.g1), 1.0)
                if abs(link) / scale > rel_tol:
                    out.append(f"{name}[{k}]: linkage residual {abs(link)/scale:.2e}")
        seed_gap = abs(steps[0].g1 - slope0 * steps[0].g2)
        if seed_gap > rel_tol * max(1.0, abs(steps[0].g1)):
            out.append(f"{name}[0]: seed identity g1 = slope*g2 off by {seed_gap:.2e}")
    if not seqs.a_prime < 0.0:
        out.append(f"a_prime >= 0 ({seqs.a_prime})")
    if abs(seqs.primed_steps[0].D - 1.0) > 1e-12:
        out.append(f"primed D0 != 1 ({seqs.primed_steps[0].D})")
    return out


def asymptotic_ratio_violations(
    seqs: GammaSequences, params: ModelParams, k: int, rtol: float = 0.01
) -> list[str]:
    """Finite-k checks of the limiting exponent ratios.

    At large k the step ratio g2[k+1]/g2[k] approaches
    (c1*a + c1)/(c1*a + c2) and the in-step ratios g3/g2 and g1/g2
    approach -1 and -c2/c1.
    """
    c1, c2, a = params.c1, params.c2, seqs.a
    step_limit = (c1 * a + c1) / (c1 * a + c2)
    out: list[str] = []
    for name, steps in (("base", seqs.steps), ("primed", seqs.primed_steps)):
        if k + 1 >= len(steps):
            out.append(f"{name}: need at least {k + 2} terms for the ratio check")
            continue
        r = steps[k + 1].g2 / steps[k].g2
        if abs(r - step_limit) / step_limit > rtol:
            out.append(f"{name}[{k}]: g2 step ratio {r} vs limit {step_limit}")
        last = steps[-1]
        if abs(last.g3 / last.g2 - (-1.0)) > rtol:
            out.append(f"{name}: g3/g2 ratio {last.g3 / last.g2} vs -1")
        if abs(last.g1 / last.g2 - (-c2 / c1)) / (c2 / c1) > rtol:
            out.append(f"{name}: g1/g2 ratio {last.g1 / last.g2} vs {-c2 / c1}")
    return out
