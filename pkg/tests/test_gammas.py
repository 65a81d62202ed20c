import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bisect
from dividend2d import (
    BarrierSpec,
    ExponentialClaims,
    ModelParams,
    NonConvergenceError,
    advance_gamma2,
    build_sequences,
    gamma2_initial,
    sequences_for,
    sequences_to_csv,
    solve_g1_g3,
)
from dividend2d.gammas import (
    asymptotic_ratio_violations,
    invariant_violations,
    sqeq_residual,
)

# frozen from the bisection oracles below (tol 1e-14)
G2_INITIAL_BASE = 0.034960438522586096
G2_INITIAL_PRIMED = 0.20884538687251591
G2_AFTER_ONE_ADVANCE = 2.210159419747077


def _seed_quadratic(m, params):
    alpha = params.claims.rate
    A = (m * m + m) * params.c1 + (1.0 + m) * params.c2
    B = m * (alpha * params.c1 - params.q - params.lam) + alpha * params.c2 - params.q - params.lam
    return lambda g: A * g * g + B * g - alpha * params.q


def test_gamma2_initial_matches_bisection_oracle(params):
    root = gamma2_initial(0.1, params)
    assert root == pytest.approx(G2_INITIAL_BASE, rel=1e-12)
    assert bisect(_seed_quadratic(0.1, params), 1e-12, 10.0) == pytest.approx(root, rel=1e-10)

    a_prime = (0.1 - params.c2) / (params.c1 + 1.0)
    root_p = gamma2_initial(a_prime, params)
    assert root_p == pytest.approx(G2_INITIAL_PRIMED, rel=1e-12)
    assert bisect(_seed_quadratic(a_prime, params), 1e-12, 10.0) == pytest.approx(root_p, rel=1e-10)


def test_gamma2_initial_positive_and_exact_root(params):
    for m in (0.1, (0.1 - params.c2) / (params.c1 + 1.0)):
        root = gamma2_initial(m, params)
        assert root > 0.0
        f = _seed_quadratic(m, params)
        scale = abs(f(0.0)) + abs(root)
        assert abs(f(root)) < 1e-12 * max(scale, 1.0)


def test_gamma2_initial_rejects_bad_leading_coefficient(params):
    # slope -0.9 makes (m^2+m)c1 + (1+m)c2 negative for these rates
    from dividend2d import ParameterError

    with pytest.raises(ParameterError, match="leading coefficient"):
        gamma2_initial(-0.9, params)


def test_solve_g1_g3_reproduces_seed_identity(params):
    g2 = gamma2_initial(0.1, params)
    g1, g3 = solve_g1_g3(g2, params)
    assert g1 == pytest.approx(0.1 * g2, rel=1e-9)
    assert g3 < 0.0 < g1
    assert sqeq_residual(g1, g2, params) < 1e-9
    assert sqeq_residual(g3, g2, params) < 1e-9


def test_advance_matches_bisection_oracle(params, barrier):
    seqs = sequences_for(barrier, params)
    step0 = seqs.steps[0]
    nxt = advance_gamma2(step0, barrier.a, params)
    assert nxt == pytest.approx(G2_AFTER_ONE_ADVANCE, rel=1e-12)

    # oracle: bisection on the linkage-substituted quadratic above g2_0
    alpha = params.claims.rate
    s = step0.g3 - barrier.a * step0.g2
    a = barrier.a
    A2 = (a * a + a) * params.c1 + (1.0 + a) * params.c2
    B2 = s * (2 * params.c1 * a + params.c1 + params.c2) - (params.lam + params.q) * (1 + a) + alpha * (
        a * params.c1 + params.c2
    )
    C2 = params.c1 * s * s + (params.c1 * alpha - params.lam - params.q) * s - alpha * params.q
    f = lambda g: A2 * g * g + B2 * g + C2
    assert bisect(f, step0.g2 + 1e-9, step0.g2 + 100.0) == pytest.approx(nxt, rel=1e-10)


def test_advance_monotone_over_twenty_steps(params, barrier):
    seqs = sequences_for(barrier, params, min_terms=21)
    g2s = [s.g2 for s in seqs.steps[:21]]
    assert all(b > a for a, b in zip(g2s, g2s[1:]))
    assert all(s.disc_g2 > 0.0 for s in seqs.steps[:21])


def test_build_sequences_invariants_all_slopes(params):
    for a in (0.1, 0.2, 0.5, 1.0):
        bar = BarrierSpec.reflection(a, 14.0, params)
        seqs = build_sequences(bar, params, min_terms=60)
        assert invariant_violations(seqs, params) == []
        assert seqs.primed_steps[0].D == pytest.approx(1.0, abs=1e-12)
        assert math.isfinite(seqs.E)


def test_corner_sum_terms_shrink(params, barrier):
    # d'Alembert-style decay of the terms defining the matching constant
    seqs = sequences_for(barrier, params, min_terms=40)
    alpha = params.claims.rate
    g1, g2, g3, ds = seqs.arrays(primed=False)
    terms = np.abs(ds * (g1 - g3) / (g1 + g2 + alpha))
    ratios = terms[1:] / terms[:-1]
    assert ratios[30] < ratios[5]
    assert ratios[30] < 1e-2


def test_asymptotic_ratios_at_k40(params):
    for a in (0.1, 0.2, 0.5, 1.0):
        bar = BarrierSpec.reflection(a, 14.0, params)
        seqs = sequences_for(bar, params, min_terms=60)
        assert asymptotic_ratio_violations(seqs, params, k=40, rtol=0.01) == []


def test_nonconvergence_reported(params, barrier):
    with pytest.raises(NonConvergenceError, match="not converged"):
        build_sequences(barrier, params, max_terms=4, tail_tol=1e-30)


def test_csv_round_trip(params, barrier):
    seqs = sequences_for(barrier, params)
    dump = sequences_to_csv(seqs)
    lines = dump.strip().splitlines()
    assert lines[0] == "k,g1,g2,g3,D,g1p,g2p,g3p,Dp"
    assert len(lines) == len(seqs.steps) + 1
    rows = [line.split(",") for line in lines[1:]]
    g2s = [float(r[2]) for r in rows]
    assert all(b > a for a, b in zip(g2s, g2s[1:]))
    assert float(rows[0][4]) == pytest.approx(seqs.steps[0].D, rel=1e-15)


def test_cache_returns_same_object(params, barrier):
    assert sequences_for(barrier, params) is sequences_for(barrier, params)


@st.composite
def valid_setups(draw):
    c2 = draw(st.floats(0.8, 6.0))
    c1 = c2 * draw(st.floats(1.1, 3.0))
    alpha = draw(st.floats(0.4, 4.0))
    lam = c2 * alpha * draw(st.floats(0.1, 0.85))
    q = draw(st.floats(0.02, 0.8))
    a = c2 * draw(st.floats(0.05, 0.85))
    params = ModelParams(c1=c1, c2=c2, lam=lam, claims=ExponentialClaims(alpha), q=q)
    return params, BarrierSpec.reflection(a, 8.0, params)


@settings(deadline=None, max_examples=40)
@given(valid_setups())
def test_family_invariants_hold_generically(setup):
    params, bar = setup
    seqs = build_sequences(bar, params, max_terms=120, tail_tol=1e-10, min_terms=8)
    assert invariant_violations(seqs, params) == []
