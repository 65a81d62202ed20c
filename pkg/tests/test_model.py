import numpy as np
import pytest
from hypothesis import given, strategies as st

from dividend2d import (
    BarrierSpec,
    ExponentialClaims,
    ModelParams,
    ParameterError,
    Region,
    Reserves,
    SampledClaims,
    UnsupportedDistributionError,
    classify_point,
    validate_barrier,
    validate_model,
)
from dividend2d.model import ON_LINE_TOL, model_violations, require_exponential


def test_example_params_valid(params):
    assert validate_model(params) is params


def test_c1_equal_c2_rejected(params):
    bad = ModelParams(c1=3.0, c2=3.0, lam=1.0, claims=params.claims, q=0.1)
    with pytest.raises(ParameterError, match="c1 > c2"):
        validate_model(bad)


def test_net_profit_company2_rejected(params):
    # lam * E[U] = 0.5 exceeds c2 = 0.4
    bad = ModelParams(c1=4.0, c2=0.4, lam=1.0, claims=params.claims, q=0.1)
    with pytest.raises(ParameterError, match="net profit for company 2"):
        validate_model(bad)


def test_all_violations_reported():
    bad = ModelParams(c1=2.0, c2=3.0, lam=-1.0, claims=ExponentialClaims(2.0), q=0.0)
    v = model_violations(bad)
    assert len(v) >= 3
    joined = " ".join(v)
    assert "c1 > c2" in joined and "lambda" in joined and "q > 0" in joined


def test_exponential_claims():
    with pytest.raises(ParameterError):
        ExponentialClaims(rate=0.0)
    c = ExponentialClaims(rate=2.0)
    assert c.mean() == 0.5
    rng = np.random.default_rng(0)
    xs = c.sample(rng, 20000)
    assert abs(xs.mean() - 0.5) < 0.02


def test_sampled_claims_rejected_by_analytics():
    dist = SampledClaims(inverse_cdf=lambda u: 1.0 + 0.0 * u, mean_value=1.0)
    rng = np.random.default_rng(0)
    assert np.all(dist.sample(rng, 5) == 1.0)
    with pytest.raises(UnsupportedDistributionError):
        require_exponential(dist)


def test_reflection_construction(params):
    bar = BarrierSpec.reflection(0.1, 14.0, params)
    assert bar.delta1 == params.c1 + 1.0
    assert bar.delta2 == params.c2 - 0.1
    assert bar.delta0 == (params.c1 + 1.0) + (params.c2 - 0.1)
    assert bar.is_reflection(params)
    with pytest.raises(ParameterError, match="c2 > a"):
        BarrierSpec.reflection(3.0, 14.0, params)


def test_barrier_requires_company1_drain(params):
    bar = BarrierSpec(a=0.1, b=14.0, delta1=2.0, delta2=1.0)
    with pytest.raises(ParameterError, match="delta1"):
        validate_barrier(bar, params)


def test_classify_examples(params, barrier):
    assert classify_point(Reserves(0.0, 14.0), barrier) == Region.ON_LINE
    assert classify_point(Reserves(1.0, 2.0), barrier) == Region.COMPLEMENT
    assert classify_point(Reserves(-0.5, 3.0), barrier) == Region.OUTSIDE_QUADRANT
    assert classify_point(Reserves(1.0, 14.5), barrier) == Region.INTERIOR


@given(
    u1=st.floats(-5.0, 40.0),
    u2=st.floats(-5.0, 40.0),
    a=st.floats(0.05, 2.5),
    b=st.floats(0.5, 30.0),
)
def test_classify_is_a_partition(u1, u2, a, b):
    bar = BarrierSpec(a=a, b=b, delta1=1.0, delta2=1.0)
    region = classify_point(Reserves(u1, u2), bar)
    if min(u1, u2) < 0.0:
        assert region == Region.OUTSIDE_QUADRANT
    elif abs(u2 - (b - a * u1)) <= ON_LINE_TOL:
        assert region == Region.ON_LINE
    elif u2 > b - a * u1:
        assert region == Region.INTERIOR
    else:
        assert region == Region.COMPLEMENT


@given(u1=st.floats(0.01, 10.0), t=st.floats(0.0, 1.0))
def test_reflection_velocity_stays_on_line(params, u1, t):
    # on-barrier velocity (c - delta) = (-1, a): sliding toward (0, b)
    bar = BarrierSpec.reflection(0.4, 12.0, params)
    dt = t * u1  # stay within the segment
    y1 = u1 - dt
    y2 = bar.line_height(u1) + bar.a * dt
    assert classify_point(Reserves(y1, y2), bar) == Region.ON_LINE
