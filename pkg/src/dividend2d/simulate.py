"""Monte Carlo engine for both controls, exact in time between claims.

Between claims every trajectory is piecewise linear, so barrier hits,
axis crossings and payout intervals are solved in closed form; the only
randomness consumed is claim times and sizes.  Each path draws from its
own counter-based substream keyed by (master_seed, path index), which
makes every estimate a pure function of the seed, independent of any
batching or threading arrangement.

The inner event loops are numba-compiled when numba is importable and
run as plain Python otherwise (same code, same arithmetic).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    BarrierSpec,
    ModelParams,
    Reserves,
    validate_barrier,
    validate_model,
)
from .impulse import ImpulseSpec

try:  # pragma: no cover - exercised implicitly
    from numba import njit as _njit

    _jit = _njit(cache=True)
except ImportError:  # pragma: no cover
    def _jit(f):
        return f

#: path-status codes shared by the kernels
_DONE, _CENSORED, _NEED_MORE = 0, 1, 2

#: trace event codes -> labels for the CSV surface
TRACE_EVENTS = {
    0: "start",
    1: "enter_payout",
    2: "reach_line_above",
    3: "claim",
    4: "ruin",
    5: "censored",
}

_CHUNK = 256


@dataclass(frozen=True)
class SimConfig:
    """Path count, seeding, horizon and which moments to estimate."""

    n_paths: int
    master_seed: int
    max_time: float | None = None
    moment_orders: tuple[int, ...] = (1,)

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths >= 1 required, got {self.n_paths}")
        if any(n < 1 for n in self.moment_orders):
            raise ValueError("moment orders must be positive integers")


@dataclass(frozen=True)
class DividendEstimate:
    """Monte Carlo moments of the discounted dividend stream.

    ``moments[n] = (mean of D^n, standard error)``; ``ruin_time_mean``
    averages over paths that ruined before censoring.
    """

    moments: dict[int, tuple[float, float]]
    ruin_time_mean: float
    truncation_bias_bound: float
    n_paths: int
    n_censored: int = 0


def default_max_time(params: ModelParams, payout_rate: float, bias_tol: float = 1e-4) -> float:
    """Horizon making the censored-tail value bound at most ``bias_tol``.

    Remaining discounted payout after T is below e^{-qT} * rate / q.
    """
    return math.log(payout_rate / (params.q * bias_tol)) / params.q


def _path_rng(master_seed: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(master_seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# kernels


def _barrier_kernel_py(
    u1, u2, a, b, c1, c2, d1, d2, q, max_time, tol, ts, xs, trace_t, trace_y1, trace_y2, trace_ev
):
    """Event loop for one refracted path.

    Returns (D, sigma, status, n_claims_used, n_trace).  Flow segments are
    advanced to the earliest of: claim, barrier hit, axis crossing, or the
    horizon.  A claim landing exactly on a crossing time is processed
    first (the region is re-evaluated after the jump).

    When the payout drift points back below the line while the premium
    drift points above it, the line attracts from both sides and the
    trajectory slides along it (the chattering limit): payout accrues at
    the fraction of time spent in the payout set that keeps the motion on
    the line.  Reflection is the boundary case of this with fraction 1.
    """
    d0 = d1 + d2
    v1b = c1 - d1
    v2b = c2 - d2
    rate_f = v2b + a * v1b  # growth of y2 - (b - a*y1) inside the payout set
    approach = c2 + a * c1  # the same growth below the set; always positive
    y1, y2, t, D = u1, u2, 0.0, 0.0
    ntr = 0
    cap = trace_t.shape[0]
    if cap > 0:
        trace_t[0] = 0.0
        trace_y1[0] = y1
        trace_y2[0] = y2
        trace_ev[0] = 0
        ntr = 1
    n = ts.shape[0]
    for i in range(n):
        rem = ts[i]
        while rem > 0.0:
            f = y2 - (b - a * y1)
            if f < -tol:
                # premium drift toward the barrier; no payout, no ruin
                t_hit = -f / approach
                if t_hit >= rem:
                    y1 += c1 * rem
                    y2 += c2 * rem
                    t += rem
                    rem = 0.0
                else:
                    y1 += c1 * t_hit
                    y2 = b - a * y1
                    t += t_hit
                    rem -= t_hit
                    if ntr < cap:
                        trace_t[ntr] = t
                        trace_y1[ntr] = y1
                        trace_y2[ntr] = y2
                        trace_ev[ntr] = 1
                        ntr += 1
                if t >= max_time:
                    return D, t, _CENSORED, i, ntr
            else:
                sliding = f <= tol and rate_f < 0.0
                if sliding:
                    # Filippov fraction keeping the f-velocity at zero
                    theta = approach / (approach - rate_f)
                    w1 = theta * v1b + (1.0 - theta) * c1
                    w2 = theta * v2b + (1.0 - theta) * c2
                    payrate = theta * d0
                else:
                    w1 = v1b
                    w2 = v2b
                    payrate = d0
                dt = rem
                kind = 0
                if w1 < 0.0:
                    tt = y1 / (-w1)
                    if tt < dt:
                        dt = tt
                        kind = 1
                if w2 < 0.0:
                    tt = y2 / (-w2)
                    if tt < dt:
                        dt = tt
                        kind = 1
                if not sliding and rate_f < 0.0 and f > tol:
                    tt = f / (-rate_f)  # descends onto the line, then slides
                    if tt < dt:
                        dt = tt
                        kind = 2
                if t + dt > max_time:
                    dt = max_time - t
                    kind = 3
                D += payrate * (math.exp(-q * t) - math.exp(-q * (t + dt))) / q
                y1 += w1 * dt
                y2 += w2 * dt
                t += dt
                rem -= dt
                if kind == 1:
                    if ntr < cap:
                        trace_t[ntr] = t
                        trace_y1[ntr] = y1
                        trace_y2[ntr] = y2
                        trace_ev[ntr] = 4
                        ntr += 1
                    return D, t, _DONE, i, ntr
                if kind == 3:
                    if ntr < cap:
                        trace_t[ntr] = t
                        trace_y1[ntr] = y1
                        trace_y2[ntr] = y2
                        trace_ev[ntr] = 5
                        ntr += 1
                    return D, t, _CENSORED, i, ntr
                if kind == 2:
                    y2 = b - a * y1
                    if ntr < cap:
                        trace_t[ntr] = t
                        trace_y1[ntr] = y1
                        trace_y2[ntr] = y2
                        trace_ev[ntr] = 2
                        ntr += 1
        y1 -= xs[i]
        y2 -= xs[i]
        if ntr < cap:
            trace_t[ntr] = t
            trace_y1[ntr] = y1
            trace_y2[ntr] = y2
            trace_ev[ntr] = 3
            ntr += 1
        if y1 < 0.0 or y2 < 0.0:
            if ntr < cap:
                trace_t[ntr] = t
                trace_y1[ntr] = y1
                trace_y2[ntr] = y2
                trace_ev[ntr] = 4
                ntr += 1
            return D, t, _DONE, i + 1, ntr
    return D, t, _NEED_MORE, n, ntr


def _impulse_kernel_py(u1, u2, K, c1, c2, q, max_cycles, ts, xs):
    """Renewal loop for one impulse path.

    ``ts`` supplies every exponential waiting time (cycle waits and the
    inter-claim gaps of the recovery race alike, in consumption order);
    ``xs`` supplies claim sizes.  Returns (D, sigma, status, used_t,
    used_x, cycles).
    """
    mn = u1 if u1 < u2 else u2
    gap = u2 - u1
    t, D = 0.0, 0.0
    it, ix = 0, 0
    nt, nx = ts.shape[0], xs.shape[0]
    for cycle in range(max_cycles):
        if it >= nt or ix >= nx:
            return D, t, _NEED_MORE, it, ix, cycle
        w = ts[it]
        it += 1
        D += c1 * (math.exp(-q * t) - math.exp(-q * (t + w))) / q
        t += w
        x = xs[ix]
        ix += 1
        if x > mn:
            return D, t, _DONE, it, ix, cycle + 1
        # company 2 recovers from u2 - x back to u2; company 1 races the
        # declining boundary max(0, gap - (c1 - c2) s)
        z = u2 - x
        s = 0.0
        while True:
            if it >= nt or ix >= nx:
                return D, t, _NEED_MORE, it, ix, cycle
            t_reach = (u2 - z) / c2
            w2 = ts[it]
            it += 1
            if t_reach < w2:
                tau = s + t_reach
                D += ((c1 - c2) * tau - K) * math.exp(-q * (t + tau))
                t += tau
                break
            s += w2
            z += c2 * w2
            z -= xs[ix]
            ix += 1
            floor = gap - (c1 - c2) * s
            if floor < 0.0:
                floor = 0.0
            if z < floor:
                return D, t + s, _DONE, it, ix, cycle + 1
    return D, t, _CENSORED, it, ix, max_cycles


_barrier_kernel = _jit(_barrier_kernel_py)
_impulse_kernel = _jit(_impulse_kernel_py)

_EMPTY_F = np.empty(0, dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)


@dataclass
class PathResult:
    D: float
    sigma: float
    censored: bool


def _run_barrier_path(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    rng: np.random.Generator,
    max_time: float,
    trace_cap: int = 0,
):
    scale_t = math.inf if params.lam == 0.0 else 1.0 / params.lam
    ts = rng.exponential(scale_t, _CHUNK)
    xs = params.claims.sample(rng, _CHUNK)
    if trace_cap > 0:
        tr = (
            np.empty(trace_cap),
            np.empty(trace_cap),
            np.empty(trace_cap),
            np.empty(trace_cap, dtype=np.int64),
        )
    else:
        tr = (_EMPTY_F, _EMPTY_F, _EMPTY_F, _EMPTY_I)
    while True:
        D, sig, status, used, ntr = _barrier_kernel(
            u.u1,
            u.u2,
            barrier.a,
            barrier.b,
            params.c1,
            params.c2,
            barrier.delta1,
            barrier.delta2,
            params.q,
            max_time,
            1e-12,
            ts,
            xs,
            *tr,
        )
        if status != _NEED_MORE:
            return D, sig, status, tr, ntr
        ts = np.concatenate([ts, rng.exponential(scale_t, _CHUNK)])
        xs = np.concatenate([xs, params.claims.sample(rng, _CHUNK)])


def simulate_refracted_path(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    rng: np.random.Generator,
    max_time: float | None = None,
) -> PathResult:
    """One controlled path: discounted dividends and the ruin time.

    ``sigma`` is the censoring horizon when the path is censored.
    """
    if max_time is None:
        max_time = default_max_time(params, barrier.delta0)
    D, sig, status, _, _ = _run_barrier_path(u, barrier, params, rng, max_time)
    return PathResult(D=D, sigma=sig, censored=status == _CENSORED)


def trace_refracted_path(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    seed: int,
    max_time: float | None = None,
    max_events: int = 100_000,
) -> list[tuple[float, float, float, str]]:
    """Event log (t, y1, y2, event) of a single path, for debugging."""
    if max_time is None:
        max_time = default_max_time(params, barrier.delta0)
    rng = _path_rng(seed, 0)
    _, _, _, tr, ntr = _run_barrier_path(u, barrier, params, rng, max_time, trace_cap=max_events)
    t_a, y1_a, y2_a, ev_a = tr
    return [
        (float(t_a[i]), float(y1_a[i]), float(y2_a[i]), TRACE_EVENTS[int(ev_a[i])])
        for i in range(ntr)
    ]


def simulate_impulse_path(
    spec: ImpulseSpec,
    params: ModelParams,
    rng: np.random.Generator,
    max_cycles: int = 1_000_000,
) -> PathResult:
    """One impulse-controlled path; censoring = max_cycles exhausted."""
    scale_t = math.inf if params.lam == 0.0 else 1.0 / params.lam
    ts = rng.exponential(scale_t, _CHUNK)
    xs = params.claims.sample(rng, _CHUNK)
    while True:
        D, sig, status, used_t, used_x, _ = _impulse_kernel(
            spec.u1, spec.u2, spec.K, params.c1, params.c2, params.q, max_cycles, ts, xs
        )
        if status != _NEED_MORE:
            return PathResult(D=D, sigma=sig, censored=status == _CENSORED)
        ts = np.concatenate([ts, rng.exponential(scale_t, _CHUNK)])
        xs = np.concatenate([xs, params.claims.sample(rng, _CHUNK)])


def _accumulate(
    cfg: SimConfig, payout_rate: float, params: ModelParams, one_path
) -> DividendEstimate:
    """Streaming moments in path-index order (threading-invariant)."""
    orders = tuple(sorted(set(cfg.moment_orders)))
    sums = {n: 0.0 for n in orders}
    sq_sums = {n: 0.0 for n in orders}
    ruin_sum, ruin_count, censored = 0.0, 0, 0
    bias_sum = 0.0
    for i in range(cfg.n_paths):
        res = one_path(_path_rng(cfg.master_seed, i))
        for n in orders:
            dn = res.D**n
            sums[n] += dn
            sq_sums[n] += dn * dn
        if res.censored:
            censored += 1
            bias_sum += math.exp(-params.q * res.sigma) * payout_rate / params.q
        else:
            ruin_sum += res.sigma
            ruin_count += 1
    moments = {}
    for n in orders:
        mean = sums[n] / cfg.n_paths
        var = max(sq_sums[n] / cfg.n_paths - mean * mean, 0.0)
        moments[n] = (mean, math.sqrt(var / cfg.n_paths))
    return DividendEstimate(
        moments=moments,
        ruin_time_mean=ruin_sum / ruin_count if ruin_count else math.nan,
        truncation_bias_bound=bias_sum / cfg.n_paths,
        n_paths=cfg.n_paths,
        n_censored=censored,
    )


def estimate_barrier_moments(
    u: Reserves,
    barrier: BarrierSpec,
    params: ModelParams,
    cfg: SimConfig,
) -> DividendEstimate:
    """Moments of D for the refracted control.

    The reported truncation bound is the exact censoring-tail bound
    e^{-q max_time} * delta0 / q scaled by the censored fraction.
    """
    validate_model(params)
    validate_barrier(barrier, params)
    max_time = cfg.max_time if cfg.max_time is not None else default_max_time(params, barrier.delta0)
    return _accumulate(
        cfg,
        barrier.delta0,
        params,
        lambda rng: simulate_refracted_path(u, barrier, params, rng, max_time),
    )


def estimate_impulse_moments(
    spec: ImpulseSpec,
    params: ModelParams,
    cfg: SimConfig,
    max_cycles: int = 1_000_000,
) -> DividendEstimate:
    """Moments of D for the impulse control.

    The bias bound uses c1/q: every payout stream is dominated by paying
    the larger premium forever.
    """
    validate_model(params)
    return _accumulate(
        cfg,
        params.c1,
        params,
        lambda rng: simulate_impulse_path(spec, params, rng, max_cycles),
    )
