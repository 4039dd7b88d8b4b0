"""Communication-time generation and event statistics.

Three discrete schemes decide when broadcast values refresh: a synchronous
periodic clock, a centralized state-dependent trigger with an enforced
dwell, and a distributed per-agent trigger with a positive threshold
floor.  Trigger conditions are evaluated at integration nodes, so trigger
detection lags the continuous-time law by at most one step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import WeightedDigraph

GRID_SLACK = 1e-9  # absorbs float noise when node times are k*h products


@dataclass(frozen=True)
class Continuous:
    """Neighbor information available at every instant (no events)."""


@dataclass(frozen=True)
class Periodic:
    """All agents broadcast synchronously every ``delta`` seconds from t = 0."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError(f"periodic delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class CentralizedEvent:
    """Synchronous broadcasts when the drift condition fails, at least
    ``tau`` apart.  Requires ``0 < kappa < 1``."""

    kappa: float
    tau: float

    def __post_init__(self):
        if not (0.0 < self.kappa < 1.0):
            raise ValidationError(f"kappa must lie in (0, 1), got {self.kappa}")
        if not self.tau > 0:
            raise ValidationError(f"dwell tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class DistributedEvent:
    """Asynchronous per-agent triggers with thresholds ``eps`` (all positive)."""

    eps: np.ndarray

    def __post_init__(self):
        eps = np.atleast_1d(np.asarray(self.eps, dtype=float))
        if eps.size == 0 or not (eps > 0).all():
            raise ValidationError("every eps_i must be strictly positive")
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)


@dataclass(frozen=True)
class EulerScheme:
    """Forward-Euler discretization with stride ``delta`` (implicit broadcasts)."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError(f"euler delta must be positive, got {self.delta}")


CommScheme = Continuous | Periodic | CentralizedEvent | DistributedEvent | EulerScheme


def scheme_dict(scheme: CommScheme) -> dict:
    """JSON-friendly description of a scheme."""
    if isinstance(scheme, Continuous):
        return {"kind": "continuous"}
    if isinstance(scheme, Periodic):
        return {"kind": "periodic", "delta": scheme.delta}
    if isinstance(scheme, CentralizedEvent):
        return {"kind": "centralized_event", "kappa": scheme.kappa, "tau": scheme.tau}
    if isinstance(scheme, DistributedEvent):
        return {"kind": "distributed_event", "eps": [float(e) for e in scheme.eps]}
    if isinstance(scheme, EulerScheme):
        return {"kind": "euler", "delta": scheme.delta}
    raise ValidationError(f"unknown scheme {scheme!r}")


def scheme_from_dict(d: dict, n_agents: int | None = None) -> CommScheme:
    """Inverse of :func:`scheme_dict`; scalar eps broadcasts to all agents."""
    kind = d.get("kind")
    if kind == "continuous":
        return Continuous()
    if kind == "periodic":
        return Periodic(delta=float(d["delta"]))
    if kind == "centralized_event":
        return CentralizedEvent(kappa=float(d["kappa"]), tau=float(d["tau"]))
    if kind == "distributed_event":
        eps = d["eps"]
        if np.isscalar(eps):
            if n_agents is None:
                raise ValidationError("scalar eps needs a known agent count")
            eps = np.full(n_agents, float(eps))
        return DistributedEvent(eps=np.asarray(eps, dtype=float))
    if kind == "euler":
        return EulerScheme(delta=float(d["delta"]))
    raise ValidationError(f"unknown scheme kind {kind!r}")


def periodic_due(t: float, delta: float, last: float, slack: float = GRID_SLACK) -> bool:
    """True when the next synchronous broadcast is due.

    ``last`` is the previous broadcast time (-inf or NaN for "never", which
    makes t = 0 due).  The slack absorbs node times formed as k*h products.
    """
    if not delta > 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    if last is None or not math.isfinite(last):
        return True
    return t - last >= delta - slack


def _centered(y: np.ndarray) -> np.ndarray:
    return y - y.mean(axis=0, keepdims=True)


def _centralized_due(x, x_at_last, kappa, t_last, tau, t) -> bool:
    if t - t_last < tau:
        return False
    dev = _centered(x_at_last - x)
    xc = _centered(x)
    return float(np.sum(dev * dev)) > kappa * float(np.sum(xc * xc))


def centralized_trigger_check(state, x_at_last: np.ndarray, kappa: float,
                              t_last: float, tau: float) -> bool:
    """Broadcast-now test for the centralized law.

    Fires at the first instant past the dwell where the centered drift
    since the last broadcast exceeds kappa times the centered current
    state: ||Pi (x(t_last) - x(t))||^2 > kappa ||Pi x(t)||^2.
    """
    if not (0.0 < kappa < 1.0):
        raise ValidationError(f"kappa must lie in (0, 1), got {kappa}")
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    return _centralized_due(state.x, x_at_last, kappa, t_last, tau, state.t)


def distributed_trigger_check(agent: int, state, g: WeightedDigraph, eps_i: float) -> bool:
    """Broadcast-now test for one agent under the distributed law.

    Fires when 4 d_out^i ||xhat^i - x^i||^2 exceeds
    sum_j a_ij ||xhat^i - xhat^j||^2 + eps_i^2, all evaluated on last
    broadcast values.
    """
    if not eps_i > 0:
        raise ValidationError(f"eps_i must be positive, got {eps_i}")
    w = g.weights[agent]
    drift = state.x_hat[agent] - state.x[agent]
    lhs = 4.0 * float(w.sum()) * float(drift @ drift)
    diffs = state.x_hat[agent][None, :] - state.x_hat
    rhs = float(w @ np.sum(diffs * diffs, axis=1)) + eps_i**2
    return lhs > rhs


def _cascade(x: np.ndarray, x_hat: np.ndarray, weights: np.ndarray,
             eps2: np.ndarray, dout: np.ndarray | None = None) -> list[int]:
    """Resolve simultaneous triggers at one node; mutates ``x_hat``.

    Sweeps agents in ascending order, refreshing broadcast values
    immediately, until a full sweep fires nothing.  A refreshed agent has
    zero drift and cannot re-fire at the same node, so at most N sweeps
    run; the guard exists for defensive termination only.
    """
    n = x.shape[0]
    if dout is None:
        dout = weights.sum(axis=1)
    # vectorized prechecks: the eps floor alone, then the full condition
    delta = x_hat - x
    lhs = 4.0 * dout * (delta * delta).sum(axis=1)
    if (lhs <= eps2).all():
        return []
    diffs = x_hat[:, None, :] - x_hat[None, :, :]
    rhs = (weights * (diffs * diffs).sum(axis=2)).sum(axis=1) + eps2
    if (lhs <= rhs).all():
        return []
    fired: list[int] = []
    for _ in range(n + 1):
        any_new = False
        for i in range(n):
            if i in fired:
                continue
            drift = x_hat[i] - x[i]
            lhs_i = 4.0 * dout[i] * float(drift @ drift)
            diffs_i = x_hat[i][None, :] - x_hat
            rhs_i = float(weights[i] @ np.sum(diffs_i * diffs_i, axis=1)) + eps2[i]
            if lhs_i > rhs_i:
                x_hat[i] = x[i]
                fired.append(i)
                any_new = True
        if not any_new:
            return sorted(fired)
    raise AssertionError("cascade did not settle within N sweeps")


def cascade_resolve(state, g: WeightedDigraph, eps) -> list[int]:
    """Apply the distributed law repeatedly at one instant.

    Returns the sorted list of agents that broadcast; their rows of
    ``state.x_hat`` are refreshed in place and ``state.last_event``
    updated.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if not (eps > 0).all():
        raise ValidationError("every eps_i must be strictly positive")
    fired = _cascade(state.x, state.x_hat, g.weights, eps**2)
    for i in fired:
        state.last_event[i] = state.t
    return fired


@dataclass(frozen=True)
class EventStats:
    """Per-agent broadcast counts and inter-event gaps for one trace.

    ``min_gaps[i]`` is the horizon length when agent i logged fewer than
    two events.  ``zeno_flag`` is the sampled accumulation proxy: it is set
    when some gap is at most twice the integration step.
    """

    counts: np.ndarray
    min_gaps: np.ndarray
    global_min_gap: float
    zeno_flag: bool
    horizon: float


def event_stats(trace) -> EventStats:
    """Summarize the event log of a trace (see :class:`EventStats`)."""
    n = trace.n_agents
    horizon = float(trace.t[-1] - trace.t[0]) if trace.t.size else 0.0
    counts = np.zeros(n, dtype=int)
    min_gaps = np.full(n, horizon)
    for i in range(n):
        times = np.sort(trace.event_times[trace.event_agents == i])
        counts[i] = times.size
        if times.size >= 2:
            min_gaps[i] = float(np.diff(times).min())
    global_min = float(min_gaps.min()) if n else math.inf
    return EventStats(
        counts=counts,
        min_gaps=min_gaps,
        global_min_gap=global_min,
        zeno_flag=bool(counts.sum() > 0 and global_min <= 2.0 * trace.h),
        horizon=horizon,
    )
