"""Network state evolution: gradient-flow fields, RK4 integration, and the
scenario-level simulation loop with topology switching and discrete
communication.

Two state blocks evolve per agent: the estimate ``x^i`` and an integral
correction ``v^i`` driven by the weighted disagreement with neighbors.  The
sum of the ``v^i`` is a constant of motion, so runs must start from
``sum_i v^i(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import schedulers
from .costs import NetworkCost, minimize_global
from .errors import (
    BadInitialization,
    NumericalBlowup,
    OracleFailure,
    Unbounded,
    ValidationError,
)
from .graph import WeightedDigraph, is_strongly_connected, is_weight_balanced, out_laplacian

if TYPE_CHECKING:  # pragma: no cover
    from .scenarios import Scenario

BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class AlgorithmParams:
    """Gradient gain ``alpha`` and coupling gain ``beta`` (both positive)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValidationError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")


@dataclass
class NetworkState:
    """Simulation state at time ``t``.

    ``x`` and ``v`` are (N, d); ``x_hat`` holds each agent's last broadcast
    value and ``last_event`` the time of that broadcast.
    """

    t: float
    x: np.ndarray
    v: np.ndarray
    x_hat: np.ndarray
    last_event: np.ndarray


@dataclass(frozen=True)
class SwitchingSchedule:
    """Piecewise-constant topology: cycle through ``graphs`` every ``dwell``.

    Every member must be strongly connected and weight balanced; that is
    checked at construction.
    """

    graphs: tuple[WeightedDigraph, ...]
    dwell: float
    order: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.graphs:
            raise ValidationError("switching schedule needs at least one graph")
        if not self.dwell > 0:
            raise ValidationError("dwell must be positive")
        order = self.order or tuple(range(len(self.graphs)))
        if any(not (0 <= i < len(self.graphs)) for i in order):
            raise ValidationError("switching order indexes outside the graph list")
        object.__setattr__(self, "order", order)
        for k, g in enumerate(self.graphs):
            if not is_strongly_connected(g):
                raise ValidationError(f"switching graph {k} is not strongly connected")
            if not is_weight_balanced(g):
                raise ValidationError(f"switching graph {k} is not weight balanced")


@dataclass
class Trace:
    """Time-indexed samples of a run plus the communication event log.

    Arrays are indexed (sample, agent, coordinate); ``err`` holds the
    per-agent distance to the oracle optimizer (NaN when no oracle value is
    available).  Event agents are 0-based in memory and 1-based in CSV
    output.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    x_hat: np.ndarray
    err: np.ndarray
    event_agents: np.ndarray
    event_times: np.ndarray
    scheme: dict
    h: float
    stride: int
    alpha: float
    beta: float
    x_star: np.ndarray | None = None
    V: np.ndarray | None = None

    @property
    def n_agents(self) -> int:
        return self.x.shape[1]

    @property
    def dim(self) -> int:
        return self.x.shape[2]

    def events_of(self, agent: int) -> np.ndarray:
        """Broadcast times of one agent (0-based index)."""
        return self.event_times[self.event_agents == agent]

    def to_csv(self, path) -> None:
        """Write ``t,agent,x,v,err,event`` rows, one per (sample, agent).

        The event column flags whether the agent broadcast in the interval
        since the previous sample (the first sample covers t = 0 events).
        Vector coordinates are ';'-joined.
        """
        flags = np.zeros((self.t.size, self.n_agents), dtype=int)
        for a, te in zip(self.event_agents, self.event_times):
            k = int(np.searchsorted(self.t, te - 1e-12))
            if k < self.t.size:
                flags[k, a] = 1
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,agent,x,v,err,event\n")
            for k, tk in enumerate(self.t):
                for a in range(self.n_agents):
                    xs = ";".join(f"{c:.17g}" for c in self.x[k, a])
                    vs = ";".join(f"{c:.17g}" for c in self.v[k, a])
                    fh.write(f"{tk:.17g},{a + 1},{xs},{vs},{self.err[k, a]:.17g},{flags[k, a]}\n")

    def events_to_csv(self, path) -> None:
        """Write the raw event log as ``agent,t`` rows (agent 1-based)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("agent,t\n")
            for a, te in zip(self.event_agents, self.event_times):
                fh.write(f"{a + 1},{te:.17g}\n")


FieldFn = Callable[[NetworkState], tuple[np.ndarray, np.ndarray]]


def continuous_field(state: NetworkState, g: WeightedDigraph, nc: NetworkCost,
                     p: AlgorithmParams) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand sides with instantaneous neighbor information.

    dx^i = -alpha grad f^i(x^i) - beta sum_j a_ij (x^i - x^j) - v^i
    dv^i =  alpha beta sum_j a_ij (x^i - x^j)
    """
    lap_x = out_laplacian(g) @ state.x
    dx = -p.alpha * nc.grad_stack(state.x) - p.beta * lap_x - state.v
    return dx, p.alpha * p.beta * lap_x


def sampled_field(state: NetworkState, g: WeightedDigraph, nc: NetworkCost,
                  p: AlgorithmParams) -> tuple[np.ndarray, np.ndarray]:
    """Same fields but disagreement terms use the last broadcast values only."""
    lap_xh = out_laplacian(g) @ state.x_hat
    dx = -p.alpha * nc.grad_stack(state.x) - p.beta * lap_xh - state.v
    return dx, p.alpha * p.beta * lap_xh


def simplified_field(state: NetworkState, g: WeightedDigraph,
                     nc: NetworkCost) -> tuple[np.ndarray, np.ndarray]:
    """Reduced variant without gains or disagreement damping in dx.

    dx^i = -grad f^i(x^i) - v^i,  dv^i = sum_j a_ij (x^i - x^j).
    Certified for strictly convex costs over connected undirected graphs.
    """
    lap_x = out_laplacian(g) @ state.x
    return -nc.grad_stack(state.x) - state.v, lap_x


def rk4_step(field: FieldFn, state: NetworkState, h: float) -> NetworkState:
    """Classical fourth-order one-step update; communication state unchanged."""
    if not h > 0:
        raise ValidationError(f"step must be positive, got {h}")
    k1x, k1v = field(state)
    s2 = replace(state, t=state.t + 0.5 * h, x=state.x + 0.5 * h * k1x, v=state.v + 0.5 * h * k1v)
    k2x, k2v = field(s2)
    s3 = replace(state, t=state.t + 0.5 * h, x=state.x + 0.5 * h * k2x, v=state.v + 0.5 * h * k2v)
    k3x, k3v = field(s3)
    s4 = replace(state, t=state.t + h, x=state.x + h * k3x, v=state.v + h * k3v)
    k4x, k4v = field(s4)
    x = state.x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = state.v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    if not _finite(x, v):
        raise NumericalBlowup(f"state escaped finite range at t = {state.t + h:.6g}")
    return replace(state, t=state.t + h, x=x, v=v)


def _finite(x: np.ndarray, v: np.ndarray) -> bool:
    mx = max(x.max(), -x.min(), v.max(), -v.min())
    return mx <= BLOWUP_LIMIT  # False for nan and +inf as well


def equilibrium(nc: NetworkCost, p: AlgorithmParams) -> tuple[np.ndarray, np.ndarray]:
    """Stationary point of the coupled dynamics.

    All agents sit at the aggregate optimizer and each integral state
    cancels its own scaled local gradient there, so the v block sums to
    zero by optimality.
    """
    x_star = minimize_global(nc)
    n = nc.n_agents
    x_bar = np.tile(x_star, (n, 1))
    v_bar = -p.alpha * nc.grad_stack(x_bar)
    return x_bar, v_bar


def linear_system_matrix(g: WeightedDigraph, p: AlgorithmParams, d: int = 1) -> np.ndarray:
    """Closed-loop matrix on (x, v) for unit-curvature quadratic costs.

    Its spectrum is {-alpha with multiplicity N d} plus {-beta lambda_i}
    over the Laplacian eigenvalues, each with multiplicity d.
    """
    lap = np.kron(out_laplacian(g), np.eye(d))
    nd = g.n * d
    return np.block([
        [-p.alpha * np.eye(nd) - p.beta * lap, -np.eye(nd)],
        [p.alpha * p.beta * lap, np.zeros((nd, nd))],
    ])


def _oracle_or_none(nc: NetworkCost):
    try:
        return minimize_global(nc)
    except (Unbounded, OracleFailure):
        return None


def _resolve_topology(scenario, h: float):
    """Return (graphs, laplacians, order, steps_per_dwell)."""
    sched = getattr(scenario, "schedule", None)
    if sched is None:
        g = scenario.graph
        return (g,), (out_laplacian(g),), (0,), None
    spd = round(sched.dwell / h)
    if spd < 1 or abs(spd * h - sched.dwell) > 1e-9:
        raise ValidationError(f"dwell {sched.dwell} must be a positive multiple of h = {h}")
    laps = tuple(out_laplacian(g) for g in sched.graphs)
    return sched.graphs, laps, sched.order, spd


def _initial_arrays(scenario, n: int, d: int):
    x = np.array(scenario.x0, dtype=float).reshape(n, d).copy()
    v = np.array(scenario.v0, dtype=float).reshape(n, d).copy()
    vsum = np.abs(v.sum(axis=0)).max()
    if vsum > 1e-12 * max(1.0, float(np.abs(v).max())):
        raise BadInitialization(f"initial v must sum to zero per coordinate, |sum| = {vsum:.3e}")
    return x, v


def _sample_steps(n_steps: int, stride: int) -> list[int]:
    ks = list(range(0, n_steps + 1, max(1, stride)))
    if ks[-1] != n_steps:
        ks.append(n_steps)
    return ks


def simulate(scenario: "Scenario") -> Trace:
    """Integrate a scenario with fixed-step RK4 and node-aligned communication.

    At every integration node the active communication scheme is polled
    first (broadcasts update `x_hat` and the event log), the sample is
    recorded, and only then the step to the next node is taken, so
    recorded samples always reflect post-broadcast state.  Topology
    switching happens between steps only.

    Raises BadInitialization when sum_i v^i(0) != 0 and NumericalBlowup
    (carrying the partial trace) when the state escapes the finite range.
    """
    nc = scenario.network
    n, d = nc.n_agents, nc.dim
    p = AlgorithmParams(scenario.alpha, scenario.beta)
    alpha, beta = p.alpha, p.beta
    h = float(scenario.h)
    if not h > 0:
        raise ValidationError(f"h must be positive, got {h}")
    n_steps = round(scenario.t_final / h)
    graphs, laps, order, spd = _resolve_topology(scenario, h)
    x, v = _initial_arrays(scenario, n, d)
    x_hat = x.copy()
    last_event = np.zeros(n)
    scheme = scenario.scheme
    x_star = getattr(scenario, "x_star", None)
    if x_star is None:
        x_star = _oracle_or_none(nc)

    ks = _sample_steps(n_steps, scenario.stride)
    n_smp = len(ks)
    T = np.empty(n_smp)
    X = np.empty((n_smp, n, d))
    V = np.empty((n_smp, n, d))
    XH = np.empty((n_smp, n, d))
    ERR = np.full((n_smp, n), np.nan)
    ev_agents: list[int] = []
    ev_times: list[float] = []

    periodic = isinstance(scheme, schedulers.Periodic)
    centralized = isinstance(scheme, schedulers.CentralizedEvent)
    distributed = isinstance(scheme, schedulers.DistributedEvent)
    continuous = isinstance(scheme, schedulers.Continuous)
    if not (periodic or centralized or distributed or continuous):
        raise ValidationError(f"unsupported scheme for simulate: {scheme!r}")
    if distributed:
        eps = np.asarray(scheme.eps, dtype=float)
        if eps.shape != (n,):
            raise ValidationError(f"eps vector length {eps.shape} != agent count {n}")
        eps2 = eps**2
        douts = tuple(g.out_degrees for g in graphs)
    last_broadcast = -math.inf
    x_at_last = x.copy()
    grad = nc.grad_stack

    def record(si: int, t: float) -> None:
        T[si] = t
        X[si] = x
        V[si] = v
        XH[si] = x if continuous else x_hat
        if x_star is not None:
            ERR[si] = np.linalg.norm(x - x_star[None, :], axis=1)

    def partial(si: int) -> Trace:
        return _make_trace(T[:si], X[:si], V[:si], XH[:si], ERR[:si], ev_agents, ev_times,
                           scenario, scheme, x_star, h)

    si = 0
    gi = 0
    h2 = 0.5 * h
    h6 = h / 6.0
    ab = alpha * beta
    for k in range(n_steps + 1):
        t = k * h
        if spd is not None:
            gi = order[(k // spd) % len(order)]
        lap = laps[gi]
        if periodic:
            if schedulers.periodic_due(t, scheme.delta, last_broadcast):
                x_hat = x.copy()
                last_broadcast = t
                last_event[:] = t
                ev_agents.extend(range(n))
                ev_times.extend([t] * n)
        elif centralized:
            due = k == 0 or schedulers._centralized_due(x, x_at_last, scheme.kappa,
                                                        last_broadcast, scheme.tau, t)
            if due:
                x_hat = x.copy()
                x_at_last = x.copy()
                last_broadcast = t
                last_event[:] = t
                ev_agents.extend(range(n))
                ev_times.extend([t] * n)
        elif distributed:
            if k == 0:
                x_hat = x.copy()
                last_event[:] = 0.0
                ev_agents.extend(range(n))
                ev_times.extend([0.0] * n)
            else:
                fired = schedulers._cascade(x, x_hat, graphs[gi].weights, eps2, douts[gi])
                for i in fired:
                    last_event[i] = t
                    ev_agents.append(i)
                    ev_times.append(t)
        if k == ks[si]:
            record(si, t)
            si += 1
        if k == n_steps:
            break
        # one RK4 step; for sampled communication dv is constant over the step
        if continuous:
            lap_x = lap @ x
            k1x = -alpha * grad(x) - beta * lap_x - v
            k1v = ab * lap_x
            x2 = x + h2 * k1x
            lap_x = lap @ x2
            k2x = -alpha * grad(x2) - beta * lap_x - (v + h2 * k1v)
            k2v = ab * lap_x
            x3 = x + h2 * k2x
            lap_x = lap @ x3
            k3x = -alpha * grad(x3) - beta * lap_x - (v + h2 * k2v)
            k3v = ab * lap_x
            x4 = x + h * k3x
            lap_x = lap @ x4
            k4x = -alpha * grad(x4) - beta * lap_x - (v + h * k3v)
            k4v = ab * lap_x
            x = x + h6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + h6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        else:
            lap_xh = lap @ x_hat
            dv = ab * lap_xh
            q = beta * lap_xh
            k1x = -alpha * grad(x) - q - v
            k2x = -alpha * grad(x + h2 * k1x) - q - (v + h2 * dv)
            k3x = -alpha * grad(x + h2 * k2x) - q - (v + h2 * dv)
            k4x = -alpha * grad(x + h * k3x) - q - (v + h * dv)
            x = x + h6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            v = v + h * dv
        if not _finite(x, v):
            raise NumericalBlowup(f"state escaped finite range at t = {t + h:.6g}", partial(si))
    return _make_trace(T, X, V, XH, ERR, ev_agents, ev_times, scenario, scheme, x_star, h)


def euler_simulate(scenario: "Scenario") -> Trace:
    """Forward-Euler discretization of the continuous fields with stride delta.

    Communication is implicit at every step (no event log).  The stride
    field counts Euler steps between recorded samples.
    """
    nc = scenario.network
    n, d = nc.n_agents, nc.dim
    p = AlgorithmParams(scenario.alpha, scenario.beta)
    if not isinstance(scenario.scheme, schedulers.EulerScheme):
        raise ValidationError(f"euler_simulate needs an euler scheme, got {scenario.scheme!r}")
    delta = float(scenario.scheme.delta)
    n_steps = round(scenario.t_final / delta)
    graphs, laps, order, spd = _resolve_topology(scenario, delta)
    x, v = _initial_arrays(scenario, n, d)
    x_star = getattr(scenario, "x_star", None)
    if x_star is None:
        x_star = _oracle_or_none(nc)
    ks = _sample_steps(n_steps, scenario.stride)
    T = np.empty(len(ks))
    X = np.empty((len(ks), n, d))
    V = np.empty((len(ks), n, d))
    ERR = np.full((len(ks), n), np.nan)
    si = 0
    gi = 0
    for k in range(n_steps + 1):
        t = k * delta
        if spd is not None:
            gi = order[(k // spd) % len(order)]
        if k == ks[si]:
            T[si] = t
            X[si] = x
            V[si] = v
            if x_star is not None:
                ERR[si] = np.linalg.norm(x - x_star[None, :], axis=1)
            si += 1
        if k == n_steps:
            break
        lap_x = laps[gi] @ x
        dx = -p.alpha * nc.grad_stack(x) - p.beta * lap_x - v
        x = x + delta * dx
        v = v + delta * (p.alpha * p.beta * lap_x)
        if not _finite(x, v):
            raise NumericalBlowup(
                f"state escaped finite range at t = {t + delta:.6g}",
                _make_trace(T[:si], X[:si], V[:si], X[:si], ERR[:si], [], [], scenario,
                            scenario.scheme, x_star, delta),
            )
    return _make_trace(T, X, V, X.copy(), ERR, [], [], scenario, scenario.scheme, x_star, delta)


def _make_trace(T, X, V, XH, ERR, ev_agents, ev_times, scenario, scheme, x_star, h) -> Trace:
    return Trace(
        t=np.asarray(T),
        x=np.asarray(X),
        v=np.asarray(V),
        x_hat=np.asarray(XH),
        err=np.asarray(ERR),
        event_agents=np.asarray(ev_agents, dtype=int),
        event_times=np.asarray(ev_times, dtype=float),
        scheme=schedulers.scheme_dict(scheme),
        h=float(h),
        stride=int(scenario.stride),
        alpha=float(scenario.alpha),
        beta=float(scenario.beta),
        x_star=None if x_star is None else np.asarray(x_star, dtype=float),
    )
