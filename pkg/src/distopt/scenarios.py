"""Scenario configuration, presets, and experiment orchestration.

A scenario is a JSON-compatible dict (see README for the schema) that
fully determines one run: topology, per-agent costs, gains, communication
scheme, horizon, step, sampling stride, seed, and initial conditions.
Parsing materializes the initial state immediately, so a scenario plus its
seed reproduces bit-identical outputs.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certificates, dynamics, schedulers
from .costs import CostModel, NetworkCost, catalog, network_cost, quadratic_cost
from .errors import (
    DistoptError,
    ParseError,
    UnknownPreset,
    ValidationError,
)
from .graph import WeightedDigraph, load_graph, build_digraph, preset_graph

DEFAULT_H = 1e-3
DEFAULT_STRIDE = 10
DEFAULT_SEED = 42
DEFAULT_BOX = (-5.0, 5.0)

PRESET_NAMES = ("fig1a", "fig1b", "fig1c", "fig3a", "fig3b", "fig4a", "fig4b", "fig5")
SWITCHING_SET = ("fig2", "fig2r3", "fig2r7")


@dataclass(frozen=True)
class AnalysisOptions:
    """Analysis scalars for the certificate engine.

    ``eps`` and ``delta`` drive the periodic/centralized constants;
    ``phi`` overrides the automatically chosen weight for the digraph and
    distributed certificates; ``box`` is the interval used to estimate
    missing convexity constants; ``eps_vec`` supplies trigger thresholds
    when the scenario scheme is not distributed.
    """

    eps: float = 0.5
    delta: float = 1.0
    phi: float | None = None
    box: tuple[float, float] | None = None
    eps_vec: tuple[float, ...] | None = None


@dataclass
class Scenario:
    """Fully materialized run description (see module docstring)."""

    name: str
    costs: tuple[CostModel, ...]
    alpha: float
    beta: float
    scheme: schedulers.CommScheme
    t_final: float
    h: float
    stride: int
    seed: int
    x0: np.ndarray
    v0: np.ndarray
    graph: WeightedDigraph | None = None
    schedule: dynamics.SwitchingSchedule | None = None
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    out_dir: str | None = None
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.graph is None) == (self.schedule is None):
            raise ValidationError("exactly one of graph/schedule must be set")
        if not self.t_final > 0:
            raise ValidationError(f"t_final must be positive, got {self.t_final}")
        if not self.h > 0:
            raise ValidationError(f"h must be positive, got {self.h}")
        if self.stride < 1:
            raise ValidationError(f"stride must be at least 1, got {self.stride}")
        n = len(self.costs)
        d = self.costs[0].dim
        g0 = self.graph if self.graph is not None else self.schedule.graphs[0]
        if g0.n != n:
            raise ValidationError(f"graph has {g0.n} nodes but {n} costs given")
        self.x0 = np.asarray(self.x0, dtype=float).reshape(n, d)
        self.v0 = np.asarray(self.v0, dtype=float).reshape(n, d)
        vsum = np.abs(self.v0.sum(axis=0)).max()
        if vsum > 1e-12 * max(1.0, float(np.abs(self.v0).max())):
            raise ValidationError(f"v0 must sum to zero per coordinate, |sum| = {vsum:.3e}")

    @property
    def network(self) -> NetworkCost:
        return network_cost(self.costs)


def _cost_from_dict(spec: dict) -> CostModel:
    kind = spec.get("kind")
    if kind == "catalog":
        return catalog(spec["name"])
    if kind == "quadratic":
        return quadratic_cost(spec["a"], float(spec.get("b", 0.0)))
    raise ValidationError(f"unknown cost kind {kind!r} in {spec}")


def _graph_from_dict(spec: dict) -> WeightedDigraph:
    if "preset" in spec:
        return preset_graph(spec["preset"])
    if "file" in spec:
        return load_graph(spec["file"])
    if "edges" in spec:
        return build_digraph(int(spec["n"]), [tuple(e) for e in spec["edges"]])
    raise ValidationError(f"graph spec needs 'preset', 'file' or 'edges': {spec}")


def _draw_initial(spec, n: int, d: int, rng: np.random.Generator, default_box) -> np.ndarray:
    if spec is None:
        lo, hi = default_box
        return rng.uniform(lo, hi, size=(n, d))
    if isinstance(spec, dict) and "box" in spec:
        lo, hi = float(spec["box"][0]), float(spec["box"][1])
        if not lo < hi:
            raise ValidationError(f"empty initial box {spec['box']}")
        return rng.uniform(lo, hi, size=(n, d))
    arr = np.asarray(spec, dtype=float)
    try:
        return arr.reshape(n, d)
    except ValueError as exc:
        raise ValidationError(f"x0 has {arr.size} entries, expected {n * d}") from exc


def scenario_from_dict(cfg: dict, seed: int | None = None) -> Scenario:
    """Validate and materialize a scenario dict.

    ``seed`` overrides the seed in the dict (used by the CLI's --seed).
    Raises ValidationError naming the offending field.
    """
    try:
        costs = tuple(_cost_from_dict(c) for c in cfg["costs"])
    except KeyError:
        raise ValidationError("scenario is missing 'costs'") from None
    n = len(costs)
    d = costs[0].dim
    graph = schedule = None
    if "switching" in cfg:
        sw = cfg["switching"]
        if "presets" in sw:
            graphs = tuple(preset_graph(p) for p in sw["presets"])
        else:
            graphs = tuple(_graph_from_dict(gd) for gd in sw["graphs"])
        schedule = dynamics.SwitchingSchedule(
            graphs=graphs,
            dwell=float(sw["dwell"]),
            order=tuple(sw.get("order", ())),
        )
    elif "graph" in cfg:
        graph = _graph_from_dict(cfg["graph"])
    else:
        raise ValidationError("scenario needs 'graph' or 'switching'")

    scheme = schedulers.scheme_from_dict(cfg.get("scheme", {"kind": "continuous"}), n)
    use_seed = int(cfg.get("seed", DEFAULT_SEED)) if seed is None else int(seed)
    rng = np.random.default_rng(use_seed)
    x0 = _draw_initial(cfg.get("x0"), n, d, rng, DEFAULT_BOX)
    if cfg.get("v0") is None:
        v0 = np.zeros((n, d))
    else:
        v0 = np.asarray(cfg["v0"], dtype=float).reshape(n, d)
    ana = cfg.get("analysis", {})
    analysis = AnalysisOptions(
        eps=float(ana.get("eps", 0.5)),
        delta=float(ana.get("delta", 1.0)),
        phi=None if ana.get("phi") is None else float(ana["phi"]),
        box=None if ana.get("box") is None else (float(ana["box"][0]), float(ana["box"][1])),
        eps_vec=None if ana.get("eps_vec") is None else tuple(float(e) for e in ana["eps_vec"]),
    )
    return Scenario(
        name=str(cfg.get("name", "scenario")),
        costs=costs,
        alpha=float(cfg.get("alpha", 1.0)),
        beta=float(cfg.get("beta", 1.0)),
        scheme=scheme,
        t_final=float(cfg.get("t_final", 40.0)),
        h=float(cfg.get("h", DEFAULT_H)),
        stride=int(cfg.get("stride", DEFAULT_STRIDE)),
        seed=use_seed,
        x0=x0,
        v0=v0,
        graph=graph,
        schedule=schedule,
        analysis=analysis,
        out_dir=cfg.get("out"),
        source=dict(cfg),
    )


def parse_scenario(path, seed: int | None = None) -> Scenario:
    """Load a scenario JSON file; malformed files raise ParseError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ParseError(f"{path}: top level must be an object")
    return scenario_from_dict(cfg, seed=seed)


def preset_dict(name: str) -> dict:
    """JSON-compatible configuration of a named experiment preset.

    All presets run the ten catalog costs on the 10-node digraph (or the
    three-graph switching set) with seeded initial conditions; the Euler
    comparison pair starts inside [-0.5, 0.5] where the explicit update is
    stable for the quartic cost.
    """
    ten = [{"kind": "catalog", "name": f"f{i}"} for i in range(1, 11)]
    base = {
        "costs": ten,
        "alpha": 1.0,
        "h": DEFAULT_H,
        "stride": DEFAULT_STRIDE,
        "seed": DEFAULT_SEED,
        "x0": {"box": list(DEFAULT_BOX)},
    }
    if name in ("fig1a", "fig1b", "fig1c"):
        beta = {"fig1a": 0.5, "fig1b": 1.0, "fig1c": 5.0}[name]
        return base | {
            "name": name,
            "switching": {"presets": list(SWITCHING_SET), "dwell": 2.0},
            "beta": beta,
            "scheme": {"kind": "continuous"},
            "t_final": 60.0,
        }
    if name == "fig3a":
        return base | {"name": name, "graph": {"preset": "fig2"}, "beta": 1.0,
                       "scheme": {"kind": "periodic", "delta": 0.5}, "t_final": 60.0}
    if name == "fig3b":
        return base | {"name": name, "graph": {"preset": "fig2"}, "beta": 0.5,
                       "scheme": {"kind": "periodic", "delta": 1.0}, "t_final": 60.0}
    if name == "fig4a":
        return base | {"name": name, "graph": {"preset": "fig2"}, "beta": 2.0,
                       "scheme": {"kind": "periodic", "delta": 0.2}, "t_final": 60.0,
                       "x0": {"box": [-0.5, 0.5]}}
    if name == "fig4b":
        return base | {"name": name, "graph": {"preset": "fig2"}, "beta": 1.0,
                       "scheme": {"kind": "euler", "delta": 0.2}, "t_final": 60.0,
                       "stride": 1, "x0": {"box": [-0.5, 0.5]}}
    if name == "fig5":
        return base | {"name": name, "graph": {"preset": "fig2"}, "beta": 1.0,
                       "scheme": {"kind": "distributed_event", "eps": 0.002},
                       "t_final": 40.0, "h": 2e-4, "stride": 50}
    raise UnknownPreset(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")


def presets(name: str) -> Scenario:
    """Materialize a named preset (see :func:`preset_dict`)."""
    return scenario_from_dict(preset_dict(name))


def run(scenario: Scenario, out_dir=None, with_certificate: bool = False) -> dict:
    """Execute a scenario and write trace.csv, events.csv and summary.json.

    Returns the summary dict.  On numerical blowup the partial outputs are
    still written and the exception re-raised for the caller to map to an
    exit status.
    """
    out = Path(out_dir if out_dir is not None else (scenario.out_dir or "out"))
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if isinstance(scenario.scheme, schedulers.EulerScheme):
            trace = dynamics.euler_simulate(scenario)
        else:
            trace = dynamics.simulate(scenario)
    except DistoptError as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None and partial.t.size:
            _write_outputs(partial, scenario, out, time.perf_counter() - t0,
                           status="blowup", with_certificate=False)
        raise
    return _write_outputs(trace, scenario, out, time.perf_counter() - t0,
                          status="ok", with_certificate=with_certificate)


def _write_outputs(trace, scenario, out: Path, wall: float, status: str,
                   with_certificate: bool) -> dict:
    trace.to_csv(out / "trace.csv")
    trace.events_to_csv(out / "events.csv")
    stats = schedulers.event_stats(trace)
    ln_err = np.where(trace.err > 0, np.log(np.maximum(trace.err, 1e-300)), -math.inf)
    summary = {
        "name": scenario.name,
        "status": status,
        "scheme": trace.scheme,
        "alpha": scenario.alpha,
        "beta": scenario.beta,
        "h": trace.h,
        "t_final": scenario.t_final,
        "seed": scenario.seed,
        "x_star": None if trace.x_star is None else [float(c) for c in trace.x_star],
        "final_errors": [float(e) for e in trace.err[-1]] if trace.t.size else [],
        "event_counts": [int(c) for c in stats.counts],
        "min_inter_event": [None if not math.isfinite(gp) else float(gp) for gp in stats.min_gaps],
        "global_min_gap": None if not math.isfinite(stats.global_min_gap) else stats.global_min_gap,
        "zeno_flag": stats.zeno_flag,
        "conservation_max": float(np.abs(trace.v.sum(axis=1)).max()) if trace.t.size else None,
        "wall_time_s": wall,
        "ln_err": {
            "t": [float(tt) for tt in trace.t],
            "agents": [[float(v) for v in ln_err[:, i]] for i in range(trace.n_agents)],
        },
    }
    if with_certificate:
        summary["certificate"] = certificates.certify(scenario).to_dict()
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def certify_cmd(scenario: Scenario) -> certificates.CertificateReport:
    """Certificate report for a scenario (CLI `sim certify`)."""
    return certificates.certify(scenario)


def scheme_feasible(report: certificates.CertificateReport, scheme) -> bool:
    """Verdict relevant to the scenario's own communication scheme."""
    if isinstance(scheme, schedulers.Periodic):
        return report.feasible["periodic"]
    if isinstance(scheme, schedulers.CentralizedEvent):
        return report.feasible["centralized_event"]
    if isinstance(scheme, schedulers.DistributedEvent):
        return report.feasible["distributed_event"]
    return report.feasible["digraph_rate"]
