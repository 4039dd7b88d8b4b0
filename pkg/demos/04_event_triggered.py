"""Event-triggered communication: centralized and distributed.

Instead of a clock, broadcasts fire when a state-dependent condition is
violated.  The centralized law watches the network disagreement and
enforces a dwell time between synchronous rounds; the distributed law
lets each agent compare its own drift against its neighbors' broadcast
spread plus a positive threshold, which keeps inter-event times bounded
away from zero (no Zeno behavior).
"""

import numpy as np

from distopt import preset_graph, quadratic_cost, simulate
from distopt.certificates import ConvexityBounds, certify, kappa, phi_from_delta, tau_period
from distopt.graph import spectral_summary
from distopt.scenarios import AnalysisOptions, Scenario
from distopt.schedulers import CentralizedEvent, DistributedEvent, event_stats

g = preset_graph("cycle10")
spec = spectral_summary(g)
costs = tuple(quadratic_cost([2.0 * (i - 5)]) for i in range(1, 11))
bounds = ConvexityBounds(1.0, 1.0)
eps_s, delta_s = 0.5, 3.0
phi = phi_from_delta(1.0, delta_s, bounds)
zeta, tau = tau_period(1.0, 1.0, eps_s, delta_s, bounds, spec.lambda_hat_2, spec.lambda_N)
kap = kappa(1.0, 1.0, eps_s, delta_s, phi, spec.lambda_hat_2, spec.lambda_N)

rng = np.random.default_rng(42)
x0 = rng.uniform(-5, 5, (10, 1))

print(f"centralized trigger: kappa = {kap:.4f} (< 1), dwell tau = {tau:.5f} s")
sc = Scenario(name="ring-centralized", costs=costs, alpha=1.0, beta=1.0,
              scheme=CentralizedEvent(kappa=kap, tau=tau), t_final=40.0, h=1e-3,
              stride=10, seed=42, x0=x0, v0=np.zeros((10, 1)), graph=g)
trace = simulate(sc)
stats = event_stats(trace)
rounds = int(stats.counts[0])
periodic_rounds = int(40.0 / (0.9 * tau)) + 1
print(f"  final max error: {trace.err[-1].max():.3e}")
print(f"  synchronous rounds: {rounds} vs {periodic_rounds} under periodic at 0.9 tau")
print(f"  smallest gap between rounds: {stats.global_min_gap:.4f} s (dwell respected)")
print()

print("distributed trigger with per-agent threshold 0.002:")
sc2 = Scenario(name="ring-distributed", costs=costs, alpha=1.0, beta=1.0,
               scheme=DistributedEvent(eps=np.full(10, 0.002)), t_final=40.0,
               h=1e-3, stride=10, seed=42, x0=x0, v0=np.zeros((10, 1)), graph=g,
               analysis=AnalysisOptions(phi=9.0))
trace2 = simulate(sc2)
stats2 = event_stats(trace2)
print(f"  final max error: {trace2.err[-1].max():.3e}")
print(f"  per-agent event counts: {stats2.counts.tolist()}")
print(f"  per-agent smallest gaps: {np.round(stats2.min_gaps, 4).tolist()}")
print(f"  accumulation proxy tripped: {stats2.zeno_flag}")

report = certify(sc2)
if report.tau_i is not None:
    print(f"  certified per-agent gap bound: {np.min(report.tau_i):.2e} s")
    print(f"  certified terminal radius:     {report.steady_state_bound:.2e}")
print()
print("the distributed law trades a small terminal neighborhood (set by the")
print("thresholds) for asynchronous, purely local communication decisions.")
