"""Convergence under time-varying interaction topologies.

The network alternates every 2 seconds among three strongly connected,
weight-balanced digraphs.  Convergence survives the switching because the
certified energy function does not depend on the active topology; larger
coupling gains speed it up.
"""

from distopt import simulate
from distopt.scenarios import presets

print("switching every 2 s among three balanced digraphs, alpha = 1:")
print()
print("  beta   max_i |x_i(60) - x*|")
for name in ("fig1a", "fig1b", "fig1c"):
    scenario = presets(name)
    trace = simulate(scenario)
    print(f"  {scenario.beta:4.1f}   {trace.err[-1].max():.3e}")

print()
print("the same seed draws the same initial conditions for all three runs,")
print("so the error column isolates the effect of the coupling gain.")
