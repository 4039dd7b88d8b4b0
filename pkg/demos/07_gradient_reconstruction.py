"""What a curious neighbor can learn: gradient reconstruction.

An agent that (a) receives the target's broadcasts, (b) receives the
broadcasts of everyone the target listens to, and (c) knows the target's
initial integral state and edge weights, can solve the target's own state
equation for its private gradient.  Remove any ingredient and the
reconstruction degrades or becomes impossible, which is the privacy
boundary of the scheme.
"""

import numpy as np

from distopt import catalog, preset_graph, simulate
from distopt.diagnostics import reconstruct_gradient
from distopt.errors import InsufficientVisibility
from distopt.scenarios import Scenario
from distopt.schedulers import Continuous

k2 = preset_graph("k2")
costs = (catalog("f2"), catalog("f10"))
scenario = Scenario(
    name="privacy", costs=costs, alpha=1.0, beta=1.0, scheme=Continuous(),
    t_final=10.0, h=1e-3, stride=1, seed=0,
    x0=np.array([[3.0], [-4.0]]), v0=np.zeros((2, 1)), graph=k2,
)
trace = simulate(scenario)

rec = reconstruct_gradient(observer=0, target=1, trace=trace, g=k2,
                           v_target_0=np.zeros(1))
window = rec.times >= 1.0
truth = 2.0 * (rec.x_target[window, 0] + 2.0)
err = np.abs(rec.estimates[window, 0] - truth)
print("full knowledge: agent 1 reconstructs agent 2's gradient 2(x+2)")
print(f"  sup error on t in [1, 10]: {err.max():.2e}")

biased = reconstruct_gradient(0, 1, trace, k2, v_target_0=np.array([0.5]))
bias = biased.estimates[window, 0] - rec.estimates[window, 0]
print(f"  wrong initial integral state (off by 0.5) biases every estimate by "
      f"{bias.mean():+.4f} (= -0.5 / alpha)")

g3 = preset_graph("path3")
costs3 = (catalog("f2"), catalog("f5"), catalog("f10"))
sc3 = Scenario(name="path", costs=costs3, alpha=1.0, beta=1.0, scheme=Continuous(),
               t_final=1.0, h=1e-3, stride=1, seed=0,
               x0=np.array([[1.0], [0.0], [-1.0]]), v0=np.zeros((3, 1)), graph=g3)
trace3 = simulate(sc3)
try:
    reconstruct_gradient(0, 1, trace3, g3, v_target_0=np.zeros(1))
except InsufficientVisibility as exc:
    print(f"on a path graph the end agent lacks one signal: {exc}")
