"""Local cost functions, convexity constants, and the centralized oracle.

The scalar catalog ``f1`` .. ``f10`` contains the ten strongly convex costs
used throughout the bundled experiments; ``quadratic_cost`` builds members
of the family f(x) = (x'x + x'a + b)/2 whose gradient Lipschitz and strong
convexity constants are both exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import DimMismatch, OracleFailure, Unbounded, UnknownCost

BRACKET_LIMIT = 1e6


@dataclass(frozen=True)
class CostModel:
    """Differentiable convex cost on R^d with optional convexity constants.

    ``m`` is a strong-convexity constant and ``M`` a global gradient
    Lipschitz constant when known.  ``locally_lipschitz`` marks costs whose
    gradient is Lipschitz only on compact sets; such costs carry no global
    ``M``.  ``value`` maps a (d,) array to a float, ``gradient`` to a (d,)
    array.  For d = 1 the optional scalar callables avoid array overhead in
    inner simulation loops.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    m: float | None = None
    M: float | None = None
    locally_lipschitz: bool = False
    name: str = ""
    scalar_value: Callable[[float], float] | None = field(default=None, repr=False, compare=False)
    scalar_gradient: Callable[[float], float] | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class NetworkCost:
    """A network of cost models with a common dimension.

    The aggregate objective is the sum of the members; the aggregate
    constants are ``m_lower = min m^i`` and ``M_upper = max M^i`` and exist
    only when every member provides them.
    """

    agents: tuple[CostModel, ...]

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def dim(self) -> int:
        return self.agents[0].dim

    @property
    def m_lower(self) -> float | None:
        ms = [a.m for a in self.agents]
        return None if any(v is None for v in ms) else float(min(ms))

    @property
    def M_upper(self) -> float | None:
        Ms = [a.M for a in self.agents]
        return None if any(v is None for v in Ms) else float(max(Ms))

    @property
    def locally_lipschitz_only(self) -> bool:
        """True when some member lacks a global gradient Lipschitz constant."""
        return any(a.M is None for a in self.agents)

    def value_total(self, xs: np.ndarray) -> float:
        """Separable objective sum_i f^i(x^i) for stacked states (N, d)."""
        return float(sum(a.value(xs[i]) for i, a in enumerate(self.agents)))

    @cached_property
    def _scalar_gradients(self):
        funcs = tuple(a.scalar_gradient for a in self.agents)
        return funcs if (self.dim == 1 and all(f is not None for f in funcs)) else None

    def grad_stack(self, xs: np.ndarray) -> np.ndarray:
        """Stacked per-agent gradients, (N, d). Overflow maps to signed inf."""
        out = np.empty_like(xs, dtype=float)
        funcs = self._scalar_gradients
        if funcs is not None and xs.shape[1] == 1:
            vals = xs[:, 0].tolist()
            try:
                out[:, 0] = [f(v) for f, v in zip(funcs, vals)]
            except OverflowError:
                for i, (f, v) in enumerate(zip(funcs, vals)):
                    try:
                        out[i, 0] = f(v)
                    except OverflowError:
                        out[i, 0] = math.copysign(math.inf, v)
            return out
        for i, a in enumerate(self.agents):
            try:
                out[i] = a.gradient(xs[i])
            except OverflowError:
                out[i] = math.copysign(math.inf, float(xs[i, 0]))
        return out

    def global_value(self, x: np.ndarray) -> float:
        return float(sum(a.value(x) for a in self.agents))

    def global_gradient(self, x: np.ndarray) -> np.ndarray:
        return np.sum([a.gradient(x) for a in self.agents], axis=0)


def _entry(name, value, grad, m=None, M=None, locally_lipschitz=False):
    return CostModel(
        dim=1,
        value=lambda x, _f=value: _f(float(x[0])),
        gradient=lambda x, _g=grad: np.array([_g(float(x[0]))]),
        m=m,
        M=M,
        locally_lipschitz=locally_lipschitz,
        name=name,
        scalar_value=value,
        scalar_gradient=grad,
    )


def _f1(x):
    return 0.5 * math.exp(-0.5 * x) + 0.4 * math.exp(0.3 * x)


def _g1(x):
    return -0.25 * math.exp(-0.5 * x) + 0.12 * math.exp(0.3 * x)


def _f3(x):
    return 0.5 * x * x * math.log(1 + x * x) + x * x


def _g3(x):
    return x * math.log(1 + x * x) + x**3 / (1 + x * x) + 2 * x


def _f5(x):
    return math.log(math.exp(-0.1 * x) + math.exp(0.3 * x)) + 0.1 * x * x


def _g5(x):
    ea, eb = math.exp(-0.1 * x), math.exp(0.3 * x)
    return (-0.1 * ea + 0.3 * eb) / (ea + eb) + 0.2 * x


def _f6(x):
    return x * x / math.log(2 + x * x)


def _g6(x):
    lg = math.log(2 + x * x)
    return 2 * x / lg - 2 * x**3 / ((2 + x * x) * lg * lg)


def _f9(x):
    return x * x / math.sqrt(x * x + 1) + 0.1 * x * x


def _g9(x):
    return (x**3 + 2 * x) / (x * x + 1) ** 1.5 + 0.2 * x


_CATALOG: dict[str, CostModel] = {
    "f1": _entry("f1", _f1, _g1, locally_lipschitz=True),
    "f2": _entry("f2", lambda x: (x - 4) ** 2, lambda x: 2 * (x - 4), m=2.0, M=2.0),
    "f3": _entry("f3", _f3, _g3),
    "f4": _entry("f4", lambda x: x * x + math.exp(0.1 * x),
                 lambda x: 2 * x + 0.1 * math.exp(0.1 * x), locally_lipschitz=True),
    "f5": _entry("f5", _f5, _g5),
    "f6": _entry("f6", _f6, _g6),
    "f7": _entry("f7", lambda x: 0.2 * math.exp(-0.2 * x) + 0.4 * math.exp(0.4 * x),
                 lambda x: -0.04 * math.exp(-0.2 * x) + 0.16 * math.exp(0.4 * x),
                 locally_lipschitz=True),
    "f8": _entry("f8", lambda x: x**4 + 2 * x * x + 2,
                 lambda x: 4 * x**3 + 4 * x, locally_lipschitz=True),
    "f9": _entry("f9", _f9, _g9),
    "f10": _entry("f10", lambda x: (x + 2) ** 2, lambda x: 2 * (x + 2), m=2.0, M=2.0),
}

CATALOG_NAMES = tuple(sorted(_CATALOG, key=lambda s: int(s[1:])))


def catalog(name: str) -> CostModel:
    """Look up a scalar catalog cost by name (``f1`` .. ``f10``)."""
    try:
        return _CATALOG[name]
    except KeyError:
        raise UnknownCost(f"unknown cost {name!r}; known: {', '.join(CATALOG_NAMES)}") from None


def quadratic_cost(a, b: float = 0.0) -> CostModel:
    """Member of the family f(x) = (x'x + x'a + b)/2 with unit curvature."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    d = a.shape[0]
    model = CostModel(
        dim=d,
        value=lambda x: 0.5 * (float(x @ x) + float(x @ a) + b),
        gradient=lambda x: x + 0.5 * a,
        m=1.0,
        M=1.0,
        name="quadratic",
    )
    if d == 1:
        a0 = float(a[0])
        model = replace(
            model,
            scalar_value=lambda x: 0.5 * (x * x + x * a0 + b),
            scalar_gradient=lambda x: x + 0.5 * a0,
        )
    return model


def network_cost(models) -> NetworkCost:
    """Bundle per-agent costs, checking for a common dimension."""
    models = tuple(models)
    if not models:
        raise DimMismatch("need at least one cost model")
    dims = {m.dim for m in models}
    if len(dims) != 1:
        raise DimMismatch(f"cost dimensions differ: {sorted(dims)}")
    return NetworkCost(agents=models)


def _safe_global_grad_1d(nc: NetworkCost, x: float) -> float:
    total = 0.0
    for a in nc.agents:
        try:
            total += a.scalar_gradient(x) if a.scalar_gradient else float(a.gradient(np.array([x]))[0])
        except OverflowError:
            return math.copysign(math.inf, x)
    return total


def minimize_global(nc: NetworkCost, tol: float = 1e-12) -> np.ndarray:
    """Solve sum_i grad f^i(x) = 0 for a strictly convex aggregate.

    For d = 1 the aggregate gradient is strictly increasing, so the solver
    expands a bracket outward from [-1, 1] (capped at +/- 1e6) and bisects;
    the result satisfies |sum grad| <= tol.  For d > 1 a damped Newton
    iteration with a finite-difference Hessian is used.

    Raises Unbounded when no sign change exists inside the cap and
    OracleFailure when the tolerance cannot be met.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if nc.dim == 1:
        return _bisect_1d(nc, tol)
    return _newton_nd(nc, tol)


def _bisect_1d(nc: NetworkCost, tol: float) -> np.ndarray:
    g = lambda x: _safe_global_grad_1d(nc, x)  # noqa: E731
    lo, hi = -1.0, 1.0
    while g(lo) > 0:
        lo *= 2.0
        if lo < -BRACKET_LIMIT:
            raise Unbounded("no stationary point in [-1e6, 1e6] (left)")
    while g(hi) < 0:
        hi *= 2.0
        if hi > BRACKET_LIMIT:
            raise Unbounded("no stationary point in [-1e6, 1e6] (right)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    if abs(g(root)) > tol:
        # endpoints straddle the root; pick the better one before giving up
        root = min((lo, hi, root), key=lambda x: abs(g(x)))
        if abs(g(root)) > tol:
            raise OracleFailure(f"bisection stalled at |grad| = {abs(g(root)):.3e} > {tol:.3e}")
    return np.array([root])


def _newton_nd(nc: NetworkCost, tol: float, max_iter: int = 200) -> np.ndarray:
    d = nc.dim
    x = np.zeros(d)
    for _ in range(max_iter):
        grad = nc.global_gradient(x)
        gn = float(np.linalg.norm(grad))
        if gn <= tol:
            return x
        hess = np.empty((d, d))
        fd = 1e-6 * max(1.0, float(np.linalg.norm(x)))
        for k in range(d):
            e = np.zeros(d)
            e[k] = fd
            hess[:, k] = (nc.global_gradient(x + e) - nc.global_gradient(x - e)) / (2 * fd)
        try:
            step = np.linalg.solve(0.5 * (hess + hess.T), -grad)
        except np.linalg.LinAlgError:
            step = -grad
        if float(step @ grad) > 0:  # not a descent direction
            step = -grad
        scale = 1.0
        for _ in range(60):
            if float(np.linalg.norm(nc.global_gradient(x + scale * step))) < gn:
                break
            scale *= 0.5
        else:
            raise OracleFailure("Newton line search failed to reduce the gradient")
        x = x + scale * step
    if float(np.linalg.norm(nc.global_gradient(x))) <= tol:
        return x
    raise OracleFailure(f"Newton did not reach tolerance {tol:.3e} in {max_iter} iterations")


def check_convexity_constants(model: CostModel, box=(-10.0, 10.0), samples: int = 2000,
                              seed: int = 0) -> tuple[float, float]:
    """Empirical curvature range over sampled point pairs inside ``box``.

    Returns the min and max of (z-x)'(grad f(z)-grad f(x)) / ||z-x||^2,
    which bound the strong convexity and gradient Lipschitz constants on
    the box from inside.  Report-only: no exception on violations.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    lo, hi = float(box[0]), float(box[1])
    rng = np.random.default_rng(seed)
    xs = rng.uniform(lo, hi, size=(samples, model.dim))
    zs = rng.uniform(lo, hi, size=(samples, model.dim))
    m_est, M_est = math.inf, -math.inf
    for x, z in zip(xs, zs):
        dxz = z - x
        nrm2 = float(dxz @ dxz)
        if nrm2 < 1e-20:
            continue
        ratio = float(dxz @ (model.gradient(z) - model.gradient(x))) / nrm2
        m_est = min(m_est, ratio)
        M_est = max(M_est, ratio)
    return m_est, M_est


def with_estimated_constants(model: CostModel, box=(-10.0, 10.0),
                             samples: int = 2000, seed: int = 0) -> CostModel:
    """Fill missing m/M with empirical estimates over ``box``."""
    if model.m is not None and model.M is not None:
        return model
    m_est, M_est = check_convexity_constants(model, box, samples, seed)
    return replace(
        model,
        m=model.m if model.m is not None else m_est,
        M=model.M if model.M is not None else M_est,
    )
