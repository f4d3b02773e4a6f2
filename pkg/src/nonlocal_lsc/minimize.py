"""Projected gradient descent for discretised functionals, and a gradient checker."""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .functional import evaluate, gradient
from .grid import GridFunction
from .integrand import differentiate, require_symmetric
from .verdict import DEFAULT_SEED


@dataclass(frozen=True)
class MinimizeConfig:
    """Line-search and stopping parameters.

    ``box`` is ``None``, a scalar ``M`` meaning ``[-M, M]``, or a pair of
    per-component bound arrays ``(lo, hi)``.
    """

    max_iters: int = 500
    step0: float = 1.0
    armijo_c: float = 1e-4
    shrink: float = 0.5
    grad_tol: float = 1e-7
    box: Optional[object] = None
    max_shrinks: int = 60

    def __post_init__(self):
        if self.max_iters < 0 or self.step0 <= 0 or self.grad_tol <= 0:
            raise ValueError("max_iters, step0 and grad_tol must be positive")
        if not 0 < self.armijo_c < 1 or not 0 < self.shrink < 1:
            raise ValueError("armijo_c and shrink must lie in (0, 1)")

    def bounds(self, n):
        if self.box is None:
            return None
        if np.isscalar(self.box):
            M = float(self.box)
            if not M > 0:
                raise ValueError("box radius must be positive")
            return np.full(n, -M), np.full(n, M)
        lo, hi = self.box
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
        if np.any(lo > hi):
            raise ValueError("box has lo > hi")
        return lo, hi


@dataclass
class MinimizeResult:
    u_star: GridFunction
    J_star: float
    iters: int
    grad_norm: float
    converged: bool
    # (iter, J, step that produced this iterate, grad_norm)
    trace: list = field(default_factory=list)
    stalled: bool = False

    def trace_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["iter", "J", "step", "grad_norm"])
        for it, J, step, gn in self.trace:
            wr.writerow([it, repr(float(J)), repr(float(step)), repr(float(gn))])
        return buf.getvalue()

    def to_dict(self):
        return {"J_star": self.J_star, "iters": self.iters, "grad_norm": self.grad_norm,
                "converged": self.converged, "stalled": self.stalled,
                "nodes": self.u_star.grid.size}


def _project(values, bounds):
    if bounds is None:
        return values
    return np.clip(values, bounds[0], bounds[1])


def minimize(f, u0, cfg=None, threads=1):
    """Minimise ``J(u)`` over grid functions by projected gradient descent.

    The search direction is the L^2 gradient (nodal gradient divided by the
    cell weight). A step ``s`` is accepted when
    ``J(P(u - s d)) <= J(u) + c <grad J, P(u - s d) - u>`` (Armijo along the
    projection arc). The stationarity measure is the L^2 norm of
    ``P(u - d) - u``, which is the plain gradient norm without a box.
    """
    cfg = cfg or MinimizeConfig()
    require_symmetric(f, "minimisation")
    deriv = differentiate(f)
    bounds = cfg.bounds(u0.n)
    w = u0.grid.weight
    u = u0.with_values(_project(u0.values, bounds))
    J = float(evaluate(f, u, threads=threads).value)
    trace, stalled, converged = [], False, False
    it, last_step = 0, 0.0
    while True:
        g = gradient(f, u, deriv, threads).values
        d = g / w
        pg = _project(u.values - d, bounds) - u.values
        gnorm = math.sqrt(w * float(np.sum(pg * pg)))
        trace.append((it, J, last_step, gnorm))
        if gnorm <= cfg.grad_tol:
            converged = True
            break
        if it >= cfg.max_iters:
            break
        step = cfg.step0
        for _ in range(cfg.max_shrinks):
            cand = _project(u.values - step * d, bounds)
            J_new = float(evaluate(f, u.with_values(cand), threads=threads).value)
            if J_new <= J + cfg.armijo_c * float(np.sum(g * (cand - u.values))):
                break
            step *= cfg.shrink
        else:
            stalled = True
            break
        u, J, last_step = u.with_values(cand), J_new, step
        it += 1
    return MinimizeResult(u, J, it, gnorm, converged, trace, stalled)


def grad_check(f, u, h=1e-5, directions=32, seed=DEFAULT_SEED):
    """Worst relative gap between the analytic directional derivative and a
    central difference of ``J`` over seeded random directions."""
    deriv = differentiate(f)
    g = gradient(f, u, deriv).values
    rng = np.random.default_rng([seed, 61])
    worst = 0.0
    for _ in range(directions):
        v = rng.uniform(-1.0, 1.0, u.values.shape)
        dj = float(np.sum(g * v))
        jp = float(evaluate(f, u.with_values(u.values + h * v)).value)
        jm = float(evaluate(f, u.with_values(u.values - h * v)).value)
        worst = max(worst, abs(dj - (jp - jm) / (2 * h)) / (1 + abs(dj)))
    return worst
