"""Witness constructions: checkerboards, oscillating sequences, divergence and
blow-up functions, and the lower semi-continuity probe."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._summation import compensated_row_sums, merge, stable_sum
from .analysis import NonHomogeneousError, _ratio, check_homogeneous_bound
from .functional import evaluate, pairing
from .grid import (Grid, GridFunction, build_grid, lp_norm, measure,
                   p_function_array, parse_exponent)
from .integrand import PoleError
from .verdict import DEFAULT_SEED, Sampler, jsonable


class BoundaryError(ValueError):
    """Point lies on a checkerboard cube boundary (a null set)."""


class UndefinedFractionError(ValueError):
    """The reference set has zero measure."""


# -- checkerboards --------------------------------------------------------


def _parity(delta, x):
    """Membership and on-boundary masks for rows of ``x``."""
    t = np.asarray(x, dtype=float) / delta
    on_edge = np.any(t - np.floor(t) == 0.5, axis=-1)
    centre = np.floor(t + 0.5).astype(np.int64)
    return (centre.sum(axis=-1) % 2 == 0), on_edge


def checkerboard_membership(delta, x):
    """True iff ``x`` is in an open ``delta``-cube centred at ``xi * delta``
    with ``sum(xi)`` even.

    ``x`` may be one point of shape ``(m,)`` or rows ``(K, m)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    inside, edge = _parity(delta, np.atleast_2d(x) if single else x)
    if np.any(edge):
        raise BoundaryError(f"point on a cube boundary for delta={delta}")
    return bool(inside[0]) if single else inside


@dataclass(frozen=True)
class Checkerboard:
    """Even-parity cube union ``S_delta`` in R^m (periodic with period ``2 delta``)."""

    delta: float
    dim_m: int = 1

    def membership(self, x):
        return checkerboard_membership(self.delta, x)

    def complement(self, x):
        inside = checkerboard_membership(self.delta, x)
        return (not inside) if isinstance(inside, bool) else ~inside


def _axis_midpoints(lo, hi, n):
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def coverage_fraction(E, delta, resolution=4096, chunk=1 << 22):
    """Share of ``E`` covered by ``S_delta x S_delta^c``, by fine-grid counting.

    Parameters
    ----------
    E : sequence of (lo, hi) pairs, or (box, predicate)
        A box in R^{2m} (first m axes are ``x``, last m are ``y``), or a
        bounding box with a vectorised predicate on ``(K, 2m)`` points.
    resolution : int
        Cells per axis of the counting grid.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    predicate = None
    if isinstance(E, tuple) and len(E) == 2 and callable(E[1]):
        box, predicate = E
    else:
        box = E
    box = [(float(lo), float(hi)) for lo, hi in box]
    if len(box) % 2 or not box:
        raise ValueError("E must live in R^{2m}")
    if any(hi <= lo for lo, hi in box):
        raise UndefinedFractionError("E has zero measure")
    m = len(box) // 2
    axes = [_axis_midpoints(lo, hi, resolution) for lo, hi in box]
    if predicate is None:
        # product structure: count S on the x-box and S^c on the y-box separately
        xs = np.stack(np.meshgrid(*axes[:m], indexing="ij"), -1).reshape(-1, m)
        ys = np.stack(np.meshgrid(*axes[m:], indexing="ij"), -1).reshape(-1, m)
        sx, ex = _parity(delta, xs)
        sy, ey = _parity(delta, ys)
        hit_x = np.count_nonzero(sx & ~ex)
        hit_y = np.count_nonzero(~sy & ~ey)
        return (hit_x / len(xs)) * (hit_y / len(ys))
    total = resolution ** (2 * m)
    hits = inside = 0
    shape = (resolution,) * (2 * m)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, shape)
        pts = np.stack([axes[a][idx[a]] for a in range(2 * m)], axis=1)
        keep = np.asarray(predicate(pts), dtype=bool)
        sx, ex = _parity(delta, pts[:, :m])
        sy, ey = _parity(delta, pts[:, m:])
        inside += np.count_nonzero(keep)
        hits += np.count_nonzero(keep & sx & ~ex & ~sy & ~ey)
    if inside == 0:
        raise UndefinedFractionError("E contains no counting cells")
    return hits / inside


UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))


# -- oscillations ---------------------------------------------------------


def stripe_indicator(grid, theta, k):
    """Boolean per node: ``frac(k (x_1 - lo) / |X_1|) < theta`` at cell midpoints."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    lo, hi = grid.domain.box[0]
    t = k * (grid.nodes[:, 0] - lo) / (hi - lo)
    return (t - np.floor(t)) < theta


def oscillation_sequence(theta, omega1, omega2, k):
    """``u_k = chi omega1 + (1 - chi) omega2`` with ``chi`` the axis-1 stripes of
    period ``|X_1| / k`` and fill fraction ``theta``."""
    if omega1.grid is not omega2.grid and not (
            omega1.grid.size == omega2.grid.size
            and np.array_equal(omega1.grid.nodes, omega2.grid.nodes)):
        raise ValueError("omega1 and omega2 live on different grids")
    if omega1.n != omega2.n:
        raise ValueError("omega1 and omega2 have different codomain dimensions")
    chi = stripe_indicator(omega1.grid, theta, k)[:, None]
    return omega1.with_values(np.where(chi, omega1.values, omega2.values))


@dataclass(frozen=True, eq=False)
class SequencePlan:
    """A sequence ``k -> u_k`` with the limit it is claimed to converge to."""

    kind: str  # oscillation | scalar-shrink | custom
    generator: Callable
    declared_limit: GridFunction
    mode: str = "weak"  # weak | weak-star | strong
    name: str = ""

    def __call__(self, k):
        return self.generator(k)

    @classmethod
    def oscillation(cls, theta, omega1, omega2, name=""):
        limit = omega1.with_values(theta * omega1.values + (1 - theta) * omega2.values)
        return cls("oscillation", lambda k: oscillation_sequence(theta, omega1, omega2, k),
                   limit, "weak-star", name or f"oscillation(theta={theta})")

    @classmethod
    def scalar_shrink(cls, grid, c=1.0, n=1, name=""):
        """``u_k = c / k`` (constant), converging strongly to 0."""
        c = np.broadcast_to(np.asarray(c, dtype=float), (n,))
        return cls("scalar-shrink", lambda k: GridFunction.constant(grid, c / k),
                   GridFunction.constant(grid, np.zeros(n)), "strong",
                   name or "scalar-shrink")

    @classmethod
    def custom(cls, generator, limit, mode="weak", name="custom"):
        return cls("custom", generator, limit, mode, name)


def pairing_dictionary(grid):
    """Test functions used as a proxy for weak convergence."""
    out = {"1": np.ones(grid.size)}
    for j in range(grid.dim_m):
        lo, hi = grid.domain.box[j]
        t = (grid.nodes[:, j] - lo) / (hi - lo)
        out[f"x{j + 1}"] = grid.nodes[:, j]
        out[f"x{j + 1}^2"] = grid.nodes[:, j] ** 2
        for q in (0.25, 0.5, 0.75):
            out[f"step(x{j + 1}>{q})"] = (t > q).astype(float)
    return out


def weak_pairing_defect(u, limit, dictionary=None):
    """``max_h max_c |int (u - limit)_c h dx|`` over the test dictionary."""
    dictionary = pairing_dictionary(u.grid) if dictionary is None else dictionary
    diff = u.with_values(u.values - limit.values)
    return max(float(np.max(np.abs(pairing(diff, h)))) for h in dictionary.values())


@dataclass
class LscProbeReport:
    """Functional values along a sequence against the value at its limit."""

    J_values: list
    J_limit: float
    liminf_estimate: float
    tail_window: int
    tau: float
    quadrature_error: float
    verdict: str  # holds | violated
    margin: float
    pairing_defects: list = field(default_factory=list)
    plan: str = ""
    mode: str = ""

    @property
    def violated(self):
        return self.verdict == "violated"

    def to_dict(self):
        return jsonable({
            "plan": self.plan, "mode": self.mode,
            "J_values": [{"k": k, "J": v} for k, v in enumerate(self.J_values, 1)],
            "J_limit": self.J_limit, "liminf_estimate": self.liminf_estimate,
            "tail_window": self.tail_window, "tau": self.tau,
            "quadrature_error": self.quadrature_error, "verdict": self.verdict,
            "margin": self.margin, "pairing_defects": self.pairing_defects,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["k", "J_k"])
        for k, v in enumerate(self.J_values, 1):
            wr.writerow([k, repr(float(v))])
        return buf.getvalue()


def _coarse_view(u):
    """Every other node along each axis, with the weight scaled to match."""
    g = u.grid
    if g.domain.mask is None:
        keep = np.ones(tuple(g.nodes_per_axis), dtype=bool)
        sel = tuple(np.arange(n) % 2 == 0 for n in g.nodes_per_axis)
        keep = np.logical_and.reduce(np.ix_(*sel)) if len(sel) > 1 else sel[0]
        idx = np.flatnonzero(np.asarray(keep).ravel())
    else:
        idx = np.arange(0, g.size, 2)
    if len(idx) == g.size:
        return None
    coarse = Grid(g.domain, g.nodes_per_axis, g.nodes[idx], g.weight * g.size / len(idx),
                  g.cell_index[idx])
    return GridFunction(coarse, u.values[idx], u.p)


def lsc_probe(f, plan, k_max=32, threads=1):
    """Evaluate ``J(u_k)`` for ``k = 1..k_max`` and compare with ``J(limit)``.

    The liminf is estimated by the minimum over the last ``max(3, k_max // 4)``
    values. The verdict is ``violated`` when that estimate is below
    ``J(limit) - tau`` with ``tau = 1e-6 (1 + |J(limit)|)`` plus a quadrature
    error estimate (the change in ``J(limit)`` when every other node is dropped).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    values, defects = [], []
    for k in range(1, k_max + 1):
        u = plan(k)
        values.append(float(evaluate(f, u, threads=threads).value))
        defects.append(weak_pairing_defect(u, plan.declared_limit))
    J_lim = float(evaluate(f, plan.declared_limit, threads=threads).value)
    coarse = _coarse_view(plan.declared_limit)
    quad = 0.0 if coarse is None else abs(J_lim - float(evaluate(f, coarse).value))
    window = min(k_max, max(3, k_max // 4))
    liminf = min(values[-window:])
    tau = 1e-6 * (1.0 + abs(J_lim)) + quad
    margin = J_lim - liminf
    verdict = "violated" if liminf < J_lim - tau else "holds"
    return LscProbeReport(values, J_lim, liminf, window, tau, quad, verdict, margin,
                          defects, plan.name, plan.mode)


# -- witness results ------------------------------------------------------


@dataclass
class WitnessResult:
    """A constructed function together with the numbers that justify it."""

    found: bool
    u: Optional[GridFunction]
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return jsonable({"found": self.found, "kind": self.kind,
                         "nodes": None if self.u is None else self.u.grid.size,
                         "diagnostics": self.diagnostics})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _pair_values(f, phi, psi):
    """``g_ij = f(x_i, x_j, phi_i, psi_j)`` with non-finite entries as +inf."""
    X = phi.grid.nodes
    g = np.broadcast_to(f.raw(X[:, None, :], X[None, :, :], phi.values[:, None, :],
                              psi.values[None, :, :]), (len(X), len(X)))
    return np.where(np.isfinite(g), np.maximum(g, 0.0), np.inf)


def _masked_sum(g, rows, cols, h2):
    block = g[np.ix_(rows, cols)] if rows.dtype != bool else g[rows][:, cols]
    if block.size == 0:
        return 0.0
    if np.any(np.isinf(block)):
        return math.inf
    return h2 * merge([compensated_row_sums(block)])


def _diverges(seq, factor=2.0, threshold=1e8):
    """Doubling twice in a row, an infinite value, or a value above ``threshold``."""
    if any(math.isinf(v) for v in seq) or seq[-1] > threshold:
        return True
    if len(seq) < 3:
        return False
    a, b, c = seq[-3:]
    slack = 1.0 - 1e-12
    return a > 0 and b >= factor * a * slack and c >= factor * b * slack


def _glue(phi, psi, S):
    return phi.with_values(np.where(np.asarray(S)[:, None], phi.values, psi.values))


def integrability_witness(f, phi, psi, levels=3, threshold=1e8, depth_cap=12):
    """Glue ``phi`` and ``psi`` into ``u`` with ``J(u)`` unbounded under refinement.

    ``phi`` and ``psi`` are transferred piecewise-constantly onto grids refined
    ``levels - 1`` times. If the positive part of
    ``g(x, y) = f(x, y, phi(x), psi(y))`` shows no divergence, the result has
    ``found=False``. Otherwise a half-space split ``A`` with divergent
    ``int_A int_{A^c} g`` gives ``u = phi on A, psi off A``; failing that,
    checkerboards on nested halvings give ``u = phi on S, psi off S``.
    """
    base = phi.grid
    if psi.grid.size != base.size:
        raise ValueError("phi and psi must share a grid")
    grids = [base] + [base.refine(2**k) for k in range(1, levels)]
    phis = [phi] + [phi.prolong(g) for g in grids[1:]]
    psis = [psi] + [psi.prolong(g) for g in grids[1:]]
    totals, mats = [], []
    for g, a, b in zip(grids, phis, psis):
        G = _pair_values(f, a, b)
        mats.append(G)
        idx = np.arange(g.size)
        totals.append(_masked_sum(G, idx, idx, g.weight**2))
    diag = {"levels": [g.size for g in grids], "positive_part": totals}
    if not _diverges(totals, threshold=threshold):
        return WitnessResult(False, None, "none", diag)

    fine, G, h2 = grids[-1], mats[-1], grids[-1].weight**2
    # branch 1: a half-space A with int_A int_{A^c} g divergent
    best = None
    for axis in range(fine.dim_m):
        lo, hi = fine.domain.box[axis]
        for q in (0.25, 0.5, 0.75):
            c = lo + q * (hi - lo)
            for flip in (False, True):
                seq = []
                for g, M in zip(grids, mats):
                    A = (g.nodes[:, axis] < c) ^ flip
                    seq.append(_masked_sum(M, A, ~A, g.weight**2))
                if _diverges(seq, threshold=threshold):
                    score = math.inf if math.isinf(seq[-1]) else seq[-1] / max(seq[0], 1e-300)
                    if best is None or score > best[0]:
                        best = (score, axis, c, flip, seq)
    if best is not None:
        _, axis, c, flip, seq = best
        A = (fine.nodes[:, axis] < c) ^ flip
        u = _glue(phis[-1], psis[-1], A)
        diag.update(branch="split", axis=axis, cut=c, phi_side="below" if not flip else "above",
                    split_sums=seq)
        diag.update(_functional_check(f, u, seq[-1]))
        return WitnessResult(True, u, "split", diag)

    # branch 2: checkerboards on nested halvings
    layers = _nested_halvings(G, fine, depth_cap)
    S, per_layer = _layered_checkerboard(G, fine, layers)
    u = _glue(phis[-1], psis[-1], S)
    idx = np.arange(fine.size)
    lb = _masked_sum(G, idx[S], idx[~S], h2)
    diag.update(branch="layering", depth=len(layers) - 1, layers=per_layer,
                lower_bound=lb)
    diag.update(_functional_check(f, u, lb))
    return WitnessResult(True, u, "layering", diag)


def _functional_check(f, u, lower_bound):
    try:
        J = float(evaluate(f, u).value)
    except PoleError:
        J = math.inf
    return {"J_u": J, "J_u_ge_lower_bound": bool(J >= lower_bound * (1 - 1e-9))}


def _nested_halvings(G, grid, depth_cap):
    """``A_0 = X``, ``A_{l+1}`` = the half of ``A_l`` (cycling axes) with larger
    ``int_{A x A} g``; stops at ``depth_cap`` or when a half would be empty."""
    lo = grid.domain.lo.copy()
    hi = grid.domain.hi.copy()
    inside = np.ones(grid.size, dtype=bool)
    layers = [inside]
    h2 = grid.weight**2
    for depth in range(depth_cap):
        axis = depth % grid.dim_m
        mid = 0.5 * (lo[axis] + hi[axis])
        left = inside & (grid.nodes[:, axis] < mid)
        right = inside & (grid.nodes[:, axis] >= mid)
        if not left.any() or not right.any():
            break
        sl = _masked_sum(G, left, left, h2)
        sr = _masked_sum(G, right, right, h2)
        if sl >= sr:
            inside, hi[axis] = left, mid
        else:
            inside, lo[axis] = right, mid
        layers.append(inside)
    return layers


def _layered_checkerboard(G, grid, layers):
    """Pick ``delta_l = 2^a h`` per annulus ``A_l \\ A_{l+1}`` to maximise the
    covered mass ``int_{S x S^c} g``; innermost annulus first."""
    h = float(np.min(grid.spacing))
    h2 = grid.weight**2
    L = len(layers)
    empty = np.zeros(grid.size, dtype=bool)
    annulus = [layers[l] & ~(layers[l + 1] if l + 1 < L else empty) for l in range(L)]
    extent = float(np.max(grid.domain.hi - grid.domain.lo))
    a_max = max(1, int(math.floor(math.log2(extent / h))))
    # measured from the box corner, midpoints never sit on cube boundaries
    rel = grid.nodes - grid.domain.lo
    parity = {a: _parity(2.0**a * h, rel)[0] for a in range(1, a_max + 1)}
    choice = [1] * L
    idx = np.arange(grid.size)

    def build(ch):
        S = np.zeros(grid.size, dtype=bool)
        for l in range(L):
            S |= annulus[l] & parity[ch[l]]
        return S

    for l in reversed(range(L)):
        if not annulus[l].any():
            continue
        best_a, best_v = 1, -1.0
        for a in range(1, a_max + 1):
            trial = list(choice)
            trial[l] = a
            S = build(trial)
            v = _masked_sum(G, idx[S], idx[~S], h2)
            if v > best_v:
                best_a, best_v = a, v
        choice[l] = best_a
    S = build(choice)
    rows = []
    for l in range(L):
        in_layer = np.outer(layers[l], layers[l])
        if l + 1 < L:
            in_layer &= ~np.outer(layers[l + 1], layers[l + 1])
        Gl = np.where(in_layer, G, 0.0)
        finite = np.isfinite(Gl)
        mass = math.inf if not finite.all() else h2 * merge([compensated_row_sums(Gl)])
        cover = np.where(np.outer(S, ~S), Gl, 0.0)
        covered = math.inf if not finite.all() else h2 * merge([compensated_row_sums(cover)])
        # sum_j j * |E_{j,l}| where E_{j,l} = {g in [j-1, j)} inside the layer
        jl = h2 * stable_sum(np.where(in_layer & finite, np.floor(Gl) + 1.0, 0.0))
        rows.append({"layer": l, "delta": 2.0**choice[l] * h,
                     "measure": float(layers[l].sum() * grid.weight), "mass": mass,
                     "covered": covered, "sum_j_measure": jl,
                     "fraction": covered / mass if mass and math.isfinite(mass) else None})
    return S, rows


# -- homogeneous blow-up --------------------------------------------------


def blowup_sequence(f, p, M=1.0, blocks=8, sampler=None, max_radius=2.0**10):
    """Pairs ``(w_k, z_k)`` with ratio ``>= 2^(2k+2)`` for ``k = 1..blocks``.

    Candidates lie on the diagonals ``w = +-z`` and on seeded random rays;
    for each ``k`` the candidate of smallest norm meeting the bound is kept.
    Returns ``None`` when some ``k`` has no candidate.
    """
    sampler = sampler or Sampler()
    n = f.dim_n
    rng = sampler.rng(51)
    dirs_w = [np.ones(n), np.ones(n)]
    dirs_z = [np.ones(n), -np.ones(n)]
    for _ in range(16):
        dirs_w.append(rng.normal(size=n))
        dirs_z.append(rng.normal(size=n))
    t = np.concatenate([np.linspace(0.0, 8.0, 801)[1:], np.geomspace(8.0, max_radius, 400)])
    W = np.vstack([np.outer(t, d / np.linalg.norm(d)) for d in dirs_w])
    Z = np.vstack([np.outer(t, d / np.linalg.norm(d)) for d in dirs_z])
    r = _ratio(f, p, M, W, Z)
    norm = np.linalg.norm(W, axis=1) + np.linalg.norm(Z, axis=1)
    out = []
    for k in range(1, blocks + 1):
        ok = np.flatnonzero(r >= 2.0 ** (2 * k + 2))
        if ok.size == 0:
            return None
        i = ok[np.argmin(norm[ok])]
        out.append((W[i], Z[i], float(r[i])))
    return out


def homogeneous_witness(f, p, M=1.0, blocks=8, cells=1 << 16, sampler=None):
    """``u = sum_k (w_k chi_{E_k} + z_k chi_{F_k})`` on disjoint axis-1 stripes.

    ``|E_k| = |X| / (2^(k+1) (1 + p_M(w_k)))`` and likewise ``F_k`` with
    ``z_k``, rounded down to whole cells, so ``||u||_p <= |X|^(1/p)``. Because
    ``f`` ignores ``x, y``, the functional over the first ``K`` blocks is an
    exact finite sum over pairs of distinct values.
    """
    if not f.homogeneous:
        raise NonHomogeneousError(f"{f.label} depends on x or y")
    p = parse_exponent(p)
    sampler = sampler or Sampler()
    verdict = check_homogeneous_bound(f, p, M, sampler)
    diag = {"bound_check": verdict.status, "p": p, "M": M}
    if not verdict.refuted or math.isinf(p):
        diag["reason"] = "homogeneous bound not refuted" if not math.isinf(p) else \
            "p = inf admits no blow-up sets"
        return WitnessResult(False, None, "none", diag)
    seq = blowup_sequence(f, p, M, blocks, sampler)
    if seq is None:
        diag["reason"] = "no (w_k, z_k) sequence reaching the ratio thresholds"
        return WitnessResult(False, None, "none", diag)
    domain = f.domain
    if domain is None:
        from .grid import Domain
        domain = Domain.unit_cube(f.dim_m)
    grid = build_grid(domain, [cells] + [1] * (domain.dim_m - 1))
    L = measure(domain)
    h = grid.weight
    order = np.argsort(grid.nodes[:, 0], kind="stable")
    values = np.zeros((grid.size, f.dim_n))
    sets, cursor = [], 0
    for k, (w, z, r) in enumerate(seq, 1):
        for v in (w, z):
            size = L / (2.0 ** (k + 1) * (1.0 + float(p_function_array(v[None], p, M)[0])))
            count = int(math.floor(size / h))
            if count == 0:
                diag["reason"] = f"block {k} is smaller than one cell; raise cells"
                return WitnessResult(False, None, "none", diag)
            values[order[cursor:cursor + count]] = v
            sets.append((k, v, count * h))
            cursor += count
    u = GridFunction(grid, values, p)
    # exact block-truncated functional: pairs of constant pieces
    partial = []
    for K in range(1, blocks + 1):
        pieces = [(v, meas) for k, v, meas in sets if k <= K]
        V = np.array([v for v, _ in pieces])
        m = np.array([meas for _, meas in pieces])
        F = f.raw(np.zeros((len(V), 1, f.dim_m)), np.zeros((1, len(V), f.dim_m)),
                  V[:, None, :], V[None, :, :])
        F = np.broadcast_to(F, (len(V), len(V)))
        partial.append(merge([compensated_row_sums(m[:, None] * m[None, :] * F)])
                       if np.all(np.isfinite(F)) else math.inf)
    increments = [partial[0]] + [b - a for a, b in zip(partial, partial[1:])]
    norm = lp_norm(u)
    diag.update(pairs=[{"k": k, "w": w.tolist(), "z": z.tolist(), "ratio": r}
                       for k, (w, z, r) in enumerate(seq, 1)],
                set_measures=[{"block": k, "value": v.tolist(), "measure": meas}
                              for k, v, meas in sets],
                truncated_J=partial, increments=increments, norm=norm,
                norm_bound=L ** (1.0 / p), norm_ok=bool(norm <= L ** (1.0 / p) * (1 + 1e-9)),
                min_increment=min(increments))
    return WitnessResult(True, u, "homogeneous", diag)
