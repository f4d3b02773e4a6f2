"""Sampled checks of growth bounds, convexity and null-class membership,
and the separately convex decomposition of scalar integrands.

Every checker returns a :class:`~nonlocal_lsc.verdict.PropertyVerdict`.
A refutation carries a concrete counterexample that :func:`replay`
re-evaluates from scratch. Passing verdicts are evidence only.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from ._summation import compensated_row_sums, merge, stable_sum
from .functional import phi_hessian, phi_values
from .grid import (Domain, GridFunction, build_grid, p_function_array,
                   parse_exponent, random_grid_function)
from .integrand import PoleError, Symmetry, differentiate, verify_symmetry
from .verdict import DEFAULT_SEED, PASSED, REFUTED, PropertyVerdict, Sampler, jsonable

CHOICE_DEPENDENT = frozenset({"example-n2-vector"})


class NonHomogeneousError(ValueError):
    """The integrand depends on ``x`` or ``y``."""


class PhiNonconvexError(ArithmeticError):
    """``int gamma(x, y, w) dy`` is negative somewhere, so no decomposition exists."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class UnsupportedError(ValueError):
    pass


def _region(f, sampler):
    if sampler.domain is not None:
        return sampler.domain
    dom = getattr(f, "domain", None)
    return dom if dom is not None else Domain.unit_cube(f.dim_m)


def _row(a):
    return np.asarray(a, dtype=float).tolist()


def _raw(f, x, y, w, z):
    return np.asarray(f.raw(x, y, w, z), dtype=float)


# -- growth bounds --------------------------------------------------------


def _ratio(f, p, M, w, z):
    fx = np.zeros((len(w), f.dim_m))
    vals = np.abs(_raw(f, fx, fx, w, z))
    den = (1.0 + p_function_array(w, p, M)) * (1.0 + p_function_array(z, p, M))
    with np.errstate(invalid="ignore", over="ignore"):
        r = vals / den
    # a non-finite integrand value at a point with finite weight is unbounded
    return np.where(np.isfinite(vals), r, np.where(np.isfinite(den), np.inf, 0.0))


def _probe_points(n, R, count=33):
    t = np.linspace(-R, R, count)
    ones = np.ones(n)
    w = np.concatenate([t[:, None] * ones, t[:, None] * ones, np.zeros((1, n))])
    z = np.concatenate([t[:, None] * ones, -t[:, None] * ones, np.zeros((1, n))])
    return w, z


def check_homogeneous_bound(f, p, M=1.0, sampler=None, levels=8):
    """Search for growth of ``|f(w, z)| / ((1 + p_M(w)) (1 + p_M(z)))``.

    Boxes of radius ``R = 1, 2, 4, ..., 2**levels`` are sampled (uniformly and
    along the diagonals ``w = +-z``). The bound is refuted when the box maxima
    exceed ``1e6`` and increase over the last three doublings; otherwise the
    largest ratio seen is reported as the constant ``C``.
    """
    if not f.homogeneous:
        raise NonHomogeneousError(f"{f.label} depends on x or y")
    sampler = sampler or Sampler()
    p = parse_exponent(p)
    n = f.dim_n
    radii = [2.0**k for k in range(levels + 1)]
    if math.isinf(p):
        # outside |w| <= M the weight is infinite and the ratio vanishes
        radii = [min(R, M) for R in radii]
    per = max(16, sampler.budget // len(radii))
    best, best_at, maxima, fmin = 0.0, None, [], math.inf
    for k, R in enumerate(radii):
        rng = sampler.rng(k)
        w = sampler.values(rng, per, n, R)
        z = sampler.values(rng, per, n, R)
        pw, pz = _probe_points(n, R)
        w, z = np.vstack([w, pw]), np.vstack([z, pz])
        if math.isinf(p):
            keep = (np.linalg.norm(w, axis=1) <= M) & (np.linalg.norm(z, axis=1) <= M)
            w, z = w[keep], z[keep]
        fx = np.zeros((len(w), f.dim_m))
        vals = _raw(f, fx, fx, w, z)
        finite = vals[np.isfinite(vals)]
        if finite.size:
            fmin = min(fmin, float(finite.min()))
        r = _ratio(f, p, M, w, z)
        i = int(np.argmax(r))
        maxima.append(float(r[i]))
        if r[i] >= best:
            best, best_at = float(r[i]), (w[i], z[i], R)
    tail = maxima[-3:]
    growing = all(b > a for a, b in zip(tail, tail[1:])) or math.isinf(tail[-1])
    details = {"radii": radii, "box_maxima": maxima, "p": p, "M": M,
               "min_f": fmin if math.isfinite(fmin) else None}
    samples = per * len(radii)
    if tail[-1] > 1e6 and growing:
        w, z, R = best_at
        witness = {"w": _row(w), "z": _row(z), "ratio": best, "radius": R,
                   "p": p, "M": M}
        return PropertyVerdict("homogeneous-bound", REFUTED, samples, 1e6, witness,
                               sampler.seed, details)
    details["C"] = best
    return PropertyVerdict("homogeneous-bound", PASSED, samples, 1e6, None,
                           sampler.seed, details)


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    """Tabulated dominating functions for a p-boundedness claim.

    ``alpha`` has shape ``(N, N)`` and ``beta`` shape ``(N,)`` on ``grid``;
    both are read as piecewise constant per cell.
    """

    M: float
    grid: object
    alpha: np.ndarray
    beta: np.ndarray
    C: float
    p: float = 2.0

    def __post_init__(self):
        N = self.grid.size
        a = np.broadcast_to(np.asarray(self.alpha, dtype=float), (N, N))
        b = np.broadcast_to(np.asarray(self.beta, dtype=float), (N,))
        if np.any(a < 0) or np.any(b < 0) or self.C < 0:
            raise ValueError("certificate tables and C must be non-negative")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def pstar(self):
        """Hoelder conjugate of ``p``."""
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @classmethod
    def constant(cls, grid, M, alpha, beta, C, p=2.0):
        return cls(M, grid, np.full((grid.size, grid.size), float(alpha)),
                   np.full(grid.size, float(beta)), float(C), p)

    def bound(self, x, y, w, z):
        """Right-hand side of the domination inequality at sample rows."""
        i, j = self.grid.snap(x), self.grid.snap(y)
        if np.any(i < 0) or np.any(j < 0):
            raise ValueError("sample point outside the certificate grid")
        pw = p_function_array(w, self.p, self.M)
        pz = p_function_array(z, self.p, self.M)
        with np.errstate(invalid="ignore"):
            cross = np.where(self.C == 0, 0.0, self.C * pw * pz)
            return (self.alpha[i, j] + _zero_inf(self.beta[i], pz)
                    + _zero_inf(self.beta[j], pw) + cross)


def _zero_inf(a, b):
    with np.errstate(invalid="ignore"):
        return np.where(a == 0, 0.0, a * b)


def validate_p_bound_certificate(f, cert, p=None, sampler=None):
    """Sample ``|f| <= alpha(x,y) + beta(x) p_M(z) + beta(y) p_M(w) + C p_M(w) p_M(z)``."""
    sampler = sampler or Sampler()
    if p is not None and parse_exponent(p) != cert.p:
        raise ValueError("exponent differs from the certificate's")
    region = cert.grid.domain
    rng = sampler.rng(11)
    K = sampler.budget
    x = sampler.points(rng, K, region)
    y = sampler.points(rng, K, region)
    w = sampler.values(rng, K, f.dim_n)
    z = sampler.values(rng, K, f.dim_n)
    lhs = np.abs(_raw(f, x, y, w, z))
    rhs = cert.bound(x, y, w, z)
    tol = 1e-9 * (1.0 + np.where(np.isfinite(rhs), rhs, 0.0))
    with np.errstate(invalid="ignore"):
        excess = np.where(np.isinf(rhs), -np.inf, lhs - rhs - tol)
    excess = np.where(np.isnan(lhs), np.inf, excess)
    if np.any(excess > 0):
        i = int(np.argmax(excess))
        witness = {"x": _row(x[i]), "y": _row(y[i]), "w": _row(w[i]), "z": _row(z[i]),
                   "abs_f": float(lhs[i]), "bound": float(rhs[i])}
        return PropertyVerdict("p-bound-certificate", REFUTED, K, 1e-9, witness,
                               sampler.seed)
    return PropertyVerdict("p-bound-certificate", PASSED, K, 1e-9, None, sampler.seed,
                           {"M": cert.M, "C": cert.C, "p": cert.p, "pstar": cert.pstar})


# -- convexity ------------------------------------------------------------


def _convexity_gap(fa, fb, fm, theta):
    lhs = theta * fa + (1.0 - theta) * fb
    tol = 1e-9 * (1.0 + np.abs(fa) + np.abs(fb) + np.abs(fm))
    with np.errstate(invalid="ignore"):
        return fm - lhs - tol, tol


def check_separately_convex(f, sampler=None):
    """Sample chord inequalities in the ``w`` slot and in the ``z`` slot.

    ``f`` may be any object with ``dim_m``, ``dim_n`` and a vectorised
    ``raw(x, y, w, z)``. Non-finite samples are skipped and counted.
    """
    sampler = sampler or Sampler()
    region = _region(f, sampler)
    K, n = sampler.budget, f.dim_n
    skipped = 0
    for slot, salt in (("w", 21), ("z", 22)):
        rng = sampler.rng(salt)
        x = sampler.points(rng, K, region)
        y = sampler.points(rng, K, region)
        other = sampler.values(rng, K, n)
        a = sampler.values(rng, K, n)
        b = sampler.values(rng, K, n)
        theta = rng.uniform(0.0, 1.0, (K, 1))
        m = theta * a + (1.0 - theta) * b
        if slot == "w":
            fa, fb, fm = (_raw(f, x, y, v, other) for v in (a, b, m))
        else:
            fa, fb, fm = (_raw(f, x, y, other, v) for v in (a, b, m))
        gap, _ = _convexity_gap(fa, fb, fm, theta[:, 0])
        ok = np.isfinite(gap)
        skipped += int((~ok).sum())
        gap = np.where(ok, gap, -np.inf)
        if np.any(gap > 0):
            i = int(np.argmax(gap))
            witness = {"slot": slot, "x": _row(x[i]), "y": _row(y[i]),
                       "fixed": _row(other[i]), "w1": _row(a[i]), "w2": _row(b[i]),
                       "theta": float(theta[i, 0]), "f_w1": float(fa[i]),
                       "f_w2": float(fb[i]), "f_mid": float(fm[i]),
                       "violation": float(gap[i])}
            return PropertyVerdict("separate-convexity", REFUTED, 2 * K, 1e-9, witness,
                                   sampler.seed, {"skipped": skipped})
    return PropertyVerdict("separate-convexity", PASSED, 2 * K, 1e-9, None, sampler.seed,
                           {"skipped": skipped})


def random_w_triples(n, count, seed=DEFAULT_SEED, radius=4.0):
    """Seeded ``(w1, w2, theta)`` triples for profile convexity checks."""
    rng = np.random.default_rng([seed, 31])
    return [(rng.uniform(-radius, radius, n), rng.uniform(-radius, radius, n),
             float(rng.uniform(0.05, 0.95))) for _ in range(count)]


def default_psi_suite(f, count=10, nodes=64, seed=DEFAULT_SEED, scale=2.0):
    """Constants, piecewise-random and smooth random ``psi`` on ``f``'s domain."""
    domain = getattr(f, "domain", None) or Domain.unit_cube(f.dim_m)
    grid = build_grid(domain, [nodes] * f.dim_m)
    suite = [GridFunction.constant(grid, np.zeros(f.dim_n))]
    k = 0
    while len(suite) < count:
        smooth = k % 2 == 0
        suite.append(random_grid_function(grid, f.dim_n, seed=seed + k, scale=scale,
                                          smooth=smooth))
        k += 1
    return suite[:count]


def check_phi_convex(f, psi_suite, x_samples=None, w_triples=None, tolerance=0.0,
                     seed=DEFAULT_SEED, hessian=False):
    """Chord test of ``w -> int f(x, y, w, psi(y)) dy`` for every psi, x, triple.

    The tolerance per test is ``tolerance + 1e-9 (1 + |values|)``. With
    ``hessian=True`` the minimum determinant and eigenvalue of the profile
    Hessians at the triple points are recorded too.
    """
    if not psi_suite:
        raise ValueError("psi_suite must be non-empty")
    n = f.dim_n
    if x_samples is None:
        region = psi_suite[0].grid.domain
        x_samples = Sampler(seed=seed, heavy_tail=False).points(
            np.random.default_rng([seed, 32]), 8, region)
    x_samples = np.atleast_2d(np.asarray(x_samples, dtype=float))
    if w_triples is None:
        w_triples = random_w_triples(n, 50, seed)
    A = np.array([np.atleast_1d(t[0]) for t in w_triples], dtype=float).reshape(-1, n)
    B = np.array([np.atleast_1d(t[1]) for t in w_triples], dtype=float).reshape(-1, n)
    th = np.array([t[2] for t in w_triples], dtype=float)
    Mid = th[:, None] * A + (1.0 - th[:, None]) * B
    T = len(th)
    deriv = differentiate(f) if hessian else None
    min_det, min_eig = math.inf, math.inf
    for s, psi in enumerate(psi_suite):
        for x in x_samples:
            vals = phi_values(f, x, psi, np.vstack([A, B, Mid]))
            fa, fb, fm = vals[:T], vals[T:2 * T], vals[2 * T:]
            gap, _ = _convexity_gap(fa, fb, fm, th)
            gap = gap - tolerance
            if np.any(gap > 0):
                i = int(np.argmax(gap))
                witness = {"psi_index": s, "x": _row(x), "w1": _row(A[i]),
                           "w2": _row(B[i]), "theta": float(th[i]),
                           "phi_w1": float(fa[i]), "phi_w2": float(fb[i]),
                           "phi_mid": float(fm[i]), "violation": float(gap[i])}
                return PropertyVerdict("phi-convexity", REFUTED,
                                       len(psi_suite) * len(x_samples) * T, tolerance,
                                       witness, seed)
            if deriv is not None:
                H = phi_hessian(f, x, psi, np.vstack([A, B, Mid]), deriv)
                min_det = min(min_det, float(np.linalg.det(H).min()))
                min_eig = min(min_eig, float(np.linalg.eigvalsh(H).min()))
    details = {"psi_count": len(psi_suite), "x_count": len(x_samples), "triples": T}
    if deriv is not None:
        details.update(min_hessian_det=min_det, min_hessian_eig=min_eig)
    return PropertyVerdict("phi-convexity", PASSED, len(psi_suite) * len(x_samples) * T,
                           tolerance, None, seed, details)


@dataclass
class WlscReport:
    """Aggregated weak lower semi-continuity evidence for one integrand."""

    verdict: str  # wlsc-evidence | wlsc-refuted | inconclusive
    criterion: Optional[str]
    symmetry: str
    separate: Optional[PropertyVerdict]
    phi: Optional[PropertyVerdict]
    witness: Optional[dict] = None
    notes: list = field(default_factory=list)
    choice_dependent: bool = False

    @property
    def refuted(self):
        return self.verdict == "wlsc-refuted"

    def to_dict(self):
        return jsonable({
            "verdict": self.verdict, "criterion": self.criterion,
            "symmetry": self.symmetry, "witness": self.witness, "notes": self.notes,
            "choice_dependent": self.choice_dependent,
            "separate_convexity": self.separate.to_dict() if self.separate else None,
            "phi_convexity": self.phi.to_dict() if self.phi else None,
        })


def wlsc_verdict(f, p=2.0, psi_suite=None, sampler=None, x_samples=None, w_triples=None):
    """Combine separate convexity (sufficient) and profile convexity (characterising).

    A profile-convexity refutation always yields ``wlsc-refuted``. Otherwise
    passing separate convexity, then passing profile convexity, give
    ``wlsc-evidence``. Poles make the result ``inconclusive``.
    """
    sampler = sampler or Sampler()
    parse_exponent(p)
    sym = f.symmetric
    if sym is Symmetry.UNKNOWN:
        sym = verify_symmetry(f, seed=sampler.seed).symmetric
    notes = []
    if sym is Symmetry.REFUTED:
        notes.append("integrand is not pairwise symmetric; the profile criterion "
                     "is applied to f as given")
    if psi_suite is None:
        psi_suite = default_psi_suite(f, seed=sampler.seed)
    choice = getattr(f, "name", None) in CHOICE_DEPENDENT
    sep = check_separately_convex(f, sampler)
    try:
        phi = check_phi_convex(f, psi_suite, x_samples, w_triples, seed=sampler.seed)
    except PoleError as exc:
        return WlscReport("inconclusive", None, sym.value, sep, None,
                          notes=notes + [f"pole: {exc}"], choice_dependent=choice)
    if phi.refuted:
        return WlscReport("wlsc-refuted", "phi-convexity", sym.value, sep, phi,
                          phi.witness, notes, choice)
    if sep.passed:
        return WlscReport("wlsc-evidence", "separate-convexity", sym.value, sep, phi,
                          notes=notes, choice_dependent=choice)
    notes.append("not separately convex; evidence rests on the profile check")
    return WlscReport("wlsc-evidence", "phi-convexity", sym.value, sep, phi,
                      notes=notes, choice_dependent=choice)


# -- decomposition --------------------------------------------------------

DEFAULT_LADDER = tuple(2.0**k for k in range(8))


def _min_over_z(hess_fn, M, z_points=257, golden_steps=3):
    """Minimum of ``hess_fn(z)`` over ``[-M, M]``; ``hess_fn`` maps (Z,) -> (Z, ...)."""
    zs = np.linspace(-M, M, z_points)
    vals = hess_fn(zs)
    k = np.argmin(vals, axis=0)
    best = np.take_along_axis(vals, k[None], axis=0)[0]
    dz = zs[1] - zs[0]
    a = np.maximum(zs[k] - dz, -M)
    b = np.minimum(zs[k] + dz, M)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(golden_steps):
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = hess_fn(c, pointwise=True), hess_fn(d, pointwise=True)
        best = np.minimum(best, np.minimum(fc, fd))
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    return best


def gamma_ladder(f, grid, w_grid, M_ladder=DEFAULT_LADDER, deriv=None):
    """Tables ``gamma_M(x_i, y_j, w_k) = min_{|z| <= M} d^2_w f`` for each ``M``.

    Returns ``(tables, raw)`` with shape ``(L, N, N, K)``. ``raw`` holds the
    direct minima; ``tables`` is their running minimum along the ladder,
    which makes the sequence non-increasing in ``M`` exactly.
    """
    if f.dim_n != 1:
        raise UnsupportedError("decomposition is implemented for n = 1 only")
    deriv = differentiate(f) if deriv is None else deriv
    H = deriv.hess_w[0][0]
    X = grid.nodes
    N, K, L = grid.size, len(w_grid), len(M_ladder)
    W = np.asarray(w_grid, dtype=float)
    raw = np.empty((L, N, N, K))
    z_free = not deriv.hess_depends_on("z")
    for i in range(N):
        xi = np.broadcast_to(X[i], (N, K, X.shape[1]))
        yj = np.broadcast_to(X[:, None, :], (N, K, X.shape[1]))
        wk = np.broadcast_to(W[None, :, None], (N, K, 1))
        if z_free:
            vals = f.raw(xi, yj, wk, np.zeros((N, K, 1)), H)
            raw[:, i] = np.broadcast_to(vals, (N, K))
            continue

        def hess_fn(z, pointwise=False, xi=xi, yj=yj, wk=wk):
            if pointwise:
                return f.raw(xi, yj, wk, z[..., None], H)
            Z = z.reshape(-1, 1, 1, 1)
            return f.raw(xi[None], yj[None], wk[None],
                         np.broadcast_to(Z, (len(z), N, K, 1)), H)

        for l, M in enumerate(M_ladder):
            raw[l, i] = _min_over_z(hess_fn, float(M))
    if not np.all(np.isfinite(raw)):
        raise PoleError(f"{f.label}: second w-derivative is not finite on the tables")
    return np.minimum.accumulate(raw, axis=0), raw


def _anchored_double_integral(D, w_grid, k0):
    """``int_0^w int_0^v D(..., s) ds dv`` along the last axis (trapezoid)."""
    G1 = cumulative_trapezoid(D, w_grid, axis=-1, initial=0.0)
    G1 = G1 - G1[..., k0:k0 + 1]
    G2 = cumulative_trapezoid(G1, w_grid, axis=-1, initial=0.0)
    return G2 - G2[..., k0:k0 + 1]


class _SplineTable:
    """Cubic interpolation in ``w`` of a table ``T[i, j, k]`` over ``w_grid``."""

    def __init__(self, table, w_grid):
        self.w = np.asarray(w_grid, dtype=float)
        spline = CubicSpline(self.w, np.moveaxis(np.asarray(table, float), -1, 0), axis=0)
        self.c = spline.c  # (4, K-1, N, N)

    def __call__(self, i, j, w):
        """Values at index arrays ``i, j`` and points ``w`` (broadcast together)."""
        i, j, w = np.broadcast_arrays(i, j, np.asarray(w, dtype=float))
        k = np.clip(np.searchsorted(self.w, w, side="right") - 1, 0, len(self.w) - 2)
        t = w - self.w[k]
        c = self.c
        return ((c[0, k, i, j] * t + c[1, k, i, j]) * t + c[2, k, i, j]) * t + c[3, k, i, j]


class DecomposedIntegrand:
    """``f(x, y, w, z) - g(x, y, w) - g(y, x, z)`` with ``x, y`` snapped to grid nodes."""

    def __init__(self, f, grid, g_spline, w_range):
        self.base, self.grid, self.g = f, grid, g_spline
        self.dim_m, self.dim_n = f.dim_m, 1
        self.domain = grid.domain
        self.w_range = w_range
        self.name = f"tilde({f.name})" if getattr(f, "name", None) else None
        self.label = f"f - g - g [{f.label}]"

    def g_at(self, x, y, w):
        lead = np.broadcast_shapes(np.shape(x)[:-1], np.shape(y)[:-1], np.shape(w)[:-1])
        x = np.broadcast_to(x, lead + (self.dim_m,)).reshape(-1, self.dim_m)
        y = np.broadcast_to(y, lead + (self.dim_m,)).reshape(-1, self.dim_m)
        w = np.broadcast_to(w, lead + (1,)).reshape(-1)
        i, j = self.grid.snap(x), self.grid.snap(y)
        return self.g(i, j, w).reshape(lead)

    def raw(self, x, y, w, z, node=None):
        x, y = np.asarray(x, float), np.asarray(y, float)
        w, z = np.asarray(w, float), np.asarray(z, float)
        return self.base.raw(x, y, w, z) - self.g_at(x, y, w) - self.g_at(y, x, z)

    def __call__(self, x, y, w, z):
        return self.raw(x, y, w, z)


@dataclass(eq=False)
class Decomposition:
    """Tables of the separately convex decomposition ``f = f_tilde + g + g``.

    Axes are ``(x_i, y_j, w_k)`` over ``grid.nodes`` and ``w_grid``.
    ``h[i, j] = f(x_i, y_j, 0, 0)`` is stored for reference.
    """

    f: object
    grid: object
    w_grid: np.ndarray
    M_ladder: tuple
    gamma_M: np.ndarray
    gamma: np.ndarray
    mean_gamma: np.ndarray
    g: np.ndarray
    h: np.ndarray
    unstable: np.ndarray
    checks: dict = field(default_factory=dict)

    def __post_init__(self):
        self._spline = _SplineTable(self.g, self.w_grid)
        self.f_tilde = DecomposedIntegrand(self.f, self.grid, self._spline,
                                           (float(self.w_grid[0]), float(self.w_grid[-1])))

    def g_at(self, x, y, w):
        return self.f_tilde.g_at(x, y, w)

    def f_tilde_table(self):
        """``f_tilde`` at ``(x_i, y_j, w_k, z_l)``, shape ``(N, N, K, K)``."""
        X, W = self.grid.nodes, self.w_grid
        fv = self.f.raw(X[:, None, None, None, :], X[None, :, None, None, :],
                        W[None, None, :, None, None], W[None, None, None, :, None])
        gt = np.swapaxes(self.g, 0, 1)
        return fv - self.g[:, :, :, None] - gt[:, :, None, :]

    def residual(self):
        """Max of ``|f - f_tilde - g(x,y,w) - g(y,x,z)|`` over sampled table points."""
        X, W = self.grid.nodes, self.w_grid
        N, K = len(X), len(W)
        rng = np.random.default_rng(0)
        i, j = rng.integers(0, N, 512), rng.integers(0, N, 512)
        k, l = rng.integers(0, K, 512), rng.integers(0, K, 512)
        x, y = X[i], X[j]
        w, z = W[k][:, None], W[l][:, None]
        fv = self.f.raw(x, y, w, z)
        ft = self.f_tilde.raw(x, y, w, z)
        return float(np.max(np.abs(fv - ft - self.g[i, j, k] - self.g[j, i, l])))

    def summary(self):
        return jsonable({
            "integrand": self.f.label, "nodes": self.grid.size,
            "w_grid": [float(self.w_grid[0]), float(self.w_grid[-1]), len(self.w_grid)],
            "M_ladder": list(self.M_ladder),
            "unstable_entries": int(self.unstable.sum()),
            "min_mean_gamma": float(self.mean_gamma.min()),
            "max_abs_g_ymean": float(np.abs(_y_mean(self.g, self.grid)).max()),
            "h_symmetric": bool(np.allclose(self.h, self.h.T, rtol=0, atol=1e-12)),
            "checks": self.checks,
        })

    def to_json(self):
        return json.dumps(self.summary(), sort_keys=True)

    def tables_csv(self):
        """CSV texts for ``gamma``, ``g`` and ``h`` with axis headers."""
        X, W = self.grid.nodes, self.w_grid
        m = self.grid.dim_m
        out = {}
        for name, table in (("gamma", self.gamma), ("g", self.g)):
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow([f"x_{a + 1}" for a in range(m)] + [f"y_{a + 1}" for a in range(m)]
                        + ["w", name])
            for i in range(len(X)):
                for j in range(len(X)):
                    for k in range(len(W)):
                        wr.writerow([repr(float(t)) for t in X[i]]
                                    + [repr(float(t)) for t in X[j]]
                                    + [repr(float(W[k])), repr(float(table[i, j, k]))])
            out[name] = buf.getvalue()
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow([f"x_{a + 1}" for a in range(m)] + [f"y_{a + 1}" for a in range(m)] + ["h"])
        for i in range(len(X)):
            for j in range(len(X)):
                wr.writerow([repr(float(t)) for t in X[i]] + [repr(float(t)) for t in X[j]]
                            + [repr(float(self.h[i, j]))])
        out["h"] = buf.getvalue()
        return out

    def write_csv(self, directory):
        paths = []
        for name, text in self.tables_csv().items():
            path = os.path.join(directory, f"{name}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            paths.append(path)
        return paths


def _y_mean(table, grid):
    """``sum_j weight * T[i, j, ...]`` for every ``i`` (compensated)."""
    T = np.moveaxis(np.asarray(table, dtype=float), 1, -1)
    lead = T.shape[:-1]
    s, c = compensated_row_sums(T.reshape(-1, T.shape[-1]))
    return (grid.weight * (s + c)).reshape(lead)


def decompose(f, grid, w_grid, M_ladder=DEFAULT_LADDER, verify=True, sampler=None):
    """Separately convex decomposition of a scalar (``n = 1``) integrand.

    ``gamma`` is the last table of :func:`gamma_ladder`. Subtracting its
    y-mean and integrating twice in ``w`` from 0 gives ``g``, whose y-mean
    vanishes, and ``f_tilde = f - g(x,y,w) - g(y,x,z)``.

    Raises
    ------
    UnsupportedError
        For ``n != 1``.
    PhiNonconvexError
        If ``sum_j weight * gamma(x, y_j, w)`` is negative beyond rounding.
    """
    if f.dim_n != 1:
        raise UnsupportedError("decomposition is implemented for n = 1 only")
    w_grid = np.asarray(w_grid, dtype=float)
    if w_grid.ndim != 1 or len(w_grid) < 4 or np.any(np.diff(w_grid) <= 0):
        raise ValueError("w_grid must be increasing with at least 4 points")
    hits = np.flatnonzero(w_grid == 0.0)
    if hits.size != 1:
        raise ValueError("w_grid must contain w = 0 (the anchor of the w-integrals)")
    k0 = int(hits[0])
    M_ladder = tuple(float(M) for M in M_ladder)
    if any(b <= a for a, b in zip(M_ladder, M_ladder[1:])):
        raise ValueError("M_ladder must be increasing")
    deriv = differentiate(f)
    tables, raw = gamma_ladder(f, grid, w_grid, M_ladder, deriv)
    gamma = tables[-1]
    if len(M_ladder) > 1:
        prev = tables[-2]
        unstable = np.abs(gamma - prev) > 1e-6 * (1.0 + np.abs(prev))
    else:
        unstable = np.zeros(gamma.shape, dtype=bool)
    total = _y_mean(gamma, grid)  # (N, K): sum_j weight * gamma
    scale = _y_mean(np.abs(gamma), grid)
    worst = total + 1e-9 * (1.0 + scale)
    if np.any(worst < 0):
        i, k = np.unravel_index(int(np.argmin(worst)), worst.shape)
        raise PhiNonconvexError(
            f"int gamma(x, y, w) dy = {total[i, k]:.6g} < 0 at x={grid.nodes[i].tolist()}, "
            f"w={w_grid[k]:.6g}; no separately convex decomposition exists",
            {"x": grid.nodes[i].tolist(), "w": float(w_grid[k]), "value": float(total[i, k])})
    mean = total / grid.total_measure
    g = _anchored_double_integral(gamma - mean[:, None, :], w_grid, k0)
    X = grid.nodes
    h = np.broadcast_to(f.raw(X[:, None, :], X[None, :, :], np.zeros((1, 1, 1)),
                              np.zeros((1, 1, 1))), (grid.size, grid.size)).copy()
    dec = Decomposition(f, grid, w_grid, M_ladder, tables, gamma, mean, g, h, unstable)
    grad_ok = bool(np.all(np.isfinite(deriv.grad(X[:, None, None, :], X[None, :, None, :],
                                                  w_grid[None, None, :, None],
                                                  np.zeros((1, 1, 1, 1))))))
    dec.checks["gradient_finite"] = grad_ok
    dec.checks["residual"] = dec.residual()
    dec.checks["g_ymean_max"] = float(np.abs(_y_mean(g, grid)).max())
    if verify:
        sampler = sampler or Sampler(radius=float(np.max(np.abs(w_grid))), domain=grid.domain)
        dec.checks["separate_convexity"] = check_separately_convex(dec.f_tilde, sampler).to_dict()
    return dec


# -- null class -----------------------------------------------------------


def tabulate_g(fn, grid, w_grid):
    """Table ``fn(x_i, y_j, w_k)`` of shape ``(N, N, K)``; ``fn`` is vectorised."""
    X, W = grid.nodes, np.asarray(w_grid, dtype=float)
    vals = fn(X[:, None, None, :], X[None, :, None, :], W[None, None, :])
    return np.broadcast_to(np.asarray(vals, dtype=float),
                           (grid.size, grid.size, len(W))).copy()


def tabulate_h(fn, grid):
    X = grid.nodes
    vals = fn(X[:, None, :], X[None, :, :])
    return np.broadcast_to(np.asarray(vals, dtype=float), (grid.size, grid.size)).copy()


def null_class_value(spline, h_table, u):
    """Quadrature of ``g(x,y,u(x)) + g(y,x,u(y)) + h(x,y)`` on the grid of ``u``."""
    N = u.grid.size
    idx = np.arange(N)
    G = spline(idx[:, None], idx[None, :], u.values[:, 0][:, None])
    F = G + G.T + h_table
    return u.grid.weight**2 * merge([compensated_row_sums(F)])


def check_null_class(g_table, h_table, grid, w_grid, trials=20, seed=DEFAULT_SEED, tol=1e-8):
    """Check the null-class conditions on tables, then ``J = 0`` on random ``u``.

    The conditions are ``sum_j weight g(x_i, y_j, w) = 0`` for every ``(i, w)``,
    ``sum_ij weight^2 h = 0`` and ``h`` symmetric (all within ``tol``); then
    ``|J(u)| <= 1e-7 (1 + ||u||_2^2)`` for ``trials`` seeded random ``u``
    with values inside the ``w_grid`` range.
    """
    g_table = np.asarray(g_table, dtype=float)
    h_table = np.broadcast_to(np.asarray(h_table, dtype=float), (grid.size, grid.size))
    w_grid = np.asarray(w_grid, dtype=float)

    def refute(witness):
        return PropertyVerdict("null-class", REFUTED, trials, tol, witness, seed)

    means = _y_mean(g_table, grid)
    if np.max(np.abs(means)) > tol:
        i, k = np.unravel_index(int(np.argmax(np.abs(means))), means.shape)
        return refute({"condition": "g-ymean", "x": grid.nodes[i].tolist(),
                       "w": float(w_grid[k]), "value": float(means[i, k])})
    asym = np.abs(h_table - h_table.T)
    if np.max(asym) > tol:
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        return refute({"condition": "h-symmetry", "i": int(i), "j": int(j),
                       "value": float(asym[i, j])})
    hsum = grid.weight**2 * stable_sum(h_table)
    if abs(hsum) > tol:
        return refute({"condition": "h-mean", "value": hsum})
    spline = _SplineTable(g_table, w_grid)
    lo, hi = float(w_grid[0]), float(w_grid[-1])
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, 41, t])
        u = GridFunction(grid, rng.uniform(lo, hi, (grid.size, 1)) * 0.95)
        J = null_class_value(spline, h_table, u)
        scale = u.grid.weight * stable_sum(u.values[:, 0] ** 2)
        bound = 1e-7 * (1.0 + scale)
        worst = max(worst, abs(J) / bound)
        if abs(J) > bound:
            return refute({"condition": "functional", "trial": t, "seed": [seed, 41, t],
                           "J": J, "bound": bound})
    return PropertyVerdict("null-class", PASSED, trials, tol, None, seed,
                           {"h_total": hsum, "max_g_ymean": float(np.max(np.abs(means))),
                            "worst_J_over_bound": worst})


# -- replay ---------------------------------------------------------------


def replay(f, verdict, psi_suite=None, cert=None):
    """Re-evaluate a refutation witness; True if the violation reproduces."""
    if not verdict.refuted:
        raise ValueError("only refuted verdicts carry a witness")
    w = verdict.witness
    arr = lambda k: np.atleast_2d(np.asarray(w[k], dtype=float))  # noqa: E731
    check = verdict.check
    if check == "pairwise-symmetry":
        a = float(f.raw(arr("x"), arr("y"), arr("w"), arr("z"))[0])
        b = float(f.raw(arr("y"), arr("x"), arr("z"), arr("w"))[0])
        return abs(a - b) > 1e-9 * (1 + abs(a))
    if check == "separate-convexity":
        x, y, o = arr("x"), arr("y"), arr("fixed")
        a, b, th = arr("w1"), arr("w2"), w["theta"]
        m = th * a + (1 - th) * b
        if w["slot"] == "w":
            vals = [float(_raw(f, x, y, v, o)[0]) for v in (a, b, m)]
        else:
            vals = [float(_raw(f, x, y, o, v)[0]) for v in (a, b, m)]
        gap, _ = _convexity_gap(np.array(vals[0]), np.array(vals[1]), np.array(vals[2]), th)
        return bool(gap > 0)
    if check == "phi-convexity":
        if psi_suite is None:
            raise ValueError("replaying a profile witness needs the psi suite")
        psi = psi_suite[w["psi_index"]]
        a, b, th = arr("w1"), arr("w2"), w["theta"]
        vals = phi_values(f, np.asarray(w["x"]), psi, np.vstack([a, b, th * a + (1 - th) * b]))
        gap, _ = _convexity_gap(vals[0], vals[1], vals[2], th)
        return bool(gap - verdict.tolerance > 0)
    if check == "homogeneous-bound":
        r = _ratio(f, w["p"], w["M"], arr("w"), arr("z"))[0]
        return bool(r > 1e6)
    if check == "p-bound-certificate":
        if cert is None:
            raise ValueError("replaying a certificate witness needs the certificate")
        lhs = abs(float(_raw(f, arr("x"), arr("y"), arr("w"), arr("z"))[0]))
        rhs = float(cert.bound(arr("x"), arr("y"), arr("w"), arr("z"))[0])
        return lhs > rhs + 1e-9 * (1 + rhs)
    raise ValueError(f"no replay rule for check {check!r}")
