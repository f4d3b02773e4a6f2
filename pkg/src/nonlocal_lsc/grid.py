"""Bounded domains, midpoint grids and sampled functions on them.

Extended reals are plain floats: ``math.inf`` stands for the value
:math:`+\\infty`. Nothing in this module produces NaN.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._summation import stable_sum

INF = math.inf


class InvalidDomainError(ValueError):
    pass


def parse_exponent(p):
    """Accept ``1``, ``2.5``, ``"inf"``, ``math.inf``; reject ``p < 1``."""
    if isinstance(p, str):
        p = INF if p.strip().lower() in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box in R^m, optionally cut down by a membership mask.

    Parameters
    ----------
    box : sequence of (lo, hi)
        Per-axis bounds.
    mask : callable, optional
        Vectorised predicate ``mask(points) -> bool array`` where ``points``
        has shape ``(K, m)``.
    """

    box: tuple
    mask: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if not box:
            raise InvalidDomainError("domain needs at least one axis")
        for lo, hi in box:
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise InvalidDomainError(f"degenerate axis ({lo}, {hi})")
        object.__setattr__(self, "box", box)

    @property
    def dim_m(self):
        return len(self.box)

    @property
    def lo(self):
        return np.array([b[0] for b in self.box])

    @property
    def hi(self):
        return np.array([b[1] for b in self.box])

    @property
    def box_volume(self):
        return float(np.prod(self.hi - self.lo))

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.all((points > self.lo) & (points < self.hi), axis=1)
        if self.mask is not None:
            inside &= np.asarray(self.mask(points), dtype=bool)
        return inside

    @classmethod
    def interval(cls, lo=0.0, hi=1.0):
        return cls(((lo, hi),))

    @classmethod
    def unit_cube(cls, m=1):
        return cls(tuple((0.0, 1.0) for _ in range(m)))


def _axis_midpoints(lo, hi, n):
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform midpoint grid. Only cells whose midpoint passes the mask are kept."""

    domain: Domain
    nodes_per_axis: tuple
    nodes: np.ndarray
    weight: float
    cell_index: np.ndarray  # flat row-major index of each kept cell in the full box

    @property
    def dim_m(self):
        return self.domain.dim_m

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def spacing(self):
        return (self.domain.hi - self.domain.lo) / np.asarray(self.nodes_per_axis)

    @property
    def total_measure(self):
        return self.weight * self.size

    def refine(self, factor=2):
        return build_grid(self.domain, [n * factor for n in self.nodes_per_axis])

    def locate(self, points):
        """Flat full-box cell index for each point (clipped to the box)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        npa = np.asarray(self.nodes_per_axis)
        idx = np.floor((points - self.domain.lo) / self.spacing).astype(int)
        idx = np.clip(idx, 0, npa - 1)
        return np.ravel_multi_index(tuple(idx.T), tuple(npa))

    def snap(self, points):
        """Map points to the kept node of their cell; -1 where the cell is masked."""
        full = self.locate(points)
        lookup = np.full(int(np.prod(self.nodes_per_axis)), -1)
        lookup[self.cell_index] = np.arange(self.size)
        return lookup[full]


def build_grid(domain, nodes_per_axis):
    """Midpoint grid with ``nodes_per_axis`` cells per axis.

    >>> g = build_grid(Domain.interval(), [4])
    >>> g.nodes[:, 0].tolist(), g.weight
    ([0.125, 0.375, 0.625, 0.875], 0.25)
    """
    if np.isscalar(nodes_per_axis):
        nodes_per_axis = [nodes_per_axis] * domain.dim_m
    npa = tuple(int(n) for n in nodes_per_axis)
    if len(npa) != domain.dim_m:
        raise ValueError("nodes_per_axis must have one entry per axis")
    if any(n < 1 for n in npa):
        raise ValueError(f"nodes_per_axis must be >= 1, got {npa}")
    axes = [_axis_midpoints(lo, hi, n) for (lo, hi), n in zip(domain.box, npa)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([a.ravel() for a in mesh], axis=1)
    flat = np.arange(nodes.shape[0])
    if domain.mask is not None:
        keep = np.asarray(domain.mask(nodes), dtype=bool)
        if not keep.any():
            raise InvalidDomainError("mask removes every cell")
        nodes, flat = nodes[keep], flat[keep]
    weight = float(np.prod([(hi - lo) / n for (lo, hi), n in zip(domain.box, npa)]))
    return Grid(domain, npa, nodes, weight, flat)


def measure(domain, resolution=1024):
    """Lebesgue measure of the domain, by cell counting for masked domains."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if domain.mask is None:
        return domain.box_volume
    try:
        g = build_grid(domain, [resolution] * domain.dim_m)
    except InvalidDomainError:
        return 0.0
    return g.size * g.weight


def p_function(w, p, M=1.0):
    """``|w|^p`` for finite p; for p = inf, 0 if ``|w| <= M`` and inf otherwise."""
    if not M > 0:
        raise ValueError("M must be positive")
    p = parse_exponent(p)
    norm = float(np.linalg.norm(np.atleast_1d(np.asarray(w, dtype=float))))
    if math.isinf(p):
        return INF if norm > M else 0.0
    return norm**p


def p_function_array(values, p, M=1.0):
    """Vectorised :func:`p_function` over the rows of ``values`` (shape (K, n))."""
    p = parse_exponent(p)
    norms = np.linalg.norm(np.atleast_2d(np.asarray(values, dtype=float)), axis=1)
    if math.isinf(p):
        return np.where(norms > M, INF, 0.0)
    return norms**p


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Sampled map ``u: grid -> R^n`` tagged with an exponent ``p``."""

    grid: Grid
    values: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} rows of values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def n(self):
        return self.values.shape[1]

    def with_values(self, values):
        return GridFunction(self.grid, values, self.p)

    def __add__(self, other):
        other = other.values if isinstance(other, GridFunction) else other
        return self.with_values(self.values + other)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    @classmethod
    def constant(cls, grid, c, p=2.0):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        return cls(grid, np.tile(c, (grid.size, 1)), p)

    @classmethod
    def from_callable(cls, grid, fn, p=2.0):
        """``fn`` receives the (K, m) node array and returns (K,) or (K, n)."""
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float), p)

    def prolong(self, fine_grid):
        """Piecewise-constant transfer onto a grid that refines this one."""
        coarse = self.grid
        full = np.zeros((int(np.prod(coarse.nodes_per_axis)), self.n))
        full[coarse.cell_index] = self.values
        return GridFunction(fine_grid, full[coarse.locate(fine_grid.nodes)], self.p)


def random_grid_function(grid, n=1, seed=0, scale=1.0, p=2.0, smooth=False):
    """Seeded random grid function; ``smooth=True`` gives a random trig sum in x_1."""
    rng = np.random.default_rng(seed)
    if not smooth:
        return GridFunction(grid, rng.uniform(-scale, scale, (grid.size, n)), p)
    lo, hi = grid.domain.box[0]
    t = (grid.nodes[:, 0] - lo) / (hi - lo)
    vals = np.zeros((grid.size, n))
    for c in range(n):
        for k in range(1, 4):
            a, b = rng.normal(size=2) * scale / k
            vals[:, c] += a * np.cos(math.pi * k * t) + b * np.sin(math.pi * k * t)
    return GridFunction(grid, vals, p)


def lp_norm_pow(u):
    """``sum_i weight * |u_i|^p`` for finite p (the p-th power of the norm)."""
    if math.isinf(u.p):
        raise ValueError("no p-th power for p = inf")
    return u.grid.weight * stable_sum(p_function_array(u.values, u.p))


def lp_norm(u):
    """Discrete L^p norm of a grid function (exact max for p = inf)."""
    if math.isinf(u.p):
        return float(np.max(np.linalg.norm(u.values, axis=1)))
    return lp_norm_pow(u) ** (1.0 / u.p)


# -- CSV ------------------------------------------------------------------


def grid_function_to_csv(u, path=None):
    """One row per node: ``x_1..x_m, u_1..u_n`` with a header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x_{k + 1}" for k in range(u.grid.dim_m)]
                    + [f"u_{c + 1}" for c in range(u.n)])
    for x, v in zip(u.grid.nodes, u.values):
        writer.writerow([repr(float(t)) for t in x] + [repr(float(t)) for t in v])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def grid_function_from_csv(source, grid, p=2.0):
    """Read a grid function written by :func:`grid_function_to_csv`.

    Rows are matched to grid nodes by cell lookup, so row order is free.
    """
    if hasattr(source, "read"):
        text = source.read()
    elif "\n" in str(source):
        text = str(source)
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    m = sum(1 for h in header if h.startswith("x_"))
    if m != grid.dim_m:
        raise ValueError(f"CSV has {m} coordinate columns, grid has {grid.dim_m}")
    data = np.array([[float(t) for t in r] for r in body])
    idx = grid.snap(data[:, :m])
    if np.any(idx < 0) or len(set(idx.tolist())) != grid.size or len(idx) != grid.size:
        raise ValueError("CSV rows do not match the grid nodes one-to-one")
    vals = np.empty((grid.size, data.shape[1] - m))
    vals[idx] = data[:, m:]
    return GridFunction(grid, vals, p)


def parse_domain(text):
    """``"lo,hi;lo,hi"`` -> :class:`Domain`."""
    box = []
    for part in text.split(";"):
        lo, hi = (float(t) for t in part.split(","))
        box.append((lo, hi))
    return Domain(tuple(box))


def parse_nodes(text: str, m: int) -> Sequence[int]:
    vals = [int(t) for t in str(text).split(",")]
    return vals * m if len(vals) == 1 else vals
