"""Integrands ``f(x, y, w, z)`` of non-local functionals.

An :class:`Integrand` wraps a parsed expression together with its dimensions
``m`` (space) and ``n`` (codomain). Calling it evaluates with numpy
broadcasting; ``x, y`` carry a trailing axis of length ``m`` and ``w, z`` one
of length ``n``.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import expr as ex
from .grid import Domain
from .verdict import DEFAULT_SEED, PASSED, REFUTED, PropertyVerdict


class PoleError(ArithmeticError):
    """Integrand evaluated to a non-finite value; ``locations`` lists where."""

    def __init__(self, message, locations=()):
        super().__init__(message)
        self.locations = list(locations)


class AsymmetricIntegrandError(ValueError):
    pass


class Symmetry(str, enum.Enum):
    UNKNOWN = "unknown"
    DECLARED = "declared"
    VERIFIED = "verified"
    REFUTED = "refuted"


@dataclass(frozen=True, eq=False)
class Integrand:
    """Parsed integrand with its dimensions and bookkeeping flags."""

    expr: ex.Node
    dim_m: int = 1
    dim_n: int = 1
    symmetric: Symmetry = Symmetry.UNKNOWN
    name: Optional[str] = None
    domain: Optional[Domain] = field(default=None, compare=False)
    doc: str = ""

    @property
    def smooth_w(self):
        return not ex.nonsmooth_in(self.expr, ("w",))

    @property
    def text(self):
        return ex.to_text(self.expr)

    @property
    def homogeneous(self):
        """True if ``f`` does not depend on ``x`` or ``y``."""
        return not ex.has_kind(self.expr, ("x", "y"))

    @property
    def label(self):
        return f"builtin:{self.name}" if self.name else self.text

    def env(self, x, y, w, z):
        env = {}
        for kind, arr, dim in (("x", x, self.dim_m), ("y", y, self.dim_m),
                               ("w", w, self.dim_n), ("z", z, self.dim_n)):
            arr = np.asarray(arr, dtype=float)
            if arr.ndim == 0:
                arr = arr[None]
            if arr.shape[-1] != dim:
                raise ValueError(f"{kind} has trailing size {arr.shape[-1]}, expected {dim}")
            for k in range(dim):
                env[f"{kind}{k + 1}"] = arr[..., k]
        return env

    def raw(self, x, y, w, z, node=None):
        """Vectorised evaluation without pole checks (may contain inf/nan)."""
        env = self.env(x, y, w, z)
        out = ex.evaluate(self.expr if node is None else node, env)
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
        return np.broadcast_to(np.asarray(out, dtype=float), shape)

    def __call__(self, x, y, w, z):
        out = self.raw(x, y, w, z)
        bad = ~np.isfinite(out)
        if np.any(bad):
            locs = [tuple(int(i) for i in t) for t in np.argwhere(bad)[:10]]
            raise PoleError(f"{self.label}: non-finite value at {np.count_nonzero(bad)} "
                            f"point(s)", locs)
        return out

    def with_symmetry(self, status):
        return replace(self, symmetric=Symmetry(status))


def parse(text, dim_m=1, dim_n=1, *, symmetric=Symmetry.UNKNOWN, domain=None, name=None):
    """Parse an integrand expression such as ``"(w1 - z1)^2"``."""
    return Integrand(ex.parse_expr(text, dim_m, dim_n), dim_m, dim_n,
                     Symmetry(symmetric), name=name, domain=domain)


def eval_point(f, x, y, w, z):
    """Pointwise value ``f(x, y, w, z)`` as a float; raises :class:`PoleError`."""
    x, y = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))
    w, z = np.atleast_1d(np.asarray(w, float)), np.atleast_1d(np.asarray(z, float))
    v = float(f.raw(x, y, w, z))
    if not math.isfinite(v):
        raise PoleError(f"{f.label}: pole at x={x}, y={y}, w={w}, z={z}",
                        [(tuple(x), tuple(y), tuple(w), tuple(z))])
    return v


def swapped(f):
    """``(x, y, w, z) -> f(y, x, z, w)`` as an integrand."""
    return replace(f, expr=ex.substitute(f.expr, ex.swap_mapping(f.dim_m, f.dim_n)),
                   name=None, symmetric=Symmetry.UNKNOWN)


def symmetrize(f):
    """``0.5 * (f(x, y, w, z) + f(y, x, z, w))``; symmetric by construction."""
    g = swapped(f)
    node = ex.BinOp("*", ex.Num(0.5), ex.BinOp("+", f.expr, g.expr))
    return Integrand(node, f.dim_m, f.dim_n, Symmetry.VERIFIED,
                     name=f"sym({f.name})" if f.name else None, domain=f.domain)


def _sample_region(f, domain):
    if domain is not None:
        return domain
    if f.domain is not None:
        return f.domain
    return Domain.unit_cube(f.dim_m)


def check_pairwise_symmetry(f, samples=500, seed=DEFAULT_SEED, domain=None, radius=3.0):
    """Search for ``(x, y, w, z)`` with ``|f - f_swapped| > 1e-9 (1 + |f|)``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    region = _sample_region(f, domain)
    rng = np.random.default_rng([seed, 1])
    lo, hi = region.lo, region.hi
    x = lo + rng.random((samples, f.dim_m)) * (hi - lo)
    y = lo + rng.random((samples, f.dim_m)) * (hi - lo)
    w = rng.uniform(-radius, radius, (samples, f.dim_n))
    z = rng.uniform(-radius, radius, (samples, f.dim_n))
    a = f.raw(x, y, w, z)
    b = f.raw(y, x, z, w)
    ok = np.isfinite(a) & np.isfinite(b)
    gap = np.where(ok, np.abs(a - b), 0.0)
    tol = 1e-9 * (1.0 + np.abs(np.where(ok, a, 0.0)))
    bad = np.flatnonzero(gap > tol)
    if bad.size:
        i = int(bad[np.argmax(gap[bad] - tol[bad])])
        witness = {"x": x[i], "y": y[i], "w": w[i], "z": z[i],
                   "f": float(a[i]), "f_swapped": float(b[i])}
        return PropertyVerdict("pairwise-symmetry", REFUTED, samples, 1e-9,
                               witness=_plain(witness), seed=seed)
    return PropertyVerdict("pairwise-symmetry", PASSED, samples, 1e-9, seed=seed,
                           details={"evaluated": int(ok.sum())})


def verify_symmetry(f, samples=500, seed=DEFAULT_SEED):
    """Return ``f`` tagged ``verified`` or ``refuted`` after a symmetry check."""
    v = check_pairwise_symmetry(f, samples, seed)
    return f.with_symmetry(Symmetry.REFUTED if v.refuted else Symmetry.VERIFIED)


def require_symmetric(f, what="this operation"):
    """Raise unless ``f`` is declared/verified symmetric (checks when unknown)."""
    status = f.symmetric
    if status is Symmetry.UNKNOWN:
        status = verify_symmetry(f).symmetric
    if status is Symmetry.REFUTED:
        raise AsymmetricIntegrandError(f"{f.label} is not pairwise symmetric; "
                                       f"{what} needs f(x,y,w,z) = f(y,x,z,w)")


def _plain(d):
    return {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
            for k, v in d.items()}


@dataclass(frozen=True, eq=False)
class IntegrandDeriv:
    """Symbolic first and second w-derivatives of an integrand."""

    base: Integrand
    grad_w: tuple
    hess_w: tuple  # n x n nested tuples

    def grad(self, x, y, w, z):
        """Array of shape ``broadcast + (n,)``."""
        return np.stack([self.base.raw(x, y, w, z, g) for g in self.grad_w], axis=-1)

    def hess(self, x, y, w, z):
        """Array of shape ``broadcast + (n, n)``."""
        rows = [np.stack([self.base.raw(x, y, w, z, h) for h in row], axis=-1)
                for row in self.hess_w]
        return np.stack(rows, axis=-2)

    def hess_depends_on(self, kind):
        return any(ex.has_kind(h, (kind,)) for row in self.hess_w for h in row)


def differentiate(f):
    """Symbolic gradient and Hessian of ``f`` in the ``w`` slot."""
    if not f.smooth_w:
        raise ex.NonSmoothError(f"{f.label} is not smooth in w "
                                "(abs/step/min/max applied to w)")
    names = [f"w{c + 1}" for c in range(f.dim_n)]
    grad = tuple(ex.diff(f.expr, v) for v in names)
    hess = tuple(tuple(ex.diff(g, v) for v in names) for g in grad)
    return IntegrandDeriv(f, grad, hess)


# -- builtin integrands ---------------------------------------------------


def n2_a(zeta):
    """Non-negative convex C^2 function equal to ``|zeta| - 1`` off (-2, 2).

    Inside, ``a(s) = s^4 (10 - 6 s + s^2) / 32`` with ``s = |zeta|``; this
    matches value 1, slope 1 and curvature 0 at ``s = 2`` and has
    ``a'' = (15/16) s^2 (2 - s)^2 >= 0``.
    """
    s = np.abs(np.asarray(zeta, dtype=float))
    inner = s**4 * (10.0 - 6.0 * s + s**2) / 32.0
    return np.where(s >= 2.0, s - 1.0, inner)


def n2_b(zeta):
    """``1 + t + t^2/2`` for ``t >= 0``, its reciprocal mirror for ``t < 0``."""
    t = np.asarray(zeta, dtype=float)
    pos = 1.0 + t + 0.5 * t**2
    with np.errstate(divide="ignore"):
        negv = 1.0 / (1.0 - t + 0.5 * t**2)
    return np.where(t >= 0, pos, negv)


def _a_text(v):
    s = f"abs({v})"
    return (f"(step({s} - 2) * ({s} - 1) + (1 - step({s} - 2)) * "
            f"{s}^4 * (10 - 6 * {s} + {s}^2) / 32)")


def _b_text(v):
    return (f"(step({v}) * (1 + {v} + 0.5 * {v}^2) + "
            f"(1 - step({v})) / (1 - {v} + 0.5 * {v}^2))")


_EX3 = "step(z1 - x1) * step(1 - z1) / z1"

_BUILTINS = {
    "example-3-divergent": dict(
        text=_EX3, m=1, n=1, domain=(0.0, 1.0), symmetric=Symmetry.UNKNOWN,
        doc="1/z if z in [x, 1], else 0, on X = (0, 1): integrable functional "
            "that is not p-bounded.",
    ),
    "example-4-nonlsc": dict(
        text="0.5 * (neg(step(z1 - x1) * step(1 - z1) / z1) + "
             "neg(step(w1 - y1) * step(1 - w1) / w1))",
        m=1, n=1, domain=(0.0, 1.0), symmetric=Symmetry.DECLARED,
        doc="Symmetrisation of -1/z on z in [x, 1]: lower semi-continuous "
            "integrand whose functional is not strongly lsc.",
    ),
    "example-n2-vector": dict(
        text=(f"step(y1) * 0.5 * ({_b_text('z1')} * w1^2 + {_b_text('(neg(z1))')} * w2^2)"
              f" + (1 - step(y1)) * (0.5 * {_a_text('z1')} * (w1^2 + w2^2)"
              f" + z1 * w1 * w2)"),
        m=1, n=2, domain=(-1.0, 1.0), symmetric=Symmetry.UNKNOWN,
        doc="Vector-valued (n = 2) integrand on X = [-1, 1] with convex "
            "profiles but no separately convex representative. The bridge "
            "a(s) = s^4 (10 - 6 s + s^2) / 32 on |s| < 2 is a fixed choice.",
    ),
    "quadratic-difference": dict(text="(w1 - z1)^2", m=1, n=1, domain=(0.0, 1.0),
                                 symmetric=Symmetry.DECLARED, doc="(w - z)^2"),
    "separable-quadratic": dict(text="w1^2 + z1^2", m=1, n=1, domain=(0.0, 1.0),
                                symmetric=Symmetry.DECLARED, doc="w^2 + z^2"),
    "shifted-quadratic": dict(text="(w1 - 1)^2 + (z1 - 1)^2", m=1, n=1,
                              domain=(0.0, 1.0), symmetric=Symmetry.DECLARED,
                              doc="(w - 1)^2 + (z - 1)^2, minimised by u = 1"),
    "strictly-convex": dict(text="(w1 - z1)^2 + w1^2 + z1^2", m=1, n=1,
                            domain=(0.0, 1.0), symmetric=Symmetry.DECLARED,
                            doc="(w - z)^2 + w^2 + z^2, minimised by u = 0"),
    "product": dict(text="w1 * z1", m=1, n=1, domain=(0.0, 1.0),
                    symmetric=Symmetry.DECLARED, doc="w z"),
    "quartic-product": dict(text="w1^2 * z1^2", m=1, n=1, domain=(0.0, 1.0),
                            symmetric=Symmetry.DECLARED, doc="w^2 z^2"),
    "weighted-quadratic": dict(text="w1^2 * (y1 - 0.25) + z1^2 * (x1 - 0.25)", m=1,
                               n=1, domain=(0.0, 1.0), symmetric=Symmetry.DECLARED,
                               doc="Not separately convex, but equivalent to "
                                   "w^2/4 + z^2/4 up to a null integrand."),
    "gaussian-kernel": dict(text="(w1 - z1)^2 * exp(neg((x1 - y1)^2) * 16)", m=1, n=1,
                            domain=(0.0, 1.0), symmetric=Symmetry.DECLARED,
                            doc="Gaussian-weighted difference, a smooth "
                                "non-local H^1-type energy."),
}


def builtin_names():
    return sorted(_BUILTINS)


def builtin(name):
    """Return a registered integrand by name (see :func:`builtin_names`)."""
    try:
        entry = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin integrand {name!r}; "
                       f"known: {', '.join(builtin_names())}") from None
    lo, hi = entry["domain"]
    node = ex.parse_expr(entry["text"], entry["m"], entry["n"])
    return Integrand(node, entry["m"], entry["n"], entry["symmetric"], name=name,
                     domain=Domain(tuple((lo, hi) for _ in range(entry["m"]))),
                     doc=entry["doc"])


def resolve(entry, dim_m=1, dim_n=1):
    """``"builtin:name"``, a bare builtin name, or an expression string."""
    if isinstance(entry, Integrand):
        return entry
    if entry.startswith("builtin:"):
        return builtin(entry[len("builtin:"):])
    if entry in _BUILTINS:
        return builtin(entry)
    return parse(entry, dim_m, dim_n)
