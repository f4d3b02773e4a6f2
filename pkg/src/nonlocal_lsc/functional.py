"""Double-quadrature evaluation of non-local functionals and their derivatives.

On a midpoint grid with nodes ``x_i`` and uniform cell weight ``h``::

    J(u) ~ h^2 * sum_i sum_j f(x_i, x_j, u_i, u_j)

Diagonal pairs ``i == j`` are ordinary quadrature points.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._summation import compensated_row_sums, merge
from .grid import GridFunction
from .integrand import (PoleError, differentiate, require_symmetric)
from .verdict import jsonable

_BLOCK_ELEMENTS = 1 << 19


def _block_rows(n_cols):
    return max(1, _BLOCK_ELEMENTS // max(1, n_cols))


def _check_dims(f, u):
    if f.dim_m != u.grid.dim_m or f.dim_n != u.n:
        raise ValueError(f"integrand is (m={f.dim_m}, n={f.dim_n}) but grid function "
                         f"is (m={u.grid.dim_m}, n={u.n})")


def pair_block(f, u, start, stop, node=None, other=None):
    """Integrand values for rows ``start:stop`` against all columns.

    ``other`` optionally supplies the column function (``psi``) instead of ``u``.
    """
    v = u if other is None else other
    X, W = u.grid.nodes, u.values
    return f.raw(X[start:stop, None, :], v.grid.nodes[None, :, :],
                 W[start:stop, None, :], v.values[None, :, :], node)


def _raise_poles(f, block, start, transpose=False):
    bad = np.argwhere(~np.isfinite(block))
    pairs = [(int(i) + start, int(j)) for i, j in bad[:20]]
    if transpose:
        pairs = [(j, i) for i, j in pairs]
    raise PoleError(f"{f.label}: integrand is not finite at {len(bad)} node pair(s), "
                    f"e.g. {pairs[:5]}", pairs)


@dataclass(frozen=True, eq=False)
class FunctionalValue:
    """Quadrature of ``J`` split into positive and negative parts."""

    value: float
    neg_part: float
    pos_part: float
    grid: object
    integrand: str = ""

    @property
    def nodes(self):
        return self.grid.size

    def to_dict(self):
        return jsonable({"value": self.value, "neg_part": self.neg_part,
                         "pos_part": self.pos_part, "nodes": self.nodes,
                         "integrand": self.integrand})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __float__(self):
        return float(self.value)


def _times_weight_squared(grid, total):
    # weight = volume / cells; dividing by the cell count keeps integer sums exact
    cells = float(np.prod(grid.nodes_per_axis))
    vol = grid.weight * cells
    return (total / cells / cells) * vol * vol


def evaluate(f, u, threads=1, order="row"):
    """Quadrature value of ``J(u)``.

    Parameters
    ----------
    f : Integrand
    u : GridFunction
    threads : int
        Worker cap for row blocks; the merge order is fixed so the result is
        the same for every value.
    order : {"row", "column"}
        Outer summation index. For bitwise pairwise-symmetric integrands both
        orders give identical results.

    Raises
    ------
    PoleError
        If the integrand is not finite at some node pair.
    """
    _check_dims(f, u)
    N = u.grid.size
    rows = _block_rows(N)
    transpose = order == "column"

    def work(start):
        stop = min(start + rows, N)
        if transpose:
            block = f.raw(u.grid.nodes[None, :, :], u.grid.nodes[start:stop, None, :],
                          u.values[None, :, :], u.values[start:stop, None, :])
            block = np.broadcast_to(block, (stop - start, N))
        else:
            block = np.broadcast_to(pair_block(f, u, start, stop), (stop - start, N))
        if not np.all(np.isfinite(block)):
            _raise_poles(f, block, start, transpose)
        pos = compensated_row_sums(np.maximum(block, 0.0))
        neg = compensated_row_sums(np.maximum(-block, 0.0))
        return pos, neg

    starts = range(0, N, rows)
    if threads > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    pos = _times_weight_squared(u.grid, merge([p for p, _ in parts]))
    neg = _times_weight_squared(u.grid, merge([q for _, q in parts]))
    return FunctionalValue(pos - neg, neg, pos, u.grid, f.label)


def pair_matrix(f, phi, psi):
    """Full matrix ``f(x_i, x_j, phi_i, psi_j)`` (poles left as inf/nan)."""
    N = phi.grid.size
    return np.broadcast_to(pair_block(f, phi, 0, N, other=psi), (N, psi.grid.size))


@dataclass(frozen=True, eq=False)
class PhiProfile:
    """Values of ``w -> sum_j h f(x, x_j, w, psi_j)`` at sample points."""

    x: np.ndarray
    psi: GridFunction
    w_samples: np.ndarray
    values: np.ndarray


def _as_samples(w, n):
    w = np.asarray(w, dtype=float)
    if w.ndim <= 1:
        w = w.reshape(-1, n) if n > 1 or w.ndim == 1 else w.reshape(1, 1)
    return w


def phi_values(f, x, psi, w_samples):
    """Quadrature of ``Phi_{x, psi}(w)`` for each row of ``w_samples``."""
    _check_dims(f, psi)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = _as_samples(w_samples, f.dim_n)
    block = f.raw(x[None, None, :], psi.grid.nodes[None, :, :], w[:, None, :],
                  psi.values[None, :, :])
    block = np.broadcast_to(block, (w.shape[0], psi.grid.size))
    if not np.all(np.isfinite(block)):
        _raise_poles(f, block, 0)
    s, c = compensated_row_sums(block)
    return psi.grid.weight * (s + c)


def phi_profile(f, x, psi, w_samples):
    w = _as_samples(w_samples, f.dim_n)
    return PhiProfile(np.atleast_1d(np.asarray(x, float)), psi, w,
                      phi_values(f, x, psi, w))


def phi_hessian(f, x, psi, w_samples, deriv=None):
    """Hessian of the profile in ``w``; shape ``(K, n, n)``."""
    deriv = differentiate(f) if deriv is None else deriv
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = _as_samples(w_samples, f.dim_n)
    H = deriv.hess(x[None, None, :], psi.grid.nodes[None, :, :], w[:, None, :],
                   psi.values[None, :, :])
    K, N, n = w.shape[0], psi.grid.size, f.dim_n
    H = np.broadcast_to(H, (K, N, n, n))
    flat = np.moveaxis(H, 1, -1).reshape(K * n * n, N)
    if not np.all(np.isfinite(flat)):
        raise PoleError(f"{f.label}: Hessian not finite")
    s, c = compensated_row_sums(flat)
    return (psi.grid.weight * (s + c)).reshape(K, n, n)


def gradient(f, u, deriv=None, threads=1):
    """Nodal gradient ``dJ/du_i = 2 h^2 sum_j grad_w f(x_i, x_j, u_i, u_j)``.

    The factor 2 relies on pairwise symmetry, which is checked first.
    """
    _check_dims(f, u)
    require_symmetric(f, "the variational gradient")
    deriv = differentiate(f) if deriv is None else deriv
    N, n = u.grid.size, u.n
    rows = _block_rows(N)
    out = np.empty((N, n))
    for start in range(0, N, rows):
        stop = min(start + rows, N)
        for c in range(n):
            block = np.broadcast_to(pair_block(f, u, start, stop, deriv.grad_w[c]),
                                    (stop - start, N))
            if not np.all(np.isfinite(block)):
                _raise_poles(f, block, start)
            s, e = compensated_row_sums(block)
            out[start:stop, c] = s + e
    return GridFunction(u.grid, 2.0 * u.grid.weight**2 * out, u.p)


def pairing(u, h_values):
    """Discrete ``int u . h dx`` for a scalar test function sampled on the grid."""
    h_values = np.asarray(h_values, dtype=float).reshape(-1, 1)
    s, c = compensated_row_sums((u.values * h_values).T)
    return u.grid.weight * (s + c)
