"""Tensor-product projections and collocation calculus on one element.

The reference element is [-1, 1]^3 with an LGL grid of degree N in each
direction.  Four projection operators map smooth fields onto the discrete
spaces of a compatible (de Rham) complex:

* ``project_p1`` - pointwise interpolation onto Q^N (scalar potentials)
* ``project_p2`` - line histopolation onto the curl-conforming space whose
  component c is degree N - 1 along direction c and N elsewhere
* ``project_p3`` - sub-face histopolation onto the div-conforming space
  whose component c is degree N along c and N - 1 elsewhere
* ``project_p4`` - sub-cell averages (N^3 values per element)

Vector outputs of p2/p3 are stored as nodal degree-N data, which is
lossless, so the collocation ``grad``/``curl``/``div`` below apply
directly.  The operators chain: grad after p1 equals p2 of the gradient,
curl after p2 equals p3 of the curl, and the sub-cell integrals of the
divergence after p3 equal p4 of the divergence.  In particular the
divergence of any projected curl vanishes identically.

Field callables are evaluated on sparse tensor grids: they receive three
broadcastable arrays shaped (nx,1,1), (1,ny,1), (1,1,nz) and must return
an array broadcastable to (nx, ny, nz).  Plain numpy expressions satisfy
this automatically; ``NodalInterpolant3D`` implements the same contract
for fields backed by nodal data.
"""

from __future__ import annotations

import numpy as np

from .polybasis import (
    QuadRule1D,
    edge_matrix,
    lagrange_interp_matrix,
    subinterval_gauss,
)

__all__ = [
    "NodalInterpolant3D",
    "evaluate_on_grid",
    "tensor_interp",
    "eval_at_points",
    "project_p1",
    "project_p2",
    "project_p3",
    "project_p4",
    "deriv_collocation",
    "grad_collocation",
    "curl_collocation",
    "div_collocation",
]


def _check_scalar(values: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    n = rule.num_nodes
    if values.shape != (n, n, n):
        raise ValueError(f"expected nodal shape {(n, n, n)}, got {values.shape}")
    return values


def _check_vector(values: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    n = rule.num_nodes
    if values.shape != (3, n, n, n):
        raise ValueError(f"expected nodal vector shape {(3, n, n, n)}, got {values.shape}")
    return values


def evaluate_on_grid(f, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate a field callable on the tensor grid x (x) y (x) z."""
    shape = (len(x), len(y), len(z))
    vals = np.asarray(f(x[:, None, None], y[None, :, None], z[None, None, :]), dtype=float)
    if vals.shape != shape:
        vals = np.broadcast_to(vals, shape)
    return vals


def tensor_interp(values: np.ndarray, rule: QuadRule1D, tx, ty, tz) -> np.ndarray:
    """Interpolate nodal data onto a target tensor grid, axis by axis.

    Axes whose targets equal the LGL nodes are skipped, so evaluation on
    partially-nodal grids (as in the sub-face quadratures) costs only the
    non-trivial directions.
    """
    out = np.asarray(values, dtype=float)
    src = out
    for axis, t in enumerate((tx, ty, tz)):
        t = np.asarray(t, dtype=float)
        if t.shape == rule.nodes.shape and np.array_equal(t, rule.nodes):
            continue
        m = lagrange_interp_matrix(rule, t)
        out = np.moveaxis(np.tensordot(m, out, axes=(1, axis)), 0, axis)
    # never hand back the caller's own nodal array
    return out.copy() if out is src else out


def eval_at_points(values: np.ndarray, rule: QuadRule1D, points: np.ndarray) -> np.ndarray:
    """Evaluate the nodal interpolant at scattered points (k, 3)."""
    values = _check_scalar(values, rule)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    mx = lagrange_interp_matrix(rule, pts[:, 0])
    my = lagrange_interp_matrix(rule, pts[:, 1])
    mz = lagrange_interp_matrix(rule, pts[:, 2])
    return np.einsum("ki,kj,kl,ijl->k", mx, my, mz, values, optimize=True)


class NodalInterpolant3D:
    """Degree-N tensor interpolant exposed through the field contract.

    When called with sparse-grid arguments the evaluation runs as three
    small matrix products along the tensor axes; arbitrary broadcastable
    input falls back to pointwise barycentric evaluation.
    """

    def __init__(self, values: np.ndarray, rule: QuadRule1D):
        self.values = _check_scalar(values, rule)
        self.rule = rule

    def __call__(self, x, y, z) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        if x.ndim == y.ndim == z.ndim == 3:
            axes = (x.shape[0], y.shape[1], z.shape[2])
            if (
                x.shape == (axes[0], 1, 1)
                and y.shape == (1, axes[1], 1)
                and z.shape == (1, 1, axes[2])
            ):
                return tensor_interp(
                    self.values, self.rule, x.reshape(-1), y.reshape(-1), z.reshape(-1)
                )
        xb, yb, zb = np.broadcast_arrays(x, y, z)
        pts = np.stack([xb.ravel(), yb.ravel(), zb.ravel()], axis=1)
        return eval_at_points(self.values, self.rule, pts).reshape(xb.shape)

    def partial(self, axis: int) -> "NodalInterpolant3D":
        """Exact partial derivative of the interpolant, as an interpolant.

        Differentiation lowers the degree along ``axis``, so resampling the
        collocation derivative on the same grid loses nothing.
        """
        return NodalInterpolant3D(deriv_collocation(self.values, self.rule, axis), self.rule)


# ---------------------------------------------------------------------------
# collocation derivatives

def deriv_collocation(values: np.ndarray, rule: QuadRule1D, axis: int) -> np.ndarray:
    """Apply the collocation derivative along one tensor axis."""
    return np.moveaxis(
        np.tensordot(rule.diff_matrix, values, axes=(1, axis)), 0, axis
    )


def grad_collocation(values: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    """Nodal gradient of a nodal scalar; returns shape (3, n, n, n)."""
    values = _check_scalar(values, rule)
    return np.stack([deriv_collocation(values, rule, a) for a in range(3)])


def curl_collocation(vec: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    """Nodal curl of a nodal vector field; returns shape (3, n, n, n)."""
    vec = _check_vector(vec, rule)
    d = lambda c, a: deriv_collocation(vec[c], rule, a)
    return np.stack(
        [
            d(2, 1) - d(1, 2),
            d(0, 2) - d(2, 0),
            d(1, 0) - d(0, 1),
        ]
    )


def div_collocation(vec: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    """Nodal divergence of a nodal vector field; returns shape (n, n, n)."""
    vec = _check_vector(vec, rule)
    return (
        deriv_collocation(vec[0], rule, 0)
        + deriv_collocation(vec[1], rule, 1)
        + deriv_collocation(vec[2], rule, 2)
    )


# ---------------------------------------------------------------------------
# projections

def project_p1(f, rule: QuadRule1D) -> np.ndarray:
    """Interpolate a scalar field onto the LGL grid."""
    x = rule.nodes
    return evaluate_on_grid(f, x, x, x)


def _line_coefficients(f, rule: QuadRule1D, axis: int, num_points) -> np.ndarray:
    """Sub-interval line integrals of one vector component along ``axis``.

    Component ``axis`` of a curl-conforming field is integrated along its
    own direction over each of the N sub-intervals, holding the other two
    coordinates at the LGL nodes.  Returns an array with N entries along
    ``axis`` and N + 1 along the others.
    """
    pts, wts = subinterval_gauss(rule, num_points)
    n_sub, q = pts.shape
    grids = [rule.nodes] * 3
    grids[axis] = pts.reshape(-1)
    vals = evaluate_on_grid(f, *grids)
    # fold the flattened quadrature axis back to (sub-interval, point)
    vals = np.moveaxis(vals, axis, 0)
    vals = vals.reshape(n_sub, q, *vals.shape[1:])
    coeffs = np.einsum("sq...,sq->s...", vals, wts)
    return np.moveaxis(coeffs, 0, axis)


def project_p2(fields, rule: QuadRule1D, num_points: int | None = None) -> np.ndarray:
    """Histopolate a vector field onto the curl-conforming space.

    ``fields`` is a sequence of three component callables.  The result is
    returned as nodal degree-N data of shape (3, n, n, n).
    """
    e_at_nodes = edge_matrix(rule, rule.nodes)
    out = []
    for axis, f in enumerate(fields):
        c = _line_coefficients(f, rule, axis, num_points)
        out.append(np.moveaxis(np.tensordot(e_at_nodes, c, axes=(1, axis)), 0, axis))
    return np.stack(out)


def _face_coefficients(f, rule: QuadRule1D, axis: int, num_points) -> np.ndarray:
    """Sub-face integrals of one div-conforming component.

    Component ``axis`` is integrated over the sub-rectangles transverse to
    ``axis`` while its own coordinate sits at the LGL nodes.
    """
    pts, wts = subinterval_gauss(rule, num_points)
    n_sub, q = pts.shape
    t1, t2 = [a for a in range(3) if a != axis]
    grids = [rule.nodes] * 3
    grids[t1] = pts.reshape(-1)
    grids[t2] = pts.reshape(-1)
    vals = evaluate_on_grid(f, *grids)
    vals = np.moveaxis(vals, (t1, t2), (1, 2)).reshape(rule.num_nodes, n_sub, q, n_sub, q)
    coeffs = np.einsum("isqtr,sq,tr->ist", vals, wts, wts)
    return np.moveaxis(coeffs, (0, 1, 2), (axis, t1, t2))


def project_p3(fields, rule: QuadRule1D, num_points: int | None = None) -> np.ndarray:
    """Histopolate a vector field onto the div-conforming space."""
    e_at_nodes = edge_matrix(rule, rule.nodes)
    out = []
    for axis, f in enumerate(fields):
        c = _face_coefficients(f, rule, axis, num_points)
        for t in range(3):
            if t == axis:
                continue
            c = np.moveaxis(np.tensordot(e_at_nodes, c, axes=(1, t)), 0, t)
        out.append(c)
    return np.stack(out)


def project_p4(f, rule: QuadRule1D, num_points: int | None = None) -> np.ndarray:
    """Integrate a scalar field over every sub-cell; returns (N, N, N)."""
    pts, wts = subinterval_gauss(rule, num_points)
    n_sub, q = pts.shape
    flat = pts.reshape(-1)
    vals = evaluate_on_grid(f, flat, flat, flat)
    vals = vals.reshape(n_sub, q, n_sub, q, n_sub, q)
    return np.einsum("aqbrcs,aq,br,cs->abc", vals, wts, wts, wts)
