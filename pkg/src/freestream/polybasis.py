"""One-dimensional Legendre-Gauss-Lobatto (LGL) machinery.

Everything downstream (projections, metric terms, the DG solver) is built
from the objects in this module: LGL nodes and quadrature weights on the
reference interval [-1, 1], barycentric Lagrange interpolation, the
collocation differentiation matrix, the edge (histopolation) basis on the
sub-grid cut out by the LGL nodes, and Gauss quadrature over those
sub-intervals.

Conventions
-----------
* ``degree`` always means the polynomial degree N; an LGL rule of degree N
  has N + 1 nodes and integrates polynomials of degree <= 2N - 1 exactly.
* Nodes are sorted ascending, with exact endpoints -1.0 and +1.0, and are
  symmetric about the origin.
* The edge functions ``h_i`` (i = 1..N) span the degree-(N-1) space and
  satisfy the sub-interval delta property
  ``integral(h_i, xi_{j-1}, xi_j) == delta_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadRule1D",
    "EdgeBasis1D",
    "legendre_and_derivative",
    "lgl_rule",
    "lagrange_interp_matrix",
    "lagrange_deriv_matrix",
    "edge_matrix",
    "edge_eval",
    "subinterval_gauss",
    "subinterval_integrals",
]

# Newton tolerance for the node solve, in units of machine epsilon.
_NODE_TOL = 4.0 * np.finfo(float).eps
_MAX_NEWTON_ITERS = 100


def legendre_and_derivative(n: int, x):
    """Evaluate the Legendre polynomial P_n and its derivative at ``x``.

    Uses the stable three-term recurrence for P_k together with the
    derivative recurrence P'_k = P'_{k-2} + (2k - 1) P_{k-1}.

    Returns:
        Tuple ``(P_n(x), P_n'(x))`` of arrays shaped like ``x``.
    """
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    dp_prev = np.zeros_like(x)
    if n == 0:
        return p_prev, dp_prev
    p = x.copy()
    dp = np.ones_like(x)
    for k in range(2, n + 1):
        p_next = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
        dp_next = dp_prev + (2 * k - 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp


@dataclass(frozen=True, eq=False)
class QuadRule1D:
    """LGL nodes, weights and derived interpolation data for one degree.

    Attributes:
        degree: Polynomial degree N (>= 1); the rule has N + 1 nodes.
        nodes: Ascending LGL nodes on [-1, 1], endpoints exactly +-1.
        weights: Quadrature weights, exact for degree <= 2N - 1.
        bary_weights: Barycentric weights, normalised to unit max-abs.
        diff_matrix: Collocation derivative matrix D, D[i, j] = l_j'(xi_i).
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    bary_weights: np.ndarray
    diff_matrix: np.ndarray

    @property
    def num_nodes(self) -> int:
        return self.degree + 1

    def subintervals(self) -> np.ndarray:
        """Sub-interval boundaries; the nodes themselves (N intervals)."""
        return self.nodes


def lgl_rule(degree: int) -> QuadRule1D:
    """Build the Legendre-Gauss-Lobatto rule of the given degree.

    Interior nodes are the roots of P_N', found by Newton iteration on
    q(x) = (1 - x^2) P_N'(x) starting from Chebyshev-Gauss-Lobatto guesses.
    With the Legendre ODE the Newton update simplifies to
    ``x += (1 - x^2) P_N'(x) / (N (N + 1) P_N(x))``.  The converged node
    set is symmetrised about the origin so that xi_j == -xi_{N-j} exactly.

    Raises:
        ValueError: If ``degree`` is smaller than 1.
    """
    n = int(degree)
    if n < 1:
        raise ValueError(f"LGL rule needs polynomial degree >= 1, got {degree}")

    if n == 1:
        nodes = np.array([-1.0, 1.0])
    else:
        j = np.arange(1, n)
        x = -np.cos(np.pi * j / n)
        for _ in range(_MAX_NEWTON_ITERS):
            p, dp = legendre_and_derivative(n, x)
            dx = (1.0 - x * x) * dp / (n * (n + 1) * p)
            x += dx
            if np.max(np.abs(dx)) <= _NODE_TOL:
                break
        nodes = np.concatenate(([-1.0], x, [1.0]))
        # enforce exact +- symmetry of the converged node set
        nodes = 0.5 * (nodes - nodes[::-1])

    p, _ = legendre_and_derivative(n, nodes)
    weights = 2.0 / (n * (n + 1) * p * p)

    bary = _barycentric_weights(nodes)
    diff = _diff_matrix(nodes, bary)

    for arr in (nodes, weights, bary, diff):
        arr.flags.writeable = False
    return QuadRule1D(n, nodes, weights, bary, diff)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / np.prod(diff, axis=1)
    return w / np.max(np.abs(w))


def _diff_matrix(nodes: np.ndarray, bary: np.ndarray) -> np.ndarray:
    # off-diagonal from the barycentric weights, diagonal from the
    # negative-sum trick so that constants differentiate to exactly zero
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -np.sum(d, axis=1))
    return d


def lagrange_interp_matrix(rule: QuadRule1D, targets) -> np.ndarray:
    """Interpolation matrix from the LGL nodes to arbitrary targets.

    Row t holds l_j(x_t) in barycentric form, so each row sums to one by
    construction.  A target that coincides bitwise with a node gets an
    exact Kronecker row.

    Returns:
        Array of shape ``(len(targets), N + 1)``.
    """
    x = np.atleast_1d(np.asarray(targets, dtype=float))
    diff = x[:, None] - rule.nodes[None, :]
    hit = diff == 0.0
    on_node = np.any(hit, axis=1)
    diff[on_node] = 1.0  # dummy; rows rewritten below
    m = rule.bary_weights[None, :] / diff
    m[on_node] = hit[on_node].astype(float)
    m /= np.sum(m, axis=1, keepdims=True)
    return m


def lagrange_deriv_matrix(rule: QuadRule1D, targets) -> np.ndarray:
    """Matrix of l_j'(x_t) at arbitrary targets.

    l_j' has degree N - 1, so it equals its own interpolant on the LGL
    grid; evaluation therefore composes the interpolation matrix with the
    collocation derivative matrix.
    """
    return lagrange_interp_matrix(rule, targets) @ rule.diff_matrix


class EdgeBasis1D:
    """Edge (histopolation) functions h_1 .. h_N on the LGL sub-grid.

    h_i(x) = -sum_{j<i} l_j'(x); each h_i has degree N - 1 and unit
    integral over the i-th sub-interval [xi_{i-1}, xi_i], zero over all
    others.
    """

    def __init__(self, rule: QuadRule1D):
        self.rule = rule
        self.at_nodes = edge_matrix(rule, rule.nodes)

    def __call__(self, i: int, x) -> np.ndarray:
        return edge_eval(self.rule, i, x)


def edge_matrix(rule: QuadRule1D, targets) -> np.ndarray:
    """Evaluate all N edge functions at the targets.

    Returns:
        Array ``H`` of shape ``(len(targets), N)`` with ``H[t, i-1] = h_i(x_t)``.
    """
    lp = lagrange_deriv_matrix(rule, targets)
    return -np.cumsum(lp, axis=1)[:, : rule.degree]


def edge_eval(rule: QuadRule1D, i: int, x) -> np.ndarray:
    """Evaluate the single edge function h_i (1-based, i = 1..N)."""
    if not 1 <= i <= rule.degree:
        raise ValueError(f"edge index must be in 1..{rule.degree}, got {i}")
    x = np.asarray(x, dtype=float)
    h = edge_matrix(rule, np.atleast_1d(x))[:, i - 1]
    return h.reshape(x.shape) if x.ndim else h[0]


def subinterval_gauss(rule: QuadRule1D, num_points: int | None = None):
    """Gauss-Legendre points/weights mapped onto every LGL sub-interval.

    Args:
        num_points: Gauss points per sub-interval; defaults to N + 2,
            which integrates the degree <= 2N - 1 products occurring in
            the metric-term projections exactly.

    Returns:
        Tuple ``(points, weights)`` of shape ``(N, num_points)``.
    """
    q = rule.degree + 2 if num_points is None else int(num_points)
    if q < 1:
        raise ValueError(f"need at least one Gauss point, got {num_points}")
    gp, gw = np.polynomial.legendre.leggauss(q)
    lo = rule.nodes[:-1, None]
    hi = rule.nodes[1:, None]
    half = 0.5 * (hi - lo)
    points = lo + half * (gp[None, :] + 1.0)
    weights = half * gw[None, :]
    return points, weights


def subinterval_integrals(rule: QuadRule1D, f, num_points: int | None = None) -> np.ndarray:
    """Integrate a vectorised callable over each of the N sub-intervals."""
    pts, wts = subinterval_gauss(rule, num_points)
    return np.sum(wts * f(pts), axis=1)
