"""Discrete metric terms for curvilinear elements, four ways.

All constructions target the contravariant metric vectors
Ja^i = dx/dxi^j x dx/dxi^k (cyclic i, j, k).  Grouping the nine entries by
Cartesian component n instead gives the rows that the divergence identity
constrains:

    (Ja^1_n, Ja^2_n, Ja^3_n) = curl(x_m grad x_l) = grad x_m x grad x_l,

with (n, m, l) cyclic, and free-stream preservation of the DG solver
requires the collocation divergence of every such row to vanish.

Methods:

* ``metrics_cross_interp``  - cross products of the collocation
  derivatives of the interpolated geometry.  The products alias, the rows
  are not discretely divergence-free, and the defect is the classic
  free-stream violation.
* ``metrics_kopriva_curl``  - collocation curl of the interpolated
  antisymmetric vector field (x_m grad x_l - x_l grad x_m) / 2.
  Divergence-free because div after curl cancels identically.
* ``metrics_mimetic_blue``  - collocation curl of the line histopolation
  (p2) of x_m grad x_l.
* ``metrics_mimetic_red``   - sub-face histopolation (p3) of
  grad x_m x grad x_l directly.  Equals the blue construction to rounding
  because the projections commute with the curl.

Every method stores nodal degree-N data and shares the same Jacobian
determinant: the triple product of the collocation derivatives of the
interpolated geometry.

All constructions are invariant under shifting the coordinates by a
constant: gradients kill the shift, and the curl- and projection-based
paths annihilate the extra c_m grad(x_l) term because the projections
commute with grad and curl of a gradient vanishes, identically at the
polynomial level.  The builders therefore work with element-centred
coordinates, which shrinks the magnitudes entering the differentiation
matrices and with them the rounding floor of the divergence defect at
high degree (the defect scales like eps * ||D||^2 * ||field||).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Mapping2D,
    Mapping3D,
    analytic_metrics,
    analytic_metrics_2d,
    interpolated_coords,
    interpolated_coords_2d,
)
from .mimetic import (
    NodalInterpolant3D,
    curl_collocation,
    deriv_collocation,
    div_collocation,
    project_p2,
    project_p3,
    tensor_interp,
)
from .polybasis import QuadRule1D, lgl_rule

__all__ = [
    "DegenerateElementError",
    "MetricSet",
    "MetricSet2D",
    "METHODS",
    "metrics_cross_interp",
    "metrics_kopriva_curl",
    "metrics_mimetic_blue",
    "metrics_mimetic_red",
    "build_metrics",
    "divergence_defect",
    "max_divergence_defect",
    "metric_error_norms",
    "metrics_2d",
    "divergence_defect_2d",
    "metric_error_norms_2d",
]


class DegenerateElementError(ValueError):
    """The interpolated geometry folded over: J <= 0 somewhere."""


@dataclass
class MetricSet:
    """Nine nodal metric entries ja[i, n] = Ja^i_n plus the Jacobian."""

    degree: int
    ja: np.ndarray  # (3, 3, n, n, n)
    jac: np.ndarray  # (n, n, n)

    def row(self, n: int) -> np.ndarray:
        """The divergence-constrained row (Ja^1_n, Ja^2_n, Ja^3_n)."""
        return self.ja[:, n]


@dataclass
class MetricSet2D:
    degree: int
    ja: np.ndarray  # (2, 2, n, n)
    jac: np.ndarray  # (n, n)

    def row(self, n: int) -> np.ndarray:
        return self.ja[:, n]


def _cyclic(n: int) -> tuple[int, int]:
    return (n + 1) % 3, (n + 2) % 3


def _nodal_partials(coords: np.ndarray, rule: QuadRule1D) -> np.ndarray:
    """Collocation partials t[m, a] = d x_m / d xi^a of nodal coordinates."""
    return np.stack(
        [np.stack([deriv_collocation(coords[m], rule, a) for a in range(3)]) for m in range(3)]
    )


def _jacobian_determinant(partials: np.ndarray) -> np.ndarray:
    t = partials
    return (
        t[0, 0] * (t[1, 1] * t[2, 2] - t[1, 2] * t[2, 1])
        - t[1, 0] * (t[0, 1] * t[2, 2] - t[0, 2] * t[2, 1])
        + t[2, 0] * (t[0, 1] * t[1, 2] - t[0, 2] * t[1, 1])
    )


def _centered_coords(mapping: Mapping3D, rule: QuadRule1D) -> np.ndarray:
    """Interpolated nodal coordinates with the element mean removed."""
    coords = interpolated_coords(mapping, rule)
    return coords - coords.mean(axis=(1, 2, 3))[:, None, None, None]


def _shared_jacobian(mapping: Mapping3D, rule: QuadRule1D) -> np.ndarray:
    """Jacobian used by every method: from the interpolated geometry."""
    coords = _centered_coords(mapping, rule)
    jac = _jacobian_determinant(_nodal_partials(coords, rule))
    if np.min(jac) <= 0.0:
        idx = np.unravel_index(np.argmin(jac), jac.shape)
        raise DegenerateElementError(
            f"interpolated geometry has J = {jac[idx]:.3e} <= 0 at node {idx}"
        )
    return jac


class _InterpolatedFields:
    """Coordinate and derivative fields of the degree-N interpolated geometry.

    Derivatives are exact derivatives of the interpolant (the collocation
    derivative re-read as a polynomial), so quadrature-point evaluation
    does not sample aliased products.
    """

    def __init__(self, mapping: Mapping3D, rule: QuadRule1D):
        self.rule = rule
        self.coords = _centered_coords(mapping, rule)
        self._coord_interp = [NodalInterpolant3D(self.coords[m], rule) for m in range(3)]
        self._partial_cache: dict[tuple[int, int], NodalInterpolant3D] = {}

    def coord(self, m: int):
        return self._coord_interp[m]

    def partial(self, m: int, a: int):
        key = (m, a)
        if key not in self._partial_cache:
            self._partial_cache[key] = self._coord_interp[m].partial(a)
        return self._partial_cache[key]


class _AnalyticFields:
    """Direct evaluation of the mapping inside the projection quadratures."""

    def __init__(self, mapping: Mapping3D, rule: QuadRule1D):
        self.rule = rule
        self.mapping = mapping
        self.coords = interpolated_coords(mapping, rule)
        self._center = np.asarray(
            mapping.coords(np.float64(0.0), np.float64(0.0), np.float64(0.0)),
            dtype=float,
        ).reshape(3)

    def coord(self, m: int):
        return lambda x, y, z: self.mapping.coords(x, y, z)[m] - self._center[m]

    def partial(self, m: int, a: int):
        return lambda x, y, z: self.mapping.jacobian(x, y, z)[m, a]


def _fields(mapping: Mapping3D, rule: QuadRule1D, pathway: str):
    if pathway == "interpolated":
        return _InterpolatedFields(mapping, rule)
    if pathway == "analytic":
        return _AnalyticFields(mapping, rule)
    raise ValueError(f"unknown geometry pathway {pathway!r}")


def metrics_cross_interp(mapping: Mapping3D, rule: QuadRule1D) -> MetricSet:
    """Cross products of collocation derivatives (the naive construction)."""
    coords = _centered_coords(mapping, rule)
    t = _nodal_partials(coords, rule)
    n1 = rule.num_nodes
    ja = np.empty((3, 3, n1, n1, n1))
    for i in range(3):
        j, k = _cyclic(i)
        for n in range(3):
            m, l = _cyclic(n)
            ja[i, n] = t[m, j] * t[l, k] - t[l, j] * t[m, k]
    return MetricSet(rule.degree, ja, _shared_jacobian(mapping, rule))


def metrics_kopriva_curl(mapping: Mapping3D, rule: QuadRule1D) -> MetricSet:
    """Collocation curl of the interpolated antisymmetric products."""
    coords = _centered_coords(mapping, rule)
    t = _nodal_partials(coords, rule)
    n1 = rule.num_nodes
    ja = np.empty((3, 3, n1, n1, n1))
    for n in range(3):
        m, l = _cyclic(n)
        v = 0.5 * (coords[m][None] * t[l] - coords[l][None] * t[m])
        ja[:, n] = curl_collocation(v, rule)
    return MetricSet(rule.degree, ja, _shared_jacobian(mapping, rule))


def metrics_mimetic_blue(
    mapping: Mapping3D,
    rule: QuadRule1D,
    pathway: str = "interpolated",
    num_points: int | None = None,
) -> MetricSet:
    """Curl of the curl-conforming projection of x_m grad x_l."""
    fields = _fields(mapping, rule, pathway)
    n1 = rule.num_nodes
    ja = np.empty((3, 3, n1, n1, n1))
    for n in range(3):
        m, l = _cyclic(n)

        def component(a, m=m, l=l):
            cm, pl = fields.coord(m), fields.partial(l, a)
            return lambda x, y, z: cm(x, y, z) * pl(x, y, z)

        v = project_p2([component(a) for a in range(3)], rule, num_points)
        ja[:, n] = curl_collocation(v, rule)
    return MetricSet(rule.degree, ja, _shared_jacobian(mapping, rule))


def metrics_mimetic_red(
    mapping: Mapping3D,
    rule: QuadRule1D,
    pathway: str = "interpolated",
    num_points: int | None = None,
) -> MetricSet:
    """Div-conforming projection of grad x_m x grad x_l."""
    fields = _fields(mapping, rule, pathway)
    n1 = rule.num_nodes
    ja = np.empty((3, 3, n1, n1, n1))
    for n in range(3):
        m, l = _cyclic(n)

        def component(i, m=m, l=l):
            j, k = _cyclic(i)
            pmj, plk = fields.partial(m, j), fields.partial(l, k)
            pmk, plj = fields.partial(m, k), fields.partial(l, j)
            return lambda x, y, z: (
                pmj(x, y, z) * plk(x, y, z) - pmk(x, y, z) * plj(x, y, z)
            )

        ja[:, n] = project_p3([component(i) for i in range(3)], rule, num_points)
    return MetricSet(rule.degree, ja, _shared_jacobian(mapping, rule))


METHODS = {
    "cross": metrics_cross_interp,
    "kopriva": metrics_kopriva_curl,
    "mimetic-blue": metrics_mimetic_blue,
    "mimetic-red": metrics_mimetic_red,
}


def build_metrics(
    method: str,
    mapping: Mapping3D,
    rule: QuadRule1D,
    pathway: str = "interpolated",
    num_points: int | None = None,
) -> MetricSet:
    """Dispatch on the method name used throughout the harness and CLI."""
    try:
        builder = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown metric method {method!r}; choose from {sorted(METHODS)}")
    if method in ("cross", "kopriva"):
        return builder(mapping, rule)
    return builder(mapping, rule, pathway=pathway, num_points=num_points)


# ---------------------------------------------------------------------------
# diagnostics

def divergence_defect(ms: MetricSet, rule: QuadRule1D) -> np.ndarray:
    """Collocation divergence of each metric row; shape (3, n, n, n)."""
    return np.stack([div_collocation(ms.row(n), rule) for n in range(3)])


def max_divergence_defect(ms: MetricSet, rule: QuadRule1D) -> tuple[float, float]:
    """Max-norm defect together with the natural scale 1 + max |Ja|."""
    defect = float(np.max(np.abs(divergence_defect(ms, rule))))
    scale = 1.0 + float(np.max(np.abs(ms.ja)))
    return defect, scale


def metric_error_norms(
    ms: MetricSet,
    mapping: Mapping3D,
    rule: QuadRule1D,
    eval_points: int = 51,
) -> tuple[float, float]:
    """L2/Linf distance of the discrete metric terms from the exact ones.

    Both norms are evaluated on a dense LGL grid: the nine entries are
    interpolated there, differenced against the analytic values, and the
    pointwise 9-vector is reduced (Euclidean for L2, max-abs for Linf).
    The L2 norm integrates with the analytic volume weight J.
    """
    dense = lgl_rule(eval_points - 1)
    t = dense.nodes
    ja_exact, jac_exact = analytic_metrics(
        mapping, t[:, None, None], t[None, :, None], t[None, None, :]
    )
    err2 = np.zeros((eval_points,) * 3)
    linf = 0.0
    for i in range(3):
        for n in range(3):
            diff = tensor_interp(ms.ja[i, n], rule, t, t, t) - ja_exact[i, n]
            err2 += diff * diff
            linf = max(linf, float(np.max(np.abs(diff))))
    w3 = (
        dense.weights[:, None, None]
        * dense.weights[None, :, None]
        * dense.weights[None, None, :]
    )
    l2 = float(np.sqrt(np.sum(w3 * jac_exact * err2)))
    return l2, linf


# ---------------------------------------------------------------------------
# two-dimensional reduction

def _deriv2d(values: np.ndarray, rule: QuadRule1D, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(rule.diff_matrix, values, axes=(1, axis)), 0, axis)


def metrics_2d(mapping: Mapping2D, rule: QuadRule1D) -> MetricSet2D:
    """Quadrilateral metric terms from the interpolated geometry.

    In two dimensions the rows are rotated gradients of the interpolated
    coordinates, Ja^1 = (y_eta, -x_eta) and Ja^2 = (-y_xi, x_xi), so the
    divergence identity reduces to the equality of mixed collocation
    derivatives and no histopolation is needed.
    """
    coords = interpolated_coords_2d(mapping, rule)
    coords = coords - coords.mean(axis=(1, 2))[:, None, None]
    x_xi = _deriv2d(coords[0], rule, 0)
    x_eta = _deriv2d(coords[0], rule, 1)
    y_xi = _deriv2d(coords[1], rule, 0)
    y_eta = _deriv2d(coords[1], rule, 1)
    n1 = rule.num_nodes
    ja = np.empty((2, 2, n1, n1))
    ja[0, 0] = y_eta
    ja[0, 1] = -x_eta
    ja[1, 0] = -y_xi
    ja[1, 1] = x_xi
    jac = x_xi * y_eta - x_eta * y_xi
    if np.min(jac) <= 0.0:
        idx = np.unravel_index(np.argmin(jac), jac.shape)
        raise DegenerateElementError(
            f"interpolated 2D geometry has J = {jac[idx]:.3e} <= 0 at node {idx}"
        )
    return MetricSet2D(rule.degree, ja, jac)


def divergence_defect_2d(ms: MetricSet2D, rule: QuadRule1D) -> np.ndarray:
    """Divergence of each 2D metric row; shape (2, n, n)."""
    return np.stack(
        [
            _deriv2d(ms.ja[0, n], rule, 0) + _deriv2d(ms.ja[1, n], rule, 1)
            for n in range(2)
        ]
    )


def metric_error_norms_2d(
    ms: MetricSet2D,
    mapping: Mapping2D,
    rule: QuadRule1D,
    eval_points: int = 51,
) -> tuple[float, float]:
    dense = lgl_rule(eval_points - 1)
    t = dense.nodes
    ja_exact, jac_exact = analytic_metrics_2d(mapping, t[:, None], t[None, :])
    from .polybasis import lagrange_interp_matrix

    m = lagrange_interp_matrix(rule, t)
    err2 = np.zeros((eval_points,) * 2)
    linf = 0.0
    for i in range(2):
        for n in range(2):
            diff = m @ ms.ja[i, n] @ m.T - ja_exact[i, n]
            err2 += diff * diff
            linf = max(linf, float(np.max(np.abs(diff))))
    w2 = dense.weights[:, None] * dense.weights[None, :]
    l2 = float(np.sqrt(np.sum(w2 * jac_exact * err2)))
    return l2, linf
