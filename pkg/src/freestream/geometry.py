"""Element mappings, periodic Cartesian meshes, and exact metric terms.

A mapping takes reference coordinates (xi, eta, zeta) in [-1, 1]^3 to
physical coordinates and exposes its analytic Jacobian.  A mesh tiles the
global reference cube with axis-aligned boxes; each element's mapping is
the global mapping composed with the diagonal affine map onto its box, so
neighbouring elements trace the same physical surface and the mesh is
watertight by construction.

``analytic_metrics`` returns the exact contravariant metric vectors
Ja^i = dx/dxi^j x dx/dxi^k (cyclic i, j, k) and the Jacobian determinant;
these serve as the ground truth for every discrete construction in
``freestream.metrics``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polybasis import QuadRule1D

__all__ = [
    "Mapping3D",
    "AffineMap3D",
    "WarpedCosineMap3D",
    "PolynomialWarpMap3D",
    "Mapping2D",
    "AffineMap2D",
    "WarpedCosineMap2D",
    "ElementMap3D",
    "Mesh3D",
    "structured_mesh",
    "analytic_metrics",
    "analytic_metrics_2d",
    "interpolated_coords",
    "interpolated_coords_2d",
]


class Mapping3D:
    """Base class: reference cube [-1, 1]^3 to physical coordinates."""

    def coords(self, x, y, z) -> np.ndarray:
        """Physical coordinates, stacked as shape (3, ...)."""
        raise NotImplementedError

    def jacobian(self, x, y, z) -> np.ndarray:
        """Analytic partials J[m, a] = d x_m / d xi^a, shape (3, 3, ...)."""
        raise NotImplementedError


class AffineMap3D(Mapping3D):
    """x = A xi + b; the identity map by default."""

    def __init__(self, matrix=None, offset=None):
        self.matrix = np.eye(3) if matrix is None else np.asarray(matrix, dtype=float)
        self.offset = np.zeros(3) if offset is None else np.asarray(offset, dtype=float)
        if self.matrix.shape != (3, 3) or self.offset.shape != (3,):
            raise ValueError("affine map needs a 3x3 matrix and length-3 offset")

    def coords(self, x, y, z):
        x, y, z = np.broadcast_arrays(x, y, z)
        ref = np.stack([x, y, z]).astype(float)
        return np.einsum("mn,n...->m...", self.matrix, ref) + self.offset.reshape(
            (3,) + (1,) * x.ndim
        )

    def jacobian(self, x, y, z):
        shape = np.broadcast(np.asarray(x), np.asarray(y), np.asarray(z)).shape
        return np.broadcast_to(
            self.matrix.reshape((3, 3) + (1,) * len(shape)), (3, 3) + shape
        ).copy()


class WarpedCosineMap3D(Mapping3D):
    """Smoothly warped cube: x = xi + theta(xi) * (1, 1, 1) with
    theta = A cos(pi xi) cos(pi eta) cos(pi zeta).

    The warp is 2-periodic in every direction, so opposite faces of the
    cube carry identical deformation and periodic meshes stay conforming.
    At the origin the Jacobian is the identity.
    """

    def __init__(self, amplitude: float = 0.1):
        self.amplitude = float(amplitude)

    def _theta(self, x, y, z):
        return self.amplitude * np.cos(np.pi * x) * np.cos(np.pi * y) * np.cos(np.pi * z)

    def coords(self, x, y, z):
        x, y, z = np.broadcast_arrays(x, y, z)
        th = self._theta(x, y, z)
        return np.stack([x + th, y + th, z + th])

    def jacobian(self, x, y, z):
        x, y, z = np.broadcast_arrays(x, y, z)
        a, pi = self.amplitude, np.pi
        dth = np.stack(
            [
                -a * pi * np.sin(pi * x) * np.cos(pi * y) * np.cos(pi * z),
                -a * pi * np.cos(pi * x) * np.sin(pi * y) * np.cos(pi * z),
                -a * pi * np.cos(pi * x) * np.cos(pi * y) * np.sin(pi * z),
            ]
        )
        jac = np.broadcast_to(dth[None, :], (3,) + dth.shape).copy()
        for m in range(3):
            jac[m, m] += 1.0
        return jac


class PolynomialWarpMap3D(Mapping3D):
    """Component-asymmetric polynomial warp of per-direction degree q:

        x = xi   + A eta^q  zeta^q
        y = eta  + A xi^q   zeta^q
        z = zeta + A xi^q   eta^q

    Each component is warped by a different monomial, so the cross
    products of the Jacobian columns are genuinely quadratic in the warp;
    useful for exactness studies where the mapping degree must be
    controlled relative to the approximation degree N (products have
    degree 2q, so interpolation keeps them exact only while 2q <= N).
    """

    def __init__(self, degree: int, amplitude: float = 0.02):
        if degree < 1:
            raise ValueError("mapping degree must be >= 1")
        self.degree = int(degree)
        self.amplitude = float(amplitude)

    def coords(self, x, y, z):
        x, y, z = np.broadcast_arrays(x, y, z)
        q, a = self.degree, self.amplitude
        return np.stack(
            [x + a * y**q * z**q, y + a * x**q * z**q, z + a * x**q * y**q]
        )

    def jacobian(self, x, y, z):
        x, y, z = np.broadcast_arrays(x, y, z)
        q, a = self.degree, self.amplitude
        zero = np.zeros_like(x)
        qa = q * a
        row = lambda d0, d1, d2: np.stack([d0, d1, d2])
        jac = np.stack(
            [
                row(1.0 + zero, qa * y ** (q - 1) * z**q, qa * y**q * z ** (q - 1)),
                row(qa * x ** (q - 1) * z**q, 1.0 + zero, qa * x**q * z ** (q - 1)),
                row(qa * x ** (q - 1) * y**q, qa * x**q * y ** (q - 1), 1.0 + zero),
            ]
        )
        return jac


class ElementMap3D(Mapping3D):
    """Restriction of a global mapping to one axis-aligned box.

    The local reference cube is first sent to the box
    ``xi_glob = shift + scale * xi_loc`` (diagonal affine), then through
    the global mapping; the Jacobian picks up the chain-rule column
    scaling.
    """

    def __init__(self, outer: Mapping3D, scale, shift):
        self.outer = outer
        self.scale = np.asarray(scale, dtype=float)
        self.shift = np.asarray(shift, dtype=float)
        if self.scale.shape != (3,) or self.shift.shape != (3,):
            raise ValueError("scale and shift must have length 3")

    def _to_global(self, x, y, z):
        return (
            self.shift[0] + self.scale[0] * np.asarray(x, dtype=float),
            self.shift[1] + self.scale[1] * np.asarray(y, dtype=float),
            self.shift[2] + self.scale[2] * np.asarray(z, dtype=float),
        )

    def coords(self, x, y, z):
        return self.outer.coords(*self._to_global(x, y, z))

    def jacobian(self, x, y, z):
        jac = self.outer.jacobian(*self._to_global(x, y, z))
        return jac * self.scale.reshape((1, 3) + (1,) * (jac.ndim - 2))


@dataclass
class Mesh3D:
    """Periodic structured mesh of m1 x m2 x m3 curved hexahedra.

    Elements are stored flat in C order over their multi-indices; every
    element owns the restriction of the global mapping to its box.
    """

    dims: tuple[int, int, int]
    global_map: Mapping3D
    element_maps: list = field(default_factory=list)

    @property
    def num_elements(self) -> int:
        d = self.dims
        return d[0] * d[1] * d[2]

    def flat_index(self, multi) -> int:
        return int(np.ravel_multi_index(multi, self.dims))

    def multi_index(self, flat: int) -> tuple[int, int, int]:
        return tuple(int(v) for v in np.unravel_index(flat, self.dims))

    def neighbor(self, flat: int, direction: int, side: int) -> int:
        """Flat index of the periodic neighbour across face (direction, side)."""
        multi = list(self.multi_index(flat))
        multi[direction] = (multi[direction] + side) % self.dims[direction]
        return self.flat_index(multi)

    def element_mapping(self, flat: int) -> ElementMap3D:
        if not 0 <= flat < self.num_elements:
            raise IndexError(f"element index {flat} outside 0..{self.num_elements - 1}")
        return self.element_maps[flat]


def structured_mesh(dims, global_map: Mapping3D) -> Mesh3D:
    """Tile the global reference cube periodically with dims[0..2] boxes."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"mesh dimensions must be positive, got {dims}")
    widths = [2.0 / d for d in dims]
    maps = []
    for multi in np.ndindex(dims):
        shift = [-1.0 + (c + 0.5) * w for c, w in zip(multi, widths)]
        scale = [0.5 * w for w in widths]
        maps.append(ElementMap3D(global_map, scale, shift))
    return Mesh3D(dims, global_map, maps)


# ---------------------------------------------------------------------------
# exact metric terms

def analytic_metrics(mapping: Mapping3D, x, y, z):
    """Exact metric vectors and Jacobian determinant at given points.

    Returns:
        Tuple ``(ja, jac)`` where ``ja[i, n] = (dx/dxi^j x dx/dxi^k)_n``
        for cyclic (i, j, k) and ``jac`` is the triple product
        ``dx/dxi . (dx/deta x dx/dzeta)``.
    """
    jac_cols = mapping.jacobian(x, y, z)  # [m, a, ...]
    shape = jac_cols.shape[2:]
    ja = np.empty((3, 3) + shape)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        a = jac_cols[:, j]
        b = jac_cols[:, k]
        for n in range(3):
            m, l = (n + 1) % 3, (n + 2) % 3
            ja[i, n] = a[m] * b[l] - a[l] * b[m]
    jac = np.einsum("n...,n...->...", jac_cols[:, 0], ja[0])
    return ja, jac


def interpolated_coords(mapping: Mapping3D, rule: QuadRule1D) -> np.ndarray:
    """Nodal physical coordinates of one element, shape (3, n, n, n)."""
    x = rule.nodes
    return mapping.coords(x[:, None, None], x[None, :, None], x[None, None, :])


# ---------------------------------------------------------------------------
# two-dimensional analogues

class Mapping2D:
    """Reference square [-1, 1]^2 to the plane."""

    def coords(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x, y) -> np.ndarray:
        raise NotImplementedError


class AffineMap2D(Mapping2D):
    def __init__(self, matrix=None, offset=None):
        self.matrix = np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)
        self.offset = np.zeros(2) if offset is None else np.asarray(offset, dtype=float)

    def coords(self, x, y):
        x, y = np.broadcast_arrays(x, y)
        ref = np.stack([x, y]).astype(float)
        return np.einsum("mn,n...->m...", self.matrix, ref) + self.offset.reshape(
            (2,) + (1,) * x.ndim
        )

    def jacobian(self, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.broadcast_to(
            self.matrix.reshape((2, 2) + (1,) * len(shape)), (2, 2) + shape
        ).copy()


class WarpedCosineMap2D(Mapping2D):
    """Planar analogue of the warped cube:
    (x, y) = (xi, eta) + A cos(pi xi) cos(pi eta) (1, 1)."""

    def __init__(self, amplitude: float = 0.1):
        self.amplitude = float(amplitude)

    def coords(self, x, y):
        x, y = np.broadcast_arrays(x, y)
        th = self.amplitude * np.cos(np.pi * x) * np.cos(np.pi * y)
        return np.stack([x + th, y + th])

    def jacobian(self, x, y):
        x, y = np.broadcast_arrays(x, y)
        a, pi = self.amplitude, np.pi
        dth = np.stack(
            [
                -a * pi * np.sin(pi * x) * np.cos(pi * y),
                -a * pi * np.cos(pi * x) * np.sin(pi * y),
            ]
        )
        jac = np.broadcast_to(dth[None, :], (2,) + dth.shape).copy()
        for m in range(2):
            jac[m, m] += 1.0
        return jac


def analytic_metrics_2d(mapping: Mapping2D, x, y):
    """Exact 2D metric vectors: Ja^1 = (y_eta, -x_eta), Ja^2 = (-y_xi, x_xi)."""
    jac_cols = mapping.jacobian(x, y)  # [m, a, ...]
    shape = jac_cols.shape[2:]
    ja = np.empty((2, 2) + shape)
    ja[0, 0] = jac_cols[1, 1]
    ja[0, 1] = -jac_cols[0, 1]
    ja[1, 0] = -jac_cols[1, 0]
    ja[1, 1] = jac_cols[0, 0]
    jac = jac_cols[0, 0] * jac_cols[1, 1] - jac_cols[0, 1] * jac_cols[1, 0]
    return ja, jac


def interpolated_coords_2d(mapping: Mapping2D, rule: QuadRule1D) -> np.ndarray:
    x = rule.nodes
    return mapping.coords(x[:, None], x[None, :])
