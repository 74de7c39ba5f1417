"""Unit tests for the compressible-Euler DG operator."""

import numpy as np
import pytest

from freestream.euler import (
    VARIABLES,
    DGSEMOperator,
    InvalidStateError,
    constant_state,
    fsp_error,
    normal_flux,
    physical_flux,
    pressure,
    rusanov_flux,
)
from freestream.geometry import AffineMap3D, WarpedCosineMap3D, structured_mesh
from freestream.polybasis import lgl_rule

FREE_STREAM = np.array([1.0, 0.1, -0.2, 0.7, 10.0])
GAMMA = 1.4


def identity_mesh(dims=(2, 2, 2)):
    return structured_mesh(dims, AffineMap3D())


def warped_mesh(dims=(2, 2, 2), amplitude=0.1):
    return structured_mesh(dims, WarpedCosineMap3D(amplitude))


# ---------------------------------------------------------------------------
# pointwise flux algebra


def test_pressure_frozen_value():
    p = pressure(FREE_STREAM, GAMMA)
    # (gamma-1) (rho e - |rho v|^2 / (2 rho)) with the numbers above
    assert p == pytest.approx(0.4 * (10.0 - 0.5 * (0.01 + 0.04 + 0.49)), abs=1e-15)
    assert p == pytest.approx(3.892, abs=1e-15)


def test_pressure_broadcasts_over_grids():
    u = np.tile(FREE_STREAM.reshape(5, 1, 1, 1), (1, 3, 4, 2))
    p = pressure(u, GAMMA)
    assert p.shape == (3, 4, 2)
    assert np.allclose(p, 3.892, atol=1e-15)


def test_physical_flux_frozen_columns():
    flux = physical_flux(FREE_STREAM, GAMMA)
    assert flux.shape == (3, 5)
    # direction 1: (rho v1, rho v1^2 + p, rho v1 v2, rho v1 v3, v1 (rho e + p))
    assert np.allclose(flux[0], [0.1, 3.902, -0.02, 0.07, 1.3892], atol=1e-15)
    # direction 2 picks up the pressure on the middle component
    assert np.allclose(flux[1], [-0.2, -0.02, 3.932, -0.14, -2.7784], atol=1e-15)
    assert np.allclose(flux[2], [0.7, 0.07, -0.14, 4.382, 9.7244], atol=1e-15)


def test_normal_flux_combines_directions():
    normal = np.array([0.3, -1.2, 0.5])
    flux = physical_flux(FREE_STREAM, GAMMA)
    expected = normal[0] * flux[0] + normal[1] * flux[1] + normal[2] * flux[2]
    assert np.allclose(normal_flux(FREE_STREAM, normal, GAMMA), expected, atol=1e-15)


def test_rusanov_consistency():
    """Identical states reduce the numerical flux to the normal flux exactly."""
    normal = np.array([0.4, 0.2, -0.9])
    fnum = rusanov_flux(FREE_STREAM, FREE_STREAM, normal, GAMMA)
    assert np.max(np.abs(fnum - normal_flux(FREE_STREAM, normal, GAMMA))) == 0.0


def test_rusanov_is_conservative_under_orientation_swap():
    left = FREE_STREAM
    right = np.array([0.9, 0.2, -0.1, 0.5, 9.0])
    normal = np.array([0.4, 0.2, -0.9])
    forward = rusanov_flux(left, right, normal, GAMMA)
    backward = rusanov_flux(right, left, -normal, GAMMA)
    assert np.max(np.abs(forward + backward)) == 0.0


def test_rusanov_adds_dissipation_proportional_to_jump():
    left = FREE_STREAM
    right = FREE_STREAM.copy()
    right[0] += 0.1
    normal = np.array([1.0, 0.0, 0.0])
    central = 0.5 * (
        normal_flux(left, normal, GAMMA) + normal_flux(right, normal, GAMMA)
    )
    fnum = rusanov_flux(left, right, normal, GAMMA)
    diss = central - fnum
    # dissipation acts on the jump only, with one positive speed
    assert diss[0] > 0.0
    assert np.allclose(diss[1:], 0.0, atol=1e-15)


# ---------------------------------------------------------------------------
# operator construction and state validation


def test_constant_state_layout():
    u = constant_state(FREE_STREAM, 8, 5)
    assert u.shape == (8, 5, 5, 5, 5)
    assert np.all(u[:, 3] == 0.7)


def test_invalid_state_reports_element_and_node():
    op = DGSEMOperator(identity_mesh(), lgl_rule(3), "mimetic-blue")
    u = constant_state(FREE_STREAM, 8, 4)
    u[5, 0, 1, 2, 3] = -2.0
    with pytest.raises(InvalidStateError) as excinfo:
        op.rhs(u)
    assert excinfo.value.element == 5
    assert excinfo.value.node == (1, 2, 3)
    assert "element 5" in str(excinfo.value)


def test_nonfinite_state_rejected():
    op = DGSEMOperator(identity_mesh(), lgl_rule(2), "mimetic-blue")
    u = constant_state(FREE_STREAM, 8, 3)
    u[0, 4, 0, 0, 0] = np.nan
    with pytest.raises(InvalidStateError):
        op.rhs(u)


def test_unknown_method_propagates():
    with pytest.raises(ValueError, match="unknown metric method"):
        DGSEMOperator(identity_mesh(), lgl_rule(2), "teal")


# ---------------------------------------------------------------------------
# semidiscrete residual


@pytest.mark.parametrize("method", ["kopriva", "mimetic-blue", "mimetic-red"])
def test_constant_state_residual_vanishes_on_warped_mesh(method):
    op = DGSEMOperator(warped_mesh(), lgl_rule(5), method)
    u = constant_state(FREE_STREAM, 8, 6)
    r = op.rhs(u)
    assert np.max(np.abs(r)) < 1e-11


def test_interior_residual_matches_analytic_divergence():
    """On the identity map the interior residual is the exact -div F.

    The state varies polynomially in the global x coordinate with degree
    low enough that every flux component stays inside the tensor space,
    so collocation differentiation is exact away from element faces.
    """
    mesh = identity_mesh()
    degree = 6
    rule = lgl_rule(degree)
    op = DGSEMOperator(mesh, rule, "mimetic-blue")

    a, b, c, d, e, f = 0.2, 0.1, -0.15, 0.25, 3.0, 0.05
    def fields(x):
        rho = np.ones_like(x)
        return np.stack([rho, a + b * x, c * rho, d * rho, e + f * x * x])

    u = np.empty((8, 5, degree + 1, degree + 1, degree + 1))
    for flat in range(8):
        emap = mesh.element_mapping(flat)
        nodes = rule.nodes
        x = emap.coords(
            nodes[:, None, None], nodes[None, :, None], nodes[None, None, :]
        )[0]
        u[flat] = fields(x)

    r = op.rhs(u)

    # hand-written x-derivative of the x-flux column (y/z fluxes are constant in y/z)
    for flat in range(8):
        emap = mesh.element_mapping(flat)
        nodes = rule.nodes
        x = emap.coords(
            nodes[:, None, None], nodes[None, :, None], nodes[None, None, :]
        )[0][1:-1, 1:-1, 1:-1]
        v1 = a + b * x
        p = 0.4 * (e + f * x * x - 0.5 * (v1 * v1 + c * c + d * d))
        dp = 0.4 * (2 * f * x - v1 * b)
        div = np.stack(
            [
                b * np.ones_like(x),
                2 * v1 * b + dp,
                c * b * np.ones_like(x),
                d * b * np.ones_like(x),
                b * (e + f * x * x + p) + v1 * (2 * f * x + dp),
            ]
        )
        interior = r[flat][:, 1:-1, 1:-1, 1:-1]
        assert np.max(np.abs(interior + div)) < 1e-11, flat


@pytest.mark.parametrize("method", ["kopriva", "mimetic-blue", "mimetic-red", "cross"])
def test_global_conservation_of_the_residual(method):
    """The J-weighted integral of the residual telescopes to zero.

    Volume terms integrate by parts against the constant and the face
    corrections cancel pairwise because both sides of a conforming face
    see the same metric data.
    """
    degree = 5
    mesh = warped_mesh()
    rule = lgl_rule(degree)
    op = DGSEMOperator(mesh, rule, method)
    rng = np.random.default_rng(7)

    nodes = rule.nodes
    u = np.empty((8, 5, degree + 1, degree + 1, degree + 1))
    for flat in range(8):
        emap = mesh.element_mapping(flat)
        x, y, z = emap.coords(
            nodes[:, None, None], nodes[None, :, None], nodes[None, None, :]
        )
        smooth = lambda amp: amp * np.sin(np.pi * x) * np.cos(np.pi * y) * np.cos(np.pi * z)
        u[flat, 0] = 1.0 + smooth(0.05)
        u[flat, 1] = 0.1 + smooth(0.08)
        u[flat, 2] = -0.2 + smooth(0.03)
        u[flat, 3] = 0.7 + smooth(0.06)
        u[flat, 4] = 10.0 + smooth(0.4)

    r = op.rhs(u)
    w3 = (
        rule.weights[:, None, None]
        * rule.weights[None, :, None]
        * rule.weights[None, None, :]
    )
    total = np.einsum("ijk,eijk,eqijk->q", w3, op.jac, r)
    scale = float(np.max(np.abs(np.einsum("ijk,eijk,eqijk->q", w3, op.jac, np.abs(r)))))
    assert np.max(np.abs(total)) <= 1e-11 * (1.0 + scale)


# ---------------------------------------------------------------------------
# wave speeds and time step


def test_wavespeed_sums_direction_speeds():
    """Frozen value on the identity mesh: a~^s = 2 e_s per direction."""
    op = DGSEMOperator(identity_mesh(), lgl_rule(3), "mimetic-blue")
    u = constant_state(FREE_STREAM, 8, 4)
    c = np.sqrt(GAMMA * 3.892)
    expected = 2.0 * (0.1 + 0.2 + 0.7 + 3.0 * c)
    assert op.max_wavespeed(u) == pytest.approx(expected, rel=1e-14)


def test_timestep_formula_and_homogeneity():
    mesh = structured_mesh((1, 1, 1), AffineMap3D())
    op = DGSEMOperator(mesh, lgl_rule(1), "mimetic-blue")
    # rest state with unit sound speed: rho = 1, p = 1/gamma
    rest = np.array([1.0, 0.0, 0.0, 0.0, 1.0 / (GAMMA * (GAMMA - 1.0))])
    u = constant_state(rest, 1, 2)
    assert op.max_wavespeed(u) == pytest.approx(3.0, rel=1e-14)
    dt = op.timestep(u, cfl=0.2)
    assert dt == pytest.approx(0.2 * 2.0 / (3.0 * 2.0), rel=1e-14)
    # doubling the metric terms at fixed J doubles the speed, halving dt
    op.ja = op.ja * 2.0
    assert op.timestep(u, cfl=0.2) == pytest.approx(dt / 2.0, rel=1e-13)


# ---------------------------------------------------------------------------
# error reporting


def test_fsp_error_exact_state_is_zero():
    op = DGSEMOperator(warped_mesh(), lgl_rule(4), "mimetic-blue")
    u = constant_state(FREE_STREAM, 8, 5)
    errs = fsp_error(u, FREE_STREAM, op, eval_points=21)
    assert set(errs) == set(VARIABLES)
    for l2, linf in errs.values():
        assert l2 < 1e-13 and linf < 1e-13


def test_fsp_error_uniform_offset_has_known_norms():
    op = DGSEMOperator(warped_mesh(), lgl_rule(4), "mimetic-blue")
    u = constant_state(FREE_STREAM, 8, 5)
    u[:, 0] += 1e-3
    errs = fsp_error(u, FREE_STREAM, op, eval_points=21)
    l2, linf = errs["rho"]
    assert linf == pytest.approx(1e-3, rel=1e-10)
    # squared-L2 weight integrates J over the periodic box: volume 8
    assert l2 == pytest.approx(1e-3 * np.sqrt(8.0), rel=1e-10)
    assert errs["rho_e"][1] < 1e-14
