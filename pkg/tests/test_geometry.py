import numpy as np
import pytest

from sympslice.geometry import (
    MechanicalGSystem,
    c_operator,
    christoffel,
    connection_K,
    cotangent_momentum,
    covariant_orbit_derivative,
    generator,
    locked_inertia,
    locked_inertia_derivative,
    point_frame,
    pushforward_derivative,
    tangent_action_matrix,
)
from sympslice.liealg import abelian
from sympslice.subspaces import ContainmentError, span_of
from sympslice.systems import instantiate

X0 = np.array([0.0, 0.0, 1.0])
E = np.eye(3)


@pytest.fixture(scope="module")
def so3r3():
    return instantiate("so3_r3")


@pytest.fixture(scope="module")
def frame0(so3r3):
    return point_frame(so3r3, X0)


# generators -----------------------------------------------------------------

def test_generator_cross_product_oracle(so3r3):
    rng = np.random.default_rng(2)
    for _ in range(5):
        xi = rng.standard_normal(3)
        x = rng.standard_normal(3)
        assert np.allclose(generator(so3r3, xi, x), np.cross(xi, x), atol=1e-10)
    assert np.allclose(generator(so3r3, E[0], X0), [0.0, -1.0, 0.0], atol=1e-10)
    assert np.allclose(generator(so3r3, E[2], X0), 0.0, atol=1e-12)
    assert np.allclose(generator(so3r3, np.zeros(3), X0), 0.0)


def test_generator_linear_in_xi(so3r3):
    rng = np.random.default_rng(3)
    xi, eta = rng.standard_normal((2, 3))
    x = rng.standard_normal(3)
    lhs = generator(so3r3, 2.0 * xi + eta, x)
    rhs = 2.0 * generator(so3r3, xi, x) + generator(so3r3, eta, x)
    assert np.allclose(lhs, rhs, atol=1e-9)


# point frame ------------------------------------------------------------------

def test_point_frame_so3_r3(so3r3, frame0):
    f = frame0
    assert f.h.dim == 1 and np.allclose(np.abs(f.h.basis[0]), [0, 0, 1])
    assert f.r.dim == 2
    assert np.abs(f.r.basis @ np.array([0.0, 0.0, 1.0])).max() < 1e-12
    assert f.S.dim == 1 and np.allclose(np.abs(f.S.basis[0]), [0, 0, 1])
    assert np.allclose(f.I_full.matrix, np.diag([1.0, 1.0, 0.0]), atol=1e-9)
    assert np.allclose(f.I_r.matrix, np.eye(2), atol=1e-9)


def test_point_frame_torus():
    system = instantiate("torus2_r4")
    f = point_frame(system, np.array([1.0, 0.0, 1.0, 0.0]))
    assert f.h.dim == 0
    # oracle: I(xi, eta) = <xi_Q, eta_Q> with generators (0,1,0,0) and (0,0,0,1)
    assert np.allclose(f.I_full.matrix, np.eye(2), atol=1e-9)
    assert f.S.dim == 2


def test_point_frame_invariance_report(so3r3):
    f = point_frame(so3r3, X0, invariance_generators=span_of([(0.0, 0.0, 1.0)]))
    assert max(f.invariance_report.values()) < 1e-8


# locked inertia ----------------------------------------------------------------

def test_locked_inertia_derivative_radial(so3r3):
    d = locked_inertia_derivative(so3r3, X0, np.array([0.0, 0.0, 1.0]))
    assert np.allclose(d, np.diag([2.0, 2.0, 0.0]), atol=1e-8)
    assert np.allclose(locked_inertia_derivative(so3r3, X0, np.zeros(3)), 0.0)


def test_locked_inertia_bracket_identity(so3r3):
    # (DI . xi_Q(x))(eta, lam) + I([xi,eta], lam) + I(eta, [xi,lam]) = 0
    rng = np.random.default_rng(4)
    algebra = so3r3.algebra
    for _ in range(5):
        xi, eta, lam = rng.standard_normal((3, 3))
        x = rng.standard_normal(3)
        i_x = locked_inertia(so3r3, x)
        di = locked_inertia_derivative(so3r3, x, generator(so3r3, xi, x))
        val = (eta @ di @ lam + algebra.bracket(xi, eta) @ i_x @ lam
               + eta @ i_x @ algebra.bracket(xi, lam))
        assert abs(val) < 1e-7 * max(1.0, np.abs(i_x).max())


# christoffel ---------------------------------------------------------------------

def test_christoffel_flat_metric(so3r3):
    assert np.abs(christoffel(so3r3, X0)).max() < 1e-10


def test_christoffel_closed_form_diag_metric():
    # metric diag(1, (1 + x1)^2) on R^2: Gamma^2_{12} = 1/(1 + x1)
    algebra = abelian(1)
    system = MechanicalGSystem(
        algebra=algebra,
        chart_dim=2,
        action=lambda xi, x: np.asarray(x, dtype=float),
        metric=lambda x: np.diag([1.0, (1.0 + x[0]) ** 2]),
    )
    gamma = christoffel(system, np.zeros(2))
    assert gamma[1, 0, 1] == pytest.approx(1.0, abs=1e-9)
    assert gamma[1, 1, 0] == pytest.approx(1.0, abs=1e-9)
    # oracle: Gamma^1_{22} = -(1 + x1); symmetry in the lower indices
    assert gamma[0, 1, 1] == pytest.approx(-1.0, abs=1e-9)
    assert np.abs(gamma - gamma.transpose(0, 2, 1)).max() < 1e-8


def test_christoffel_symmetric_all_bundled():
    for key in ("so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"):
        system = instantiate(key)
        x = 0.2 * np.arange(1, system.chart_dim + 1, dtype=float)
        if key == "so3_on_so3":
            x = np.array([0.3, 0.1, -0.2])
        gamma = christoffel(system, x)
        assert np.abs(gamma - gamma.transpose(0, 2, 1)).max() < 1e-8


# connection map -------------------------------------------------------------------

def test_connection_constant_curve(so3r3):
    p0 = np.array([0.1, 0.2, 0.3])
    assert np.allclose(connection_K(so3r3, lambda t: (X0, p0)), 0.0, atol=1e-12)


def test_connection_vertical_curve(so3r3):
    p0 = np.array([0.1, 0.2, 0.3])
    q = np.array([1.0, -2.0, 0.5])
    k = connection_K(so3r3, lambda t: (X0, p0 + t * q))
    assert np.allclose(k, q, atol=1e-9)


def test_connection_flat_chart_is_plain_derivative(so3r3):
    p0 = np.array([0.1, 0.2, 0.3])
    curve = lambda t: (X0 + t * np.array([1.0, 0.0, 1.0]), p0 + t * np.array([0.0, 1.0, 2.0])
                       + t * t * np.array([1.0, 1.0, 0.0]))
    assert np.allclose(connection_K(so3r3, curve), [0.0, 1.0, 2.0], atol=1e-9)


def test_connection_curved_chart_matches_formula():
    system = instantiate("so3_on_so3")
    x = np.array([0.25, -0.1, 0.15])
    p0 = np.array([0.4, 0.1, -0.3])
    cdot = np.array([0.2, 0.5, -0.1])
    pdot = np.array([-0.3, 0.2, 0.6])
    curve = lambda t: (x + t * cdot, p0 + t * pdot)
    gamma = christoffel(system, x)
    expected = pdot - np.einsum("kij,i,k->j", gamma, cdot, p0)
    assert np.allclose(connection_K(system, curve), expected, atol=1e-8)


# pushforward and C operator ---------------------------------------------------------

def test_pushforward_derivative_exact_vs_fd(so3r3):
    # the nested finite-difference path must agree with the exact-Jacobian path
    import dataclasses

    fd_only = dataclasses.replace(so3r3, action_dx=None)
    rng = np.random.default_rng(8)
    for _ in range(3):
        xi, v = rng.standard_normal((2, 3))
        a = pushforward_derivative(so3r3, xi, X0, v)
        b = pushforward_derivative(fd_only, xi, X0, v)
        assert np.allclose(a, b, atol=1e-6)
        # oracle for the linear rotation action: d/dt R(t xi) v = xi x v
        assert np.allclose(a, np.cross(xi, v), atol=1e-9)


def test_c_operator_radial_slice_is_zero(so3r3, frame0):
    c = c_operator(so3r3, frame0, np.array([0.0, 0.0, 1.0]))
    assert c.shape == (2, 1)
    assert np.abs(c).max() < 1e-9


def test_c_operator_zero_vector(so3r3, frame0):
    assert np.abs(c_operator(so3r3, frame0, np.zeros(3))).max() == 0.0


def test_c_operator_rejects_non_slice_vector(so3r3, frame0):
    with pytest.raises(ContainmentError):
        c_operator(so3r3, frame0, np.array([1.0, 0.0, 0.0]))


def test_c_operator_covariant_identity_two_body():
    # cross-check row: <nabla_xi sbar(x), lam_Q(x)> = (DI.s)(xi_r, lam) / 2
    system = instantiate("so3_two_body")
    x = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    frame = point_frame(system, x)
    s = np.array([0.0, 0.0, 0.4, 0.1, -0.2, 0.3])
    assert frame.S.containment_residual(s) < 1e-9
    di_s = locked_inertia_derivative(system, x, s)
    rng = np.random.default_rng(12)
    for _ in range(4):
        xi, lam = rng.standard_normal((2, 3))
        _, xi_r = frame.split_algebra(xi)
        cov = covariant_orbit_derivative(system, frame, s, xi)
        lhs = cov @ system.metric(x) @ generator(system, lam, x)
        rhs = 0.5 * float(xi_r @ di_s @ lam)
        assert lhs == pytest.approx(rhs, abs=2e-8)


def test_locked_inertia_derivative_step_shrink_and_error():
    from sympslice.geometry import ChartDomainError

    # metric with a tiny validity ball: the first step fails, the retry fits
    algebra = abelian(1)

    def tight_metric(radius):
        def metric(x):
            if np.linalg.norm(x) > radius:
                raise ChartDomainError("outside")
            return np.eye(2)
        return metric

    def make(radius):
        return MechanicalGSystem(
            algebra=algebra, chart_dim=2,
            action=lambda xi, x: np.asarray(x, dtype=float),
            metric=tight_metric(radius),
        )

    # base step is 1e-5; a 3e-6 ball forces one shrink, then succeeds
    d = locked_inertia_derivative(make(3e-6), np.zeros(2), np.array([1.0, 0.0]))
    assert np.allclose(d, 0.0)
    with pytest.raises(ChartDomainError):
        locked_inertia_derivative(make(1e-12), np.zeros(2), np.array([1.0, 0.0]))


# tangent action -----------------------------------------------------------------

def test_tangent_action_infinitesimal_rotation(so3r3):
    l = tangent_action_matrix(so3r3, X0, np.array([0.0, 0.0, 1.0]))
    from sympslice.systems import hat

    assert np.allclose(l, hat([0.0, 0.0, 1.0]), atol=1e-9)


# splittings ---------------------------------------------------------------------

def test_split_tangent_examples(so3r3, frame0):
    xi, a = frame0.split_tangent(np.array([0.0, -1.0, 0.0]))
    assert np.allclose(xi, [1.0, 0.0, 0.0], atol=1e-9)
    assert np.allclose(a, 0.0, atol=1e-9)
    xi, a = frame0.split_tangent(np.array([0.0, 0.0, 1.0]))
    assert np.allclose(xi, 0.0, atol=1e-12)
    assert np.allclose(a, [0.0, 0.0, 1.0], atol=1e-12)


def test_legendre_example(so3r3, frame0):
    nu, beta = frame0.legendre(np.array([1.0, 0.0, 0.0]), np.zeros(3))
    # I_r = identity on r, so nu is the r-coordinates of e1
    assert np.allclose(nu, frame0.r.basis @ np.array([1.0, 0.0, 0.0]), atol=1e-9)
    assert np.allclose(beta, 0.0, atol=1e-12)


def test_split_round_trips_curved():
    system = instantiate("so3_on_so3")
    x = np.array([0.2, -0.3, 0.1])
    frame = point_frame(system, x)
    rng = np.random.default_rng(13)
    for _ in range(5):
        u = rng.standard_normal(3)
        xi, a = frame.split_tangent(u)
        assert np.allclose(frame.join_tangent(xi, a), u, atol=1e-9)
        gamma = rng.standard_normal(3)
        nu, beta = frame.split_cotangent(gamma)
        assert np.allclose(frame.join_cotangent(nu, beta), gamma, atol=1e-9)


def test_cotangent_momentum_examples(so3r3, frame0):
    assert np.allclose(cotangent_momentum(so3r3, frame0, np.array([0.0, -1.0, 0.0])),
                       [1.0, 0.0, 0.0], atol=1e-9)
    assert np.allclose(cotangent_momentum(so3r3, frame0, np.array([0.0, 0.0, 5.0])),
                       0.0, atol=1e-9)
    assert np.allclose(cotangent_momentum(so3r3, frame0, np.zeros(3)), 0.0)


def test_momentum_annihilates_isotropy():
    system = instantiate("so3_two_body")
    x = np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    frame = point_frame(system, x)
    rng = np.random.default_rng(14)
    for _ in range(3):
        p = rng.standard_normal(6)
        mu = cotangent_momentum(system, frame, p)
        assert np.abs(frame.h.basis @ mu).max() < 1e-9


# metric invariance (standing hypothesis) -------------------------------------------

def test_metric_invariance_all_bundled():
    from sympslice.fdchecks import metric_invariance_check

    rng = np.random.default_rng(15)
    for key in ("so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"):
        system = instantiate(key)
        x = 0.2 * np.arange(1, system.chart_dim + 1, dtype=float)
        xi = rng.standard_normal(system.algebra.dim)
        u0, w0 = rng.standard_normal((2, system.chart_dim))
        assert metric_invariance_check(system, x, xi, u0, w0).residual < 1e-6
