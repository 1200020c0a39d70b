import math

import numpy as np
import pytest

from sympslice.geometry import ChartDomainError, fd_derivative
from sympslice.systems import (
    GoldenPoint,
    InvalidParamsError,
    UnknownSystemError,
    hat,
    instantiate,
    list_systems,
    planar_rotation,
    rotation,
    rotation_log,
    so3_right_jacobian,
)


def test_registry_contains_required_systems():
    keys = [d.key for d in list_systems()]
    assert keys == sorted(keys)
    for key in ("so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"):
        assert key in keys


def test_every_descriptor_instantiates():
    for desc in list_systems():
        system = instantiate(desc.key)
        assert system.chart_dim > 0
        for g in desc.golden_points:
            p = g.covector(system)
            assert p.shape == (system.chart_dim,)


def test_unknown_key_and_bad_params():
    with pytest.raises(UnknownSystemError):
        instantiate("nope")
    with pytest.raises(InvalidParamsError):
        instantiate("so3_r3", {"bogus": 1})
    with pytest.raises(InvalidParamsError):
        instantiate("so3_two_body", {"masses": (1.0, -2.0)})


def test_two_body_golden_is_the_j_nonzero_point():
    desc = next(d for d in list_systems() if d.key == "so3_two_body")
    assert any(g.j_is_zero is False for g in desc.golden_points)


# rotation primitives ---------------------------------------------------------

def test_rotation_matches_rodrigues_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        xi = rng.standard_normal(3)
        theta = np.linalg.norm(xi)
        k = hat(xi / theta)
        expected = np.eye(3) + math.sin(theta) * k + (1 - math.cos(theta)) * (k @ k)
        assert np.allclose(rotation(xi), expected, atol=1e-12)


def test_rotation_small_angle_series():
    xi = np.array([1e-6, -2e-6, 0.5e-6])
    r = rotation(xi)
    assert np.allclose(r, np.eye(3) + hat(xi), atol=1e-11)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-15)


def test_rotation_log_round_trip():
    rng = np.random.default_rng(6)
    for _ in range(10):
        xi = rng.standard_normal(3)
        xi *= 2.5 / max(2.5, np.linalg.norm(xi))  # keep below the chart cutoff
        assert np.allclose(rotation_log(rotation(xi)), xi, atol=1e-10)


def test_rotation_log_outside_chart():
    xi = np.array([math.pi - 0.01, 0.0, 0.0])
    with pytest.raises(ChartDomainError):
        rotation_log(rotation(xi))


def test_right_jacobian_convention():
    # d/dt Exp(x + t delta) = Exp(x) hat(J(x) delta) at t = 0
    rng = np.random.default_rng(7)
    x = np.array([0.4, -0.2, 0.7])
    for _ in range(5):
        delta = rng.standard_normal(3)
        deriv = fd_derivative(lambda t: rotation(x + t * delta), 1e-5)
        expected = rotation(x) @ hat(so3_right_jacobian(x) @ delta)
        assert np.allclose(deriv, expected, atol=1e-9)


def test_planar_rotation():
    assert np.allclose(planar_rotation(math.pi / 2), [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)


# action/metric contracts ------------------------------------------------------

@pytest.mark.parametrize("key", ["so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"])
def test_action_identity_and_exact_jacobian(key):
    system = instantiate(key)
    rng = np.random.default_rng(9)
    x = 0.3 * rng.standard_normal(system.chart_dim)
    assert np.allclose(system.action(np.zeros(system.algebra.dim), x), x, atol=1e-12)
    xi = 0.4 * rng.standard_normal(system.algebra.dim)
    # exact Jacobian override vs finite differences of the action map
    jac = system.action_dx(xi, x)
    for j in range(system.chart_dim):
        e = np.zeros(system.chart_dim)
        e[j] = 1.0
        col = fd_derivative(lambda t: system.action(xi, x + t * e), 1e-5)
        assert np.allclose(jac[:, j], col, atol=1e-9)


def test_so3_on_so3_action_is_left_translation():
    system = instantiate("so3_on_so3")
    xi = np.array([0.2, -0.3, 0.1])
    x = np.array([0.5, 0.1, -0.4])
    z = system.action(xi, x)
    assert np.allclose(rotation(z), rotation(xi) @ rotation(x), atol=1e-12)


def test_so3_on_so3_metric_is_bi_invariant():
    system = instantiate("so3_on_so3")
    rng = np.random.default_rng(11)
    x = np.array([0.3, 0.2, -0.1])
    g = rng.standard_normal(3) * 0.4
    u, w = rng.standard_normal((2, 3))
    # transport u, w along the left action and compare metric pairings
    y = system.action(g, x)
    jac = system.action_dx(g, x)
    before = u @ system.metric(x) @ w
    after = (jac @ u) @ system.metric(y) @ (jac @ w)
    assert before == pytest.approx(after, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("key", ["so3_r3", "so3_two_body", "torus2_r4", "so3_on_so3"])
def test_exact_generator_matches_fd(key):
    system = instantiate(key)
    rng = np.random.default_rng(21)
    for _ in range(4):
        xi = rng.standard_normal(system.algebra.dim)
        x = 0.25 * rng.standard_normal(system.chart_dim)
        exact = system.generator_fn(xi, x)
        nrm = np.linalg.norm(xi)
        fd = nrm * fd_derivative(lambda t: system.action(t * xi / nrm, x), 1e-5)
        assert np.allclose(exact, fd, atol=1e-9)


def test_golden_covector_from_eta_s():
    system = instantiate("so3_two_body")
    g = GoldenPoint(name="tmp", x=(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
                    eta=(1.0, 0.0, 0.0), s=(0.0, 0.0, 0.3, 0.2, 0.5, 0.1))
    p = g.covector(system)
    # eta_Q(x) = (e1 x e3, 0) = (0, -1, 0; 0, 0, 0) and the metric is the identity
    assert np.allclose(p, [0.0, -1.0, 0.0, 0.2, 0.5, 0.1] + np.array([0, 0, 0.3, 0, 0, 0]),
                       atol=1e-9)
