"""Independent finite-difference reference computations.

Every closed formula in the package has a mirror here that is built only
from the raw system evaluators (``system.action``, ``system.metric``, exact
action Jacobians when the system carries them) and subspace arithmetic.  The
small derivative helpers are deliberately local copies so that the oracles
share no code path with the closed-form pipeline beyond those evaluators.

Acceptance-style comparisons: finite-difference-backed residuals are judged
at 1e-5 (relative), algebraic ones at 1e-10.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .geometry import MechanicalGSystem, PointFrame
from .residuals import ResidualReport

FD_TOL = 1e-5
ALG_TOL = 1e-10


def _fd_derivative(f: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    """Central difference at 0 with one Richardson level (local oracle copy)."""
    def central(step):
        return (np.asarray(f(step), dtype=float) - np.asarray(f(-step), dtype=float)) / (2 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def _generator(system: MechanicalGSystem, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
    if system.generator_fn is not None:
        return np.asarray(system.generator_fn(xi, x), dtype=float)
    nrm = float(np.linalg.norm(xi))
    if nrm == 0.0:
        return np.zeros(system.chart_dim)
    u = np.asarray(xi, dtype=float) / nrm
    return nrm * _fd_derivative(lambda t: system.action(t * u, x), system.fd.step_at(x))


def _inertia(system: MechanicalGSystem, x: np.ndarray) -> np.ndarray:
    gen = np.array([_generator(system, e, x) for e in np.eye(system.algebra.dim)]).T
    m = gen.T @ system.metric(x) @ gen
    return 0.5 * (m + m.T)


def _christoffel(system: MechanicalGSystem, x: np.ndarray) -> np.ndarray:
    n = system.chart_dim
    ginv = np.linalg.inv(system.metric(x))
    h = system.fd.step_at(x)
    dg = np.empty((n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dg[i] = _fd_derivative(lambda t: system.metric(x + t * e), h)
    braces = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, braces)


def _action_jacobian(system: MechanicalGSystem, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Jacobian of y |-> action(xi, y) at x; exact when the system provides it."""
    if system.action_dx is not None:
        return system.action_dx(xi, x)
    n = system.chart_dim
    h = system.fd.step_at(x)
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(_fd_derivative(lambda t: system.action(xi, x + t * e), h))
    return np.array(cols).T


def fd_lifted_generator(
    system: MechanicalGSystem, frame: PointFrame, xi: np.ndarray, p_x: np.ndarray
) -> np.ndarray:
    """Four-block coordinates of the lifted generator, by raw differentiation.

    The cotangent-lifted curve through p_x is realized in the chart as
    p(t) = (D_x action(-t xi, .) at x(t))^T p_x with x(t) = action(t xi, x);
    the vertical part is its covariant derivative at t = 0.
    """
    xi = np.asarray(xi, dtype=float)
    x = frame.x
    p_x = np.asarray(p_x, dtype=float)

    def xcurve(t):
        return system.action(t * xi, x)

    def pcurve(t):
        return _action_jacobian(system, -t * xi, xcurve(t)).T @ p_x

    h = system.fd.step_at(x)
    xdot = _fd_derivative(xcurve, h)
    pdot = _fd_derivative(pcurve, h)
    gamma = _christoffel(system, x)
    kval = pdot - np.einsum("kij,i,k->j", gamma, xdot, p_x)
    tangent = frame.tangent_coords(xdot)
    nu, beta = frame.split_cotangent(kval)
    return np.concatenate([tangent, nu, beta])


def chart_canonical_form_check(
    system: MechanicalGSystem,
    x: np.ndarray,
    p_x: np.ndarray,
    curve1: Callable[[float], tuple],
    curve2: Callable[[float], tuple],
    name: str = "canonical_form.representation",
) -> ResidualReport:
    """Compare the chart canonical two-form with its connection-map expression.

    Both curves must pass through (x, p_x) at t = 0.  The canonical value is
    sum_i dq^i ^ dp_i on the two curve velocities; the other side is
    <K(Y_2), Ttau(Y_1)> - <K(Y_1), Ttau(Y_2)>.  The two sides differentiate
    the curves independently (plain central differences against the
    Richardson stencil used inside K); shared derivatives would make the
    comparison an algebraic identity in the torsion-free Christoffels.
    """
    x = np.asarray(x, dtype=float)
    p_x = np.asarray(p_x, dtype=float)
    n = system.chart_dim
    h = system.fd.step_at(x)
    gamma = _christoffel(system, x)

    def stacked(curve):
        return lambda t: np.concatenate([np.asarray(v, dtype=float) for v in curve(t)])

    plain, rich = [], []
    for curve in (curve1, curve2):
        c0, p0 = (np.asarray(v, dtype=float) for v in curve(0.0))
        if np.linalg.norm(c0 - x) > 1e-9 or np.linalg.norm(p0 - p_x) > 1e-9:
            raise ValueError("curve does not pass through (x, p_x) at t = 0")
        f = stacked(curve)
        d_plain = (f(h) - f(-h)) / (2.0 * h)
        plain.append((d_plain[:n], d_plain[n:]))
        d_rich = _fd_derivative(f, h)
        rich.append((d_rich[:n], d_rich[n:]))
    (x1, p1), (x2, p2) = plain
    canonical = float(x1 @ p2 - x2 @ p1)
    (y1, q1), (y2, q2) = rich
    k1 = q1 - np.einsum("kij,i,k->j", gamma, y1, p_x)
    k2 = q2 - np.einsum("kij,i,k->j", gamma, y2, p_x)
    kform = float(k2 @ y1 - k1 @ y2)
    scale = max(1.0, abs(canonical), abs(kform))
    return ResidualReport(name, abs(canonical - kform) / scale, 1e-6,
                          "chart canonical form vs connection-map formula")


def locked_inertia_identity_check(
    system: MechanicalGSystem,
    x: np.ndarray,
    xi: np.ndarray,
    eta: np.ndarray,
    lam: np.ndarray,
    zeta_group: np.ndarray,
) -> tuple[ResidualReport, ResidualReport]:
    """The two locked-inertia identities: group equivariance and its derivative form."""
    algebra = system.algebra
    x = np.asarray(x, dtype=float)
    i_x = _inertia(system, x)
    scale = max(1.0, float(np.abs(i_x).max()))

    y = system.action(np.asarray(zeta_group, dtype=float), x)
    adg = algebra.adjoint_exp(zeta_group)
    i_y = _inertia(system, y)
    res1 = abs(float((adg @ eta) @ i_y @ (adg @ lam)) - float(np.asarray(eta) @ i_x @ lam))
    rep1 = ResidualReport("inertia.equivariance", res1 / scale, 1e-6,
                          "I(Exp(zeta).x)(Ad eta, Ad lam) = I(x)(eta, lam)")

    v = _generator(system, xi, x)
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        di_v = np.zeros_like(i_x)
    else:
        di_v = vn * _fd_derivative(lambda t: _inertia(system, x + t * (v / vn)),
                                   system.fd.step_at(x))
    res2 = float(np.asarray(eta) @ di_v @ lam
                 + algebra.bracket(xi, eta) @ i_x @ lam
                 + np.asarray(eta) @ i_x @ algebra.bracket(xi, lam))
    rep2 = ResidualReport("inertia.derivative_identity", abs(res2) / scale, 1e-6,
                          "(DI.xi_Q)(eta, lam) + I([xi,eta], lam) + I(eta, [xi,lam]) = 0")
    return rep1, rep2


def covariant_cross_check(
    system: MechanicalGSystem,
    frame: PointFrame,
    s: np.ndarray,
    xi: np.ndarray,
    lam: np.ndarray,
) -> ResidualReport:
    """Covariant derivative of the pushforward field vs the locked-inertia route.

    Route one differentiates the pushforward of s along the orbit curve and
    applies the Christoffel correction; route two is half the directional
    derivative of the locked inertia tensor.  Both pair against lam_Q(x).
    """
    x = frame.x
    s = np.asarray(s, dtype=float)
    xi = np.asarray(xi, dtype=float)
    h = system.fd.mixed_step_at(x)

    if system.action_dx is not None:
        dpdt = _fd_derivative(lambda t: system.action_dx(t * xi, x) @ s, h)
    else:
        sn = float(np.linalg.norm(s))
        if sn == 0.0:
            dpdt = np.zeros(system.chart_dim)
        else:
            u = s / sn

            def pushed(t):
                return sn * _fd_derivative(lambda sig: system.action(t * xi, x + sig * u), h)

            dpdt = _fd_derivative(pushed, h)
    gamma = _christoffel(system, x)
    gen_xi = _generator(system, xi, x)
    cov = dpdt + np.einsum("kij,i,j->k", gamma, gen_xi, s)
    lam_q = _generator(system, lam, x)
    route_a = float(cov @ system.metric(x) @ lam_q)

    sn = float(np.linalg.norm(s))
    if sn == 0.0:
        di_s = np.zeros((system.algebra.dim,) * 2)
    else:
        di_s = sn * _fd_derivative(lambda t: _inertia(system, x + t * (s / sn)),
                                   system.fd.step_at(x))
    _, xi_r = frame.split_algebra(xi)
    route_b = 0.5 * float(xi_r @ di_s @ np.asarray(lam, dtype=float))
    scale = max(1.0, abs(route_a), abs(route_b))
    return ResidualReport("covariant.cross_check", abs(route_a - route_b) / scale, FD_TOL,
                          "Christoffel route vs locked-inertia route")


def metric_invariance_check(
    system: MechanicalGSystem, x: np.ndarray, xi: np.ndarray,
    u0: np.ndarray, w0: np.ndarray,
) -> ResidualReport:
    """d/dt << u(t), w(t) >> = 0 for vectors pushed forward along Exp(t xi) . x."""
    x = np.asarray(x, dtype=float)

    def f(t):
        jac = _action_jacobian(system, t * np.asarray(xi), x)
        y = system.action(t * np.asarray(xi), x)
        return np.array([float((jac @ u0) @ system.metric(y) @ (jac @ w0))])

    h = system.fd.step_at(x)
    deriv = float(_fd_derivative(f, h)[0])
    scale = max(1.0, abs(float(f(0.0)[0])))
    return ResidualReport("metric.invariance", abs(deriv) / scale, 1e-6,
                          "pushed-forward metric pairing is constant in t")


def generator_bracket_check(
    system: MechanicalGSystem, x: np.ndarray, xi: np.ndarray, eta: np.ndarray
) -> ResidualReport:
    """FD Lie bracket of generator fields equals minus the bracket generator."""
    x = np.asarray(x, dtype=float)
    h = system.fd.step_at(x)

    def field(vec):
        return lambda y: _generator(system, vec, y)

    fx, fy = field(xi), field(eta)
    x_at = fx(x)
    y_at = fy(x)

    def dir_deriv(f, direction):
        dn = float(np.linalg.norm(direction))
        if dn == 0.0:
            return np.zeros(system.chart_dim)
        u = direction / dn
        return dn * _fd_derivative(lambda t: f(x + t * u), h)

    bracket_fd = dir_deriv(fy, x_at) - dir_deriv(fx, y_at)
    expected = -_generator(system, system.algebra.bracket(xi, eta), x)
    scale = max(1.0, float(np.linalg.norm(expected)))
    res = float(np.linalg.norm(bracket_fd - expected)) / scale
    return ResidualReport("generator.bracket_law", res, FD_TOL,
                          "[xi_Q, eta_Q](x) = -([xi, eta])_Q(x)")


def di_equivariance_check(
    system: MechanicalGSystem, x: np.ndarray, v: np.ndarray,
    xi: np.ndarray, zeta: np.ndarray,
) -> ResidualReport:
    """Infinitesimal form of the DI transport identity, for zeta in the isotropy algebra.

    Differentiating Ad*-transport of (DI.v)(xi) along Exp(t zeta) gives
    -ad*_zeta[(DI.v)(xi)] = (DI.(zeta.v))(xi) + (DI.v)([zeta, xi]).
    """
    algebra = system.algebra
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)

    def di(direction):
        dn = float(np.linalg.norm(direction))
        if dn == 0.0:
            return np.zeros((algebra.dim,) * 2)
        return dn * _fd_derivative(lambda t: _inertia(system, x + t * direction / dn),
                                   system.fd.step_at(x))

    h = system.fd.mixed_step_at(x)
    zeta_v = _fd_derivative(lambda t: _action_jacobian(system, t * np.asarray(zeta), x) @ v, h)
    lhs = -algebra.ad_matrix(zeta).T @ (di(v) @ np.asarray(xi, dtype=float))
    rhs = di(zeta_v) @ np.asarray(xi, dtype=float) + di(v) @ algebra.bracket(zeta, xi)
    scale = max(1.0, float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)))
    return ResidualReport("inertia.di_equivariance", float(np.linalg.norm(lhs - rhs)) / scale,
                          FD_TOL, "transport identity for DI, differentiated in the group")


def fd_convergence_pair(
    make_residual: Callable[[MechanicalGSystem], float],
    system: MechanicalGSystem,
    coarse_factor: float,
) -> tuple[float, float]:
    """Residuals of a check at a coarse step and at half that step.

    On smooth systems the ratio must be at least about the truncation order;
    the caller picks ``coarse_factor`` large enough that truncation, not
    roundoff, dominates.
    """
    coarse = system.with_fd(system.fd.scaled(coarse_factor))
    fine = system.with_fd(system.fd.scaled(coarse_factor / 2.0))
    return make_residual(coarse), make_residual(fine)
