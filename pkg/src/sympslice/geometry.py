"""Point-local Riemannian and action geometry on a single chart.

Everything here is 1-jet data at a point x of a chart for Q: infinitesimal
generators, the isotropy/complement splitting of the algebra, the slice, the
locked inertia tensor and its directional derivative, Christoffel symbols,
the connection map K, the slice-valued bilinear operator C, and the adapted
coordinate splittings of T_xQ and its dual.

Group curves are always Exp(t xi): every quantity computed here depends on a
group curve only through its initial velocity, so the group exponential can
stand in for any other curve tangent to xi.  Directional derivatives of
point-dependent tensors use chart straight lines for the same reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .liealg import LieAlgebra
from .subspaces import (
    BilinearForm,
    ContainmentError,
    DEFAULT_RANK_TOL,
    LinAlgContractError,
    Subspace,
    kernel_of,
    ortho_complement,
    span_of,
)


class ChartDomainError(RuntimeError):
    """An evaluator was queried outside its chart domain."""


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference parameters.

    ``step`` drives first-order central differences (one Richardson level),
    ``mixed_step`` drives the nested differences behind mixed second
    derivatives; both are scaled by max(1, |x|) at the evaluation point.
    """

    step: float = 1e-5
    mixed_step: float = 1e-3
    richardson: bool = True

    def step_at(self, x: np.ndarray) -> float:
        return self.step * max(1.0, float(np.linalg.norm(x)))

    def mixed_step_at(self, x: np.ndarray) -> float:
        return self.mixed_step * max(1.0, float(np.linalg.norm(x)))

    def scaled(self, factor: float) -> "FDConfig":
        return replace(self, step=self.step * factor, mixed_step=self.mixed_step * factor)


def fd_derivative(f: Callable[[float], np.ndarray], h: float, richardson: bool = True):
    """Central difference of f at 0, with one Richardson extrapolation level."""
    def central(step):
        return (np.asarray(f(step)) - np.asarray(f(-step))) / (2.0 * step)

    d1 = central(h)
    if not richardson:
        return d1
    return (4.0 * central(h / 2.0) - d1) / 3.0


@dataclass(frozen=True)
class MechanicalGSystem:
    """A chart-based G-manifold: action and metric evaluators plus numerics.

    ``action(xi, x)`` evaluates Exp(xi) . x in the chart; ``metric(x)`` is the
    SPD metric matrix at x.  ``action_dx``, when provided, returns the exact
    Jacobian of x |-> action(xi, x); otherwise Jacobian data is obtained by
    central differences.  Evaluators must be pure.
    """

    algebra: LieAlgebra
    chart_dim: int
    action: Callable[[np.ndarray, np.ndarray], np.ndarray]
    metric: Callable[[np.ndarray], np.ndarray]
    fd: FDConfig = FDConfig()
    action_dx: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    generator_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    label: str = ""

    def with_fd(self, fd: FDConfig) -> "MechanicalGSystem":
        return replace(self, fd=fd)

    def validate_at(self, x: np.ndarray, tol: float = 1e-12) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.chart_dim,):
            raise LinAlgContractError(f"point of shape {x.shape} in a {self.chart_dim}-dim chart")
        fixed = self.action(np.zeros(self.algebra.dim), x)
        if np.linalg.norm(fixed - x) > tol * max(1.0, np.linalg.norm(x)):
            raise LinAlgContractError("action(0, x) != x")
        m = self.metric(x)
        if np.linalg.eigvalsh(0.5 * (m + m.T)).min() <= 0:
            raise LinAlgContractError("metric is not positive definite at x")


def generator(system: MechanicalGSystem, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Infinitesimal generator xi_Q(x), by differentiating t |-> Exp(t xi) . x.

    Uses the system's exact generator when it carries one; the derivatives of
    the locked inertia tensor amplify generator noise by 1/step, so exact
    generators are what keeps the downstream 1e-8 contracts reachable.
    """
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    if system.generator_fn is not None:
        return np.asarray(system.generator_fn(xi, x), dtype=float)
    nrm = np.linalg.norm(xi)
    if nrm == 0.0:
        return np.zeros(system.chart_dim)
    u = xi / nrm
    h = system.fd.step_at(x)
    return nrm * fd_derivative(lambda t: system.action(t * u, x), h, system.fd.richardson)


def generator_matrix(system: MechanicalGSystem, x: np.ndarray) -> np.ndarray:
    """N x dim(g) matrix whose columns are the basis generators at x."""
    cols = [generator(system, e, x) for e in np.eye(system.algebra.dim)]
    return np.array(cols).T if cols else np.zeros((system.chart_dim, 0))


def locked_inertia(system: MechanicalGSystem, x: np.ndarray) -> np.ndarray:
    """Locked inertia matrix I(x)(xi, eta) = <<xi_Q(x), eta_Q(x)>> on the algebra."""
    gen = generator_matrix(system, x)
    m = gen.T @ system.metric(np.asarray(x, dtype=float)) @ gen
    return 0.5 * (m + m.T)


def locked_inertia_derivative(
    system: MechanicalGSystem, x: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """Directional derivative of the locked inertia tensor along the chart line x + t v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    d = system.algebra.dim
    if nrm == 0.0:
        return np.zeros((d, d))
    u = v / nrm
    h = system.fd.step_at(x)
    for _ in range(3):
        try:
            der = fd_derivative(lambda t: locked_inertia(system, x + t * u), h, system.fd.richardson)
            return nrm * 0.5 * (der + der.T)
        except ChartDomainError:
            h /= 10.0
    raise ChartDomainError("locked inertia derivative left the chart even after step shrinking")


def christoffel(system: MechanicalGSystem, x: np.ndarray) -> np.ndarray:
    """Christoffel symbols of the Levi-Civita connection at x.

    Returned as gamma[k, i, j] = Gamma^k_{ij}, with metric derivatives by
    central differences along the chart axes.
    """
    x = np.asarray(x, dtype=float)
    n = system.chart_dim
    g = system.metric(x)
    ginv = np.linalg.inv(g)
    h = system.fd.step_at(x)
    dg = np.empty((n, n, n))  # dg[i] = d metric / d x^i
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dg[i] = fd_derivative(lambda t: system.metric(x + t * e), h, system.fd.richardson)
    # gamma^k_{ij} = 1/2 g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})
    braces = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, braces)


def connection_K(
    system: MechanicalGSystem,
    covector_curve: Callable[[float], tuple],
    gamma: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Connection map applied to the velocity of a covector curve at t = 0.

    ``covector_curve(t)`` returns the pair (c(t), p(t)); the result is the
    covariant derivative of p along c at t = 0:
    K_j = pdot_j - Gamma^k_{ij} cdot^i p_k.
    """
    c0, p0 = (np.asarray(a, dtype=float) for a in covector_curve(0.0))
    h = system.fd.step_at(c0)
    dot = fd_derivative(
        lambda t: np.concatenate([np.asarray(q, dtype=float) for q in covector_curve(t)]),
        h,
        system.fd.richardson,
    )
    n = system.chart_dim
    cdot, pdot = dot[:n], dot[n:]
    if gamma is None:
        gamma = christoffel(system, c0)
    return pdot - np.einsum("kij,i,k->j", gamma, cdot, p0)


def pushforward_derivative(
    system: MechanicalGSystem, xi: np.ndarray, x: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """d/dt at 0 of P(t) = T_x(Exp(t xi) . ) v, the pushforward of v.

    Uses the exact action Jacobian when the system provides one; otherwise a
    nested central-difference (4-point cross) stencil on the action map.
    """
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vn = np.linalg.norm(v)
    if vn == 0.0 or np.linalg.norm(xi) == 0.0:
        return np.zeros(system.chart_dim)
    h = system.fd.mixed_step_at(x)
    if system.action_dx is not None:
        f = lambda t: system.action_dx(t * xi, x) @ v
        return fd_derivative(f, h, system.fd.richardson)
    u = v / vn

    def pushed(t: float) -> np.ndarray:
        return vn * fd_derivative(lambda s: system.action(t * xi, x + s * u), h, system.fd.richardson)

    return fd_derivative(pushed, h, system.fd.richardson)


def tangent_action_matrix(
    system: MechanicalGSystem, x: np.ndarray, zeta: np.ndarray
) -> np.ndarray:
    """Linearized action of zeta in the isotropy algebra on T_xQ.

    For zeta fixing x this is the matrix L with L v = d/dt T_x(Exp(t zeta).) v.
    """
    n = system.chart_dim
    if system.action_dx is not None:
        h = system.fd.mixed_step_at(np.asarray(x, dtype=float))
        return fd_derivative(lambda t: system.action_dx(t * np.asarray(zeta), x), h,
                             system.fd.richardson)
    cols = [pushforward_derivative(system, zeta, x, e) for e in np.eye(n)]
    return np.array(cols).T


@dataclass(frozen=True)
class PointFrame:
    """All point-local frame data at x: splittings, bases and tensors.

    The ordered orthonormal bases of r and S are fixed once here; every
    downstream matrix is expressed in them.
    """

    x: np.ndarray = field(repr=False)
    metric_x: np.ndarray = field(repr=False)
    gen: np.ndarray = field(repr=False)  # N x dim(g) generator matrix
    h: Subspace
    r: Subspace
    S: Subspace
    I_full: BilinearForm = field(repr=False)
    I_r: BilinearForm = field(repr=False)
    christoffel: np.ndarray = field(repr=False)
    rank_tol: float = DEFAULT_RANK_TOL
    invariance_report: dict = field(default_factory=dict, repr=False)

    # adapted bases -----------------------------------------------------------

    @property
    def r_dim(self) -> int:
        return self.r.dim

    @property
    def s_dim(self) -> int:
        return self.S.dim

    @property
    def gen_r(self) -> np.ndarray:
        """N x r_dim matrix of generators of the r basis."""
        return self.gen @ self.r.basis.T

    @property
    def tangent_basis(self) -> np.ndarray:
        """Columns: the adapted T_xQ basis (r generators, then slice basis)."""
        return np.hstack([self.gen_r, self.S.basis.T])

    @property
    def slice_metric(self) -> np.ndarray:
        """Gram matrix of the slice basis under the metric at x."""
        return self.S.basis @ self.metric_x @ self.S.basis.T

    # splittings --------------------------------------------------------------

    def tangent_coords(self, u: np.ndarray) -> np.ndarray:
        """Coordinates of a tangent vector in the adapted (r, S) basis."""
        return np.linalg.solve(self.tangent_basis, np.asarray(u, dtype=float))

    def split_tangent(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Unique decomposition u = xi_Q(x) + a with xi in r and a in S.

        Returns xi as an algebra vector and a as a chart vector.
        """
        c = self.tangent_coords(u)
        xi = self.r.basis.T @ c[: self.r_dim]
        a = self.S.basis.T @ c[self.r_dim:]
        return xi, a

    def join_tangent(self, xi: np.ndarray, a: np.ndarray) -> np.ndarray:
        return self.gen @ np.asarray(xi, dtype=float) + np.asarray(a, dtype=float)

    def split_cotangent(self, gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (nu, beta) of a covector: nu(lam) = gamma(lam_Q(x)), beta = gamma|S."""
        gamma = np.asarray(gamma, dtype=float)
        return self.gen_r.T @ gamma, self.S.basis @ gamma

    def join_cotangent(self, nu: np.ndarray, beta: np.ndarray) -> np.ndarray:
        rhs = np.concatenate([np.asarray(nu, dtype=float), np.asarray(beta, dtype=float)])
        return np.linalg.solve(self.tangent_basis.T, rhs)

    def restrict_dual_to_r(self, phi: np.ndarray) -> np.ndarray:
        """Restriction of an algebra dual vector to r, in the dual of the r basis."""
        return self.r.basis @ np.asarray(phi, dtype=float)

    def split_algebra(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Unique decomposition xi = xi_h + xi_r along g = h (+) r, as algebra vectors."""
        xi = np.asarray(xi, dtype=float)
        basis = np.vstack([self.h.basis, self.r.basis]).T
        c = np.linalg.solve(basis, xi)
        return self.h.basis.T @ c[: self.h.dim], self.r.basis.T @ c[self.h.dim:]

    # Legendre map -------------------------------------------------------------

    def legendre(self, xi: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Metric Legendre map of xi_Q(x) + a, as (nu, beta) covector coordinates."""
        xi_r = self.r.coords(np.asarray(xi, dtype=float))
        nu = self.I_r.matrix @ xi_r
        beta = self.slice_metric @ (self.S.basis @ np.asarray(a, dtype=float))
        return nu, beta

    def legendre_inverse(self, nu: np.ndarray, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        xi_r = np.linalg.solve(self.I_r.matrix, np.asarray(nu, dtype=float)) if self.r_dim else np.zeros(0)
        a_c = np.linalg.solve(self.slice_metric, np.asarray(beta, dtype=float)) if self.s_dim else np.zeros(0)
        return self.r.basis.T @ xi_r, self.S.basis.T @ a_c


def cotangent_momentum(system: MechanicalGSystem, frame: PointFrame, p_x: np.ndarray) -> np.ndarray:
    """Momentum of the lifted action at p_x: mu_i = <p_x, (e_i)_Q(x)>."""
    return frame.gen.T @ np.asarray(p_x, dtype=float)


def point_frame(
    system: MechanicalGSystem,
    x: np.ndarray,
    invariance_generators: Optional[Subspace] = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> PointFrame:
    """Assemble the adapted frame at x.

    h is the kernel of the generator matrix, r its ip-orthogonal complement,
    S the metric orthocomplement of the orbit tangent; the locked inertia
    tensor is restricted to r where it is positive definite.  When
    ``invariance_generators`` is given, infinitesimal invariance of h, r and
    S under them is measured and reported (flagged, never fatal).
    """
    x = np.asarray(x, dtype=float)
    algebra = system.algebra
    d = algebra.dim
    metric_x = system.metric(x)
    if np.linalg.eigvalsh(0.5 * (metric_x + metric_x.T)).min() <= 0:
        raise LinAlgContractError("metric is not positive definite at x")
    gen = generator_matrix(system, x)
    h = kernel_of(gen, rank_tol)
    r = ortho_complement(h, algebra.ip_form(), Subspace.full(d), rank_tol)
    orbit = span_of(gen.T, ambient_dim=system.chart_dim, rank_tol=rank_tol)
    metric_form = BilinearForm(Subspace.full(system.chart_dim), 0.5 * (metric_x + metric_x.T))
    s = ortho_complement(orbit, metric_form, Subspace.full(system.chart_dim), rank_tol)
    i_full_mat = gen.T @ metric_x @ gen
    i_full_mat = 0.5 * (i_full_mat + i_full_mat.T)
    i_full = BilinearForm(Subspace.full(d), i_full_mat)
    i_r_mat = r.basis @ i_full_mat @ r.basis.T
    i_r = BilinearForm(r, 0.5 * (i_r_mat + i_r_mat.T))
    if r.dim and np.linalg.eigvalsh(i_r.matrix).min() <= 0:
        raise LinAlgContractError("locked inertia tensor is not positive definite on r")
    report = {}
    if invariance_generators is not None and invariance_generators.dim:
        report = frame_invariance_report(
            system, x, invariance_generators, h, r, s, algebra
        )
    return PointFrame(
        x=x,
        metric_x=metric_x,
        gen=gen,
        h=h,
        r=r,
        S=s,
        I_full=i_full,
        I_r=i_r,
        christoffel=christoffel(system, x),
        rank_tol=rank_tol,
        invariance_report=report,
    )


def frame_invariance_report(system, x, generators, h, r, s, algebra) -> dict:
    """Residuals of infinitesimal invariance of h, r, S under the given generators."""
    res_h = res_r = res_s = res_ip = 0.0
    for zeta in generators.basis:
        ad = algebra.ad_matrix(zeta)
        if h.dim:
            img = (ad @ h.basis.T).T
            res_h = max(res_h, float(np.abs(img - img @ h.projector().T).max()))
        if r.dim:
            img = (ad @ r.basis.T).T
            res_r = max(res_r, float(np.abs(img - img @ r.projector().T).max()))
        if s.dim:
            lin = tangent_action_matrix(system, x, zeta)
            img = (lin @ s.basis.T).T
            res_s = max(res_s, float(np.abs(img - img @ s.projector().T).max()))
        # infinitesimal invariance of the algebra inner product under zeta
        g = algebra.inner_product
        res_ip = max(res_ip, float(np.abs(ad.T @ g + g @ ad).max()))
    return {
        "h_invariance": res_h,
        "r_invariance": res_r,
        "slice_invariance": res_s,
        "inner_product_invariance": res_ip,
    }


def c_operator(
    system: MechanicalGSystem, frame: PointFrame, v: np.ndarray
) -> np.ndarray:
    """Matrix [ <C(v)(rho_a), w_j>_S ] over the r basis (rows) and slice basis (columns).

    C(v)(xi) is the slice component of the covariant derivative, at t = 0, of
    the pushforward field P(t) = T_x(Exp(t xi).) v along the orbit curve
    Exp(t xi) . x; the entry against w_j is the full metric pairing, which
    already realizes the slice projection.
    """
    v = np.asarray(v, dtype=float)
    if frame.S.containment_residual(v) > 1e-8 * max(1.0, np.linalg.norm(v)):
        raise ContainmentError("C operator argument is not in the slice")
    out = np.zeros((frame.r_dim, frame.s_dim))
    if frame.r_dim == 0 or frame.s_dim == 0 or not np.any(v):
        return out
    mw = frame.metric_x @ frame.S.basis.T  # N x s_dim
    for a, rho in enumerate(frame.r.basis):
        dpdt = pushforward_derivative(system, rho, frame.x, v)
        gen_rho = frame.gen @ rho
        full = dpdt + np.einsum("kij,i,j->k", frame.christoffel, gen_rho, v)
        out[a] = full @ mw
    return out


def covariant_orbit_derivative(
    system: MechanicalGSystem, frame: PointFrame, v: np.ndarray, xi: np.ndarray
) -> np.ndarray:
    """Full covariant derivative at x of the pushforward field of v along Exp(t xi) . x."""
    xi = np.asarray(xi, dtype=float)
    dpdt = pushforward_derivative(system, xi, frame.x, v)
    gen_xi = frame.gen @ xi
    return dpdt + np.einsum("kij,i,j->k", frame.christoffel, gen_xi, np.asarray(v, dtype=float))
