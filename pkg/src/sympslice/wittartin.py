"""Witt-Artin decomposition of the coadjoint orbit tangent at the momentum value.

Builds the invariant splitting g = h (+) p (+) q_mu (+) k together with the
matching decomposition of the orbit tangent g.mu = h.mu (+) V_mu (+) W, where
V_mu is a symplectic complement of the isotropic h.mu inside its symplectic
orthogonal and W is a Lagrangian complement obtained from the compatible
complex structure (which makes the choice canonical and equivariant).

Complements are realized as orthocomplements under the supplied inner
products; validity needs infinitesimal invariance of those inner products
under the phase-space isotropy algebra, which is measured and reported
rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liealg import LieAlgebra
from .residuals import ResidualReport
from .subspaces import (
    BilinearForm,
    DEFAULT_RANK_TOL,
    Subspace,
    compatible_complex_structure,
    intersect,
    kernel_of,
    ortho_complement,
    span_of,
    symplectic_orthogonal,
)


class SplittingError(RuntimeError):
    """A direct-sum or nondegeneracy requirement of the splitting failed."""


@dataclass(frozen=True)
class CoadjointSplitting:
    """All pieces of the Witt-Artin decomposition at mu.

    Algebra side: g_mu, h_mu, p, q_mu, k (subspaces of g).  Orbit side:
    h_mu_orbit = h.mu, V_mu, W (subspaces of g*), and the KKS form omega_mu
    on the orbit tangent.
    """

    mu: np.ndarray = field(repr=False)
    h: Subspace
    g_mu: Subspace
    h_mu: Subspace
    p: Subspace
    q_mu: Subspace
    k: Subspace
    orbit_tangent: Subspace
    h_mu_orbit: Subspace
    V_mu: Subspace
    W: Subspace
    omega_mu: BilinearForm = field(repr=False)
    invariance_report: dict = field(default_factory=dict, repr=False)

    def dims(self) -> dict:
        return {
            "g_mu": self.g_mu.dim,
            "h_mu": self.h_mu.dim,
            "p": self.p.dim,
            "q_mu": self.q_mu.dim,
            "k": self.k.dim,
            "orbit": self.orbit_tangent.dim,
            "h_mu_orbit": self.h_mu_orbit.dim,
            "V_mu": self.V_mu.dim,
            "W": self.W.dim,
        }


def _check_direct_sum(parts: list[Subspace], expected_dim: int, label: str) -> None:
    """Direct sum means dimensions add up and the stacked bases stay nonsingular.

    The parts need not be mutually orthogonal (h, p and k generally are not),
    so independence is judged by the smallest singular value of the stacked
    basis matrix against a rank-style threshold.
    """
    dims = sum(p.dim for p in parts)
    if dims != expected_dim:
        raise SplittingError(f"{label}: dimensions add to {dims}, expected {expected_dim}")
    if dims == 0:
        return
    stacked = np.vstack([p.basis for p in parts if p.dim])
    sv = np.linalg.svd(stacked, compute_uv=False)
    if sv.min() <= 1e-8:
        raise SplittingError(f"{label}: parts are numerically dependent (min sv {sv.min():.3e})")


def witt_artin_split(
    algebra: LieAlgebra,
    mu: np.ndarray,
    h: Subspace,
    gpx: Subspace,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> CoadjointSplitting:
    """Construct the invariant splitting of g and of the orbit tangent at mu.

    ``h`` is the configuration isotropy algebra, ``gpx`` the phase-space
    isotropy algebra (must sit inside h and the stabilizer of mu).
    """
    mu = np.asarray(mu, dtype=float)
    d = algebra.dim
    ip = algebra.ip_form()
    dual_ip = algebra.dual_ip_form()

    g_mu = algebra.coadjoint_stabilizer(mu, rank_tol)
    h_mu = intersect(h, g_mu, rank_tol)
    if gpx.dim and not h_mu.contains(gpx, tol=1e-8):
        raise SplittingError("gpx is not contained in h intersected with the stabilizer of mu")
    p = ortho_complement(h_mu, ip, g_mu, rank_tol)

    t = algebra.orbit_tangent(mu, rank_tol)
    omega_mu = algebra.kks_form(mu, rank_tol)
    h_mu_orbit = span_of(
        [algebra.ad_star(b, mu) for b in h.basis], ambient_dim=d, rank_tol=rank_tol
    ) if h.dim else Subspace.zero(d)

    z = symplectic_orthogonal(h_mu_orbit, omega_mu, t, rank_tol)
    v_mu = ortho_complement(h_mu_orbit, dual_ip, z, rank_tol)
    z2 = symplectic_orthogonal(v_mu, omega_mu, t, rank_tol)
    if h_mu_orbit.dim:
        j = compatible_complex_structure(omega_mu, dual_ip, z2, rank_tol)
        w = span_of([j.apply(b) for b in h_mu_orbit.basis], ambient_dim=d, rank_tol=rank_tol)
    else:
        w = Subspace.zero(d)

    adm = algebra.ad_star_matrix(mu)
    eye = np.eye(d)
    # the projections can annihilate adm entirely; rank decisions there must
    # be judged against the size of adm itself, not of the noise left over
    adm_scale = float(np.linalg.norm(adm, 2)) if d else 0.0
    g1 = kernel_of((eye - v_mu.projector()) @ adm, rank_tol, scale=adm_scale)
    q_mu = ortho_complement(g_mu, ip, g1, rank_tol)
    g2 = kernel_of((eye - w.projector()) @ adm, rank_tol, scale=adm_scale)
    k = ortho_complement(g_mu, ip, g2, rank_tol)

    # structural checks; failures indicate a genuinely bad input or tolerance
    _check_direct_sum([h, p, q_mu, k], d, "g = h + p + q_mu + k")
    _check_direct_sum([h_mu, p], g_mu.dim, "g_mu = h_mu + p")
    _check_direct_sum([h_mu_orbit, v_mu, w], t.dim, "orbit tangent = h_mu_orbit + V_mu + W")
    if v_mu.dim:
        om_v = omega_mu.restricted_to(v_mu).matrix
        sv = np.linalg.svd(om_v, compute_uv=False)
        scale = max(np.abs(omega_mu.matrix).max(), 1e-300)
        if sv.min() <= 1e-9 * scale:
            raise SplittingError(f"omega degenerate on V_mu (min sv {sv.min():.3e})")
    for name, sub in (("W", w), ("h_mu_orbit", h_mu_orbit)):
        if sub.dim:
            om = omega_mu.restricted_to(sub).matrix
            if np.abs(om).max() > 1e-10 * max(1.0, np.abs(omega_mu.matrix).max()):
                raise SplittingError(f"{name} is not isotropic (max pairing {np.abs(om).max():.3e})")

    report = _invariance_report(algebra, gpx, h_mu_orbit, v_mu, w, (h, h_mu, p, q_mu, k))
    return CoadjointSplitting(
        mu=mu,
        h=h,
        g_mu=g_mu,
        h_mu=h_mu,
        p=p,
        q_mu=q_mu,
        k=k,
        orbit_tangent=t,
        h_mu_orbit=h_mu_orbit,
        V_mu=v_mu,
        W=w,
        omega_mu=omega_mu,
        invariance_report=report,
    )


def _invariance_report(algebra, gpx, h_mu_orbit, v_mu, w, algebra_parts) -> dict:
    """Infinitesimal gpx-invariance residuals of every constituent subspace."""
    report = {"vacuous": gpx.dim == 0}
    worst_alg = worst_orbit = worst_ip = 0.0
    for zeta in gpx.basis:
        ad = algebra.ad_matrix(zeta)
        for sub in algebra_parts:
            if sub.dim:
                img = (ad @ sub.basis.T).T
                worst_alg = max(worst_alg, float(np.abs(img - img @ sub.projector().T).max()))
        for sub in (h_mu_orbit, v_mu, w):
            if sub.dim:
                img = (ad.T @ sub.basis.T).T  # infinitesimal coadjoint action on the dual
                worst_orbit = max(worst_orbit, float(np.abs(img - img @ sub.projector().T).max()))
        g = algebra.inner_product
        worst_ip = max(worst_ip, float(np.abs(ad.T @ g + g @ ad).max()))
    report["algebra_parts"] = worst_alg
    report["orbit_parts"] = worst_orbit
    report["inner_product"] = worst_ip
    return report


def verify_splitting(
    splitting: CoadjointSplitting,
    algebra: LieAlgebra,
    mu: np.ndarray,
    gpx: Subspace,
) -> list[ResidualReport]:
    """Report-only re-derivation of the splitting's defining properties."""
    mu = np.asarray(mu, dtype=float)
    out = []

    worst = 0.0
    for lam in splitting.q_mu.basis:
        ad = algebra.ad_star(lam, mu)
        if splitting.h.dim:
            worst = max(worst, float(np.abs(splitting.h.basis @ ad).max()))
    out.append(ResidualReport("witt.qmu_momentum_annihilates_h", worst, 1e-10,
                              "Proj_h[ad*_lam mu] = 0 for lam in q_mu"))

    worst = 0.0
    qk = np.vstack([splitting.q_mu.basis, splitting.k.basis]) if (
        splitting.q_mu.dim + splitting.k.dim
    ) else np.zeros((0, algebra.dim))
    for lam in splitting.k.basis:
        ad = algebra.ad_star(lam, mu)
        if qk.shape[0]:
            worst = max(worst, float(np.abs(qk @ ad).max()))
    out.append(ResidualReport("witt.k_momentum_annihilates_qk", worst, 1e-10,
                              "ad*_lam mu vanishes on q_mu (+) k for lam in k"))

    for name, sub in (("witt.h_orbit_isotropic", splitting.h_mu_orbit),
                      ("witt.W_isotropic", splitting.W)):
        worst = 0.0
        if sub.dim:
            om = splitting.omega_mu.restricted_to(sub).matrix
            worst = float(np.abs(om).max())
        out.append(ResidualReport(name, worst, 1e-10, "omega_mu vanishes on the subspace"))

    rep = splitting.invariance_report
    context = "vacuous (gpx = 0)" if rep.get("vacuous") else "infinitesimal gpx-invariance"
    out.append(ResidualReport("witt.gpx_invariance_algebra", rep.get("algebra_parts", 0.0),
                              1e-9, context))
    out.append(ResidualReport("witt.gpx_invariance_orbit", rep.get("orbit_parts", 0.0),
                              1e-9, context))
    out.append(ResidualReport("witt.gpx_inner_product_invariance", rep.get("inner_product", 0.0),
                              1e-10, context))

    dims_ok = (
        splitting.orbit_tangent.dim
        == splitting.h_mu_orbit.dim + splitting.V_mu.dim + splitting.W.dim
        and splitting.W.dim == splitting.h_mu_orbit.dim
        and splitting.g_mu.dim == splitting.h_mu.dim + splitting.p.dim
    )
    out.append(ResidualReport("witt.dimension_identities", 0.0 if dims_ok else 1.0, 0.5,
                              str(splitting.dims())))

    worst = 0.0
    if splitting.q_mu.dim:
        # generator map restricted to q_mu must be injective onto V_mu
        m = algebra.ad_star_matrix(mu) @ splitting.q_mu.basis.T
        sv = np.linalg.svd(m, compute_uv=False)
        rank = int(np.sum(sv > 1e-9 * max(sv.max(), 1e-300)))
        img_in_v = np.abs(m.T - m.T @ splitting.V_mu.projector().T).max()
        worst = max(float(rank != splitting.q_mu.dim or rank != splitting.V_mu.dim),
                    float(img_in_v))
    out.append(ResidualReport("witt.qmu_isomorphic_to_Nmu", worst, 1e-9,
                              "ad* mu maps q_mu isomorphically onto V_mu"))
    return out
