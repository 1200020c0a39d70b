"""Point analysis and the embedded symplectic normal space.

Given a chart point x and a covector p_x, :func:`analyze_point` collects all
point-local data: the momentum mu, the (eta, s) decomposition of p_x through
the Legendre map, the phase-space isotropy algebra, the adapted slice
subspaces and the heavy finite-difference tensors (locked-inertia
derivatives, the C matrix, slice representation matrices).

:func:`lifted_generator_closed_form` evaluates the closed formula for the
infinitesimal lifted action in the adapted four-block coordinates
(r, S; r*, S*), and :func:`build_normal_space` assembles the normal space V
from the Witt-Artin splitting: basis, embedding, block symplectic matrix,
case flags and the quadratic momentum map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    MechanicalGSystem,
    PointFrame,
    c_operator,
    cotangent_momentum,
    frame_invariance_report,
    locked_inertia_derivative,
    point_frame,
    tangent_action_matrix,
)
from .subspaces import (
    BilinearForm,
    DEFAULT_RANK_TOL,
    LinearMapRep,
    Subspace,
    AmbiguousSolveError,
    intersect,
    kernel_of,
    ortho_complement,
    solve_exact,
    span_of,
)
from .wittartin import CoadjointSplitting, SplittingError, witt_artin_split

CASE_FLAGS = (
    "TotallyIsotropic",
    "VerticalCovector",
    "LocallyFree",
    "TrivialSliceAction",
    "HsubGmu",
    "Generic",
)

# threshold for finite-difference-backed flag decisions (slice action triviality)
FD_FLAG_TOL = 1e-6
# threshold for algebraic flag decisions
ALG_FLAG_TOL = 1e-10


class NormalFormAssemblyError(RuntimeError):
    """The assembled symplectic matrix failed to reach its block normal form."""


@dataclass(frozen=True)
class PointData:
    """Everything the closed formulas need at (x, p_x)."""

    system: MechanicalGSystem = field(repr=False)
    frame: PointFrame = field(repr=False)
    p_x: np.ndarray = field(repr=False)
    mu: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)  # algebra vector in r
    s: np.ndarray = field(repr=False)  # chart vector in S
    alpha: np.ndarray = field(repr=False)  # chart covector, annihilates the orbit
    g_px: Subspace
    g_mu: Subspace
    h_mu: Subspace
    h_s: Subspace
    h_mu_s: Subspace
    B: Subspace
    h_mu_s_perp: Subspace
    h_alpha_ann: Subspace
    slice_rep: np.ndarray = field(repr=False)  # (dim h, N, N) tangent actions of h basis
    c_matrix: np.ndarray = field(repr=False)  # (dim r, dim S)
    di_eta_s: np.ndarray = field(repr=False)  # DI . (eta_Q(x) + s)
    di_slice: np.ndarray = field(repr=False)  # (dim S, dim g, dim g), DI . w_j
    frame_invariance: dict = field(default_factory=dict, repr=False)

    @property
    def block_dim(self) -> int:
        """Dimension of one half of the four-block space: dim r + dim S."""
        return self.frame.r_dim + self.frame.s_dim

    def h_action(self, xi_h: np.ndarray) -> np.ndarray:
        """Linearized tangent action of an isotropy-algebra element, N x N."""
        n = self.system.chart_dim
        if self.frame.h.dim == 0:
            return np.zeros((n, n))
        coords = self.frame.h.coords(np.asarray(xi_h, dtype=float))
        return np.einsum("i,ijk->jk", coords, self.slice_rep)

    def di_of_slice_vector(self, a: np.ndarray) -> np.ndarray:
        """DI . a for a slice vector a, by linearity in the direction."""
        coords = self.frame.S.basis @ np.asarray(a, dtype=float)
        if coords.size == 0:
            return np.zeros((self.system.algebra.dim,) * 2)
        return np.einsum("j,jkl->kl", coords, self.di_slice)

    def diamond_h(self, b: np.ndarray, covector: np.ndarray) -> np.ndarray:
        """<b diamond_h covector, xi_i> = <covector, xi_i . b> on the h basis."""
        return np.array([
            float(covector @ (rep @ np.asarray(b, dtype=float))) for rep in self.slice_rep
        ]) if self.frame.h.dim else np.zeros(0)


def analyze_point(
    system: MechanicalGSystem,
    x: np.ndarray,
    p_x: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> PointData:
    """Assemble all point data at (x, p_x)."""
    x = np.asarray(x, dtype=float)
    p_x = np.asarray(p_x, dtype=float)
    frame = point_frame(system, x, rank_tol=rank_tol)
    algebra = system.algebra
    d = algebra.dim
    n = system.chart_dim

    mu = cotangent_momentum(system, frame, p_x)
    # generator noise pollutes momenta that vanish structurally; snapping the
    # pairing-noise floor to zero keeps stabilizer ranks exact for systems
    # without exact generator overrides
    gen_scale = float(np.abs(frame.gen).max()) if frame.gen.size else 0.0
    mu_floor = 1e-10 * max(1.0, float(np.linalg.norm(p_x)) * max(1.0, gen_scale))
    mu = np.where(np.abs(mu) <= mu_floor, 0.0, mu)
    velocity = np.linalg.solve(frame.metric_x, p_x)
    eta, s = frame.split_tangent(velocity)
    alpha = frame.metric_x @ s  # annihilates g.x because s is metric-orthogonal to it

    slice_rep = np.array([
        tangent_action_matrix(system, x, zeta) for zeta in frame.h.basis
    ]) if frame.h.dim else np.zeros((0, n, n))

    g_mu = algebra.coadjoint_stabilizer(mu, rank_tol)
    g_px = _phase_isotropy(frame, algebra, mu, alpha, slice_rep, rank_tol)

    h_mu = intersect(frame.h, g_mu, rank_tol)
    # the h.s spans are judged at the size of the covector data: with s zero
    # up to roundoff these vectors are pure noise and must span nothing
    s_scale = max(1.0, float(np.linalg.norm(s)))
    h_s = span_of([rep @ s for rep in slice_rep], ambient_dim=n, rank_tol=rank_tol,
                  scale=s_scale) if frame.h.dim else Subspace.zero(n)
    h_mu_s_vecs = []
    for zeta in h_mu.basis:
        coords = frame.h.coords(zeta)
        h_mu_s_vecs.append(np.einsum("i,ijk->jk", coords, slice_rep) @ s)
    h_mu_s = span_of(h_mu_s_vecs, ambient_dim=n, rank_tol=rank_tol, scale=s_scale)

    metric_form = BilinearForm(Subspace.full(n), 0.5 * (frame.metric_x + frame.metric_x.T))
    b_space = ortho_complement(h_mu_s, metric_form, frame.S, rank_tol)
    h_alpha_ann = ortho_complement(h_s, metric_form, frame.S, rank_tol)
    h_mu_s_perp = ortho_complement(h_mu_s, metric_form, h_s, rank_tol)

    c_matrix = c_operator(system, frame, s)
    di_eta_s = locked_inertia_derivative(system, x, frame.gen @ eta + s)
    di_slice = np.array([
        locked_inertia_derivative(system, x, w) for w in frame.S.basis
    ]) if frame.s_dim else np.zeros((0, d, d))

    invariance = frame_invariance_report(
        system, x, g_px, frame.h, frame.r, frame.S, algebra
    ) if g_px.dim else {}

    return PointData(
        system=system,
        frame=frame,
        p_x=p_x,
        mu=mu,
        eta=eta,
        s=s,
        alpha=alpha,
        g_px=g_px,
        g_mu=g_mu,
        h_mu=h_mu,
        h_s=h_s,
        h_mu_s=h_mu_s,
        B=b_space,
        h_mu_s_perp=h_mu_s_perp,
        h_alpha_ann=h_alpha_ann,
        slice_rep=slice_rep,
        c_matrix=c_matrix,
        di_eta_s=di_eta_s,
        di_slice=di_slice,
        frame_invariance=invariance,
    )


def _phase_isotropy(frame, algebra, mu, alpha, slice_rep, rank_tol) -> Subspace:
    """g_px = { xi in h : xi . alpha = 0 and ad*_xi mu = 0 }, via a stacked kernel."""
    dh = frame.h.dim
    d = algebra.dim
    if dh == 0:
        return Subspace.zero(d)
    rows = []
    for j in range(frame.s_dim):
        w = frame.S.basis[j]
        rows.append([float(alpha @ (slice_rep[i] @ w)) for i in range(dh)])
    for row in (algebra.ad_star_matrix(mu) @ frame.h.basis.T):
        rows.append(list(row))
    stacked = np.array(rows) if rows else np.zeros((0, dh))
    # conditions are judged at the size of the covector data, not of FD noise
    scale = max(1.0, float(np.linalg.norm(mu)), float(np.linalg.norm(alpha)))
    ker = kernel_of(stacked, rank_tol, scale=scale)
    if ker.dim == 0:
        return Subspace.zero(d)
    return span_of(ker.basis @ frame.h.basis, ambient_dim=d, rank_tol=rank_tol)


def point_splitting(pd: PointData, rank_tol: float = DEFAULT_RANK_TOL) -> CoadjointSplitting:
    """The Witt-Artin splitting at pd's momentum value."""
    return witt_artin_split(pd.system.algebra, pd.mu, pd.frame.h, pd.g_px, rank_tol)


# closed formulas ---------------------------------------------------------------

def lifted_generator_closed_form(pd: PointData, xi: np.ndarray) -> np.ndarray:
    """Four-block coordinates of the infinitesimal lifted action of xi at p_x.

    Returns the concatenation (xi_r coords, a coords, nu coords, beta coords);
    the tangent part is (xi_r, 0), the vertical part is
    nu    = 1/2 Proj_r[(DI.(eta_Q(x)+s))(xi_r) - ad*_{xi_r} mu] - Proj_r[ad*_{xi_h} mu],
    beta(w) = <xi_h . alpha, w> - 1/2 (DI.w)(xi_r, eta) + <C(s)(xi_r), w>_S.
    (The last projection is exact: ad*_{xi_h} mu already annihilates h.)
    """
    frame = pd.frame
    algebra = pd.system.algebra
    xi_h, xi_r = frame.split_algebra(np.asarray(xi, dtype=float))
    xi_r_coords = frame.r.basis @ xi_r

    nu_full = 0.5 * (pd.di_eta_s @ xi_r - algebra.ad_star(xi_r, pd.mu)) \
        - algebra.ad_star(xi_h, pd.mu)
    nu = frame.restrict_dual_to_r(nu_full)

    l_h = pd.h_action(xi_h)
    beta = np.empty(frame.s_dim)
    for j in range(frame.s_dim):
        w = frame.S.basis[j]
        beta[j] = -float(pd.alpha @ (l_h @ w)) \
            - 0.5 * float(xi_r @ pd.di_slice[j] @ pd.eta) \
            + float(xi_r_coords @ pd.c_matrix[:, j])

    out = np.zeros(2 * pd.block_dim)
    out[: frame.r_dim] = xi_r_coords
    out[pd.block_dim: pd.block_dim + frame.r_dim] = nu
    out[pd.block_dim + frame.r_dim:] = beta
    return out


def f1(pd: PointData, gamma: np.ndarray, a: np.ndarray) -> np.ndarray:
    """First vertical component of the normal-space embedding, as r* coordinates."""
    algebra = pd.system.algebra
    gamma = np.asarray(gamma, dtype=float)
    di_a = pd.di_of_slice_vector(a)
    full = 0.5 * (pd.di_eta_s @ gamma - di_a @ pd.eta + algebra.ad_star(gamma, pd.mu))
    out = pd.frame.restrict_dual_to_r(full)
    if pd.frame.s_dim:
        out = out + pd.c_matrix @ (pd.frame.S.basis @ np.asarray(a, dtype=float))
    return out


def f2(pd: PointData, gamma: np.ndarray) -> np.ndarray:
    """Second vertical component of the normal-space embedding, as S* coordinates."""
    gamma = np.asarray(gamma, dtype=float)
    gamma_r_coords = pd.frame.r.basis @ gamma
    out = np.empty(pd.frame.s_dim)
    for j in range(pd.frame.s_dim):
        out[j] = -0.5 * float(pd.eta @ pd.di_slice[j] @ gamma) \
            + float(gamma_r_coords @ pd.c_matrix[:, j])
    return out


def diamond(l: np.ndarray, o: np.ndarray, rep_matrices) -> np.ndarray:
    """<l diamond o, xi_i> = <o, rep_i l> for the listed representation matrices."""
    l = np.asarray(l, dtype=float)
    o = np.asarray(o, dtype=float)
    out = np.array([float(o @ (np.asarray(rep) @ l)) for rep in rep_matrices])
    return out


def j_map(pd: PointData, splitting: CoadjointSplitting,
          rank_tol: float = DEFAULT_RANK_TOL) -> LinearMapRep:
    """The unique linear map j with Proj_h[ad*_{j(b)} mu] = b diamond_h alpha on k.

    Uniqueness comes from injectivity of gamma |-> Proj_h[ad*_gamma mu] on k;
    a rank-deficient solve signals an inconsistent splitting.
    """
    algebra = pd.system.algebra
    dom = pd.h_mu_s_perp
    cod = splitting.k
    if dom.dim == 0:
        return LinearMapRep(dom, cod, np.zeros((cod.dim, 0)))
    a = pd.frame.h.basis @ algebra.ad_star_matrix(pd.mu) @ cod.basis.T
    cols = []
    for b in dom.basis:
        rhs = pd.diamond_h(b, pd.alpha)
        try:
            cols.append(solve_exact(a, rhs, rank_tol))
        except AmbiguousSolveError as exc:
            raise SplittingError(
                "the j solve is rank deficient; the splitting violates injectivity on k"
            ) from exc
    return LinearMapRep(dom, cod, np.array(cols).T)


def pr1(pd: PointData, a: np.ndarray) -> np.ndarray:
    """Metric-orthogonal projection of a B vector onto (h_mu . s)-perp inside h . s."""
    u = pd.h_mu_s_perp
    if u.dim == 0:
        return np.zeros(pd.system.chart_dim)
    m = pd.frame.metric_x
    gram = u.basis @ m @ u.basis.T
    coords = np.linalg.solve(gram, u.basis @ (m @ np.asarray(a, dtype=float)))
    return u.basis.T @ coords


def g_mu_orbit_directions(
    pd: PointData, splitting: CoadjointSplitting, rank_tol: float = DEFAULT_RANK_TOL
) -> Subspace:
    """Span of the lifted-action images of a basis of g_mu, in four-block coordinates."""
    vecs = [lifted_generator_closed_form(pd, xi) for xi in splitting.g_mu.basis]
    return span_of(vecs, ambient_dim=2 * pd.block_dim, rank_tol=rank_tol)


def g_orbit_directions(pd: PointData, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Span of the lifted-action images of the full algebra basis."""
    d = pd.system.algebra.dim
    vecs = [lifted_generator_closed_form(pd, e) for e in np.eye(d)]
    return span_of(vecs, ambient_dim=2 * pd.block_dim, rank_tol=rank_tol)


def four_block_omega(block_dim: int) -> np.ndarray:
    """Canonical symplectic matrix on the four-block coordinates."""
    m = block_dim
    out = np.zeros((2 * m, 2 * m))
    out[:m, m:] = np.eye(m)
    out[m:, :m] = -np.eye(m)
    return out


@dataclass(frozen=True)
class NormalSpaceResult:
    """The embedded symplectic normal space at (x, p_x)."""

    pd: PointData = field(repr=False)
    splitting: CoadjointSplitting = field(repr=False)
    V_basis: np.ndarray = field(repr=False)  # rows: four-block coordinates
    block_dims: tuple
    omega: BilinearForm = field(repr=False)  # assembled form on V's basis
    omega_block: np.ndarray = field(repr=False)  # block normal form target
    block_residual: float
    iota_matrix: LinearMapRep = field(repr=False)
    JN_tensor: np.ndarray = field(repr=False)  # (dim g_px, dim N, dim N)
    case_flags: frozenset
    j_matrix: LinearMapRep = field(repr=False)
    beta_covectors: np.ndarray = field(repr=False)  # (dim B, N) chart covectors for B*

    @property
    def dim_V(self) -> int:
        return self.V_basis.shape[0]

    def dimension_law_sides(self) -> tuple[int, int]:
        """(dim V, the rank-count formula it must equal)."""
        pd = self.pd
        rhs = (2 * pd.frame.s_dim + pd.system.algebra.dim + 2 * pd.g_px.dim
               - 2 * pd.frame.h.dim - pd.g_mu.dim)
        return self.dim_V, rhs


def build_normal_space(
    pd: PointData,
    splitting: CoadjointSplitting | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    block_tol: float = 1e-8,
) -> NormalSpaceResult:
    """Assemble V, its embedding, block symplectic matrix, flags and momentum map."""
    if splitting is None:
        splitting = point_splitting(pd, rank_tol)
    frame = pd.frame
    algebra = pd.system.algebra
    m = pd.block_dim
    metric = frame.metric_x

    q_basis = splitting.q_mu.basis
    b_basis = pd.B.basis
    nq, nb = splitting.q_mu.dim, pd.B.dim

    # B* realized inside S* through the slice metric, with basis dual to B's:
    # beta_i = <<btilde_i, .>> where <<btilde_i, a_j>> = delta_ij.
    if nb:
        gram = b_basis @ metric @ b_basis.T
        btilde = np.linalg.solve(gram, b_basis)
        beta_cov = btilde @ metric  # rows: chart covectors
    else:
        beta_cov = np.zeros((0, pd.system.chart_dim))

    jmat = j_map(pd, splitting, rank_tol)

    vectors = []
    for lam in q_basis:
        vec = np.zeros(2 * m)
        vec[: frame.r_dim] = frame.r.basis @ lam
        vec[m: m + frame.r_dim] = f1(pd, lam, np.zeros(pd.system.chart_dim))
        vec[m + frame.r_dim:] = f2(pd, lam)
        vectors.append(vec)
    for a in b_basis:
        gamma = jmat.apply(pr1(pd, a)) if jmat.domain.dim else np.zeros(algebra.dim)
        vec = np.zeros(2 * m)
        vec[: frame.r_dim] = frame.r.basis @ gamma
        vec[frame.r_dim: m] = frame.S.basis @ a
        vec[m: m + frame.r_dim] = f1(pd, gamma, a)
        vec[m + frame.r_dim:] = f2(pd, gamma)
        vectors.append(vec)
    for bc in beta_cov:
        vec = np.zeros(2 * m)
        vec[m + frame.r_dim:] = frame.S.basis @ bc
        vectors.append(vec)
    v_basis = np.array(vectors) if vectors else np.zeros((0, 2 * m))

    dim_n = nq + 2 * nb
    omega_full = four_block_omega(m)
    omega_mat = v_basis @ omega_full @ v_basis.T if dim_n else np.zeros((0, 0))
    omega_mat = 0.5 * (omega_mat - omega_mat.T)

    # block normal form target: KKS block on N_mu, canonical pairing on B x B*
    target = np.zeros((dim_n, dim_n))
    for i in range(nq):
        for j in range(i + 1, nq):
            target[i, j] = -float(pd.mu @ algebra.bracket(q_basis[i], q_basis[j]))
            target[j, i] = -target[i, j]
    target[nq: nq + nb, nq + nb:] = np.eye(nb)
    target[nq + nb:, nq: nq + nb] = -np.eye(nb)

    residual = float(np.abs(omega_mat - target).max()) if dim_n else 0.0
    if residual > block_tol:
        raise NormalFormAssemblyError(
            f"symplectic matrix differs from its block normal form by {residual:.3e}; "
            "this signals an upstream splitting inconsistency"
        )

    flags = _case_flags(pd, splitting)
    jn = _momentum_tensor(pd, splitting, beta_cov, dim_n, nq, nb)

    return NormalSpaceResult(
        pd=pd,
        splitting=splitting,
        V_basis=v_basis,
        block_dims=(nq, nb, nb),
        omega=BilinearForm(Subspace.full(dim_n), omega_mat, kind="skew"),
        omega_block=target,
        block_residual=residual,
        iota_matrix=LinearMapRep(Subspace.full(dim_n), Subspace.full(2 * m), v_basis.T),
        JN_tensor=jn,
        case_flags=flags,
        j_matrix=jmat,
        beta_covectors=beta_cov,
    )


def _case_flags(pd: PointData, splitting: CoadjointSplitting) -> frozenset:
    algebra = pd.system.algebra
    flags = set()
    if splitting.g_mu.dim == algebra.dim:
        flags.add("TotallyIsotropic")
    if np.linalg.norm(pd.alpha) <= ALG_FLAG_TOL * max(1.0, np.linalg.norm(pd.p_x)):
        flags.add("VerticalCovector")
    if pd.frame.h.dim == 0:
        flags.add("LocallyFree")
    trivial = True
    for rep in pd.slice_rep:
        for w in pd.frame.S.basis:
            if np.linalg.norm(rep @ w) > FD_FLAG_TOL:
                trivial = False
    if trivial:
        flags.add("TrivialSliceAction")
    if splitting.g_mu.contains(pd.frame.h, tol=1e-8):
        flags.add("HsubGmu")
    if not flags:
        flags.add("Generic")
    return frozenset(flags)


def _momentum_tensor(pd, splitting, beta_cov, dim_n, nq, nb) -> np.ndarray:
    """Coefficients Q with <J_N(w), zeta_m> = w^T Q_m w on N coordinates."""
    algebra = pd.system.algebra
    out = np.zeros((pd.g_px.dim, dim_n, dim_n))
    for mi, zeta in enumerate(pd.g_px.basis):
        l_z = pd.h_action(zeta)
        q = np.zeros((dim_n, dim_n))
        for c1, lam1 in enumerate(splitting.q_mu.basis):
            ad1 = algebra.ad_star(lam1, pd.mu)
            for c2, lam2 in enumerate(splitting.q_mu.basis):
                val = 0.25 * float(ad1 @ algebra.bracket(zeta, lam2))
                q[c1, c2] += val
                q[c2, c1] += val
        for i, a in enumerate(pd.B.basis):
            za = l_z @ a
            for jj in range(nb):
                val = 0.5 * float(beta_cov[jj] @ za)
                q[nq + i, nq + nb + jj] += val
                q[nq + nb + jj, nq + i] += val
        out[mi] = q
    return out


def momentum_JN(result: NormalSpaceResult, w: np.ndarray) -> np.ndarray:
    """The momentum map of the G_px action on N, evaluated by the closed form.

    ``w`` is given in N coordinates (q_mu part, B part, B* part); the value is
    a dual vector on the g_px basis:
    <J_N(w), zeta> = 1/2 <ad*_lam mu, [zeta, lam]> + <beta, zeta . a>.
    """
    pd = result.pd
    algebra = pd.system.algebra
    nq, nb, _ = result.block_dims
    w = np.asarray(w, dtype=float)
    lam = result.splitting.q_mu.basis.T @ w[:nq] if nq else np.zeros(algebra.dim)
    a = pd.B.basis.T @ w[nq: nq + nb] if nb else np.zeros(pd.system.chart_dim)
    beta = result.beta_covectors.T @ w[nq + nb:] if nb else np.zeros(pd.system.chart_dim)
    ad_lam = algebra.ad_star(lam, pd.mu)
    out = np.empty(pd.g_px.dim)
    for m, zeta in enumerate(pd.g_px.basis):
        val = 0.5 * float(ad_lam @ algebra.bracket(zeta, lam))
        if nb:
            val += float(beta @ (pd.h_action(zeta) @ a))
        out[m] = val
    return out


def n_action_matrix(result: NormalSpaceResult, zeta: np.ndarray,
                    rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Matrix of the linearized g_px action on N coordinates.

    The q_mu part sends lam to the unique q_mu representative of
    ad*_{[zeta, lam]} mu; the B part is the slice-metric projection of the
    tangent action; the B* part is the contragredient action.
    """
    pd = result.pd
    algebra = pd.system.algebra
    nq, nb, _ = result.block_dims
    dim_n = nq + 2 * nb
    q = result.splitting.q_mu
    out = np.zeros((dim_n, dim_n))
    l_z = pd.h_action(zeta)
    if nq:
        a_q = algebra.ad_star_matrix(pd.mu) @ q.basis.T
        for c, lam in enumerate(q.basis):
            rhs = algebra.ad_star(algebra.bracket(zeta, lam), pd.mu)
            out[:nq, c] = solve_exact(a_q, rhs, rank_tol)
    if nb:
        metric = pd.frame.metric_x
        gram = pd.B.basis @ metric @ pd.B.basis.T
        for i, a in enumerate(pd.B.basis):
            out[nq: nq + nb, nq + i] = np.linalg.solve(gram, pd.B.basis @ (metric @ (l_z @ a)))
        for jj in range(nb):
            for i, a in enumerate(pd.B.basis):
                out[nq + nb + i, nq + nb + jj] = -float(result.beta_covectors[jj] @ (l_z @ a))
    return out


def lifted_tangent_action(pd: PointData, zeta: np.ndarray) -> np.ndarray:
    """Linearized g_px action on the four-block coordinates of T_{p_x}(T*Q).

    Block diagonal over (r, S, r*, S*): adjoint action on r, tangent action
    on S, coadjoint action on r* (through the h-annihilator extension), and
    the contragredient action on S*.
    """
    frame = pd.frame
    algebra = pd.system.algebra
    dr, ds = frame.r_dim, frame.s_dim
    m = dr + ds
    zeta = np.asarray(zeta, dtype=float)
    l_z = pd.h_action(zeta)
    ad = algebra.ad_matrix(zeta)
    out = np.zeros((2 * m, 2 * m))
    # r block: adjoint action, r component
    for b, rho in enumerate(frame.r.basis):
        _, xr = frame.split_algebra(ad @ rho)
        out[:dr, b] = frame.r.basis @ xr
    # S block
    if ds:
        out[dr:m, dr:m] = frame.S.basis @ l_z @ frame.S.basis.T
    # r* block: phi |-> -ad*_zeta phi on the h-annihilator extension
    if dr:
        stack = np.vstack([frame.r.basis, frame.h.basis])
        for b in range(dr):
            rhs = np.zeros(algebra.dim)
            rhs[b] = 1.0
            phi = np.linalg.solve(stack, rhs)
            out[m: m + dr, m + b] = frame.r.basis @ (-(ad.T @ phi))
    # S* block: contragredient action
    for jj in range(ds):
        phi = frame.join_cotangent(np.zeros(dr), np.eye(ds)[jj])
        for i, w in enumerate(frame.S.basis):
            out[m + dr + i, m + dr + jj] = -float(phi @ (l_z @ w))
    return out
