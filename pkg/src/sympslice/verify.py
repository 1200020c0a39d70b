"""Aggregated invariant suite for a point of a system.

:func:`point_suite` runs every contract the package promises at one
(x, p_x): frame contracts, metric and bracket laws, locked-inertia
identities, the closed-form infinitesimal lifted action against its
finite-difference oracle, KKS well-definedness, the Witt-Artin splitting properties, and the
normal-space block form, complementarity, dimension law, special cases and
momentum-map cross-checks.  All random draws are seeded, so reports are
deterministic for identical inputs.
"""

from __future__ import annotations

import numpy as np

from . import fdchecks
from .fdchecks import (
    chart_canonical_form_check,
    covariant_cross_check,
    di_equivariance_check,
    fd_lifted_generator,
    generator_bracket_check,
    locked_inertia_identity_check,
    metric_invariance_check,
)
from .geometry import MechanicalGSystem, c_operator, fd_derivative
from .liealg import LieAlgebra
from .normalspace import (
    NormalSpaceResult,
    PointData,
    build_normal_space,
    four_block_omega,
    g_mu_orbit_directions,
    g_orbit_directions,
    lifted_generator_closed_form,
    lifted_tangent_action,
    momentum_JN,
    analyze_point,
    point_splitting,
)
from .residuals import ResidualReport
from .subspaces import DEFAULT_RANK_TOL, BilinearForm, Subspace, span_of, symplectic_orthogonal
from .wittartin import verify_splitting

VACUOUS = "vacuous"


def point_suite(
    system: MechanicalGSystem,
    x: np.ndarray,
    p_x: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
    seed: int = 20240817,
    curve_pairs: int = 5,
    momentum_samples: int = 40,
    random_draws: int = 3,
) -> list[ResidualReport]:
    """All invariant checks at one point, as a list of residual reports."""
    x = np.asarray(x, dtype=float)
    p_x = np.asarray(p_x, dtype=float)
    rng = np.random.default_rng(seed)
    pd = analyze_point(system, x, p_x, rank_tol)
    splitting = point_splitting(pd, rank_tol)
    result = build_normal_space(pd, splitting, rank_tol)

    out: list[ResidualReport] = []
    out.extend(_frame_checks(pd))
    out.extend(_evaluator_checks(system, x, rng, random_draws))
    out.extend(_lifted_action_check(system, pd, p_x))
    out.extend(_canonical_checks(system, x, p_x, rng, curve_pairs))
    out.extend(_covariant_checks(system, pd, rng, random_draws))
    out.extend(_equivariance_checks(system, pd, rng))
    out.extend(_kks_checks(system.algebra, pd.mu, rng))
    out.extend(verify_splitting(splitting, system.algebra, pd.mu, pd.g_px))
    out.extend(_normal_space_checks(pd, splitting, result, rng, momentum_samples))
    return out


def suite_passed(reports: list[ResidualReport]) -> bool:
    return all(r.passed for r in reports)


# individual check groups -------------------------------------------------------


def _frame_checks(pd: PointData) -> list[ResidualReport]:
    frame = pd.frame
    worst = 0.0
    for sub in (frame.h, frame.r, frame.S, pd.B, pd.g_px):
        if sub.dim:
            gram = sub.basis @ sub.basis.T
            worst = max(worst, float(np.abs(gram - np.eye(sub.dim)).max()))
    checks = [ResidualReport("frame.bases_orthonormal", worst, 1e-12, "all stored bases")]

    from .subspaces import kernel_of

    ker = kernel_of(pd.frame.I_full.matrix, frame.rank_tol)
    res = float(np.abs(ker.projector() - frame.h.projector()).max()) \
        if (ker.dim or frame.h.dim) else 0.0
    checks.append(ResidualReport("frame.inertia_kernel_is_isotropy", res, 1e-8,
                                 "kernel of I(x) equals the isotropy algebra"))

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(3):
        u = rng.standard_normal(pd.system.chart_dim)
        xi, a = frame.split_tangent(u)
        worst = max(worst, float(np.linalg.norm(frame.join_tangent(xi, a) - u)))
        gamma = rng.standard_normal(pd.system.chart_dim)
        nu, beta = frame.split_cotangent(gamma)
        worst = max(worst, float(np.linalg.norm(frame.join_cotangent(nu, beta) - gamma)))
        nu2, beta2 = frame.legendre(xi, a)
        xi2, a2 = frame.legendre_inverse(nu2, beta2)
        worst = max(worst, float(np.linalg.norm(xi2 - xi) + np.linalg.norm(a2 - a)))
    checks.append(ResidualReport("frame.split_round_trips", worst, 1e-10,
                                 "tangent/cotangent/Legendre round trips"))
    return checks


def _evaluator_checks(system, x, rng, draws) -> list[ResidualReport]:
    worst_metric = worst_bracket = worst_equiv = worst_deriv = 0.0
    d = system.algebra.dim
    n = system.chart_dim
    for _ in range(draws):
        xi = rng.standard_normal(d)
        u0, w0 = rng.standard_normal((2, n))
        worst_metric = max(worst_metric,
                           metric_invariance_check(system, x, xi, u0, w0).residual)
        eta = rng.standard_normal(d)
        worst_bracket = max(worst_bracket,
                            generator_bracket_check(system, x, xi, eta).residual)
        lam = rng.standard_normal(d)
        zeta = 0.4 * rng.standard_normal(d)
        r1, r2 = locked_inertia_identity_check(system, x, xi, eta, lam, zeta)
        worst_equiv = max(worst_equiv, r1.residual)
        worst_deriv = max(worst_deriv, r2.residual)
    return [
        ResidualReport("metric.invariance", worst_metric, 1e-6, f"{draws} random directions"),
        ResidualReport("generator.bracket_law", worst_bracket, 1e-5, f"{draws} random pairs"),
        ResidualReport("inertia.equivariance", worst_equiv, 1e-6, f"{draws} random draws"),
        ResidualReport("inertia.derivative_identity", worst_deriv, 1e-6, f"{draws} random draws"),
    ]


def _lifted_action_check(system, pd, p_x) -> list[ResidualReport]:
    worst = 0.0
    for e in np.eye(system.algebra.dim):
        closed = lifted_generator_closed_form(pd, e)
        fd = fd_lifted_generator(system, pd.frame, e, p_x)
        scale = max(1.0, float(np.abs(fd).max()))
        worst = max(worst, float(np.abs(closed - fd).max()) / scale)
    return [ResidualReport("lifted_action.closed_vs_fd", worst, 1e-5,
                           "closed form vs finite-difference oracle, all basis elements")]


def _canonical_checks(system, x, p_x, rng, pairs) -> list[ResidualReport]:
    worst = 0.0
    n = system.chart_dim
    scale = 0.2 * max(1.0, float(np.linalg.norm(x)))
    def make(ca):
        return lambda t: (x + t * ca[0] + t * t * ca[1] + t ** 3 * ca[2],
                          p_x + t * ca[3] + t * t * ca[4] + t ** 3 * ca[5])

    for _ in range(pairs):
        c1 = make(rng.standard_normal((6, n)) * scale)
        c2 = make(rng.standard_normal((6, n)) * scale)
        worst = max(worst, chart_canonical_form_check(system, x, p_x, c1, c2).residual)
    return [ResidualReport("canonical_form.representation", worst, 1e-6,
                           f"{pairs} random curve pairs")]


def _covariant_checks(system, pd, rng, draws) -> list[ResidualReport]:
    frame = pd.frame
    if frame.s_dim == 0 or frame.r_dim == 0:
        return [ResidualReport("covariant.cross_check", 0.0, 1e-5, VACUOUS)]
    worst = 0.0
    for _ in range(draws):
        s_vec = frame.S.basis.T @ rng.standard_normal(frame.s_dim)
        xi = rng.standard_normal(system.algebra.dim)
        lam = rng.standard_normal(system.algebra.dim)
        worst = max(worst, covariant_cross_check(system, frame, s_vec, xi, lam).residual)
    return [ResidualReport("covariant.cross_check", worst, 1e-5, f"{draws} random draws")]


def _equivariance_checks(system, pd, rng) -> list[ResidualReport]:
    frame = pd.frame
    out = []
    if frame.h.dim and frame.s_dim:
        worst = 0.0
        for zeta in frame.h.basis:
            v = frame.S.basis.T @ rng.standard_normal(frame.s_dim)
            xi = rng.standard_normal(system.algebra.dim)
            worst = max(worst, di_equivariance_check(system, frame.x, v, xi, zeta).residual)
        out.append(ResidualReport("inertia.di_equivariance", worst, 1e-5, "zeta over h basis"))
    else:
        out.append(ResidualReport("inertia.di_equivariance", 0.0, 1e-5, VACUOUS))

    if pd.g_px.dim and frame.s_dim and frame.r_dim:
        worst = 0.0
        for zeta in pd.g_px.basis:
            v = frame.S.basis.T @ rng.standard_normal(frame.s_dim)
            w = frame.S.basis.T @ rng.standard_normal(frame.s_dim)
            eta = frame.r.basis.T @ rng.standard_normal(frame.r_dim)
            worst = max(worst, c_equivariance_residual(system, pd, v, eta, w, zeta))
        out.append(ResidualReport("c_operator.equivariance", worst, 1e-5, "zeta over g_px basis"))
    else:
        out.append(ResidualReport("c_operator.equivariance", 0.0, 1e-5, VACUOUS))
    return out


def c_equivariance_residual(system, pd, v, eta, w, zeta) -> float:
    """Residual of d/dt < C(h_t.v)(Ad_{h_t} eta), h_t.w > = 0 along h_t = Exp(t zeta)."""
    frame = pd.frame
    algebra = system.algebra
    x = frame.x

    def value(t):
        jac = fdchecks._action_jacobian(system, t * zeta, x)
        v_t = jac @ v
        w_t = jac @ w
        eta_t = algebra.adjoint_exp(t * zeta) @ eta
        cmat = c_operator(system, frame, v_t)
        eta_r = frame.r.basis @ frame.split_algebra(eta_t)[1]
        return np.array([float(eta_r @ cmat @ (frame.S.basis @ w_t))])

    h = system.fd.mixed_step_at(x)
    deriv = float(fd_derivative(value, h)[0])
    return abs(deriv) / max(1.0, abs(float(value(0.0)[0])))


def _kks_checks(algebra: LieAlgebra, mu, rng) -> list[ResidualReport]:
    t = algebra.orbit_tangent(mu)
    if t.dim == 0:
        return [ResidualReport("kks.skewness", 0.0, 1e-10, VACUOUS),
                ResidualReport("kks.well_defined", 0.0, 1e-10, VACUOUS)]
    lifts = [algebra.orbit_representative(v, mu) for v in t.basis]

    def assemble(ls):
        k = len(ls)
        m = np.empty((k, k))
        for a in range(k):
            for b in range(k):
                m[a, b] = -float(np.asarray(mu) @ algebra.bracket(ls[a], ls[b]))
        return m

    raw = assemble(lifts)
    skew = float(np.abs(raw + raw.T).max())

    stab = algebra.coadjoint_stabilizer(mu)
    worst = 0.0
    for _ in range(3):
        perturbed = [l + stab.basis.T @ rng.standard_normal(stab.dim) if stab.dim else l
                     for l in lifts]
        worst = max(worst, float(np.abs(assemble(perturbed) - raw).max()))
    scale = max(1.0, float(np.abs(raw).max()))
    return [ResidualReport("kks.skewness", skew / scale, 1e-10, "raw assembly"),
            ResidualReport("kks.well_defined", worst / scale, 1e-10,
                           "lifts perturbed within the stabilizer")]


def _normal_space_checks(pd, splitting, result, rng, momentum_samples) -> list[ResidualReport]:
    out = [ResidualReport("normal.block_form", result.block_residual, 1e-8,
                          "assembled omega vs KKS (+) canonical block form")]

    m = pd.block_dim
    omega4 = four_block_omega(m)
    d = pd.system.algebra.dim
    worst = 0.0
    images = [lifted_generator_closed_form(pd, e) for e in np.eye(d)]
    for v in result.V_basis:
        for img in images:
            val = abs(float(v @ omega4 @ img))
            worst = max(worst, val / (max(1.0, float(np.linalg.norm(v)))
                                      * max(1.0, float(np.linalg.norm(img)))))
    out.append(ResidualReport("normal.v_omega_orthogonal_to_orbit", worst, 1e-8,
                              "V pairs to zero with every lifted generator"))

    gmu_dirs = g_mu_orbit_directions(pd, splitting)
    orbit = g_orbit_directions(pd)
    omega_form = BilinearForm(Subspace.full(2 * m), omega4, kind="skew")
    orbit_sympl_orth = symplectic_orthogonal(orbit, omega_form, Subspace.full(2 * m))
    v_space = span_of(result.V_basis, ambient_dim=2 * m) if result.dim_V \
        else Subspace.zero(2 * m)
    joint = span_of(np.vstack([v_space.basis, gmu_dirs.basis]), ambient_dim=2 * m) \
        if (v_space.dim + gmu_dirs.dim) else Subspace.zero(2 * m)
    complement_ok = (
        joint.dim == v_space.dim + gmu_dirs.dim
        and joint.dim == orbit_sympl_orth.dim
    )
    out.append(ResidualReport(
        "normal.complementarity", 0.0 if complement_ok else 1.0, 0.5,
        f"dim V = {v_space.dim}, dim g_mu.p_x = {gmu_dirs.dim}, "
        f"dim (g.p_x)^omega = {orbit_sympl_orth.dim}"))

    lhs, rhs = result.dimension_law_sides()
    out.append(ResidualReport("normal.dimension_law", float(abs(lhs - rhs)), 0.5,
                              f"dim V = {lhs}, rank formula = {rhs}"))

    special = result.case_flags - {"Generic"}
    if special:
        jnorm = float(np.abs(result.j_matrix.matrix).max()) if result.j_matrix.matrix.size else 0.0
        out.append(ResidualReport("normal.special_cases_j_zero", jnorm, 1e-9,
                                  f"flags {sorted(special)} force j = 0"))
        b_res = float(np.abs(pd.B.projector() - pd.h_alpha_ann.projector()).max()) \
            if (pd.B.dim or pd.h_alpha_ann.dim) else 0.0
        out.append(ResidualReport("normal.special_cases_B_collapse", b_res, 1e-8,
                                  "B equals the annihilator of h.alpha"))
    else:
        out.append(ResidualReport("normal.special_cases_j_zero", 0.0, 1e-9, VACUOUS))
        out.append(ResidualReport("normal.special_cases_B_collapse", 0.0, 1e-8, VACUOUS))

    if pd.g_px.dim and result.dim_V:
        worst = 0.0
        proj = v_space.projector()
        for zeta in pd.g_px.basis:
            act = lifted_tangent_action(pd, zeta)
            for v in result.V_basis:
                img = act @ v
                worst = max(worst, float(np.linalg.norm(img - proj @ img))
                            / max(1.0, float(np.linalg.norm(img))))
        out.append(ResidualReport("normal.gpx_invariance_of_V", worst, 1e-6,
                                  "linearized g_px action maps V into V"))
    else:
        out.append(ResidualReport("normal.gpx_invariance_of_V", 0.0, 1e-6, VACUOUS))

    out.extend(_momentum_checks(result, rng, momentum_samples))
    return out


def _momentum_checks(result: NormalSpaceResult, rng, samples) -> list[ResidualReport]:
    pd = result.pd
    if pd.g_px.dim == 0 or result.dim_V == 0:
        return [ResidualReport("momentum.closed_vs_half_omega", 0.0, 1e-10, VACUOUS),
                ResidualReport("momentum.tensor_consistency", 0.0, 1e-10, VACUOUS)]
    from .normalspace import n_action_matrix

    worst_half = worst_tensor = 0.0
    actions = [n_action_matrix(result, zeta) for zeta in pd.g_px.basis]
    for _ in range(samples):
        w = rng.standard_normal(result.dim_V)
        w /= max(1.0, float(np.linalg.norm(w)))
        closed = momentum_JN(result, w)
        for mi in range(pd.g_px.dim):
            half = 0.5 * float((actions[mi] @ w) @ result.omega_block @ w)
            worst_half = max(worst_half, abs(closed[mi] - half))
            tensor = float(w @ result.JN_tensor[mi] @ w)
            worst_tensor = max(worst_tensor, abs(closed[mi] - tensor))
    return [
        ResidualReport("momentum.closed_vs_half_omega", worst_half, 1e-10,
                       f"{samples} random w"),
        ResidualReport("momentum.tensor_consistency", worst_tensor, 1e-10,
                       f"{samples} random w"),
    ]
