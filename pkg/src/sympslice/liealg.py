"""Finite-dimensional Lie algebra arithmetic.

Brackets from structure constants, adjoint/coadjoint actions, coadjoint
stabilizers and orbit tangents, and the (-)-convention KKS form on a
coadjoint orbit.  Group elements only ever enter through exponential
coordinates: finite adjoint actions are matrix exponentials of ad matrices.

Dual vectors are coordinate vectors in the dual basis (pairing with e_i is
the i-th coordinate), so the canonical pairing is the dot product.  The
inner product on the dual is induced from the algebra inner product by
inverse-Gram transport.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .subspaces import (
    BilinearForm,
    DEFAULT_RANK_TOL,
    LinAlgContractError,
    Subspace,
    kernel_of,
    span_of,
)


@dataclass(frozen=True)
class LieAlgebra:
    """Lie algebra with structure constants c[i, j, k]: [e_i, e_j] = sum_k c[i,j,k] e_k."""

    dim: int
    structure_constants: np.ndarray = field(repr=False)
    inner_product: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        if c.shape != (self.dim,) * 3:
            raise LinAlgContractError(f"structure constants shape {c.shape}, dim {self.dim}")
        if np.abs(c + c.transpose(1, 0, 2)).max() > 1e-12 * max(1.0, np.abs(c).max()):
            raise LinAlgContractError("structure constants are not antisymmetric")
        g = np.asarray(self.inner_product, dtype=float)
        if g.shape != (self.dim, self.dim):
            raise LinAlgContractError("inner product has wrong shape")
        if np.abs(g - g.T).max() > 1e-12 * max(1.0, np.abs(g).max()):
            raise LinAlgContractError("inner product is not symmetric")
        if self.dim and np.linalg.eigvalsh(g).min() <= 0:
            raise LinAlgContractError("inner product is not positive definite")
        jac = self.jacobi_residual(c)
        if jac > 1e-10:
            raise LinAlgContractError(f"Jacobi identity residual {jac:.3e}")
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "inner_product", g)

    @staticmethod
    def jacobi_residual(c: np.ndarray) -> float:
        """Max residual of [[ei,ej],ek] + [[ej,ek],ei] + [[ek,ei],ej] over basis triples."""
        t1 = np.einsum("ijm,mkl->ijkl", c, c)
        total = t1 + t1.transpose(1, 2, 0, 3) + t1.transpose(2, 0, 1, 3)
        return float(np.abs(total).max()) if c.size else 0.0

    # basic operations -------------------------------------------------------

    def bracket(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.einsum("ijk,i,j->k", self.structure_constants, xi, eta)

    def ad_matrix(self, xi: np.ndarray) -> np.ndarray:
        """Matrix of ad_xi = [xi, .] acting on algebra coordinates."""
        return np.einsum("ijk,i->kj", self.structure_constants, np.asarray(xi, dtype=float))

    def ad_star(self, xi: np.ndarray, mu: np.ndarray) -> np.ndarray:
        """Coadjoint operator: <ad_star(xi, mu), eta> = <mu, [xi, eta]>."""
        return self.ad_matrix(xi).T @ np.asarray(mu, dtype=float)

    def ad_star_matrix(self, mu: np.ndarray) -> np.ndarray:
        """Matrix of xi |-> ad_star(xi, mu), columns indexed by basis elements."""
        cols = [self.ad_star(e, mu) for e in np.eye(self.dim)]
        return np.array(cols).T if self.dim else np.zeros((0, 0))

    def adjoint_exp(self, xi: np.ndarray) -> np.ndarray:
        """Ad_{Exp(xi)} as the matrix exponential of ad_xi."""
        return scipy.linalg.expm(self.ad_matrix(xi))

    def coadjoint_exp(self, xi: np.ndarray) -> np.ndarray:
        """Matrix of mu |-> Ad*_{Exp(-xi)} mu, the coadjoint action of Exp(xi)."""
        return scipy.linalg.expm(-self.ad_matrix(xi)).T

    def dual_inner_product(self) -> np.ndarray:
        """Gram matrix of the induced inner product on the dual basis."""
        return np.linalg.inv(self.inner_product)

    def ip_form(self) -> BilinearForm:
        return BilinearForm(Subspace.full(self.dim), self.inner_product)

    def dual_ip_form(self) -> BilinearForm:
        return BilinearForm(Subspace.full(self.dim), self.dual_inner_product())

    # orbit machinery ---------------------------------------------------------

    def coadjoint_stabilizer(self, mu: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
        """Kernel of xi |-> ad_star(xi, mu)."""
        return kernel_of(self.ad_star_matrix(mu), rank_tol)

    def orbit_tangent(self, mu: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
        """Tangent space to the coadjoint orbit at mu, as a subspace of the dual."""
        m = self.ad_star_matrix(mu)
        return span_of(m.T, ambient_dim=self.dim, rank_tol=rank_tol)

    def orbit_representative(
        self, tangent: np.ndarray, mu: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL
    ) -> np.ndarray:
        """One lift lam with ad_star(lam, mu) = tangent (minimum-norm choice)."""
        m = self.ad_star_matrix(mu)
        lam, _, _, _ = np.linalg.lstsq(m, np.asarray(tangent, dtype=float), rcond=None)
        residual = np.linalg.norm(m @ lam - tangent)
        if residual > 1e3 * rank_tol * max(1.0, np.linalg.norm(tangent)):
            raise LinAlgContractError(
                f"orbit-tangent lift failed (residual {residual:.3e}); "
                "the vector is not tangent to the coadjoint orbit"
            )
        return lam

    def kks_form(self, mu: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> BilinearForm:
        """KKS symplectic form on the orbit tangent (minus convention).

        Assembled on the orbit_tangent basis by lifting each basis vector to a
        representative; well defined because any two lifts differ by a
        stabilizer element, which pairs to zero.
        """
        t = self.orbit_tangent(mu, rank_tol)
        lifts = [self.orbit_representative(v, mu, rank_tol) for v in t.basis]
        k = t.dim
        m = np.zeros((k, k))
        for a in range(k):
            for b in range(a + 1, k):
                m[a, b] = -float(np.asarray(mu) @ self.bracket(lifts[a], lifts[b]))
                m[b, a] = -m[a, b]
        return BilinearForm(t, m, kind="skew")


@dataclass(frozen=True)
class OrbitMomentum:
    """Momentum of the restricted action of a subgroup on a coadjoint orbit.

    ``values`` are coordinates on the subalgebra basis; ``subalgebra_residual``
    reports how far the supplied subspace is from being bracket-closed (a
    warning, not an error).
    """

    values: np.ndarray
    subalgebra_residual: float

    @property
    def closed(self) -> bool:
        return self.subalgebra_residual <= 1e-10


def subalgebra_residual(algebra: LieAlgebra, h: Subspace) -> float:
    """Max norm of the component of [h_i, h_j] outside h, over basis pairs."""
    worst = 0.0
    proj = h.projector()
    for a in h.basis:
        for b in h.basis:
            br = algebra.bracket(a, b)
            worst = max(worst, float(np.linalg.norm(br - proj @ br)))
    return worst


def orbit_momentum_JO(algebra: LieAlgebra, nu: np.ndarray, h: Subspace) -> OrbitMomentum:
    """Momentum map value of the restricted coadjoint action: minus the restriction of nu to h."""
    residual = subalgebra_residual(algebra, h)
    values = -(h.basis @ np.asarray(nu, dtype=float)) if h.dim else np.zeros(0)
    return OrbitMomentum(values, residual)


# bundled algebra constructors ------------------------------------------------

def so3(label: str = "so3") -> LieAlgebra:
    """so(3) with [e_i, e_j] = e_i x e_j and the standard inner product."""
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return LieAlgebra(3, c, np.eye(3), label=label)


def abelian(dim: int, label: str = "abelian") -> LieAlgebra:
    return LieAlgebra(dim, np.zeros((dim, dim, dim)), np.eye(dim), label=label)
