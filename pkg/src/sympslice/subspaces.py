"""Deterministic subspace and bilinear-form arithmetic.

Everything downstream (Lie algebra splittings, slice bases, the Witt-Artin
decomposition) reduces to the handful of operations in this module: spans,
kernels, orthogonal and symplectic complements, intersections and a
compatible complex structure.  All rank decisions flow through
:func:`numerical_rank` so the tolerance is configurable in exactly one place.

Conventions
-----------
* Vectors are 1-d ``float64`` arrays; a :class:`Subspace` stores its basis as
  rows of a ``(dim, ambient_dim)`` array, orthonormal in the Euclidean sense.
* Dual vectors live in the same coordinate space; the canonical pairing is
  the dot product.  Metric identifications are always explicit.
* Orthonormalization uses a norm-pivoted Gram-Schmidt QR (largest
  remaining norm, lowest index on ties), so bases are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_RANK_TOL = 1e-9


class LinAlgContractError(ValueError):
    """Base class for contract violations in subspace arithmetic."""


class DimensionMismatchError(LinAlgContractError):
    pass


class ContainmentError(LinAlgContractError):
    pass


class DegeneracyError(LinAlgContractError):
    pass


class AmbiguousSolveError(LinAlgContractError):
    pass


class InconsistentSystemError(LinAlgContractError):
    pass


def numerical_rank(singular_values: np.ndarray, rank_tol: float, scale: float = 0.0) -> int:
    """Number of singular values above ``rank_tol`` times the largest one.

    The single rank decision used everywhere in the package.  ``scale`` sets
    a floor for the reference size: matrices that are zero up to noise would
    otherwise report spurious rank from a purely relative cutoff.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        return 0
    cutoff = rank_tol * max(s.max(), scale)
    return int(np.sum(s > cutoff))


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^n given by an orthonormal row basis.

    ``basis`` has shape ``(dim, ambient_dim)``; ``dim == 0`` encodes the zero
    subspace.  Instances are immutable and safe to share across threads.
    """

    ambient_dim: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.size == 0:
            b = b.reshape(0, self.ambient_dim)
        if b.shape[1] != self.ambient_dim:
            raise DimensionMismatchError(
                f"basis vectors of length {b.shape[1]} in ambient dim {self.ambient_dim}"
            )
        gram = b @ b.T
        if b.shape[0] and not np.allclose(gram, np.eye(b.shape[0]), atol=1e-12):
            raise LinAlgContractError("basis is not orthonormal to 1e-12")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((0, ambient_dim)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    def projector(self) -> np.ndarray:
        """Euclidean orthogonal projector onto the subspace, shape (n, n)."""
        return self.basis.T @ self.basis

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.basis.T @ (self.basis @ np.asarray(v, dtype=float))

    def coords(self, v: np.ndarray, *, tol: float = 1e-8) -> np.ndarray:
        """Coordinates of ``v`` in the basis; ``v`` must lie in the subspace."""
        v = np.asarray(v, dtype=float)
        c = self.basis @ v
        residual = np.linalg.norm(v - self.basis.T @ c)
        scale = max(1.0, np.linalg.norm(v))
        if residual > tol * scale:
            raise ContainmentError(f"vector not in subspace (residual {residual:.3e})")
        return c

    def from_coords(self, c: np.ndarray) -> np.ndarray:
        return self.basis.T @ np.asarray(c, dtype=float)

    def contains(self, other: "Subspace", tol: float = 1e-8) -> bool:
        if other.ambient_dim != self.ambient_dim:
            return False
        if other.dim == 0:
            return True
        resid = other.basis - other.basis @ self.projector().T
        return float(np.abs(resid).max()) <= tol

    def containment_residual(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v - self.project(v)))


@dataclass(frozen=True)
class BilinearForm:
    """A symmetric or skew bilinear form given by its matrix in ``space``'s basis."""

    space: Subspace
    matrix: np.ndarray = field(repr=False)
    kind: str = "symmetric"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        k = self.space.dim
        if m.shape != (k, k):
            raise DimensionMismatchError(f"form matrix {m.shape} on a {k}-dim space")
        if self.kind == "symmetric":
            if k and not np.allclose(m, m.T, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise LinAlgContractError("matrix not symmetric to 1e-12")
            m = 0.5 * (m + m.T)
        elif self.kind == "skew":
            if k and not np.allclose(m, -m.T, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise LinAlgContractError("matrix not skew to 1e-12")
            m = 0.5 * (m - m.T)
        else:
            raise ValueError(f"unknown form kind {self.kind!r}")
        object.__setattr__(self, "matrix", m)

    def __call__(self, u: np.ndarray, v: np.ndarray) -> float:
        """Evaluate on ambient vectors lying in ``space``."""
        cu = self.space.coords(u)
        cv = self.space.coords(v)
        return float(cu @ self.matrix @ cv)

    def restricted_to(self, sub: Subspace) -> "BilinearForm":
        """The same form as a matrix on a subspace of ``space``."""
        if not self.space.contains(sub):
            raise ContainmentError("restriction target is not contained in the form's space")
        c = sub.basis @ self.space.basis.T  # rows: sub basis in space coords
        return BilinearForm(sub, c @ self.matrix @ c.T, self.kind)


@dataclass(frozen=True)
class LinearMapRep:
    """A linear map between subspaces, as a matrix on basis coordinates.

    ``matrix`` has shape ``(codomain.dim, domain.dim)`` and sends domain
    coordinates to codomain coordinates.
    """

    domain: Subspace
    codomain: Subspace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.size == 0:
            m = m.reshape(self.codomain.dim, self.domain.dim)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionMismatchError(
                f"map matrix {m.shape}, expected ({self.codomain.dim}, {self.domain.dim})"
            )
        object.__setattr__(self, "matrix", m)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Apply to an ambient vector of the domain; returns an ambient vector."""
        return self.codomain.from_coords(self.matrix @ self.domain.coords(v))


def _orthonormalize(vectors: np.ndarray, rank_tol: float, scale: float = 0.0) -> np.ndarray:
    """Orthonormal row basis of the row span, by pivoted Gram-Schmidt QR.

    Rank is decided on singular values (the shared rule).  Pivoting picks the
    largest remaining norm with the lowest index winning ties, so results are
    reproducible and the routine is idempotent on an already-orthonormal
    input.  Each chosen vector is re-orthogonalized once for stability.
    """
    a = np.array(vectors, dtype=float)
    if a.shape[0] == 0:
        return np.zeros((0, a.shape[1]))
    s = np.linalg.svd(a, compute_uv=False)
    r = numerical_rank(s, rank_tol, scale)
    if r == 0:
        return np.zeros((0, a.shape[1]))
    work = a.copy()
    remaining = list(range(a.shape[0]))
    out: list[np.ndarray] = []
    for _ in range(r):
        norms = np.array([np.linalg.norm(work[i]) for i in remaining])
        # norms within 1e-12 (relative) of the maximum count as tied; the
        # lowest original index wins, which makes the routine idempotent
        cutoff = norms.max() * (1.0 - 1e-12)
        pick = remaining[int(np.argmax(norms >= cutoff))]
        v = work[pick]
        for u in out:
            v = v - (u @ v) * u
        v = v / np.linalg.norm(v)
        out.append(v)
        remaining.remove(pick)
        for i in remaining:
            work[i] = work[i] - (v @ work[i]) * v
    return np.array(out)


def span_of(
    vectors,
    *,
    ambient_dim: int | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    scale: float = 0.0,
) -> Subspace:
    """Subspace spanned by a list of coordinate vectors.

    An empty list is the zero subspace (``ambient_dim`` is then required);
    inconsistent vector lengths raise :class:`DimensionMismatchError`.
    ``scale`` floors the rank decision for inputs that may be all noise.
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        if ambient_dim is None:
            raise DimensionMismatchError("empty span needs an explicit ambient_dim")
        return Subspace.zero(ambient_dim)
    n = vecs[0].shape[0] if vecs[0].ndim == 1 else -1
    for v in vecs:
        if v.ndim != 1 or v.shape[0] != n:
            raise DimensionMismatchError("span_of input vectors have inconsistent lengths")
    if ambient_dim is not None and ambient_dim != n:
        raise DimensionMismatchError(f"vectors of length {n} with ambient_dim={ambient_dim}")
    return Subspace(n, _orthonormalize(np.array(vecs), rank_tol, scale))


def kernel_of(matrix: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL,
              scale: float = 0.0) -> Subspace:
    """Orthonormal basis of the null space of ``matrix`` (acting on columns).

    ``scale`` floors the rank decision: entries below rank_tol * scale count
    as zero even when they are the largest thing in the matrix.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    n = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return Subspace.full(n)
    _, s, vh = np.linalg.svd(a)
    r = numerical_rank(s, rank_tol, scale)
    return Subspace(n, vh[r:])


def solve_exact(
    matrix: np.ndarray,
    rhs: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` requiring consistency and a unique solution.

    Raises :class:`AmbiguousSolveError` when the matrix has a nontrivial null
    space (rank deficiency on the domain) and
    :class:`InconsistentSystemError` when no solution exists to tolerance.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    b = np.asarray(rhs, dtype=float)
    if a.shape[1] == 0:
        if np.linalg.norm(b) > rank_tol * max(1.0, np.linalg.norm(b)):
            raise InconsistentSystemError("nonzero rhs with an empty domain")
        return np.zeros(0)
    s = np.linalg.svd(a, compute_uv=False)
    if numerical_rank(s, rank_tol) < a.shape[1]:
        raise AmbiguousSolveError("system is rank deficient on its domain")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    residual = np.linalg.norm(a @ x - b)
    scale = max(1.0, np.linalg.norm(b))
    if residual > 1e3 * rank_tol * scale:
        raise InconsistentSystemError(f"inconsistent system (residual {residual:.3e})")
    return x


def ortho_complement(
    u: Subspace,
    ip: BilinearForm,
    within: Subspace,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> Subspace:
    """The ip-orthogonal complement of ``u`` inside ``within``.

    ``ip`` must be symmetric positive definite on ``within`` (it may be given
    on any space containing ``within``; it is restricted internally).
    """
    if not within.contains(u):
        raise ContainmentError("ortho_complement: u is not contained in within")
    g = ip.restricted_to(within).matrix if ip.space is not within else ip.matrix
    if u.dim == 0:
        return within
    uc = u.basis @ within.basis.T  # u basis in within coordinates
    ker = kernel_of(uc @ g, rank_tol)  # within-coords with ip(u, .) = 0
    vecs = ker.basis @ within.basis
    return span_of(vecs, ambient_dim=within.ambient_dim, rank_tol=rank_tol)


def intersect(u: Subspace, w: Subspace, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Intersection of two subspaces via the stacked projector-difference kernel."""
    if u.ambient_dim != w.ambient_dim:
        raise DimensionMismatchError("intersect: ambient dimensions differ")
    n = u.ambient_dim
    stacked = np.vstack([u.projector() - np.eye(n), w.projector() - np.eye(n)])
    return kernel_of(stacked, rank_tol)


def symplectic_orthogonal(
    u: Subspace,
    omega: BilinearForm,
    within: Subspace,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> Subspace:
    """All vectors of ``within`` that omega-pair to zero with every vector of ``u``."""
    if not within.contains(u):
        raise ContainmentError("symplectic_orthogonal: u is not contained in within")
    om = omega.restricted_to(within).matrix if omega.space is not within else omega.matrix
    if u.dim == 0:
        return within
    uc = u.basis @ within.basis.T
    ker = kernel_of(uc @ om.T, rank_tol)  # omega(v, u_i) = u_i^T om^T v
    vecs = ker.basis @ within.basis
    return span_of(vecs, ambient_dim=within.ambient_dim, rank_tol=rank_tol)


def compatible_complex_structure(
    omega: BilinearForm,
    ip: BilinearForm,
    z: Subspace,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> LinearMapRep:
    """Complex structure J on ``z`` compatible with a nondegenerate skew form.

    J is the orthogonal polar factor of the map A defined by
    ``omega(u, v) = ip(A u, v)``.  It satisfies J。J = -id, preserves ``ip``
    and ``omega``, maps omega-Lagrangian subspaces to complementary
    Lagrangians, and commutes with every linear map preserving both forms.
    The square root inside the polar decomposition is taken by symmetric
    eigendecomposition; eigenvalues below ``rank_tol**2`` (relative) signal a
    degenerate ``omega`` and raise :class:`DegeneracyError`.
    """
    k = z.dim
    if k == 0:
        return LinearMapRep(z, z, np.zeros((0, 0)))
    om = omega.restricted_to(z).matrix if omega.space is not z else omega.matrix
    g = ip.restricted_to(z).matrix if ip.space is not z else ip.matrix
    # Work in an ip-orthonormal frame: y = L^T x with g = L L^T.
    lchol = np.linalg.cholesky(g)
    om_t = np.linalg.solve(lchol, np.linalg.solve(lchol, om.T).T)  # L^-1 om L^-T
    a = om_t.T  # frame where ip is the identity: omega(u,v) = (A u) . v
    m = a.T @ a
    eigval, eigvec = np.linalg.eigh(0.5 * (m + m.T))
    if eigval.min() <= rank_tol**2 * max(eigval.max(), 1e-300):
        raise DegeneracyError("omega is numerically degenerate on z")
    sqrt_inv = eigvec @ np.diag(1.0 / np.sqrt(eigval)) @ eigvec.T
    j_frame = a @ sqrt_inv
    j = np.linalg.solve(lchol.T, j_frame @ lchol.T)  # back to z coordinates
    return LinearMapRep(z, z, j)
