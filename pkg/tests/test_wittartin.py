import numpy as np
import pytest

from sympslice.liealg import abelian, so3
from sympslice.subspaces import Subspace, span_of
from sympslice.wittartin import SplittingError, verify_splitting, witt_artin_split

SO3 = so3()


def subspace_is(sub, vectors, tol=1e-9):
    target = span_of(vectors)
    return sub.dim == target.dim and np.abs(sub.projector() - target.projector()).max() < tol


def test_so3_reference_split():
    # hand-run of the construction: mu = e1*, h = span{e3}
    mu = np.array([1.0, 0.0, 0.0])
    h = span_of([(0.0, 0.0, 1.0)])
    sp = witt_artin_split(SO3, mu, h, Subspace.zero(3))
    assert sp.g_mu.dim == 1 and subspace_is(sp.g_mu, [(1.0, 0.0, 0.0)])
    assert sp.h_mu.dim == 0
    assert subspace_is(sp.p, [(1.0, 0.0, 0.0)])
    assert sp.q_mu.dim == 0
    assert subspace_is(sp.k, [(0.0, 1.0, 0.0)])
    # orbit side: h . mu is ad*_{e3} mu = (0, -1, 0); W is its rotation in the orbit plane
    assert subspace_is(sp.h_mu_orbit, [(0.0, -1.0, 0.0)])
    assert subspace_is(sp.W, [(0.0, 0.0, 1.0)])
    assert sp.V_mu.dim == 0
    assert sp.orbit_tangent.dim == 2


def test_so3_reference_split_verification():
    mu = np.array([1.0, 0.0, 0.0])
    h = span_of([(0.0, 0.0, 1.0)])
    sp = witt_artin_split(SO3, mu, h, Subspace.zero(3))
    reports = verify_splitting(sp, SO3, mu, Subspace.zero(3))
    assert len(reports) >= 7
    for r in reports:
        assert r.passed, str(r)


def test_zero_momentum_degenerate_orbit():
    h = span_of([(0.0, 0.0, 1.0)])
    sp = witt_artin_split(SO3, np.zeros(3), h, Subspace.zero(3))
    assert sp.g_mu.dim == 3
    assert sp.orbit_tangent.dim == 0
    assert sp.q_mu.dim == 0 and sp.k.dim == 0
    # p is a complement of h_mu = h inside g_mu = g
    assert sp.p.dim == 2
    assert np.abs(sp.p.basis @ np.array([0.0, 0.0, 1.0])).max() < 1e-12


def test_abelian_split_is_vacuous():
    torus = abelian(2)
    h = span_of([(0.0, 1.0)])
    sp = witt_artin_split(torus, np.array([0.7, -0.2]), h, Subspace.zero(2))
    assert sp.g_mu.dim == 2
    assert sp.h_mu.dim == 1 and sp.p.dim == 1
    assert sp.orbit_tangent.dim == 0
    reports = verify_splitting(sp, torus, np.array([0.7, -0.2]), Subspace.zero(2))
    for r in reports:
        assert r.passed, str(r)


def test_gpx_outside_stabilizer_rejected():
    mu = np.array([1.0, 0.0, 0.0])
    h = span_of([(0.0, 0.0, 1.0)])
    with pytest.raises(SplittingError):
        witt_artin_split(SO3, mu, h, gpx=h)  # e3 does not stabilize e1*


def test_generic_momentum_with_isotropy_dimension_count():
    # random momenta; h = span{e3}: dims must satisfy the orbit-splitting law
    rng = np.random.default_rng(17)
    h = span_of([(0.0, 0.0, 1.0)])
    for _ in range(10):
        mu = rng.standard_normal(3)
        sp = witt_artin_split(SO3, mu, h, Subspace.zero(3))
        t = sp.orbit_tangent
        assert t.dim == sp.h_mu_orbit.dim + sp.V_mu.dim + sp.W.dim
        assert sp.W.dim == sp.h_mu_orbit.dim
        assert SO3.dim == h.dim + sp.p.dim + sp.q_mu.dim + sp.k.dim
        assert sp.g_mu.dim == sp.h_mu.dim + sp.p.dim
        for r in verify_splitting(sp, SO3, mu, Subspace.zero(3)):
            assert r.passed, str(r)


def test_locally_free_full_orbit():
    # h = 0: the whole orbit tangent is V_mu, and q_mu covers it
    mu = np.array([0.3, -0.5, 0.8])
    sp = witt_artin_split(SO3, mu, Subspace.zero(3), Subspace.zero(3))
    assert sp.h_mu_orbit.dim == 0 and sp.W.dim == 0
    assert sp.V_mu.dim == 2 and sp.q_mu.dim == 2
    assert sp.k.dim == 0


def test_gpx_invariance_reported():
    # gpx = g_mu = span{mu} for so(3): every constituent must be invariant
    mu = np.array([0.0, 0.0, 1.0])
    h = span_of([(0.0, 0.0, 1.0)])
    gpx = span_of([(0.0, 0.0, 1.0)])
    sp = witt_artin_split(SO3, mu, h, gpx)
    assert sp.invariance_report["algebra_parts"] < 1e-9
    assert sp.invariance_report["orbit_parts"] < 1e-9
    assert sp.invariance_report["inner_product"] < 1e-10
