"""Tests for subdomain geometry, weights, fast diagonalization and smoothers."""

import numpy as np
import numpy.testing as npt
import pytest

from schwarzmg.basis import gll_basis, overlap_width
from schwarzmg.mesh import MeshConfig, element_indices, layout_for
from schwarzmg.operators import PoissonOperator, poisson_benchmark
from schwarzmg.schwarz import (AdditiveSchwarz, MultiplicativeSchwarz,
                               SweepCounter, WeightKind, build_fast_diag,
                               build_weight_1d, build_weight_tensor,
                               jacobi_eigh, restricted_1d, subdomain_geometry,
                               weight_value)

ALL_KINDS = list(WeightKind)


# ----------------------------------------------------------------------
# Shape and weight functions

def test_shape_function_endpoint_values():
    # Gradual profiles vanish at the subdomain boundary and reach 1 in the
    # single-coverage core; the arithmetic profile is 1/2 exactly at the
    # boundary.
    delta = 0.3
    edge = 1.0 + delta - 1e-3  # just inside the subdomain boundary
    for kind in ALL_KINDS:
        w = weight_value(kind, np.array([-edge, edge]), delta)
        if kind is WeightKind.ARITHMETIC:
            npt.assert_allclose(w, [0.5, 0.5], atol=1e-14)
        else:
            assert np.all(np.abs(w) < 0.05)
        npt.assert_allclose(weight_value(kind, 0.0, delta), 1.0, atol=1e-14)
        # Strictly outside, every profile vanishes.
        npt.assert_allclose(weight_value(kind, 2.0 + delta, delta), 0.0,
                            atol=1e-14)


def test_weight_pairs_sum_to_one_in_overlap():
    # Two neighboring subdomains overlap on [1 - delta, 1 + delta] in the
    # left one's coordinate; their weights are mirror images summing to 1.
    delta = 0.4
    xi = np.linspace(1.0 - delta, 1.0 + delta, 33)
    for kind in ALL_KINDS:
        left = weight_value(kind, xi, delta)
        right = weight_value(kind, xi - 2.0, delta)
        npt.assert_allclose(left + right, 1.0, atol=1e-13)


def test_weight_value_rejects_bad_delta():
    with pytest.raises(ValueError):
        weight_value(WeightKind.QUINTIC, 0.0, 0.0)


@pytest.mark.parametrize("p", [4, 8, 16])
@pytest.mark.parametrize("n_o", [1, 2])
@pytest.mark.parametrize("kind", ALL_KINDS)
def test_partition_of_unity_on_periodic_line(p, n_o, kind):
    # Accumulating each subdomain's 1D weights onto the global periodic
    # line must give exactly 1 at every node.
    basis = gll_basis(p)
    geom = subdomain_geometry(basis, n_o)
    w = build_weight_1d(kind, basis, geom)
    n = 8
    total = np.zeros(p * n)
    offs = np.arange(-n_o, p + n_o + 1)
    for e in range(n):
        np.add.at(total, (e * p + offs) % (p * n), w)
    npt.assert_allclose(total, 1.0, atol=1e-13)


def test_weight_tensor_is_outer_product():
    basis = gll_basis(6)
    geom = subdomain_geometry(basis, 1)
    w = build_weight_1d(WeightKind.CUBIC, basis, geom)
    W = build_weight_tensor(WeightKind.CUBIC, basis, geom)
    npt.assert_allclose(W, np.outer(w, w), atol=1e-15)


def test_subdomain_geometry_coordinates():
    basis = gll_basis(4)
    geom = subdomain_geometry(basis, 1)
    assert geom.n_updated == 7
    npt.assert_allclose(geom.delta, overlap_width(basis, 1))
    # Adopted nodes sit beyond the owner element's interval.
    assert geom.coords[0] < -1.0 and geom.coords[-1] > 1.0
    npt.assert_allclose(geom.coords, -geom.coords[::-1], atol=1e-14)


# ----------------------------------------------------------------------
# Restricted subdomain problem and fast diagonalization

def _dense_subdomain_matrix(basis, dx, dy, n_o):
    L_x, m_x = restricted_1d(basis, dx, n_o)
    L_y, m_y = restricted_1d(basis, dy, n_o)
    return np.kron(np.diag(m_y), L_x) + np.kron(L_y, np.diag(m_x))


def test_restricted_1d_against_patch_assembly():
    # Independent re-assembly of the three-element patch, keeping the
    # updated rows/columns.
    basis = gll_basis(4)
    d, n_o = 0.5, 1
    L_s, m_s = restricted_1d(basis, d, n_o)
    q = 13
    L = np.zeros((q, q))
    m = np.zeros(q)
    for off in (0, 4, 8):
        idx = off + np.arange(5)
        L[np.ix_(idx, idx)] += (2.0 / d) * basis.stiff
        np.add.at(m, idx, (d / 2.0) * basis.weights)
    keep = np.arange(4 - n_o, 8 + n_o + 1)
    npt.assert_allclose(L_s, L[np.ix_(keep, keep)], atol=1e-14)
    npt.assert_allclose(m_s, m[keep], atol=1e-14)
    assert np.all(m_s > 0)
    with pytest.raises(ValueError):
        restricted_1d(basis, d, 4)


@pytest.mark.parametrize("n", [3, 6, 15])
def test_jacobi_eigh_against_lapack(n):
    rng = np.random.default_rng(31)
    a = rng.standard_normal((n, n))
    a = a + a.T
    lam, v = jacobi_eigh(a)
    lam_ref = np.linalg.eigvalsh(a)
    npt.assert_allclose(lam, lam_ref, atol=1e-12 * np.abs(lam_ref).max())
    npt.assert_allclose(v.T @ v, np.eye(n), atol=1e-12)
    npt.assert_allclose(a @ v, v * lam[None, :], atol=1e-11)


def test_jacobi_eigh_zero_matrix():
    lam, v = jacobi_eigh(np.zeros((4, 4)))
    npt.assert_allclose(lam, 0.0)
    npt.assert_allclose(v, np.eye(4))


@pytest.mark.parametrize("p,n_o", [(2, 0), (4, 1), (8, 2)])
@pytest.mark.parametrize("dx,dy", [(0.25, 0.25), (1.0, 0.25)])
def test_fast_diag_inverts_subdomain_operator(p, n_o, dx, dy):
    basis = gll_basis(p)
    solver = build_fast_diag(basis, dx, dy, n_o, kind=None)
    A_ss = _dense_subdomain_matrix(basis, dx, dy, n_o)
    m = p + 1 + 2 * n_o
    rng = np.random.default_rng(37)
    r = rng.standard_normal((m, m))
    x = solver.solve(r)
    npt.assert_allclose(A_ss @ x.ravel(), r.ravel(),
                        atol=1e-10 * np.abs(r).max())


def test_fast_diag_weighted_solve_applies_weight_tensor():
    basis = gll_basis(4)
    plain = build_fast_diag(basis, 0.5, 0.5, 1, kind=None)
    weighted = build_fast_diag(basis, 0.5, 0.5, 1, kind=WeightKind.QUINTIC)
    W = build_weight_tensor(WeightKind.QUINTIC, basis,
                            subdomain_geometry(basis, 1))
    r = np.random.default_rng(41).standard_normal((7, 7))
    npt.assert_allclose(weighted.solve(r), plain.solve(r) * W, atol=1e-13)


# ----------------------------------------------------------------------
# Smoother sweeps against naive reference implementations

def _setup(p=4, n=4, n_o=1):
    mesh = MeshConfig(n, n)
    basis = gll_basis(p)
    layout = layout_for(mesh, p)
    op = PoissonOperator(basis, mesh)
    f, _ = poisson_benchmark(mesh, basis)
    rng = np.random.default_rng(43)
    u0 = rng.random((layout.N_y, layout.N_x))
    return mesh, basis, layout, op, f, u0


def _naive_additive(basis, layout, mesh, op, u, f, n_it, kind, n_o):
    A_ss = _dense_subdomain_matrix(basis, mesh.dx, mesh.dy, n_o)
    W = build_weight_tensor(kind, basis, subdomain_geometry(basis, n_o))
    m = layout.p + 1 + 2 * n_o
    for _ in range(n_it):
        r = f - op.apply(u)
        cors = []
        for e_y in range(layout.n_y):
            for e_x in range(layout.n_x):
                iy, ix = element_indices(layout, e_x, e_y, n_o)
                cor = np.linalg.solve(A_ss, r[np.ix_(iy, ix)].ravel())
                cors.append((iy, ix, cor.reshape(m, m) * W))
        for iy, ix, cor in cors:
            np.add.at(u, np.ix_(iy, ix), cor)
    return u


def _naive_multiplicative(basis, layout, mesh, op, u, f, n_it, n_o,
                          first_sweep=1):
    A_ss = _dense_subdomain_matrix(basis, mesh.dx, mesh.dy, n_o)
    m = layout.p + 1 + 2 * n_o
    order = [(e_x, e_y) for e_y in range(layout.n_y)
             for e_x in range(layout.n_x)]
    for i in range(first_sweep, first_sweep + n_it):
        seq = order if i % 2 == 1 else order[::-1]
        for e_x, e_y in seq:
            # Reference implementation: full residual before every solve.
            r = f - op.apply(u)
            iy, ix = element_indices(layout, e_x, e_y, n_o)
            cor = np.linalg.solve(A_ss, r[np.ix_(iy, ix)].ravel())
            u[np.ix_(iy, ix)] += cor.reshape(m, m)
    return u


@pytest.mark.parametrize("kind", [WeightKind.QUINTIC, WeightKind.ARITHMETIC])
def test_additive_smoother_matches_naive(kind):
    mesh, basis, layout, op, f, u0 = _setup()
    sm = AdditiveSchwarz(basis, layout, mesh.dx, mesh.dy, 1, kind)
    got = sm.smooth(op, u0.copy(), f, 2)
    want = _naive_additive(basis, layout, mesh, op, u0.copy(), f, 2, kind, 1)
    npt.assert_allclose(got, want, atol=1e-11)


def test_multiplicative_smoother_matches_naive():
    mesh, basis, layout, op, f, u0 = _setup()
    sm = MultiplicativeSchwarz(basis, layout, mesh.dx, mesh.dy, 1)
    got = sm.smooth(op, u0.copy(), f, 2)
    want = _naive_multiplicative(basis, layout, mesh, op, u0.copy(), f, 2, 1)
    npt.assert_allclose(got, want, atol=1e-11)


def test_multiplicative_parity_persists_across_calls():
    # The third sweep overall traverses forward again; a second smooth()
    # call must continue the count rather than restart it.
    mesh, basis, layout, op, f, u0 = _setup()
    sm = MultiplicativeSchwarz(basis, layout, mesh.dx, mesh.dy, 1)
    u = sm.smooth(op, u0.copy(), f, 1)
    u = sm.smooth(op, u, f, 1)
    want = _naive_multiplicative(basis, layout, mesh, op, u0.copy(), f, 2, 1)
    npt.assert_allclose(u, want, atol=1e-11)
    assert sm.counter.i == 2
    sm.counter.reset()
    assert sm.counter.i == 0


def test_multiplicative_shared_counter():
    mesh, basis, layout, op, f, u0 = _setup()
    shared = SweepCounter()
    sm1 = MultiplicativeSchwarz(basis, layout, mesh.dx, mesh.dy, 1,
                                counter=shared)
    sm2 = MultiplicativeSchwarz(basis, layout, mesh.dx, mesh.dy, 1,
                                counter=shared)
    sm1.smooth(op, u0.copy(), f, 1)
    # The second smoother sees an even sweep count and traverses reversed.
    got = sm2.smooth(op, u0.copy(), f, 1)
    want = _naive_multiplicative(basis, layout, mesh, op, u0.copy(), f, 1, 1,
                                 first_sweep=2)
    npt.assert_allclose(got, want, atol=1e-11)


@pytest.mark.parametrize("smoother_cls", [AdditiveSchwarz, MultiplicativeSchwarz])
def test_smoothers_reduce_residual(smoother_cls):
    mesh, basis, layout, op, f, u0 = _setup()
    if smoother_cls is AdditiveSchwarz:
        sm = smoother_cls(basis, layout, mesh.dx, mesh.dy, 1,
                          WeightKind.QUINTIC)
    else:
        sm = smoother_cls(basis, layout, mesh.dx, mesh.dy, 1)
    r0 = np.linalg.norm(f - op.apply(u0))
    u = sm.smooth(op, u0.copy(), f, 3)
    assert np.linalg.norm(f - op.apply(u)) < r0


def test_subdomain_window_alias_guard():
    # p=2 with one adopted layer needs 5 nodes per direction but a 2x2
    # mesh only has 4 unique ones.
    mesh = MeshConfig(2, 2)
    basis = gll_basis(2)
    layout = layout_for(mesh, 2)
    with pytest.raises(ValueError):
        AdditiveSchwarz(basis, layout, mesh.dx, mesh.dy, 1, WeightKind.QUINTIC)
    with pytest.raises(ValueError):
        MultiplicativeSchwarz(basis, layout, mesh.dx, mesh.dy, 1)
