"""Matrix-free global operators for the Poisson and variable-diffusion problems.

The Poisson operator realizes A = M_y (x) L_x + L_y (x) M_x assembled over
the periodic element grid; the diffusion operator realizes the weak-form
Galerkin discretization of -div(nu grad u) with GLL-collocated quadrature.
Both apply element kernels by sum factorization (contract along x first,
then y) and scatter-add in row-major element order.

Dense assembly routines are included as independent test oracles.
"""

import numpy as np

from .basis import Basis1D
from .mesh import (FieldLayout, MeshConfig, all_element_windows, layout_for,
                   scatter_blocks)

__all__ = ["PoissonOperator", "DiffusionOperator", "residual",
           "manufactured_rhs_poisson", "manufactured_rhs_diffusion",
           "nodal_coordinates", "project_mean", "load_vector",
           "dense_poisson_matrix", "dense_diffusion_matrix"]


def _check_layout(layout: FieldLayout, u: np.ndarray):
    if u.shape != (layout.N_y, layout.N_x):
        raise ValueError(f"field shape {u.shape} does not match layout "
                         f"({layout.N_y}, {layout.N_x})")


class PoissonOperator:
    """Global Poisson operator on one polynomial level of a periodic mesh."""

    def __init__(self, basis: Basis1D, mesh: MeshConfig):
        self.basis = basis
        self.mesh = mesh
        self.layout = layout_for(mesh, basis.p)
        # Scaled 1D element matrices: masses stay diagonal.
        self.mass_x = (mesh.dx / 2.0) * basis.weights
        self.mass_y = (mesh.dy / 2.0) * basis.weights
        self.stiff_x = (2.0 / mesh.dx) * basis.stiff
        self.stiff_y = (2.0 / mesh.dy) * basis.stiff
        self._gy, self._gx, self._flat = all_element_windows(self.layout)

    def element_kernel(self, block: np.ndarray, e_x: int = 0, e_y: int = 0):
        """Apply the single-element operator to a local (y, x) block."""
        return (self.mass_y[:, None] * (block @ self.stiff_x)
                + (self.stiff_y @ block) * self.mass_x[None, :])

    def apply(self, u: np.ndarray) -> np.ndarray:
        _check_layout(self.layout, u)
        blocks = u[self._gy, self._gx]
        out = (self.mass_y[None, None, :, None] * (blocks @ self.stiff_x)
               + (self.stiff_y @ blocks) * self.mass_x[None, None, None, :])
        return scatter_blocks(self._flat, out, self.layout)


class DiffusionOperator:
    """Weak-form Galerkin operator for -div(nu grad u), nu sampled nodally."""

    def __init__(self, basis: Basis1D, mesh: MeshConfig, nu: np.ndarray):
        self.basis = basis
        self.mesh = mesh
        self.layout = layout_for(mesh, basis.p)
        _check_layout(self.layout, nu)
        if np.any(nu <= 0.0):
            raise ValueError("diffusivity must be positive at every node")
        self.nu = nu
        self._gy, self._gx, self._flat = all_element_windows(self.layout)
        # Quadrature weight tensor times nu, per element.
        w2 = np.outer(basis.weights, basis.weights)
        self._nu_w = nu[self._gy, self._gx] * w2
        self._cx = mesh.dy / mesh.dx
        self._cy = mesh.dx / mesh.dy
        self._d = basis.diff
        # Consistency with the Poisson scaling convention:
        #   (2/dx) d/dxi, quadrature (dx/2)(dy/2), test gradient (2/dx).
        self.mass_x = (mesh.dx / 2.0) * basis.weights
        self.mass_y = (mesh.dy / 2.0) * basis.weights

    def element_kernel(self, block: np.ndarray, e_x: int, e_y: int):
        d = self._d
        nw = self._nu_w[e_y, e_x]
        return (self._cx * ((nw * (block @ d.T)) @ d)
                + self._cy * (d.T @ (nw * (d @ block))))

    def apply(self, u: np.ndarray) -> np.ndarray:
        _check_layout(self.layout, u)
        d = self._d
        blocks = u[self._gy, self._gx]
        out = (self._cx * ((self._nu_w * (blocks @ d.T)) @ d)
               + self._cy * np.matmul(d.T, self._nu_w * np.matmul(d, blocks)))
        return scatter_blocks(self._flat, out, self.layout)

    def element_mean_nu(self) -> np.ndarray:
        """Quadrature-weighted mean of nu over each element, shape (n_y, n_x)."""
        w2 = np.outer(self.basis.weights, self.basis.weights)
        nu_blocks = self.nu[self._gy, self._gx]
        return np.einsum("yxij,ij->yx", nu_blocks, w2) / 4.0


def residual(op, u: np.ndarray, f: np.ndarray) -> np.ndarray:
    """r = f - op(u)."""
    return f - op.apply(u)


# ----------------------------------------------------------------------
# Right-hand sides and coordinates


def nodal_coordinates(mesh: MeshConfig, basis: Basis1D):
    """Global node coordinates (X, Y), each of shape (N_y, N_x)."""
    layout = layout_for(mesh, basis.p)
    p = basis.p
    x = np.empty(layout.N_x)
    y = np.empty(layout.N_y)
    for e in range(mesh.n_x):
        x[e * p:(e + 1) * p] = (e + (basis.nodes[:-1] + 1) / 2) * mesh.dx
    for e in range(mesh.n_y):
        y[e * p:(e + 1) * p] = (e + (basis.nodes[:-1] + 1) / 2) * mesh.dy
    return np.meshgrid(x, y)


def _global_quadrature(mesh: MeshConfig, basis: Basis1D):
    """Assembled global quadrature weights as an (N_y, N_x) tensor."""
    layout = layout_for(mesh, basis.p)
    p = basis.p
    wx = np.zeros(layout.N_x)
    wy = np.zeros(layout.N_y)
    for e in range(mesh.n_x):
        idx = (e * p + np.arange(p + 1)) % layout.N_x
        np.add.at(wx, idx, (mesh.dx / 2.0) * basis.weights)
    for e in range(mesh.n_y):
        idx = (e * p + np.arange(p + 1)) % layout.N_y
        np.add.at(wy, idx, (mesh.dy / 2.0) * basis.weights)
    return np.outer(wy, wx)


def project_mean(f: np.ndarray) -> np.ndarray:
    """Remove the constant component (Euclidean mean) from a field."""
    return f - f.mean()


def load_vector(mesh: MeshConfig, basis: Basis1D, source) -> np.ndarray:
    """Quadrature-weighted Galerkin load for an analytic source g(x, y)."""
    X, Y = nodal_coordinates(mesh, basis)
    return _global_quadrature(mesh, basis) * source(X, Y)


def manufactured_rhs_poisson(mesh: MeshConfig, basis: Basis1D, source) -> np.ndarray:
    """Null-space-projected load vector for the analytic source -lap(u_exact)."""
    return project_mean(load_vector(mesh, basis, source))


def poisson_benchmark(mesh: MeshConfig, basis: Basis1D):
    """Standard test problem u = sin(pi x) sin(pi y): returns (f, u_samples)."""
    def u_exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x, y):
        return 2.0 * np.pi**2 * u_exact(x, y)

    f = manufactured_rhs_poisson(mesh, basis, source)
    X, Y = nodal_coordinates(mesh, basis)
    return f, u_exact(X, Y)


def diffusivity_field(mesh: MeshConfig, basis: Basis1D, nu_hat: float,
                      s: float = 0.2) -> np.ndarray:
    """nu = 1 + nu_hat sin(2 pi (x - s)) sin(2 pi (y - s)) at the level nodes."""
    if not 0.0 <= nu_hat < 1.0:
        raise ValueError(f"diffusivity amplitude must be in [0, 1), got {nu_hat}")
    X, Y = nodal_coordinates(mesh, basis)
    return 1.0 + nu_hat * np.sin(2 * np.pi * (X - s)) * np.sin(2 * np.pi * (Y - s))


def manufactured_rhs_diffusion(mesh: MeshConfig, basis: Basis1D, nu_hat: float,
                               s: float = 0.2):
    """Variable-diffusion test problem with u = sin(2 pi x) sin(2 pi y).

    Returns (f, nu, u_samples); f is the quadrature-weighted, mean-projected
    load for the analytic source f = -(nu lap u + grad nu . grad u).
    """
    nu = diffusivity_field(mesh, basis, nu_hat, s)
    two_pi = 2.0 * np.pi

    def source(x, y):
        u = np.sin(two_pi * x) * np.sin(two_pi * y)
        ux = two_pi * np.cos(two_pi * x) * np.sin(two_pi * y)
        uy = two_pi * np.sin(two_pi * x) * np.cos(two_pi * y)
        lap_u = -2.0 * two_pi**2 * u
        nu_v = 1.0 + nu_hat * np.sin(two_pi * (x - s)) * np.sin(two_pi * (y - s))
        nx = two_pi * nu_hat * np.cos(two_pi * (x - s)) * np.sin(two_pi * (y - s))
        ny = two_pi * nu_hat * np.sin(two_pi * (x - s)) * np.cos(two_pi * (y - s))
        return -(nu_v * lap_u + nx * ux + ny * uy)

    f = project_mean(load_vector(mesh, basis, source))
    X, Y = nodal_coordinates(mesh, basis)
    u_samples = np.sin(two_pi * X) * np.sin(two_pi * Y)
    return f, nu, u_samples


# ----------------------------------------------------------------------
# Dense assembly oracles (testing only; kept independent of the
# sum-factorized apply path above)


def _global_1d(basis: Basis1D, n: int, d: float):
    """Assembled periodic global 1D mass (diagonal) and stiffness matrices."""
    p = basis.p
    N = p * n
    mass = np.zeros(N)
    stiff = np.zeros((N, N))
    m_el = (d / 2.0) * basis.weights
    l_el = (2.0 / d) * basis.stiff
    for e in range(n):
        idx = (e * p + np.arange(p + 1)) % N
        np.add.at(mass, idx, m_el)
        stiff[np.ix_(idx, idx)] += l_el
    return mass, stiff


def dense_poisson_matrix(basis: Basis1D, mesh: MeshConfig) -> np.ndarray:
    """A = kron(M_y, L_x) + kron(L_y, M_x) from assembled global 1D matrices."""
    mx, lx = _global_1d(basis, mesh.n_x, mesh.dx)
    my, ly = _global_1d(basis, mesh.n_y, mesh.dy)
    return np.kron(np.diag(my), lx) + np.kron(ly, np.diag(mx))


def dense_diffusion_matrix(basis: Basis1D, mesh: MeshConfig,
                           nu: np.ndarray) -> np.ndarray:
    """Element-by-element dense assembly of the variable-diffusion operator."""
    p = basis.p
    layout = layout_for(mesh, basis.p)
    N = layout.size
    A = np.zeros((N, N))
    eye = np.eye(p + 1)
    gx = np.kron(eye, basis.diff)   # d/dxi on vec(y slow, x fast)
    gy = np.kron(basis.diff, eye)
    w2 = np.outer(basis.weights, basis.weights).ravel()
    cx = mesh.dy / mesh.dx
    cy = mesh.dx / mesh.dy
    for e_y in range(mesh.n_y):
        for e_x in range(mesh.n_x):
            iy = (e_y * p + np.arange(p + 1)) % layout.N_y
            ix = (e_x * p + np.arange(p + 1)) % layout.N_x
            gidx = (iy[:, None] * layout.N_x + ix[None, :]).ravel()
            nu_e = nu[np.ix_(iy, ix)].ravel()
            k = (cx * gx.T @ ((w2 * nu_e)[:, None] * gx)
                 + cy * gy.T @ ((w2 * nu_e)[:, None] * gy))
            A[np.ix_(gidx, gidx)] += k
    return A
