"""Overlapping-subdomain Schwarz smoothers.

Subdomains are extended element regions adopting ``n_o`` node layers from
each neighbor (the outer layer on the subdomain boundary is excluded).
All subdomains of a uniform periodic mesh are congruent, so a single
fast-diagonalization factorization per level suffices.  The weighted
additive sweep combines all local solves at once with a diagonal weight
tensor W = W_y (x) W_x; the multiplicative sweep processes subdomains
sequentially with a locally updated residual, reversing the traversal
order on every other sweep so that an even number of consecutive sweeps
is symmetric.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import Basis1D, overlap_width
from .mesh import FieldLayout, all_element_windows, scatter_blocks

__all__ = ["WeightKind", "SubdomainGeometry", "FastDiagSolver",
           "restricted_1d", "weight_value", "build_weight_1d",
           "build_fast_diag", "AdditiveSchwarz", "MultiplicativeSchwarz",
           "SweepCounter", "jacobi_eigh"]


class WeightKind(str, Enum):
    ARITHMETIC = "wa"
    LINEAR = "w1"
    CUBIC = "w3"
    QUINTIC = "w5"
    SEVENTH = "w7"
    TOPHAT = "wt"


def _shape_core(kind: WeightKind, x: np.ndarray) -> np.ndarray:
    """Shape function on [-1, 1] (the polynomial or degenerate cases)."""
    if kind is WeightKind.ARITHMETIC:
        return np.zeros_like(x)
    if kind is WeightKind.LINEAR:
        return x
    if kind is WeightKind.CUBIC:
        return (3 * x - x**3) / 2
    if kind is WeightKind.QUINTIC:
        return (15 * x - 10 * x**3 + 3 * x**5) / 8
    if kind is WeightKind.SEVENTH:
        return (35 * x - 35 * x**3 + 21 * x**5 - 5 * x**7) / 16
    if kind is WeightKind.TOPHAT:
        return np.sign(x)
    raise ValueError(f"unknown weight kind {kind!r}")


def shape_function(kind: WeightKind, x) -> np.ndarray:
    """Full shape function: the core on [-1, 1], sign(x) outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= 1.0
    return np.where(inside, _shape_core(kind, np.clip(x, -1.0, 1.0)), np.sign(x))


def weight_value(kind: WeightKind, xi, delta: float) -> np.ndarray:
    """Continuous weighting profile at extended standard coordinate ``xi``."""
    if delta <= 0:
        raise ValueError("overlap width must be positive")
    xi = np.asarray(xi, dtype=float)
    return 0.5 * (shape_function(kind, (xi + 1.0) / delta)
                  - shape_function(kind, (xi - 1.0) / delta))


@dataclass(frozen=True)
class SubdomainGeometry:
    """Updated node set of one subdomain, relative to the owner element."""

    p: int
    n_o: int
    delta: float
    coords: np.ndarray  # extended standard coordinates of the updated nodes

    @property
    def n_updated(self) -> int:
        return self.p + 1 + 2 * self.n_o


def subdomain_geometry(basis: Basis1D, n_o: int) -> SubdomainGeometry:
    delta = overlap_width(basis, n_o)
    p = basis.p
    left = basis.nodes[p - n_o:p] - 2.0
    right = basis.nodes[1:n_o + 1] + 2.0
    coords = np.concatenate([left, basis.nodes, right])
    return SubdomainGeometry(p=p, n_o=n_o, delta=delta, coords=coords)


def _coverage_count(own: np.ndarray, p: int, n_o: int) -> np.ndarray:
    """Number of subdomains updating the node with own-element index ``own``.

    A subdomain anchored at element e updates global offsets
    [p e - n_o, p e + p + n_o]; counting the integer e in range gives the
    diagonal of the counting matrix C.
    """
    upper = np.floor((own + n_o) / p)
    lower = np.ceil((own - p - n_o) / p)
    return (upper - lower + 1).astype(int)


def build_weight_1d(kind: WeightKind, basis: Basis1D, geom: SubdomainGeometry):
    """Per-direction weights at the updated node coordinates.

    The arithmetic mean is the pseudoinverse of the counting matrix, i.e.
    1 / multiplicity per node; the gradual kinds evaluate the blending
    profile, with nodes updated by no other subdomain forced to exactly 1.
    """
    p, n_o = geom.p, geom.n_o
    own = np.arange(geom.n_updated) - n_o  # own-element local node index
    if kind is WeightKind.ARITHMETIC:
        return 1.0 / _coverage_count(own, p, n_o)
    w = weight_value(kind, geom.coords, geom.delta)
    single = (own > n_o) & (own < p - n_o)
    w[single] = 1.0
    return w


def build_weight_tensor(kind: WeightKind, basis: Basis1D,
                        geom: SubdomainGeometry) -> np.ndarray:
    """Diagonal weight tensor W = W_y (x) W_x over the updated nodes."""
    w = build_weight_1d(kind, basis, geom)
    return np.outer(w, w)


def restricted_1d(basis: Basis1D, d: float, n_o: int):
    """Restricted 1D stiffness and (diagonal) mass for the subdomain solve.

    Assembles the three-element periodic patch and keeps the
    p + 1 + 2*n_o updated rows/columns; the excluded outer layer acts as a
    homogeneous Dirichlet boundary. Returns (L_s, m_s) with m_s the mass
    diagonal.
    """
    p = basis.p
    if not 0 <= n_o <= p - 1:
        raise ValueError(f"overlap layers must be in [0, {p - 1}], got {n_o}")
    q = 3 * p + 1
    L = np.zeros((q, q))
    m = np.zeros(q)
    l_el = (2.0 / d) * basis.stiff
    m_el = (d / 2.0) * basis.weights
    for off in (0, p, 2 * p):
        L[off:off + p + 1, off:off + p + 1] += l_el
        m[off:off + p + 1] += m_el
    sel = slice(p - n_o, 2 * p + n_o + 1)
    return np.ascontiguousarray(L[sel, sel]), m[sel].copy()


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 50):
    """Cyclic Jacobi eigensolver for small dense symmetric matrices.

    Returns eigenvalues (ascending) and the orthogonal eigenvector matrix.
    The off-diagonal norm threshold is relative to the Frobenius norm of
    the input.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        # Off-diagonal Frobenius norm, computed directly (subtracting the
        # diagonal from the total suffers cancellation near convergence).
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p_ in range(n - 1):
            for q_ in range(p_ + 1, n):
                apq = a[p_, q_]
                if abs(apq) < 1e-20 * scale:
                    a[p_, q_] = a[q_, p_] = 0.0
                    continue
                theta = (a[q_, q_] - a[p_, p_]) / (2.0 * apq)
                # hypot avoids overflow for extreme diagonal ratios
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) \
                    if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot_p = c * a[:, p_] - s * a[:, q_]
                rot_q = s * a[:, p_] + c * a[:, q_]
                a[:, p_], a[:, q_] = rot_p, rot_q
                rot_p = c * a[p_, :] - s * a[q_, :]
                rot_q = s * a[p_, :] + c * a[q_, :]
                a[p_, :], a[q_, :] = rot_p, rot_q
                rot_p = c * v[:, p_] - s * v[:, q_]
                rot_q = s * v[:, p_] + c * v[:, q_]
                v[:, p_], v[:, q_] = rot_p, rot_q
    else:
        raise RuntimeError("Jacobi eigensolver did not converge "
                           f"within {max_sweeps} sweeps")
    lam = np.diag(a).copy()
    order = np.argsort(lam)
    return lam[order], v[:, order]


@dataclass(eq=False)
class FastDiagSolver:
    """Factored inverse of the tensor-product subdomain operator.

    Holds the generalized eigenvector matrices S_* (normalized so that
    S^T M_s S = I), the eigenvalue diagonals, and optionally the diagonal
    weight tensor used by the additive method.
    """

    S_x: np.ndarray
    S_y: np.ndarray
    lam_x: np.ndarray
    lam_y: np.ndarray
    weight: np.ndarray | None = None  # (m, m) tensor, or None (multiplicative)

    def solve(self, blocks: np.ndarray) -> np.ndarray:
        """Apply the factored inverse to one block or a batch of blocks."""
        tmp = self.S_y.T @ blocks @ self.S_x
        tmp /= (self.lam_y[:, None] + self.lam_x[None, :])
        out = self.S_y @ tmp @ self.S_x.T
        if self.weight is not None:
            out = out * self.weight
        return out


def _direction_factors(basis: Basis1D, d: float, n_o: int):
    L_s, m_s = restricted_1d(basis, d, n_o)
    inv_sqrt = 1.0 / np.sqrt(m_s)
    sym = inv_sqrt[:, None] * L_s * inv_sqrt[None, :]
    lam, q = jacobi_eigh(sym)
    if lam[0] <= 0.0:
        raise RuntimeError("restricted subdomain problem is not definite")
    return inv_sqrt[:, None] * q, lam


def build_fast_diag(basis: Basis1D, dx: float, dy: float, n_o: int,
                    kind: WeightKind | None = None) -> FastDiagSolver:
    """Per-direction generalized eigendecompositions plus the weight tensor."""
    S_x, lam_x = _direction_factors(basis, dx, n_o)
    S_y, lam_y = _direction_factors(basis, dy, n_o)
    weight = None
    if kind is not None:
        weight = build_weight_tensor(kind, basis, subdomain_geometry(basis, n_o))
    return FastDiagSolver(S_x=S_x, S_y=S_y, lam_x=lam_x, lam_y=lam_y,
                          weight=weight)


def _check_no_alias(layout: FieldLayout, n_o: int):
    m = layout.p + 1 + 2 * n_o
    if m > layout.N_x or m > layout.N_y:
        raise ValueError(
            f"subdomain window ({m} nodes) wraps onto itself on a "
            f"{layout.n_x}x{layout.n_y} mesh at p={layout.p}; reduce n_o")


class AdditiveSchwarz:
    """Weighted additive Schwarz sweep over all subdomains at once."""

    def __init__(self, basis: Basis1D, layout: FieldLayout, dx: float, dy: float,
                 n_o: int, kind: WeightKind, nu_bar: np.ndarray | None = None):
        _check_no_alias(layout, n_o)
        self.n_o = n_o
        self.solver = build_fast_diag(basis, dx, dy, n_o, kind)
        self.layout = layout
        self._gy, self._gx, self._flat = all_element_windows(layout, n_o)
        # For diffusion: local solves scaled by 1 / mean(nu) per element.
        self._inv_nu = None if nu_bar is None else 1.0 / nu_bar[:, :, None, None]

    def smooth(self, op, u: np.ndarray, f: np.ndarray, n_it: int) -> np.ndarray:
        for _ in range(n_it):
            r = f - op.apply(u)
            cor = self.solver.solve(r[self._gy, self._gx])
            if self._inv_nu is not None:
                cor = cor * self._inv_nu
            u = scatter_blocks(self._flat, cor, self.layout, out=u)
        return u


@dataclass(eq=False)
class SweepCounter:
    """Running count of multiplicative sweeps, shared across a hierarchy.

    Traversal direction alternates with this counter, so consecutive
    sweeps -- within one smoother call, across calls, and across the
    levels of a multigrid cycle -- keep symmetrizing each other.
    """

    i: int = 0

    def reset(self):
        self.i = 0


class MultiplicativeSchwarz:
    """Sequential Schwarz sweep with local residual refresh.

    Subdomains are traversed lexicographically by (e_y, e_x), in reversed
    order on every even-numbered sweep, so an even number of consecutive
    sweeps yields a symmetric linear operator.  The sweep count persists
    in ``counter`` (pass a common instance to share it between smoothers).
    The residual is refreshed after each local solve by applying the
    element kernels of the elements touched by the correction, which is
    algebraically identical to recomputing the full residual.
    """

    def __init__(self, basis: Basis1D, layout: FieldLayout, dx: float, dy: float,
                 n_o: int, nu_bar: np.ndarray | None = None,
                 counter: SweepCounter | None = None):
        self.counter = SweepCounter() if counter is None else counter
        _check_no_alias(layout, n_o)
        self.n_o = n_o
        self.solver = build_fast_diag(basis, dx, dy, n_o, kind=None)
        self.layout = layout
        p = layout.p
        offs = np.arange(-n_o, p + n_o + 1)
        self._wy = [(e * p + offs) % layout.N_y for e in range(layout.n_y)]
        self._wx = [(e * p + offs) % layout.N_x for e in range(layout.n_x)]
        eoffs = np.arange(p + 1)
        self._ey = [(e * p + eoffs) % layout.N_y for e in range(layout.n_y)]
        self._ex = [(e * p + eoffs) % layout.N_x for e in range(layout.n_x)]
        self._nu_bar = nu_bar
        self._scratch = layout.zeros()

    def _local_update(self, op, r, du_win, e_x, e_y):
        """r -= A(du) for a correction supported on subdomain (e_x, e_y)."""
        lay = self.layout
        du = self._scratch
        win = np.ix_(self._wy[e_y], self._wx[e_x])
        du[win] = du_win
        touched = {((e_x + dx_) % lay.n_x, (e_y + dy_) % lay.n_y)
                   for dx_ in (-1, 0, 1) for dy_ in (-1, 0, 1)}
        for tx, ty in touched:
            ewin = np.ix_(self._ey[ty], self._ex[tx])
            block = du[ewin]
            if not block.any():
                continue
            r[ewin] -= op.element_kernel(block, tx, ty)
        du[win] = 0.0

    def smooth(self, op, u: np.ndarray, f: np.ndarray, n_it: int) -> np.ndarray:
        lay = self.layout
        order = [(e_x, e_y) for e_y in range(lay.n_y) for e_x in range(lay.n_x)]
        for _ in range(n_it):
            self.counter.i += 1
            r = f - op.apply(u)
            seq = order if self.counter.i % 2 == 1 else order[::-1]
            for e_x, e_y in seq:
                win = np.ix_(self._wy[e_y], self._wx[e_x])
                du_win = self.solver.solve(r[win])
                if self._nu_bar is not None:
                    du_win /= self._nu_bar[e_y, e_x]
                u[win] += du_win
                self._local_update(op, r, du_win, e_x, e_y)
        return u
