"""Periodic Cartesian element grid and global coefficient storage.

The mesh is fully periodic and uniform, so element-local views are plain
index windows with modular wrap; no DOF indirection tables are needed.
Global coefficients live in a single dense (N_y, N_x) array, row-major by
y then x, with N_x = p * n_x unique nodes per direction.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["MeshConfig", "FieldLayout", "Field",
           "gather_element", "scatter_add_element"]


@dataclass(frozen=True)
class MeshConfig:
    """Element counts and extents of the periodic rectangular domain."""

    n_x: int
    n_y: int
    l_x: float = 2.0
    l_y: float = 2.0

    def __post_init__(self):
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("need at least 2 elements per direction")
        if self.l_x <= 0 or self.l_y <= 0:
            raise ValueError("domain extents must be positive")

    @property
    def dx(self) -> float:
        return self.l_x / self.n_x

    @property
    def dy(self) -> float:
        return self.l_y / self.n_y

    @property
    def aspect_ratio(self) -> float:
        return self.dx / self.dy

    @property
    def n_el(self) -> int:
        return self.n_x * self.n_y


@dataclass(frozen=True)
class FieldLayout:
    """Unique global node counts for one polynomial level of a mesh."""

    p: int
    n_x: int
    n_y: int

    @property
    def N_x(self) -> int:
        return self.p * self.n_x

    @property
    def N_y(self) -> int:
        return self.p * self.n_y

    @property
    def size(self) -> int:
        return self.N_x * self.N_y

    def zeros(self) -> np.ndarray:
        return np.zeros((self.N_y, self.N_x))


def layout_for(mesh: MeshConfig, p: int) -> FieldLayout:
    return FieldLayout(p=p, n_x=mesh.n_x, n_y=mesh.n_y)


@dataclass(eq=False)
class Field:
    """Global coefficient array bound to its layout."""

    layout: FieldLayout
    values: np.ndarray

    def __post_init__(self):
        expect = (self.layout.N_y, self.layout.N_x)
        if self.values.shape != expect:
            raise ValueError(f"values shape {self.values.shape} != layout {expect}")

    @classmethod
    def zeros(cls, layout: FieldLayout) -> "Field":
        return cls(layout, layout.zeros())

    def copy(self) -> "Field":
        return Field(self.layout, self.values.copy())


def element_indices(layout: FieldLayout, e_x: int, e_y: int, n_o: int = 0):
    """Periodic global index windows (iy, ix) of one element, optionally
    extended by ``n_o`` node layers into the neighbors."""
    if not (0 <= e_x < layout.n_x and 0 <= e_y < layout.n_y):
        raise IndexError(f"element ({e_x}, {e_y}) out of range")
    offs = np.arange(-n_o, layout.p + n_o + 1)
    ix = (e_x * layout.p + offs) % layout.N_x
    iy = (e_y * layout.p + offs) % layout.N_y
    return iy, ix


def gather_element(field: Field, e_x: int, e_y: int) -> np.ndarray:
    """Local (p+1)x(p+1) coefficient block of element (e_x, e_y), indexed
    [y, x], with periodic wrap at the mesh edges."""
    iy, ix = element_indices(field.layout, e_x, e_y)
    return field.values[np.ix_(iy, ix)]


def scatter_add_element(field: Field, e_x: int, e_y: int, block: np.ndarray) -> None:
    """Accumulate a local block into the global array (transpose of gather)."""
    p = field.layout.p
    if block.shape != (p + 1, p + 1):
        raise ValueError(f"block shape {block.shape} != {(p + 1, p + 1)}")
    iy, ix = element_indices(field.layout, e_x, e_y)
    np.add.at(field.values, np.ix_(iy, ix), block)


def all_element_windows(layout: FieldLayout, n_o: int = 0):
    """Broadcastable gather indices and flat scatter indices for every element.

    Returns (gy, gx, flat) where values[gy, gx] yields an array of shape
    (n_y, n_x, m, m) with m = p + 1 + 2*n_o, and ``flat`` are the raveled
    global indices for bincount-style scatter-add.
    """
    p = layout.p
    offs = np.arange(-n_o, p + n_o + 1)
    iy = (np.arange(layout.n_y)[:, None] * p + offs[None, :]) % layout.N_y
    ix = (np.arange(layout.n_x)[:, None] * p + offs[None, :]) % layout.N_x
    gy = iy[:, None, :, None]
    gx = ix[None, :, None, :]
    flat = (gy * layout.N_x + gx).reshape(layout.n_y, layout.n_x,
                                          offs.size, offs.size)
    return gy, gx, np.ascontiguousarray(flat)


def scatter_blocks(flat: np.ndarray, blocks: np.ndarray, layout: FieldLayout,
                   out: np.ndarray | None = None) -> np.ndarray:
    """Scatter-add per-element blocks into a global array via bincount."""
    acc = np.bincount(flat.ravel(), weights=blocks.ravel(),
                      minlength=layout.size).reshape(layout.N_y, layout.N_x)
    if out is None:
        return acc
    out += acc
    return out
