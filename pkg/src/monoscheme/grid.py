"""Regular 1D/3D meshes, mesh functions, and index mappings.

1D unknowns are node-centered: x_i = a + i*h for i = 0..n+1, with the n
interior nodes carrying unknowns and the two end nodes carrying Dirichlet
data. 3D unknowns are cell-centered: N^3 cubic cells of side h = L/N with
centers at ((i+1/2)h, (j+1/2)h, (k+1/2)h).

All types are immutable after construction and safe to share between
threads. Mesh-function values are stored i-fastest in 3D:
flat = i + N*j + N*N*k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np


class InvalidMeshError(ValueError):
    """Raised for mesh parameters that violate the construction contract."""


@dataclass(frozen=True)
class Mesh1D:
    """Regular 1D mesh on [a, b] with n interior nodes and step h = (b-a)/(n+1)."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidMeshError(f"need at least one interior node, got n={self.n}")
        if not self.b > self.a:
            raise InvalidMeshError(f"empty domain [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    def x(self, i: int) -> float:
        """Node coordinate, i = 0..n+1 (0 and n+1 are the boundary nodes)."""
        return self.a + i * self.h

    def interior_x(self) -> np.ndarray:
        """Coordinates of the n interior nodes."""
        return self.a + self.h * np.arange(1, self.n + 1)

    def all_x(self) -> np.ndarray:
        """Coordinates of all n+2 nodes including the boundary ones."""
        return self.a + self.h * np.arange(0, self.n + 2)


@dataclass(frozen=True)
class Mesh3D:
    """Regular mesh of N^3 cubic cells filling a cube of side L; h = L/N."""

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise InvalidMeshError(f"cube side must be positive, got L={self.L}")
        if self.N < 2:
            raise InvalidMeshError(f"need at least 2 cells per direction, got N={self.N}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def cell_count(self) -> int:
        return self.N**3

    def center(self, i: int, j: int, k: int) -> tuple[float, float, float]:
        h = self.h
        return ((i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h)

    def axis_centers(self) -> np.ndarray:
        """The N cell-center coordinates shared by all three axes."""
        return (np.arange(self.N) + 0.5) * self.h


def make_mesh_3d(L: float, N: int) -> Mesh3D:
    """Build a regular 3D mesh; rejects nonpositive L and N < 2."""
    return Mesh3D(L=L, N=int(N))


def flat_index(i: int, j: int, k: int, N: int) -> int:
    """Single-index position of cell (i, j, k): i + N*j + N*N*k.

    Bijective onto 0..N^3-1 for indices in 0..N-1.
    """
    if not (0 <= i < N and 0 <= j < N and 0 <= k < N):
        raise IndexError(f"cell ({i}, {j}, {k}) outside mesh of {N}^3 cells")
    return i + N * j + N * N * k


def unflatten_index(p: int, N: int) -> tuple[int, int, int]:
    """Inverse of flat_index."""
    if not 0 <= p < N**3:
        raise IndexError(f"flat index {p} outside 0..{N**3 - 1}")
    k, r = divmod(p, N * N)
    j, i = divmod(r, N)
    return i, j, k


Mesh = Union[Mesh1D, Mesh3D]


@dataclass(frozen=True)
class MeshFunction:
    """Scalar values on a mesh: one per interior node (1D) or per cell (3D).

    3D values are stored flat, i-fastest (flat = i + N*j + N*N*k).
    The value array is frozen; operations return new MeshFunctions.
    """

    mesh: Mesh
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        expected = self.mesh.n if isinstance(self.mesh, Mesh1D) else self.mesh.cell_count
        if vals.shape != (expected,):
            raise ValueError(f"expected {expected} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def as_grid(self) -> np.ndarray:
        """3D values as an (N, N, N) array indexed [i, j, k]."""
        if not isinstance(self.mesh, Mesh3D):
            raise TypeError("as_grid is only defined for 3D mesh functions")
        N = self.mesh.N
        return self.values.reshape((N, N, N), order="F")

    @classmethod
    def from_grid(cls, mesh: Mesh3D, grid: np.ndarray) -> "MeshFunction":
        return cls(mesh, np.asarray(grid, dtype=float).reshape(-1, order="F"))

    def with_values(self, values: np.ndarray) -> "MeshFunction":
        return MeshFunction(self.mesh, values)


@dataclass(frozen=True)
class BoundaryData1D:
    """Dirichlet values at the two end nodes x_0 and x_{n+1}."""

    u0: float
    u_np1: float

    def __post_init__(self):
        if not (np.isfinite(self.u0) and np.isfinite(self.u_np1)):
            raise ValueError("boundary values must be finite")


def sample(mesh: Mesh, f: Callable[..., float]) -> MeshFunction:
    """Evaluate a pointwise function at every interior node (1D) or cell center (3D)."""
    if isinstance(mesh, Mesh1D):
        vals = np.array([f(x) for x in mesh.interior_x()], dtype=float)
        return MeshFunction(mesh, vals)
    N = mesh.N
    centers = mesh.axis_centers()
    vals = np.empty(N**3, dtype=float)
    for k in range(N):
        for j in range(N):
            base = N * j + N * N * k
            zk, yj = centers[k], centers[j]
            for i in range(N):
                vals[base + i] = f(centers[i], yj, zk)
    return MeshFunction(mesh, vals)


def with_boundary(u: MeshFunction, bc: BoundaryData1D) -> np.ndarray:
    """Full node sequence (u0, interior values, u_{n+1}) of length n+2."""
    if not isinstance(u.mesh, Mesh1D):
        raise TypeError("with_boundary is only defined for 1D mesh functions")
    return np.concatenate(([bc.u0], u.values, [bc.u_np1]))


def norm_c(values: np.ndarray) -> float:
    """Max-norm over all components (the C-norm)."""
    arr = np.asarray(values, dtype=float)
    return float(np.max(np.abs(arr))) if arr.size else 0.0
