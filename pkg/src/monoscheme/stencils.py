"""Difference-derivative stencils and the smoothing operators, 1D and 3D.

1D operators act on interior node values with the two Dirichlet end values
supplied as known data; every row is the 3-point stencil

    first derivative   (-1, 0, +1) / (2h)
    second derivative  ( 1, -2, 1) / h^2
    smoothing          (1/4, 1/2, 1/4)

The smoothing operator is the local average ((u_{i+1}+u_i)/2 + (u_i+u_{i-1})/2)/2;
it maps constants to themselves and annihilates the alternating +-A mode.

The 3D counterpart is the seven-point symmetric average over the six axis
neighbors: (Mu)_ijk = u_ijk/2 + (1/12) * sum of neighbors. Where a neighbor
cell falls outside the mesh its value is supplied by a per-face ghost rule
(GhostSpec3D): a fixed boundary value, the mirrored first interior value
(zero normal derivative), or linear extrapolation. The extrapolation ghost
(2*u_edge - u_next) makes the shared central-difference kernel reproduce the
one-sided first derivative at that face; it must not feed second derivatives
or the smoother (it zeroes the former and is asymmetric for the latter).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .grid import BoundaryData1D, Mesh1D, Mesh3D, MeshFunction, norm_c


class SolverError(RuntimeError):
    """Base class for linear/iterative solve failures."""


class SingularOperatorError(SolverError):
    """A direct solve hit a singular (or numerically singular) matrix."""


class IterationFailureError(SolverError):
    """An iterative solve did not reach its residual tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


# ---------------------------------------------------------------------------
# 1D operators
# ---------------------------------------------------------------------------


class StencilKind(Enum):
    FIRST_DERIVATIVE = "first_derivative"
    SECOND_DERIVATIVE = "second_derivative"
    SMOOTH = "smooth"
    IDENTITY = "identity"


#: Unscaled 3-point rows (left, center, right); the scale carrying h lives in
#: StencilOperator1D.scale.
_ROWS = {
    StencilKind.FIRST_DERIVATIVE: (-0.5, 0.0, 0.5),
    StencilKind.SECOND_DERIVATIVE: (1.0, -2.0, 1.0),
    StencilKind.SMOOTH: (0.25, 0.5, 0.25),
    StencilKind.IDENTITY: (0.0, 1.0, 0.0),
}


@dataclass(frozen=True)
class StencilOperator1D:
    """A 3-point operator on interior nodes; boundary rows consume the
    Dirichlet end values as known affine contributions, not unknowns."""

    kind: StencilKind
    mesh: Mesh1D

    @property
    def scale(self) -> float:
        h = self.mesh.h
        if self.kind is StencilKind.FIRST_DERIVATIVE:
            return 1.0 / h
        if self.kind is StencilKind.SECOND_DERIVATIVE:
            return 1.0 / h**2
        return 1.0

    def row(self) -> tuple[float, float, float]:
        lo, c, hi = _ROWS[self.kind]
        s = self.scale
        return (lo * s, c * s, hi * s)

    def matrix(self) -> np.ndarray:
        """Dense interior matrix (n x n); boundary columns are dropped."""
        lo, c, hi = self.row()
        n = self.mesh.n
        m = np.zeros((n, n))
        idx = np.arange(n)
        m[idx, idx] = c
        m[idx[1:], idx[:-1]] = lo
        m[idx[:-1], idx[1:]] = hi
        return m

    def boundary_offset(self, bc: BoundaryData1D) -> np.ndarray:
        """Affine contribution of the end values: nonzero in rows 1 and n."""
        lo, _, hi = self.row()
        n = self.mesh.n
        off = np.zeros(n)
        off[0] = lo * bc.u0
        off[-1] = hi * bc.u_np1
        return off

    def apply(self, u: MeshFunction, bc: BoundaryData1D) -> MeshFunction:
        lo, c, hi = self.row()
        ext = np.concatenate(([bc.u0], u.values, [bc.u_np1]))
        out = lo * ext[:-2] + c * ext[1:-1] + hi * ext[2:]
        return u.with_values(out)


def first_derivative_1d(u: MeshFunction, bc: BoundaryData1D) -> MeshFunction:
    """(u_{i+1} - u_{i-1}) / 2h at every interior node."""
    return StencilOperator1D(StencilKind.FIRST_DERIVATIVE, u.mesh).apply(u, bc)


def second_derivative_1d(u: MeshFunction, bc: BoundaryData1D) -> MeshFunction:
    """(u_{i+1} - 2u_i + u_{i-1}) / h^2 at every interior node."""
    return StencilOperator1D(StencilKind.SECOND_DERIVATIVE, u.mesh).apply(u, bc)


def smooth_1d(u: MeshFunction, bc: BoundaryData1D) -> MeshFunction:
    """(u_{i+1} + 2u_i + u_{i-1}) / 4 at every interior node."""
    return StencilOperator1D(StencilKind.SMOOTH, u.mesh).apply(u, bc)


def smooth_bands_1d(n: int) -> np.ndarray:
    """The (1/4, 1/2, 1/4) tridiagonal in solve_banded's (3, n) layout."""
    ab = np.zeros((3, n))
    ab[0, 1:] = 0.25
    ab[1, :] = 0.5
    ab[2, :-1] = 0.25
    return ab


def solve_smooth_1d(b: MeshFunction, bc: BoundaryData1D) -> MeshFunction:
    """Direct tridiagonal solve of smooth_1d(a, bc) = b.

    The interior matrix has eigenvalues 1/2 + cos(theta)/2 > 0, so a singular
    factorization indicates a bug rather than a legitimate math case.
    """
    n = b.mesh.n
    rhs = b.values.astype(float).copy()
    rhs[0] -= 0.25 * bc.u0
    rhs[-1] -= 0.25 * bc.u_np1
    try:
        a = scipy.linalg.solve_banded((1, 1), smooth_bands_1d(n), rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - indicates a bug
        raise SingularOperatorError(f"smoothing solve failed: {exc}") from exc
    return b.with_values(a)


# ---------------------------------------------------------------------------
# 3D ghost machinery
# ---------------------------------------------------------------------------

FACES = ("xlo", "xhi", "ylo", "yhi", "zlo", "zhi")


@dataclass(frozen=True)
class FaceGhost:
    """Ghost rule on one face: kind in {"value", "mirror", "extrapolate"}."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("value", "mirror", "extrapolate"):
            raise ValueError(f"unknown ghost kind {self.kind!r}")


@dataclass(frozen=True)
class FaceRule:
    """Ghost rule for a face, with an optional square patch override.

    The patch covers transverse cell indices lo..hi (inclusive) in both
    tangential directions; outside it the base rule applies. This realizes
    pressure holes in otherwise-walled faces.
    """

    base: FaceGhost
    patch: FaceGhost | None = None
    patch_lo: int = 0
    patch_hi: int = -1


@dataclass(frozen=True)
class GhostSpec3D:
    """Per-face ghost rules for one scalar variable on a Mesh3D."""

    xlo: FaceRule
    xhi: FaceRule
    ylo: FaceRule
    yhi: FaceRule
    zlo: FaceRule
    zhi: FaceRule

    @classmethod
    def uniform(cls, ghost: FaceGhost) -> "GhostSpec3D":
        rule = FaceRule(base=ghost)
        return cls(*(rule for _ in FACES))

    def rules(self) -> tuple[FaceRule, ...]:
        return (self.xlo, self.xhi, self.ylo, self.yhi, self.zlo, self.zhi)

    def has_extrapolation(self) -> bool:
        return any(
            r.base.kind == "extrapolate" or (r.patch is not None and r.patch.kind == "extrapolate")
            for r in self.rules()
        )


MIRROR_ALL = GhostSpec3D.uniform(FaceGhost("mirror"))


@dataclass(frozen=True)
class BoundaryPolicy3D:
    """Ghost specs for the four flow variables on one Mesh3D."""

    vx: GhostSpec3D
    vy: GhostSpec3D
    vz: GhostSpec3D
    p: GhostSpec3D

    def velocity(self, axis: int) -> GhostSpec3D:
        return (self.vx, self.vy, self.vz)[axis]


def _fill_face(pad: np.ndarray, face: str, rule: FaceRule) -> None:
    """Write one ghost layer of the padded (N+2)^3 array in place."""
    n = pad.shape[0] - 2
    axis = "xyz".index(face[0])
    lo_side = face.endswith("lo")

    def layer(depth: int) -> np.ndarray:
        # depth 0 is the ghost layer itself, 1 the edge cells, 2 one row in.
        idx = depth if lo_side else pad.shape[axis] - 1 - depth
        sl = [slice(1, -1)] * 3
        sl[axis] = idx
        return pad[tuple(sl)]

    def ghost_for(g: FaceGhost) -> np.ndarray:
        if g.kind == "value":
            return np.full((n, n), g.value)
        if g.kind == "mirror":
            return layer(1)
        return 2.0 * layer(1) - layer(2)

    ghost = ghost_for(rule.base)
    if rule.patch is not None:
        lo, hi = rule.patch_lo, rule.patch_hi
        patch_ghost = ghost_for(rule.patch)
        ghost = ghost.copy()
        ghost[lo : hi + 1, lo : hi + 1] = patch_ghost[lo : hi + 1, lo : hi + 1]
    sl = [slice(1, -1)] * 3
    sl[axis] = 0 if lo_side else pad.shape[axis] - 1
    pad[tuple(sl)] = ghost


def pad_grid(grid: np.ndarray, spec: GhostSpec3D) -> np.ndarray:
    """(N+2)^3 array from an (N,N,N) one: cells plus one ghost layer per the
    spec. Ghost edges and corners are left at zero; axis stencils never read
    them."""
    N = grid.shape[0]
    pad = np.zeros((N + 2, N + 2, N + 2))
    pad[1:-1, 1:-1, 1:-1] = grid
    for face, rule in zip(FACES, spec.rules()):
        _fill_face(pad, face, rule)
    return pad


def padded_grid(u: MeshFunction, spec: GhostSpec3D) -> np.ndarray:
    """pad_grid of a mesh function's (N,N,N) view."""
    return pad_grid(u.as_grid(), spec)


def gradient_3d(u: MeshFunction, axis: int, spec: GhostSpec3D) -> MeshFunction:
    """Central difference along one axis with ghost-resolved neighbors.

    With an extrapolation ghost on a face this evaluates to the one-sided
    first-order difference at that face's cells.
    """
    pad = padded_grid(u, spec)
    h = u.mesh.h
    sl_p = [slice(1, -1)] * 3
    sl_m = [slice(1, -1)] * 3
    sl_p[axis] = slice(2, None)
    sl_m[axis] = slice(0, -2)
    out = (pad[tuple(sl_p)] - pad[tuple(sl_m)]) / (2.0 * h)
    return MeshFunction.from_grid(u.mesh, out)


def laplacian_3d(u: MeshFunction, spec: GhostSpec3D) -> MeshFunction:
    """Sum of the three second central differences."""
    pad = padded_grid(u, spec)
    h2 = u.mesh.h ** 2
    core = pad[1:-1, 1:-1, 1:-1]
    out = (
        pad[2:, 1:-1, 1:-1] + pad[:-2, 1:-1, 1:-1]
        + pad[1:-1, 2:, 1:-1] + pad[1:-1, :-2, 1:-1]
        + pad[1:-1, 1:-1, 2:] + pad[1:-1, 1:-1, :-2]
        - 6.0 * core
    ) / h2
    return MeshFunction.from_grid(u.mesh, out)


def divergence_3d(
    vx: MeshFunction, vy: MeshFunction, vz: MeshFunction, policy: BoundaryPolicy3D
) -> MeshFunction:
    """d(vx)/dx + d(vy)/dy + d(vz)/dz with each component's own ghost spec."""
    gx = gradient_3d(vx, 0, policy.vx)
    gy = gradient_3d(vy, 1, policy.vy)
    gz = gradient_3d(vz, 2, policy.vz)
    return vx.with_values(gx.values + gy.values + gz.values)


def smooth_3d(u: MeshFunction, spec: GhostSpec3D = MIRROR_ALL) -> MeshFunction:
    """Seven-point average u/2 + (sum of six axis neighbors)/12.

    Neighbors beyond the mesh are supplied by the ghost spec; the default
    mirror-everywhere spec preserves constants on the whole mesh.
    """
    pad = padded_grid(u, spec)
    core = pad[1:-1, 1:-1, 1:-1]
    nbr_sum = (
        pad[2:, 1:-1, 1:-1] + pad[:-2, 1:-1, 1:-1]
        + pad[1:-1, 2:, 1:-1] + pad[1:-1, :-2, 1:-1]
        + pad[1:-1, 1:-1, 2:] + pad[1:-1, 1:-1, :-2]
    )
    return MeshFunction.from_grid(u.mesh, 0.5 * core + nbr_sum / 12.0)


def solve_smooth_3d(
    b: MeshFunction,
    spec: GhostSpec3D = MIRROR_ALL,
    tol: float = 1e-10,
    max_iters: int = 20000,
) -> MeshFunction:
    """Iterative solve of smooth_3d(a, spec) = b to max-norm residual <= tol.

    Conjugate gradients on the symmetric positive-definite seven-point
    system, matrix-free. Deterministic: fixed iteration order, plain numpy
    reductions. Mirror/value ghost rules keep the system symmetric;
    extrapolation ghosts are rejected.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.has_extrapolation():
        raise ValueError("extrapolation ghosts make the smoothing system asymmetric")

    # Split the affine ghost contribution: A x = smooth(x) - smooth(0).
    zero = b.with_values(np.zeros_like(b.values))
    affine = smooth_3d(zero, spec).values

    def apply_a(x: np.ndarray) -> np.ndarray:
        return smooth_3d(b.with_values(x), spec).values - affine

    rhs = b.values - affine
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rs = float(r @ r)
    for _ in range(max_iters):
        if norm_c(r) <= tol:
            true_r = b.values - smooth_3d(b.with_values(x), spec).values
            if norm_c(true_r) <= tol:
                return b.with_values(x)
            r = true_r
            p = r.copy()
            rs = float(r @ r)
        ap = apply_a(p)
        denom = float(p @ ap)
        if denom == 0.0:
            break
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    final = norm_c(b.values - smooth_3d(b.with_values(x), spec).values)
    if final <= tol:
        return b.with_values(x)
    raise IterationFailureError(
        f"smoothing solve stalled at residual {final:.3e} (tol {tol:.3e})", final
    )


# ---------------------------------------------------------------------------
# Operator norms
# ---------------------------------------------------------------------------


def operator_norm_c(op) -> float:
    """Max-norm induced operator norm: max over rows of sum |coefficients|.

    Accepts a StencilOperator1D or a (Mesh3D, GhostSpec3D) pair describing
    the 3D smoothing operator. Rows are taken over unknowns only; ghost
    values fixed by a "value" rule are affine data, so their coefficient
    leaves the row.
    """
    if isinstance(op, StencilOperator1D):
        lo, c, hi = op.row()
        interior = abs(lo) + abs(c) + abs(hi)
        left = abs(c) + abs(hi)
        right = abs(lo) + abs(c)
        if op.mesh.n == 1:
            return abs(c)
        return max(interior if op.mesh.n > 2 else 0.0, left, right)

    mesh, spec = op
    return _smooth_3d_norm(mesh, spec)


def _smooth_3d_norm(mesh: Mesh3D, spec: GhostSpec3D) -> float:
    if spec.has_extrapolation():
        raise ValueError("extrapolation ghosts are not part of the smoothing operator")
    N = mesh.N
    rules = dict(zip(FACES, spec.rules()))

    def face_kind(face: str, t1: int, t2: int) -> str:
        rule = rules[face]
        g = rule.base
        if rule.patch is not None and rule.patch_lo <= t1 <= rule.patch_hi and rule.patch_lo <= t2 <= rule.patch_hi:
            g = rule.patch
        return g.kind

    worst = 0.0
    for k in range(N):
        for j in range(N):
            for i in range(N):
                # Center 1/2; each in-mesh neighbor 1/12; a mirror ghost folds
                # its 1/12 onto the center; a value ghost leaves the row.
                twelfths = 0
                for axis, (t1, t2, c) in enumerate(((j, k, i), (i, k, j), (i, j, k))):
                    for side, edge in (("lo", 0), ("hi", N - 1)):
                        if c == edge:
                            if face_kind("xyz"[axis] + side, t1, t2) == "mirror":
                                twelfths += 1
                        else:
                            twelfths += 1
                worst = max(worst, 0.5 + twelfths / 12.0)
    return worst


__all__ = [
    "BoundaryPolicy3D",
    "FaceGhost",
    "FaceRule",
    "GhostSpec3D",
    "IterationFailureError",
    "MIRROR_ALL",
    "SingularOperatorError",
    "SolverError",
    "StencilKind",
    "StencilOperator1D",
    "divergence_3d",
    "first_derivative_1d",
    "gradient_3d",
    "laplacian_3d",
    "operator_norm_c",
    "pad_grid",
    "padded_grid",
    "second_derivative_1d",
    "smooth_1d",
    "smooth_3d",
    "smooth_bands_1d",
    "solve_smooth_1d",
    "solve_smooth_3d",
]
