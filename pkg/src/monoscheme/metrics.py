"""Quantifying nonmonotonicity of mesh functions.

Tools here answer three questions about a discrete solution:

* does it oscillate from point to point (strict alternating local extrema
  at every step of an interval)?
* how rough is it: the maximal change per mesh step, a functional that is
  Lipschitz with constant 2 in the max-norm;
* where and how sharp are its local extrema in 3D: counts over a region,
  and the sharpness pair (a, b) = (worst maximal neighbor jump, worst
  minimal neighbor jump) over a set of extrema. b near machine epsilon
  flags flat plateaus that the strict comparison still counts.

check_damping_bound verifies, on actual data, the interval that bounds the
roughness ratio of the smoothed auxiliary solution in terms of the base
solution's roughness, the smoother's damping factor, and the closeness of
the two solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .grid import Mesh3D, MeshFunction, norm_c

#: Lipschitz constant of max_step_change in the C-norm.
STEP_CHANGE_LIPSCHITZ = 2.0

Region3D = tuple[tuple[int, int], tuple[int, int], tuple[int, int]]


class UndefinedIntervalError(ValueError):
    """Oscillation is undefined on intervals of fewer than three points."""


class EmptySetError(ValueError):
    """Sharpness metrics are undefined over an empty extremum set."""


class PremiseViolationError(ValueError):
    """A hypothesis of the damping-ratio bound fails; message names it."""


class DegenerateInputError(ValueError):
    """The base solution is already flat for the chosen roughness functional."""


# ---------------------------------------------------------------------------
# 1D oscillation and roughness
# ---------------------------------------------------------------------------


def oscillates_point_to_point(u: Sequence[float], k: int = 0, l: int | None = None) -> bool:
    """True iff u alternates strict local maxima and minima on k..l.

    Every interior index of one parity must be a strict local minimum and
    every index of the other parity a strict local maximum; equivalently the
    consecutive differences on the interval are nonzero and alternate sign.
    """
    arr = np.asarray(u, dtype=float)
    if l is None:
        l = len(arr) - 1
    if k > l:
        raise ValueError(f"need k <= l, got k={k}, l={l}")
    if not (0 <= k and l < len(arr)):
        raise IndexError(f"interval {k}..{l} outside sequence of {len(arr)} points")
    if l - k < 2:
        raise UndefinedIntervalError(f"interval {k}..{l} has fewer than 3 points")
    d = np.diff(arr[k : l + 1])
    if np.any(d == 0.0):
        return False
    return bool(np.all(d[:-1] * d[1:] < 0.0))


def max_step_change(u: Sequence[float], k: int = 0, l: int | None = None) -> float:
    """max |u_{i+1} - u_i| over i = k..l-1.

    Satisfies |f(u) - f(v)| <= 2 ||u - v||_C: each step change moves by at
    most twice the pointwise perturbation.
    """
    arr = np.asarray(u, dtype=float)
    if l is None:
        l = len(arr) - 1
    if l <= k:
        raise ValueError(f"need l > k, got k={k}, l={l}")
    if not (0 <= k and l < len(arr)):
        raise IndexError(f"interval {k}..{l} outside sequence of {len(arr)} points")
    return float(np.max(np.abs(np.diff(arr[k : l + 1]))))


# ---------------------------------------------------------------------------
# 3D extrema and sharpness
# ---------------------------------------------------------------------------


def _region_or_interior(u: MeshFunction, region: Region3D | None) -> Region3D:
    N = u.mesh.N
    if region is None:
        return ((1, N - 2), (1, N - 2), (1, N - 2))
    return region


def _extrema_masks(u: MeshFunction, region: Region3D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Boolean (N,N,N) masks: cells in region with all six neighbors in mesh,
    strict-max cells, strict-min cells."""
    if not isinstance(u.mesh, Mesh3D):
        raise TypeError("extremum counting is defined for 3D mesh functions")
    N = u.mesh.N
    g = u.as_grid()
    (i0, i1), (j0, j1), (k0, k1) = region
    inside = np.zeros((N, N, N), dtype=bool)
    lo_i, hi_i = max(i0, 1), min(i1, N - 2)
    lo_j, hi_j = max(j0, 1), min(j1, N - 2)
    lo_k, hi_k = max(k0, 1), min(k1, N - 2)
    if lo_i > hi_i or lo_j > hi_j or lo_k > hi_k:
        return inside, inside, inside
    inside[lo_i : hi_i + 1, lo_j : hi_j + 1, lo_k : hi_k + 1] = True

    is_max = inside.copy()
    is_min = inside.copy()
    for axis in range(3):
        for shift in (1, -1):
            nbr = np.roll(g, shift, axis=axis)
            is_max &= g > nbr
            is_min &= g < nbr
    # np.roll wraps around, but wrapped comparisons only affect edge cells,
    # which `inside` already excludes.
    return inside, is_max, is_min


def count_extrema_3d(u: MeshFunction, region: Region3D | None = None) -> int:
    """Strict local extrema of u over the region.

    A cell counts when it is strictly greater than all six axis neighbors or
    strictly less than all six; ties never count. Cells lacking a full
    neighbor set (mesh-edge cells) are excluded, so the default region is the
    interior. An empty region yields zero.
    """
    region = _region_or_interior(u, region)
    _, is_max, is_min = _extrema_masks(u, region)
    return int(np.count_nonzero(is_max) + np.count_nonzero(is_min))


def extremum_cells(u: MeshFunction, region: Region3D | None = None) -> list[tuple[int, int, int]]:
    """The (i, j, k) triples counted by count_extrema_3d, in flat-index order."""
    region = _region_or_interior(u, region)
    _, is_max, is_min = _extrema_masks(u, region)
    either = is_max | is_min
    ii, jj, kk = np.nonzero(either)
    cells = sorted(zip(ii.tolist(), jj.tolist(), kk.tolist()), key=lambda c: c[0] + c[1] * u.mesh.N + c[2] * u.mesh.N**2)
    return cells


def sharpness_metrics(
    u: MeshFunction, cells: Iterable[tuple[int, int, int]] | Region3D
) -> tuple[float, float]:
    """(a, b) over a set S of cells: a = max over S of the largest absolute
    jump to a six-neighbor, b = max over S of the smallest such jump.

    S may be given as explicit (i, j, k) triples or as a region, in which
    case every full-neighbor cell of the region belongs to S.
    """
    if not isinstance(u.mesh, Mesh3D):
        raise TypeError("sharpness metrics are defined for 3D mesh functions")
    N = u.mesh.N
    if isinstance(cells, tuple) and len(cells) == 3 and all(
        isinstance(r, tuple) and len(r) == 2 for r in cells
    ):
        inside, _, _ = _extrema_masks(u, cells)
        ii, jj, kk = np.nonzero(inside)
        cell_list = list(zip(ii.tolist(), jj.tolist(), kk.tolist()))
    else:
        cell_list = list(cells)
    if not cell_list:
        raise EmptySetError("sharpness metrics are undefined for an empty set")
    g = u.as_grid()
    a = 0.0
    b = 0.0
    for (i, j, k) in cell_list:
        if not (1 <= i <= N - 2 and 1 <= j <= N - 2 and 1 <= k <= N - 2):
            raise ValueError(f"cell ({i}, {j}, {k}) lacks a full six-neighbor set")
        c = g[i, j, k]
        jumps = np.abs(
            np.array(
                [
                    c - g[i + 1, j, k],
                    c - g[i - 1, j, k],
                    c - g[i, j + 1, k],
                    c - g[i, j - 1, k],
                    c - g[i, j, k + 1],
                    c - g[i, j, k - 1],
                ]
            )
        )
        a = max(a, float(jumps.max()))
        b = max(b, float(jumps.min()))
    return a, b


# ---------------------------------------------------------------------------
# Damping-ratio interval bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DampingBoundInputs:
    """Quantities entering the damping-ratio interval.

    delta: roughness of the base solution, f(u) > 0.
    k: damping factor of the smoother on the base solution, f(Mu)/f(u).
    epsilon: C-norm distance between base and auxiliary solutions.
    lipschitz: Lipschitz constant of f (2 for max_step_change).
    norm_m: C-norm of the smoothing operator (1 for the averaging smoothers).
    """

    delta: float
    k: float
    epsilon: float
    lipschitz: float = STEP_CHANGE_LIPSCHITZ
    norm_m: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0 < self.k < 1:
            raise ValueError(f"k must lie in (0, 1), got {self.k}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def damping_bound_interval(inp: DampingBoundInputs) -> tuple[float, float]:
    """Open interval (lo, hi) containing f(Mv)/delta.

        lo = (k*delta - K*||M||*eps) / (delta + eps)
        hi = (k*delta + K*||M||*eps) / (delta - eps)

    Requires the premises K*||M||*eps < k*delta and eps < delta; violation
    raises with the failing inequality spelled out.
    """
    spread = inp.lipschitz * inp.norm_m * inp.epsilon
    if not spread < inp.k * inp.delta:
        raise PremiseViolationError(
            f"premise K*||M||*eps < k*delta fails: {spread:.6g} >= {inp.k * inp.delta:.6g}"
        )
    if not inp.epsilon < inp.delta:
        raise PremiseViolationError(
            f"premise eps < delta fails: {inp.epsilon:.6g} >= {inp.delta:.6g}"
        )
    lo = (inp.k * inp.delta - spread) / (inp.delta + inp.epsilon)
    hi = (inp.k * inp.delta + spread) / (inp.delta - inp.epsilon)
    return lo, hi


@dataclass(frozen=True)
class DampingCheck:
    """Record of one end-to-end verification of the damping-ratio bound."""

    delta: float
    k: float
    epsilon: float
    k1: float
    lo: float
    hi: float
    premises_hold: bool
    inside: bool
    failed_premise: str = ""

    @property
    def passed(self) -> bool:
        return self.premises_hold and self.inside

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "k": self.k,
            "epsilon": self.epsilon,
            "k1": self.k1,
            "lo": self.lo,
            "hi": self.hi,
            "premises_hold": self.premises_hold,
            "inside": self.inside,
            "failed_premise": self.failed_premise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DampingCheck":
        return cls(**d)


def check_damping_bound(
    u: np.ndarray,
    v: np.ndarray,
    smooth: Callable[[np.ndarray], np.ndarray],
    roughness: Callable[[np.ndarray], float] = max_step_change,
    lipschitz: float = STEP_CHANGE_LIPSCHITZ,
    norm_m: float = 1.0,
) -> DampingCheck:
    """Verify the damping-ratio interval on a concrete (u, v) pair.

    Computes delta = f(u), k = f(Mu)/delta, eps = ||u - v||_C and
    k1 = f(Mv)/delta, checks the premises, and reports whether k1 falls in
    the predicted interval. v identical to u is the eps = 0 edge case: the
    interval collapses onto k and the check passes trivially.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    delta = float(roughness(u))
    if delta == 0.0:
        raise DegenerateInputError("base solution is flat: f(u) = 0")
    k = float(roughness(smooth(u))) / delta
    eps = norm_c(u - v)
    k1 = float(roughness(smooth(v))) / delta
    if eps == 0.0:
        return DampingCheck(
            delta=delta, k=k, epsilon=0.0, k1=k1, lo=k, hi=k,
            premises_hold=True, inside=bool(k1 == k),
        )
    try:
        inputs = DampingBoundInputs(
            delta=delta, k=k, epsilon=eps, lipschitz=lipschitz, norm_m=norm_m
        )
        lo, hi = damping_bound_interval(inputs)
    except (ValueError, PremiseViolationError) as exc:
        return DampingCheck(
            delta=delta, k=k, epsilon=eps, k1=k1, lo=float("nan"), hi=float("nan"),
            premises_hold=False, inside=False, failed_premise=str(exc),
        )
    return DampingCheck(
        delta=delta, k=k, epsilon=eps, k1=k1, lo=lo, hi=hi,
        premises_hold=True, inside=bool(lo < k1 < hi),
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    """Summary of the nonmonotonicity of one solution field."""

    f_value: float
    extremum_count: int
    sharpness_a: float
    sharpness_b: float
    region: str
    oscillates: bool | None = None

    def to_dict(self) -> dict:
        return {
            "f_value": self.f_value,
            "extremum_count": self.extremum_count,
            "sharpness_a": self.sharpness_a,
            "sharpness_b": self.sharpness_b,
            "region": self.region,
            "oscillates": self.oscillates,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MonotonicityReport":
        return cls(**d)


def report_1d(full_sequence: Sequence[float]) -> MonotonicityReport:
    """Monotonicity report for a full 1D node sequence (boundary included).

    Oscillation is detected over the interior nodes 1..n; sharpness uses the
    two-neighbor analog of the 3D pair.
    """
    arr = np.asarray(full_sequence, dtype=float)
    max_jumps = []
    min_jumps = []
    for i in range(1, len(arr) - 1):
        if (arr[i] > arr[i - 1] and arr[i] > arr[i + 1]) or (
            arr[i] < arr[i - 1] and arr[i] < arr[i + 1]
        ):
            left = abs(arr[i] - arr[i - 1])
            right = abs(arr[i] - arr[i + 1])
            max_jumps.append(max(left, right))
            min_jumps.append(min(left, right))
    osc = None
    for lo, hi in ((1, len(arr) - 2), (0, len(arr) - 1)):
        try:
            osc = oscillates_point_to_point(arr, lo, hi)
            break
        except UndefinedIntervalError:
            continue
    return MonotonicityReport(
        f_value=max_step_change(arr),
        extremum_count=len(max_jumps),
        sharpness_a=float(max(max_jumps)) if max_jumps else 0.0,
        sharpness_b=float(max(min_jumps)) if min_jumps else 0.0,
        region=f"nodes 0..{len(arr) - 1}",
        oscillates=osc,
    )


def report_3d(u: MeshFunction, region: Region3D | None = None) -> MonotonicityReport:
    """Monotonicity report for a 3D mesh function over a region."""
    region = _region_or_interior(u, region)
    count = count_extrema_3d(u, region)
    cells = extremum_cells(u, region)
    if cells:
        a, b = sharpness_metrics(u, cells)
    else:
        a, b = 0.0, 0.0
    g = u.as_grid()
    (i0, i1), (j0, j1), (k0, k1) = region
    sub = g[max(i0, 0) : i1 + 1, max(j0, 0) : j1 + 1, max(k0, 0) : k1 + 1]
    steps = [np.abs(np.diff(sub, axis=ax)) for ax in range(3)]
    f_val = max((float(s.max()) for s in steps if s.size), default=0.0)
    return MonotonicityReport(
        f_value=f_val,
        extremum_count=count,
        sharpness_a=a,
        sharpness_b=b,
        region=f"cells [{i0}..{i1}]x[{j0}..{j1}]x[{k0}..{k1}]",
        oscillates=None,
    )


__all__ = [
    "DampingBoundInputs",
    "DampingCheck",
    "DegenerateInputError",
    "EmptySetError",
    "MonotonicityReport",
    "PremiseViolationError",
    "Region3D",
    "STEP_CHANGE_LIPSCHITZ",
    "UndefinedIntervalError",
    "check_damping_bound",
    "count_extrema_3d",
    "damping_bound_interval",
    "extremum_cells",
    "max_step_change",
    "oscillates_point_to_point",
    "report_1d",
    "report_3d",
    "sharpness_metrics",
]
