import numpy as np
import pytest

from monoscheme.grid import Mesh3D, MeshFunction, norm_c
from monoscheme.metrics import (
    DampingBoundInputs,
    DegenerateInputError,
    EmptySetError,
    PremiseViolationError,
    UndefinedIntervalError,
    check_damping_bound,
    count_extrema_3d,
    damping_bound_interval,
    extremum_cells,
    max_step_change,
    oscillates_point_to_point,
    report_1d,
    report_3d,
    sharpness_metrics,
)

RNG = np.random.default_rng(20240814)


def brute_extrema(g, region):
    (i0, i1), (j0, j1), (k0, k1) = region
    N = g.shape[0]
    cells = []
    for i in range(max(i0, 1), min(i1, N - 2) + 1):
        for j in range(max(j0, 1), min(j1, N - 2) + 1):
            for k in range(max(k0, 1), min(k1, N - 2) + 1):
                nb = [g[i + 1, j, k], g[i - 1, j, k], g[i, j + 1, k],
                      g[i, j - 1, k], g[i, j, k + 1], g[i, j, k - 1]]
                c = g[i, j, k]
                if all(c > x for x in nb) or all(c < x for x in nb):
                    cells.append((i, j, k))
    return cells


def brute_sharpness(g, cells):
    a = b = 0.0
    for (i, j, k) in cells:
        jumps = [abs(g[i, j, k] - g[i + d, j + e, k + f])
                 for d, e, f in ((1, 0, 0), (-1, 0, 0), (0, 1, 0),
                                 (0, -1, 0), (0, 0, 1), (0, 0, -1))]
        a = max(a, max(jumps))
        b = max(b, min(jumps))
    return a, b


class TestOscillationDetector:
    def test_canonical_alternation(self):
        assert oscillates_point_to_point([0, 1, 0, 1, 0], 0, 4)

    def test_monotone_sequence(self):
        assert not oscillates_point_to_point([0, 1, 2, 3], 0, 3)

    def test_equality_breaks_strictness(self):
        assert not oscillates_point_to_point([0, 1, 1, 0], 0, 3)

    def test_interval_too_short(self):
        with pytest.raises(UndefinedIntervalError):
            oscillates_point_to_point([0, 1, 0], 1, 2)

    def test_subinterval(self):
        seq = [0, 1, 2, 3, 2, 3, 2]
        assert not oscillates_point_to_point(seq, 0, 6)
        assert oscillates_point_to_point(seq, 3, 6)


class TestMaxStepChange:
    def test_examples(self):
        assert max_step_change([0, 1, 0]) == 1.0
        assert max_step_change([5, 5, 5, 5]) == 0.0
        assert max_step_change([0.5, 2.0, -1.0]) == 3.0

    def test_requires_interval(self):
        with pytest.raises(ValueError):
            max_step_change([1.0], 0, 0)

    def test_lipschitz_bound_random_pairs(self):
        for _ in range(200):
            n = int(RNG.integers(3, 40))
            u = RNG.standard_normal(n)
            v = u + RNG.standard_normal(n) * RNG.uniform(0.001, 2.0)
            gap = abs(max_step_change(u) - max_step_change(v))
            assert gap <= 2.0 * norm_c(u - v) + 1e-12

    def test_smoothing_reduces_alternation(self):
        # Constant-amplitude alternation around a level: smoothing flattens
        # the interior, strictly shrinking the maximal step.
        for n in (5, 9, 16):
            i = np.arange(n + 2)
            seq = 1.0 + 0.5 * (-1.0) ** i
            smoothed = seq.copy()
            smoothed[1:-1] = (seq[2:] + 2 * seq[1:-1] + seq[:-2]) / 4.0
            assert oscillates_point_to_point(seq, 0, n + 1)
            assert max_step_change(smoothed) < max_step_change(seq)


class TestExtrema3D:
    def test_single_spike(self):
        mesh = Mesh3D(1.0, 5)
        g = np.zeros((5, 5, 5))
        g[2, 2, 2] = 1.0
        assert count_extrema_3d(MeshFunction.from_grid(mesh, g)) == 1

    def test_linear_field_has_none(self):
        mesh = Mesh3D(1.0, 6)
        g = np.fromfunction(lambda i, j, k: i * 1.0, (6, 6, 6))
        assert count_extrema_3d(MeshFunction.from_grid(mesh, g)) == 0

    def test_ties_are_not_extrema(self):
        mesh = Mesh3D(1.0, 5)
        g = np.zeros((5, 5, 5))
        g[2, 2, 2] = 1.0
        g[3, 2, 2] = 1.0  # plateau pair: neither cell strictly exceeds all six
        assert count_extrema_3d(MeshFunction.from_grid(mesh, g)) == 0

    def test_empty_region_counts_zero(self):
        mesh = Mesh3D(1.0, 5)
        u = MeshFunction(mesh, RNG.standard_normal(125))
        assert count_extrema_3d(u, ((2, 1), (0, 4), (0, 4))) == 0

    @pytest.mark.parametrize("trial", range(25))
    def test_matches_brute_force(self, trial):
        rng = np.random.default_rng(1000 + trial)
        n = int(rng.integers(3, 6))
        mesh = Mesh3D(1.0, n)
        u = MeshFunction(mesh, rng.standard_normal(n**3))
        region = ((0, n - 1),) * 3
        cells = brute_extrema(u.as_grid(), region)
        assert count_extrema_3d(u, region) == len(cells)
        assert extremum_cells(u, region) == sorted(
            cells, key=lambda c: c[0] + n * c[1] + n * n * c[2]
        )


class TestSharpness:
    def test_spike_examples(self):
        mesh = Mesh3D(1.0, 5)
        g = np.zeros((5, 5, 5))
        g[2, 2, 2] = 1.0
        u = MeshFunction.from_grid(mesh, g)
        assert sharpness_metrics(u, [(2, 2, 2)]) == (1.0, 1.0)
        g2 = g.copy()
        g2[3, 2, 2] = 0.8  # neighbor jumps (1, 1, 1, 1, 1, 0.2)
        u2 = MeshFunction.from_grid(mesh, g2)
        a, b = sharpness_metrics(u2, [(2, 2, 2)])
        assert a == pytest.approx(1.0)
        assert b == pytest.approx(0.2)

    def test_empty_set_raises(self):
        mesh = Mesh3D(1.0, 5)
        u = MeshFunction(mesh, np.zeros(125))
        with pytest.raises(EmptySetError):
            sharpness_metrics(u, [])

    @pytest.mark.parametrize("trial", range(10))
    def test_matches_brute_force(self, trial):
        rng = np.random.default_rng(2000 + trial)
        mesh = Mesh3D(1.0, 5)
        u = MeshFunction(mesh, rng.standard_normal(125))
        cells = extremum_cells(u)
        if not cells:
            pytest.skip("no extrema drawn")
        assert sharpness_metrics(u, cells) == brute_sharpness(u.as_grid(), cells)

    def test_region_form(self):
        mesh = Mesh3D(1.0, 5)
        u = MeshFunction(mesh, RNG.standard_normal(125))
        region = ((1, 3), (1, 3), (1, 3))
        a, b = sharpness_metrics(u, region)
        cells = [(i, j, k) for i in (1, 2, 3) for j in (1, 2, 3) for k in (1, 2, 3)]
        assert (a, b) == brute_sharpness(u.as_grid(), cells)


class TestDampingInterval:
    def test_spec_point(self):
        lo, hi = damping_bound_interval(DampingBoundInputs(delta=1.0, k=0.5, epsilon=0.01))
        assert lo == pytest.approx(0.48 / 1.01)
        assert hi == pytest.approx(0.52 / 0.99)

    def test_collapse_as_epsilon_vanishes(self):
        lo, hi = damping_bound_interval(DampingBoundInputs(delta=1.0, k=0.5, epsilon=1e-12))
        assert lo == pytest.approx(0.5, abs=1e-10)
        assert hi == pytest.approx(0.5, abs=1e-10)

    def test_premise_violation_named(self):
        with pytest.raises(PremiseViolationError, match="K"):
            damping_bound_interval(DampingBoundInputs(delta=1.0, k=0.1, epsilon=0.2))

    def test_monotone_widening_in_epsilon(self):
        eps_values = np.linspace(1e-6, 0.05, 20)
        lows, highs = [], []
        for eps in eps_values:
            lo, hi = damping_bound_interval(DampingBoundInputs(delta=1.0, k=0.5, epsilon=eps))
            lows.append(lo)
            highs.append(hi)
        assert all(a >= b for a, b in zip(lows, lows[1:]))
        assert all(a <= b for a, b in zip(highs, highs[1:]))

    def test_interval_is_positive_and_ordered(self):
        lo, hi = damping_bound_interval(DampingBoundInputs(delta=2.0, k=0.7, epsilon=0.1))
        assert 0 < lo < hi


def _smooth_full(seq: np.ndarray) -> np.ndarray:
    out = seq.copy()
    out[1:-1] = (seq[2:] + 2.0 * seq[1:-1] + seq[:-2]) / 4.0
    return out


class TestCheckDampingBound:
    def test_identical_inputs_epsilon_zero_edge(self):
        u = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
        chk = check_damping_bound(u, u.copy(), _smooth_full)
        assert chk.epsilon == 0.0
        assert chk.passed
        assert chk.k1 == chk.k

    def test_uniform_shift_is_invariant(self):
        u = np.array([(-1.0) ** i for i in range(12)])
        v = u + 1e-3
        chk = check_damping_bound(u, v, _smooth_full)
        assert chk.premises_hold
        assert chk.inside
        assert chk.k1 == pytest.approx(chk.k)

    def test_flat_input_degenerate(self):
        u = np.zeros(8)
        with pytest.raises(DegenerateInputError):
            check_damping_bound(u, u, _smooth_full)

    def test_failed_premise_reported_not_raised(self):
        u = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
        v = u + np.linspace(0, 3.0, 5)  # gross perturbation
        chk = check_damping_bound(u, v, _smooth_full)
        assert not chk.premises_hold
        assert chk.failed_premise

    def test_roundtrip_dict(self):
        u = np.array([(-1.0) ** i for i in range(12)])
        chk = check_damping_bound(u, u + 1e-3, _smooth_full)
        from monoscheme.metrics import DampingCheck

        assert DampingCheck.from_dict(chk.to_dict()) == chk


class TestReports:
    def test_report_1d_alternating(self):
        rep = report_1d([0.0, 1.0, 0.0, 1.0, 0.0])
        assert rep.oscillates
        assert rep.f_value == 1.0
        assert rep.extremum_count == 3

    def test_report_3d_roundtrip(self):
        mesh = Mesh3D(1.0, 5)
        u = MeshFunction(mesh, RNG.standard_normal(125))
        rep = report_3d(u)
        from monoscheme.metrics import MonotonicityReport

        assert MonotonicityReport.from_dict(rep.to_dict()) == rep
        assert rep.sharpness_b <= rep.sharpness_a
        assert rep.extremum_count >= 0
