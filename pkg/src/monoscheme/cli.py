"""Config-driven batch runner for the 1D and 3D experiments.

Usage:
    monoscheme run <config.cfg> [--out DIR] [--format csv|jsonl] [--seed N] [--tol X]
    monoscheme compare <report_a.json> <report_b.json> [--out DIR]

Configs are INI files with an [experiment] section naming the kind
(solve1d, solve3d, metrics, order, scan-det, timestep) and kind-specific
sections; numbers may be written as fractions ("1/30"). Bundled configs
(fig1.cfg, fig2.cfg, fig2_n10.cfg, order1d.cfg, scan.cfg, timestep1d.cfg)
resolve by name when no such file exists on disk.

Every run writes plot-ready tables (csv or json-lines), one comparable
report JSON per solution variant, and a machine-readable summary.json.
Identical configs produce bitwise-identical outputs.

Exit codes: 0 success, 2 config parse error, 3 validation error,
4 solver failure. Errors print one line: "error: <category>: <reason>".
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, asdict
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .grid import BoundaryData1D, Mesh1D, MeshFunction, Mesh3D, norm_c, with_boundary
from .metrics import (
    MonotonicityReport,
    check_damping_bound,
    count_extrema_3d,
    max_step_change,
    report_1d,
    report_3d,
    sharpness_metrics,
)
from .bvp1d import (
    SchemeCoefficients,
    analytic_solution,
    convergence_order,
    determinant_scan,
    solve_base,
    solve_monotonized,
    solve_monotonized_inverse,
)
from .ns3d import FlowConfig, centerline_profile, solve_steady
from .stencils import SolverError, StencilKind, StencilOperator1D
from .timestep import LinearMeshOperator, TimeStepConfig, run_to_steady, step_monotonized, step_monotonized_alt


class ConfigParseError(Exception):
    pass


class ValidationError(Exception):
    pass


class ComparisonError(ValidationError):
    pass


EXPERIMENTS = ("solve1d", "solve3d", "metrics", "order", "scan-det", "timestep")


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def _parse_real(text: str) -> float:
    text = text.strip()
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigParseError(f"not a number: {text!r}") from exc


def _parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigParseError(f"not an integer: {text!r}") from exc


class ConfigView:
    """Typed access to one parsed config with parse-vs-validation split."""

    def __init__(self, parser: configparser.ConfigParser):
        self._p = parser

    def section(self, name: str) -> "SectionView":
        if not self._p.has_section(name):
            raise ConfigParseError(f"missing [{name}] section")
        return SectionView(self._p[name], name)


class SectionView:
    def __init__(self, section, name: str):
        self._s = section
        self._name = name

    def _get(self, key: str, default=None):
        if key not in self._s:
            if default is None:
                raise ConfigParseError(f"missing key {key!r} in [{self._name}]")
            return None
        return self._s[key]

    def real(self, key: str, default: float | None = None) -> float:
        raw = self._get(key, default)
        return default if raw is None else _parse_real(raw)

    def integer(self, key: str, default: int | None = None) -> int:
        raw = self._get(key, default)
        return default if raw is None else _parse_int(raw)

    def text(self, key: str, default: str | None = None) -> str:
        raw = self._get(key, default)
        return default if raw is None else raw.strip()

    def reals(self, key: str) -> list[float]:
        return [_parse_real(tok) for tok in self._get(key).split()]

    def integers(self, key: str) -> list[int]:
        return [_parse_int(tok) for tok in self._get(key).split()]


def load_config(path: str) -> ConfigView:
    """Read a config from disk, falling back to the bundled ones by name."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    else:
        bundled = resources.files("monoscheme").joinpath("configs", p.name)
        if not bundled.is_file():
            raise ConfigParseError(f"config not found: {path}")
        text = bundled.read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigParseError(f"bad config syntax: {exc}") from exc
    return ConfigView(parser)


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_table(path: Path, header: list[str], rows: list[tuple], fmt: str) -> None:
    with open(path, "w") as fh:
        if fmt == "csv":
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            for row in rows:
                fh.write(json.dumps(dict(zip(header, row)), sort_keys=True) + "\n")


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class ComparableReport:
    """A per-solution record the compare subcommand can diff."""

    experiment: str
    label: str
    report: MonotonicityReport
    reference_distance_c: float | None = None
    central: MonotonicityReport | None = None

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "label": self.label,
            "report": self.report.to_dict(),
            "reference_distance_c": self.reference_distance_c,
            "central": self.central.to_dict() if self.central else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparableReport":
        return cls(
            experiment=d["experiment"],
            label=d["label"],
            report=MonotonicityReport.from_dict(d["report"]),
            reference_distance_c=d.get("reference_distance_c"),
            central=MonotonicityReport.from_dict(d["central"]) if d.get("central") else None,
        )


def _write_report(out: Path, rep: ComparableReport) -> None:
    write_json(out / f"report_{rep.label}.json", rep.to_dict())


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _coefficients(sec: SectionView) -> tuple[SchemeCoefficients, Mesh1D, BoundaryData1D]:
    c = SchemeCoefficients(
        k0=sec.real("k0"), k1=sec.real("k1"), k2=sec.real("k2"), k3=sec.real("k3")
    )
    mesh = Mesh1D(sec.real("a", 0.0), sec.real("b", 1.0), sec.integer("n"))
    bc = BoundaryData1D(sec.real("u_left"), sec.real("u_right"))
    return c, mesh, bc


def run_solve1d(cfg: ConfigView, out: Path, fmt: str, tol_override) -> dict:
    sec = cfg.section("problem")
    c, mesh, bc = _coefficients(sec)
    dense_points = sec.integer("dense_points", 100)

    base = solve_base(c, mesh, bc)
    mono = solve_monotonized(c, mesh, bc)
    inv = solve_monotonized_inverse(c, mesh, bc)

    dense_mesh = Mesh1D(mesh.a, mesh.b, dense_points - 2)
    dense = solve_base(c, dense_mesh, bc)
    xs = mesh.interior_x()
    ref = np.interp(xs, dense_mesh.all_x(), with_boundary(dense.u, bc))
    oracle = analytic_solution(c, bc, (mesh.a, mesh.b))
    exact = oracle(xs)

    u_full = with_boundary(base.u, bc)
    v_full = with_boundary(mono.v, bc)
    y_full = with_boundary(mono.y, bc)

    def smooth_full(seq: np.ndarray) -> np.ndarray:
        smoothed = seq.copy()
        smoothed[1:-1] = (seq[2:] + 2.0 * seq[1:-1] + seq[:-2]) / 4.0
        return smoothed

    damping = check_damping_bound(u_full, v_full, smooth_full)

    reports = {
        "base": ComparableReport(
            "solve1d", "base", report_1d(u_full), norm_c(base.u.values - ref)
        ),
        "auxiliary": ComparableReport(
            "solve1d", "auxiliary", report_1d(v_full), norm_c(mono.v.values - ref)
        ),
        "monotonized": ComparableReport(
            "solve1d", "monotonized", report_1d(y_full), norm_c(mono.y.values - ref)
        ),
    }
    for rep in reports.values():
        _write_report(out, rep)

    rows = [
        (float(xs[i]), float(base.u.values[i]), float(mono.v.values[i]),
         float(mono.y.values[i]), float(ref[i]), float(exact[i]))
        for i in range(mesh.n)
    ]
    write_table(out / ("solution1d." + ("csv" if fmt == "csv" else "jsonl")),
                ["x", "u", "v", "y", "reference_dense", "reference_analytic"], rows, fmt)

    summary = {
        "experiment": "solve1d",
        "coefficients": asdict(c),
        "mesh": {"a": mesh.a, "b": mesh.b, "n": mesh.n, "h": mesh.h},
        "bc": asdict(bc),
        "residuals": {
            "base": base.residual_c_norm,
            "monotonized": mono.residual_c_norm,
            "inverse_route": inv.residual_c_norm,
        },
        "route_agreement_c": norm_c(inv.y.values - mono.y.values),
        "closeness_u_v_relative": norm_c(base.u.values - mono.v.values) / norm_c(base.u.values),
        "damping_check": damping.to_dict(),
        "reports": {k: r.to_dict() for k, r in reports.items()},
        "reference": {
            "dense_points": dense_points,
            "u_distance_c": norm_c(base.u.values - ref),
            "y_distance_c": norm_c(mono.y.values - ref),
            "u_analytic_distance_c": norm_c(base.u.values - exact),
            "y_analytic_distance_c": norm_c(mono.y.values - exact),
        },
    }
    write_json(out / "summary.json", summary)
    return summary


def run_solve3d(cfg: ConfigView, out: Path, fmt: str, tol_override) -> dict:
    sec = cfg.section("flow")
    kwargs = dict(
        L=sec.real("L"), N=sec.integer("N"), rho=sec.real("rho"), nu=sec.real("nu"),
        p0=sec.real("p0"), p1=sec.real("p1"),
        hole_lo=sec.integer("hole_lo"), hole_hi=sec.integer("hole_hi"),
        tol=tol_override if tol_override is not None else sec.real("tol", 1e-2),
        max_iters=sec.integer("max_iters", 200000),
    )
    sigma_v = sec.real("sigma_v", float("nan"))
    sigma_p = sec.real("sigma_p", float("nan"))
    if not np.isnan(sigma_v):
        kwargs["sigma_v"] = sigma_v
    if not np.isnan(sigma_p):
        kwargs["sigma_p"] = sigma_p
    try:
        flow = FlowConfig(**kwargs)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    msec = cfg.section("metrics")
    c_lo, c_hi = msec.integer("central_lo"), msec.integer("central_hi")
    central = ((c_lo, c_hi),) * 3

    base = solve_steady(flow, "base")
    mono = solve_steady(flow, "monotonized")

    fields = {"base": base.field, "auxiliary": mono.field, "monotonized": mono.y}
    reports: dict[str, ComparableReport] = {}
    for label, fld in fields.items():
        per_var = {
            var: report_3d(getattr(fld, var)).to_dict() for var in ("vx", "vy", "vz", "p")
        }
        total = sum(d["extremum_count"] for d in per_var.values())
        combined = MonotonicityReport(
            f_value=max(d["f_value"] for d in per_var.values()),
            extremum_count=total,
            sharpness_a=max(d["sharpness_a"] for d in per_var.values()),
            sharpness_b=max(d["sharpness_b"] for d in per_var.values()),
            region=per_var["vx"]["region"],
            oscillates=None,
        )
        central_vx = report_3d(getattr(fld, "vx"), central)
        rep = ComparableReport("solve3d", label, combined, None, central_vx)
        reports[label] = rep
        _write_report(out, rep)

    prof_base = centerline_profile(base.field, flow, "vx")
    prof_aux = centerline_profile(mono.field, flow, "vx")
    prof_mono = centerline_profile(mono.y, flow, "vx")
    rows = [
        (prof_base[i][0], prof_base[i][1], prof_aux[i][1], prof_mono[i][1])
        for i in range(len(prof_base))
    ]
    ext = "csv" if fmt == "csv" else "jsonl"
    write_table(out / f"centerline.{ext}",
                ["x", "vx_base", "vx_auxiliary", "vx_monotonized"], rows, fmt)

    for label, fld in fields.items():
        write_table(out / f"field_{label}.{ext}",
                    ["i", "j", "k", "vx", "vy", "vz", "p"],
                    _field_rows(fld), fmt)

    count_u = reports["base"].report.extremum_count
    count_y = reports["monotonized"].report.extremum_count
    # The monotonized answer is the velocity triple (pressure stays the
    # dependent variable in both schemes), so velocity-basis counts and the
    # always-defined region-basis central sharpness carry the comparison.
    vel_counts = {
        label: sum(count_extrema_3d(getattr(fld, v)) for v in ("vx", "vy", "vz"))
        for label, fld in fields.items()
    }
    central_region_a = {
        label: sharpness_metrics(fld.vx, central)[0] for label, fld in fields.items()
    }
    summary = {
        "experiment": "solve3d",
        "flow": {k: getattr(flow, k) for k in
                 ("L", "N", "rho", "nu", "p0", "p1", "hole_lo", "hole_hi",
                  "sigma_v", "sigma_p", "tol", "max_iters")},
        "central_region": [c_lo, c_hi],
        "runs": {
            "base": {"converged": base.converged, "iterations": base.iterations,
                     "momentum_residual_c": base.momentum_residual_c,
                     "divergence_c": base.divergence_c},
            "monotonized": {"converged": mono.converged, "iterations": mono.iterations,
                            "momentum_residual_c": mono.momentum_residual_c,
                            "divergence_c": mono.divergence_c},
        },
        "reports": {k: r.to_dict() for k, r in reports.items()},
        "velocity_extremum_counts": vel_counts,
        "velocity_extremum_ratio_y_over_u": (
            vel_counts["monotonized"] / vel_counts["base"] if vel_counts["base"] else None
        ),
        "extremum_ratio_y_over_u": (count_y / count_u) if count_u else None,
        "central_region_sharpness_a": central_region_a,
        "central_sharpness_ratio_a": (
            central_region_a["monotonized"] / central_region_a["base"]
            if central_region_a["base"] else None
        ),
        "profile_max_step": {
            "base": max_step_change([v for _, v in prof_base]),
            "monotonized": max_step_change([v for _, v in prof_mono]),
        },
    }
    write_json(out / "summary.json", summary)
    return summary


def run_metrics(cfg: ConfigView, out: Path, fmt: str, seed: int) -> dict:
    sec = cfg.section("metrics")
    trials = sec.integer("trials", 200)
    max_n = sec.integer("max_n", 5)
    rng = np.random.default_rng(seed)

    rows = []
    mismatches = 0
    for t in range(trials):
        n = int(rng.integers(3, max_n + 1))
        mesh = Mesh3D(1.0, n)
        u = MeshFunction(mesh, rng.standard_normal(n**3))
        mine = count_extrema_3d(u)
        cells = _brute_extrema(u)
        ok = mine == len(cells)
        a = b = float("nan")
        if cells:
            a, b = sharpness_metrics(u, cells)
            a2, b2 = _brute_sharpness(u, cells)
            ok = ok and a == a2 and b == b2
        mismatches += 0 if ok else 1
        rows.append((t, n, mine, len(cells), a, b, ok))

    lipschitz_ok = True
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(3, 40))
        u = rng.standard_normal(n)
        v = u + rng.standard_normal(n) * rng.uniform(0.001, 2.0)
        gap = abs(max_step_change(u) - max_step_change(v))
        bound = 2.0 * float(np.max(np.abs(u - v)))
        if bound > 0:
            worst = max(worst, gap / bound)
        lipschitz_ok = lipschitz_ok and gap <= bound + 1e-12

    write_table(out / ("metrics_trials." + ("csv" if fmt == "csv" else "jsonl")),
                ["trial", "n", "count", "brute_count", "sharpness_a", "sharpness_b", "match"],
                rows, fmt)
    summary = {
        "experiment": "metrics",
        "seed": seed,
        "trials": trials,
        "oracle_mismatches": mismatches,
        "lipschitz_bound_holds": lipschitz_ok,
        "lipschitz_worst_ratio": worst,
        "passed": mismatches == 0 and lipschitz_ok,
    }
    write_json(out / "summary.json", summary)
    return summary


def _field_rows(fld) -> list[tuple]:
    """(i, j, k, vx, vy, vz, p) records in flat-index order."""
    from .grid import unflatten_index

    n_cells = fld.mesh.cell_count
    N = fld.mesh.N
    vx, vy, vz, p = fld.vx.values, fld.vy.values, fld.vz.values, fld.p.values
    rows = []
    for idx in range(n_cells):
        i, j, k = unflatten_index(idx, N)
        rows.append((i, j, k, float(vx[idx]), float(vy[idx]), float(vz[idx]), float(p[idx])))
    return rows


def _brute_extrema(u: MeshFunction) -> list[tuple[int, int, int]]:
    g = u.as_grid()
    n = u.mesh.N
    cells = []
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            for k in range(1, n - 1):
                nb = [g[i + 1, j, k], g[i - 1, j, k], g[i, j + 1, k],
                      g[i, j - 1, k], g[i, j, k + 1], g[i, j, k - 1]]
                c = g[i, j, k]
                if all(c > x for x in nb) or all(c < x for x in nb):
                    cells.append((i, j, k))
    return cells


def _brute_sharpness(u: MeshFunction, cells) -> tuple[float, float]:
    g = u.as_grid()
    a = b = 0.0
    for (i, j, k) in cells:
        jumps = [abs(g[i, j, k] - g[i + d, j + e, k + f])
                 for d, e, f in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))]
        a = max(a, max(jumps))
        b = max(b, min(jumps))
    return a, b


def run_order(cfg: ConfigView, out: Path, fmt: str) -> dict:
    sec = cfg.section("problem")
    c, mesh, bc = _coefficients(sec)
    study = cfg.section("study")
    ns = study.integers("n_values")
    est_base = convergence_order(c, bc, "base", ns, (mesh.a, mesh.b))
    est_mono = convergence_order(c, bc, "monotonized", ns, (mesh.a, mesh.b))
    rows = [
        (ns[i], est_base.hs[i], est_base.errors[i], est_mono.errors[i])
        for i in range(len(ns))
    ]
    write_table(out / ("order." + ("csv" if fmt == "csv" else "jsonl")),
                ["n", "h", "error_base", "error_monotonized"], rows, fmt)
    summary = {
        "experiment": "order",
        "coefficients": asdict(c),
        "base": est_base.to_dict(),
        "monotonized": est_mono.to_dict(),
    }
    write_json(out / "summary.json", summary)
    return summary


def run_scan_det(cfg: ConfigView, out: Path, fmt: str) -> dict:
    sec = cfg.section("problem")
    c, mesh, bc = _coefficients(sec)
    scan = cfg.section("scan")
    h_values = scan.reals("h_values")
    near_tol = scan.real("near_tol", 1e-10)
    rows_obj = determinant_scan(c, h_values, bc, (mesh.a, mesh.b), near_tol)
    rows = [
        (r.h, r.n, r.indicator_base, r.indicator_monotonized, r.flagged) for r in rows_obj
    ]
    write_table(out / ("determinant_scan." + ("csv" if fmt == "csv" else "jsonl")),
                ["h", "n", "indicator_base", "indicator_monotonized", "flagged"], rows, fmt)
    summary = {
        "experiment": "scan-det",
        "coefficients": asdict(c),
        "near_tol": near_tol,
        "rows": [r.to_dict() for r in rows_obj],
        "flagged_steps": [r.h for r in rows_obj if r.flagged],
    }
    write_json(out / "summary.json", summary)
    return summary


def run_timestep(cfg: ConfigView, out: Path, fmt: str, tol_override=None) -> dict:
    sec = cfg.section("problem")
    c, mesh, bc = _coefficients(sec)
    st = cfg.section("stepping")
    ts_cfg = TimeStepConfig(
        tau=st.real("tau"),
        sigma=st.real("sigma", 1.0),
        inner_tol=st.real("inner_tol", 1e-12),
        max_inner=st.integer("max_inner", 200),
    )
    steady_tol = tol_override if tol_override is not None else st.real("steady_tol", 1e-12)
    max_steps = st.integer("max_steps", 10000)
    record_every = st.integer("record_every", 1)
    snapshot_every = st.integer("snapshot_every", 0)

    coeffs = (c.k0, c.k1, c.k2, c.k3)
    aux_op = LinearMeshOperator.from_coefficients(coeffs, mesh, bc, smoothed=True)
    v0 = MeshFunction(mesh, np.full(mesh.n, (bc.u0 + bc.u_np1) / 2.0))
    result = run_to_steady(v0, aux_op, bc, ts_cfg, steady_tol, max_steps,
                           record_every, snapshot_every)

    stationary = solve_monotonized(c, mesh, bc)
    dist = norm_c(result.y.values - stationary.y.values)

    # Cross-form agreement of the two step rearrangements on this problem.
    # The rearranged form's inner loop contracts only for
    # tau * ||M^{-1} A|| < 1, so probe with a step inside that bound.
    smooth_mat = StencilOperator1D(StencilKind.SMOOTH, mesh).matrix()
    amplified = np.linalg.solve(smooth_mat, aux_op.matrix)
    safe_tau = 0.25 / max(np.linalg.norm(amplified, np.inf), 1.0)
    probe_tau = min(ts_cfg.tau, safe_tau)
    agreements = {}
    for sigma in (0.0, 1.0):
        pc = TimeStepConfig(tau=probe_tau, sigma=sigma, inner_tol=1e-13, max_inner=500)
        v1, y1 = step_monotonized(v0, aux_op, bc, pc)
        v2, y2 = step_monotonized_alt(v0, aux_op, bc, pc)
        agreements[f"sigma_{sigma:g}"] = norm_c(v1.values - v2.values)

    ext = "csv" if fmt == "csv" else "jsonl"
    write_table(out / f"trajectory.{ext}",
                ["t", "update_c_norm"], [(t, u) for t, u in result.history], fmt)
    if result.snapshots:
        xs = mesh.interior_x()
        snap_rows = [
            (t, float(xs[i]), float(v[i]), float(y[i]))
            for t, v, y in result.snapshots
            for i in range(mesh.n)
        ]
        write_table(out / f"snapshots.{ext}", ["t", "x", "v", "y"], snap_rows, fmt)
    summary = {
        "experiment": "timestep",
        "coefficients": asdict(c),
        "tau": ts_cfg.tau,
        "sigma": ts_cfg.sigma,
        "steps": result.steps,
        "converged": result.converged,
        "final_update": result.final_update,
        "steady_tol": steady_tol,
        "distance_to_stationary_y": dist,
        "within_10x_tol": bool(dist <= 10.0 * steady_tol) if result.converged else None,
        "form_agreement": agreements,
    }
    write_json(out / "summary.json", summary)
    return summary


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def compare_reports(path_a: str, path_b: str) -> dict:
    try:
        a = ComparableReport.from_dict(json.loads(Path(path_a).read_text()))
        b = ComparableReport.from_dict(json.loads(Path(path_b).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigParseError(f"cannot read report: {exc}") from exc
    if a.experiment != b.experiment:
        raise ComparisonError(
            f"reports come from different experiments: {a.experiment} vs {b.experiment}"
        )
    ra, rb = a.report, b.report
    deltas = {
        "f_value": rb.f_value - ra.f_value,
        "extremum_count": rb.extremum_count - ra.extremum_count,
        "sharpness_a": rb.sharpness_a - ra.sharpness_a,
        "sharpness_b": rb.sharpness_b - ra.sharpness_b,
    }
    if a.reference_distance_c is not None and b.reference_distance_c is not None:
        deltas["reference_distance_c"] = b.reference_distance_c - a.reference_distance_c
    out = {
        "experiment": a.experiment,
        "left": a.label,
        "right": b.label,
        "deltas": deltas,
        "extremum_ratio": (
            rb.extremum_count / ra.extremum_count if ra.extremum_count else None
        ),
    }
    if a.central is not None and b.central is not None:
        out["central_deltas"] = {
            "extremum_count": b.central.extremum_count - a.central.extremum_count,
            "sharpness_a": b.central.sharpness_a - a.central.sharpness_a,
            "sharpness_b": b.central.sharpness_b - a.central.sharpness_b,
        }
    return out


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monoscheme",
                                 description="Config-driven difference-scheme experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run the experiment named by a config file")
    runp.add_argument("config")
    runp.add_argument("--out", default=".", help="output directory")
    runp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    runp.add_argument("--seed", type=int, default=20240814,
                      help="seed for randomized test fields")
    runp.add_argument("--tol", type=float, default=None, help="solver tolerance override")

    cmpp = sub.add_parser("compare", help="diff two report JSON files")
    cmpp.add_argument("report_a")
    cmpp.add_argument("report_b")
    cmpp.add_argument("--out", default=None, help="optional directory for comparison.json")
    return ap


def _run(args) -> int:
    cfg = load_config(args.config)
    kind = cfg.section("experiment").text("kind")
    if kind not in EXPERIMENTS:
        raise ValidationError(f"unknown experiment kind {kind!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "solve1d":
        summary = run_solve1d(cfg, out, args.format, args.tol)
    elif kind == "solve3d":
        summary = run_solve3d(cfg, out, args.format, args.tol)
    elif kind == "metrics":
        summary = run_metrics(cfg, out, args.format, args.seed)
    elif kind == "order":
        summary = run_order(cfg, out, args.format)
    elif kind == "scan-det":
        summary = run_scan_det(cfg, out, args.format)
    else:
        summary = run_timestep(cfg, out, args.format, args.tol)
    print(f"{kind}: wrote {out / 'summary.json'}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        result = compare_reports(args.report_a, args.report_b)
        text = json.dumps(result, indent=2, sort_keys=True)
        if args.out:
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / "comparison.json").write_text(text + "\n")
        print(text)
        return 0
    except ConfigParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
