import filecmp
import json
from pathlib import Path

import pytest

from monoscheme.cli import ComparableReport, compare_reports, load_config, main
from monoscheme.metrics import MonotonicityReport


BUNDLED = ("fig1.cfg", "fig2.cfg", "fig2_n10.cfg", "order1d.cfg", "scan.cfg", "timestep1d.cfg")


def run_cli(*argv):
    return main(list(argv))


class TestConfigLoading:
    def test_bundled_names_resolve(self):
        for name in BUNDLED:
            cfg = load_config(name)
            assert cfg.section("experiment").text("kind")

    def test_fraction_values(self):
        cfg = load_config("fig2.cfg")
        assert cfg.section("flow").real("L") == pytest.approx(1 / 30)

    def test_missing_config_is_parse_error(self, tmp_path):
        assert run_cli("run", str(tmp_path / "nope.cfg")) == 2

    def test_malformed_config(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("no sections here [[[")
        assert run_cli("run", str(bad), "--out", str(tmp_path / "out")) == 2
        assert not (tmp_path / "out").exists()

    def test_unknown_kind_is_validation_error(self, tmp_path):
        cfg = tmp_path / "weird.cfg"
        cfg.write_text("[experiment]\nkind = paint\n")
        assert run_cli("run", str(cfg)) == 3

    def test_invalid_coefficient_is_validation_error(self, tmp_path):
        cfg = tmp_path / "k3zero.cfg"
        cfg.write_text(
            "[experiment]\nkind = solve1d\n[problem]\n"
            "k0 = 1\nk1 = 1\nk2 = 1\nk3 = 0\na = 0\nb = 1\nn = 5\n"
            "u_left = 0\nu_right = 1\n"
        )
        assert run_cli("run", str(cfg), "--out", str(tmp_path / "o")) == 3


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    assert run_cli("run", "fig1.cfg", "--out", str(out)) == 0
    return out


class TestSolve1dRun:
    def test_artifacts_exist(self, outdir):
        for name in ("summary.json", "solution1d.csv", "report_base.json",
                     "report_auxiliary.json", "report_monotonized.json"):
            assert (outdir / name).exists()

    def test_table_layout(self, outdir):
        lines = (outdir / "solution1d.csv").read_text().splitlines()
        assert lines[0] == "x,u,v,y,reference_dense,reference_analytic"
        assert len(lines) == 10  # header + 9 interior nodes

    def test_summary_reports_roundtrip(self, outdir):
        summary = json.loads((outdir / "summary.json").read_text())
        for label, payload in summary["reports"].items():
            rep = ComparableReport.from_dict(payload)
            assert rep.label == label
            assert rep.to_dict() == payload
            assert isinstance(rep.report, MonotonicityReport)

    def test_monotonized_improves_f_and_reference_distance(self, outdir):
        summary = json.loads((outdir / "summary.json").read_text())
        base = summary["reports"]["base"]["report"]["f_value"]
        mono = summary["reports"]["monotonized"]["report"]["f_value"]
        assert mono < base
        ref = summary["reference"]
        assert ref["y_distance_c"] < ref["u_distance_c"]

    def test_compare_self_is_all_zero(self, outdir):
        cmp = compare_reports(
            str(outdir / "report_base.json"), str(outdir / "report_base.json")
        )
        assert all(v == 0 for v in cmp["deltas"].values())

    def test_compare_base_vs_monotonized_negative_f_delta(self, outdir):
        cmp = compare_reports(
            str(outdir / "report_base.json"), str(outdir / "report_monotonized.json")
        )
        assert cmp["deltas"]["f_value"] < 0

    def test_reproducible_bitwise(self, outdir, tmp_path):
        again = tmp_path / "again"
        assert run_cli("run", "fig1.cfg", "--out", str(again)) == 0
        for name in ("summary.json", "solution1d.csv"):
            assert filecmp.cmp(outdir / name, again / name, shallow=False)


class TestOtherExperiments:
    def test_order_run(self, tmp_path):
        out = tmp_path / "order"
        assert run_cli("run", "order1d.cfg", "--out", str(out)) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert 1.8 <= summary["base"]["order"] <= 2.2
        assert 1.8 <= summary["monotonized"]["order"] <= 2.2

    def test_scan_run_jsonl(self, tmp_path):
        out = tmp_path / "scan"
        assert run_cli("run", "scan.cfg", "--out", str(out), "--format", "jsonl") == 0
        rows = [json.loads(line) for line in (out / "determinant_scan.jsonl").read_text().splitlines()]
        assert len(rows) == 9
        assert {"h", "n", "indicator_base", "indicator_monotonized", "flagged"} <= set(rows[0])

    def test_timestep_run(self, tmp_path):
        out = tmp_path / "ts"
        assert run_cli("run", "timestep1d.cfg", "--out", str(out)) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"]
        assert summary["within_10x_tol"]
        assert summary["form_agreement"]["sigma_0"] <= 1e-10
        assert summary["form_agreement"]["sigma_1"] <= 1e-10
        snaps = (out / "snapshots.csv").read_text().splitlines()
        assert snaps[0] == "t,x,v,y"
        assert len(snaps) == 1 + summary["steps"] * 9

    def test_metrics_run_seeded(self, tmp_path):
        cfg = tmp_path / "metrics.cfg"
        cfg.write_text("[experiment]\nkind = metrics\n[metrics]\ntrials = 40\nmax_n = 5\n")
        out = tmp_path / "m"
        assert run_cli("run", str(cfg), "--out", str(out), "--seed", "7") == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["passed"]
        assert summary["oracle_mismatches"] == 0
        assert summary["seed"] == 7

    def test_solve3d_small_run(self, tmp_path):
        cfg = tmp_path / "tiny3d.cfg"
        cfg.write_text(
            "[experiment]\nkind = solve3d\n[flow]\nL = 1/30\nN = 6\nrho = 1\n"
            "nu = 1.002\np0 = 1e6\np1 = 0\nhole_lo = 2\nhole_hi = 3\n"
            "tol = 1e-3\nmax_iters = 20000\n[metrics]\ncentral_lo = 1\ncentral_hi = 4\n"
        )
        out = tmp_path / "f3"
        assert run_cli("run", str(cfg), "--out", str(out)) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["runs"]["base"]["converged"]
        assert summary["runs"]["monotonized"]["converged"]
        assert (out / "centerline.csv").exists()
        assert summary["central_region_sharpness_a"]["base"] > 0
        for label in ("base", "auxiliary", "monotonized"):
            lines = (out / f"field_{label}.csv").read_text().splitlines()
            assert lines[0] == "i,j,k,vx,vy,vz,p"
            assert len(lines) == 1 + 6**3
        again = tmp_path / "f3_again"
        assert run_cli("run", str(cfg), "--out", str(again)) == 0
        for name in ("summary.json", "field_base.csv", "centerline.csv"):
            assert filecmp.cmp(out / name, again / name, shallow=False)


class TestSolverFailureExit:
    def test_unstable_flow_parameters_exit_4(self, tmp_path):
        cfg = tmp_path / "blowup.cfg"
        cfg.write_text(
            "[experiment]\nkind = solve3d\n[flow]\nL = 1/30\nN = 6\nrho = 1\n"
            "nu = 1.002\np0 = 1e6\np1 = 0\nhole_lo = 2\nhole_hi = 3\n"
            "tol = 1e-3\nmax_iters = 20000\nsigma_v = 6.2e-6\n"  # above h^2/(6 nu)
            "[metrics]\ncentral_lo = 1\ncentral_hi = 4\n"
        )
        assert run_cli("run", str(cfg), "--out", str(tmp_path / "o")) == 4


class TestCompareErrors:
    def test_shape_mismatch(self, tmp_path):
        a = ComparableReport("solve1d", "base", MonotonicityReport(1, 0, 0, 0, "r"))
        b = ComparableReport("solve3d", "base", MonotonicityReport(1, 0, 0, 0, "r"))
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        pa.write_text(json.dumps(a.to_dict()))
        pb.write_text(json.dumps(b.to_dict()))
        assert run_cli("compare", str(pa), str(pb)) == 3

    def test_unreadable_report(self, tmp_path):
        pa = tmp_path / "a.json"
        pa.write_text("{broken")
        assert run_cli("compare", str(pa), str(pa)) == 2

    def test_comparison_written_to_out(self, tmp_path):
        a = ComparableReport("solve1d", "base", MonotonicityReport(1.0, 2, 0.5, 0.1, "r"))
        pa = tmp_path / "a.json"
        pa.write_text(json.dumps(a.to_dict()))
        out = tmp_path / "cmpout"
        assert run_cli("compare", str(pa), str(pa), "--out", str(out)) == 0
        assert (out / "comparison.json").exists()
