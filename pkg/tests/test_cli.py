import json

import numpy as np
import pytest
from scipy.stats import spearmanr

from bandsel import load_catalog_json, load_dataset_csv, snr_profile
from bandsel.cli import main

GEN_FLAGS = [
    "--seed", "7", "--classes", "3", "--objects-per-class", "2",
    "--replicates", "6", "--grid-start", "400", "--grid-step", "2",
    "--grid-count", "40", "--bandwidths", "8,16", "--center-step", "10",
]


@pytest.fixture
def workspace(tmp_path):
    data = tmp_path / "data.csv"
    cat = tmp_path / "cat.json"
    rc = main(["gen", "--out", str(data), "--catalog", str(cat), *GEN_FLAGS])
    assert rc == 0
    return tmp_path, data, cat


def run_select(tmp_path, data, cat, out, *extra):
    return main([
        "select", "--data", str(data), "--catalog", str(cat),
        "--out", str(out), "--n-trees", "8", *extra,
    ])


class TestGen:
    def test_deterministic_reruns(self, tmp_path):
        paths = []
        for tag in ("x", "y"):
            data = tmp_path / f"{tag}.csv"
            cat = tmp_path / f"{tag}.json"
            assert main(["gen", "--out", str(data), "--catalog", str(cat), *GEN_FLAGS]) == 0
            paths.append((data, cat))
        assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
        assert paths[0][1].read_bytes() == paths[1][1].read_bytes()

    def test_row_count_and_manifest(self, workspace):
        tmp_path, data, cat = workspace
        ds = load_dataset_csv(data)
        assert len(ds.samples) == 3 * 2 * 6
        manifest = json.loads((tmp_path / "data.csv.manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["seed"] == 7

    def test_zero_noise_slope_kills_snr_trend(self, tmp_path):
        data = tmp_path / "flat.csv"
        cat = tmp_path / "flat.json"
        flags = GEN_FLAGS + ["--noise-slope", "0", "--replicates", "30"]
        assert main(["gen", "--out", str(data), "--catalog", str(cat), *flags]) == 0
        dataset = load_dataset_csv(data)
        catalog = load_catalog_json(cat)
        profile = snr_profile(dataset, catalog)
        rho = spearmanr(catalog.centers(), profile.snr_values()).statistic
        assert abs(rho) < 0.5


class TestSelect:
    def test_fbs_writes_selection_json(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "fbs.json"
        assert run_select(tmp_path, data, cat, out, "--method", "fbs", "--n", "4") == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "fbs"
        assert doc["n"] == 4 and len(doc["filters"]) == 4
        assert doc["min_pairwise_angle_rad"] > 0
        assert doc["theta_star"] > 0
        assert (tmp_path / "fbs.json.manifest.json").exists()

    def test_full_search_combination_cap_exit_code(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "full.json"
        rc = run_select(tmp_path, data, cat, out, "--method", "full", "--n", "4",
                        "--combination-cap", "10")
        assert rc == 6
        assert not out.exists()

    def test_full_matches_fbs_min_angle(self, workspace):
        tmp_path, data, cat = workspace
        out_a = tmp_path / "full.json"
        out_b = tmp_path / "fbs.json"
        assert run_select(tmp_path, data, cat, out_a, "--method", "full", "--n", "3") == 0
        assert run_select(tmp_path, data, cat, out_b, "--method", "fbs", "--n", "3") == 0
        a = json.loads(out_a.read_text())["min_pairwise_angle_rad"]
        b = json.loads(out_b.read_text())["min_pairwise_angle_rad"]
        assert a == b

    def test_uniform_selection(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "uni.json"
        assert run_select(tmp_path, data, cat, out, "--method", "uniform", "--n", "3") == 0
        doc = json.loads(out.read_text())
        widest = max(f["bandwidth_nm"] for f in doc["filters"])
        assert all(f["bandwidth_nm"] == widest for f in doc["filters"])

    def test_cfbs_selection_with_trace(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "cfbs.json"
        rc = run_select(tmp_path, data, cat, out, "--method", "cfbs", "--n", "4",
                        "--cvs-th", "0.9", "--k-folds", "2")
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "cfbs"
        assert 2 <= doc["n"] <= 4
        assert len(doc["trace"]) >= 6  # at least all pairs
        assert doc["config"]["cvs_th"] == 0.9

    def test_all_bands_pruned_exit_code(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "never.json"
        rc = run_select(tmp_path, data, cat, out, "--method", "cfbs",
                        "--snr-th", "1e15", "--k-folds", "2")
        assert rc == 5

    def test_missing_data_file_exit_code(self, workspace):
        tmp_path, data, cat = workspace
        rc = main(["select", "--data", str(tmp_path / "nope.csv"),
                   "--catalog", str(cat), "--out", str(tmp_path / "o.json")])
        assert rc == 3

    def test_fbs_nine_filters_from_production_scale_pool(self, tmp_path):
        # pool size comparable to a few hundred wavelength regions
        data = tmp_path / "data.csv"
        cat = tmp_path / "cat.json"
        assert main([
            "gen", "--out", str(data), "--catalog", str(cat), "--seed", "1",
            "--classes", "5", "--objects-per-class", "2", "--replicates", "3",
            "--center-step", "3.2",
        ]) == 0
        from bandsel import load_catalog_json
        assert len(load_catalog_json(cat)) > 250
        out = tmp_path / "fbs9.json"
        assert run_select(tmp_path, data, cat, out, "--method", "fbs", "--n", "9") == 0
        doc = json.loads(out.read_text())
        assert doc["n"] == 9
        assert doc["theta_star"] > 0


class TestEvaluate:
    def test_report_matches_cfbs_achieved_cvs(self, workspace):
        tmp_path, data, cat = workspace
        sel = tmp_path / "cfbs.json"
        assert run_select(tmp_path, data, cat, sel, "--method", "cfbs", "--n", "4",
                          "--cvs-th", "0.9", "--k-folds", "2", "--seed", "0") == 0
        out = tmp_path / "report.json"
        rc = main(["evaluate", "--data", str(data), "--catalog", str(cat),
                   "--selection", str(sel), "--out", str(out),
                   "--n-trees", "8", "--k-folds", "2", "--seed", "0"])
        assert rc == 0
        report = json.loads(out.read_text())
        selection = json.loads(sel.read_text())
        assert report["cvs"] == selection["achieved_cvs"]
        assert report["selection_ids"] == [f["id"] for f in selection["filters"]]
        assert report["wco"] == int(
            np.sum(report["confusion"]) - np.trace(np.array(report["confusion"]))
        )

    def test_rf_and_gb_reports_differ_but_rerun_identically(self, workspace):
        tmp_path, data, cat = workspace
        sel = tmp_path / "sel.json"
        assert run_select(tmp_path, data, cat, sel, "--method", "fbs", "--n", "3") == 0

        def evaluate(clf, out):
            rc = main(["evaluate", "--data", str(data), "--catalog", str(cat),
                       "--selection", str(sel), "--out", str(out),
                       "--classifier", clf, "--n-trees", "8", "--k-folds", "2"])
            assert rc == 0
            return out.read_bytes()

        rf1 = evaluate("rf", tmp_path / "rf1.json")
        rf2 = evaluate("rf", tmp_path / "rf2.json")
        gb1 = evaluate("gb", tmp_path / "gb1.json")
        gb2 = evaluate("gb", tmp_path / "gb2.json")
        assert rf1 == rf2 and gb1 == gb2
        assert json.loads(rf1)["classifier"] != json.loads(gb1)["classifier"]

    def test_confusion_csv(self, workspace):
        tmp_path, data, cat = workspace
        sel = tmp_path / "sel.json"
        assert run_select(tmp_path, data, cat, sel, "--method", "fbs", "--n", "3") == 0
        out = tmp_path / "rep.json"
        conf = tmp_path / "conf.csv"
        rc = main(["evaluate", "--data", str(data), "--catalog", str(cat),
                   "--selection", str(sel), "--out", str(out),
                   "--confusion-csv", str(conf), "--n-trees", "5", "--k-folds", "2"])
        assert rc == 0
        lines = conf.read_text().splitlines()
        assert len(lines) == 4  # header + 3 classes

    def test_empty_selection_validation_exit(self, workspace):
        tmp_path, data, cat = workspace
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"method": "fbs", "filters": []}))
        rc = main(["evaluate", "--data", str(data), "--catalog", str(cat),
                   "--selection", str(empty), "--out", str(tmp_path / "r.json")])
        assert rc == 4


class TestSweep:
    def test_single_cell_consistent_with_select_and_evaluate(self, workspace):
        tmp_path, data, cat = workspace
        out = tmp_path / "sweep.csv"
        rc = main(["sweep", "--data", str(data), "--catalog", str(cat),
                   "--snr-th", "0", "--cvs-th", "0.9", "--n", "4",
                   "--n-trees", "8", "--k-folds", "2", "--out", str(out)])
        assert rc == 0
        header, row = out.read_text().splitlines()
        assert header == "snr_th,cvs_th,n,wco,cvs,theta_min,status"
        cells = dict(zip(header.split(","), row.split(",")))
        sel = tmp_path / "sel.json"
        assert run_select(tmp_path, data, cat, sel, "--method", "cfbs", "--n", "4",
                          "--cvs-th", "0.9", "--k-folds", "2") == 0
        doc = json.loads(sel.read_text())
        assert int(cells["n"]) == doc["n"]
        assert float(cells["cvs"]) == doc["achieved_cvs"]
        assert cells["status"] == "ok"

    def test_rerun_and_thread_invariance(self, workspace, monkeypatch):
        tmp_path, data, cat = workspace
        outputs = []
        for tag, threads in (("a", "1"), ("b", "3"), ("c", "1")):
            monkeypatch.setenv("BANDSEL_THREADS", threads)
            out = tmp_path / f"sweep_{tag}.csv"
            rc = main(["sweep", "--data", str(data), "--catalog", str(cat),
                       "--snr-th", "0,5", "--cvs-th", "0.9,0.95", "--n", "4",
                       "--n-trees", "6", "--k-folds", "2", "--out", str(out)])
            assert rc == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]
