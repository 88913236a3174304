import json

import numpy as np
import pytest

from _data import sirtuin6_like, two_gaussians, write_csv
from qencbench import runner
from qencbench.encoders import MAP_KINDS
from qencbench.errors import (ArgumentError, BaselineImportError, IngestionError, StageError)
from qencbench.stats import MetricRecord


@pytest.fixture
def sirtuin_csv(tmp_path):
    x, y = sirtuin6_like(0)
    return write_csv(tmp_path / "sirtuin6.csv", x, y, [f"f{i}" for i in range(6)] + ["label"])


def run(tmp_path, csv, **kw):
    cfg = runner.RunConfig(dataset=str(csv), output_dir=str(tmp_path / kw.pop("out", "out")),
                           **kw)
    return runner.run_benchmark(cfg)


class TestLoadDataset:
    def test_four_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,a\n3,4,b\n5,6,a\n7,8,b\n")
        d = runner.load_dataset(p)
        np.testing.assert_array_equal(d.features, [[1, 2], [3, 4], [5, 6], [7, 8]])
        np.testing.assert_array_equal(d.labels, [-1, 1, -1, 1])
        assert d.positive_class == "b" and d.classes == ("a", "b")

    def test_header_detected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y,cls\n1,2,0\n3,4,1\n")
        d = runner.load_dataset(p, label_column="cls")
        assert d.feature_names == ("x", "y") and d.features.shape == (2, 2)

    def test_no_header(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,g\n3,4,b\n")
        assert runner.load_dataset(p).features.shape == (2, 2)

    def test_label_first_and_positive(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("M,1.5,2\nB,0.5,1\nM,2.5,0\n")
        d = runner.load_dataset(p, label_column=0, positive_class="M")
        np.testing.assert_array_equal(d.labels, [1, -1, 1])
        np.testing.assert_array_equal(d.features[:, 0], [1.5, 0.5, 2.5])

    def test_feature_columns(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,3,0\n4,5,6,1\n")
        d = runner.load_dataset(p, feature_columns=[2, 0])
        np.testing.assert_array_equal(d.features, [[3, 1], [6, 4]])

    def test_sirtuin_shape(self, sirtuin_csv):
        d = runner.load_dataset(sirtuin_csv)
        assert d.features.shape == (100, 6) and (d.labels == 1).sum() == 50

    @pytest.mark.parametrize("cell", ["?", "", "NaN"])
    def test_missing_value(self, tmp_path, cell):
        p = tmp_path / "d.csv"
        p.write_text(f"1,2,0\n3,{cell},1\n")
        with pytest.raises(IngestionError, match="row 2, column 1"):
            runner.load_dataset(p)

    def test_non_numeric(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,0\n3,4,1\n5,abc,0\n")
        with pytest.raises(IngestionError, match="row 3, column 1: non-numeric"):
            runner.load_dataset(p)

    def test_three_classes(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,0\n2,1\n3,2\n")
        with pytest.raises(IngestionError):
            runner.load_dataset(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestionError):
            runner.load_dataset(tmp_path / "nope.csv")

    def test_ragged(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,0\n3,1\n")
        with pytest.raises(IngestionError, match="row 2"):
            runner.load_dataset(p)


class TestSplits:
    def test_floor_rule(self):
        tr, te = runner.make_splits(10, n_splits=1)[0]
        assert tr.size == 7 and te.size == 3
        assert runner.make_splits(11, n_splits=1)[0][0].size == 7

    def test_partition(self):
        for tr, te in runner.make_splits(30, n_splits=5, seed=4):
            np.testing.assert_array_equal(np.sort(np.concatenate([tr, te])), np.arange(30))

    def test_deterministic(self):
        a, b = runner.make_splits(50, seed=3), runner.make_splits(50, seed=3)
        assert all(np.array_equal(x[0], y[0]) for x, y in zip(a, b))

    def test_distinct_permutations(self):
        trains = {tuple(tr) for tr, _ in runner.make_splits(100, n_splits=50, seed=0)}
        assert len(trains) == 50

    def test_counter_based(self):
        # adding splits does not disturb earlier ones
        a, b = runner.make_splits(40, n_splits=3, seed=9), runner.make_splits(40, n_splits=8, seed=9)
        assert all(np.array_equal(a[i][0], b[i][0]) for i in range(3))

    @pytest.mark.parametrize("kw", [dict(n_rows=1), dict(n_rows=10, train_fraction=0.05),
                                    dict(n_rows=10, n_splits=0), dict(n_rows=10, train_fraction=1.0)])
    def test_errors(self, kw):
        with pytest.raises(ArgumentError):
            runner.make_splits(**kw)


class TestConfig:
    def test_parse_text(self):
        cfg = runner.RunConfig(**runner.parse_config_text(
            "# comment\ndataset = a.csv\nencodings = Angle, IQP\nn_splits = 3\n"
            "features = 0,2,5\nkernel_mode = Shots\ndump_gram = yes\n"))
        assert cfg.encodings == ("Angle", "IQP") and cfg.features == (0, 2, 5)
        assert cfg.n_splits == 3 and cfg.kernel_mode == "Shots" and cfg.dump_gram

    def test_roundtrip(self):
        cfg = runner.RunConfig(dataset="x.csv", features=(1, 3), n_splits=4, seed=11, C=2.5)
        assert runner.RunConfig(**runner.parse_config_text(cfg.to_flat())) == cfg

    def test_overrides(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("dataset = a.csv\nn_splits = 3\n")
        assert runner.parse_config(p, n_splits=7, seed=None).n_splits == 7

    @pytest.mark.parametrize("text", ["bogus = 1\n", "n_splits = 0\n", "train_fraction = 1.2\n",
                                      "encodings = Angle,Foo\n", "no equals sign\n"])
    def test_invalid(self, text):
        with pytest.raises(ArgumentError):
            runner.RunConfig(**runner.parse_config_text(text))

    def test_defaults(self):
        cfg = runner.RunConfig()
        assert cfg.n_splits == 50 and cfg.train_fraction == 0.7 and cfg.encodings == MAP_KINDS


class TestBaseline:
    def test_missing_column(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("split,accuracy,f1\n0,0.5,0.5\n")
        with pytest.raises(BaselineImportError, match="'auc'"):
            runner.import_baseline(p)

    def test_count_mismatch(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("split,accuracy,f1,auc\n0,0.5,0.5,0.5\n")
        with pytest.raises(BaselineImportError):
            runner.import_baseline(p, n_splits=2)

    def test_ordered_by_split(self, tmp_path):
        p = tmp_path / "b.csv"
        p.write_text("split,accuracy,f1,auc\n1,0.2,0.3,0.4\n0,0.5,0.6,0.7\n")
        np.testing.assert_array_equal(runner.import_baseline(p)["accuracy"], [0.5, 0.2])


class TestStatsAssembly:
    def recs(self, groups):
        return [MetricRecord("d", e, i, a, a, a) for e, vals in groups.items()
                for i, a in enumerate(vals)]

    def test_identical_baseline_p1(self):
        vals = [0.6, 0.7, 0.8, 0.65, 0.72]
        recs = self.recs({"Angle": vals, "IQP": [0.5, 0.55, 0.52, 0.58, 0.5]})
        base = {m: np.array(vals) for m in ("accuracy", "f1", "auc")}
        st = runner.compute_stats(recs, base, "Copy")
        pair = [p for p in st["accuracy"]["tukey"]["pairs"]
                if {p["group_a"], p["group_b"]} == {"Angle", "Copy"}][0]
        assert pair["p_value"] == 1.0

    def test_better_baseline_significant(self, rng):
        groups = {e: rng.uniform(0.55, 0.75, 20) for e in MAP_KINDS}
        recs = self.recs(groups)
        base = {m: np.mean(list(groups.values()), axis=0) + 0.2
                for m in ("accuracy", "f1", "auc")}
        st = runner.compute_stats(recs, base, "Boost")
        for p in st["accuracy"]["tukey"]["pairs"]:
            if "Boost" in (p["group_a"], p["group_b"]):
                assert p["p_value"] < 0.05

    def test_single_group_skipped(self):
        st = runner.compute_stats(self.recs({"Angle": [0.5, 0.6]}))
        assert st["auc"]["skipped"] and st["auc"]["anova"] is None

    def test_results_csv_roundtrip(self, tmp_path):
        recs = self.recs({"Angle": [0.1 + 0.2, 0.5], "IQP": [1.0, 0.0]})
        (tmp_path / "r.csv").write_text(runner.results_csv(recs))
        assert runner.read_results_csv(tmp_path / "r.csv") == recs

    def test_atomic_write(self, tmp_path):
        runner.atomic_write(tmp_path / "a" / "b.txt", "hi\n")
        assert (tmp_path / "a" / "b.txt").read_text() == "hi\n"
        assert [p.name for p in (tmp_path / "a").iterdir()] == ["b.txt"]


class TestRunBenchmark:
    def test_single_split_single_encoding(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, encodings=("Angle",), n_splits=1)
        assert len(rep.records) == 1
        assert all(rep.stats[m]["skipped"] == "needs >= 2 groups" for m in rep.stats)

    def test_full_small_run(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, n_splits=3, dump_gram=True, dump_models=True)
        out = tmp_path / "out"
        assert len(rep.records) == 15
        keys = sorted((r.encoding, r.split) for r in rep.records)
        assert keys == sorted((e, s) for e in MAP_KINDS for s in range(3))
        for name in ("results.csv", "stats.json", "stats_summary.csv", "scalers.json",
                     "config.txt", "timings.json"):
            assert (out / name).exists()
        assert len(list((out / "gram").iterdir())) == 30
        assert len(list((out / "models").iterdir())) == 15
        st = json.loads((out / "stats.json").read_text())
        assert len(st["accuracy"]["tukey"]["pairs"]) == 10

    def test_byte_identical_rerun(self, tmp_path, sirtuin_csv):
        run(tmp_path, sirtuin_csv, n_splits=3, out="a")
        run(tmp_path, sirtuin_csv, n_splits=3, out="b", n_jobs=3)
        for name in ("results.csv", "stats.json", "scalers.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_scaler_fit_on_train_only(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, encodings=("IQP",), n_splits=4, seed=5)
        x = runner.load_dataset(sirtuin_csv).features
        for i, (tr, _) in enumerate(runner.make_splits(100, n_splits=4, seed=5)):
            sc = rep.scalers[f"IQP/{i}"]
            np.testing.assert_array_equal(sc["mins"], x[tr].min(axis=0))
            np.testing.assert_array_equal(sc["maxs"], x[tr].max(axis=0))

    def test_shots_mode(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, encodings=("Angle", "IQP"), n_splits=2,
                  kernel_mode="Shots", shots=64)
        assert len(rep.records) == 4

    def test_select_k(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, encodings=("Angle",), n_splits=2, select_k=3,
                  select_solver="exhaustive")
        assert len(rep.selected_features) == 3
        assert json.loads((tmp_path / "out" / "selection.json").read_text())["chosen"] == \
            list(rep.selected_features)

    def test_baseline_joins(self, tmp_path, sirtuin_csv):
        b = tmp_path / "b.csv"
        b.write_text("split,accuracy,f1,auc\n0,0.9,0.9,0.9\n1,0.95,0.9,0.92\n")
        rep = run(tmp_path, sirtuin_csv, encodings=("Angle", "IQP"), n_splits=2,
                  baseline=str(b), baseline_name="LGBM")
        assert rep.stats["accuracy"]["groups"] == ["Angle", "IQP", "LGBM"]

    def test_load_stage_error(self, tmp_path):
        with pytest.raises(StageError, match="load"):
            run(tmp_path, tmp_path / "missing.csv")

    def test_failure_flushes_partial_results(self, tmp_path):
        # one test split holds a single class, so AUC cannot be computed
        x = np.arange(20, dtype=float)[:, None] * np.ones((1, 2))
        y = [0] * 19 + [1]
        csv = write_csv(tmp_path / "skew.csv", x, y)
        with pytest.raises(StageError, match="score"):
            run(tmp_path, csv, encodings=("Angle",), n_splits=5)
        assert (tmp_path / "out" / "results.csv").read_text().startswith("dataset,encoding")

    def test_two_gaussian_angle(self, tmp_path):
        x, y = two_gaussians(0)
        csv = write_csv(tmp_path / "g.csv", x, y)
        rep = run(tmp_path, csv, encodings=("Angle",), n_splits=5)
        acc = np.mean([r.accuracy for r in rep.records])
        print(f"two-Gaussian Angle mean accuracy {acc:.3f}")
        assert acc > 0.9

    def test_config_echo(self, tmp_path, sirtuin_csv):
        rep = run(tmp_path, sirtuin_csv, encodings=("Angle",), n_splits=2)
        echoed = runner.parse_config(tmp_path / "out" / "config.txt")
        assert echoed == rep.config
