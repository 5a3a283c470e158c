"""End-to-end CLI tests over temp files: subcommands, exit codes, formats."""

import json

import numpy as np
import pytest

from featknn import FeatureSet, write_fset
from featknn.cli import main

CLASS_NAMES = ("bladder", "bowel", "gallbladder", "kidney", "liver", "spleen")


def write_set(path, fset):
    with open(path, "wb") as sink:
        write_fset(fset, sink)
    return str(path)


def clustered(n_per_class, n_classes=6, dim=16, noise_seed=0, spread=50.0, scale=0.1):
    # cluster centers are fixed so sets drawn with different noise seeds
    # stay classifiable against each other
    centers = np.random.default_rng(1234).normal(scale=spread, size=(n_classes, dim))
    rng = np.random.default_rng(noise_seed)
    vectors = np.concatenate(
        [centers[c] + rng.normal(scale=scale, size=(n_per_class, dim))
         for c in range(n_classes)]
    )
    return FeatureSet(
        vectors.astype(np.float32),
        np.repeat(np.arange(n_classes), n_per_class),
        CLASS_NAMES[:n_classes],
    )


@pytest.fixture
def workspace(tmp_path):
    train_path = write_set(tmp_path / "train.fset", clustered(10, noise_seed=7))
    test_path = write_set(tmp_path / "test.fset", clustered(3, noise_seed=8))
    full_path = write_set(tmp_path / "full.fset", clustered(12, noise_seed=9))
    return {
        "tmp": tmp_path,
        "train": train_path,
        "test": test_path,
        "full": full_path,
        "model": str(tmp_path / "model.knnm"),
    }


def run_fit(ws, *extra):
    return main(["fit", ws["train"], "--output", ws["model"], *extra])


class TestFit:
    def test_fit_writes_model_and_summary(self, workspace, capsys):
        assert run_fit(workspace) == 0
        out = capsys.readouterr().out
        assert "components:" in out and "% variance" in out
        assert "60 vectors" in out

    def test_fit_without_pca(self, workspace, capsys):
        assert run_fit(workspace, "--no-pca") == 0
        assert "pca: none" in capsys.readouterr().out

    def test_bad_threshold_is_usage_error(self, workspace, capsys):
        code = run_fit(workspace, "--variance-threshold", "1.5")
        assert code == 2
        assert "threshold must be in (0,1]" in capsys.readouterr().err

    def test_missing_input_is_io_error(self, workspace, capsys):
        code = main(["fit", str(workspace["tmp"] / "nope.fset"),
                     "--output", workspace["model"]])
        assert code == 3

    def test_corrupt_input_is_data_error(self, workspace, capsys):
        bad = workspace["tmp"] / "bad.fset"
        bad.write_bytes(b"FSET" + b"\x01\x00\x00\x00" + b"\xff" * 4)
        assert main(["fit", str(bad), "--output", workspace["model"]]) == 4

    def test_fit_then_inspect_report_same_dimensions(self, workspace, capsys):
        run_fit(workspace)
        fit_out = capsys.readouterr().out
        assert main(["inspect", workspace["model"]]) == 0
        inspect_out = capsys.readouterr().out
        assert "raw dim 16" in inspect_out
        fit_components = next(l for l in fit_out.splitlines() if "components" in l)
        count = fit_components.split("components: ")[1].split(" ")[0]
        assert f"pca: {count} components" in inspect_out


class TestPredict:
    def test_self_query_heads_neighbor_list(self, workspace, capsys):
        run_fit(workspace, "--no-pca")
        capsys.readouterr()
        assert main(["predict", workspace["model"], workspace["train"],
                     "--format", "json"]) == 0
        records = json.loads(capsys.readouterr().out)
        assert records[0]["neighbors"][0]["index"] == 0
        assert records[0]["neighbors"][0]["distance"] == 0.0
        assert records[0]["predicted_class"] == "bladder"

    def test_k_one_gives_single_neighbor(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        assert main(["predict", workspace["model"], workspace["test"], "--k", "1",
                     "--format", "json"]) == 0
        records = json.loads(capsys.readouterr().out)
        assert all(len(r["neighbors"]) == 1 for r in records)

    def test_text_format_one_line_per_query(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        assert main(["predict", workspace["model"], workspace["test"]]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 18
        assert lines[0].startswith("query 0: predicted=")
        assert "votes=" in lines[0] and "neighbors=" in lines[0]

    def test_dim_mismatch_reports_both_dims(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        narrow = write_set(workspace["tmp"] / "narrow.fset",
                           clustered(2, dim=4, noise_seed=3))
        assert main(["predict", workspace["model"], narrow]) == 4
        err = capsys.readouterr().err
        assert "4" in err and "16" in err

    def test_byte_identical_json_across_runs(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        main(["predict", workspace["model"], workspace["test"], "--format", "json"])
        first = capsys.readouterr().out
        main(["predict", workspace["model"], workspace["test"], "--format", "json"])
        second = capsys.readouterr().out
        assert first == second


class TestEvaluate:
    def test_text_confusion_table(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        assert main(["evaluate", workspace["model"], workspace["test"],
                     "--k", "3"]) == 0
        out = capsys.readouterr().out
        assert "accuracy: 100.00%" in out
        for name in CLASS_NAMES:
            assert name in out

    def test_json_parses(self, workspace, capsys):
        run_fit(workspace)
        capsys.readouterr()
        assert main(["evaluate", workspace["model"], workspace["test"],
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["accuracy"] == 1.0
        assert payload["use_pca"] is True

    def test_fifty_eight_of_sixty_prints_papers_accuracy(self, tmp_path, capsys):
        train = clustered(50, noise_seed=1)
        test = clustered(10, noise_seed=2)
        vectors = test.vectors.copy()
        vectors[0] = train.vectors[5 * 50]
        vectors[11] = train.vectors[4 * 50]
        planted = FeatureSet(vectors, test.labels, test.class_names)
        train_path = write_set(tmp_path / "tr.fset", train)
        test_path = write_set(tmp_path / "te.fset", planted)
        model_path = str(tmp_path / "m.knnm")
        assert main(["fit", train_path, "--output", model_path]) == 0
        capsys.readouterr()
        assert main(["evaluate", model_path, test_path, "--k", "3",
                     "--metric", "cityblock"]) == 0
        assert "accuracy: 96.67%" in capsys.readouterr().out

    def test_unknown_metric_is_usage_error(self, workspace):
        run_fit(workspace)
        assert main(["evaluate", workspace["model"], workspace["test"],
                     "--metric", "hamming"]) == 2


class TestSweep:
    def test_default_grid_json_has_forty_cells(self, workspace, capsys):
        assert main(["sweep", workspace["train"], workspace["test"],
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload) == 40

    def test_restricted_grid(self, workspace, capsys):
        assert main(["sweep", workspace["train"], workspace["test"],
                     "--ks", "1,3", "--metrics", "euclidean",
                     "--format", "json"]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 4

    def test_text_grid_render(self, workspace, capsys):
        assert main(["sweep", workspace["train"], workspace["test"],
                     "--ks", "1,3", "--metrics", "cityblock,cosine"]) == 0
        out = capsys.readouterr().out
        assert "k=1" in out and "k=3" in out
        assert "cityblock" in out and "cosine" in out

    def test_single_pca_option(self, workspace, capsys):
        assert main(["sweep", workspace["train"], workspace["test"], "--no-pca",
                     "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload) == 20
        assert all(rec["use_pca"] is False for rec in payload)


class TestSplit:
    def test_split_writes_expected_counts(self, workspace, capsys):
        train_out = str(workspace["tmp"] / "out_train.fset")
        test_out = str(workspace["tmp"] / "out_test.fset")
        assert main(["split", workspace["full"], "--per-class-train", "10",
                     "--per-class-test", "2", "--seed", "9",
                     "--train-output", train_out, "--test-output", test_out]) == 0
        capsys.readouterr()
        assert main(["inspect", train_out]) == 0
        assert "60 vectors" in capsys.readouterr().out
        assert main(["inspect", test_out]) == 0
        assert "12 vectors" in capsys.readouterr().out

    def test_split_is_deterministic_on_disk(self, workspace):
        paths = []
        for tag in ("a", "b"):
            train_out = workspace["tmp"] / f"{tag}_train.fset"
            assert main(["split", workspace["full"], "--per-class-train", "8",
                         "--seed", "77", "--train-output", str(train_out)]) == 0
            paths.append(train_out)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_insufficient_members_is_data_error(self, workspace):
        assert main(["split", workspace["full"], "--per-class-train", "50",
                     "--train-output", str(workspace["tmp"] / "x.fset")]) == 4


class TestInspect:
    def test_fset_summary(self, workspace, capsys):
        assert main(["inspect", workspace["full"]]) == 0
        out = capsys.readouterr().out
        assert "72 vectors, dim 16, 6 classes" in out
        assert "bladder, bowel, gallbladder, kidney, liver, spleen" in out

    def test_model_without_pca(self, workspace, capsys):
        run_fit(workspace, "--no-pca")
        capsys.readouterr()
        assert main(["inspect", workspace["model"]]) == 0
        assert "pca: none" in capsys.readouterr().out

    def test_unrecognized_file(self, workspace, capsys):
        junk = workspace["tmp"] / "junk.txt"
        junk.write_text("hello")
        assert main(["inspect", str(junk)]) == 4
        assert "unrecognized" in capsys.readouterr().err


class TestUsage:
    def test_no_subcommand(self, capsys):
        assert main([]) == 2

    def test_unknown_flag(self, workspace, capsys):
        assert main(["inspect", workspace["full"], "--frobnicate"]) == 2

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
