import json
from datetime import datetime, timezone

import pytest

from tddetect import cli
from tddetect import corpus as cm
from tddetect import synthgen
from tddetect.errors import UsageError


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A small synthetic dataset laid out as the CLI expects."""
    root = tmp_path_factory.mktemp("cliwork")
    assert cli.main([
        "gen-synthetic", "--n", "120", "--td-rate", "0.2", "--seed", "4",
        "--out", str(root),
    ]) == 0
    truth = json.loads((root / "truth.json").read_text())
    when = datetime(2021, 1, 1, tzinfo=timezone.utc)
    records = []
    for i, (tid, is_td) in enumerate(sorted(truth.items())):
        if i % 2 == 0:  # label half the corpus
            records.append(cm.LabelRecord(
                tid, 0.9 if is_td else 0.1, "sim",
                when.replace(minute=i % 60, hour=i // 60),
            ))
    cm.write_labels_jsonl(records, root / "labels.jsonl")
    return root


class TestConfigParsing:
    def test_key_value_and_comments(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 9  # comment\nnum_trees=5\nuse_ngrams = true\n\n")
        raw = cli.parse_config_file(cfg)
        assert raw == {"seed": "9", "num_trees": "5", "use_ngrams": "true"}
        built = cli.build_pipeline_config(raw, None, None)
        assert built.seed == 9
        assert built.train.num_trees == 5
        assert built.use_ngrams is True

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        with pytest.raises(UsageError, match="bogus"):
            cli.parse_config_file(cfg)

    def test_missing_equals_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just a line\n")
        with pytest.raises(UsageError):
            cli.parse_config_file(cfg)

    def test_flag_overrides(self):
        built = cli.build_pipeline_config({"seed": "1"}, seed=7, out="/tmp/x")
        assert built.seed == 7
        assert built.out_dir == "/tmp/x"
        assert built.train.seed == 7

    def test_bad_bool(self):
        with pytest.raises(UsageError):
            cli.build_pipeline_config({"use_ngrams": "maybe"}, None, None)


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert cli.main(["no-such-command"]) == 1
        assert cli.main([]) == 1

    def test_data_error_is_2(self, tmp_path, capsys):
        rc = cli.main(["ingest", str(tmp_path / "absent.jsonl"), "--out", str(tmp_path)])
        assert rc == 2
        assert "data error" in capsys.readouterr().err

    def test_success_is_0(self, tmp_path):
        assert cli.main(["gen-synthetic", "--n", "10", "--out", str(tmp_path)]) == 0


@pytest.fixture(scope="module")
def featurized(workdir, tmp_path_factory):
    out = tmp_path_factory.mktemp("feats")
    rc = cli.main([
        "featurize", "--corpus", str(workdir / "corpus.jsonl"),
        "--pretrained", str(workdir / "pretrained.txt"),
        "--out", str(out), "--seed", "2",
    ])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def trained(workdir, featurized, tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    rc = cli.main([
        "train", "--features", str(featurized / "features.csv"),
        "--labels", str(workdir / "labels.jsonl"), "--out", str(out),
    ])
    assert rc == 0
    return out


class TestCommands:
    def test_ingest(self, workdir, tmp_path, capsys):
        rc = cli.main(["ingest", str(workdir / "corpus.jsonl"), "--out", str(tmp_path)])
        assert rc == 0
        assert "ingested 120 tickets" in capsys.readouterr().out
        assert (tmp_path / "corpus.jsonl").exists()

    def test_train_embeddings(self, workdir, tmp_path):
        rc = cli.main([
            "train-embeddings", "--corpus", str(workdir / "corpus.jsonl"),
            "--out", str(tmp_path), "--seed", "2",
        ])
        assert rc == 0
        assert (tmp_path / "word_embedding.json").exists()
        assert (tmp_path / "doc_embedding.json").exists()

    def test_predict(self, featurized, trained, tmp_path):
        rc = cli.main([
            "predict", "--model", str(trained / "model.json"),
            "--features", str(featurized / "features.csv"), "--out", str(tmp_path),
        ])
        assert rc == 0
        lines = (tmp_path / "predictions.csv").read_text().splitlines()
        assert lines[0] == "ticket_id,score"
        assert len(lines) == 121

    def test_evaluate(self, workdir, featurized, trained, tmp_path, capsys):
        rc = cli.main([
            "evaluate", "--model", str(trained / "model.json"),
            "--features", str(featurized / "features.csv"),
            "--labels", str(workdir / "labels.jsonl"),
            "--bootstrap", "20", "--out", str(tmp_path),
        ])
        assert rc == 0
        report = json.loads((tmp_path / "metrics.json").read_text())
        assert report["weighted"]["auroc"] > 0.5

    def test_sample_next(self, workdir, featurized, trained, capsys):
        rc = cli.main([
            "sample-next", "--model", str(trained / "model.json"),
            "--features", str(featurized / "features.csv"),
            "--labels", str(workdir / "labels.jsonl"),
            "--batch", "5", "--seed", "3",
        ])
        assert rc == 0
        ids = capsys.readouterr().out.split()
        assert len(ids) == 5
        labeled = {r.ticket_id for r in cm.load_labels_jsonl(workdir / "labels.jsonl")}
        assert not set(ids) & labeled

    def test_dump_trees(self, trained, capsys):
        rc = cli.main(["dump-trees", "--model", str(trained / "model.json")])
        assert rc == 0
        assert "tree 0:" in capsys.readouterr().out

    def test_curves(self, workdir, featurized, trained, tmp_path):
        rc = cli.main([
            "curves", "--model", str(trained / "model.json"),
            "--features", str(featurized / "features.csv"),
            "--labels", str(workdir / "labels.jsonl"), "--out", str(tmp_path),
        ])
        assert rc == 0
        text = (tmp_path / "curves.csv").read_text()
        assert text.startswith("variant,n_examined,n_td_found")

    def test_prevalence(self, workdir, tmp_path):
        truth = json.loads((workdir / "truth.json").read_text())
        _, probs = synthgen.oversampled_labeling(truth, 0.5, 2.0, seed=0)
        probs_path = tmp_path / "probs.json"
        probs_path.write_text(json.dumps(probs))
        rc = cli.main([
            "prevalence", "--labels", str(workdir / "labels.jsonl"),
            "--probs", str(probs_path), "--n-total", "120",
            "--bootstrap", "20", "--out", str(tmp_path),
        ])
        assert rc == 0
        out = json.loads((tmp_path / "prevalence.json").read_text())
        assert 0.0 <= out["corrected_rate"] <= 1.0

    def test_run_all(self, workdir, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bootstrap = 20\nnum_trees = 20\n")
        rc = cli.main([
            "run-all", "--config", str(cfg),
            "--corpus", str(workdir / "corpus.jsonl"),
            "--labels", str(workdir / "labels.jsonl"),
            "--pretrained", str(workdir / "pretrained.txt"),
            "--seed", "6", "--out", str(tmp_path / "out"),
        ])
        assert rc == 0
        assert (tmp_path / "out" / "report.json").exists()
        assert "main weighted AUROC" in capsys.readouterr().out

    def test_run_all_requires_paths(self):
        assert cli.main(["run-all"]) == 1
