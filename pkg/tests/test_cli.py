import json
import os

import pytest

from main import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from utils.file_utils import read_forms, read_metrics, read_pseudo_labels, write_labels


@pytest.fixture
def generated(tmp_path):
    out = str(tmp_path / "data")
    assert main(["--seed", "7", "gen", "--out", out, "--size", "100", "--test-size", "20"]) == EXIT_OK
    return out


def _path(directory, name):
    return os.path.join(directory, name)


def test_gen_then_partition(generated, capsys, tmp_path):
    capsys.readouterr()
    code = main(["partition", "--corpus", _path(generated, "corpus.jsonl"),
                 "--forms", _path(generated, "forms.jsonl"), "--out", str(tmp_path / "split")])
    assert code == EXIT_OK
    assert "N_a=60" in capsys.readouterr().out
    assert os.path.exists(tmp_path / "split" / "unlabeled.jsonl")


def test_parse_compiles_generated_explanations(generated, capsys, tmp_path):
    out = str(tmp_path / "forms.jsonl")
    code = main(["parse", "--explanations", _path(generated, "explanations.jsonl"),
                 "--corpus", _path(generated, "corpus.jsonl"), "--out", out])
    assert code == EXIT_OK
    assert "accuracy_proxy=1.0000" in capsys.readouterr().out
    assert [f.sexpr for f in read_forms(out)] == [f.sexpr for f in read_forms(_path(generated, "forms.jsonl"))]


def test_match_and_label(generated, tmp_path):
    common = ["--corpus", _path(generated, "corpus.jsonl"), "--forms", _path(generated, "forms.jsonl")]
    scores = str(tmp_path / "scores.tsv")
    assert main(["match", *common, "--exact", "--out", scores]) == EXIT_OK
    with open(scores, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == "instance_id\tform_id\tlabel\tscore"
    assert len(lines) == 1 + 100 * 5

    labels = str(tmp_path / "pseudo.jsonl")
    assert main(["label", *common, "--embeddings", _path(generated, "embeddings.txt"), "--out", labels]) == EXIT_OK
    assert len(read_pseudo_labels(labels)) == 40


def test_pretrain_writes_checkpoint(generated, tmp_path):
    out = str(tmp_path / "matcher.json")
    code = main(["--seed", "1", "pretrain", "--corpus", _path(generated, "corpus.jsonl"),
                 "--queries", _path(generated, "queries.jsonl"),
                 "--embeddings", _path(generated, "embeddings.txt"), "--out", out])
    assert code == EXIT_OK
    assert json.load(open(out, encoding="utf-8"))["version"] == 1


def test_pretrain_without_queries_or_forms_is_usage_error(generated, tmp_path):
    code = main(["pretrain", "--corpus", _path(generated, "corpus.jsonl"), "--out", str(tmp_path / "m.json")])
    assert code == EXIT_USAGE


def test_eval_on_identical_files(tmp_path, capsys):
    path = str(tmp_path / "gold.jsonl")
    write_labels(path, {"a": "founded_by", "b": "works_for", "c": "no_relation"})
    assert main(["eval", "--pred", path, "--gold", path]) == EXIT_OK
    out = capsys.readouterr().out
    assert "micro" in out and "1.0000" in out


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_missing_input_is_data_error(tmp_path):
    code = main(["partition", "--corpus", str(tmp_path / "nope.jsonl"), "--forms", str(tmp_path / "nope.jsonl")])
    assert code == EXIT_DATA


def test_malformed_input_is_data_error(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text('{"id": "a", "tokens": ["x"]}\n', encoding="utf-8")
    forms = tmp_path / "forms.jsonl"
    forms.write_text('{"id": "f0", "sexpr": "(Is (Word", "label": "x"}\n', encoding="utf-8")
    assert main(["partition", "--corpus", str(corpus), "--forms", str(forms)]) == EXIT_DATA


def _run_config(generated, out_dir):
    return {
        "version": 1,
        "profile": "tacred",
        "paths": {
            "corpus": _path(generated, "corpus.jsonl"),
            "forms": _path(generated, "forms.jsonl"),
            "embeddings": _path(generated, "embeddings.txt"),
            "queries": _path(generated, "queries.jsonl"),
            "gold": _path(generated, "gold.jsonl"),
            "test_corpus": _path(generated, "test_corpus.jsonl"),
            "test_gold": _path(generated, "test_gold.jsonl"),
            "output_dir": out_dir,
        },
        "pretrain": {"epochs": 2},
        "train": {"epochs": 2, "labeled_batch": 20, "unlabeled_batch": 20},
    }


def test_train_is_deterministic(generated, tmp_path):
    outputs = []
    for run in ("a", "b"):
        out_dir = str(tmp_path / f"run-{run}")
        config = tmp_path / f"run-{run}.json"
        config.write_text(json.dumps(_run_config(generated, out_dir)), encoding="utf-8")
        assert main(["--seed", "5", "train", "--config", str(config)]) == EXIT_OK
        outputs.append(out_dir)
    first, second = (open(_path(d, "metrics.csv"), "rb").read() for d in outputs)
    assert first == second
    rows = read_metrics(_path(outputs[0], "metrics.csv"))
    assert len(rows) == 2 * 3
    for name in ("matcher.json", "classifier.json", "predictions.jsonl"):
        assert os.path.exists(_path(outputs[0], name))


def test_train_with_bad_config_is_data_error(generated, tmp_path):
    raw = _run_config(generated, str(tmp_path / "out"))
    raw["train"]["alpha"] = -1
    config = tmp_path / "bad.json"
    config.write_text(json.dumps(raw), encoding="utf-8")
    assert main(["train", "--config", str(config)]) == EXIT_DATA
