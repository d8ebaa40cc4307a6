import logging

import pytest

from core.errors import ConfigError
from core.models import SyntheticSpec
from core.pipeline import RunState, execute_pipeline, load_data, partition
from training.partition import partition_corpus
from utils.config_loader import ConfigManager
from utils.synthetic import generate_synthetic


@pytest.fixture
def data_dir(tmp_path):
    out = tmp_path / "data"
    generate_synthetic(SyntheticSpec(seed=9, size=100, test_size=0), str(out))
    return out


def run_state(data_dir, tmp_path, source, **train):
    raw = {
        "paths": {"corpus": str(data_dir / "corpus.jsonl"), source: str(data_dir / f"{source}.jsonl"),
                  "embeddings": str(data_dir / "embeddings.txt"), "output_dir": str(tmp_path / "out")},
        "train": {"seed": 2, **train},
    }
    return RunState(config=ConfigManager.build_run_config(raw))


def test_explanation_count_limits_forms(data_dir, tmp_path):
    state = load_data(run_state(data_dir, tmp_path, "forms", explanation_count=3))
    assert len(state.forms) == 3
    again = load_data(run_state(data_dir, tmp_path, "forms", explanation_count=3))
    assert [f.form_id for f in state.forms] == [f.form_id for f in again.forms]


def test_explanation_count_limits_explanations(data_dir, tmp_path):
    state = load_data(run_state(data_dir, tmp_path, "explanations", explanation_count=2))
    assert len(state.annotated) == 2
    assert state.forms == []


def test_unlabeled_fraction_shrinks_unlabeled_set(data_dir, tmp_path):
    state = partition(load_data(run_state(data_dir, tmp_path, "forms", unlabeled_fraction=0.3)))
    full = partition_corpus(state.corpus, state.forms)
    assert state.partition.n_a == full.n_a
    assert state.partition.n_u == int(round(0.3 * full.n_u))


@pytest.mark.parametrize("train", [{"explanation_count": 0}, {"unlabeled_fraction": 0.0},
                                   {"unlabeled_fraction": 1.5}])
def test_bad_subsampling_settings(data_dir, tmp_path, train):
    with pytest.raises(ConfigError):
        run_state(data_dir, tmp_path, "forms", **train)


def test_failed_run_logs_traceback(data_dir, tmp_path, caplog):
    state = run_state(data_dir, tmp_path, "forms")
    config = state.config.model_copy(update={"paths": state.config.paths.model_copy(
        update={"corpus": str(tmp_path / "missing.jsonl")})})
    with caplog.at_level(logging.ERROR, logger="next.pipeline"):
        with pytest.raises(OSError):
            execute_pipeline(config)
    (record,) = [r for r in caplog.records if r.name == "next.pipeline" and r.levelno == logging.ERROR]
    assert record.exc_info is not None
