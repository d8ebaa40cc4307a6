import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple, TypedDict

from langgraph.graph import END, StateGraph
from pydantic import BaseModel, ConfigDict, Field

from core.errors import DataFormatError
from core.logical_form import LogicalForm, query_strings
from core.models import Instance, LabelSet, Partition, QueryRecord, RunConfig
from matching.embeddings import EmbeddingTable
from matching.losses import build_query_sets
from matching.matcher import MatcherModel
from matching.pretrain import pretrain_matcher
from semparse.lexicon import Lexicon
from semparse.ranker import AnnotatedExplanation, ParseReport, ParserModel, accuracy_proxy, \
    compile_explanations, train_parser
from training.classifier import LogisticClassifier
from training.joint import MetricsRow, train_joint
from training.partition import partition_corpus, subsample, subsample_unlabeled
from utils.file_utils import (
    ensure_directory_exists,
    read_corpus,
    read_explanations,
    read_forms,
    read_labels,
    read_queries,
    write_forms,
    write_labels,
    write_metrics,
)
from utils.metrics import EvaluationReport, evaluate
from utils.text import query_tokens

logger = logging.getLogger("next.pipeline")

DEFAULT_LEXICON_PATH = "config/lexicon.tsv"
RANDOM_EMBEDDING_DIM = 50


class RunState(BaseModel):
    """Everything one `train` run reads, builds and reports."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: RunConfig
    corpus: List[Instance] = Field(default_factory=list)
    gold: Dict[str, str] = Field(default_factory=dict)
    test_corpus: List[Instance] = Field(default_factory=list)
    test_gold: Dict[str, str] = Field(default_factory=dict)
    embeddings: Optional[EmbeddingTable] = None
    queries: List[Tuple[Tuple[str, ...], str]] = Field(default_factory=list)
    annotated: List[AnnotatedExplanation] = Field(default_factory=list)
    forms: List[LogicalForm] = Field(default_factory=list)
    parse_report: Optional[ParseReport] = None
    partition: Optional[Partition] = None
    matcher: Optional[MatcherModel] = None
    classifier: Optional[LogisticClassifier] = None
    metrics: List[MetricsRow] = Field(default_factory=list)
    report: Optional[EvaluationReport] = None


class PipelineState(TypedDict):
    state: RunState


# --------------------------------------------------------------------------
# shared loaders (also used by the single-step CLI commands)
# --------------------------------------------------------------------------

def load_embeddings(path: Optional[str], corpus: Sequence[Instance], seed: int = 0) -> EmbeddingTable:
    if path:
        return EmbeddingTable.load(path)
    logger.warning(f"No embeddings given: using random {RANDOM_EMBEDDING_DIM}-d vectors over the corpus vocabulary")
    return EmbeddingTable.random((t for x in corpus for t in x.lower_tokens), RANDOM_EMBEDDING_DIM, seed)


def annotate(explanations, corpus: Sequence[Instance]) -> List[AnnotatedExplanation]:
    """Attach each explanation record to its source sentence."""
    by_id = {x.instance_id: x for x in corpus}
    out = []
    for record in explanations:
        if record.source_id not in by_id:
            raise DataFormatError(f"explanation {record.id}: unknown source_id {record.source_id!r}")
        out.append(AnnotatedExplanation(id=record.id, text=record.text, label=record.label,
                                        source=by_id[record.source_id]))
    return out


def form_queries(forms: Sequence[LogicalForm]) -> List[Tuple[Tuple[str, ...], str]]:
    """(query tokens, label) for every keyword referenced by the forms."""
    return sorted({(query_tokens(q), f.label) for f in forms for q in query_strings(f.root) if query_tokens(q)})


def record_queries(records: Sequence[QueryRecord]) -> List[Tuple[Tuple[str, ...], str]]:
    return sorted({(query_tokens(r.text), r.label) for r in records if query_tokens(r.text)})


def label_set(forms: Sequence[LogicalForm], gold: Dict[str, str], none_label: str) -> LabelSet:
    return LabelSet.from_labels([f.label for f in forms] + list(gold.values()), none_label)


def load_parser(lexicon_path: Optional[str], cfg) -> ParserModel:
    return ParserModel.create(Lexicon.load(lexicon_path or DEFAULT_LEXICON_PATH), cfg)


# --------------------------------------------------------------------------
# nodes
# --------------------------------------------------------------------------

def load_data(state: RunState) -> RunState:
    paths = state.config.paths
    state.corpus = read_corpus(paths.corpus)
    if paths.gold:
        state.gold = read_labels(paths.gold)
    if paths.test_corpus:
        state.test_corpus = read_corpus(paths.test_corpus)
        state.test_gold = read_labels(paths.test_gold) if paths.test_gold else {}
    state.embeddings = load_embeddings(paths.embeddings, state.corpus, state.config.train.seed)
    if paths.forms:
        state.forms = read_forms(paths.forms)
    else:
        state.annotated = annotate(read_explanations(paths.explanations), state.corpus)
    count = state.config.train.explanation_count
    if count is not None:
        seed = state.config.train.seed
        if state.forms:
            state.forms = subsample(state.forms, count, seed)
        else:
            state.annotated = subsample(state.annotated, count, seed)
        logger.info(f"Using {len(state.forms) or len(state.annotated)} explanation(s)")
    logger.info(f"Loaded {len(state.corpus)} instance(s), {len(state.test_corpus)} test instance(s)")
    return state


def parse_explanations(state: RunState) -> RunState:
    if state.forms or not state.annotated:
        return state
    parser = load_parser(state.config.paths.lexicon, state.config.parser)
    parser, report = train_parser(parser, state.annotated)
    report.accuracy_proxy = accuracy_proxy(parser, state.annotated)
    state.forms = compile_explanations(parser, state.annotated, report)
    state.parse_report = report
    logger.info(f"Parsing accuracy proxy: {report.accuracy_proxy:.3f}")
    write_forms(os.path.join(state.config.paths.output_dir, "forms.jsonl"), state.forms)
    return state


def partition(state: RunState) -> RunState:
    train = state.config.train
    state.partition = subsample_unlabeled(partition_corpus(state.corpus, state.forms), train.unlabeled_fraction,
                                          train.seed)
    return state


def pretrain(state: RunState) -> RunState:
    cfg = state.config
    if cfg.paths.queries:
        state.queries = record_queries(read_queries(cfg.paths.queries))
    else:
        state.queries = form_queries(state.forms)
    part = state.partition
    kept = {li.instance.instance_id for li in part.labeled} | {x.instance_id for x in part.unlabeled}
    corpus = [x for x in state.corpus if x.instance_id in kept]
    matcher = MatcherModel(state.embeddings, cfg.matcher)
    state.matcher = pretrain_matcher(corpus, state.queries, matcher, cfg.pretrain)
    return state


def joint_training(state: RunState) -> RunState:
    cfg = state.config
    labels = label_set(state.forms, {**state.gold, **state.test_gold}, cfg.none_label)
    classifier = LogisticClassifier(labels, state.embeddings)
    dev = None
    if state.test_corpus and state.test_gold:
        dev = (state.test_corpus, [state.test_gold[x.instance_id] for x in state.test_corpus])
    result = train_joint(state.partition, state.forms, state.matcher, classifier, cfg.train, cfg.soft,
                         sim_items=build_query_sets(state.queries), dev=dev)
    state.classifier, state.matcher, state.metrics = result.classifier, result.matcher, result.metrics
    return state


def evaluate_and_save(state: RunState) -> RunState:
    out = state.config.paths.output_dir
    ensure_directory_exists(out)
    state.matcher.save(os.path.join(out, "matcher.json"))
    state.classifier.save(os.path.join(out, "classifier.json"))
    write_metrics(os.path.join(out, "metrics.csv"), state.metrics)

    xs, gold = (state.test_corpus, state.test_gold) if state.test_corpus else (state.corpus, state.gold)
    predictions = {x.instance_id: state.classifier.predict(x) for x in xs}
    write_labels(os.path.join(out, "predictions.jsonl"), predictions)
    if gold:
        state.report = evaluate(predictions, gold, state.config.none_label)
        logger.info(f"Evaluation: P={state.report.precision:.4f} R={state.report.recall:.4f} "
                    f"F1={state.report.f1:.4f}")
    return state


def build_pipeline() -> StateGraph:
    """
    Build and compile the LangGraph training pipeline.
    Pipeline flow:
      START -> LoadData -> ParseExplanations -> Partition -> PretrainMatcher -> TrainJoint -> Evaluate -> END
    """
    builder = StateGraph(PipelineState)

    builder.add_node("LoadData", lambda state: {"state": load_data(state["state"])})
    builder.add_node("ParseExplanations", lambda state: {"state": parse_explanations(state["state"])})
    builder.add_node("Partition", lambda state: {"state": partition(state["state"])})
    builder.add_node("PretrainMatcher", lambda state: {"state": pretrain(state["state"])})
    builder.add_node("TrainJoint", lambda state: {"state": joint_training(state["state"])})
    builder.add_node("Evaluate", lambda state: {"state": evaluate_and_save(state["state"])})

    builder.add_edge("LoadData", "ParseExplanations")
    builder.add_edge("ParseExplanations", "Partition")
    builder.add_edge("Partition", "PretrainMatcher")
    builder.add_edge("PretrainMatcher", "TrainJoint")
    builder.add_edge("TrainJoint", "Evaluate")
    builder.add_edge("Evaluate", END)

    builder.set_entry_point("LoadData")

    graph = builder.compile()

    logger.debug("LangGraph training pipeline built.")
    return graph


def execute_pipeline(config: RunConfig) -> RunState:
    """
    Run parse -> partition -> pretrain -> joint training -> evaluation end to end.

    Args:
        config: Validated run configuration

    Returns:
        Final RunState with forms, models, metrics and the evaluation report
    """
    pipeline = build_pipeline()
    try:
        result = pipeline.invoke({"state": RunState(config=config)})
        final_state = result["state"]
        logger.info(f"Training run completed; outputs in {config.paths.output_dir}")
        return final_state
    except Exception as e:
        logger.error(f"Pipeline execution failed: {e}", exc_info=True)
        raise
