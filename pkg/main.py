#!/usr/bin/env python3
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from core.errors import AnchorMissing, NextError
from core.models import MatcherConfig, ParserConfig, PretrainConfig, SoftConfig, SyntheticSpec, TrainConfig
from core.pipeline import (
    annotate,
    execute_pipeline,
    form_queries,
    load_embeddings,
    load_parser,
    record_queries,
)
from execution.soft import exec_soft
from matching.exact import ExactMatcher
from matching.matcher import MatcherModel
from matching.pretrain import pretrain_matcher
from semparse.ranker import ParseReport, accuracy_proxy, compile_explanations, train_parser
from training.classifier import LogisticClassifier
from training.partition import ordered_forms, partition_corpus
from training.pseudo_label import pseudo_label_batch
from utils.config_loader import ConfigManager
from utils.file_utils import (
    read_corpus,
    read_explanations,
    read_forms,
    read_labels,
    read_queries,
    write_corpus,
    write_forms,
    write_labels,
    write_match_scores,
    write_pseudo_labels,
)
from utils.logging_setup import setup_logging
from utils.metrics import evaluate
from utils.synthetic import generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

logger = logging.getLogger("next.cli")
console = Console()


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _section(name: str, profile: Optional[str]) -> Dict[str, Any]:
    """Defaults for one config section with the profile's values on top."""
    merged = dict(ConfigManager.get_config("defaults").get(name, {}))
    if profile:
        merged.update(ConfigManager.get_profile(profile).get(name, {}))
    return merged


def _seeded(section: Dict[str, Any], seed: Optional[int]) -> Dict[str, Any]:
    return {**section, "seed": seed} if seed is not None else section


def _load_matcher(args, corpus):
    embeddings = load_embeddings(args.embeddings, corpus, args.seed or 0)
    cfg = MatcherConfig(**_section("matcher", args.profile))
    if args.matcher:
        return MatcherModel.load(args.matcher, embeddings, cfg)
    return MatcherModel(embeddings, cfg)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_gen(args) -> int:
    raw = dict(ConfigManager.get_config("synthetic"))
    for key in ("size", "test_size", "num_forms", "paraphrase_rate"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    raw["seed"] = args.seed or 0
    dataset = generate_synthetic(SyntheticSpec(**raw), args.out)
    console.print(f"instances={len(dataset.corpus)} paraphrased={len(dataset.paraphrased)} "
                  f"forms={len(dataset.forms)} test={len(dataset.test_corpus)}")
    return EXIT_OK


def cmd_parse(args) -> int:
    corpus = read_corpus(args.corpus)
    annotated = annotate(read_explanations(args.explanations), corpus)
    parser = load_parser(args.lexicon or ConfigManager.get_config("paths").get("lexicon"),
                         ParserConfig(**_section("parser", args.profile)))
    report = ParseReport(total=len(annotated))
    if not args.no_train:
        parser, report = train_parser(parser, annotated)
    report.accuracy_proxy = accuracy_proxy(parser, annotated)
    forms = compile_explanations(parser, annotated, report)
    write_forms(args.out, forms)
    console.print(f"forms={len(forms)}/{len(annotated)} unparseable={len(report.unparseable)} "
                  f"inconsistent={len(report.inconsistent)} accuracy_proxy={report.accuracy_proxy:.4f}")
    return EXIT_OK


def cmd_partition(args) -> int:
    corpus = read_corpus(args.corpus)
    part = partition_corpus(corpus, read_forms(args.forms))
    if args.out:
        write_labels(f"{args.out}/labeled.jsonl", {li.instance.instance_id: li.label for li in part.labeled})
        write_corpus(f"{args.out}/unlabeled.jsonl", part.unlabeled)
    console.print(f"N_a={part.n_a} N_u={part.n_u} conflicts={part.conflicts}")
    return EXIT_OK


def cmd_match(args) -> int:
    corpus = read_corpus(args.corpus)
    forms = ordered_forms(read_forms(args.forms))
    soft_cfg = SoftConfig(**_section("soft", args.profile))
    matcher = ExactMatcher() if args.exact else _load_matcher(args, corpus)
    rows = []
    for x in corpus:
        for form in forms:
            try:
                score = exec_soft(form, x, matcher, soft_cfg).score
            except AnchorMissing:
                score = 0.0
            rows.append((x.instance_id, form.form_id, form.label, score))
    write_match_scores(args.out, rows)
    logger.info(f"Wrote {len(rows)} match score(s) to {args.out}")
    return EXIT_OK


def cmd_pretrain(args) -> int:
    corpus = read_corpus(args.corpus)
    if args.queries:
        queries = record_queries(read_queries(args.queries))
    elif args.forms:
        queries = form_queries(read_forms(args.forms))
    else:
        raise UsageError("pretrain needs --queries or --forms")
    matcher = _load_matcher(args, corpus)
    cfg = PretrainConfig(**_seeded(_section("pretrain", args.profile), args.seed))
    history: List[float] = []
    matcher = pretrain_matcher(corpus, queries, matcher, cfg, history)
    matcher.save(args.out)
    if history:
        console.print(f"L_string {history[0]:.6f} -> {history[-1]:.6f}")
    return EXIT_OK


def cmd_train(args) -> int:
    with open(args.config, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise NextError(f"{args.config} is not valid JSON: {e}") from e
    if args.seed is not None:
        for section in ("pretrain", "train"):
            raw[section] = {**raw.get(section, {}), "seed": args.seed}
    state = execute_pipeline(ConfigManager.build_run_config(raw))
    console.print(f"forms={len(state.forms)} N_a={state.partition.n_a} N_u={state.partition.n_u} "
                  f"iterations={len(state.metrics)}")
    if state.report is not None:
        console.print(f"P={state.report.precision:.4f} R={state.report.recall:.4f} F1={state.report.f1:.4f}")
    return EXIT_OK


def cmd_label(args) -> int:
    corpus = read_corpus(args.corpus)
    forms = ordered_forms(read_forms(args.forms))
    matcher = _load_matcher(args, corpus)
    train_cfg = TrainConfig(**_section("train", args.profile))
    classifier = None
    threshold = 0.0
    if args.classifier:
        classifier = LogisticClassifier.load(args.classifier, matcher.embeddings)
        threshold = train_cfg.threshold_for(len(classifier.labels))
    soft_cfg = SoftConfig(**_section("soft", args.profile))
    part = partition_corpus(corpus, forms)
    batch = pseudo_label_batch(part.unlabeled, forms, matcher, classifier, soft_cfg, train_cfg.theta_t, threshold)
    write_pseudo_labels(args.out, batch)
    console.print(f"pseudo-labeled {len(batch.items)} of {len(corpus)} instance(s)")
    return EXIT_OK


def cmd_eval(args) -> int:
    predictions, gold = read_labels(args.pred), read_labels(args.gold)
    none_label = args.none_label or ConfigManager.get_config("synthetic").get("none_label", "no_relation")
    report = evaluate(predictions, gold, none_label)
    table = Table(title="Evaluation")
    for column in ("class", "precision", "recall", "f1", "support"):
        table.add_column(column)
    for name, s in report.per_class.items():
        table.add_row(name, f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}", str(s.support))
    table.add_row("micro", f"{report.precision:.4f}", f"{report.recall:.4f}", f"{report.f1:.4f}", "")
    console.print(table)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_arg_parser() -> CliParser:
    parser = CliParser(prog="next", description="Explanation-driven weak supervision")
    parser.add_argument("--seed", type=int, default=None, help="seed for every random choice")
    parser.add_argument("--config-path", default=None, help="config JSON (default config/config.json)")
    parser.add_argument("--profile", default=None, help="hyperparameter profile name")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("gen", help="generate a synthetic paraphrase corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int)
    p.add_argument("--test-size", dest="test_size", type=int)
    p.add_argument("--num-forms", dest="num_forms", type=int)
    p.add_argument("--paraphrase-rate", dest="paraphrase_rate", type=float)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("parse", help="compile explanations into logical forms")
    p.add_argument("--explanations", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--no-train", action="store_true", help="rank with zero parser weights")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("partition", help="split a corpus by strict matching")
    p.add_argument("--corpus", required=True)
    p.add_argument("--forms", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("match", help="soft matching scores per instance and form")
    p.add_argument("--corpus", required=True)
    p.add_argument("--forms", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--matcher", help="matcher checkpoint")
    p.add_argument("--exact", action="store_true", help="binary string matching")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("pretrain", help="pretrain the string matcher")
    p.add_argument("--corpus", required=True)
    p.add_argument("--forms")
    p.add_argument("--queries")
    p.add_argument("--embeddings")
    p.add_argument("--matcher", help="starting checkpoint")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("train", help="end-to-end run from a run config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("label", help="pseudo-label the strictly unmatched instances")
    p.add_argument("--corpus", required=True)
    p.add_argument("--forms", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--matcher")
    p.add_argument("--classifier", help="classifier checkpoint enabling the None-label entropy rule")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="precision, recall and F1 of predictions")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--none-label", dest="none_label")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    load_dotenv()
    parser = build_arg_parser()
    args = parser.parse_args(argv)

    try:
        ConfigManager.initialize(args.config_path)
    except NextError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    setup_logging("DEBUG" if args.verbose else None)

    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NextError, OSError, ValueError) as e:
        logger.error(str(e))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
