import csv
import json
import logging
import os
from typing import Dict, Iterable, List, Sequence, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from core.errors import DataFormatError, LogicalFormError, SexprSyntaxError
from core.logical_form import LogicalForm
from core.models import (
    CorpusRecord,
    ExplanationRecord,
    FormRecord,
    Instance,
    LabelRecord,
    PseudoLabeledBatch,
    PseudoLabelRecord,
    QueryRecord,
)

logger = logging.getLogger("next.file_utils")

M = TypeVar("M", bound=BaseModel)

METRICS_HEADER = "# next-metrics v1"
METRICS_COLUMNS = ("iteration", "L_a", "L_u", "L_string", "L_total", "dev_accuracy")


def ensure_directory_exists(directory_path: str) -> None:
    """
    Ensure the specified directory exists, creating it if necessary.

    Args:
        directory_path: Path to the directory to check/create
    """
    if directory_path and not os.path.exists(directory_path):
        os.makedirs(directory_path)
        logger.debug(f"Created directory: {directory_path}")


def _ensure_parent(path: str) -> None:
    ensure_directory_exists(os.path.dirname(path))


# --------------------------------------------------------------------------
# JSONL
# --------------------------------------------------------------------------

def read_jsonl(path: str, model: Type[M], id_field: str = "id") -> List[M]:
    """
    Read one pydantic record per line, rejecting duplicate ids.

    Args:
        path: JSONL file
        model: Record model
        id_field: Field whose values must be unique; None disables the check

    Returns:
        Records in file order
    """
    records: List[M] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = model(**json.loads(line))
            except (json.JSONDecodeError, ValidationError, TypeError) as e:
                raise DataFormatError(f"{path}:{line_no}: {e}") from e
            if id_field:
                key = getattr(record, id_field)
                if key in seen:
                    raise DataFormatError(f"{path}:{line_no}: duplicate {id_field} {key!r}")
                seen.add(key)
            records.append(record)
    logger.debug(f"Read {len(records)} record(s) from {path}")
    return records


def write_jsonl(path: str, records: Iterable[BaseModel]) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record.model_dump(mode="json", exclude_none=True), ensure_ascii=False) + "\n")


def read_corpus(path: str) -> List[Instance]:
    instances = []
    for record in read_jsonl(path, CorpusRecord):
        try:
            instances.append(record.to_instance())
        except ValidationError as e:
            raise DataFormatError(f"{path}: instance {record.id}: {e}") from e
    return instances


def write_corpus(path: str, instances: Sequence[Instance]) -> None:
    write_jsonl(path, [CorpusRecord.from_instance(x) for x in instances])


def read_forms(path: str) -> List[LogicalForm]:
    forms = []
    for record in read_jsonl(path, FormRecord):
        try:
            forms.append(LogicalForm.from_sexpr(record.sexpr, record.label, record.id))
        except (LogicalFormError, SexprSyntaxError) as e:
            raise DataFormatError(f"{path}: form {record.id}: {e}") from e
    return forms


def write_forms(path: str, forms: Sequence[LogicalForm]) -> None:
    write_jsonl(path, [FormRecord(id=f.form_id, sexpr=f.sexpr, label=f.label) for f in forms])


def read_explanations(path: str) -> List[ExplanationRecord]:
    return read_jsonl(path, ExplanationRecord)


def write_explanations(path: str, records: Sequence[ExplanationRecord]) -> None:
    write_jsonl(path, records)


def read_labels(path: str) -> Dict[str, str]:
    return {r.id: r.label for r in read_jsonl(path, LabelRecord)}


def write_labels(path: str, labels: Dict[str, str]) -> None:
    write_jsonl(path, [LabelRecord(id=k, label=v) for k, v in labels.items()])


def read_queries(path: str) -> List[QueryRecord]:
    return read_jsonl(path, QueryRecord)


def write_queries(path: str, records: Sequence[QueryRecord]) -> None:
    write_jsonl(path, records)


def write_pseudo_labels(path: str, batch: PseudoLabeledBatch) -> None:
    write_jsonl(path, [PseudoLabelRecord(instance_id=i.instance.instance_id, label=i.label, u=i.u, omega=i.omega)
                       for i in batch.items])


def read_pseudo_labels(path: str) -> List[PseudoLabelRecord]:
    return read_jsonl(path, PseudoLabelRecord, id_field="instance_id")


# --------------------------------------------------------------------------
# TSV / CSV
# --------------------------------------------------------------------------

def write_match_scores(path: str, rows: Iterable[Tuple[str, str, str, float]]) -> None:
    """instance_id, form_id, label, score per line under a header row."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["instance_id", "form_id", "label", "score"])
        for instance_id, form_id, label, score in rows:
            writer.writerow([instance_id, form_id, label, repr(float(score))])


def write_metrics(path: str, rows: Sequence) -> None:
    """Metrics CSV: a version comment line, a header, then one row per iteration."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(METRICS_HEADER + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for row in rows:
            writer.writerow([row.iteration] + [repr(float(getattr(row, c))) for c in METRICS_COLUMNS[1:]])


def read_metrics(path: str) -> List[Dict[str, float]]:
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
        if first != METRICS_HEADER:
            raise DataFormatError(f"{path}: missing {METRICS_HEADER!r} header")
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != METRICS_COLUMNS:
            raise DataFormatError(f"{path}: unexpected columns {reader.fieldnames}")
        rows = []
        for row in reader:
            parsed = {k: float(v) for k, v in row.items()}
            parsed["iteration"] = int(parsed["iteration"])
            rows.append(parsed)
    return rows
