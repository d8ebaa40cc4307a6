import logging
from typing import List, Sequence, TypeVar

import numpy as np

from core.errors import AnchorMissing
from core.logical_form import LogicalForm
from core.models import Instance, LabeledInstance, Partition
from execution.strict import exec_strict

logger = logging.getLogger("next.training.partition")

T = TypeVar("T")


def ordered_forms(forms: Sequence[LogicalForm]) -> List[LogicalForm]:
    """Forms in form-id order, the order used for every tie and conflict."""
    return sorted(forms, key=lambda f: f.form_id)


def strict_matches(x: Instance, forms: Sequence[LogicalForm]) -> List[LogicalForm]:
    out = []
    for form in forms:
        try:
            if exec_strict(form, x):
                out.append(form)
        except AnchorMissing:
            logger.debug(f"form {form.form_id} skipped on {x.instance_id}: anchor missing")
    return out


def partition_corpus(corpus: Sequence[Instance], forms: Sequence[LogicalForm]) -> Partition:
    """
    Split a corpus into strictly matched (labeled) and unmatched instances.

    Args:
        corpus: Instances to partition
        forms: Labeling functions

    Returns:
        Partition; when forms with different labels match one instance, the
        lowest form id wins and the instance counts as a conflict
    """
    forms = ordered_forms(forms)
    labeled: List[LabeledInstance] = []
    unlabeled: List[Instance] = []
    conflicts = 0
    for x in corpus:
        matches = strict_matches(x, forms)
        if not matches:
            unlabeled.append(x)
            continue
        if len({f.label for f in matches}) > 1:
            conflicts += 1
            logger.debug(f"{x.instance_id}: conflicting labels {sorted({f.label for f in matches})}")
        labeled.append(LabeledInstance(instance=x, label=matches[0].label, form_id=matches[0].form_id))
    logger.info(f"Partitioned {len(corpus)} instances: N_a={len(labeled)}, N_u={len(unlabeled)}, "
                f"conflicts={conflicts}")
    return Partition(labeled=labeled, unlabeled=unlabeled, conflicts=conflicts)


def subsample(items: Sequence[T], count: int, seed: int) -> List[T]:
    """`count` items drawn without replacement, kept in their original order."""
    if count >= len(items):
        return list(items)
    keep = np.sort(np.random.default_rng(seed).choice(len(items), size=count, replace=False))
    return [items[i] for i in keep]


def subsample_unlabeled(partition: Partition, fraction: float, seed: int) -> Partition:
    """
    Keep a fraction of S_u, as in the unlabeled-data-size studies.

    Args:
        partition: Full strict partition
        fraction: Share of S_u to keep, in (0, 1]; the kept count is rounded
        seed: Seed for the draw

    Returns:
        Partition with the same S_a and the reduced S_u
    """
    if fraction >= 1.0:
        return partition
    count = int(round(fraction * partition.n_u))
    unlabeled = subsample(partition.unlabeled, count, seed)
    logger.info(f"Kept {len(unlabeled)} of {partition.n_u} unlabeled instance(s)")
    return Partition(labeled=partition.labeled, unlabeled=unlabeled, conflicts=partition.conflicts)
