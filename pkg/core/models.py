import math
from functools import cached_property
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import AnchorMissing
from core.predicates import AnchorRole

Span = Tuple[int, int]


class Instance(BaseModel):
    """A tokenized sentence with its anchor spans (end-exclusive token indices)."""
    model_config = ConfigDict(frozen=True)

    instance_id: str = ""
    tokens: Tuple[str, ...]
    anchors: Dict[AnchorRole, Span] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_anchors(self) -> "Instance":
        for role, (start, end) in self.anchors.items():
            if not 0 <= start < end <= len(self.tokens):
                raise ValueError(f"anchor {role.value} span ({start}, {end}) is empty or outside "
                                 f"{len(self.tokens)} tokens")
        return self

    @cached_property
    def lower_tokens(self) -> Tuple[str, ...]:
        return tuple(t.lower() for t in self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def span(self, role: AnchorRole) -> Span:
        if role not in self.anchors:
            raise AnchorMissing(f"instance {self.instance_id or '<unnamed>'} has no {role.value} anchor")
        return self.anchors[role]

    @classmethod
    def from_role_tokens(cls, instance_id: str, tokens: List[str]) -> "Instance":
        """Resolve TACRED-style SUBJ-*/OBJ-* placeholder runs into anchor spans."""
        anchors: Dict[AnchorRole, Span] = {}
        for role, prefix in ((AnchorRole.SUBJECT, "SUBJ-"), (AnchorRole.OBJECT, "OBJ-")):
            positions = [i for i, t in enumerate(tokens) if t.upper().startswith(prefix)]
            if positions:
                start = positions[0]
                end = start
                while end < len(tokens) and tokens[end].upper().startswith(prefix):
                    end += 1
                anchors[role] = (start, end)
        return cls(instance_id=instance_id, tokens=tuple(tokens), anchors=anchors)


class LabelSet(BaseModel):
    """Ordered class names; exactly one of them is the catch-all None label."""
    model_config = ConfigDict(frozen=True)

    labels: Tuple[str, ...]
    none_label: str

    @model_validator(mode="after")
    def _check(self) -> "LabelSet":
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"labels are not unique: {self.labels}")
        if self.labels.count(self.none_label) != 1:
            raise ValueError(f"None label {self.none_label!r} must appear exactly once in {self.labels}")
        return self

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @classmethod
    def from_labels(cls, labels, none_label: str) -> "LabelSet":
        ordered = [none_label] + sorted({l for l in labels if l != none_label})
        return cls(labels=tuple(ordered), none_label=none_label)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

class MatchResult(BaseModel):
    form_id: str
    score: float = Field(ge=0.0, le=1.0)
    label: str


class PseudoLabel(BaseModel):
    instance_id: str
    label: str
    u: float
    form_id: Optional[str] = None
    from_entropy_rule: bool = False


class PseudoLabeledItem(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    instance: Instance
    label: str
    u: float
    omega: float = Field(gt=0.0)


class PseudoLabeledBatch(BaseModel):
    items: List[PseudoLabeledItem]

    @model_validator(mode="after")
    def _check_weights(self) -> "PseudoLabeledBatch":
        if self.items and not math.isclose(sum(i.omega for i in self.items), 1.0, abs_tol=1e-9):
            raise ValueError("pseudo-label weights must sum to 1")
        return self


class LabeledInstance(BaseModel):
    instance: Instance
    label: str
    form_id: str


class Partition(BaseModel):
    """Strict-match split of a corpus into S_a (labeled) and S_u (unlabeled)."""
    labeled: List[LabeledInstance]
    unlabeled: List[Instance]
    conflicts: int = 0

    @property
    def n_a(self) -> int:
        return len(self.labeled)

    @property
    def n_u(self) -> int:
        return len(self.unlabeled)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

class SoftConfig(BaseModel):
    """Soft execution knobs."""
    model_config = ConfigDict(extra="ignore")

    mu: float = Field(0.5, gt=0.0, lt=1.0)
    slack_width: int = Field(2, ge=0)
    soft_counting: bool = True

    @property
    def effective_slack(self) -> int:
        return self.slack_width if self.soft_counting else 0


class MatcherConfig(BaseModel):
    model_config = ConfigDict(extra="ignore")

    max_window: int = Field(2, ge=1)
    encoder: str = "mean"
    unigram_weight: float = Field(0.6, gt=0.0, le=1.0)
    tau: float = 0.8
    exact_matching: bool = False


class PretrainConfig(BaseModel):
    model_config = ConfigDict(extra="ignore")

    lr: float = Field(0.1, gt=0.0)
    epochs: int = Field(10, ge=0)
    gamma: float = Field(0.5, ge=0.0)
    batch_size: int = Field(100, ge=1)
    seed: int = 0


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="ignore")

    alpha: float = Field(0.7, ge=0.0)
    beta: float = Field(0.2, ge=0.0)
    gamma: float = Field(2.5, ge=0.0)
    theta_t: float = Field(1.0, ge=0.0)
    entropy_threshold: Optional[float] = None
    labeled_batch: int = Field(50, ge=1)
    unlabeled_batch: int = Field(100, ge=1)
    string_batch: int = Field(20, ge=1)
    lr: float = Field(0.5, gt=0.0)
    epochs: int = Field(10, ge=0)
    seed: int = 0
    use_find: bool = True
    use_sim: bool = True
    explanation_count: Optional[int] = Field(None, ge=1)
    unlabeled_fraction: float = Field(1.0, gt=0.0, le=1.0)

    def threshold_for(self, num_labels: int) -> float:
        if self.entropy_threshold is not None:
            return self.entropy_threshold
        return 0.4 * math.log(num_labels)


class ParserConfig(BaseModel):
    model_config = ConfigDict(extra="ignore")

    lr: float = Field(0.1, gt=0.0)
    epochs: int = Field(50, ge=0)
    max_candidates: int = Field(512, ge=1)


class SyntheticSpec(BaseModel):
    """Desk-scale paraphrase corpus recipe."""
    model_config = ConfigDict(extra="ignore")

    seed: int = 0
    num_forms: int = Field(5, ge=1, le=5)
    size: int = Field(1000, ge=1)
    test_size: int = Field(200, ge=0)
    paraphrase_rate: float = Field(0.4, ge=0.0, le=1.0)
    dim: int = Field(50, ge=16)
    synonym_similarity: float = Field(0.25, gt=0.0, lt=1.0)
    synonyms: Dict[str, List[str]] = Field(default_factory=dict)
    none_label: str = "no_relation"


class RunPaths(BaseModel):
    model_config = ConfigDict(extra="forbid")

    corpus: str
    output_dir: str
    forms: Optional[str] = None
    explanations: Optional[str] = None
    lexicon: Optional[str] = None
    embeddings: Optional[str] = None
    queries: Optional[str] = None
    gold: Optional[str] = None
    test_corpus: Optional[str] = None
    test_gold: Optional[str] = None

    @model_validator(mode="after")
    def _forms_source(self) -> "RunPaths":
        if not self.forms and not self.explanations:
            raise ValueError("either 'forms' or 'explanations' must be given")
        return self


class RunConfig(BaseModel):
    """Versioned `train` config: a profile name plus overrides and file paths."""
    model_config = ConfigDict(extra="forbid")

    version: Literal[1] = 1
    profile: str = "tacred"
    none_label: str = "no_relation"
    paths: RunPaths
    soft: SoftConfig = Field(default_factory=SoftConfig)
    matcher: MatcherConfig = Field(default_factory=MatcherConfig)
    pretrain: PretrainConfig = Field(default_factory=PretrainConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    parser: ParserConfig = Field(default_factory=ParserConfig)


# --------------------------------------------------------------------------
# file records
# --------------------------------------------------------------------------

class CorpusRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str
    tokens: List[str]
    anchors: Optional[Dict[AnchorRole, List[int]]] = None

    @field_validator("anchors")
    @classmethod
    def _pairs(cls, value):
        if value is not None:
            for role, span in value.items():
                if len(span) != 2:
                    raise ValueError(f"anchor {role.value} must be [start, end]")
        return value

    def to_instance(self) -> Instance:
        if self.anchors is None:
            return Instance.from_role_tokens(self.id, self.tokens)
        return Instance(instance_id=self.id, tokens=tuple(self.tokens),
                        anchors={role: (span[0], span[1]) for role, span in self.anchors.items()})

    @classmethod
    def from_instance(cls, instance: Instance) -> "CorpusRecord":
        anchors = {role: [s, e] for role, (s, e) in sorted(instance.anchors.items(), key=lambda kv: kv[0].value)}
        return cls(id=instance.instance_id, tokens=list(instance.tokens), anchors=anchors)


class LabelRecord(BaseModel):
    """Gold label or prediction for one instance."""
    id: str
    label: str


class ExplanationRecord(BaseModel):
    id: str
    text: str
    label: str
    source_id: str


class FormRecord(BaseModel):
    id: str
    sexpr: str
    label: str


class QueryRecord(BaseModel):
    """A keyword query tagged with the label of the labeling function it came from."""
    id: str
    text: str
    label: str


class PseudoLabelRecord(BaseModel):
    instance_id: str
    label: str
    u: float
    omega: float
