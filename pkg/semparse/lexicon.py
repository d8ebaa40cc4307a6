import logging
from collections import defaultdict
from functools import cached_property
from typing import Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from core.errors import CategoryError, DataFormatError
from semparse.categories import SKIP, Category, parse_category
from semparse.semantics import CONNECTIVES, Template, compile_template
from utils.text import tokenize

logger = logging.getLogger("next.semparse.lexicon")


class LexiconEntry(BaseModel):
    """surface TAB category TAB semantics; SKIP entries carry `-` as semantics."""
    model_config = ConfigDict(frozen=True)

    surface: str
    category: str
    semantics: str = "-"

    @model_validator(mode="after")
    def _check(self) -> "LexiconEntry":
        if not self.tokens:
            raise CategoryError(f"lexicon entry has an empty surface: {self.surface!r}")
        if self.is_skip:
            return self
        cat = self.parsed_category
        template = self.template
        if cat.is_atomic and cat.atom == "CONJ":
            body = template.body
            predicate = getattr(getattr(body, "node", None), "predicate", None)
            if template.arity != 0 or predicate not in CONNECTIVES:
                raise CategoryError(f"CONJ entry {self.surface!r} must name And, Or or Separator")
        elif template.arity != cat.arity:
            raise CategoryError(f"entry {self.surface!r}: semantics takes {template.arity} argument(s) "
                                f"but category {cat} takes {cat.arity}")
        return self

    @property
    def is_skip(self) -> bool:
        return self.category.strip() == SKIP

    @cached_property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(t.lower() for t in tokenize(self.surface))

    @cached_property
    def parsed_category(self) -> Category:
        return parse_category(self.category)

    @cached_property
    def template(self) -> Template:
        return compile_template(self.semantics)


class Lexicon:
    """Entries indexed by surface token sequence, with SKIP words stripped from surfaces."""

    def __init__(self, entries: List[LexiconEntry]):
        if not entries:
            raise CategoryError("lexicon is empty")
        self.entries = list(entries)
        self.skip_phrases: Set[Tuple[str, ...]] = {e.tokens for e in entries if e.is_skip}
        self.skip_words: Set[str] = {p[0] for p in self.skip_phrases if len(p) == 1}
        self._index: Dict[Tuple[str, ...], List[LexiconEntry]] = defaultdict(list)
        for entry in entries:
            if entry.is_skip:
                continue
            key = self.strip_skips(entry.tokens)
            if not key:
                logger.warning(f"lexicon entry {entry.surface!r} consists of SKIP words only; ignored")
                continue
            self._index[key].append(entry)
        self.max_surface = max((len(k) for k in self._index), default=0)

    def __len__(self) -> int:
        return len(self.entries)

    def strip_skips(self, tokens: Tuple[str, ...]) -> Tuple[str, ...]:
        return tuple(t for t in tokens if t not in self.skip_words)

    def lookup(self, surface: Tuple[str, ...]) -> List[LexiconEntry]:
        return self._index.get(surface, [])

    @classmethod
    def load(cls, path: str) -> "Lexicon":
        """Read a `surface TAB category TAB semantics` file; `#` starts a comment line."""
        entries = []
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) not in (2, 3):
                    raise DataFormatError(f"{path}:{line_no}: expected 3 tab-separated fields, got {len(parts)}")
                try:
                    entries.append(LexiconEntry(surface=parts[0], category=parts[1],
                                                semantics=parts[2] if len(parts) == 3 else "-"))
                except (CategoryError, ValueError) as e:
                    raise DataFormatError(f"{path}:{line_no}: {e}") from e
        logger.info(f"Loaded {len(entries)} lexicon entries from {path}")
        return cls(entries)

    @classmethod
    def from_rows(cls, rows: List[Tuple[str, str, Optional[str]]]) -> "Lexicon":
        return cls([LexiconEntry(surface=s, category=c, semantics=sem or "-") for s, c, sem in rows])
