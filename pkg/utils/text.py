import re
from typing import List, Sequence, Tuple

from nltk.tokenize import wordpunct_tokenize

_QUOTE_RE = re.compile(r'"([^"]+)"|(?<![\w])\'([^\']+)\'(?![\w])')
_FANCY_QUOTES = str.maketrans({"“": '"', "”": '"', "‘": "'", "’": "'"})


def tokenize(text: str) -> List[str]:
    """Whitespace + punctuation splitting; original casing is kept."""
    return wordpunct_tokenize(text)


def query_tokens(text: str) -> Tuple[str, ...]:
    """Keyword queries are tokenized like the corpus and lowercased."""
    return tuple(t.lower() for t in tokenize(text))


def split_quoted(text: str) -> List[Tuple[str, bool]]:
    """Split an explanation into (token, quoted) pairs.

    Quoted segments stay whole and keep their inner spacing; everything else
    goes through tokenize(). All tokens are lowercased.
    """
    text = text.translate(_FANCY_QUOTES)
    out: List[Tuple[str, bool]] = []
    pos = 0
    for m in _QUOTE_RE.finditer(text):
        out.extend((t.lower(), False) for t in tokenize(text[pos:m.start()]))
        quoted = " ".join((m.group(1) or m.group(2)).lower().split())
        if quoted:
            out.append((quoted, True))
        pos = m.end()
    out.extend((t.lower(), False) for t in tokenize(text[pos:]))
    return out


def find_occurrences(tokens: Sequence[str], query: Sequence[str]) -> List[Tuple[int, int]]:
    """End-exclusive spans where `query` occurs verbatim in `tokens`."""
    q = tuple(query)
    width = len(q)
    if width == 0:
        return []
    return [(i, i + width) for i in range(len(tokens) - width + 1) if tuple(tokens[i:i + width]) == q]
