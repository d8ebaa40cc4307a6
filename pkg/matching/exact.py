from typing import Sequence

import numpy as np

from core.errors import EmptyQuery
from core.models import Instance
from utils.text import find_occurrences


class ExactMatcher:
    """Binary string matcher: 1 at the start of every exact occurrence of the query, 0 elsewhere."""

    def string_match_scores(self, x: Instance, query: Sequence[str]) -> np.ndarray:
        if not query:
            raise EmptyQuery(f"empty keyword query against instance {x.instance_id or '<unnamed>'}")
        scores = np.zeros(len(x))
        for start, _ in find_occurrences(x.lower_tokens, [t.lower() for t in query]):
            scores[start] = 1.0
        return scores
