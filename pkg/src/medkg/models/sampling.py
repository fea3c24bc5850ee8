"""Negative sampling by head-or-tail corruption."""

import numpy as np

from ..errors import InvalidArgumentError
from ..graph import Triple

MAX_RETRIES = 10


def corrupt(triples, n_entities, rng, known=None, k=1, max_retries=MAX_RETRIES):
    """Corrupt each triple ``k`` times, replacing head or tail with equal odds.

    Rows are grouped per source triple: output row ``i`` corrupts input row
    ``i // k``. When ``known`` (a :class:`~medkg.graph.KnowledgeGraph`) is
    given, corruptions that are known triples are redrawn up to
    ``max_retries`` times and then accepted as they are.

    Returns
    -------
    negatives : ndarray of shape (n * k, 3)
    head_side : ndarray of bool, True where the head was replaced
    """
    if n_entities < 2:
        raise InvalidArgumentError("negative sampling needs at least 2 entities")
    triples = np.repeat(np.asarray(triples, dtype=np.int64).reshape(-1, 3), k, axis=0)
    n = len(triples)
    head_side = rng.random(n) < 0.5
    col = np.where(head_side, 0, 2)
    out = triples.copy()
    out[np.arange(n), col] = rng.integers(n_entities, size=n)
    if known is not None:
        todo = np.flatnonzero(known.contains(out))
        for _ in range(max_retries):
            if not len(todo):
                break
            out[todo, col[todo]] = rng.integers(n_entities, size=len(todo))
            todo = todo[known.contains(out[todo])]
    return out, head_side


def sample_negative(graph, triple, rng, filtered=True):
    """One corruption of ``triple``; the relation is never changed."""
    neg, _ = corrupt([triple], graph.entity_count, rng, known=graph if filtered else None)
    return Triple(*neg[0].tolist())
