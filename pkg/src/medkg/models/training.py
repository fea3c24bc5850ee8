"""Mini-batch stochastic gradient descent over shuffled training triples."""

import logging
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..errors import DivergenceError, EmptyGraphError
from ..evaluation import hits_at_one
from ..rng import stream
from .embedding import EmbeddingSpace
from .losses import apply_update, batch_gradients
from .sampling import corrupt

log = logging.getLogger(__name__)


@dataclass
class TrainReport:
    loss_trace: List[float]
    train_hit1: float
    wall_time: float = field(default=0.0, compare=False)


def train(graph, config, space=None, evaluate_fit=True, callback=None):
    """Fit an embedding space to every triple of ``graph``.

    Each iteration is one epoch: the training triples are shuffled, cut
    into batches of ``config.batch_size``, and for every batch
    ``negatives_per_positive`` corruptions per triple are drawn and one SGD
    step is taken on the summed batch loss. TransE entity vectors moved
    during an epoch are scaled back to unit length at the end of it.

    ``graph`` provides the vocabulary sizes and the training triples; to
    train on a split, pass ``full_graph.with_triples(train)``.

    Returns
    -------
    space : EmbeddingSpace
    report : TrainReport
        ``train_hit1`` is the filtered hit@1 of the training triples, or
        NaN when ``evaluate_fit`` is False.
    """
    triples = graph.triples
    if not len(triples):
        raise EmptyGraphError("no training triples")
    start = time.perf_counter()
    if space is None:
        space = EmbeddingSpace.initialize(graph.entity_count, graph.relation_count, config)
    shuffle_rng = stream(config.seed, "shuffle")
    neg_rng = stream(config.seed, "negative")
    known = graph if config.filtered_negatives else None
    trace = []
    for epoch in range(1, config.iterations + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            total = _epoch(space, graph, config, shuffle_rng, neg_rng, known)
        mean_loss = total / len(triples)
        if not np.isfinite(mean_loss) or not space.all_finite():
            raise DivergenceError(epoch, mean_loss)
        trace.append(mean_loss)
        if callback is not None:
            callback(epoch, mean_loss, space)
        if epoch % 100 == 0:
            log.debug("%s epoch %d loss %.6f", config.model, epoch, mean_loss)
    hit1 = hits_at_one(space, triples, graph) if evaluate_fit else float("nan")
    return space, TrainReport(trace, hit1, time.perf_counter() - start)


def _epoch(space, graph, config, shuffle_rng, neg_rng, known):
    """One shuffled pass; returns the summed loss."""
    triples = graph.triples
    order = shuffle_rng.permutation(len(triples))
    total = 0.0
    moved = []
    for lo in range(0, len(triples), config.batch_size):
        pos = triples[order[lo:lo + config.batch_size]]
        neg, _ = corrupt(pos, graph.entity_count, neg_rng, known, k=config.negatives_per_positive)
        upd = batch_gradients(space, pos, neg, config)
        total += upd.loss
        moved.append(apply_update(space, upd, config.learning_rate))
    if config.model == "transe":
        rows = np.unique(np.concatenate(moved))
        if len(rows):
            block = space.entity[rows]
            space.entity[rows] = block / np.linalg.norm(block, axis=-1, keepdims=True)
    return total
