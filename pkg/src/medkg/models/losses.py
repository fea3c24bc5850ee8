"""Margin ranking loss, limit-based loss and their analytic gradients."""

from collections import defaultdict
from typing import NamedTuple

import numpy as np

from .embedding import lp_norm, lp_norm_grad


def loss_limit(positive_scores, negative_scores, config):
    """``beta1 * sum [f(pos) - gamma1]_+  +  beta2 * sum [gamma2 - f(neg)]_+``."""
    pos = np.asarray(positive_scores, dtype=np.float64)
    neg = np.asarray(negative_scores, dtype=np.float64)
    return float(
        config.beta1 * np.maximum(0.0, pos - config.gamma1).sum()
        + config.beta2 * np.maximum(0.0, config.gamma2 - neg).sum()
    )


def loss_margin(positive_score, negative_score, config):
    """``max(0, margin + f(pos) - f(neg))``, elementwise for arrays."""
    out = np.maximum(
        0.0,
        config.margin + np.asarray(positive_score, float) - np.asarray(negative_score, float),
    )
    return float(out) if out.ndim == 0 else out


def score_gradients(space, triples):
    """Scores of ``triples`` and d score / d(h, r, t) for each of them.

    Returns ``(scores, g_head, g_rel, g_tail)``; gradients have shape
    ``(n, S, dim)``.
    """
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    h, r, t = triples.T
    diff = space.differences(h, r, t)
    norm = lp_norm(diff, space.config.norm_p)
    scores = norm @ space.weights - space.config.offset
    g = lp_norm_grad(diff, norm, space.config.norm_p) * space.weights[:, None]
    signs = space.signs
    return scores, signs[:, 0, None] * g, signs[:, 1, None] * g, signs[:, 2, None] * g


class Update(NamedTuple):
    """Sparse gradient: rows may repeat and must be accumulated."""

    entity_ids: np.ndarray
    entity_grads: np.ndarray
    relation_ids: np.ndarray
    relation_grads: np.ndarray
    loss: float


def batch_gradients(space, positives, negatives, config=None):
    """Loss and gradient of a batch.

    ``negatives`` holds ``k`` corruptions per positive, grouped so that row
    ``i`` of ``negatives`` belongs to positive ``i // k``.
    """
    config = config or space.config
    positives = np.asarray(positives, dtype=np.int64).reshape(-1, 3)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(-1, 3)
    k = len(negatives) // len(positives)
    owner = np.repeat(np.arange(len(positives)), k)

    f_pos, gh_p, gr_p, gt_p = score_gradients(space, positives)
    f_neg, gh_n, gr_n, gt_n = score_gradients(space, negatives)

    if config.loss == "margin":
        slack = config.margin + f_pos[owner] - f_neg
        active = slack > 0
        loss = float(slack[active].sum())
        c_pos = np.bincount(owner[active], minlength=len(positives)).astype(float)
        c_neg = -active.astype(float)
    else:
        over = f_pos - config.gamma1
        under = config.gamma2 - f_neg
        loss = float(
            config.beta1 * over[over > 0].sum() + config.beta2 * under[under > 0].sum()
        )
        c_pos = config.beta1 * (over > 0)
        c_neg = -config.beta2 * (under > 0)

    c_pos = c_pos[:, None, None]
    c_neg = c_neg[:, None, None]
    return Update(
        np.concatenate([positives[:, 0], positives[:, 2], negatives[:, 0], negatives[:, 2]]),
        np.concatenate([c_pos * gh_p, c_pos * gt_p, c_neg * gh_n, c_neg * gt_n]),
        np.concatenate([positives[:, 1], negatives[:, 1]]),
        np.concatenate([c_pos * gr_p, c_neg * gr_n]),
        loss,
    )


def pair_loss(space, triple, negative, config=None):
    """Loss contributed by one positive and one corruption."""
    config = config or space.config
    f_pos = space.score_triple(triple)
    f_neg = space.score_triple(negative)
    if config.loss == "margin":
        return loss_margin(f_pos, f_neg, config)
    return loss_limit([f_pos], [f_neg], config)


def gradient(space, triple, negative, config=None):
    """Analytic gradient of :func:`pair_loss` with respect to every vector
    it touches.

    Returns a dict with keys ``("entity", id)`` and ``("relation", id)``
    mapping to arrays of shape ``(S, dim)``. Vectors whose loss term is
    inactive receive zeros.
    """
    upd = batch_gradients(space, [triple], [negative], config)
    out = defaultdict(lambda: np.zeros((space.config.n_sets, space.config.dim)))
    for i, g in zip(upd.entity_ids.tolist(), upd.entity_grads):
        out[("entity", i)] = out[("entity", i)] + g
    for i, g in zip(upd.relation_ids.tolist(), upd.relation_grads):
        out[("relation", i)] = out[("relation", i)] + g
    return dict(out)


def apply_update(space, update, learning_rate):
    """In-place SGD step; returns the entity ids whose vectors moved."""
    if learning_rate == 0:
        return np.empty(0, dtype=np.int64)
    moving = np.any(update.entity_grads != 0, axis=(1, 2))
    np.subtract.at(space.entity, update.entity_ids[moving], learning_rate * update.entity_grads[moving])
    rmove = np.any(update.relation_grads != 0, axis=(1, 2))
    np.subtract.at(
        space.relation, update.relation_ids[rmove], learning_rate * update.relation_grads[rmove]
    )
    return update.entity_ids[moving]
