"""Embedding storage and the TransE / MDE score functions.

Both models share one layout: ``entity`` has shape ``(n_entities, S, dim)``
and ``relation`` has shape ``(n_relations, S, dim)`` with ``S = 1`` for
TransE and ``S = 3`` for MDE. Set ``s`` contributes the distance

    ``|| a_s * h_s + b_s * r_s + c_s * t_s ||_p``

weighted by ``w_s``; the signs ``(a_s, b_s, c_s)`` are ``(+, +, -)`` for the
TransE term and for MDE's three terms ``(+, +, -)``, ``(+, -, +)`` and
``(-, +, +)``, i.e. ``h+r-t``, ``h+t-r`` and ``t+r-h``.
"""

import numpy as np

from ..errors import InvalidArgumentError, UnknownEntityError, UnknownRelationError
from ..rng import stream

SIGNS = {
    "transe": np.array([[1.0, 1.0, -1.0]]),
    "mde": np.array([[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]]),
}


def lp_norm(x, p):
    if p == 1:
        return np.abs(x).sum(axis=-1)
    return np.sqrt(np.einsum("...i,...i->...", x, x))


def lp_norm_grad(x, norm, p):
    """d||x||_p / dx, with the subgradient 0 at kinks."""
    if p == 1:
        return np.sign(x)
    norm = np.asarray(norm)[..., None]
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, x / safe, 0.0)


class EmbeddingSpace:
    """Entity and relation vectors of one trained (or initialized) model."""

    def __init__(self, entity, relation, config):
        self.config = config
        self.entity = np.ascontiguousarray(entity, dtype=np.float64)
        self.relation = np.ascontiguousarray(relation, dtype=np.float64)
        s, d = config.n_sets, config.dim
        if self.entity.ndim != 3 or self.entity.shape[1:] != (s, d):
            raise InvalidArgumentError(
                f"entity block must have shape (n, {s}, {d}), got {self.entity.shape}"
            )
        if self.relation.ndim != 3 or self.relation.shape[1:] != (s, d):
            raise InvalidArgumentError(
                f"relation block must have shape (n, {s}, {d}), got {self.relation.shape}"
            )
        self.signs = SIGNS[config.model]
        self.weights = np.asarray(config.weights, dtype=np.float64)

    @classmethod
    def initialize(cls, n_entities, n_relations, config, rng=None):
        """Uniform init in ``[-6/sqrt(dim), 6/sqrt(dim)]``.

        For TransE, entity and relation rows are then scaled to unit L2
        norm, following the original TransE recipe.
        """
        rng = stream(config.seed, "init") if rng is None else rng
        bound = 6.0 / np.sqrt(config.dim)
        s, d = config.n_sets, config.dim
        entity = rng.uniform(-bound, bound, size=(n_entities, s, d))
        relation = rng.uniform(-bound, bound, size=(n_relations, s, d))
        if config.model == "transe":
            entity /= np.linalg.norm(entity, axis=-1, keepdims=True)
            relation /= np.linalg.norm(relation, axis=-1, keepdims=True)
        return cls(entity, relation, config)

    @property
    def entity_count(self):
        return self.entity.shape[0]

    @property
    def relation_count(self):
        return self.relation.shape[0]

    def copy(self):
        return EmbeddingSpace(self.entity.copy(), self.relation.copy(), self.config)

    def check_ids(self, heads, relations, tails):
        heads, relations, tails = (np.asarray(x, dtype=np.int64) for x in (heads, relations, tails))
        n_e, n_r = self.entity_count, self.relation_count
        for arr in (heads, tails):
            if arr.size and (arr.min() < 0 or arr.max() >= n_e):
                raise UnknownEntityError(f"entity id out of range [0, {n_e})")
        if relations.size and (relations.min() < 0 or relations.max() >= n_r):
            raise UnknownRelationError(f"relation id out of range [0, {n_r})")
        return heads, relations, tails

    def differences(self, heads, relations, tails):
        """Per-set difference vectors, shape ``broadcast + (S, dim)``."""
        e_h = self.entity[heads]
        e_r = self.relation[relations]
        e_t = self.entity[tails]
        a, b, c = (self.signs[:, i, None] for i in range(3))
        return a * e_h + b * e_r + c * e_t

    def score(self, heads, relations, tails):
        """Vectorized score over broadcastable id arrays; lower is better."""
        heads, relations, tails = self.check_ids(heads, relations, tails)
        diff = self.differences(heads, relations, tails)
        dist = lp_norm(diff, self.config.norm_p)
        return dist @ self.weights - self.config.offset

    __call__ = score

    def score_triple(self, triple):
        h, r, t = triple
        return float(self.score(np.array([h]), np.array([r]), np.array([t]))[0])

    def tweet_vector(self, entity):
        """Vector used for similarity: the first (or only) set."""
        return self.entity[int(entity), 0]

    def all_finite(self):
        return bool(np.isfinite(self.entity).all() and np.isfinite(self.relation).all())


def score_transe(space, triple, config=None):
    """``||h + r - t||_p`` for one triple of a TransE space."""
    config = config or space.config
    if config.model != "transe":
        raise InvalidArgumentError("score_transe needs a TransE configuration")
    h, r, t = space.check_ids(*(np.array([x]) for x in triple))
    diff = space.entity[h[0], 0] + space.relation[r[0], 0] - space.entity[t[0], 0]
    return float(lp_norm(diff, config.norm_p))


def score_mde(space, triple, config=None):
    """Weighted sum of MDE's three distances minus ``psi``; may be negative."""
    config = config or space.config
    if config.model != "mde" or space.entity.shape[1] != 3:
        raise InvalidArgumentError("score_mde needs an MDE configuration with three sets")
    h, r, t = (int(x[0]) for x in space.check_ids(*(np.array([x]) for x in triple)))
    e, rel, p = space.entity, space.relation, config.norm_p
    d_i = e[h, 0] + rel[r, 0] - e[t, 0]
    d_j = e[h, 1] + e[t, 1] - rel[r, 1]
    d_k = e[t, 2] + rel[r, 2] - e[h, 2]
    return float(
        config.w1 * lp_norm(d_i, p)
        + config.w2 * lp_norm(d_j, p)
        + config.w3 * lp_norm(d_k, p)
        - config.psi
    )


def score_function(config):
    return score_transe if config.model == "transe" else score_mde


def from_vectors(config, entities, relations):
    """Build a space from nested lists ``[entity][set][component]``."""
    return EmbeddingSpace(np.asarray(entities, float), np.asarray(relations, float), config)

