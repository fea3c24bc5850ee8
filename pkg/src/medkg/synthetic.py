"""Synthetic knowledge graphs.

``small_world_social`` mimics the physician/research-post graph: a
Watts-Strogatz follow network with injected hub users, job titles, authored
posts and likes drawn by preferential attachment so that a few posts become
hubs as well. The other kinds each realize one relation pattern on an
abstract entity set and hold out 20% of the pattern-completing triples.
"""

from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidSpecError
from .graph import (
    IS_FOLLOWED_BY,
    IS_FOLLOWING,
    IS_TALKING_ABOUT,
    JOB_TITLE_PHYSICIAN,
    JOB_TITLE_RESEARCHER,
    JOB_TITLE_TYPE_IS,
    LIKES_RESEARCH_TWEET,
    TW52_RELATIONS,
    build_graph,
    infer_ontology,
)
from .rng import stream

KINDS = ("small_world_social", "symmetry", "antisymmetry", "inversion", "composition")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters.

    For the pattern kinds ``n_users`` is the number of abstract entities
    and ``mean_degree`` the number of pattern edges per entity.
    """

    kind: str = "small_world_social"
    n_users: int = 100
    n_tweets: int = 60
    mean_degree: int = 6
    rewire_probability: float = 0.1
    seed: int = 0
    likes_per_user: float = 3.0
    hub_count: Optional[int] = None
    hub_factor: float = 3.0
    job_fraction: float = 0.6
    reciprocal_probability: float = 0.5
    n_new_users: int = 0
    holdout_fraction: float = 0.2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_users < 2:
            raise InvalidSpecError("n_users must be >= 2")
        if not 1 <= self.mean_degree < self.n_users:
            raise InvalidSpecError("mean_degree must lie in [1, n_users)")
        if self.kind == "small_world_social" and self.n_tweets < 1:
            raise InvalidSpecError("n_tweets must be >= 1")
        for name in ("rewire_probability", "job_fraction", "reciprocal_probability"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidSpecError(f"{name} must lie in [0, 1]")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise InvalidSpecError("holdout_fraction must lie in [0, 1)")
        if self.likes_per_user < 0 or self.hub_factor < 0 or self.n_new_users < 0:
            raise InvalidSpecError("likes_per_user, hub_factor and n_new_users must be >= 0")

    @classmethod
    def from_mapping(cls, data):
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in types:
                raise InvalidSpecError(f"unknown generator parameter {key!r}")
            if value is None:
                continue
            if key == "kind":
                kwargs[key] = str(value)
            elif key in ("rewire_probability", "likes_per_user", "hub_factor", "job_fraction",
                         "reciprocal_probability", "holdout_fraction"):
                kwargs[key] = float(value)
            else:
                kwargs[key] = int(value)
        return cls(**kwargs)


class PatternDataset(NamedTuple):
    graph: object
    train: np.ndarray
    test: np.ndarray
    designated: tuple


def generate(spec):
    """Build the graph described by ``spec``; pure function of ``spec``."""
    return generate_dataset(spec).graph


def generate_dataset(spec):
    """Like :func:`generate` but also returns the train/test partition.

    For ``small_world_social`` the test set is empty; use
    :func:`medkg.ingest.split` instead.
    """
    rng = stream(spec.seed, "generate")
    if spec.kind == "small_world_social":
        graph = _social(spec, rng)
        empty = np.empty((0, 3), dtype=np.int64)
        return PatternDataset(graph, graph.triples, empty, ())
    labeled, held, designated = _PATTERNS[spec.kind](spec, rng)
    graph = build_graph(labeled)
    vocab = graph.vocabulary
    ids = lambda rows: np.array(  # noqa: E731
        [(vocab.entity_id(h), vocab.relation_id(r), vocab.entity_id(t)) for h, r, t in rows],
        dtype=np.int64,
    ).reshape(-1, 3)
    held_set = set(held)
    train = ids([x for x in labeled if x not in held_set])
    return PatternDataset(graph, train, ids(held), designated)


# ----------------------------------------------------------------------
# social graph
# ----------------------------------------------------------------------


def watts_strogatz(n, k, p, rng):
    """Directed edges of a ring lattice with ``k`` neighbours, rewired with
    probability ``p``. Each undirected edge gets a random direction."""
    half = max(1, k // 2)
    adj = [set() for _ in range(n)]
    edges = []
    for j in range(1, half + 1):
        for i in range(n):
            a, b = i, (i + j) % n
            if rng.random() < p:
                choices = [x for x in range(n) if x != a and x not in adj[a]]
                if choices:
                    b = choices[int(rng.integers(len(choices)))]
            if b == a or b in adj[a]:
                continue
            adj[a].add(b)
            adj[b].add(a)
            edges.append((a, b))
    out = []
    for a, b in edges:
        out.append((a, b) if rng.random() < 0.5 else (b, a))
    return out


def _social(spec, rng):
    n, nt = spec.n_users, spec.n_tweets
    users = [f"user_{i:04d}" for i in range(n + spec.n_new_users)]
    tweets = [f"tweet_{j:04d}" for j in range(nt)]
    rows = []

    follows = watts_strogatz(n, spec.mean_degree, spec.rewire_probability, rng)
    follow_set = set(follows)
    hub_count = spec.hub_count if spec.hub_count is not None else max(1, n // 50)
    hubs = [int(x) for x in rng.choice(n, size=min(hub_count, n), replace=False)]
    target = min(n - 1, int(np.ceil(spec.hub_factor * spec.mean_degree)))
    for hub in hubs:
        have = {a for a, b in follow_set if b == hub}
        pool = [u for u in range(n) if u != hub and u not in have]
        extra = max(0, target - len(have))
        for u in rng.permutation(pool)[:extra].tolist():
            follows.append((u, hub))
            follow_set.add((u, hub))
    for a, b in follows:
        rows.append((users[a], IS_FOLLOWING, users[b]))
        if rng.random() < spec.reciprocal_probability:
            rows.append((users[b], IS_FOLLOWED_BY, users[a]))

    classes = {0: JOB_TITLE_RESEARCHER, 1: JOB_TITLE_PHYSICIAN}
    for u in range(2, n):
        if rng.random() < spec.job_fraction:
            classes[u] = JOB_TITLE_RESEARCHER if rng.random() < 0.4 else JOB_TITLE_PHYSICIAN
    for u in sorted(classes):
        rows.append((users[u], JOB_TITLE_TYPE_IS, classes[u]))
    for u in range(n, n + spec.n_new_users):
        rows.append((users[u], JOB_TITLE_TYPE_IS, JOB_TITLE_PHYSICIAN))

    # researchers author most posts
    weights = np.array([3.0 if classes.get(u) == JOB_TITLE_RESEARCHER else 1.0 for u in range(n)])
    authors = rng.choice(n, size=nt, p=weights / weights.sum())
    authored = [[] for _ in range(n)]
    for j, a in enumerate(authors.tolist()):
        rows.append((users[a], IS_TALKING_ABOUT, tweets[j]))
        authored[a].append(j)

    followees = [[] for _ in range(n)]
    for a, b in follows:
        followees[a].append(b)
    popularity = np.ones(nt)
    liked = [set() for _ in range(n)]
    hub_set = set(hubs)
    for u in rng.permutation(n).tolist():
        count = rng.poisson(spec.likes_per_user * (3 if u in hub_set else 1))
        for _ in range(int(min(count, nt))):
            near = {j for f in followees[u] for j in authored[f]}
            near |= {j for f in followees[u] for j in liked[f]}
            near = sorted(near - liked[u])
            if near and rng.random() < 0.6:
                j = near[int(rng.integers(len(near)))]
            else:
                w = popularity.copy()
                w[list(liked[u])] = 0.0
                if w.sum() == 0:
                    break
                j = int(rng.choice(nt, p=w / w.sum()))
            liked[u].add(j)
            popularity[j] += 1.0
            rows.append((users[u], LIKES_RESEARCH_TWEET, tweets[j]))

    graph = build_graph(rows, relation_order=TW52_RELATIONS)
    return graph.with_ontology(infer_ontology(graph))


# ----------------------------------------------------------------------
# relation patterns
# ----------------------------------------------------------------------


def _entities(spec):
    return [f"e{i:04d}" for i in range(spec.n_users)]


def _random_pairs(n, count, rng, symmetric):
    seen = set()
    out = []
    tries = 0
    while len(out) < count and tries < 50 * count:
        tries += 1
        a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        key = (min(a, b), max(a, b)) if symmetric else (a, b)
        if key in seen or (not symmetric and (b, a) in seen):
            continue
        seen.add(key)
        out.append((a, b))
    return out


def _holdout(items, fraction, rng):
    k = int(round(len(items) * fraction))
    return set(rng.permutation(len(items))[:k].tolist())


def _symmetry(spec, rng):
    ents = _entities(spec)
    pairs = _random_pairs(spec.n_users, spec.n_users * spec.mean_degree // 2, rng, True)
    held_idx = _holdout(pairs, spec.holdout_fraction, rng)
    rows, held = [], []
    for i, (a, b) in enumerate(pairs):
        fwd = (ents[a], "symmetric_to", ents[b])
        rev = (ents[b], "symmetric_to", ents[a])
        rows += [fwd, rev]
        if i in held_idx:
            held.append(rev)
    return rows, held, ("symmetric_to",)


def _antisymmetry(spec, rng):
    ents = _entities(spec)
    pairs = _random_pairs(spec.n_users, spec.n_users * spec.mean_degree // 2, rng, False)
    rows = [(ents[a], "precedes", ents[b]) for a, b in pairs]
    held_idx = _holdout(rows, spec.holdout_fraction, rng)
    return rows, [rows[i] for i in sorted(held_idx)], ("precedes",)


def _inversion(spec, rng):
    ents = _entities(spec)
    pairs = _random_pairs(spec.n_users, spec.n_users * spec.mean_degree // 2, rng, False)
    held_idx = _holdout(pairs, spec.holdout_fraction, rng)
    rows, held = [], []
    for i, (a, b) in enumerate(pairs):
        inv = (ents[b], "child_of", ents[a])
        rows += [(ents[a], "parent_of", ents[b]), inv]
        if i in held_idx:
            held.append(inv)
    return rows, held, ("parent_of", "child_of")


def _composition(spec, rng):
    ents = _entities(spec)
    n = spec.n_users
    first = rng.permutation(n)
    second = rng.permutation(n)
    rows, composed = [], []
    for a in range(n):
        b = int(first[a])
        c = int(second[b])
        rows.append((ents[a], "r1", ents[b]))
        composed.append((ents[a], "r3", ents[c]))
    for b in range(n):
        rows.append((ents[b], "r2", ents[int(second[b])]))
    held_idx = _holdout(composed, spec.holdout_fraction, rng)
    return rows + composed, [composed[i] for i in sorted(held_idx)], ("r1", "r2", "r3")


_PATTERNS = {
    "symmetry": _symmetry,
    "antisymmetry": _antisymmetry,
    "inversion": _inversion,
    "composition": _composition,
}
