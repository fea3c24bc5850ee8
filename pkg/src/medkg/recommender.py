"""Existence probabilities, post recommendations and cohort analysis.

The probability of a candidate triple is the largest training score of its
relation divided by the candidate's score. Training triples are assumed to
be fitted well, so anything scoring at or below the worst of them is as
plausible as a known fact.
"""

from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from .errors import (
    DegenerateScoreError,
    DegenerateVectorError,
    EmptyCohortError,
    InvalidArgumentError,
    InvalidUserError,
    UnknownEntityError,
)
from .graph import (
    LIKES_RESEARCH_TWEET,
    TWEET,
    USER,
    degree_profile,
    followees,
    infer_ontology,
    liked,
)

DEFAULT_SIMILARITY = 0.9


@dataclass(frozen=True)
class ProbabilityBasis:
    relation: int
    max_training_score: float
    clamp: bool = True

    @classmethod
    def from_training(cls, space, train_triples, relation, clamp=True, scorer=None):
        """Basis for ``relation`` from the training triples that carry it."""
        train = np.asarray(train_triples, dtype=np.int64).reshape(-1, 3)
        rows = train[train[:, 1] == relation]
        if not len(rows):
            raise InvalidArgumentError(f"no training triples with relation {relation}")
        fn = space.score if scorer is None else scorer
        scores = np.asarray(fn(rows[:, 0], rows[:, 1], rows[:, 2]), dtype=np.float64)
        return cls(int(relation), float(scores.max()), clamp)


def probability(basis, score_a):
    """``max_training_score / score_a``.

    Clamped (the default), the result lies in ``[0, 1]`` and a non-positive
    ``score_a`` counts as certain. Unclamped, the bare ratio is returned and
    a zero score raises :class:`DegenerateScoreError`.
    """
    score_a = float(score_a)
    if basis.clamp:
        if score_a <= 0.0:
            return 1.0
        return min(1.0, max(0.0, basis.max_training_score / score_a))
    if score_a == 0.0:
        raise DegenerateScoreError("probability is undefined for a zero score")
    return basis.max_training_score / score_a


def probabilities(basis, scores):
    """Vectorized :func:`probability`."""
    scores = np.asarray(scores, dtype=np.float64)
    if basis.clamp:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = np.clip(basis.max_training_score / scores, 0.0, 1.0)
        return np.where(scores <= 0.0, 1.0, ratio)
    if np.any(scores == 0.0):
        raise DegenerateScoreError("probability is undefined for a zero score")
    return basis.max_training_score / scores


class Recommendation(NamedTuple):
    user: int
    tweet: int
    score: float
    probability: float


def _ontology(graph):
    return graph.ontology if graph.ontology is not None else infer_ontology(graph)


def _likes_relation(graph):
    return graph.vocabulary.relation_id(LIKES_RESEARCH_TWEET)


def recommend(space, graph, user, k, basis, scorer=None):
    """Top-``k`` posts for ``user`` by ascending likes-score.

    Posts the user already likes in ``graph`` are skipped; equal scores are
    ordered by entity id.
    """
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    onto = _ontology(graph)
    try:
        graph.vocabulary.check_entity(user)
    except UnknownEntityError:
        raise InvalidUserError(f"unknown user id {user}") from None
    if onto.kind(user) != USER:
        raise InvalidUserError(
            f"{graph.vocabulary.entity_label(user)} is a {onto.kind(user)}, not a user"
        )
    seen = liked(graph, user)
    cands = np.array([t for t in onto.entities_of_kind(TWEET) if t not in seen], dtype=np.int64)
    if not len(cands):
        return []
    rel = _likes_relation(graph)
    fn = space.score if scorer is None else scorer
    scores = np.asarray(fn(np.full(len(cands), user), np.full(len(cands), rel), cands), float)
    order = np.lexsort((cands, scores))[:k]
    probs = probabilities(basis, scores[order])
    return [
        Recommendation(int(user), int(t), float(s), float(p))
        for t, s, p in zip(cands[order].tolist(), scores[order].tolist(), probs.tolist())
    ]


def tweet_similarity(space, t1, t2):
    """Cosine of the angle between two post vectors (first embedding set)."""
    a = space.tweet_vector(t1)
    b = space.tweet_vector(t2)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateVectorError("cannot take the angle of a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


# ----------------------------------------------------------------------
# cohorts
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CohortSpec:
    """A named user group; ``predicate(user_id)`` decides membership."""

    name: str
    predicate: Callable[[int], bool]
    description: str = ""


def cohort_members(graph, cohort, candidates=None, limit=None):
    users = candidates if candidates is not None else _ontology(graph).entities_of_kind(USER)
    out = [u for u in users if cohort.predicate(u)]
    return out[:limit] if limit is not None else out


def cohort_mean_probability(space, graph, members, target_tweet, basis, scorer=None):
    """Mean probability that each member likes ``target_tweet``."""
    members = np.asarray(list(members), dtype=np.int64)
    if not len(members):
        raise EmptyCohortError("cohort has no members")
    rel = _likes_relation(graph)
    fn = space.score if scorer is None else scorer
    scores = fn(members, np.full(len(members), rel), np.full(len(members), int(target_tweet)))
    return float(np.mean(probabilities(basis, scores)))


@dataclass
class CohortRow:
    name: str
    description: str
    members: List[int]
    mean_probability: Optional[float]
    mean_probability_unclamped: Optional[float]


def target_cohorts(
    space,
    graph,
    target_tweet,
    hub_min_followers=200,
    b_following=(25, 25),
    similarity=DEFAULT_SIMILARITY,
    user_class=None,
):
    """The four user groups compared for a target post.

    1. users following a hub A, where both the user and A like a post
       similar to the target;
    2. users following a hub A that likes a similar post, the user not;
    3. users following a focused user B (following count within
       ``b_following``, all followees classified as physicians or
       researchers), where both the user and B like a similar post;
    4. users who follow nobody and like nothing.

    Users already liking the target are left out, and a user lands in the
    first group that admits them, so the groups are disjoint.
    """
    onto = _ontology(graph)
    target_tweet = int(target_tweet)
    if onto.kind(target_tweet) != TWEET:
        raise InvalidArgumentError("target must be a tweet entity")
    tweets = onto.entities_of_kind(TWEET)
    similar = {
        t for t in tweets
        if t != target_tweet and tweet_similarity(space, t, target_tweet) >= similarity
    }
    users = onto.entities_of_kind(USER)
    profiles = {u: degree_profile(graph, u) for u in users}
    hubs = {u for u in users if profiles[u].follower_count >= hub_min_followers}
    lo, hi = b_following
    focused = {
        u for u in users
        if lo <= profiles[u].following_count <= hi
        and all(onto.user_classes.get(f, "unclassified") != "unclassified" for f in followees(graph, u))
    }

    def likes_similar(u):
        return bool(liked(graph, u) & similar)

    def eligible(u):
        if target_tweet in liked(graph, u):
            return False
        return user_class is None or onto.user_classes.get(u) == user_class

    specs = [
        CohortSpec(
            "follow_A_both_like_similar",
            lambda u: likes_similar(u) and any(likes_similar(a) for a in followees(graph, u) & hubs),
            "Users U that follow A. A and U like a Tweet similar to C",
        ),
        CohortSpec(
            "follow_A_A_likes_similar",
            lambda u: not likes_similar(u)
            and any(likes_similar(a) for a in followees(graph, u) & hubs),
            "Users U that follow A. A likes a Tweet similar to C",
        ),
        CohortSpec(
            "follow_B_similar",
            lambda u: likes_similar(u)
            and any(likes_similar(b) for b in followees(graph, u) & focused),
            "Users U that follow B. U and B like a Tweet similar to C",
        ),
        CohortSpec(
            "new_users",
            lambda u: profiles[u].following_count == 0 and profiles[u].liked_count == 0,
            "New users U that still follow nobody and like no Tweet",
        ),
    ]
    taken = set()
    groups = []
    for spec in specs:
        members = [u for u in users if u not in taken and eligible(u) and spec.predicate(u)]
        taken.update(members)
        groups.append((spec, members))
    return groups


def cohort_analysis(
    space,
    graph,
    train_triples,
    target_tweet,
    group_size=5,
    scorer=None,
    **cohort_kwargs,
):
    """One row per group with clamped and unclamped mean probabilities.

    At most ``group_size`` members (lowest ids first) are kept per group;
    empty groups get ``None`` means.
    """
    rel = _likes_relation(graph)
    basis = ProbabilityBasis.from_training(space, train_triples, rel, True, scorer)
    raw = ProbabilityBasis(rel, basis.max_training_score, clamp=False)
    rows = []
    for spec, members in target_cohorts(space, graph, target_tweet, **cohort_kwargs):
        members = members[:group_size] if group_size else members
        if members:
            clamped = cohort_mean_probability(space, graph, members, target_tweet, basis, scorer)
            try:
                unclamped = cohort_mean_probability(space, graph, members, target_tweet, raw, scorer)
            except DegenerateScoreError:
                unclamped = float("nan")
        else:
            clamped = unclamped = None
        rows.append(CohortRow(spec.name, spec.description, members, clamped, unclamped))
    return rows
