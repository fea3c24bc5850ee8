import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medkg.errors import (
    DegenerateScoreError,
    DegenerateVectorError,
    EmptyCohortError,
    InvalidUserError,
)
from medkg.graph import (
    IS_FOLLOWING,
    JOB_TITLE_TYPE_IS,
    LIKES_RESEARCH_TWEET,
    TW52_RELATIONS,
    build_graph,
    degree_profile,
    followees,
    infer_ontology,
    liked,
)
from medkg.models import EmbeddingSpace, ModelConfig, score_mde, train
from medkg.models.sampling import corrupt
from medkg.recommender import (
    ProbabilityBasis,
    cohort_analysis,
    cohort_mean_probability,
    probabilities,
    probability,
    recommend,
    target_cohorts,
    tweet_similarity,
)

LIKES = 4


def basis(m, clamp=True):
    return ProbabilityBasis(LIKES, m, clamp)


def test_probability_of_max_is_one():
    assert probability(basis(7.5), 7.5) == 1.0


def test_probability_ratio():
    assert probability(basis(10.0), 20.0) == 0.5


def test_probability_clamped():
    assert probability(basis(10.0), 5.0) == 1.0
    assert probability(basis(10.0, clamp=False), 5.0) == 2.0


def test_non_positive_scores():
    assert probability(basis(2.0), -0.4) == 1.0
    assert probability(basis(2.0), 0.0) == 1.0
    with pytest.raises(DegenerateScoreError):
        probability(basis(2.0, clamp=False), 0.0)


@settings(max_examples=200)
@given(
    m=st.floats(1e-3, 1e3),
    s=st.floats(1e-3, 1e3),
    ds=st.floats(1e-3, 10),
)
def test_probability_law(m, s, ds):
    raw = probability(basis(m, clamp=False), s)
    assert abs(raw - m / s) <= 1e-12 * max(1.0, abs(m / s))
    assert probability(basis(m, clamp=False), s + ds) < raw
    c1, c2 = probability(basis(m), s), probability(basis(m), s + ds)
    assert 0.0 <= c2 <= c1 <= 1.0


@settings(max_examples=100)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=20), st.floats(-5, 5))
def test_vectorized_matches_scalar(scores, m):
    b = basis(m)
    np.testing.assert_array_equal(probabilities(b, scores), [probability(b, s) for s in scores])


def test_basis_from_training():
    cfg = ModelConfig(model="transe", dim=1)
    ent = np.array([0.0, 1.0, 4.0])[:, None, None]
    sp = EmbeddingSpace(ent, np.zeros((5, 1, 1)), cfg)
    train_rows = np.array([[0, 4, 1], [0, 4, 2], [1, 2, 2]])
    b = ProbabilityBasis.from_training(sp, train_rows, 4)
    assert b.max_training_score == 4.0


# -- recommendation ------------------------------------------------------


def _graph(n_tweets=20, liked_by_u0=(0, 3)):
    rows = [("u0", IS_FOLLOWING, "u1"), ("u1", IS_FOLLOWING, "u2"),
            ("u0", JOB_TITLE_TYPE_IS, "job_title_physician")]
    for j in range(n_tweets):
        rows.append(("u2", "is_talking_about", f"t{j}"))
    for j in liked_by_u0:
        rows.append(("u0", LIKES_RESEARCH_TWEET, f"t{j}"))
    rows.append(("u1", LIKES_RESEARCH_TWEET, "t5"))
    g = build_graph(rows, relation_order=TW52_RELATIONS)
    return g.with_ontology(infer_ontology(g))


def _space(g, seed=0):
    cfg = ModelConfig(model="mde", dim=6, seed=seed)
    return EmbeddingSpace.initialize(g.entity_count, g.relation_count, cfg)


def test_top_k_matches_exhaustive_sort():
    g = _graph()
    sp = _space(g)
    b = ProbabilityBasis.from_training(sp, g.triples, LIKES)
    u0 = g.vocabulary.entity_id("u0")
    tweets = [g.vocabulary.entity_id(f"t{j}") for j in range(20)]
    done = {g.vocabulary.entity_id("t0"), g.vocabulary.entity_id("t3")}
    oracle = sorted((score_mde(sp, (u0, LIKES, t)), t) for t in tweets if t not in done)
    for k in (1, 5, 18, 40):
        recs = recommend(sp, g, u0, k, b)
        assert [r.tweet for r in recs] == [t for _, t in oracle[:k]]
        np.testing.assert_allclose([r.score for r in recs], [s for s, _ in oracle[:k]], rtol=1e-12)
    recs = recommend(sp, g, u0, 18, b)
    assert all(a.probability >= b_.probability for a, b_ in zip(recs, recs[1:]))


def test_ties_broken_by_id():
    g = _graph()
    sp = _space(g)
    b = basis(1.0)
    u0 = g.vocabulary.entity_id("u0")
    recs = recommend(sp, g, u0, 5, b, scorer=lambda h, r, t: np.zeros(len(t)))
    ids = [r.tweet for r in recs]
    assert ids == sorted(ids)


def test_user_who_liked_everything():
    g = _graph(n_tweets=4, liked_by_u0=range(4))
    # t5 does not exist with 4 tweets; u1 likes a fifth post
    sp = _space(g)
    u0 = g.vocabulary.entity_id("u0")
    recs = recommend(sp, g, u0, 10, basis(1.0))
    assert [g.vocabulary.entity_label(r.tweet) for r in recs] == ["t5"]
    g2 = _graph(n_tweets=6, liked_by_u0=range(6))
    assert recommend(_space(g2), g2, u0, 10, basis(1.0)) == []


def test_invalid_user():
    g = _graph()
    sp = _space(g)
    with pytest.raises(InvalidUserError):
        recommend(sp, g, g.vocabulary.entity_id("t1"), 3, basis(1.0))
    with pytest.raises(InvalidUserError):
        recommend(sp, g, 999, 3, basis(1.0))


@pytest.mark.parametrize("factor", [0.01, 1.0, 3.5, 1e4])
def test_argmin_invariance(factor):
    g = _graph()
    sp = _space(g, seed=3)
    u0 = g.vocabulary.entity_id("u0")
    base = recommend(sp, g, u0, 18, basis(2.0))
    scaled = recommend(sp, g, u0, 18, basis(2.0 * factor),
                       scorer=lambda h, r, t: factor * sp.score(h, r, t))
    assert [r.tweet for r in base] == [r.tweet for r in scaled]


# -- similarity and cohorts ---------------------------------------------


def _vec_space(vectors):
    ent = np.array(vectors, float)[:, None, :]
    return EmbeddingSpace(ent, np.zeros((1, 1, ent.shape[-1])), ModelConfig(model="transe", dim=ent.shape[-1]))


def test_tweet_similarity():
    sp = _vec_space([[1, 2], [1, 2], [-2, 1], [-1, -2], [0, 0]])
    assert tweet_similarity(sp, 0, 1) == pytest.approx(1.0)
    assert tweet_similarity(sp, 0, 2) == pytest.approx(0.0)
    assert tweet_similarity(sp, 0, 3) == pytest.approx(-1.0)
    with pytest.raises(DegenerateVectorError):
        tweet_similarity(sp, 0, 4)


def test_cohort_means():
    g = _graph()
    sp = _space(g)
    b = basis(1.5)
    t = g.vocabulary.entity_id("t7")
    u0, u1 = g.vocabulary.entity_id("u0"), g.vocabulary.entity_id("u1")
    p0 = probability(b, score_mde(sp, (u0, LIKES, t)))
    p1 = probability(b, score_mde(sp, (u1, LIKES, t)))
    assert cohort_mean_probability(sp, g, [u0], t, b) == pytest.approx(p0)
    assert cohort_mean_probability(sp, g, [u0, u1], t, b) == pytest.approx((p0 + p1) / 2)
    with pytest.raises(EmptyCohortError):
        cohort_mean_probability(sp, g, [], t, b)


@pytest.fixture(scope="module")
def trained(social_graph):
    cfg = ModelConfig(model="mde", seed=0, negatives_per_positive=10)
    space, report = train(social_graph, cfg)
    return space, report


def test_training_triples_outrank_corruptions(social_graph, trained):
    space, report = trained
    assert report.train_hit1 >= 0.95
    g = social_graph
    likes = g.triples[g.triples[:, 1] == LIKES]
    b = ProbabilityBasis.from_training(space, g.triples, LIKES)
    pos = probabilities(b, space.score(*likes.T))
    neg, _ = corrupt(likes, g.entity_count, np.random.default_rng(0), known=g, k=20)
    median = np.median(probabilities(b, space.score(*neg.T)))
    assert np.all(pos >= median)


def test_target_cohorts(social_graph, trained):
    space, _ = trained
    g = social_graph
    target = g.vocabulary.entity_id("tweet_0003")
    groups = target_cohorts(space, g, target, hub_min_followers=10, b_following=(1, 6), similarity=0.3)
    names = [spec.name for spec, _ in groups]
    assert names == ["follow_A_both_like_similar", "follow_A_A_likes_similar",
                     "follow_B_similar", "new_users"]
    seen = set()
    for spec, members in groups:
        assert not seen & set(members)
        seen |= set(members)
        for u in members:
            assert target not in liked(g, u)
    new_users = dict(groups)[groups[3][0]]
    assert new_users
    for u in new_users:
        prof = degree_profile(g, u)
        assert prof.following_count == 0 and prof.liked_count == 0
    for u in groups[0][1] + groups[1][1]:
        assert any(degree_profile(g, a).follower_count >= 10 for a in followees(g, u))

    rows = cohort_analysis(space, g, g.triples, target, group_size=5,
                           hub_min_followers=10, b_following=(1, 6), similarity=0.3)
    assert len(rows) == 4
    for row in rows:
        assert len(row.members) <= 5
        if row.members:
            assert 0.0 <= row.mean_probability <= 1.0
