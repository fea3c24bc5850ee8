import numpy as np
import pytest

from medkg.errors import InvalidSpecError
from medkg.graph import degree_profile, validate_ontology
from medkg.synthetic import SyntheticSpec, generate, generate_dataset, watts_strogatz


def _labeled(ds):
    return set(ds.graph.labeled())


def test_symmetry_pattern_complete():
    ds = generate_dataset(SyntheticSpec(kind="symmetry", n_users=10, mean_degree=3, seed=1))
    rows = _labeled(ds)
    assert rows
    for h, r, t in rows:
        assert (t, r, h) in rows


def test_symmetry_holdout_is_reverse_of_training():
    ds = generate_dataset(SyntheticSpec(kind="symmetry", n_users=100, mean_degree=6, seed=0))
    train = set(map(tuple, ds.train.tolist()))
    assert len(ds.test) == round(0.2 * len(ds.graph) / 2)
    for h, r, t in ds.test.tolist():
        assert (t, r, h) in train
        assert (h, r, t) not in train


def test_inversion_pattern():
    ds = generate_dataset(SyntheticSpec(kind="inversion", n_users=30, mean_degree=4, seed=2))
    rows = _labeled(ds)
    for h, r, t in rows:
        other = "child_of" if r == "parent_of" else "parent_of"
        assert (t, other, h) in rows


def test_antisymmetry_pattern():
    ds = generate_dataset(SyntheticSpec(kind="antisymmetry", n_users=30, mean_degree=4, seed=2))
    rows = _labeled(ds)
    for h, r, t in rows:
        assert (t, r, h) not in rows
        assert h != t


def test_composition_pattern():
    ds = generate_dataset(SyntheticSpec(kind="composition", n_users=40, mean_degree=2, seed=5))
    rows = _labeled(ds)
    r1 = {(h, t) for h, r, t in rows if r == "r1"}
    r2 = {(h, t) for h, r, t in rows if r == "r2"}
    r3 = {(h, t) for h, r, t in rows if r == "r3"}
    implied = {(a, c) for a, b in r1 for b2, c in r2 if b == b2}
    assert implied == r3
    assert len(ds.test) == 8


@pytest.mark.parametrize("kind", ["small_world_social", "symmetry", "antisymmetry", "inversion", "composition"])
def test_generators_are_pure(kind):
    spec = SyntheticSpec(kind=kind, n_users=40, n_tweets=20, mean_degree=4, seed=11)
    a, b = generate_dataset(spec), generate_dataset(spec)
    assert a.graph.labeled() == b.graph.labeled()
    assert np.array_equal(a.test, b.test)
    c = generate_dataset(SyntheticSpec(kind=kind, n_users=40, n_tweets=20, mean_degree=4, seed=12))
    assert c.graph.labeled() != a.graph.labeled()


def test_small_world_hub():
    g = generate(SyntheticSpec(n_users=100, mean_degree=6, seed=0))
    users = g.ontology.entities_of_kind("user")
    best = max(degree_profile(g, u).follower_count for u in users)
    assert best >= 3 * 6


def test_small_world_shape():
    g = generate(SyntheticSpec(n_users=100, n_tweets=80, mean_degree=6, n_new_users=2, seed=4))
    assert g.ontology.is_tw52
    assert np.unique(g.triples[:, 1]).tolist() == [0, 1, 2, 3, 4]
    assert validate_ontology(g) == []
    classes = set(g.ontology.user_classes.values())
    assert {"physician", "medical_researcher"} <= classes
    new = [u for u in g.ontology.entities_of_kind("user")
           if degree_profile(g, u).following_count == 0 and degree_profile(g, u).liked_count == 0]
    assert len(new) >= 2


def test_tweet_hubs_exceed_average():
    g = generate(SyntheticSpec(n_users=100, n_tweets=80, mean_degree=6, seed=4))
    likes = g.triples[g.triples[:, 1] == 4]
    counts = np.bincount(likes[:, 2])
    counts = counts[counts > 0]
    assert counts.max() > 3 * counts.mean()


def test_watts_strogatz_edge_count():
    rng = np.random.default_rng(0)
    edges = watts_strogatz(50, 6, 0.0, rng)
    assert len(edges) == 150
    assert all(a != b for a, b in edges)


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_users=1), dict(mean_degree=100, n_users=100), dict(kind="nope"),
     dict(rewire_probability=1.5), dict(n_tweets=0)],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(**kwargs)
