"""Knowledge-graph data model: vocabularies, triples, indexes and the
social ontology used for the physician/research-post graph.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    EmptyGraphError,
    InvalidArgumentError,
    ParseError,
    UnknownEntityError,
    UnknownRelationError,
)

# Relation table of the social ontology, in id order.
IS_TALKING_ABOUT = "is_talking_about"
IS_FOLLOWED_BY = "is_followed_by"
IS_FOLLOWING = "is_following"
JOB_TITLE_TYPE_IS = "job_title_type_is"
LIKES_RESEARCH_TWEET = "likes_research_Tweet_id"
TW52_RELATIONS = (
    IS_TALKING_ABOUT,
    IS_FOLLOWED_BY,
    IS_FOLLOWING,
    JOB_TITLE_TYPE_IS,
    LIKES_RESEARCH_TWEET,
)

# User classes, in class-id order.
JOB_TITLE_RESEARCHER = "job_title_medical_researcher"
JOB_TITLE_PHYSICIAN = "job_title_physician"
JOB_CLASSES = (JOB_TITLE_RESEARCHER, JOB_TITLE_PHYSICIAN)
USER_CLASS_NAMES = {
    JOB_TITLE_RESEARCHER: "medical_researcher",
    JOB_TITLE_PHYSICIAN: "physician",
}
UNCLASSIFIED = "unclassified"

USER, TWEET, JOB_CLASS = "user", "tweet", "job_class"
KINDS = (USER, TWEET, JOB_CLASS)

# (head kind, tail kind) per ontology relation.
TW52_ROLES = {
    IS_TALKING_ABOUT: (USER, TWEET),
    IS_FOLLOWED_BY: (USER, USER),
    IS_FOLLOWING: (USER, USER),
    JOB_TITLE_TYPE_IS: (USER, JOB_CLASS),
    LIKES_RESEARCH_TWEET: (USER, TWEET),
}


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Vocabulary:
    """Bidirectional label <-> dense id maps for entities and relations."""

    def __init__(self, entity_labels=(), relation_labels=()):
        self._entities: List[str] = []
        self._relations: List[str] = []
        self._entity_ids: Dict[str, int] = {}
        self._relation_ids: Dict[str, int] = {}
        for label in entity_labels:
            if label in self._entity_ids:
                raise InvalidArgumentError(f"duplicate entity label {label!r}")
            self.add_entity(label)
        for label in relation_labels:
            if label in self._relation_ids:
                raise InvalidArgumentError(f"duplicate relation label {label!r}")
            self.add_relation(label)

    def add_entity(self, label):
        idx = self._entity_ids.get(label)
        if idx is None:
            idx = len(self._entities)
            self._entities.append(label)
            self._entity_ids[label] = idx
        return idx

    def add_relation(self, label):
        idx = self._relation_ids.get(label)
        if idx is None:
            idx = len(self._relations)
            self._relations.append(label)
            self._relation_ids[label] = idx
        return idx

    @property
    def entity_labels(self):
        return tuple(self._entities)

    @property
    def relation_labels(self):
        return tuple(self._relations)

    @property
    def entity_count(self):
        return len(self._entities)

    @property
    def relation_count(self):
        return len(self._relations)

    def entity_id(self, label):
        try:
            return self._entity_ids[label]
        except KeyError:
            raise UnknownEntityError(f"unknown entity {label!r}") from None

    def relation_id(self, label):
        try:
            return self._relation_ids[label]
        except KeyError:
            raise UnknownRelationError(f"unknown relation {label!r}") from None

    def entity_label(self, idx):
        self.check_entity(idx)
        return self._entities[idx]

    def relation_label(self, idx):
        self.check_relation(idx)
        return self._relations[idx]

    def has_entity(self, label):
        return label in self._entity_ids

    def has_relation(self, label):
        return label in self._relation_ids

    def check_entity(self, idx):
        if not 0 <= int(idx) < len(self._entities):
            raise UnknownEntityError(f"entity id {idx} out of range [0, {len(self._entities)})")

    def check_relation(self, idx):
        if not 0 <= int(idx) < len(self._relations):
            raise UnknownRelationError(
                f"relation id {idx} out of range [0, {len(self._relations)})"
            )

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._entities == other._entities and self._relations == other._relations

    def __repr__(self):
        return f"Vocabulary({self.entity_count} entities, {self.relation_count} relations)"


@dataclass(frozen=True)
class BuildReport:
    entities: int
    relations: int
    triples: int
    duplicates: int


class KnowledgeGraph:
    """Deduplicated triple store over a fixed vocabulary.

    Parameters
    ----------
    triples : array-like of shape (n, 3)
        Integer ``(head, relation, tail)`` rows. Duplicates are dropped,
        keeping the first occurrence.
    vocabulary : Vocabulary
    ontology : SocialOntology, optional

    Attributes
    ----------
    triples : numpy.ndarray, shape (n, 3), dtype int64
        Read-only; insertion order preserved.
    duplicates : int
        Number of rows removed during deduplication.
    """

    def __init__(self, triples, vocabulary, ontology=None):
        arr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        n_e, n_r = vocabulary.entity_count, vocabulary.relation_count
        if arr.size:
            bad = (
                (arr[:, 0] < 0) | (arr[:, 0] >= n_e)
                | (arr[:, 2] < 0) | (arr[:, 2] >= n_e)
            )
            if bad.any():
                raise UnknownEntityError(f"triple {tuple(arr[bad][0])} has an invalid entity id")
            bad = (arr[:, 1] < 0) | (arr[:, 1] >= n_r)
            if bad.any():
                raise UnknownRelationError(
                    f"triple {tuple(arr[bad][0])} has an invalid relation id"
                )
        keys = encode(arr, n_e, n_r)
        _, first = np.unique(keys, return_index=True)
        first.sort()
        self.duplicates = int(len(arr) - len(first))
        self.triples = arr[first]
        self.triples.setflags(write=False)
        self.vocabulary = vocabulary
        self.ontology = ontology
        self._keys = np.sort(encode(self.triples, n_e, n_r))
        self._keys.setflags(write=False)
        self._tails, self._heads = _build_indexes(self.triples)

    # -- sizes ---------------------------------------------------------
    @property
    def entity_count(self):
        return self.vocabulary.entity_count

    @property
    def relation_count(self):
        return self.vocabulary.relation_count

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        for h, r, t in self.triples.tolist():
            yield Triple(h, r, t)

    def __contains__(self, triple):
        h, r, t = triple
        return bool(self.contains(np.array([[h, r, t]]))[0])

    def report(self):
        return BuildReport(self.entity_count, self.relation_count, len(self), self.duplicates)

    # -- lookups -------------------------------------------------------
    def contains(self, triples):
        """Vectorized membership test for an ``(n, 3)`` array of triples."""
        keys = encode(np.asarray(triples).reshape(-1, 3), self.entity_count, self.relation_count)
        pos = np.searchsorted(self._keys, keys)
        pos = np.minimum(pos, max(len(self._keys) - 1, 0))
        if not len(self._keys):
            return np.zeros(len(keys), dtype=bool)
        return self._keys[pos] == keys

    def tails(self, head, relation):
        return self._tails.get((int(head), int(relation)), frozenset())

    def heads(self, relation, tail):
        return self._heads.get((int(relation), int(tail)), frozenset())

    def with_triples(self, triples):
        """A graph sharing this vocabulary and ontology but holding ``triples``."""
        return KnowledgeGraph(triples, self.vocabulary, self.ontology)

    def with_ontology(self, ontology):
        return KnowledgeGraph(self.triples, self.vocabulary, ontology)

    def labeled(self):
        """Triples as ``(head_label, relation_label, tail_label)`` tuples."""
        ents = self.vocabulary.entity_labels
        rels = self.vocabulary.relation_labels
        return [(ents[h], rels[r], ents[t]) for h, r, t in self.triples.tolist()]

    def index_consistent(self):
        """Rebuild the adjacency indexes and compare with the cached ones."""
        tails, heads = _build_indexes(self.triples)
        return tails == self._tails and heads == self._heads

    def __repr__(self):
        return (
            f"KnowledgeGraph({self.entity_count} entities, {self.relation_count} relations, "
            f"{len(self)} triples)"
        )


def encode(triples, n_entities, n_relations):
    """Pack ``(h, r, t)`` rows into single int64 keys."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    return (triples[:, 0] * n_relations + triples[:, 1]) * n_entities + triples[:, 2]


def _build_indexes(triples):
    tails = defaultdict(set)
    heads = defaultdict(set)
    for h, r, t in triples.tolist():
        tails[(h, r)].add(t)
        heads[(r, t)].add(h)
    return (
        {k: frozenset(v) for k, v in tails.items()},
        {k: frozenset(v) for k, v in heads.items()},
    )


def build_graph(
    triples: Iterable[Sequence[str]],
    relation_order: Optional[Sequence[str]] = None,
    entity_order: Optional[Sequence[str]] = None,
) -> KnowledgeGraph:
    """Build a graph from labeled ``(head, relation, tail)`` string triples.

    Ids are assigned in order of first appearance, after any labels given in
    ``relation_order``/``entity_order`` which are reserved first (used to pin
    the ontology relation ids).

    Raises
    ------
    EmptyGraphError
        If ``triples`` is empty.
    ParseError
        If an element does not hold exactly three non-empty labels. The
        reported line number is 1-based.
    """
    vocab = Vocabulary(entity_order or (), relation_order or ())
    rows = []
    for lineno, item in enumerate(triples, start=1):
        if isinstance(item, str) or len(item) != 3:
            raise ParseError(f"expected 3 fields, got {item!r}", line=lineno)
        h, r, t = item
        if not all(isinstance(x, str) and x for x in (h, r, t)):
            raise ParseError(f"empty or non-string label in {item!r}", line=lineno)
        rows.append((vocab.add_entity(h), vocab.add_relation(r), vocab.add_entity(t)))
    if not rows:
        raise EmptyGraphError("no triples to build a graph from")
    return KnowledgeGraph(rows, vocab)


def uses_tw52_relations(labeled_triples):
    """True when every relation label belongs to the social ontology."""
    return all(r in TW52_ROLES for _, r, _ in labeled_triples)


# ----------------------------------------------------------------------
# Social ontology
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    triple: Optional[Triple]
    reason: str


@dataclass
class SocialOntology:
    """Roles of the ontology relations and the kind/class of every entity.

    Attributes
    ----------
    relation_roles : dict
        Relation id -> ``(head_kind, tail_kind)``.
    entity_kinds : dict
        Entity id -> one of ``user``, ``tweet``, ``job_class``.
    user_classes : dict
        Entity id of each user -> ``medical_researcher``, ``physician`` or
        ``unclassified``.
    missing_relations : tuple
        Ontology relation labels absent from the graph vocabulary.
    """

    relation_roles: Dict[int, Tuple[str, str]]
    entity_kinds: Dict[int, str]
    user_classes: Dict[int, str] = field(default_factory=dict)
    missing_relations: Tuple[str, ...] = ()

    def kind(self, entity):
        return self.entity_kinds.get(int(entity))

    def entities_of_kind(self, kind):
        return sorted(e for e, k in self.entity_kinds.items() if k == kind)

    @property
    def is_tw52(self):
        return not self.missing_relations and len(self.relation_roles) == len(TW52_RELATIONS)


def infer_ontology(graph, explicit_kinds=None, roles=None):
    """Derive a :class:`SocialOntology` for ``graph``.

    Kinds come from ``explicit_kinds`` (label -> kind) when given; the
    remaining entities get the kind they take most often in ontology role
    positions, ties going to the role seen first.
    """
    roles = TW52_ROLES if roles is None else roles
    vocab = graph.vocabulary
    relation_roles = {}
    missing = []
    for label, role in roles.items():
        if vocab.has_relation(label):
            relation_roles[vocab.relation_id(label)] = role
        else:
            missing.append(label)

    votes = defaultdict(dict)
    for h, r, t in graph.triples.tolist():
        role = relation_roles.get(r)
        if role is None:
            continue
        for ent, kind in ((h, role[0]), (t, role[1])):
            counts = votes[ent]
            counts[kind] = counts.get(kind, 0) + 1
    kinds = {}
    for ent, counts in votes.items():
        # dicts keep insertion order, so max() ties favour the earliest role
        kinds[ent] = max(counts, key=counts.get)
    for label in JOB_CLASSES:
        if vocab.has_entity(label):
            kinds[vocab.entity_id(label)] = JOB_CLASS
    for label, kind in (explicit_kinds or {}).items():
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown entity kind {kind!r} for {label!r}")
        kinds[vocab.entity_id(label)] = kind

    user_classes = {e: UNCLASSIFIED for e, k in kinds.items() if k == USER}
    if vocab.has_relation(JOB_TITLE_TYPE_IS):
        rj = vocab.relation_id(JOB_TITLE_TYPE_IS)
        for h, r, t in graph.triples.tolist():
            if r == rj and h in user_classes:
                name = USER_CLASS_NAMES.get(vocab.entity_label(t))
                if name is not None:
                    user_classes[h] = name
    return SocialOntology(relation_roles, kinds, user_classes, tuple(missing))


def validate_ontology(graph, ontology=None):
    """Return every ontology violation in ``graph``; an empty list is valid.

    A violation is either a missing ontology relation (``triple`` is None)
    or a triple whose head/tail kind contradicts its relation's role.
    """
    ontology = ontology or graph.ontology
    if ontology is None:
        raise InvalidArgumentError("graph has no ontology to validate against")
    out = [Violation(None, f"missing relation {label}") for label in ontology.missing_relations]
    rels = graph.vocabulary.relation_labels
    for h, r, t in graph.triples.tolist():
        role = ontology.relation_roles.get(r)
        if role is None:
            continue
        hk, tk = ontology.kind(h), ontology.kind(t)
        if hk != role[0]:
            out.append(Violation(Triple(h, r, t), f"{rels[r]} head must be {role[0]}, got {hk}"))
        if tk != role[1]:
            out.append(Violation(Triple(h, r, t), f"{rels[r]} tail must be {role[1]}, got {tk}"))
    return out


class DegreeProfile(NamedTuple):
    in_degree: int
    out_degree: int
    follower_count: int
    following_count: int
    liked_count: int


def followers(graph, entity):
    """Users following ``entity``, from both follow relations."""
    vocab = graph.vocabulary
    out = set()
    if vocab.has_relation(IS_FOLLOWED_BY):
        out |= graph.tails(entity, vocab.relation_id(IS_FOLLOWED_BY))
    if vocab.has_relation(IS_FOLLOWING):
        out |= graph.heads(vocab.relation_id(IS_FOLLOWING), entity)
    return out


def followees(graph, entity):
    """Users that ``entity`` follows, from both follow relations."""
    vocab = graph.vocabulary
    out = set()
    if vocab.has_relation(IS_FOLLOWING):
        out |= graph.tails(entity, vocab.relation_id(IS_FOLLOWING))
    if vocab.has_relation(IS_FOLLOWED_BY):
        out |= graph.heads(vocab.relation_id(IS_FOLLOWED_BY), entity)
    return out


def liked(graph, entity):
    vocab = graph.vocabulary
    if not vocab.has_relation(LIKES_RESEARCH_TWEET):
        return frozenset()
    return graph.tails(entity, vocab.relation_id(LIKES_RESEARCH_TWEET))


def degree_profile(graph, entity):
    """Degree statistics of one entity.

    Follower and following counts are sizes of the union over both follow
    relations, so a follow edge stated in both directions counts once.
    """
    graph.vocabulary.check_entity(entity)
    entity = int(entity)
    trip = graph.triples
    in_degree = int(np.count_nonzero(trip[:, 2] == entity))
    out_degree = int(np.count_nonzero(trip[:, 0] == entity))
    return DegreeProfile(
        in_degree,
        out_degree,
        len(followers(graph, entity)),
        len(followees(graph, entity)),
        len(liked(graph, entity)),
    )
