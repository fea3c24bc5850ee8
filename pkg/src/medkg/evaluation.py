"""Link-prediction ranking: MR, MRR and Hit@N over head and tail corruptions."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import EmptyTestSetError, InvalidArgumentError, KGError
from .graph import Triple

SIDES = ("head", "tail")
MODES = ("raw", "filtered")
TIE_POLICIES = ("mean", "optimistic", "pessimistic")


class MetricSanityError(KGError, AssertionError):
    """An evaluation produced metrics that violate their mathematical bounds."""


@dataclass(frozen=True)
class RankingConfig:
    mode: str = "raw"
    hits_at: Tuple[int, ...] = (1, 3, 10)
    tie_policy: str = "mean"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.tie_policy not in TIE_POLICIES:
            raise InvalidArgumentError(f"tie_policy must be one of {TIE_POLICIES}")
        hits = tuple(int(n) for n in self.hits_at)
        if not hits or any(n < 1 for n in hits) or list(hits) != sorted(set(hits)):
            raise InvalidArgumentError(f"hits_at must be positive and strictly sorted: {hits}")
        object.__setattr__(self, "hits_at", hits)


@dataclass
class Metrics:
    mr: float
    mrr: float
    hits: Dict[int, float]
    count: int


@dataclass
class RankingReport:
    """Aggregated ranking metrics.

    ``per_query_ranks`` lists ``(triple, side, rank)`` for every query and
    ``by_side`` holds the same metrics restricted to head or tail queries.
    """

    mr: float
    mrr: float
    hits: Dict[int, float]
    per_query_ranks: List[Tuple[Triple, str, float]]
    by_side: Dict[str, Metrics] = field(default_factory=dict)
    config: RankingConfig = field(default_factory=RankingConfig)

    def as_dict(self):
        """Flat metric name -> value mapping, pooled first then per side."""
        out = {"mr": self.mr, "mrr": self.mrr}
        out.update({f"hit@{n}": v for n, v in self.hits.items()})
        out["queries"] = len(self.per_query_ranks)
        for side, m in self.by_side.items():
            out[f"{side}.mr"] = m.mr
            out[f"{side}.mrr"] = m.mrr
            out.update({f"{side}.hit@{n}": v for n, v in m.hits.items()})
        return out


def _score_fn(space, scorer):
    return space.score if scorer is None else scorer


def candidate_scores(space, triple, side, scorer=None):
    """Scores of the triple with its ``side`` replaced by every entity."""
    if side not in SIDES:
        raise InvalidArgumentError(f"side must be 'head' or 'tail', got {side!r}")
    h, r, t = (int(x) for x in triple)
    n = space.entity_count
    ents = np.arange(n)
    fn = _score_fn(space, scorer)
    if side == "tail":
        return np.asarray(fn(np.full(n, h), np.full(n, r), ents), dtype=np.float64)
    return np.asarray(fn(ents, np.full(n, r), np.full(n, t)), dtype=np.float64)


def rank_from_scores(scores, true_index, exclude=(), tie_policy="mean"):
    """Rank of ``scores[true_index]`` among the other entries (lower wins)."""
    mask = np.ones(len(scores), dtype=bool)
    mask[list(exclude)] = False
    mask[true_index] = False
    target = scores[true_index]
    competitors = scores[mask]
    better = int(np.count_nonzero(competitors < target))
    ties = int(np.count_nonzero(competitors == target))
    if tie_policy == "mean":
        return 1.0 + better + ties / 2.0
    if tie_policy == "pessimistic":
        return float(1 + better + ties)
    return float(1 + better)


def rank_query(space, triple, side, graph=None, config=RankingConfig(), scorer=None):
    """Rank of the true entity on ``side`` against all corruptions.

    In filtered mode, corruptions that are triples of ``graph`` (normally
    train and test together) are removed from the competitor set.
    """
    scores = candidate_scores(space, triple, side, scorer)
    h, r, t = (int(x) for x in triple)
    exclude = ()
    if config.mode == "filtered":
        if graph is None:
            raise InvalidArgumentError("filtered ranking needs the graph of known triples")
        exclude = graph.tails(h, r) if side == "tail" else graph.heads(r, t)
    true_index = t if side == "tail" else h
    return rank_from_scores(scores, true_index, exclude, config.tie_policy)


def aggregate(ranks, hits_at=(1, 3, 10)):
    """MR, MRR and Hit@N of a list of ranks.

    Exact summation keeps the result independent of the order of ``ranks``.
    """
    ranks = [float(x) for x in ranks]
    if not ranks:
        raise EmptyTestSetError("no ranks to aggregate")
    n = len(ranks)
    mr = math.fsum(ranks) / n
    mrr = math.fsum(1.0 / x for x in ranks) / n
    hits = {k: sum(1 for x in ranks if x <= k) / n for k in hits_at}
    return Metrics(mr, mrr, hits, n)


def check_sanity(report, entity_count):
    """Raise :class:`MetricSanityError` if the report breaks a metric bound."""
    tol = 1e-12
    keys = sorted(report.hits)
    for a, b in zip(keys, keys[1:]):
        if report.hits[a] > report.hits[b] + tol:
            raise MetricSanityError(f"hit@{a}={report.hits[a]} > hit@{b}={report.hits[b]}")
    if not (1.0 / report.mr - tol <= report.mrr <= 1.0 + tol):
        raise MetricSanityError(f"MRR {report.mrr} outside [1/MR, 1] with MR {report.mr}")
    if not (1.0 - tol <= report.mr <= entity_count + tol):
        raise MetricSanityError(f"MR {report.mr} outside [1, {entity_count}]")


def evaluate(
    space,
    test_triples,
    graph=None,
    config=RankingConfig(),
    scorer=None,
    workers=1,
):
    """Rank every test triple by head and by tail corruption.

    Both sides are pooled into one set of ``2 * len(test_triples)`` queries;
    per-side metrics are kept in ``by_side``.
    """
    test = np.asarray(test_triples, dtype=np.int64).reshape(-1, 3)
    if not len(test):
        raise EmptyTestSetError("test set is empty")
    queries = [(Triple(*row), side) for row in test.tolist() for side in SIDES]

    def run(q):
        return rank_query(space, q[0], q[1], graph, config, scorer)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ranks = list(pool.map(run, queries))
    else:
        ranks = [run(q) for q in queries]

    pooled = aggregate(ranks, config.hits_at)
    by_side = {
        side: aggregate([x for (_, s), x in zip(queries, ranks) if s == side], config.hits_at)
        for side in SIDES
    }
    report = RankingReport(
        pooled.mr,
        pooled.mrr,
        pooled.hits,
        [(q[0], q[1], x) for q, x in zip(queries, ranks)],
        by_side,
        config,
    )
    check_sanity(report, space.entity_count)
    return report


def hits_at_one(space, triples, graph, scorer=None):
    """Fraction of filtered head/tail queries on ``triples`` ranked first."""
    config = RankingConfig(mode="filtered", hits_at=(1,), tie_policy="mean")
    return evaluate(space, triples, graph, config, scorer).hits[1]


def format_report(reports: Dict[str, RankingReport], title=None, header_lines: Sequence[str] = ()):
    """Aligned text table, one row per named report."""
    if not reports:
        return ""
    first = next(iter(reports.values()))
    cols = ["MR", "MRR"] + [f"Hit@{n}" for n in first.hits]
    name_w = max(5, *(len(k) for k in reports))
    lines = [f"# {line}" for line in header_lines]
    if title:
        lines.append(title)
    lines.append(f"{'Model':<{name_w}}  " + "  ".join(f"{c:>9}" for c in cols))
    lines.append("-" * (name_w + 2 + 11 * len(cols)))
    for name, rep in reports.items():
        vals = [f"{rep.mr:9.2f}", f"{rep.mrr:9.4f}"] + [f"{v:9.4f}" for v in rep.hits.values()]
        lines.append(f"{name:<{name_w}}  " + "  ".join(vals))
    return "\n".join(lines) + "\n"
