"""Triple files, vocabulary files and the train/test split."""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSpecError, IoError, ParseError
from .graph import KnowledgeGraph
from .rng import stream

_WS = re.compile(r"\s+")


def read_triples(path, lenient=False):
    """Read labeled triples from a tab-separated file.

    Blank lines and lines starting with ``#`` are skipped. In lenient mode a
    line is split on any run of whitespace instead of single tabs.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = _WS.split(line.strip()) if lenient else line.split("\t")
        if len(fields) != 3 or not all(fields):
            raise ParseError(f"expected 3 tab-separated fields, got {line!r}", lineno, path)
        out.append(tuple(fields))
    return out


def write_triples(graph_or_triples, path, header=None):
    """Write triples as ``head<TAB>relation<TAB>tail`` lines."""
    if isinstance(graph_or_triples, KnowledgeGraph):
        rows = graph_or_triples.labeled()
    else:
        rows = list(graph_or_triples)
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for row in rows:
        if any("\t" in x or "\n" in x for x in row):
            raise ParseError(f"label contains a tab or newline: {row!r}")
        lines.append("\t".join(row))
    _write_lines(path, lines)


def read_kinds(path):
    """Read an explicit ``label<TAB>kind`` annotation file."""
    return dict(_read_pairs(path))


def _read_pairs(path):
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"expected 2 tab-separated fields, got {line!r}", lineno, path)
        yield fields[0], fields[1]


def write_vocabulary(labels, path):
    """One label per line; the line number (0-based) is the id."""
    _write_lines(path, list(labels))


def read_vocabulary(path):
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _write_lines(path, lines):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidSpecError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )


def test_size(n, train_fraction):
    """Number of held-out triples: ``round(n * (1 - train_fraction))``, half to even."""
    return int(round(n * (1.0 - train_fraction)))


test_size.__test__ = False


def split(graph, spec=SplitSpec()):
    """Uniform random train/test partition of the graph's triples.

    Returns ``(train, test)`` as ``(n, 3)`` integer arrays, each in the
    graph's original triple order. With ``spec.stratified`` the rounding rule
    is applied per relation instead of over the whole graph.
    """
    triples = graph.triples if isinstance(graph, KnowledgeGraph) else np.asarray(graph)
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    n = len(triples)
    if n < 2:
        raise InvalidSpecError(f"need at least 2 triples to split, got {n}")
    rng = stream(spec.seed, "split")
    mask = np.zeros(n, dtype=bool)
    if spec.stratified:
        for rel in np.unique(triples[:, 1]):
            idx = np.flatnonzero(triples[:, 1] == rel)
            k = test_size(len(idx), spec.train_fraction)
            mask[rng.choice(idx, size=k, replace=False)] = True
    else:
        k = test_size(n, spec.train_fraction)
        mask[rng.permutation(n)[:k]] = True
    return triples[~mask], triples[mask]
