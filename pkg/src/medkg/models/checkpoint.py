"""Checkpoint files.

A checkpoint is an uncompressed NumPy ``.npz`` archive with three members:

``header``
    UTF-8 JSON encoded as a uint8 array::

        {"format": "medkg-checkpoint", "version": 1,
         "config": {...ModelConfig fields...},
         "entity_count": int, "relation_count": int,
         "sets": int, "dim": int}

``entity``
    float64, C order, shape ``(entity_count, sets, dim)``.
``relation``
    float64, C order, shape ``(relation_count, sets, dim)``.
"""

import json
import zipfile

import numpy as np

from ..errors import CheckpointError, KGError
from .config import ModelConfig
from .embedding import EmbeddingSpace

FORMAT = "medkg-checkpoint"
VERSION = 1


def save_checkpoint(space, config, path):
    header = {
        "format": FORMAT,
        "version": VERSION,
        "config": config.to_dict(),
        "entity_count": space.entity_count,
        "relation_count": space.relation_count,
        "sets": config.n_sets,
        "dim": config.dim,
    }
    raw = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    try:
        with open(path, "wb") as fh:
            np.savez(fh, header=raw, entity=space.entity, relation=space.relation)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path, entity_count=None, relation_count=None):
    """Load ``(space, config)``; optionally check the vocabulary sizes.

    Raises
    ------
    CheckpointError
        On unreadable or truncated files, an unknown format or version, or
        block shapes that disagree with the header or the given sizes.
    """
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(bytes(data["header"]).decode("utf-8"))
            entity = data["entity"]
            relation = data["relation"]
    except (OSError, ValueError, KeyError, EOFError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if header.get("format") != FORMAT:
        raise CheckpointError(f"{path} is not a medkg checkpoint")
    if header.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')}")
    try:
        config = ModelConfig.from_dict(header["config"])
    except (KGError, TypeError, KeyError) as exc:
        raise CheckpointError(f"bad config in checkpoint: {exc}") from exc
    want_e = (header["entity_count"], config.n_sets, config.dim)
    want_r = (header["relation_count"], config.n_sets, config.dim)
    if entity.shape != want_e or relation.shape != want_r:
        raise CheckpointError(
            f"block shapes {entity.shape}/{relation.shape} disagree with header {want_e}/{want_r}"
        )
    if entity_count is not None and entity_count != want_e[0]:
        raise CheckpointError(
            f"checkpoint has {want_e[0]} entities, vocabulary has {entity_count}"
        )
    if relation_count is not None and relation_count != want_r[0]:
        raise CheckpointError(
            f"checkpoint has {want_r[0]} relations, vocabulary has {relation_count}"
        )
    return EmbeddingSpace(entity, relation, config), config
