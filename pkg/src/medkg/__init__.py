"""TransE and MDE knowledge-graph embeddings for linking physicians to
research posts."""

__version__ = "0.1.0"
