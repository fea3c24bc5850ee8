from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

from ..errors import InvalidSpecError

MODELS = ("transe", "mde")
LOSSES = ("margin", "limit")
DEFAULT_DIM = {"transe": 20, "mde": 10}
DEFAULT_LOSS = {"transe": "margin", "mde": "limit"}


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of one embedding model and its training run.

    ``dim`` and ``loss`` default per model: TransE uses 20 dimensions with
    the margin ranking loss, MDE uses 10 dimensions per embedding set with
    the limit-based loss. ``psi`` and the weights ``w1..w3`` only affect MDE.
    """

    model: str = "transe"
    dim: Optional[int] = None
    norm_p: int = 2
    psi: float = 1.2
    gamma1: float = 3.0
    gamma2: float = 3.0
    beta1: float = 1.0
    beta2: float = 1.0
    margin: float = 1.0
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    learning_rate: float = 0.01
    iterations: int = 700
    negatives_per_positive: int = 1
    batch_size: int = 32
    filtered_negatives: bool = True
    loss: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidSpecError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.dim is None:
            object.__setattr__(self, "dim", DEFAULT_DIM[self.model])
        if self.loss is None:
            object.__setattr__(self, "loss", DEFAULT_LOSS[self.model])
        if self.loss not in LOSSES:
            raise InvalidSpecError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if int(self.dim) < 1:
            raise InvalidSpecError(f"dim must be >= 1, got {self.dim}")
        if self.norm_p not in (1, 2):
            raise InvalidSpecError(f"norm_p must be 1 or 2, got {self.norm_p}")
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise InvalidSpecError("gamma1 and gamma2 must be positive")
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise InvalidSpecError("beta1 and beta2 must be positive")
        if self.psi < 0:
            raise InvalidSpecError(f"psi must be non-negative, got {self.psi}")
        if self.margin <= 0:
            raise InvalidSpecError(f"margin must be positive, got {self.margin}")
        if self.learning_rate < 0:
            raise InvalidSpecError("learning_rate must be non-negative")
        if self.iterations < 1 or self.negatives_per_positive < 1 or self.batch_size < 1:
            raise InvalidSpecError("iterations, negatives_per_positive and batch_size must be >= 1")

    @property
    def n_sets(self):
        return 1 if self.model == "transe" else 3

    @property
    def weights(self):
        return (1.0,) if self.model == "transe" else (self.w1, self.w2, self.w3)

    @property
    def offset(self):
        """Constant subtracted from the summed distances."""
        return 0.0 if self.model == "transe" else self.psi

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidSpecError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes):
        return replace(self, **changes)
