from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig
from .embedding import EmbeddingSpace, score_function, score_mde, score_transe
from .losses import batch_gradients, gradient, loss_limit, loss_margin, pair_loss
from .sampling import corrupt, sample_negative
from .training import TrainReport, train

__all__ = [
    "EmbeddingSpace",
    "ModelConfig",
    "TrainReport",
    "batch_gradients",
    "corrupt",
    "gradient",
    "load_checkpoint",
    "loss_limit",
    "loss_margin",
    "pair_loss",
    "sample_negative",
    "save_checkpoint",
    "score_function",
    "score_mde",
    "score_transe",
    "train",
]
