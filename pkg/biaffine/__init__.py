"""Graph-based biaffine dependency parser in numpy."""
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .decoder import assign_labels, decode_mst
from .embeddings import EmbeddingError, EmbeddingTable, load_embeddings
from .model import ParserConfig, ParserConfigError, ParserModel, init_model, score_sentence
from .trainer import (
    CompatibilityError, TrainingError, TrainingResult, evaluate, finetune, parse,
    train, write_training_log,
)

__all__ = [
    "CheckpointError", "load_checkpoint", "save_checkpoint",
    "assign_labels", "decode_mst",
    "EmbeddingError", "EmbeddingTable", "load_embeddings",
    "ParserConfig", "ParserConfigError", "ParserModel", "init_model", "score_sentence",
    "CompatibilityError", "TrainingError", "TrainingResult", "evaluate", "finetune", "parse",
    "train", "write_training_log",
]
