"""
GraphSAGE implementado desde cero: modelo, pérdidas, backward manual y Adam.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .embeddings import EmbeddingBatch, extract_boundary_embeddings, payload_size
from .losses import (
    boundary_alignment_loss,
    class_weights,
    classification_loss,
    cosine_alignment,
    predict_proba,
    softmax,
    total_loss,
)
from .model import PARAM_NAMES, ForwardCache, ModelError, SageModel
from .optim import AdamState, adam_step
from .trainer import StepLosses, train_step

__all__ = [
    "PARAM_NAMES",
    "AdamState",
    "EmbeddingBatch",
    "ForwardCache",
    "ModelError",
    "SageModel",
    "StepLosses",
    "adam_step",
    "boundary_alignment_loss",
    "class_weights",
    "classification_loss",
    "cosine_alignment",
    "extract_boundary_embeddings",
    "load_checkpoint",
    "payload_size",
    "predict_proba",
    "save_checkpoint",
    "softmax",
    "total_loss",
    "train_step",
]
