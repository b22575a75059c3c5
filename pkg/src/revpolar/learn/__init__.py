from .models import (PRESETS, ModelKind, SchemeMismatchError, TrainedModel, TrainingError,
                     document_tokens, predict, resolve_hyper, train_document_model, training_matrix)
from .svm import Kernel, kkt_violation, smo

__all__ = [
    "PRESETS", "Kernel", "ModelKind", "SchemeMismatchError", "TrainedModel", "TrainingError",
    "document_tokens", "kkt_violation", "predict", "resolve_hyper", "smo", "train_document_model", "training_matrix",
]
