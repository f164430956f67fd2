from .models import (
    ARCHS,
    Batch,
    ModelConfig,
    ONLINE_ARCHS,
    OnlineStepper,
    SeparationModel,
    crop_tensor,
    default_model_config,
    encode_step,
    feature_columns,
    make_batch,
    predict,
)
from .train import TrainConfig, TrainLog, evaluate, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ARCHS",
    "Batch",
    "ModelConfig",
    "ONLINE_ARCHS",
    "OnlineStepper",
    "SeparationModel",
    "TrainConfig",
    "TrainLog",
    "crop_tensor",
    "default_model_config",
    "encode_step",
    "evaluate",
    "feature_columns",
    "load_checkpoint",
    "make_batch",
    "predict",
    "save_checkpoint",
    "train",
]
