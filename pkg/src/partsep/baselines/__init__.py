from .closest import MONO_PENALTY, closest_pitch
from .mlp import MlpBaseline, MlpConfig, load_mlp, mlp_predict, save_mlp, train_mlp
from .zones import ZoneSet, fit_zones, oracle_zones

__all__ = [
    "MONO_PENALTY",
    "MlpBaseline",
    "MlpConfig",
    "ZoneSet",
    "closest_pitch",
    "fit_zones",
    "load_mlp",
    "mlp_predict",
    "oracle_zones",
    "save_mlp",
    "train_mlp",
]
