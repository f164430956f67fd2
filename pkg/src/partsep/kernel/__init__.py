from .tensor import Tensor, concat
from .layers import (
    BiLSTM,
    Embedding,
    FeedForward,
    LayerNorm,
    Linear,
    LSTM,
    MultiHeadAttention,
    TransformerBlock,
    causal_mask,
    cross_entropy,
    dropout,
    layer_norm,
    lstm_layer,
    masked_softmax,
    padding_mask,
    uniform_init,
)
from .optim import Adam
from .gradcheck import max_rel_error

__all__ = [
    "Adam",
    "BiLSTM",
    "Embedding",
    "FeedForward",
    "LayerNorm",
    "Linear",
    "LSTM",
    "MultiHeadAttention",
    "Tensor",
    "TransformerBlock",
    "causal_mask",
    "concat",
    "cross_entropy",
    "dropout",
    "layer_norm",
    "lstm_layer",
    "masked_softmax",
    "max_rel_error",
    "padding_mask",
    "uniform_init",
]
