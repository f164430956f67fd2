"""Layers and fused operations on top of the autodiff tape.

Everything takes and returns `Tensor`s.  Modules hold their parameters as
requires_grad Tensors and expose them through `params()` as a flat
name->Tensor dict for the optimizer and the checkpoint writer.  Stateful
concerns (dropout RNG, train/eval mode) are passed in explicitly so that
a forward pass is a pure function of its arguments.

The LSTM is one fused tape node with a hand-written backward-through-time:
the input projection runs as a single big matmul over all timesteps and
the recurrence keeps the four gate matrices combined, which is what makes
CPU training of the full recipe practical.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, concat

MASK_NEG = -1e9


def uniform_init(rng: np.random.Generator, shape, fan_in: int,
                 dtype=np.float32) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


# ---------------------------------------------------------------------------
# fused operations


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor,
               eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale."""
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def back(g):
        dxhat = g * gain.data
        inner = (dxhat * xhat).mean(axis=-1, keepdims=True)
        x.accumulate(inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                            - xhat * inner))
        axes = tuple(range(g.ndim - 1))
        gain.accumulate((g * xhat).sum(axis=axes))
        bias.accumulate(g.sum(axis=axes))

    return Tensor(out, parents=(x, gain, bias), backward=back)


def dropout(x: Tensor, rate: float, rng: np.random.Generator,
            training: bool) -> Tensor:
    """Inverted dropout; identity when eval or rate 0."""
    if not training or rate <= 0.0:
        return x
    keep = (rng.random(x.data.shape) >= rate).astype(x.data.dtype)
    keep /= (1.0 - rate)

    def back(g):
        x.accumulate(g * keep)

    return Tensor(x.data * keep, parents=(x,), backward=back)


def masked_softmax(scores: Tensor, add_mask: np.ndarray | None) -> Tensor:
    """softmax(scores + add_mask) as one tape node, storing only the output.

    Attention maps are the largest tensors in the transformer graph, so
    folding the mask-add and softmax together halves what the tape keeps
    alive.  The mask is additive and takes no gradient.
    """
    raw = scores.data if add_mask is None else scores.data + add_mask
    y = raw - raw.max(axis=-1, keepdims=True)
    np.exp(y, out=y)
    y /= y.sum(axis=-1, keepdims=True)

    def back(g):
        inner = (g * y).sum(axis=-1, keepdims=True)
        scores.accumulate((g - inner) * y)

    return Tensor(y, parents=(scores,), backward=back)


def cross_entropy(logits: Tensor, labels: np.ndarray,
                  mask: np.ndarray | None = None) -> Tensor:
    """Mean token-level cross entropy from raw scores.

    `logits` is (..., K), `labels` integer (...,); `mask` weights positions
    (0 = padding).  Stable log-softmax; backward is the classic
    (softmax - onehot) / n_valid.
    """
    z = logits.data
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    total = e.sum(axis=-1, keepdims=True)
    log_probs = shifted - np.log(total)
    picked = np.take_along_axis(log_probs, labels[..., None], axis=-1)[..., 0]
    if mask is None:
        n_valid = picked.size
        loss = -picked.sum() / n_valid
    else:
        n_valid = float(mask.sum())
        loss = -(picked * mask).sum() / n_valid

    def back(g):
        soft = e / total
        np.subtract.at(soft, (*np.indices(labels.shape), labels), 1.0)
        if mask is not None:
            soft *= mask[..., None]
        logits.accumulate(soft * (g / n_valid))

    return Tensor(np.asarray(loss, dtype=z.dtype), parents=(logits,),
                  backward=back)


def lstm_layer(x: Tensor, W: Tensor, U: Tensor, b: Tensor,
               mask: np.ndarray | None = None,
               state: tuple[np.ndarray, np.ndarray] | None = None):
    """One LSTM layer over (B, T, D) input; returns ((B, T, H), final state).

    Gate packing along the last axis of W/U/b is [input, forget, cell,
    output].  `mask` is (B, T) with 0 marking padding: masked steps pass
    hidden and cell state through unchanged, so right-padded batches and
    flipped (left-padded) sequences both stay exact.  `state` carries
    (h, c) across evaluation windows; gradients do not flow through it.
    """
    B, T, D = x.data.shape
    H = U.data.shape[0]
    dt = x.data.dtype

    P = (x.data.reshape(B * T, D) @ W.data + b.data).reshape(B, T, 4 * H)
    if state is None:
        h = np.zeros((B, H), dtype=dt)
        c = np.zeros((B, H), dtype=dt)
    else:
        h, c = state[0].astype(dt, copy=True), state[1].astype(dt, copy=True)

    I = np.empty((T, B, H), dtype=dt)
    F = np.empty_like(I)
    G = np.empty_like(I)
    O = np.empty_like(I)
    TC = np.empty_like(I)
    CP = np.empty_like(I)
    HP = np.empty_like(I)
    outs = np.empty((B, T, H), dtype=dt)

    for t in range(T):
        HP[t] = h
        CP[t] = c
        z = P[:, t] + h @ U.data
        i = 0.5 * (np.tanh(0.5 * z[:, :H]) + 1.0)
        f = 0.5 * (np.tanh(0.5 * z[:, H:2 * H]) + 1.0)
        gg = np.tanh(z[:, 2 * H:3 * H])
        o = 0.5 * (np.tanh(0.5 * z[:, 3 * H:]) + 1.0)
        c_raw = f * c + i * gg
        tc = np.tanh(c_raw)
        h_raw = o * tc
        if mask is None:
            h, c = h_raw, c_raw
        else:
            m = mask[:, t:t + 1].astype(dt)
            h = m * h_raw + (1.0 - m) * h
            c = m * c_raw + (1.0 - m) * c
        I[t], F[t], G[t], O[t], TC[t] = i, f, gg, o, tc
        outs[:, t] = h

    final = (h.copy(), c.copy())

    def back(gout):
        dh = np.zeros((B, H), dtype=dt)
        dc = np.zeros((B, H), dtype=dt)
        dP = np.empty((B, T, 4 * H), dtype=dt)
        dU = np.zeros_like(U.data)
        for t in range(T - 1, -1, -1):
            dh = dh + gout[:, t]
            if mask is None:
                dh_in, dc_in = dh, dc
                dh_skip = dc_skip = 0.0
            else:
                m = mask[:, t:t + 1].astype(dt)
                dh_in, dc_in = m * dh, m * dc
                dh_skip, dc_skip = (1.0 - m) * dh, (1.0 - m) * dc
            dc_raw = dc_in + dh_in * O[t] * (1.0 - TC[t] * TC[t])
            do = dh_in * TC[t]
            dz = np.concatenate([
                dc_raw * G[t] * I[t] * (1.0 - I[t]),
                dc_raw * CP[t] * F[t] * (1.0 - F[t]),
                dc_raw * I[t] * (1.0 - G[t] * G[t]),
                do * O[t] * (1.0 - O[t]),
            ], axis=1)
            dP[:, t] = dz
            dU += HP[t].T @ dz
            dh = dz @ U.data.T + dh_skip
            dc = dc_raw * F[t] + dc_skip
        flat = dP.reshape(B * T, 4 * H)
        x.accumulate((flat @ W.data.T).reshape(B, T, D))
        W.accumulate(x.data.reshape(B * T, D).T @ flat)
        U.accumulate(dU)
        b.accumulate(flat.sum(axis=0))

    out = Tensor(outs, parents=(x, W, U, b), backward=back)
    return out, final


# ---------------------------------------------------------------------------
# modules


class Linear:
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.W = Tensor(uniform_init(rng, (d_in, d_out), d_in, dtype),
                        requires_grad=True)
        self.b = Tensor(np.zeros(d_out, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.W + self.b

    def params(self):
        return {"W": self.W, "b": self.b}


class Embedding:
    def __init__(self, count: int, dim: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.table = Tensor(uniform_init(rng, (count, dim), dim, dtype),
                            requires_grad=True)

    def __call__(self, indices: np.ndarray) -> Tensor:
        return self.table[indices]

    def params(self):
        return {"table": self.table}


class LayerNorm:
    def __init__(self, dim: int, dtype=np.float32):
        self.gain = Tensor(np.ones(dim, dtype=dtype), requires_grad=True)
        self.bias = Tensor(np.zeros(dim, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gain, self.bias)

    def params(self):
        return {"gain": self.gain, "bias": self.bias}


class LSTM:
    """A single LSTM layer's parameters; forget-gate bias starts at 1."""

    def __init__(self, d_in: int, hidden: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.hidden = hidden
        self.W = Tensor(uniform_init(rng, (d_in, 4 * hidden), d_in, dtype),
                        requires_grad=True)
        self.U = Tensor(uniform_init(rng, (hidden, 4 * hidden), hidden, dtype),
                        requires_grad=True)
        bias = np.zeros(4 * hidden, dtype=dtype)
        bias[hidden:2 * hidden] = 1.0
        self.b = Tensor(bias, requires_grad=True)

    def __call__(self, x: Tensor, mask=None, state=None):
        return lstm_layer(x, self.W, self.U, self.b, mask=mask, state=state)

    def params(self):
        return {"W": self.W, "U": self.U, "b": self.b}


class BiLSTM:
    """Forward + backward LSTM, outputs concatenated (2 * hidden wide)."""

    def __init__(self, d_in: int, hidden: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.fwd = LSTM(d_in, hidden, rng, dtype)
        self.bwd = LSTM(d_in, hidden, rng, dtype)

    def __call__(self, x: Tensor, mask=None):
        out_f, _ = self.fwd(x, mask=mask)
        rev_mask = None if mask is None else mask[:, ::-1]
        out_b, _ = self.bwd(x.flip(1), mask=rev_mask)
        return concat([out_f, out_b.flip(1)], axis=-1)

    def params(self):
        return {**{f"fwd.{k}": v for k, v in self.fwd.params().items()},
                **{f"bwd.{k}": v for k, v in self.bwd.params().items()}}


class MultiHeadAttention:
    """Scaled dot-product attention, built from matmul/softmax primitives."""

    def __init__(self, dim: int, heads: int, rng: np.random.Generator,
                 dtype=np.float32):
        if dim % heads:
            raise ValueError(f"heads ({heads}) must divide width ({dim})")
        self.dim, self.heads = dim, heads
        self.qkv = Linear(dim, 3 * dim, rng, dtype)
        self.out = Linear(dim, dim, rng, dtype)

    def __call__(self, x: Tensor, add_mask: np.ndarray | None,
                 drop_rate: float, rng, training: bool) -> Tensor:
        B, T, _ = x.data.shape
        dk = self.dim // self.heads
        fused = self.qkv(x)  # (B, T, 3*dim)
        fused = fused.reshape(B, T, 3, self.heads, dk).transpose(2, 0, 3, 1, 4)
        q, k, v = fused[0], fused[1], fused[2]  # each (B, heads, T, dk)
        q = q * (1.0 / np.sqrt(dk))  # scale before the big (T, T) map exists
        scores = q @ k.transpose(0, 1, 3, 2)
        att = dropout(masked_softmax(scores, add_mask), drop_rate, rng, training)
        mixed = (att @ v).transpose(0, 2, 1, 3).reshape(B, T, self.dim)
        return self.out(mixed)

    def params(self):
        return {**{f"qkv.{k}": v for k, v in self.qkv.params().items()},
                **{f"out.{k}": v for k, v in self.out.params().items()}}


class FeedForward:
    def __init__(self, dim: int, inner: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.up = Linear(dim, inner, rng, dtype)
        self.down = Linear(inner, dim, rng, dtype)

    def __call__(self, x: Tensor) -> Tensor:
        return self.down(self.up(x).relu())

    def params(self):
        return {**{f"up.{k}": v for k, v in self.up.params().items()},
                **{f"down.{k}": v for k, v in self.down.params().items()}}


class TransformerBlock:
    """Pre-norm block: x + drop(att(ln(x))), then x + drop(ffn(ln(x)))."""

    def __init__(self, dim: int, heads: int, inner: int,
                 rng: np.random.Generator, dtype=np.float32):
        self.ln1 = LayerNorm(dim, dtype)
        self.att = MultiHeadAttention(dim, heads, rng, dtype)
        self.ln2 = LayerNorm(dim, dtype)
        self.ffn = FeedForward(dim, inner, rng, dtype)

    def __call__(self, x: Tensor, add_mask, drop_rate, rng, training):
        x = x + dropout(self.att(self.ln1(x), add_mask, drop_rate, rng,
                                 training), drop_rate, rng, training)
        x = x + dropout(self.ffn(self.ln2(x)), drop_rate, rng, training)
        return x

    def params(self):
        out = {}
        for prefix, mod in (("ln1", self.ln1), ("att", self.att),
                            ("ln2", self.ln2), ("ffn", self.ffn)):
            out.update({f"{prefix}.{k}": v for k, v in mod.params().items()})
        return out


def causal_mask(t: int, dtype=np.float32) -> np.ndarray:
    """(1, 1, T, T) additive mask hiding positions > query index."""
    m = np.triu(np.full((t, t), MASK_NEG, dtype=dtype), k=1)
    return m[None, None]


def padding_mask(valid: np.ndarray, dtype=np.float32) -> np.ndarray:
    """(B, 1, 1, T) additive mask hiding padded key positions."""
    return np.where(valid[:, None, None, :] > 0, 0.0, MASK_NEG).astype(dtype)
