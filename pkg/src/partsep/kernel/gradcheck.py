"""Finite-difference validation of the autodiff tape.

Everything here runs in float64: build the model under test at toy width,
wrap its loss in a zero-argument closure, and compare the tape's gradients
against central differences element by element.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor


def max_rel_error(loss_fn: Callable[[], Tensor],
                  params: dict[str, Tensor],
                  eps: float = 1e-4) -> float:
    """Largest relative gradient error over every element of every parameter.

    Relative error for a pair (analytic a, numeric n) is
    |a - n| / max(|a| + |n|, 1e-6), the symmetric form that stays
    meaningful when one side is ~0.  The 1e-6 floor matters: a structurally
    zero gradient still picks up ~1 ulp of noise in the central difference
    (|loss| * 2^-52 / (2 * eps) ~ 1e-12 at eps 1e-4), which is correctness,
    not error, and must not be scored against a denominator it can reach.
    """
    for p in params.values():
        if p.data.dtype != np.float64:
            raise ValueError("gradcheck requires float64 parameters")
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = {k: (np.zeros_like(p.data) if p.grad is None else p.grad.copy())
                for k, p in params.items()}

    worst = 0.0
    for key, p in params.items():
        flat = p.data.ravel()
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + eps
            up = float(loss_fn().data)
            flat[idx] = saved - eps
            down = float(loss_fn().data)
            flat[idx] = saved
            numeric = (up - down) / (2.0 * eps)
            a = analytic[key].ravel()[idx]
            err = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst


def battery(seed: int = 0) -> dict[str, float]:
    """The standard correctness sweep: every layer type at toy width.

    Returns name -> max relative error; everything should come in well
    under 1e-4.  Used by both the CLI command and the acceptance checks.
    """
    from .layers import (LSTM, Embedding, Linear, TransformerBlock,
                         causal_mask, cross_entropy, layer_norm, padding_mask)

    rng = np.random.default_rng(seed)
    B, T, D, H = 2, 5, 6, 8
    f64 = lambda *shape: Tensor(rng.standard_normal(shape), requires_grad=True)
    mask = np.ones((B, T))
    mask[1, 3:] = 0.0
    labels = rng.integers(0, D, size=(B, T))
    results: dict[str, float] = {}

    x = f64(B, T, D)
    gain, bias = f64(D), f64(D)
    results["layer_norm"] = max_rel_error(
        lambda: cross_entropy(layer_norm(x, gain, bias), labels, mask),
        {"x": x, "gain": gain, "bias": bias}, eps=1e-5)

    emb = Embedding(11, D, rng, dtype=np.float64)
    idx = rng.integers(0, 11, size=(B, T))
    results["embedding"] = max_rel_error(
        lambda: cross_entropy(emb(idx), labels, mask),
        {"table": emb.table}, eps=1e-5)

    def with_params(module, extra=None):
        params = {k: v for k, v in module.params().items()}
        if extra:
            params.update(extra)
        return params

    cell = LSTM(D, H, rng, dtype=np.float64)
    head = Linear(H, D, rng, dtype=np.float64)
    x2 = f64(B, T, D)
    results["lstm_cell"] = max_rel_error(
        lambda: cross_entropy(head(cell(x2, mask=mask)[0]), labels, mask),
        {**with_params(cell), **{f"head.{k}": v for k, v in head.params().items()},
         "x": x2})

    block = TransformerBlock(H, heads=2, inner=2 * H, rng=rng, dtype=np.float64)
    head_t = Linear(H, D, rng, dtype=np.float64)
    x3 = f64(B, T, H)
    add_mask = padding_mask(mask, dtype=np.float64) + causal_mask(T, dtype=np.float64)
    results["attention_block"] = max_rel_error(
        lambda: cross_entropy(head_t(block(x3, add_mask, 0.0, None, False)),
                              labels, mask),
        {**with_params(block), "x": x3})

    stack = [LSTM(D if i == 0 else H, H, rng, dtype=np.float64) for i in range(3)]
    head_s = Linear(H, D, rng, dtype=np.float64)
    x4 = f64(B, T, D)

    def lstm_stack_loss():
        h = x4
        for layer in stack:
            h, _ = layer(h, mask=mask)
        return cross_entropy(head_s(h), labels, mask)

    stack_params = {"x": x4}
    for i, layer in enumerate(stack):
        stack_params.update({f"l{i}.{k}": v for k, v in layer.params().items()})
    results["lstm_stack"] = max_rel_error(lstm_stack_loss, stack_params)

    blocks = [TransformerBlock(H, heads=2, inner=2 * H, rng=rng, dtype=np.float64)
              for _ in range(3)]
    head_b = Linear(H, D, rng, dtype=np.float64)
    x5 = f64(B, T, H)

    def transformer_stack_loss():
        h = x5
        for b in blocks:
            h = b(h, add_mask, 0.0, None, False)
        return cross_entropy(head_b(h), labels, mask)

    block_params = {"x": x5}
    for i, b in enumerate(blocks):
        block_params.update({f"b{i}.{k}": v for k, v in b.params().items()})
    results["transformer_stack"] = max_rel_error(transformer_stack_loss,
                                                 block_params)
    return results
