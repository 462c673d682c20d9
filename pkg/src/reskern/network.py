"""Finite-width 1-D convolutional residual network with exact reverse mode.

Activations are batched as (B, C, d).  A filter bank has shape (q, C_in, C_out)
and acts with circular padding:

    conv(w, v)[b, c, i] = sum_k sum_c' w[k + h, c', c] v[b, c', i + k],  k = -h..h.

Forward pass (all channel counts equal ``width``):

    f0 = V0^T x / sqrt(C0)                       (fixed, not trained)
    g1 = W1^T x / sqrt(C0)
    f_l = f_{l-1} + alpha sqrt(cv / (q C)) conv(V_l, relu(g_l))
    g_l = sqrt(cw / (q C)) conv(W_l, f_{l-1})    for l >= 2

Without skip connections the identity path (and alpha) are dropped.
"""

from dataclasses import dataclass

import numpy as np

from .params import KernelParams


@dataclass(frozen=True)
class NetworkConfig:
    params: KernelParams
    width: int
    seed: int = 0

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 1:
            raise ValueError(f"width must be a positive integer, got {self.width!r}")


@dataclass
class NetworkParams:
    """Weights; ``W`` and ``V`` are dicts keyed by block index."""

    V0: np.ndarray
    W1: np.ndarray
    W: dict
    V: dict
    head: np.ndarray

    def trainable(self) -> dict:
        out = {"W1": self.W1, "head": self.head}
        out.update({f"W{l}": w for l, w in self.W.items()})
        out.update({f"V{l}": v for l, v in self.V.items()})
        return out

    def replace(self, name: str, value: np.ndarray) -> "NetworkParams":
        W, V = dict(self.W), dict(self.V)
        fields = {"V0": self.V0, "W1": self.W1, "head": self.head}
        if name in fields:
            fields[name] = value
        elif name[0] == "W":
            W[int(name[1:])] = value
        else:
            V[int(name[1:])] = value
        return NetworkParams(fields["V0"], fields["W1"], W, V, fields["head"])


def sample_params(config: NetworkConfig, rng: np.random.Generator) -> NetworkParams:
    p, C = config.params, config.width
    V0 = rng.standard_normal((p.C0, C))
    W1 = rng.standard_normal((p.C0, C))
    V = {l: rng.standard_normal((p.q, C, C)) for l in range(1, p.L + 1)}
    W = {l: rng.standard_normal((p.q, C, C)) for l in range(2, p.L + 1)}
    head = rng.standard_normal((C, p.d) if p.head == "Tr" else (C,))
    return NetworkParams(V0, W1, W, V, head)


def draw_rng(seed: int, draw: int) -> np.random.Generator:
    """Independent stream for Monte Carlo draw ``draw``; independent of scheduling."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(draw,)))


def _relu(u):
    return np.maximum(u, 0.0)


def _relu_grad(u):
    return (u >= 0).astype(u.dtype)


def conv(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    h = (w.shape[0] - 1) // 2
    vt = np.swapaxes(v, 1, 2)
    out = sum(np.roll(vt, -k, axis=1) @ w[k + h] for k in range(-h, h + 1))
    return np.swapaxes(out, 1, 2)


def conv_transpose(w: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Adjoint of ``conv`` in its input."""
    h = (w.shape[0] - 1) // 2
    ut = np.swapaxes(u, 1, 2)
    out = sum(np.roll(ut, k, axis=1) @ w[k + h].T for k in range(-h, h + 1))
    return np.swapaxes(out, 1, 2)


def conv_weight_grad(v: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    """Per-sample gradient of <u, conv(w, v)> with respect to w, shape (B, q, C_in, C_out)."""
    h = (q - 1) // 2
    return np.stack([np.einsum("bci,bei->bce", np.roll(v, -k, axis=-1), u)
                     for k in range(-h, h + 1)], axis=1)


def _scales(p: KernelParams, C: int):
    a = (p.alpha if p.skip else 1.0) * np.sqrt(p.cv / (p.q * C))
    s = np.sqrt(p.cw / (p.q * C))
    return a, s


def _as_batch(x, p: KernelParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    xb = x[None] if single else x
    if xb.ndim != 3 or xb.shape[1:] != (p.C0, p.d):
        raise ValueError(f"input must have shape (C0, d) = ({p.C0}, {p.d}) "
                         f"or a batch of those, got {x.shape}")
    return xb


def forward(x, params: NetworkParams, config: NetworkConfig):
    """Network output(s) and the cache needed by the reverse pass."""
    p, C = config.params, config.width
    xb = _as_batch(x, p)
    a, s = _scales(p, C)
    keep = 1.0 if p.skip else 0.0

    f = keep * conv(params.V0[None], xb) / np.sqrt(p.C0)
    g = conv(params.W1[None], xb) / np.sqrt(p.C0)
    fs, gs = [f], []
    for l in range(1, p.L + 1):
        if l > 1:
            g = s * conv(params.W[l], f)
        gs.append(g)
        f = keep * f + a * conv(params.V[l], _relu(g))
        fs.append(f)

    if p.head == "Eq":
        out = f[:, :, 0] @ params.head / np.sqrt(C)
    elif p.head == "Tr":
        out = np.einsum("bcd,cd->b", f, params.head) / np.sqrt(p.d * C)
    else:
        out = f.sum(axis=-1) @ params.head / (p.d * np.sqrt(C))
    cache = {"x": xb, "f": fs, "g": gs}
    return (out[0] if x.ndim == 2 else out), cache


def backward_signals(params: NetworkParams, config: NetworkConfig, cache) -> dict:
    """Derivatives of the output with respect to every f^(l) ("b") and g^(l) ("delta")."""
    p, C = config.params, config.width
    a, s = _scales(p, C)
    keep = 1.0 if p.skip else 0.0
    fL = cache["f"][-1]
    if p.head == "Eq":
        b = np.zeros_like(fL)
        b[:, :, 0] = params.head / np.sqrt(C)
    elif p.head == "Tr":
        b = np.broadcast_to(params.head / np.sqrt(p.d * C), fL.shape).copy()
    else:
        b = np.broadcast_to((params.head / (p.d * np.sqrt(C)))[:, None], fL.shape).copy()

    bs, deltas = {p.L: b}, {}
    for l in range(p.L, 0, -1):
        g = cache["g"][l - 1]
        delta = _relu_grad(g) * (a * conv_transpose(params.V[l], b))
        deltas[l] = delta
        if l > 1:
            b = keep * b + s * conv_transpose(params.W[l], delta)
            bs[l - 1] = b
    return {"b": bs, "delta": deltas}


def grad_params(x, params: NetworkParams, config: NetworkConfig) -> dict:
    """Gradient of the output with respect to each trainable tensor (V0 is fixed).

    Single input: arrays shaped like the weights.  Batched input: a leading
    batch axis is added.
    """
    p, C = config.params, config.width
    a, s = _scales(p, C)
    single = np.asarray(x).ndim == 2
    _, cache = forward(x, params, config)
    sig = backward_signals(params, config, cache)
    xb, fs, gs = cache["x"], cache["f"], cache["g"]

    fL = fs[-1]
    if p.head == "Eq":
        grads = {"head": fL[:, :, 0] / np.sqrt(C)}
    elif p.head == "Tr":
        grads = {"head": fL / np.sqrt(p.d * C)}
    else:
        grads = {"head": fL.sum(axis=-1) / (p.d * np.sqrt(C))}
    grads["W1"] = np.einsum("bci,bei->bce", xb, sig["delta"][1]) / np.sqrt(p.C0)
    for l in range(1, p.L + 1):
        grads[f"V{l}"] = a * conv_weight_grad(_relu(gs[l - 1]), sig["b"][l], p.q)
        if l > 1:
            grads[f"W{l}"] = s * conv_weight_grad(fs[l - 1], sig["delta"][l], p.q)
    if single:
        grads = {k: v[0] for k, v in grads.items()}
    return grads


def _head_products(fx: np.ndarray, fz: np.ndarray, p: KernelParams, C: int) -> np.ndarray:
    """E over the head weights of f(x) f(z), given the last hidden layers."""
    if p.head == "Eq":
        return np.einsum("bc,bc->b", fx[:, :, 0], fz[:, :, 0]) / C
    if p.head == "Tr":
        return np.einsum("bcd,bcd->b", fx, fz) / (p.d * C)
    return np.einsum("bc,bc->b", fx.sum(-1), fz.sum(-1)) / (p.d**2 * C)


def empirical_gpk(x, z, params: NetworkParams, config: NetworkConfig) -> np.ndarray:
    """Readout-averaged f(x) f(z) for one draw of the hidden weights.

    Its mean is the GPK and its spread shrinks with the width, unlike the raw
    product f(x) f(z) whose variance stays of order one.
    """
    p = config.params
    xb, zb = _as_batch(x, p), _as_batch(z, p)
    _, cache = forward(np.concatenate([xb, zb]), params, config)
    fL = cache["f"][-1]
    return _head_products(fL[:len(xb)], fL[len(xb):], p, config.width)


def _window_trace(m: np.ndarray, q: int) -> np.ndarray:
    h = (q - 1) // 2
    return sum(np.roll(m, (-k, -k), axis=(-2, -1)) for k in range(-h, h + 1))


def tangent_products(x, z, params: NetworkParams, config: NetworkConfig):
    """f(x) f(z) and <grad f(x), grad f(z)> for matched batches of inputs.

    The parameter inner products are assembled from d x d pixel Gram matrices
    instead of materializing per-sample gradients.
    """
    p, C = config.params, config.width
    a, s = _scales(p, C)
    xb, zb = _as_batch(x, p), _as_batch(z, p)
    n = len(xb)
    out, cache = forward(np.concatenate([xb, zb]), params, config)
    sig = backward_signals(params, config, cache)

    def pair_gram(u):
        return np.einsum("bci,bcj->bij", u[:n], u[n:])

    fs, gs = cache["f"], cache["g"]
    ntk = _head_products(fs[-1][:n], fs[-1][n:], p, C)
    ntk = ntk + np.sum(pair_gram(cache["x"]) * pair_gram(sig["delta"][1]), axis=(1, 2)) / p.C0
    for l in range(1, p.L + 1):
        sg = pair_gram(_relu(gs[l - 1]))
        ntk = ntk + a**2 * np.sum(pair_gram(sig["b"][l]) * _window_trace(sg, p.q), axis=(1, 2))
        if l > 1:
            fg = pair_gram(fs[l - 1])
            ntk = ntk + s**2 * np.sum(pair_gram(sig["delta"][l]) * _window_trace(fg, p.q),
                                      axis=(1, 2))
    return out[:n] * out[n:], ntk
