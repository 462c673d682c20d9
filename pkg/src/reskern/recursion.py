"""Exact GPK/NTK of the convolutional residual network for arbitrary inputs.

Every quantity is a d x d matrix indexed by pixel pairs.  Per channel, the
forward covariance of f^(l) is F^(l), the pre-activation covariance of
g^(l) is Sigma^(l), and the backward covariance of d(output)/d f^(l) is Pi^(l).
The heads differ only in Pi^(L):

    Eq  : e_0 e_0^T
    Tr  : I / d
    GAP : 1 1^T / d^2

Windows are circular, so ``window_trace(M)[i, j] = sum_k M[i+k, j+k]`` over
the symmetric filter offsets.
"""

from dataclasses import dataclass

import numpy as np

from .arccos import kappa0, kappa1
from .params import KernelParams


@dataclass
class LayerState:
    """Matrices for one input pair at block ``level`` (1-based)."""

    sigma: np.ndarray
    kmat: np.ndarray
    kdot: np.ndarray
    level: int


def shift(t, i: int):
    """Cyclic left shift along the last axis: (s_i v)_j = v_{j+i}."""
    return np.roll(np.asarray(t), -int(i), axis=-1)


def normalize(kernel_value, self_x, self_z):
    """K(x, z) / sqrt(K(x, x) K(z, z))."""
    if np.any(np.asarray(self_x) <= 0) or np.any(np.asarray(self_z) <= 0):
        raise ValueError("self kernel values must be strictly positive")
    return kernel_value / np.sqrt(self_x * self_z)


def as_signal(x, C0: int | None = None, d: int | None = None,
              on_multisphere: bool = False, name: str = "x") -> np.ndarray:
    """Validate a C0 x d input signal."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"{name} must be a C0 x d matrix, got shape {x.shape}")
    if C0 is not None and x.shape[0] != C0:
        raise ValueError(f"{name} has {x.shape[0]} channels, expected {C0}")
    if d is not None and x.shape[1] != d:
        raise ValueError(f"{name} has {x.shape[1]} pixels, expected {d}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    if on_multisphere:
        norms = np.linalg.norm(x, axis=0)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError(f"{name} columns are not unit norm")
    return x


def window_trace(m: np.ndarray, offsets) -> np.ndarray:
    return sum(np.roll(m, (-k, -k), axis=(0, 1)) for k in offsets)


def head_readout(head: str, d: int) -> np.ndarray:
    if head == "Eq":
        pi = np.zeros((d, d))
        pi[0, 0] = 1.0
        return pi
    if head == "Tr":
        return np.eye(d) / d
    if head == "GAP":
        return np.full((d, d), 1.0 / d**2)
    raise ValueError(f"unknown head {head!r}")


def _arccos_pair(sig_xz, diag_x, diag_z, scale):
    norm = np.sqrt(np.outer(diag_x, diag_z))
    safe = np.where(norm > 0, norm, 1.0)
    rho = np.where(norm > 0, sig_xz / safe, 0.0)
    return scale * norm * kappa1(rho), scale * kappa0(rho)


def _forward(x, z, p: KernelParams):
    """Run the forward recursion on (x,x), (z,z) and (x,z) together."""
    a2 = p.alpha**2 if p.skip else 1.0
    keep = 1.0 if p.skip else 0.0
    scale = p.cv * p.cw / 2.0
    offs = p.offsets

    f = {"xx": x.T @ x / p.C0, "zz": z.T @ z / p.C0, "xz": x.T @ z / p.C0}
    sig = dict(f)
    states = []
    for level in range(1, p.L + 1):
        dx, dz = np.diag(sig["xx"]).copy(), np.diag(sig["zz"]).copy()
        kmats = {}
        for key, (u, v) in {"xx": (dx, dx), "zz": (dz, dz), "xz": (dx, dz)}.items():
            kmats[key] = _arccos_pair(sig[key], u, v, scale)
        states.append(LayerState(sig["xz"], *kmats["xz"], level))
        for key in f:
            f[key] = keep * f[key] + a2 / (p.q * p.cw) * window_trace(kmats[key][0], offs)
            sig[key] = p.cw / p.q * window_trace(f[key], offs)
    return states, f


def rescgpk_layers(x, z, params: KernelParams) -> list:
    """Sigma, K and Kdot for the pair (x, z) at every block 1..L."""
    x = as_signal(x, C0=params.C0, d=params.d, name="x")
    z = as_signal(z, C0=params.C0, d=params.d, name="z")
    return _forward(x, z, params)[0]


def _kernels(x, z, p: KernelParams, ntk: bool):
    x = as_signal(x, C0=p.C0, d=p.d, name="x")
    z = as_signal(z, C0=p.C0, d=p.d, name="z")
    states, f = _forward(x, z, p)
    pi = head_readout(p.head, p.d)
    gpk = float(np.sum(pi * f["xz"]))
    if not ntk:
        return gpk, None

    a2 = p.alpha**2 if p.skip else 1.0
    keep = 1.0 if p.skip else 0.0
    offs = p.offsets
    theta = gpk
    for st in reversed(states):
        delta = a2 / (p.q * p.cw) * st.kdot * window_trace(pi, offs)
        theta += np.sum(delta * st.sigma)
        theta += a2 / (p.q * p.cw) * np.sum(pi * window_trace(st.kmat, offs))
        if st.level > 1:
            pi = keep * pi + p.cw / p.q * window_trace(delta, offs)
    return gpk, float(theta)


def rescgpk(x, z, params: KernelParams) -> float:
    """Gaussian-process kernel of the network for the configured head."""
    return _kernels(x, z, params, ntk=False)[0]


def rescntk(x, z, params: KernelParams) -> float:
    """Neural tangent kernel of the network for the configured head."""
    return _kernels(x, z, params, ntk=True)[1]


def gpk_and_ntk(x, z, params: KernelParams) -> tuple:
    return _kernels(x, z, params, ntk=True)


def normalized(kernel, x, z, params: KernelParams) -> float:
    """Normalize ``kernel`` (rescgpk or rescntk) by its self values."""
    return float(normalize(kernel(x, z, params), kernel(x, x, params), kernel(z, z, params)))
