"""Normalized kernels on the multi-sphere as functions of the cosine vector t.

When every pixel of x and z has unit norm, all diagonal pre-activation
variances are equal and the Eq/Tr kernels depend on the pair only through
t_i = <x_i, z_i>.  Only matrix diagonals enter, so the recursion runs on
length-d vectors.  Computing the whole vector at each level evaluates all d
shifted arguments at once, which keeps the cost at O(L d q) per t.

All functions broadcast over leading batch axes of ``t``.
"""

import numpy as np

from .arccos import clamp_unit, kappa0, kappa1
from .params import KernelParams


def as_cosines(t, d: int | None = None) -> np.ndarray:
    t = clamp_unit(t, name="t")
    if t.ndim == 0:
        raise ValueError("t must have at least one pixel")
    if d is not None and t.shape[-1] != d:
        raise ValueError(f"t has {t.shape[-1]} pixels, expected {d}")
    return t


def _window_sum(v, offsets):
    return sum(np.roll(v, -k, axis=-1) for k in offsets)


def _readout(head: str, d: int) -> np.ndarray:
    if head == "Eq":
        p = np.zeros(d)
        p[0] = 1.0
        return p
    if head == "Tr":
        return np.full(d, 1.0 / d)
    raise ValueError("the multi-sphere path supports heads Eq and Tr; use rescgpk for GAP")


def _diag_forward(t, p: KernelParams):
    """Forward recursion on diagonals.

    Returns per-block (sigma, K, Kdot) and per-block (f, f_self).  The self
    chain (t = 1) goes through the same vector operations as t itself, so the
    normalized pre-activation at t = 1 is exactly 1; kappa0 has a square-root
    singularity there and would amplify rounding noise.
    """
    a2 = p.alpha**2 if p.skip else 1.0
    keep = 1.0 if p.skip else 0.0
    scale = p.cv * p.cw / 2.0
    offs = p.offsets

    f = t / p.C0
    f_one = np.ones(p.d) / p.C0
    sig, sig_one = f, f_one
    states = []
    profile = []
    for _ in range(p.L):
        sig_self = sig_one[0]
        kmat = scale * sig_self * kappa1(sig / sig_self)
        kdot = scale * kappa0(sig / sig_self)
        k_one = scale * sig_self * kappa1(sig_one / sig_self)
        states.append((sig, kmat, kdot))
        f = keep * f + a2 / (p.q * p.cw) * _window_sum(kmat, offs)
        f_one = keep * f_one + a2 / (p.q * p.cw) * _window_sum(k_one, offs)
        sig = p.cw / p.q * _window_sum(f, offs)
        sig_one = p.cw / p.q * _window_sum(f_one, offs)
        profile.append((f, f_one[0]))
    return states, profile


def _ntk_terms(states, f_last, p: KernelParams, head: str):
    a2 = p.alpha**2 if p.skip else 1.0
    keep = 1.0 if p.skip else 0.0
    offs = p.offsets
    pi = np.broadcast_to(_readout(head, p.d), f_last.shape)
    gpk = np.sum(pi * f_last, axis=-1)
    extra = np.zeros_like(gpk)
    for level in range(p.L, 0, -1):
        sig, kmat, kdot = states[level - 1]
        delta = a2 / (p.q * p.cw) * kdot * _window_sum(pi, offs)
        extra = extra + np.sum(delta * sig, axis=-1)
        extra = extra + a2 / (p.q * p.cw) * np.sum(pi * _window_sum(kmat, offs), axis=-1)
        if level > 1:
            pi = keep * pi + p.cw / p.q * _window_sum(delta, offs)
    return gpk, extra


def multisphere_kernels(t, params: KernelParams, head: str | None = None) -> dict:
    """Unnormalized and normalized GPK/NTK at the cosine vector(s) t.

    Returns a dict with keys ``gpk``, ``ntk`` and their values at t = 1
    (``gpk_one``, ``ntk_one``), plus normalized ``gpk_bar``, ``ntk_bar`` and
    ``diff_bar`` = (ntk - gpk) normalized by its value at t = 1.
    """
    p = params
    head = head or p.head
    t = as_cosines(t, p.d)
    both = np.concatenate([t.reshape(-1, p.d), np.ones((1, p.d))], axis=0)
    states, profile = _diag_forward(both, p)
    gpk, extra = _ntk_terms(states, profile[-1][0], p, head)
    shape = t.shape[:-1]
    g, e = gpk[:-1].reshape(shape), extra[:-1].reshape(shape)
    g1, e1 = gpk[-1], extra[-1]
    out = {"gpk": g, "ntk": g + e, "gpk_one": g1, "ntk_one": g1 + e1,
           "gpk_bar": g / g1, "ntk_bar": (g + e) / (g1 + e1)}
    out["diff_bar"] = e / e1 if e1 > 0 else np.full(shape, np.nan)
    return out


def _require_normalized_regime(p: KernelParams):
    if not p.normalized_regime:
        raise ValueError("normalized multi-sphere kernels require cv=2 and cw=1; "
                         "use rescgpk/rescntk with normalize() for other constants")


def rescgpk_multisphere_normalized(t, params: KernelParams):
    """Normalized GPK on the multi-sphere; equals 1 at t = (1, ..., 1)."""
    _require_normalized_regime(params)
    return multisphere_kernels(t, params)["gpk_bar"]


def rescntk_multisphere_normalized(t, params: KernelParams):
    """Normalized NTK on the multi-sphere; equals 1 at t = (1, ..., 1)."""
    _require_normalized_regime(params)
    return multisphere_kernels(t, params)["ntk_bar"]


def gpk_depth_profile(t, params: KernelParams, head: str | None = None) -> np.ndarray:
    """Normalized GPK at every depth 1..L, stacked on a new leading axis.

    The GPK at depth l only depends on the first l blocks, so one pass
    yields the whole profile.
    """
    p = params
    head = head or p.head
    t = as_cosines(t, p.d)
    _, profile = _diag_forward(t, p)
    readout = _readout(head, p.d)
    return np.stack([np.sum(readout * f, axis=-1) / f_self for f, f_self in profile])


def cgpk_appendix_h(t, L: int, beta: int):
    """Kernel with one size-2 convolution per block, used for eigenvalue decay.

    A pointwise base layer k_0 = (beta t_i + kappa1(t_i)) / (1 + beta) is
    followed by ``L`` convolutional blocks

        k_i <- (beta k_i + kappa1((k_i + k_{i+1}) / 2)) / (1 + beta),

    and the value at pixel 0 is returned.  The receptive field covers pixels
    0..L.  beta = 0 gives the plain CGPK, beta = 1 the residual variant.
    """
    if beta not in (0, 1):
        raise ValueError(f"beta must be 0 or 1, got {beta!r}")
    if int(L) != L or L < 0:
        raise ValueError(f"L must be a nonnegative integer, got {L!r}")
    t = as_cosines(t)
    k = (beta * t + kappa1(t)) / (1 + beta)
    for _ in range(int(L)):
        k = (beta * k + kappa1(0.5 * (k + np.roll(k, -1, axis=-1)))) / (1 + beta)
    return k[..., 0]


def fc_res_gpk(u, L: int, alpha: float):
    """Normalized GPK of a fully connected residual network."""
    k = clamp_unit(u)
    for _ in range(L):
        k = (k + alpha**2 * kappa1(k)) / (1 + alpha**2)
    return k


def fc_res_ntk(u, L: int, alpha: float):
    """Normalized trainable-layer part of the fully connected residual NTK.

    Sum over blocks l of v_{l-1} P_l (kappa1(K_{l-1}) + K_{l-1} kappa0(K_{l-1})),
    divided by its value 2 L v_{L-1} at u = 1, where v_l = (1 + alpha^2)^l,
    P_L = 1 and P_l = P_{l+1} (1 + alpha^2 kappa0(K_l)).
    """
    a2 = alpha**2
    ks = [clamp_unit(u)]
    for _ in range(L):
        ks.append((ks[-1] + a2 * kappa1(ks[-1])) / (1 + a2))
    total = np.zeros_like(ks[0])
    p_tilde = np.ones_like(ks[0])
    for level in range(L, 0, -1):
        k = ks[level - 1]
        total = total + (1 + a2) ** (level - 1) * p_tilde * (kappa1(k) + k * kappa0(k))
        p_tilde = p_tilde * (1 + a2 * kappa0(k))
    return total / (2 * L * (1 + a2) ** (L - 1))


def iterated_kappa1_mean(t, i: int):
    """Pixel mean of t after i entrywise applications of kappa1."""
    t = as_cosines(t)
    for _ in range(i):
        t = kappa1(t)
    return np.mean(t, axis=-1)


def residual_gap_lower_bound(t, L: int, alpha: float):
    """Lower bound on (plain CGPK-Tr) - (residual CGPK-Tr) at depth L."""
    mus = [iterated_kappa1_mean(t, i) for i in range(L + 1)]
    return sum((mus[l] - mus[l - 1]) / (1 + alpha**2) ** (L - l + 1) for l in range(1, L + 1))
