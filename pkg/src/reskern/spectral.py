"""Eigenvalues of multi-dot-product kernels by tensor-product quadrature.

A kernel K(t) on the multi-sphere MS(C0, d) is diagonalized by products of
spherical harmonics.  With t_i distributed as the inner product of two
uniform points on S^{C0-1}, the eigenvalue for frequencies k is

    lambda_k = E[K(t) prod_i P_{k_i}(t_i)],

where P_k is the Gegenbauer polynomial C_k^{(C0/2-1)} scaled so that
P_k(1) = 1 (Chebyshev T_k when C0 = 2).  These are the Mercer eigenvalues
with respect to the uniform probability measure.  The "orthonormal"
convention instead uses E[P_k^2] = 1; it differs by sqrt(dim H_k), a power
of k when C0 > 2.
"""

from dataclasses import dataclass
import numpy as np
from scipy.special import eval_chebyt, eval_gegenbauer, roots_chebyt, roots_gegenbauer

ZERO_THRESHOLD = 1e-13


def gegenbauer(n: int, alpha_g: float, t):
    """Gegenbauer polynomial C_n^{alpha_g}(t)."""
    if alpha_g <= 0:
        raise ValueError(f"alpha_g must be positive, got {alpha_g}")
    return eval_gegenbauer(int(n), alpha_g, t)


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss nodes and weights for (1 - t^2)^((C0 - 3) / 2) on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    C0: int

    @property
    def geg_order(self) -> float:
        return self.C0 / 2.0 - 1.0

    @property
    def points_per_dim(self) -> int:
        return len(self.nodes)

    @classmethod
    def build(cls, C0: int, points_per_dim: int = 48) -> "QuadratureGrid":
        if C0 < 2:
            raise ValueError(f"C0 must be >= 2, got {C0}")
        if points_per_dim < 1:
            raise ValueError("points_per_dim must be positive")
        if C0 == 2:
            nodes, weights = roots_chebyt(points_per_dim)
        else:
            nodes, weights = roots_gegenbauer(points_per_dim, C0 / 2.0 - 1.0)
        return cls(np.asarray(nodes), np.asarray(weights), C0)

    def basis(self, kmax: int, normalization: str = "mercer") -> np.ndarray:
        """Matrix Phi[k, j] = w_j P_k(t_j) with w normalized to a probability."""
        w = self.weights / self.weights.sum()
        ks = np.arange(kmax + 1)
        if self.C0 == 2:
            poly = np.array([eval_chebyt(k, self.nodes) for k in ks])
        else:
            a = self.geg_order
            poly = np.array([eval_gegenbauer(k, a, self.nodes) / eval_gegenbauer(k, a, 1.0)
                             for k in ks])
        if normalization == "orthonormal":
            poly = poly / np.sqrt(poly**2 @ w)[:, None]
        elif normalization != "mercer":
            raise ValueError(f"unknown normalization {normalization!r}")
        return poly * w


@dataclass(frozen=True)
class EigenEstimate:
    k: tuple
    lam: float
    abs_tolerance: float


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    r_squared: float


def kernel_on_grid(kernel, grid: QuadratureGrid, d: int) -> np.ndarray:
    """Evaluate ``kernel`` on the full tensor grid, one slab of the first axis at a time."""
    n = grid.points_per_dim
    rest = np.stack(np.meshgrid(*([grid.nodes] * (d - 1)), indexing="ij"), axis=-1)
    out = np.empty((n,) * d)
    for i, node in enumerate(grid.nodes):
        t = np.concatenate([np.full(rest.shape[:-1] + (1,), node), rest], axis=-1)
        out[i] = kernel(t)
    return out


def project(values: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Contract every axis of ``values`` with ``phi``; result is indexed by frequencies."""
    lam = values
    for _ in range(values.ndim):
        lam = np.tensordot(lam, phi, axes=([0], [1]))
    return lam


def eigenvalue_table(kernel, d: int, C0: int, kmax: int, points_per_dim: int = 48,
                     normalization: str = "mercer"):
    """All eigenvalues with max(k) <= kmax, and a quadrature error proxy.

    The proxy is the change from a grid with half as many nodes per dimension.
    """
    if points_per_dim < kmax + 1:
        raise ValueError(f"{points_per_dim} nodes per dimension cannot resolve frequency {kmax}")
    fine = QuadratureGrid.build(C0, points_per_dim)
    lam = project(kernel_on_grid(kernel, fine, d), fine.basis(kmax, normalization))
    coarse_n = max(points_per_dim // 2, kmax + 1)
    coarse = QuadratureGrid.build(C0, coarse_n)
    lam_coarse = project(kernel_on_grid(kernel, coarse, d), coarse.basis(kmax, normalization))
    tol = np.abs(lam - lam_coarse) + 1e-15
    return lam, tol


def eigenvalue_estimate(kernel, k, C0: int, grid: QuadratureGrid,
                        normalization: str = "mercer") -> EigenEstimate:
    """Eigenvalue of ``kernel`` for the frequency multi-index ``k``."""
    k = tuple(int(v) for v in k)
    if min(k) < 0:
        raise ValueError("frequencies must be nonnegative")
    if grid.C0 != C0:
        raise ValueError(f"grid built for C0={grid.C0}, kernel uses C0={C0}")
    if grid.points_per_dim < max(k) + 1:
        raise ValueError(f"{grid.points_per_dim} nodes per dimension cannot resolve frequency {max(k)}")
    d = len(k)

    def single(g):
        phi = g.basis(max(k), normalization)
        rows = np.stack([phi[ki] for ki in k])
        values = kernel_on_grid(kernel, g, d)
        for row in rows:
            values = np.tensordot(values, row, axes=([0], [0]))
        return float(values)

    lam = single(grid)
    coarse = QuadratureGrid.build(C0, max(grid.points_per_dim // 2, max(k) + 1))
    return EigenEstimate(k, lam, abs(lam - single(coarse)) + 1e-15)


def decay_slope(pairs) -> SlopeFit:
    """Least-squares fit of log(lambda) against log(k)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (k, lambda) pairs")
    ks = np.array([p[0] for p in pairs], dtype=float)
    lams = np.array([p[1] for p in pairs], dtype=float)
    if np.any(ks <= 0) or np.any(lams <= 0):
        raise ValueError("k and lambda must be positive")
    x, y = np.log(ks), np.log(lams)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)))


def decay_bounds(C0: int, kind: str, m: int, d: int) -> tuple:
    """Exponent interval implied by the eigenvalue bounds for m active pixels."""
    if kind not in ("GPK", "NTK"):
        raise ValueError(f"kind must be GPK or NTK, got {kind!r}")
    nu_a = 2.5
    nu_b = 1 + (3 if kind == "GPK" else 1) / (2 * d)
    return -m * (C0 + 2 * nu_a - 3), -m * (C0 + 2 * nu_b - 3)


def theorem_sandwich_check(exponent: float, C0: int, kind: str, m: int,
                           d: int = 4, slack: float = 0.5) -> bool:
    """True if ``exponent`` lies in the bound interval widened by ``slack`` per pixel."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lo, hi = decay_bounds(C0, kind, m, d)
    return lo - slack * m <= exponent <= hi + slack * m


def pattern(m: int, k: int, d: int, positions=None) -> tuple:
    """Frequency multi-index with value k on ``positions`` (default the first m pixels)."""
    positions = range(m) if positions is None else positions
    return tuple(k if i in positions else 0 for i in range(d))


def trace_eigenvalue(lam_table: np.ndarray, k) -> float:
    """Eigenvalue of the trace kernel: mean of the Eq eigenvalues over shifts of k."""
    k = np.asarray(k)
    return float(np.mean([lam_table[tuple(np.roll(k, -i))] for i in range(len(k))]))


def fit_pattern(lam_table, tol_table, m: int, ks, d: int, positions=None):
    """Slope fit of one pattern, skipping eigenvalues that are quadrature zeros."""
    rows = []
    for k in ks:
        idx = pattern(m, k, d, positions)
        rows.append((idx, k, float(lam_table[idx]), float(tol_table[idx])))
    usable = [(k, lam) for _, k, lam, _ in rows if lam > ZERO_THRESHOLD]
    fit = decay_slope(usable) if len(usable) >= 3 else None
    return rows, fit

