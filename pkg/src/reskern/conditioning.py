"""Gram matrices, double-constant approximations and condition-number bounds.

For a normalized kernel matrix A, B(A) is the matrix with unit diagonal and
every off-diagonal entry equal to the mean off-diagonal b of A.  Its spectrum
is 1 - b + n b (once) and 1 - b (n - 1 times).  The condition number of B(A)
is a lower bound for that of A, and an upper bound follows from the row
deviation eps whenever eps < 1 - b.
"""

from dataclasses import dataclass

import numpy as np

from .multisphere import gpk_depth_profile
from .params import KernelParams


def uniform_multisphere(n: int, C0: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n points uniform on MS(C0, d), shape (n, C0, d)."""
    x = rng.standard_normal((n, C0, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def pairwise_cosines(points: np.ndarray) -> np.ndarray:
    """t[i, j, p] = <x_i[:, p], x_j[:, p]> for points of shape (n, C0, d)."""
    return np.einsum("icp,jcp->ijp", points, points)


def gram(points, kernel) -> np.ndarray:
    """Symmetric matrix of kernel values over all pairs; unit diagonal.

    ``kernel`` maps cosine vectors of shape (..., d) to normalized values.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < 1:
        raise ValueError("need at least one point")
    iu = np.triu_indices(n, k=1)
    values = np.asarray(kernel(pairwise_cosines(points)[iu]), dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        i, j = iu[0][bad[0]], iu[1][bad[0]]
        raise ValueError(f"non-finite kernel value for pair ({i}, {j})")
    a = np.eye(n)
    a[iu] = values
    a[(iu[1], iu[0])] = values
    return a


@dataclass(frozen=True)
class DoubleConstant:
    b: float
    n: int

    @property
    def lambda_max(self) -> float:
        return 1.0 - self.b + self.n * self.b

    @property
    def lambda_min(self) -> float:
        return 1.0 - self.b

    @property
    def rho(self) -> float:
        return self.lambda_max / self.lambda_min

    def matrix(self) -> np.ndarray:
        return np.full((self.n, self.n), self.b) + (1.0 - self.b) * np.eye(self.n)


@dataclass(frozen=True)
class ConditionReport:
    rho_actual: float
    rho_lower: float
    rho_upper: float | None
    epsilon: float
    b: float
    l1_gap: float

    @property
    def valid_upper(self) -> bool:
        return self.rho_upper is not None


def _off_diagonal(a: np.ndarray) -> np.ndarray:
    return a[~np.eye(len(a), dtype=bool)]


def double_constant_of(a: np.ndarray) -> DoubleConstant:
    a = np.asarray(a, dtype=np.float64)
    n = len(a)
    if n < 2:
        raise ValueError("need an n x n matrix with n >= 2")
    off = _off_diagonal(a)
    if off.sum() < 0:
        raise ValueError("off-diagonal sum is negative")
    return DoubleConstant(float(off.mean()), n)


def sym_eig(a: np.ndarray):
    """Ascending eigenvalues and eigenvectors of a symmetric matrix."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(a), initial=0.0)):
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(0.5 * (a + a.T))


def condition_bounds(a: np.ndarray, uniform_data: bool = False) -> ConditionReport:
    """Actual condition number of A with the double-constant bounds."""
    a = np.asarray(a, dtype=np.float64)
    dc = double_constant_of(a)
    dev = np.abs(a - dc.matrix())
    np.fill_diagonal(dev, 0.0)
    l1_gap = float(dev.sum())
    eps = l1_gap / dc.n if uniform_data else float(dev.sum(axis=1).max())
    evals = sym_eig(a)[0]
    upper = None
    if eps < dc.lambda_min:
        top = dc.lambda_max if uniform_data else dc.lambda_max + eps
        upper = top / (dc.lambda_min - eps)
    return ConditionReport(float(evals[-1] / evals[0]), dc.rho, upper, eps, dc.b, l1_gap)


def depth_sweep(points, depths, params: KernelParams, uniform_data: bool = True) -> list:
    """Condition reports of the residual and plain trace-kernel Gram matrices per depth.

    Returns rows (L, kind, ConditionReport) with kind in {"ResCGPK", "CGPK"}.
    """
    depths = sorted(set(int(L) for L in depths))
    if not depths or depths[0] < 1:
        raise ValueError("depths must be positive integers")
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    iu = np.triu_indices(n, k=1)
    cosines = pairwise_cosines(points)[iu]
    rows = []
    for kind, skip in (("ResCGPK", True), ("CGPK", False)):
        p = params.with_(L=depths[-1], skip=skip)
        profile = gpk_depth_profile(cosines, p, head="Tr")
        for L in depths:
            a = np.eye(n)
            a[iu] = profile[L - 1]
            a[(iu[1], iu[0])] = profile[L - 1]
            rows.append((L, kind, condition_bounds(a, uniform_data)))
    rows.sort(key=lambda r: (r[0], r[1] != "ResCGPK"))
    return rows
