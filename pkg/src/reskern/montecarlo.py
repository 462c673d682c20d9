"""Monte Carlo estimates of the GPK and NTK from sampled finite-width networks."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .network import NetworkConfig, draw_rng, sample_params, tangent_products


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    samples: int

    @classmethod
    def from_draws(cls, values) -> "MCEstimate":
        values = np.asarray(values, dtype=np.float64)
        n = len(values)
        return cls(float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(n)), n)

    def z_score(self, analytic: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == analytic else float(np.sign(self.mean - analytic) * np.inf)
        return (self.mean - analytic) / self.std_error


def sample_products(xs, zs, config: NetworkConfig, n_samples: int, threads: int = 1):
    """Per-draw f(x)f(z) and gradient inner products, arrays of shape (n_samples, n_pairs).

    Draw i always uses the same random stream, so results do not depend on
    ``threads``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    xs, zs = np.asarray(xs, dtype=np.float64), np.asarray(zs, dtype=np.float64)
    if xs.ndim == 2:
        xs, zs = xs[None], zs[None]

    def one(i):
        params = sample_params(config, draw_rng(config.seed, i))
        return tangent_products(xs, zs, params, config)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(n_samples)))
    else:
        results = [one(i) for i in range(n_samples)]
    gpk = np.stack([r[0] for r in results])
    ntk = np.stack([r[1] for r in results])
    return gpk, ntk


def mc_gpk(x, z, config: NetworkConfig, n_samples: int, threads: int = 1) -> MCEstimate:
    gpk, _ = sample_products(x, z, config, n_samples, threads)
    return MCEstimate.from_draws(gpk[:, 0])


def mc_ntk(x, z, config: NetworkConfig, n_samples: int, threads: int = 1) -> MCEstimate:
    _, ntk = sample_products(x, z, config, n_samples, threads)
    return MCEstimate.from_draws(ntk[:, 0])
