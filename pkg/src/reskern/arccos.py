"""Arc-cosine functions of degree 0 and 1.

These are the closed forms of E[relu'(u) relu'(v)] and E[relu(u) relu(v)]
for a standard bivariate Gaussian with correlation rho (up to a factor 1/2).
"""

import numpy as np

# Inputs that drift past +-1 by less than this are treated as rounding noise.
CLAMP_BAND = 1e-12


def clamp_unit(u, band: float = CLAMP_BAND, name: str = "u"):
    """Clamp values to [-1, 1], raising if any lies further out than ``band``."""
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} contains non-finite values")
    excess = np.max(np.abs(u)) - 1.0 if u.size else 0.0
    if excess > band:
        raise ValueError(f"{name} outside [-1, 1] by {excess:.3e}")
    return np.clip(u, -1.0, 1.0)


def kappa0(u):
    """(pi - arccos u) / pi."""
    u = clamp_unit(u)
    return (np.pi - np.arccos(u)) / np.pi


def kappa1(u):
    """(sqrt(1 - u^2) + (pi - arccos u) u) / pi."""
    u = clamp_unit(u)
    return (np.sqrt(1.0 - u * u) + (np.pi - np.arccos(u)) * u) / np.pi
