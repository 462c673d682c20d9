"""scikit-learn transformer producing kernel matrices against the fitted points.

    >>> from sklearn.kernel_ridge import KernelRidge
    >>> k = ResidualKernel(L=4, q=3).fit(X_train)          # X: (n, C0, d)
    >>> model = KernelRidge(kernel="precomputed").fit(k.transform(X_train), y)
    >>> model.predict(k.transform(X_test))
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .multisphere import multisphere_kernels
from .params import KernelParams
from .recursion import gpk_and_ntk


class ResidualKernel(TransformerMixin, BaseEstimator):
    """Kernel of an infinitely wide convolutional residual network.

    Parameters
    ----------
    L, q, alpha, cv, cw, head, skip
        Architecture, see :class:`reskern.params.KernelParams`.
    kind : {"gpk", "ntk"}
        Gaussian-process kernel or neural tangent kernel.
    normalize : bool
        Return K(x, z) / sqrt(K(x, x) K(z, z)).
    n_channels : int or None
        Needed only when X is passed flattened as (n, C0 * d), channel-major.
    """

    def __init__(self, L=2, q=3, alpha=1.0, cv=2.0, cw=1.0, head="Eq", skip=True,
                 kind="gpk", normalize=True, n_channels=None):
        self.L = L
        self.q = q
        self.alpha = alpha
        self.cv = cv
        self.cw = cw
        self.head = head
        self.skip = skip
        self.kind = kind
        self.normalize = normalize
        self.n_channels = n_channels

    def _validate(self, X, reset: bool) -> np.ndarray:
        X = check_array(X, allow_nd=True, dtype=np.float64)
        if X.ndim == 2:
            if not self.n_channels:
                raise ValueError("2-D input needs n_channels to recover (C0, d)")
            X = X.reshape(len(X), self.n_channels, -1)
        if X.ndim != 3:
            raise ValueError(f"expected X of shape (n, C0, d), got {X.shape}")
        if reset:
            self.n_channels_in_, self.n_pixels_ = X.shape[1:]
        elif X.shape[1:] != (self.n_channels_in_, self.n_pixels_):
            raise ValueError(f"X has shape {X.shape[1:]} per sample, fitted on "
                             f"{(self.n_channels_in_, self.n_pixels_)}")
        return X

    def _params(self) -> KernelParams:
        if self.kind not in ("gpk", "ntk"):
            raise ValueError(f"kind must be 'gpk' or 'ntk', got {self.kind!r}")
        return KernelParams(self.L, self.q, self.n_pixels_, self.n_channels_in_, self.alpha,
                            self.cv, self.cw, self.head, self.skip)

    def fit(self, X, y=None):
        self.X_fit_ = self._validate(X, reset=True)
        self.params_ = self._params()
        return self

    def transform(self, X):
        check_is_fitted(self, "X_fit_")
        X = self._validate(X, reset=False)
        return self._matrix(X, self.X_fit_)

    def _matrix(self, X, Z):
        p = self.params_
        on_sphere = all(np.allclose(np.linalg.norm(A, axis=1), 1.0, atol=1e-10) for A in (X, Z))
        if on_sphere and p.head != "GAP":
            t = np.einsum("icp,jcp->ijp", X, Z)
            res = multisphere_kernels(t, p)
            key = self.kind + ("_bar" if self.normalize else "")
            return res[key]
        idx = 0 if self.kind == "gpk" else 1
        k = np.array([[gpk_and_ntk(x, z, p)[idx] for z in Z] for x in X])
        if self.normalize:
            dx = np.array([gpk_and_ntk(x, x, p)[idx] for x in X])
            dz = np.array([gpk_and_ntk(z, z, p)[idx] for z in Z])
            k = k / np.sqrt(np.outer(dx, dz))
        return k
