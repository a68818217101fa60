"""Scikit-learn style estimator wrapping the restoration solver.

The estimator takes raw pixel arrays (``(rows, cols) + point_shape``)
plus an optional known-pixel mask, so it can sit in pipelines next to
other array-to-array transformers, and exposes its configuration through
``get_params``/``set_params`` for grid searches over lambda and eps.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .grid import Mask
from .images import ManifoldImage
from .manifolds import Manifold, manifold_by_name
from .penalties import make_penalty
from .solver import ArmijoParams, SolverConfig, run


def as_manifold(manifold, dim=None):
    """Input validation: accept a Manifold instance or a tag string."""
    if isinstance(manifold, Manifold):
        return manifold
    if isinstance(manifold, str):
        return manifold_by_name(manifold, dim)
    raise ValidationError(f"cannot interpret {manifold!r} as a manifold")


def as_image(X, manifold, mask=None):
    """Input validation: accept a ManifoldImage or a raw pixel array."""
    if isinstance(X, ManifoldImage):
        if mask is not None:
            return ManifoldImage(X.manifold, X.pixels, Mask(mask))
        return X
    pixels = np.asarray(X, dtype=float)
    m = mask if mask is None else Mask(np.asarray(mask, dtype=bool))
    return ManifoldImage(manifold, pixels, m)


class HalfQuadraticRestoration(BaseEstimator, TransformerMixin):
    """Edge-preserving restoration of manifold-valued images.

    Parameters
    ----------
    manifold : str or Manifold
        One of "euclidean", "circle", "sphere2", "so3q", "spd" (or an
        instance).  ``manifold_dim`` supplies n for euclidean and r for
        spd.
    penalty : {"phi1", "phi2", "phi3"}
        Regularization penalty (smoothed absolute value, Huber, bounded
        exponential).
    eps : float
        Penalty parameter.
    lam : float
        Regularization weight.
    mode : {"aniso", "iso"}
        Per-edge or per-pixel coupling of the neighbor differences.
    inner : {"newton", "gd"}
        Inner update: diagonal approximate Newton or gradient descent,
        both with Armijo backtracking.

    After ``fit``, the attributes ``restored_``, ``energy_trace_``,
    ``n_iter_``, ``termination_`` and ``result_`` hold the outcome.
    """

    def __init__(self, manifold="circle", manifold_dim=None, penalty="phi1",
                 eps=0.1, lam=1.0, mode="aniso", inner="newton",
                 inner_steps=5, tol=1e-8, max_iters=500):
        self.manifold = manifold
        self.manifold_dim = manifold_dim
        self.penalty = penalty
        self.eps = eps
        self.lam = lam
        self.mode = mode
        self.inner = inner
        self.inner_steps = inner_steps
        self.tol = tol
        self.max_iters = max_iters

    def _config(self):
        return SolverConfig(
            lam=self.lam,
            penalty=make_penalty(self.penalty, self.eps),
            mode=self.mode,
            inner_method=self.inner,
            inner_steps=self.inner_steps,
            armijo=ArmijoParams(),
            outer_tol=self.tol,
            outer_max_iters=self.max_iters,
        )

    def _restore(self, X, mask):
        m = as_manifold(self.manifold, self.manifold_dim)
        image = as_image(X, m, mask)
        return run(image, self._config())

    def fit(self, X, y=None, mask=None):
        """Restore X (optionally masked) and store the result."""
        result = self._restore(X, mask)
        self.result_ = result
        self.restored_ = result.restored
        self.energy_trace_ = result.energy_trace
        self.n_iter_ = result.outer_iters
        self.termination_ = result.termination
        return self

    def transform(self, X, mask=None):
        """Restore X and return the restored pixel array.

        Restoration is stateless (nothing is learned in fit), so this
        works on fresh inputs without refitting.
        """
        return self._restore(X, mask).restored.pixels

    def fit_transform(self, X, y=None, mask=None):
        return self.fit(X, mask=mask).restored_.pixels
