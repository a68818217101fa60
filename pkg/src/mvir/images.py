"""Manifold-valued images: a grid of points plus a validity mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Mask
from .manifolds import Manifold


@dataclass
class ManifoldImage:
    """Rectangular grid of manifold points with a known-pixel mask.

    ``pixels`` has shape ``(rows, cols) + manifold.point_shape``.  Pixels
    outside the mask still hold valid placeholder points (they are
    re-initialized by the solver, never trusted as data).
    """

    manifold: Manifold
    pixels: np.ndarray
    mask: Mask = None

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=float)
        k = len(self.manifold.point_shape)
        if self.pixels.ndim != 2 + k or self.pixels.shape[2:] != self.manifold.point_shape:
            raise ValidationError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"(rows, cols) + {self.manifold.point_shape} for {self.manifold}")
        if self.mask is None:
            self.mask = Mask.full(self.shape)
        if self.mask.shape != self.shape:
            raise ValidationError(
                f"mask shape {self.mask.shape} does not match image shape {self.shape}")

    @property
    def shape(self):
        return self.pixels.shape[:2]

    @property
    def n_pixels(self):
        return self.shape[0] * self.shape[1]

    def validate(self):
        """Check every pixel against the manifold's point invariants."""
        self.manifold.validate_points(self.pixels, context="pixel")
        return self

    def copy(self):
        return ManifoldImage(self.manifold, self.pixels.copy(), self.mask.copy())

    def same_geometry_as(self, other):
        return self.manifold == other.manifold and self.shape == other.shape


def check_same_geometry(a, b, what="images"):
    if not a.same_geometry_as(b):
        raise ValidationError(
            f"{what} disagree: {a.manifold} {a.shape} vs {b.manifold} {b.shape}")


def constant_image(manifold, shape, point=None, mask=None):
    rows, cols = shape
    p = manifold.origin() if point is None else np.asarray(point, dtype=float)
    pixels = np.broadcast_to(p, (rows, cols) + manifold.point_shape).copy()
    return ManifoldImage(manifold, pixels, mask)


def random_image(manifold, shape, rng, mask=None):
    rows, cols = shape
    pixels = manifold.random_points(rng, (rows, cols))
    return ManifoldImage(manifold, pixels, mask)
