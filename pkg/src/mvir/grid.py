"""Pixel-grid topology: neighborhoods, masks, boundary handling.

The image domain is a rectangular grid with forward neighborhoods
N(i)+ = {down, right} under mirror boundary conditions.  A mirrored
neighbor coincides with the pixel itself, so its difference term
vanishes identically; out-of-grid neighbors are therefore simply
omitted, which is exactly equivalent.

Indices are 0-based (row, col); serialization order is row-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def check_shape(shape):
    rows, cols = shape
    if rows < 1 or cols < 1:
        raise ValidationError(f"grid shape must be positive, got {shape}")
    return int(rows), int(cols)


def _check_index(shape, i):
    rows, cols = shape
    r, c = i
    if not (0 <= r < rows and 0 <= c < cols):
        raise ValidationError(f"pixel index {i} out of range for {rows}x{cols} grid")


def neighbors_plus(shape, i):
    """Forward neighbors {(r+1, c), (r, c+1)} clipped to the grid."""
    rows, cols = check_shape(shape)
    _check_index(shape, i)
    r, c = i
    out = []
    if r + 1 < rows:
        out.append((r + 1, c))
    if c + 1 < cols:
        out.append((r, c + 1))
    return out


def neighbors_minus(shape, i):
    """Backward neighbors {(r-1, c), (r, c-1)} clipped to the grid."""
    check_shape(shape)
    _check_index(shape, i)
    r, c = i
    out = []
    if r - 1 >= 0:
        out.append((r - 1, c))
    if c - 1 >= 0:
        out.append((r, c - 1))
    return out


def neighbors(shape, i):
    """Full 4-neighborhood N(i) = N(i)+ ∪ N(i)-, clipped to the grid."""
    return neighbors_plus(shape, i) + neighbors_minus(shape, i)


def edge_count(shape):
    rows, cols = check_shape(shape)
    return rows * (cols - 1) + cols * (rows - 1)


@dataclass
class Mask:
    """Set of pixels with known data, as a boolean (rows, cols) array."""

    known: np.ndarray

    def __post_init__(self):
        self.known = np.asarray(self.known, dtype=bool)
        if self.known.ndim != 2:
            raise ValidationError("mask must be a 2-D boolean array")
        if not self.known.any():
            raise ValidationError("mask must mark at least one pixel as known")

    @property
    def shape(self):
        return self.known.shape

    @property
    def n_known(self):
        return int(self.known.sum())

    def copy(self):
        return Mask(self.known.copy())

    @staticmethod
    def full(shape):
        rows, cols = check_shape(shape)
        return Mask(np.ones((rows, cols), dtype=bool))
