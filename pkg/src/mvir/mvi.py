"""The MVI text container for manifold-valued images.

Layout (all lines newline-terminated):

    MVI1                          magic
    <tag>                         euclidean | circle | sphere2 | so3q | spd
    <rows> <cols> <ncomp> [r]     dims; the extra matrix size r for spd
    <mask>                        rows*cols chars, row-major, '1' = known
    <pixel components> x N        one pixel per line, row-major, decimal text

Components per pixel: n (euclidean), 1 (circle), 3 (sphere2),
4 (so3q), r*r row-major (spd).  Floats are written with 17 significant
digits, so save -> load -> save is byte-identical for files produced by
this module.  Known pixels are validated against their manifold's
invariants on load, with the offending pixel named in the error.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .grid import Mask
from .images import ManifoldImage
from .manifolds import Spd, manifold_by_name

MAGIC = "MVI1"


def _fmt(x):
    return format(x, ".17g")


def save_mvi(img, path):
    """Write a manifold image to an MVI text file."""
    m = img.manifold
    rows, cols = img.shape
    dims = f"{rows} {cols} {m.ncomp}"
    if isinstance(m, Spd):
        dims += f" {m.r}"
    tag = m.name.split("(")[0]
    lines = [MAGIC, tag, dims, "".join("1" if k else "0" for k in img.mask.known.reshape(-1))]
    flat = img.pixels.reshape(rows * cols, m.ncomp)
    lines.extend(" ".join(_fmt(x) for x in row) for row in flat)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mvi(path):
    """Read a manifold image from an MVI text file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as e:
        raise ValidationError(f"{path}: not an MVI text file (bad byte at offset {e.start})")
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        got = lines[0][:8] if lines else ""
        raise ValidationError(
            f"{path}: bad magic at byte offset 0: expected {MAGIC!r}, got {got!r}")
    if len(lines) < 4:
        raise ValidationError(f"{path}: truncated header (need 4 header lines)")

    tag = lines[1].strip()
    dims = lines[2].split()
    if len(dims) not in (3, 4):
        raise ValidationError(f"{path}: dims line must be 'rows cols ncomp [r]', got {lines[2]!r}")
    try:
        rows, cols, ncomp = (int(x) for x in dims[:3])
        r = int(dims[3]) if len(dims) == 4 else None
    except ValueError:
        raise ValidationError(f"{path}: non-integer dims in {lines[2]!r}")
    if rows < 1 or cols < 1 or ncomp < 1:
        raise ValidationError(f"{path}: dims must be positive, got {lines[2]!r}")

    if tag == "euclidean":
        manifold = manifold_by_name(tag, ncomp)
    elif tag == "spd":
        if r is None:
            raise ValidationError(f"{path}: spd dims line must carry the matrix size r")
        manifold = manifold_by_name(tag, r)
        if manifold.ncomp != ncomp:
            raise ValidationError(
                f"{path}: component count {ncomp} does not match r*r = {manifold.ncomp}")
    else:
        manifold = manifold_by_name(tag)
        if manifold.ncomp != ncomp:
            raise ValidationError(
                f"{path}: component count {ncomp} does not match {tag} ({manifold.ncomp})")

    mask_line = lines[3].strip()
    if len(mask_line) != rows * cols or set(mask_line) - {"0", "1"}:
        raise ValidationError(
            f"{path}: mask line must be {rows * cols} chars of 0/1")
    known = np.frombuffer(mask_line.encode(), dtype=np.uint8).reshape(rows, cols) == ord("1")

    payload = [ln for ln in lines[4:] if ln.strip()]
    if len(payload) != rows * cols:
        raise ValidationError(
            f"{path}: expected {rows * cols} pixel lines, found {len(payload)}")
    try:
        flat = np.array([[float(x) for x in ln.split()] for ln in payload])
    except ValueError:
        raise ValidationError(f"{path}: non-numeric pixel payload")
    if flat.shape != (rows * cols, ncomp):
        raise ValidationError(
            f"{path}: pixel lines must have {ncomp} components each")

    pixels = flat.reshape((rows, cols) + manifold.point_shape)
    img = ManifoldImage(manifold, pixels, Mask(known))
    bad = manifold.bad_points(pixels[known])
    if bad.any():
        known_idx = np.argwhere(known)
        where = tuple(known_idx[int(np.flatnonzero(bad)[0])])
        raise ValidationError(
            f"{path}: known pixel {where} violates {tag} invariants "
            f"({manifold._invariant_hint})")
    return img
