"""Visualization export: manifold images to 8-bit binary PPM (P6).

One color mapping per manifold:

* circle: the angle drives the HSV hue wheel (0 -> red), full
  saturation and value;
* sphere2: hue from the azimuth, lightness from the inclination
  (north pole light, south pole dark);
* spd: hue from the geodesic distance to the identity, normalized over
  the image;
* so3q: the rotation applied inversely to the reference axis (0,0,1)
  gives a direction on the sphere, colored as sphere2;
* euclidean(1): normalized grayscale; euclidean(3): values clipped to
  [0, 1] as RGB.

Unknown pixels are plotted white.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .manifolds import Circle, Euclidean, Rotations3, Spd, Sphere2

STYLES = ("angle-hue", "sphere-shade", "spd-distance", "rotation-axis",
          "gray", "rgb")

_DEFAULT_STYLE = {
    "circle": "angle-hue",
    "sphere2": "sphere-shade",
    "spd": "spd-distance",
    "so3q": "rotation-axis",
}


def _hsv_to_rgb(h, s, v):
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    rgb = np.select(
        [(i == k)[..., None] for k in range(6)],
        [np.stack([v, t, p], -1), np.stack([q, v, p], -1),
         np.stack([p, v, t], -1), np.stack([p, q, v], -1),
         np.stack([t, p, v], -1), np.stack([v, p, q], -1)])
    return rgb


def _hl_to_rgb(h, l):
    # full-saturation HSL: lightness rescales toward black/white
    base = _hsv_to_rgb(h, np.ones_like(h), np.ones_like(h))
    l3 = l[..., None]
    return np.where(l3 <= 0.5, base * (2.0 * l3), base + (1.0 - base) * (2.0 * l3 - 1.0))


def _sphere_colors(pts):
    azimuth = np.arctan2(pts[..., 1], pts[..., 0])
    hue = (azimuth % (2.0 * np.pi)) / (2.0 * np.pi)
    inclination = np.arccos(np.clip(pts[..., 2], -1.0, 1.0))
    lightness = 1.0 - inclination / np.pi
    return _hl_to_rgb(hue, lightness)


def render(img, style=None):
    """Map a manifold image to float RGB in [0, 1] (mask ignored here)."""
    m = img.manifold
    default = _DEFAULT_STYLE.get(m.name.split("(")[0])
    if default is None:
        default = "gray" if m.ncomp == 1 else "rgb"
    style = style or default
    if style not in STYLES:
        raise ValidationError(f"unknown view style {style!r} (one of {STYLES})")

    if style == "angle-hue":
        if not isinstance(m, Circle):
            raise ValidationError("angle-hue applies to circle images")
        hue = (img.pixels[..., 0] % (2.0 * np.pi)) / (2.0 * np.pi)
        return _hsv_to_rgb(hue, np.ones_like(hue), np.ones_like(hue))
    if style == "sphere-shade":
        if not isinstance(m, Sphere2):
            raise ValidationError("sphere-shade applies to sphere2 images")
        return _sphere_colors(img.pixels)
    if style == "spd-distance":
        if not isinstance(m, Spd):
            raise ValidationError("spd-distance applies to spd images")
        eye = np.broadcast_to(np.eye(m.r), img.pixels.shape)
        d = m.dist(img.pixels, eye)
        dmax = float(d.max())
        hue = 0.83 * (d / dmax if dmax > 0 else d)
        return _hsv_to_rgb(hue, np.ones_like(hue), np.ones_like(hue))
    if style == "rotation-axis":
        if not isinstance(m, Rotations3):
            raise ValidationError("rotation-axis applies to so3q images")
        axis = np.broadcast_to(np.array([0.0, 0.0, 1.0]), img.shape + (3,))
        pts = Rotations3.rotate_vector(Rotations3.conjugate(img.pixels), axis)
        return _sphere_colors(pts)
    if style == "gray":
        if not (isinstance(m, Euclidean) and m.n == 1):
            raise ValidationError("gray applies to euclidean(1) images")
        v = img.pixels[..., 0]
        lo, hi = float(v.min()), float(v.max())
        norm = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
        return np.repeat(norm[..., None], 3, axis=-1)
    # rgb
    if not (isinstance(m, Euclidean) and m.n == 3):
        raise ValidationError("rgb applies to euclidean(3) images")
    return np.clip(img.pixels, 0.0, 1.0)


def write_ppm(rgb, path):
    """Write float RGB in [0, 1] as binary PPM (P6)."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[-1] != 3:
        raise ValidationError("PPM writer expects an (rows, cols, 3) array")
    data = np.clip(np.round(rgb * 255.0), 0, 255).astype(np.uint8)
    rows, cols = data.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def export_view(img, path, style=None):
    """Render a manifold image and write it as PPM; unknown pixels white."""
    rgb = render(img, style)
    rgb = np.where(img.mask.known[..., None], rgb, 1.0)
    write_ppm(rgb, path)
