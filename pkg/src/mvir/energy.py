"""Restoration energies, their augmented forms, and Riemannian gradients.

Models (nu = 1 anisotropic, nu = 2 isotropic):

    J_1(u) = 1/2 sum_{i in V} d^2(u_i, f_i)
             + lambda sum_i sum_{j in N(i)+} Phi(d(u_i, u_j))
    J_2(u) = 1/2 sum_{i in V} d^2(u_i, f_i)
             + lambda sum_i Phi( (sum_{j in N(i)+} d^2(u_i, u_j))^(1/2) )

where Phi = penalty.effective_phi, the penalty matched to the public
weight map (see :mod:`mvir.penalties`).  The augmented energy replaces
Phi(d) by d^2 v - psi(v) with per-edge (anisotropic) or per-pixel
(isotropic) weights v; at v = weight(d_u) it equals J exactly, and for
fixed v it is quadratic in the distances:

    grad_i = -1_V(i) log_{u_i} f_i - 2 lambda sum_{j in N(i)} v_ij log_{u_i} u_j

(anisotropic; each undirected forward edge carries one weight, used from
both endpoints).  The isotropic gradient couples the pixel's own weight
on forward edges and the neighbors' weights on backward edges.

Energy values are accumulated with ``math.fsum`` so that recorded descent
chains are reproducible and comparable at 1e-12 slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CutLocusError, ValidationError
from .images import ManifoldImage, check_same_geometry

ANISOTROPIC = "aniso"
ISOTROPIC = "iso"
MODES = (ANISOTROPIC, ISOTROPIC)


def _check_mode(mode):
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")


def _check_lambda(lam):
    if not np.isfinite(lam) or lam < 0:
        raise ValidationError(f"regularization weight must be >= 0, got {lam}")


def _fsum(a):
    return math.fsum(np.asarray(a, dtype=float).reshape(-1))


@dataclass
class WeightField:
    """Auxiliary weights of the augmented energy.

    Anisotropic: one weight per forward edge (``horizontal`` has shape
    (rows, cols-1), ``vertical`` (rows-1, cols)).  Isotropic: one weight
    per pixel in ``per_pixel``.  All entries lie in (0, s(0)].
    """

    mode: str
    horizontal: np.ndarray = None
    vertical: np.ndarray = None
    per_pixel: np.ndarray = None

    def __post_init__(self):
        _check_mode(self.mode)
        if self.mode == ANISOTROPIC:
            if self.horizontal is None or self.vertical is None:
                raise ValidationError("anisotropic weights need horizontal and vertical arrays")
            self.horizontal = np.asarray(self.horizontal, dtype=float)
            self.vertical = np.asarray(self.vertical, dtype=float)
            arrays = (self.horizontal, self.vertical)
        else:
            if self.per_pixel is None:
                raise ValidationError("isotropic weights need a per-pixel array")
            self.per_pixel = np.asarray(self.per_pixel, dtype=float)
            arrays = (self.per_pixel,)
        for a in arrays:
            if a.size and (not np.all(np.isfinite(a)) or np.any(a <= 0)):
                raise ValidationError("weights must be finite and positive")

    def arrays(self):
        if self.mode == ANISOTROPIC:
            return (self.horizontal, self.vertical)
        return (self.per_pixel,)

    @property
    def min(self):
        return min((float(a.min()) for a in self.arrays() if a.size), default=np.nan)

    @property
    def max(self):
        return max((float(a.max()) for a in self.arrays() if a.size), default=np.nan)

    def check_consistent(self, shape, mode):
        rows, cols = shape
        if self.mode != mode:
            raise ValidationError(f"weight field mode {self.mode!r} does not match {mode!r}")
        if self.mode == ANISOTROPIC:
            ok = self.horizontal.shape == (rows, cols - 1) and self.vertical.shape == (rows - 1, cols)
        else:
            ok = self.per_pixel.shape == (rows, cols)
        if not ok:
            raise ValidationError("weight field shape does not match the image grid")


@dataclass
class GradientField:
    """Tangent vector per pixel, based at the pixels of ``base``."""

    base: ManifoldImage
    coeffs: np.ndarray

    def norm(self):
        m = self.base.manifold
        sq = m.inner(self.base.pixels, self.coeffs, self.coeffs)
        return float(np.sqrt(max(np.sum(sq), 0.0)))


def field_inner(image, a, b):
    """Sum of per-pixel Riemannian inner products <a_i, b_i>_{u_i}."""
    return float(np.sum(image.manifold.inner(image.pixels, a, b)))


# ---------------------------------------------------------------------------
# distances on the edge structure
# ---------------------------------------------------------------------------


def edge_distances(u):
    """Geodesic distances along forward edges: (horizontal, vertical)."""
    m = u.manifold
    px = u.pixels
    dh = m.dist(px[:, :-1], px[:, 1:])
    dv = m.dist(px[:-1, :], px[1:, :])
    return dh, dv


def iso_sq_distance(u):
    """Per-pixel sum of squared forward-edge distances (d_i^2)."""
    dh, dv = edge_distances(u)
    di2 = np.zeros(u.shape)
    di2[:, :-1] += np.square(dh)
    di2[:-1, :] += np.square(dv)
    return di2


def _data_sq(u, f):
    known = f.mask.known
    if not known.any():
        return np.zeros(0)
    return np.square(u.manifold.dist(u.pixels[known], f.pixels[known]))


# ---------------------------------------------------------------------------
# energies
# ---------------------------------------------------------------------------


def eval_J(u, f, lam, penalty, mode=ANISOTROPIC):
    """Value of the restoration energy J_nu(u) against data f on its mask."""
    check_same_geometry(u, f)
    _check_mode(mode)
    _check_lambda(lam)
    data = 0.5 * _fsum(_data_sq(u, f))
    if mode == ANISOTROPIC:
        dh, dv = edge_distances(u)
        smooth = _fsum(penalty.effective_phi(dh)) + _fsum(penalty.effective_phi(dv))
    else:
        di = np.sqrt(iso_sq_distance(u))
        smooth = _fsum(penalty.effective_phi(di))
    return data + lam * smooth


def eval_augmented(u, f, v, lam, penalty, mode=ANISOTROPIC):
    """Augmented energy with fixed weights:

    1/2 sum_V d^2(u, f) + lambda sum [ d^2 v - psi(v) ].

    Equals ``eval_J`` when v is the weight map of the current distances.
    """
    check_same_geometry(u, f)
    _check_mode(mode)
    _check_lambda(lam)
    v.check_consistent(u.shape, mode)
    data = 0.5 * _fsum(_data_sq(u, f))
    if mode == ANISOTROPIC:
        dh, dv = edge_distances(u)
        smooth = (_fsum(np.square(dh) * v.horizontal - penalty.psi(v.horizontal))
                  + _fsum(np.square(dv) * v.vertical - penalty.psi(v.vertical)))
    else:
        di2 = iso_sq_distance(u)
        smooth = _fsum(di2 * v.per_pixel - penalty.psi(v.per_pixel))
    return data + lam * smooth


def quadratic_part(u, f, v, lam, mode=ANISOTROPIC):
    """Augmented energy without the psi(v) constants (same minimizer in u;
    cheap enough for line searches)."""
    data = 0.5 * float(np.sum(_data_sq(u, f)))
    if mode == ANISOTROPIC:
        dh, dv = edge_distances(u)
        smooth = float(np.sum(np.square(dh) * v.horizontal)
                       + np.sum(np.square(dv) * v.vertical))
    else:
        smooth = float(np.sum(iso_sq_distance(u) * v.per_pixel))
    return data + lam * smooth


def psi_constant(v, lam, penalty):
    """The -lambda * sum psi(v) offset between quadratic_part and the
    augmented energy."""
    return -lam * math.fsum(_fsum(penalty.psi(a)) for a in v.arrays())


def weights_from_image(u, penalty, mode=ANISOTROPIC):
    """Optimal auxiliary weights for the current image: s(d_u).

    Anisotropic: per forward edge, s(d(u_i, u_j)); isotropic: per pixel,
    s(d_i) with d_i the root of the summed squared forward distances.
    Zero-distance edges get the limit value s(0).
    """
    _check_mode(mode)
    if mode == ANISOTROPIC:
        dh, dv = edge_distances(u)
        return WeightField(ANISOTROPIC,
                           horizontal=penalty.weight(dh),
                           vertical=penalty.weight(dv))
    di = np.sqrt(iso_sq_distance(u))
    return WeightField(ISOTROPIC, per_pixel=penalty.weight(di))


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def _log_or_cut_error(m, p, q, describe):
    try:
        return m.log(p, q)
    except CutLocusError as e:
        raise CutLocusError(describe(e.index), index=e.index) from None


def _edge_logs(u):
    """Logs along both orientations of every forward edge."""
    m = u.manifold
    px = u.pixels
    lh_fwd = _log_or_cut_error(
        m, px[:, :-1], px[:, 1:],
        lambda i: f"cut locus between pixels {i} and {(i[0], i[1] + 1)}")
    lh_bwd = _log_or_cut_error(
        m, px[:, 1:], px[:, :-1],
        lambda i: f"cut locus between pixels {(i[0], i[1] + 1)} and {i}")
    lv_fwd = _log_or_cut_error(
        m, px[:-1, :], px[1:, :],
        lambda i: f"cut locus between pixels {i} and {(i[0] + 1, i[1])}")
    lv_bwd = _log_or_cut_error(
        m, px[1:, :], px[:-1, :],
        lambda i: f"cut locus between pixels {(i[0] + 1, i[1])} and {i}")
    return lh_fwd, lh_bwd, lv_fwd, lv_bwd


def _expand(w, point_shape):
    return w.reshape(w.shape + (1,) * len(point_shape))


def grad_augmented(u, f, v, lam, mode=ANISOTROPIC):
    """Riemannian gradient of the augmented energy at fixed weights."""
    check_same_geometry(u, f)
    _check_mode(mode)
    _check_lambda(lam)
    v.check_consistent(u.shape, mode)
    m = u.manifold
    ps = m.point_shape
    g = np.zeros_like(u.pixels)

    known = f.mask.known
    if known.any():
        known_idx = np.argwhere(known)
        lf = _log_or_cut_error(
            m, u.pixels[known], f.pixels[known],
            lambda i: "cut locus between pixel "
                      f"{tuple(known_idx[i[0]])} and its datum")
        g[known] -= lf

    lh_fwd, lh_bwd, lv_fwd, lv_bwd = _edge_logs(u)
    if mode == ANISOTROPIC:
        wh = _expand(v.horizontal, ps)
        wv = _expand(v.vertical, ps)
        g[:, :-1] -= 2.0 * lam * wh * lh_fwd
        g[:, 1:] -= 2.0 * lam * wh * lh_bwd
        g[:-1, :] -= 2.0 * lam * wv * lv_fwd
        g[1:, :] -= 2.0 * lam * wv * lv_bwd
    else:
        # forward edges carry the pixel's own weight, backward edges the
        # weight of the neighbor whose forward edge they are
        w = v.per_pixel
        wh = _expand(w[:, :-1], ps)
        wv = _expand(w[:-1, :], ps)
        g[:, :-1] -= 2.0 * lam * wh * lh_fwd
        g[:, 1:] -= 2.0 * lam * wh * lh_bwd
        g[:-1, :] -= 2.0 * lam * wv * lv_fwd
        g[1:, :] -= 2.0 * lam * wv * lv_bwd
    return GradientField(u, g)


def grad_J1_direct(u, f, lam, penalty, mode=ANISOTROPIC):
    """Gradient of J_nu with weights recomputed from the current image.

    Deliberately implemented pixel by pixel over the grid neighborhoods
    (no shared code with :func:`grad_augmented`): the exact agreement of
    the two routes is a correctness cross-check.
    """
    from . import grid as gridmod

    check_same_geometry(u, f)
    _check_mode(mode)
    _check_lambda(lam)
    m = u.manifold
    rows, cols = u.shape
    g = np.zeros_like(u.pixels)
    known = f.mask.known

    if mode == ISOTROPIC:
        vmap = np.empty((rows, cols))
        for r in range(rows):
            for c in range(cols):
                sq = 0.0
                for (rr, cc) in gridmod.neighbors_plus((rows, cols), (r, c)):
                    sq += float(m.dist(u.pixels[r, c], u.pixels[rr, cc])) ** 2
                vmap[r, c] = float(penalty.weight(np.sqrt(sq)))

    for r in range(rows):
        for c in range(cols):
            acc = np.zeros(m.point_shape)
            if known[r, c]:
                acc -= m.log(u.pixels[r, c], f.pixels[r, c])
            if mode == ANISOTROPIC:
                for (rr, cc) in gridmod.neighbors((rows, cols), (r, c)):
                    d = float(m.dist(u.pixels[r, c], u.pixels[rr, cc]))
                    w = float(penalty.weight(d))
                    acc -= 2.0 * lam * w * m.log(u.pixels[r, c], u.pixels[rr, cc])
            else:
                for (rr, cc) in gridmod.neighbors_plus((rows, cols), (r, c)):
                    acc -= 2.0 * lam * vmap[r, c] * m.log(u.pixels[r, c], u.pixels[rr, cc])
                for (rr, cc) in gridmod.neighbors_minus((rows, cols), (r, c)):
                    acc -= 2.0 * lam * vmap[rr, cc] * m.log(u.pixels[r, c], u.pixels[rr, cc])
            g[r, c] = acc
    return GradientField(u, g)


# ---------------------------------------------------------------------------
# approximate Newton system
# ---------------------------------------------------------------------------


def hessian_diag(u, f_mask, v, lam, mode=ANISOTROPIC):
    """Per-pixel diagonal of the flat-case Hessian of the augmented energy:

    H_i = 1_V(i) + 2 lambda sum_{j in N(i)} w_ij.

    Exact diagonal for flat manifolds; a positive-definite surrogate in
    general (positive whenever the pixel is known or lambda > 0).
    """
    _check_mode(mode)
    v.check_consistent(u.shape, mode)
    h = f_mask.known.astype(float).copy()
    if mode == ANISOTROPIC:
        h[:, :-1] += 2.0 * lam * v.horizontal
        h[:, 1:] += 2.0 * lam * v.horizontal
        h[:-1, :] += 2.0 * lam * v.vertical
        h[1:, :] += 2.0 * lam * v.vertical
    else:
        w = v.per_pixel
        h[:, :-1] += 2.0 * lam * w[:, :-1]
        h[:, 1:] += 2.0 * lam * w[:, :-1]
        h[:-1, :] += 2.0 * lam * w[:-1, :]
        h[1:, :] += 2.0 * lam * w[:-1, :]
    return h


def apply_approx_hessian(u, f_mask, v, lam, mode, eta):
    """Apply the diagonal Hessian surrogate to a tangent field."""
    h = hessian_diag(u, f_mask, v, lam, mode)
    coeffs = _expand(h, u.manifold.point_shape) * eta.coeffs
    return GradientField(u, coeffs)
