"""Riemannian primitives for the supported manifolds.

Each manifold provides distance, exponential map, logarithm map and the
Riemannian inner product, all vectorized over arbitrary leading axes so
that whole images of points can be processed in one call.  Point storage
conventions (trailing axes):

========== ================= =====================================
manifold    point shape       convention
========== ================= =====================================
Euclidean   ``(n,)``          plain real vector
Circle      ``(1,)``          angle in [-pi, pi)
Sphere2     ``(3,)``          unit vector in R^3
Rotations3  ``(4,)``          unit quaternion (s, v), canonical sign
Spd         ``(r, r)``        symmetric positive definite matrix
========== ================= =====================================

Rotations are represented on the quaternion double cover: q and -q name
the same rotation, and the canonical representative has positive first
component (first nonzero vector component positive if the scalar part
vanishes).  Distances, exp and log are scaled so that ``norm(log(p, q))``
equals ``dist(p, q)`` -- the rotation-angle metric, d = 2 arccos|<q1,q2>|.
"""

from __future__ import annotations

import numpy as np

from .errors import CutLocusError, ValidationError

POINT_TOL = 1e-12
TANGENT_TOL = 1e-10

_TWO_PI = 2.0 * np.pi


def _wrap_angle(theta):
    """Wrap angles into [-pi, pi)."""
    return np.mod(theta + np.pi, _TWO_PI) - np.pi


def _first_bad_index(bad, batch_shape):
    """Index (tuple of ints) of the first True entry of a boolean array."""
    flat = np.flatnonzero(bad.reshape(-1))
    if flat.size == 0:
        return None
    if not batch_shape:
        return ()
    return tuple(int(k) for k in np.unravel_index(flat[0], batch_shape))


class Manifold:
    """Base class: vectorized geometry over trailing ``point_shape`` axes."""

    name: str
    point_shape: tuple
    ncomp: int  # components per pixel in serialized form

    # -- helpers ---------------------------------------------------------
    def _batch_shape(self, points):
        k = len(self.point_shape)
        return points.shape[:-k] if k else points.shape

    def zero_tangent(self, points):
        return np.zeros_like(points)

    def canonicalize(self, points):
        """Re-normalize a point array to the stored convention."""
        return points

    # -- contract --------------------------------------------------------
    def bad_points(self, points):
        """Boolean array marking entries that violate the point invariants."""
        raise NotImplementedError

    def validate_points(self, points, context="point"):
        """Raise ValidationError (naming the first offending index) if any
        entry violates the manifold's point invariants."""
        bad = self.bad_points(points)
        idx = _first_bad_index(bad, self._batch_shape(points))
        if idx is not None:
            raise ValidationError(
                f"invalid {self.name} {context} at index {idx}: {self._invariant_hint}")

    _invariant_hint = "point invariants violated"

    def dist(self, p, q):
        raise NotImplementedError

    def exp(self, p, v):
        raise NotImplementedError

    def log(self, p, q):
        raise NotImplementedError

    def inner(self, p, v, w):
        raise NotImplementedError

    def norm(self, p, v):
        return np.sqrt(np.maximum(self.inner(p, v, v), 0.0))

    def tangent_basis(self, p):
        """Orthonormal basis of T_p, stacked on a new leading axis
        (shape ``(dim,) + batch + point_shape``)."""
        raise NotImplementedError

    def origin(self):
        """A fixed valid point, used as placeholder for unknown pixels."""
        raise NotImplementedError

    def random_points(self, rng, size=()):
        raise NotImplementedError

    def random_tangents(self, rng, p, scale=1.0):
        """Gaussian tangent vectors: iid N(0, scale^2) coefficients in an
        orthonormal basis of T_p."""
        basis = self.tangent_basis(p)
        coeff_shape = (basis.shape[0],) + self._batch_shape(p)
        coeffs = rng.normal(0.0, scale, size=coeff_shape)
        coeffs = coeffs.reshape(coeffs.shape + (1,) * len(self.point_shape))
        return np.sum(coeffs * basis, axis=0)

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return type(self) is type(other) and self.point_shape == other.point_shape

    def __hash__(self):
        return hash((type(self).__name__, self.point_shape))


class Euclidean(Manifold):
    """Flat R^n.  Not part of the restoration models proper; it is the
    closed-form oracle (every curvature term vanishes, the solver reduces
    to a linear problem)."""

    def __init__(self, n=1):
        if n < 1:
            raise ValidationError("Euclidean dimension must be positive")
        self.n = int(n)
        self.name = f"euclidean({self.n})" if self.n != 1 else "euclidean"
        self.point_shape = (self.n,)
        self.ncomp = self.n

    _invariant_hint = "entries must be finite"

    def bad_points(self, points):
        return ~np.all(np.isfinite(points), axis=-1)

    def dist(self, p, q):
        return np.linalg.norm(q - p, axis=-1)

    def exp(self, p, v):
        return p + v

    def log(self, p, q):
        return q - p

    def inner(self, p, v, w):
        return np.sum(v * w, axis=-1)

    def tangent_basis(self, p):
        eye = np.eye(self.n)
        shape = (self.n,) + (1,) * len(self._batch_shape(p)) + (self.n,)
        return np.broadcast_to(eye.reshape(shape), (self.n,) + p.shape).copy()

    def origin(self):
        return np.zeros(self.n)

    def random_points(self, rng, size=()):
        return rng.normal(size=tuple(np.atleast_1d(size)) + (self.n,))


class Circle(Manifold):
    """S^1 stored as a scalar angle in [-pi, pi); distance is arc length."""

    name = "circle"
    point_shape = (1,)
    ncomp = 1

    _invariant_hint = "angle must lie in [-pi, pi)"

    def canonicalize(self, points):
        return _wrap_angle(points)

    def bad_points(self, points):
        theta = points[..., 0]
        return ~np.isfinite(theta) | (theta < -np.pi) | (theta >= np.pi)

    def dist(self, p, q):
        return np.abs(_wrap_angle(q - p))[..., 0]

    def exp(self, p, v):
        # exact-zero short circuit keeps exp(p, 0) == p bit for bit
        return np.where(v == 0.0, p, _wrap_angle(p + v))

    def log(self, p, q):
        return _wrap_angle(q - p)

    def inner(self, p, v, w):
        return (v * w)[..., 0]

    def tangent_basis(self, p):
        return np.ones((1,) + p.shape)

    def origin(self):
        return np.zeros(1)

    def random_points(self, rng, size=()):
        return rng.uniform(-np.pi, np.pi,
                           size=tuple(np.atleast_1d(size)) + (1,))


class Sphere2(Manifold):
    """The unit 2-sphere in R^3 with the round metric.

    d(x1, x2) = arccos <x1, x2>, and the geodesics are great circles:
    exp_x(v) = cos(|v|) x + sin(|v|) v/|v|.
    """

    name = "sphere2"
    point_shape = (3,)
    ncomp = 3

    _invariant_hint = f"vector must have unit norm within {POINT_TOL}"

    def canonicalize(self, points):
        nrm = np.linalg.norm(points, axis=-1, keepdims=True)
        return points / nrm

    def bad_points(self, points):
        nrm = np.linalg.norm(points, axis=-1)
        return ~np.isfinite(nrm) | (np.abs(nrm - 1.0) > POINT_TOL)

    @staticmethod
    def _angle(p, q):
        # 2*atan2(|q-p|/2, |q+p|/2): same angle as arccos<p,q> but exact
        # at coincident points and well conditioned over all of [0, pi]
        cm = np.linalg.norm(q - p, axis=-1)
        cp = np.linalg.norm(q + p, axis=-1)
        return 2.0 * np.arctan2(cm, cp)

    def dist(self, p, q):
        return self._angle(p, q)

    def exp(self, p, v):
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        small = nrm < 1e-300
        safe = np.where(small, 1.0, nrm)
        out = np.cos(nrm) * p + np.sin(nrm) * (v / safe)
        out = self.canonicalize(out)
        return np.where(small, p, out)

    def log(self, p, q):
        dot = np.sum(p * q, axis=-1, keepdims=True)
        bad = dot[..., 0] <= -1.0 + 1e-9
        idx = _first_bad_index(bad, self._batch_shape(p))
        if idx is not None:
            raise CutLocusError(
                f"log undefined: antipodal sphere2 points at index {idx}",
                index=idx)
        w = q - dot * p
        nw = np.linalg.norm(w, axis=-1, keepdims=True)
        theta = self._angle(p, q)[..., None]
        safe = np.where(nw < 1e-300, 1.0, nw)
        ratio = np.where(nw < 1e-300, np.where(theta == 0.0, 0.0, 1.0), theta / safe)
        return w * ratio

    def inner(self, p, v, w):
        return np.sum(v * w, axis=-1)

    def tangent_basis(self, p):
        # Pick the coordinate axis least aligned with p, project, normalize,
        # and complete with a cross product.
        k = np.argmin(np.abs(p), axis=-1)
        e = np.zeros_like(p)
        np.put_along_axis(e, k[..., None], 1.0, axis=-1)
        b1 = e - np.sum(e * p, axis=-1, keepdims=True) * p
        b1 = b1 / np.linalg.norm(b1, axis=-1, keepdims=True)
        b2 = np.cross(p, b1)
        return np.stack([b1, b2], axis=0)

    def origin(self):
        return np.array([0.0, 0.0, 1.0])

    def random_points(self, rng, size=()):
        x = rng.normal(size=tuple(np.atleast_1d(size)) + (3,))
        return x / np.linalg.norm(x, axis=-1, keepdims=True)


class Rotations3(Manifold):
    """SO(3) as the quaternion double cover S^3 / {±1}.

    Points are canonical-sign unit quaternions.  The metric is the
    rotation angle: d(q1, q2) = 2 arccos|<q1, q2>|, so log/exp carry the
    matching factor of two relative to the raw S^3 formulas.
    """

    name = "so3q"
    point_shape = (4,)
    ncomp = 4

    def canonicalize(self, points):
        q = points / np.linalg.norm(points, axis=-1, keepdims=True)
        # Sign of the first component whose magnitude exceeds the tolerance
        # (scalar part first, then vector components in order).
        sign = np.zeros(q.shape[:-1])
        for k in range(4):
            comp = q[..., k]
            take = (sign == 0) & (np.abs(comp) >= POINT_TOL)
            sign = np.where(take, np.sign(comp), sign)
        sign = np.where(sign == 0, 1.0, sign)
        return q * sign[..., None]

    _invariant_hint = "quaternion must be unit norm with canonical sign"

    def bad_points(self, points):
        nrm = np.linalg.norm(points, axis=-1)
        bad = ~np.isfinite(nrm) | (np.abs(nrm - 1.0) > POINT_TOL)
        canon = self.canonicalize(np.where(np.isfinite(points), points, 1.0))
        bad |= np.max(np.abs(points - canon), axis=-1) > POINT_TOL
        return bad

    @staticmethod
    def _half_angle(p, q):
        # arccos|<p,q>| via 2*atan2(min chord, max chord): exact zero for
        # q == +-p, well conditioned everywhere on [0, pi/2]
        cm = np.linalg.norm(q - p, axis=-1)
        cp = np.linalg.norm(q + p, axis=-1)
        return 2.0 * np.arctan2(np.minimum(cm, cp), np.maximum(cm, cp))

    def dist(self, p, q):
        return 2.0 * self._half_angle(p, q)

    def exp(self, p, v):
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        half = 0.5 * nrm
        small = nrm < 1e-300
        safe = np.where(small, 1.0, nrm)
        out = np.cos(half) * p + np.sin(half) * (v / safe)
        out = self.canonicalize(out)
        return np.where(small, p, out)

    def log(self, p, q):
        dot = np.sum(p * q, axis=-1, keepdims=True)
        bad = np.abs(dot[..., 0]) <= 1e-9
        idx = _first_bad_index(bad, self._batch_shape(p))
        if idx is not None:
            raise CutLocusError(
                f"log undefined: rotations at cut locus (angle pi) at index {idx}",
                index=idx)
        theta = self._half_angle(p, q)[..., None]
        w = q - dot * p
        nw = np.linalg.norm(w, axis=-1, keepdims=True)
        safe = np.where(nw < 1e-300, 1.0, nw)
        ratio = np.where(nw < 1e-300, np.where(theta == 0.0, 0.0, 1.0),
                         2.0 * theta / safe)
        return np.sign(dot) * w * ratio

    def inner(self, p, v, w):
        return np.sum(v * w, axis=-1)

    def tangent_basis(self, p):
        # Left-translates of the pure imaginary units: q ∘ e_k is an
        # orthonormal frame of the orthogonal complement of q in R^4.
        s, x, y, z = (p[..., k] for k in range(4))
        b1 = np.stack([-x, s, z, -y], axis=-1)
        b2 = np.stack([-y, -z, s, x], axis=-1)
        b3 = np.stack([-z, y, -x, s], axis=-1)
        return np.stack([b1, b2, b3], axis=0)

    def origin(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def random_points(self, rng, size=()):
        q = rng.normal(size=tuple(np.atleast_1d(size)) + (4,))
        return self.canonicalize(q)

    @staticmethod
    def rotate_vector(q, x):
        """Apply the rotation encoded by quaternion q to 3-vectors x."""
        s = q[..., :1]
        v = q[..., 1:]
        cross = np.cross(v, x)
        return x + 2.0 * (s * cross + np.cross(v, cross))

    @staticmethod
    def conjugate(q):
        out = q.copy()
        out[..., 1:] = -out[..., 1:]
        return out


def spd_exp_matrix(sym):
    """Matrix exponential of symmetric matrices via eigendecomposition.

    The defining power series is avoided on purpose: the log series only
    converges for spectral radius rho(I - x) < 1, which general SPD input
    does not satisfy.
    """
    sym = np.asarray(sym, dtype=float)
    _check_symmetric(sym, "symmetric matrix")
    w, vecs = np.linalg.eigh(sym)
    return _sym(np.einsum("...ik,...k,...jk->...ij", vecs, np.exp(w), vecs))


def spd_log_matrix(x):
    """Matrix logarithm of SPD matrices via eigendecomposition."""
    x = np.asarray(x, dtype=float)
    _check_symmetric(x, "SPD matrix")
    w, vecs = np.linalg.eigh(x)
    bad = w[..., 0] <= 0.0
    idx = _first_bad_index(bad, x.shape[:-2])
    if idx is not None:
        raise ValidationError(
            f"matrix not positive definite (eigenvalue <= 0) at index {idx}")
    return _sym(np.einsum("...ik,...k,...jk->...ij", vecs, np.log(w), vecs))


def _sym(x):
    return 0.5 * (x + np.swapaxes(x, -1, -2))


def _check_symmetric(x, what, tol=POINT_TOL):
    asym = np.max(np.abs(x - np.swapaxes(x, -1, -2)), axis=(-1, -2))
    idx = _first_bad_index(asym > tol, x.shape[:-2])
    if idx is not None:
        raise ValidationError(f"{what} not symmetric (tol {tol}) at index {idx}")


class Spd(Manifold):
    """Symmetric positive definite r x r matrices with the affine-invariant
    metric <v, w>_x = tr(v x^-1 w x^-1).

    d(x1, x2) = || Log(x1^-1/2 x2 x1^-1/2) ||_F and
    exp_x(v)  = x^1/2 Exp(x^-1/2 v x^-1/2) x^1/2.

    Internally the congruence x^(+-1/2) . x^(+-1/2) is replaced by the
    Cholesky factor L of x (any G with G G^T = x gives the same result,
    since Log/Exp commute with orthogonal conjugation), which needs one
    eigendecomposition per operation instead of two.
    """

    def __init__(self, r=3):
        if r < 1:
            raise ValidationError("SPD matrix dimension must be positive")
        self.r = int(r)
        self.name = f"spd({self.r})"
        self.point_shape = (self.r, self.r)
        self.ncomp = self.r * self.r

    _invariant_hint = "matrix must be symmetric positive definite"

    def canonicalize(self, points):
        return _sym(points)

    def bad_points(self, points):
        asym = np.max(np.abs(points - np.swapaxes(points, -1, -2)), axis=(-1, -2))
        bad = ~np.isfinite(asym) | (asym > POINT_TOL)
        safe = np.where(np.isfinite(points), points, 0.0)
        w = np.linalg.eigvalsh(_sym(safe))
        return bad | (w[..., 0] <= 0.0)

    def _chol(self, x, context):
        _check_symmetric(x, f"spd {context}")
        try:
            return np.linalg.cholesky(x)
        except np.linalg.LinAlgError:
            self.validate_points(x, context)  # names the offending index
            raise

    def _congruence_arg(self, p, q, context="point"):
        """L^-1 q L^-T (same spectrum as p^-1/2 q p^-1/2) and L."""
        chol = self._chol(p, context)
        a = np.linalg.solve(chol, q)
        m = np.swapaxes(np.linalg.solve(chol, np.swapaxes(a, -1, -2)), -1, -2)
        return _sym(m), chol

    def _check_pair(self, w, context="point pair"):
        bad = w[..., 0] <= 0.0
        idx = _first_bad_index(bad, w.shape[:-1])
        if idx is not None:
            raise ValidationError(
                f"spd {context} not positive definite at index {idx}")

    def dist(self, p, q):
        m, _ = self._congruence_arg(p, q)
        w = np.linalg.eigvalsh(m)
        self._check_pair(w)
        return np.linalg.norm(np.log(w), axis=-1)

    def exp(self, p, v):
        chol = self._chol(p, "point")
        a = np.linalg.solve(chol, v)
        inner = _sym(np.swapaxes(np.linalg.solve(chol, np.swapaxes(a, -1, -2)), -1, -2))
        w, vecs = np.linalg.eigh(inner)
        core = (vecs * np.exp(w)[..., None, :]) @ np.swapaxes(vecs, -1, -2)
        out = _sym(chol @ core @ np.swapaxes(chol, -1, -2))
        zero = np.all(v == 0.0, axis=(-1, -2))[..., None, None]
        return np.where(zero, p, out)

    def log(self, p, q):
        m, chol = self._congruence_arg(p, q)
        w, vecs = np.linalg.eigh(m)
        self._check_pair(w)
        core = (vecs * np.log(w)[..., None, :]) @ np.swapaxes(vecs, -1, -2)
        return _sym(chol @ core @ np.swapaxes(chol, -1, -2))

    def inner(self, p, v, w):
        chol = self._chol(p, "point")
        a = np.linalg.solve(chol, v)
        va = np.swapaxes(np.linalg.solve(chol, np.swapaxes(a, -1, -2)), -1, -2)
        a = np.linalg.solve(chol, w)
        wa = np.swapaxes(np.linalg.solve(chol, np.swapaxes(a, -1, -2)), -1, -2)
        return np.sum(va * wa, axis=(-1, -2))

    def tangent_basis(self, p):
        chol = self._chol(p, "point")
        cholT = np.swapaxes(chol, -1, -2)
        frames = []
        for i in range(self.r):
            for j in range(i, self.r):
                e = np.zeros((self.r, self.r))
                if i == j:
                    e[i, i] = 1.0
                else:
                    e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
                frames.append(_sym(chol @ e @ cholT))
        return np.stack(frames, axis=0)

    def origin(self):
        return np.eye(self.r)

    def random_points(self, rng, size=(), scale=0.5):
        shape = tuple(np.atleast_1d(size)) + (self.r, self.r)
        a = rng.normal(0.0, scale, size=shape)
        return spd_exp_matrix(_sym(a))


_BY_NAME = {
    "euclidean": Euclidean,
    "circle": Circle,
    "sphere2": Sphere2,
    "so3q": Rotations3,
    "spd": Spd,
}


def manifold_by_name(tag, dim=None):
    """Instantiate a manifold from its serialized tag.

    ``dim`` is the vector dimension for ``euclidean`` and the matrix size
    for ``spd``; it is ignored for the fixed-size manifolds.
    """
    if tag not in _BY_NAME:
        raise ValidationError(
            f"unknown manifold tag {tag!r} (expected one of {sorted(_BY_NAME)})")
    cls = _BY_NAME[tag]
    if cls is Euclidean:
        return cls(dim if dim is not None else 1)
    if cls is Spd:
        return cls(dim if dim is not None else 3)
    return cls()
