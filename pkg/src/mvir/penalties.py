"""Edge-preserving penalty functions and their half-quadratic machinery.

Three penalties are provided (all even, C^1, with positive curvature at
zero), each exposing the function phi, its derivative, and the weight
map s(t) used to reweight squared distances:

============ ======================= ==========================
kind          phi(t)                  weight s(t)
============ ======================= ==========================
``sqrt_eps``  sqrt(t^2 + eps^2)       1 / sqrt(t^2 + eps^2)
``huber``     t^2/2 (t < eps),        1 (t < eps),
              eps|t| - eps^2/2        eps / |t|
``exp_neg``   1 - exp(-eps^2 t^2)     eps^2 exp(-eps^2 t^2)
============ ======================= ==========================

The weight map is the minimizer of the coupled problem
``inf_s { t^2 s - Phi(t) }`` for the penalty ``Phi = weight_scale * phi``
(``weight_scale`` is 2 for sqrt_eps/huber and 1 for exp_neg; the weight
columns above absorb the scale).  Energies that pair ``lambda * s * d^2``
with these weights therefore regularize with ``effective_phi``, and the
conjugate offset ``psi`` below is the exact c-transform of that scaled
penalty, so the augmented energy evaluated at s(d) reproduces the plain
energy identically.

``c_transform_check`` is an independent numeric oracle: it verifies the
conjugate duality (for both the multiplicative coupling c(t,s) = t^2 s
and the additive one) by brute-force 1-D infima, sharing no code with
the closed-form paths above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ValidationError


class Penalty:
    """Common surface of the penalty functions.

    ``phi``/``dphi`` use the even extension (phi(-t) = phi(t)); ``weight``
    is defined for t >= 0 only and rejects negative arguments.
    """

    kind: str

    def phi(self, t):
        raise NotImplementedError

    def dphi(self, t):
        raise NotImplementedError

    def weight(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValidationError("weight map is defined for t >= 0 only")
        return self._weight(t)

    def _weight(self, t):
        raise NotImplementedError

    @property
    def weight_at_zero(self):
        """s(0), the largest value the weight map attains."""
        return float(self.weight(0.0))

    @property
    def curvature_at_zero(self):
        """phi''(0+) = lim phi'(t)/t as t -> 0+."""
        raise NotImplementedError

    @property
    def weight_scale(self):
        """Scale c with weight(t) = c * phi'(t) / (2t)."""
        return 2.0 * self.weight_at_zero / self.curvature_at_zero

    def effective_phi(self, t):
        """The penalty whose half-quadratic weight map is ``weight``.

        Energies pairing ``weight * d^2`` terms must use this scaling so
        that the augmented and plain functionals agree at optimal weights.
        """
        return self.weight_scale * self.phi(t)

    def psi(self, s):
        """Conjugate offset: psi(s) = inf_t { t^2 s - effective_phi(t) }.

        Closed form per penalty; validated against the brute-force oracle
        in the test suite.  Defined for s > 0.
        """
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            raise ValidationError("conjugate offset needs positive weights")
        return self._psi(s)

    def _psi(self, s):
        raise NotImplementedError

    @property
    def is_convex(self):
        return True

    @property
    def is_strictly_convex(self):
        return False

    def __repr__(self):
        return f"{self.kind}(eps={self.eps})"


def _check_eps(eps):
    if not np.isfinite(eps) or eps <= 0:
        raise ValidationError(f"penalty parameter eps must be positive, got {eps}")
    return float(eps)


@dataclass(frozen=True, repr=False)
class SqrtEps(Penalty):
    """Smoothed absolute value sqrt(t^2 + eps^2) (strictly convex)."""

    eps: float
    kind: str = field(default="phi1", init=False)

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))

    def phi(self, t):
        return np.sqrt(np.square(t) + self.eps ** 2)

    def dphi(self, t):
        return np.asarray(t) / self.phi(t)

    def _weight(self, t):
        return 1.0 / np.sqrt(np.square(t) + self.eps ** 2)

    @property
    def curvature_at_zero(self):
        return 1.0 / self.eps

    @property
    def is_strictly_convex(self):
        return True

    def _psi(self, s):
        return np.where(s >= 1.0 / self.eps,
                        -2.0 * self.eps,
                        -(1.0 / s + self.eps ** 2 * s))


@dataclass(frozen=True, repr=False)
class Huber(Penalty):
    """Huber function: quadratic below eps, linear above."""

    eps: float
    kind: str = field(default="phi2", init=False)

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))

    def phi(self, t):
        a = np.abs(t)
        return np.where(a < self.eps,
                        0.5 * np.square(a),
                        self.eps * a - 0.5 * self.eps ** 2)

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(np.abs(t) < self.eps, t, self.eps * np.sign(t))

    def _weight(self, t):
        return np.where(t < self.eps, 1.0, self.eps / np.maximum(t, self.eps))

    @property
    def curvature_at_zero(self):
        return 1.0

    def _psi(self, s):
        return np.where(s >= 1.0, 0.0, self.eps ** 2 * (1.0 - 1.0 / s))


@dataclass(frozen=True, repr=False)
class ExpNeg(Penalty):
    """Bounded penalty 1 - exp(-eps^2 t^2) (nonconvex; descent-only
    guarantees, but accepted by the solver)."""

    eps: float
    kind: str = field(default="phi3", init=False)

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))

    def phi(self, t):
        return 1.0 - np.exp(-self.eps ** 2 * np.square(t))

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        return 2.0 * self.eps ** 2 * t * np.exp(-self.eps ** 2 * np.square(t))

    def _weight(self, t):
        return self.eps ** 2 * np.exp(-self.eps ** 2 * np.square(t))

    @property
    def curvature_at_zero(self):
        return 2.0 * self.eps ** 2

    @property
    def is_convex(self):
        return False

    def _psi(self, s):
        e2 = self.eps ** 2
        inside = np.minimum(s, e2)
        val = -s * np.log(inside / e2) / e2 - 1.0 + inside / e2
        return np.where(s >= e2, 0.0, val)


_PENALTIES = {"phi1": SqrtEps, "phi2": Huber, "phi3": ExpNeg}


def make_penalty(kind, eps):
    if kind not in _PENALTIES:
        raise ValidationError(
            f"unknown penalty {kind!r} (expected one of {sorted(_PENALTIES)})")
    return _PENALTIES[kind](eps)


# ---------------------------------------------------------------------------
# Couplings and the numeric duality oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Multiplicative:
    """Coupling c(t, s) = t^2 s."""

    def c(self, t, s):
        return np.square(t) * s

    def minimizer_s(self, penalty, t):
        """Optimal auxiliary weight: phi'(t)/(2t), with the limit
        phi''(0+)/2 at t = 0."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = penalty.dphi(t) / (2.0 * t)
        return np.where(t == 0.0, 0.5 * penalty.curvature_at_zero, s)

    def check_admissible(self, penalty):
        return None


@dataclass(frozen=True)
class Additive:
    """Coupling c(t, s) = (sqrt(a) t - s/sqrt(a))^2 / 2.

    Verified by the duality oracle only; the solver rejects it because
    the reformulated smoothness term d^2 + s d is not differentiable.
    """

    a: float

    def __post_init__(self):
        if not np.isfinite(self.a) or self.a <= 0:
            raise ValidationError(f"additive parameter a must be positive, got {self.a}")

    def c(self, t, s):
        ra = np.sqrt(self.a)
        return 0.5 * np.square(ra * t - s / ra)

    def minimizer_s(self, penalty, t):
        return self.a * np.asarray(t, dtype=float) - penalty.dphi(t)

    def check_admissible(self, penalty):
        # growth condition lim phi(t)/t^2 < a/2, probed at t = 1e6
        t = 1e6
        growth = float(penalty.phi(t)) / t ** 2
        if not growth < 0.5 * self.a:
            raise ValidationError(
                f"additive coupling inadmissible: phi(t)/t^2 = {growth:.3e} "
                f"at t = 1e6 is not below a/2 = {0.5 * self.a:.3e}")


def _brute_min(f, lo, hi, n=4001):
    """Global-ish minimum of a scalar function: dense grid + bounded refine."""
    grid = np.linspace(lo, hi, n)
    vals = f(grid)
    k = int(np.argmin(vals))
    a = grid[max(k - 2, 0)]
    b = grid[min(k + 2, n - 1)]
    res = optimize.minimize_scalar(lambda x: float(f(np.asarray(x))),
                                   bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12})
    return min(float(vals[k]), float(res.fun))


def conjugate_bruteforce(penalty, coupling, s, t_hi=100.0):
    """psi(s) = inf_t { c(t, s) - phi(t) } by dense bracketed search.

    Independent of the closed-form ``Penalty.psi`` (which besides uses the
    scaled penalty); this is the oracle side of the duality check.
    """
    return _brute_min(lambda t: coupling.c(t, s) - penalty.phi(t), 0.0, t_hi)


@dataclass
class CTransformEntry:
    t: float
    s: float
    primal_residual: float
    dual_residual: float


@dataclass
class CTransformReport:
    penalty: Penalty
    coupling: object
    entries: list
    tolerance: float = 1e-6

    @property
    def max_residual(self):
        return max(max(e.primal_residual, e.dual_residual) for e in self.entries)

    @property
    def passed(self):
        return self.max_residual < self.tolerance


def c_transform_check(penalty, coupling, t_grid):
    """Certify conjugate duality of a penalty under a coupling.

    For each t in the grid: computes the optimal weight s(t), evaluates
    psi(s(t)) by brute-force search, and reports the primal residual
    |phi(t) + psi(s(t)) - c(t, s(t))|; then recovers phi(t) as
    inf_s { c(t, s) - psi(s) } (again by search) and reports the dual
    residual.  Passes iff all residuals are below 1e-6.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(t_grid < 0) or not np.all(np.isfinite(t_grid)):
        raise ValidationError("t_grid must be a finite, nonnegative 1-D grid")
    coupling.check_admissible(penalty)

    s_opt = np.asarray(coupling.minimizer_s(penalty, t_grid), dtype=float)
    if isinstance(coupling, Multiplicative):
        s_lo = 0.5 * float(np.min(s_opt))
        s_hi = 0.5 * penalty.curvature_at_zero
    else:
        s_lo = float(np.min(s_opt)) - 1.0
        s_hi = float(np.max(s_opt)) + 1.0

    # the conjugate on the s-scan grid does not depend on t: compute once
    s_grid = np.linspace(s_lo, s_hi, 201)
    psi_grid = np.array([conjugate_bruteforce(penalty, coupling, si) for si in s_grid])

    entries = []
    for t, s_t in zip(t_grid, s_opt):
        phi_t = float(penalty.phi(t))
        psi_t = conjugate_bruteforce(penalty, coupling, s_t)
        primal = abs(phi_t + psi_t - float(coupling.c(t, s_t)))

        def dual_obj(s, t=t):
            return float(coupling.c(t, s) - conjugate_bruteforce(penalty, coupling, s))

        # coarse scan over weights, then bounded refinement
        dual_vals = coupling.c(t, s_grid) - psi_grid
        k = int(np.argmin(dual_vals))
        a, b = s_grid[max(k - 2, 0)], s_grid[min(k + 2, len(s_grid) - 1)]
        res = optimize.minimize_scalar(dual_obj, bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-12})
        dual_inf = min(float(np.min(dual_vals)), float(res.fun))
        dual = abs(phi_t - dual_inf)
        entries.append(CTransformEntry(float(t), float(s_t), primal, dual))
    return CTransformReport(penalty, coupling, entries)
