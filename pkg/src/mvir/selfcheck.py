"""Self-contained numeric oracle suites, runnable from the CLI.

Three suites, one pass/fail line each:

* c-transform duality residuals for every penalty (multiplicative) and
  the Huber penalty under the additive coupling,
* exp/log round trips, norm/distance agreement and the quaternion
  double cover on seeded random samples,
* central finite-difference checks of both gradient routes.
"""

from __future__ import annotations

import numpy as np

from .energy import (eval_J, eval_augmented, field_inner, grad_augmented,
                     grad_J1_direct, weights_from_image)
from .grid import Mask
from .images import ManifoldImage, random_image
from .manifolds import Circle, Euclidean, Rotations3, Spd, Sphere2
from .penalties import Additive, Multiplicative, c_transform_check, make_penalty

ALL_MANIFOLDS = (Euclidean(2), Circle(), Sphere2(), Rotations3(), Spd(3))


def check_c_transform(fast=False):
    grid = np.arange(0.0, 5.01, 0.5 if fast else 0.1)
    worst = 0.0
    for penalty in (make_penalty("phi1", 0.1), make_penalty("phi2", 0.5),
                    make_penalty("phi3", 1.0)):
        worst = max(worst, c_transform_check(penalty, Multiplicative(), grid).max_residual)
    worst = max(worst, c_transform_check(make_penalty("phi2", 0.5),
                                         Additive(2.0), grid).max_residual)
    return worst < 1e-6, f"max residual {worst:.3e}"


def check_round_trips(fast=False, n=None, tol=1e-9):
    n = n or (100 if fast else 1000)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for m in ALL_MANIFOLDS:
        p = m.random_points(rng, (n,))
        v = m.random_tangents(rng, p, 0.4)
        nv = m.norm(p, v)
        v *= (rng.uniform(0.05, 1.0, n) / np.maximum(nv, 1e-300)
              ).reshape((n,) + (1,) * len(m.point_shape))
        q = m.exp(p, v)
        worst = max(worst, float(np.max(np.abs(m.log(p, q) - v))))
        worst = max(worst, float(np.max(np.abs(m.norm(p, m.log(p, q)) - m.dist(p, q)))))
    so3 = Rotations3()
    p = so3.random_points(rng, (n,))
    worst = max(worst, float(np.max(so3.dist(p, so3.canonicalize(-p)))))
    return worst < tol, f"max deviation {worst:.3e}"


def check_gradients(fast=False, tol=1e-5):
    rng = np.random.default_rng(7)
    reps = 1 if fast else 3
    h = 1e-6
    worst = 0.0
    penalty = make_penalty("phi1", 0.2)
    for m in ALL_MANIFOLDS:
        for mode in ("aniso", "iso"):
            for _ in range(reps):
                u = random_image(m, (3, 4), rng)
                f = ManifoldImage(
                    m, m.exp(u.pixels, m.random_tangents(rng, u.pixels, 0.15)),
                    Mask(rng.random((3, 4)) < 0.8))
                lam = 0.8
                v = weights_from_image(u, penalty, mode)
                eta = m.random_tangents(rng, u.pixels, 1.0)
                for grad, energy in (
                        (grad_augmented(u, f, v, lam, mode),
                         lambda img: eval_augmented(img, f, v, lam, penalty, mode)),
                        (grad_J1_direct(u, f, lam, penalty, mode),
                         lambda img: eval_J(img, f, lam, penalty, mode))):
                    up = ManifoldImage(m, m.exp(u.pixels, h * eta), u.mask)
                    dn = ManifoldImage(m, m.exp(u.pixels, -h * eta), u.mask)
                    fd = (energy(up) - energy(dn)) / (2.0 * h)
                    an = field_inner(u, grad.coeffs, eta)
                    worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-8))
    return worst < tol, f"worst relative error {worst:.3e}"


def run_selfcheck(fast=False):
    checks = [
        ("c-transform duality", check_c_transform),
        ("exp/log round trips", check_round_trips),
        ("gradient finite differences", check_gradients),
    ]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn(fast=fast)
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all_ok
