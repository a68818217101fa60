import numpy as np
import pytest
from dataclasses import replace

from mvir.energy import eval_augmented, weights_from_image
from mvir.errors import SolverError, ValidationError
from mvir.grid import Mask
from mvir.images import ManifoldImage, constant_image, random_image
from mvir.manifolds import Circle, Euclidean, Sphere2, Spd
from mvir.penalties import make_penalty
from mvir.solver import (ArmijoParams, SolverConfig, nearest_neighbor_fill,
                         run, u_update, v_update)

from conftest import ALL_MANIFOLDS, MANIFOLD_IDS


def _cfg(**kw):
    base = dict(lam=1.0, penalty=make_penalty("phi1", 0.3), mode="aniso",
                inner_method="newton", inner_steps=5, outer_tol=1e-8,
                outer_max_iters=200)
    base.update(kw)
    return SolverConfig(**base)


def _noisy(manifold, shape, rng, sigma=0.2, frac_known=1.0):
    clean = random_image(manifold, shape, rng)
    pixels = manifold.exp(clean.pixels, manifold.random_tangents(rng, clean.pixels, sigma))
    known = rng.random(shape) < frac_known
    known.flat[0] = True
    return ManifoldImage(manifold, pixels, Mask(known))


# ---------------------------------------------------------------------------
# v_update
# ---------------------------------------------------------------------------


def test_v_update_two_pixel_circle():
    pixels = np.array([[[0.0], [np.pi / 2]]])
    u = ManifoldImage(Circle(), pixels)
    v = v_update(u, _cfg(penalty=make_penalty("phi1", 0.1)))
    expected = 1.0 / np.sqrt((np.pi / 2) ** 2 + 0.01)
    assert v.horizontal[0, 0] == pytest.approx(expected, rel=1e-12)


def test_v_update_constant_image_hits_weight_at_zero():
    for pen in (make_penalty("phi1", 0.1), make_penalty("phi2", 0.5),
                make_penalty("phi3", 1.0)):
        u = constant_image(Sphere2(), (3, 3))
        v = v_update(u, _cfg(penalty=pen))
        assert np.allclose(v.horizontal, pen.weight_at_zero)
        assert np.allclose(v.vertical, pen.weight_at_zero)


def test_v_update_isotropic_corner_limit(rng):
    # last pixel has no forward neighbors: d_i = 0, weight s(0)
    pen = make_penalty("phi1", 0.2)
    u = random_image(Circle(), (3, 3), rng)
    v = v_update(u, _cfg(penalty=pen, mode="iso"))
    assert v.per_pixel[-1, -1] == pytest.approx(pen.weight_at_zero)


def test_weights_within_range_during_run(rng):
    f = _noisy(Circle(), (5, 5), rng)
    pen = make_penalty("phi3", 1.2)
    res = run(f, _cfg(penalty=pen, lam=0.5, outer_max_iters=30, outer_tol=0.0))
    for lo, hi in res.v_trace:
        assert lo > 0
        assert hi <= pen.weight_at_zero + 1e-15


# ---------------------------------------------------------------------------
# u_update
# ---------------------------------------------------------------------------


def test_u_update_zero_gradient_returns_input():
    u = constant_image(Circle(), (3, 3))
    cfg = _cfg()
    v = v_update(u, cfg)
    out = u_update(u, u, v, cfg)
    assert np.array_equal(out.pixels, u.pixels)


@pytest.mark.parametrize("manifold", ALL_MANIFOLDS, ids=MANIFOLD_IDS)
@pytest.mark.parametrize("inner", ["gd", "newton"])
def test_u_update_never_increases_augmented(manifold, inner, rng):
    for _ in range(3):
        f = _noisy(manifold, (4, 4), rng, frac_known=0.8)
        u = nearest_neighbor_fill(f)
        cfg = _cfg(inner_method=inner, lam=0.7)
        v = v_update(u, cfg)
        before = eval_augmented(u, f, v, cfg.lam, cfg.penalty, cfg.mode)
        out = u_update(u, f, v, cfg)
        after = eval_augmented(out, f, v, cfg.lam, cfg.penalty, cfg.mode)
        assert after <= before + 1e-12


def test_newton_one_step_exact_for_pure_data_term(rng):
    # lambda -> 0 and full mask: the subproblem is the decoupled quadratic
    # 1/2 d^2(u, f); one diagonal Newton step lands on the minimizer u = f
    m = Euclidean(2)
    f = random_image(m, (4, 4), rng)
    u0 = random_image(m, (4, 4), rng)
    cfg = _cfg(lam=1e-300, inner_steps=1, penalty=make_penalty("phi2", 1e6))
    v = v_update(u0, cfg)
    out = u_update(u0, f, v, cfg)
    assert np.max(np.abs(out.pixels - f.pixels)) < 1e-10


def test_armijo_exhaustion_raises_with_diagnostics(rng):
    f = _noisy(Circle(), (3, 3), rng)
    u = nearest_neighbor_fill(f)
    cfg = _cfg(armijo=ArmijoParams(max_backtracks=0))
    v = v_update(u, cfg)
    with pytest.raises(SolverError) as exc:
        u_update(u, f, v, cfg)
    assert "gradient_norm" in exc.value.diagnostics


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def test_constant_data_is_fixed_point():
    f = constant_image(Sphere2(), (4, 4))
    res = run(f, _cfg(lam=2.0))
    assert res.termination == "tolerance"
    assert res.outer_iters == 1
    assert np.max(f.manifold.dist(res.restored.pixels, f.pixels)) == 0.0


def test_flat_solver_matches_linear_system(rng):
    n = 41
    m = Euclidean(1)
    f = ManifoldImage(m, rng.normal(size=(1, n, 1)))
    lam = 1.0
    res = run(f, _cfg(lam=lam, penalty=make_penalty("phi2", 1e6),
                      outer_tol=1e-13, outer_max_iters=2000))
    lap = np.zeros((n, n))
    for i in range(n):
        for j in ((i - 1), (i + 1)):
            if 0 <= j < n:
                lap[i, i] += 1; lap[i, j] -= 1
    u_star = np.linalg.solve(np.eye(n) + 2 * lam * lap, f.pixels[0, :, 0])
    assert np.max(np.abs(res.restored.pixels[0, :, 0] - u_star)) < 1e-8


@pytest.mark.parametrize("manifold", ALL_MANIFOLDS, ids=MANIFOLD_IDS)
@pytest.mark.parametrize("mode", ["aniso", "iso"])
def test_descent_chain_monotone(manifold, mode, rng):
    f = _noisy(manifold, (4, 4), rng, frac_known=0.75)
    res = run(f, _cfg(mode=mode, lam=0.6, outer_max_iters=40, outer_tol=0.0))
    chain = np.asarray(res.energy_chain)
    assert np.all(np.diff(chain) <= 1e-12)
    assert res.monotone
    trace = np.asarray([j for _, j in res.energy_trace])
    assert np.all(np.diff(trace) <= 1e-12)
    assert np.all(trace >= 0.0)


def test_energy_trace_indices_and_lengths(rng):
    f = _noisy(Circle(), (3, 3), rng)
    res = run(f, _cfg(outer_max_iters=10, outer_tol=0.0))
    ks = [k for k, _ in res.energy_trace]
    assert ks == list(range(11))
    assert res.outer_iters == 10
    assert res.termination == "max_iters"
    assert len(res.v_trace) == 11
    assert len(res.energy_chain) == 2 * 10 + 1


def test_provided_initialization(rng):
    f = _noisy(Circle(), (3, 3), rng)
    init = constant_image(Circle(), (3, 3))
    res = run(f, _cfg(init=init, outer_max_iters=5, outer_tol=0.0))
    assert res.outer_iters == 5
    with pytest.raises(ValidationError):
        run(f, _cfg(init=constant_image(Circle(), (2, 2))))
    with pytest.raises(ValidationError):
        run(f, _cfg(init="warp"))


def test_gradient_descent_one_step_matches_direct_gradient_flow(rng):
    # R = 1 with gradient descent is plain reweighted gradient descent on J
    f = _noisy(Circle(), (4, 4), rng)
    res = run(f, _cfg(inner_method="gd", inner_steps=1, outer_max_iters=50,
                      outer_tol=0.0, lam=0.4))
    assert res.monotone


def test_fixed_point_has_small_direct_gradient(rng):
    # at convergence the reweighted fixed point is a critical point of J
    from mvir.energy import grad_J1_direct
    m = Spd(3)
    f = _noisy(m, (4, 4), rng, sigma=0.3)
    tol = 1e-9
    pen = make_penalty("phi1", 1.0)
    res = run(f, _cfg(lam=0.3, penalty=pen, outer_tol=tol, outer_max_iters=3000))
    assert res.termination == "tolerance"
    g = grad_J1_direct(res.restored, f, 0.3, pen, "aniso")
    assert g.norm() < 10 * tol


def test_nearest_neighbor_fill_chebyshev_row_major(rng):
    m = Euclidean(1)
    pixels = np.arange(12, dtype=float).reshape(3, 4, 1)
    known = np.zeros((3, 4), dtype=bool)
    known[0, 0] = known[2, 3] = True
    f = ManifoldImage(m, pixels, Mask(known))
    filled = nearest_neighbor_fill(f)
    # (0,1): chebyshev 1 from (0,0), 3 from (2,3)
    assert filled.pixels[0, 1, 0] == 0.0
    # (1, 2): chebyshev 2 from both -> row-major tie-break picks (0,0)
    assert filled.pixels[1, 2, 0] == 0.0
    # (2, 2): distance 1 from (2,3), 2 from (0,0)
    assert filled.pixels[2, 2, 0] == 11.0
    assert filled.mask.known.all()


def test_double_initialization_agreement_small_spd(rng):
    f = _noisy(Spd(3), (4, 4), rng, sigma=0.4)
    base = _cfg(lam=1.0, outer_tol=1e-12, outer_max_iters=2000)
    r1 = run(f, replace(base, init=random_image(Spd(3), (4, 4), np.random.default_rng(1))))
    r2 = run(f, replace(base, init=random_image(Spd(3), (4, 4), np.random.default_rng(2))))
    d = float(np.mean(Spd(3).dist(r1.restored.pixels, r2.restored.pixels)))
    assert d < 1e-6


def test_solver_config_validation():
    with pytest.raises(ValidationError):
        _cfg(lam=0.0)
    with pytest.raises(ValidationError):
        _cfg(mode="diagonal")
    with pytest.raises(ValidationError):
        _cfg(inner_method="bfgs")
    with pytest.raises(ValidationError):
        _cfg(inner_steps=0)
    with pytest.raises(ValidationError):
        _cfg(outer_tol=-1.0)
    with pytest.raises(ValidationError):
        SolverConfig(lam=1.0, penalty="phi1")
