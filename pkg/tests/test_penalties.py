import numpy as np
import pytest

from mvir.errors import ValidationError
from mvir.penalties import (Additive, Multiplicative, c_transform_check,
                            conjugate_bruteforce, make_penalty)

PENALTIES = [make_penalty("phi1", 0.1), make_penalty("phi2", 0.5),
             make_penalty("phi3", 1.0)]
IDS = [p.kind for p in PENALTIES]


# ---------------------------------------------------------------------------
# pinned values
# ---------------------------------------------------------------------------


def test_phi_values():
    assert make_penalty("phi1", 0.1).phi(0.0) == pytest.approx(0.1)
    assert make_penalty("phi2", 0.5).phi(1.0) == pytest.approx(0.375)
    assert make_penalty("phi3", 1.0).phi(0.0) == 0.0


def test_weight_values():
    assert make_penalty("phi1", 0.1).weight(0.0) == pytest.approx(10.0)
    assert make_penalty("phi2", 0.5).weight(1.0) == pytest.approx(0.5)
    assert make_penalty("phi3", 1.0).weight(0.0) == pytest.approx(1.0)


def test_curvature_at_zero_values():
    assert make_penalty("phi1", 0.1).curvature_at_zero == pytest.approx(10.0)
    assert make_penalty("phi2", 0.5).curvature_at_zero == pytest.approx(1.0)
    assert make_penalty("phi3", 1.0).curvature_at_zero == pytest.approx(2.0)


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_curvature_matches_numeric_limit(penalty):
    t = 1e-7
    limit = float(penalty.dphi(t)) / t
    assert limit == pytest.approx(penalty.curvature_at_zero, abs=1e-6)


# ---------------------------------------------------------------------------
# structural properties
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_phi_even_nonnegative_differentiable(penalty):
    t = np.linspace(-8, 8, 1601)
    vals = penalty.phi(t)
    assert np.all(vals >= 0)
    assert np.allclose(vals, penalty.phi(-t))
    # C^1: derivative continuous (finite differences track dphi)
    h = 1e-7
    fd = (penalty.phi(t + h) - penalty.phi(t - h)) / (2 * h)
    assert np.max(np.abs(fd - penalty.dphi(t))) < 1e-5


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_weight_positive_nonincreasing_bounded(penalty):
    t = np.linspace(0.0, 12.0, 2000)
    w = penalty.weight(t)
    assert np.all(w > 0)
    assert np.all(np.diff(w) <= 1e-15)
    assert np.all(w <= penalty.weight_at_zero + 1e-15)


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_weight_continuous(penalty):
    # includes the Huber branch point t = eps
    for t in (0.3, 0.5, 1.0, penalty.eps):
        lo = penalty.weight(max(t - 1e-9, 0.0))
        hi = penalty.weight(t + 1e-9)
        assert abs(lo - hi) < 1e-8


def test_weight_rejects_negative_argument():
    with pytest.raises(ValidationError):
        make_penalty("phi1", 0.1).weight(-0.5)


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_phi_of_sqrt_concave(penalty):
    # common requirement for the multiplicative reformulation
    if penalty.kind == "phi3":
        pytest.skip("tested for the convex penalties")
    r = np.linspace(1e-6, 25.0, 2001)
    vals = penalty.phi(np.sqrt(r))
    second = np.diff(vals, 2)
    assert np.all(second <= 1e-10)


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_growth_condition(penalty):
    assert float(penalty.phi(1e6)) / 1e12 < 1e-4


@pytest.mark.parametrize("penalty", PENALTIES, ids=IDS)
def test_young_type_inequality(penalty):
    mult = Multiplicative()
    rng = np.random.default_rng(3)
    for t in rng.uniform(0, 4, 12):
        s_star = float(mult.minimizer_s(penalty, t))
        psi_star = conjugate_bruteforce(penalty, mult, s_star)
        assert penalty.phi(t) + psi_star <= mult.c(t, s_star) + 1e-6
        assert abs(penalty.phi(t) + psi_star - mult.c(t, s_star)) < 1e-6
        for s in rng.uniform(0.01, 1.0, 4) * penalty.curvature_at_zero / 2:
            psi_s = conjugate_bruteforce(penalty, mult, float(s))
            assert penalty.phi(t) + psi_s <= mult.c(t, s) + 1e-6


# ---------------------------------------------------------------------------
# conjugate offsets (closed form vs brute force)
# ---------------------------------------------------------------------------


class _ScaledPhi:
    """Brute-force view of the weight-matched penalty."""

    def __init__(self, penalty):
        self._p = penalty

    def phi(self, t):
        return self._p.effective_phi(t)


@pytest.mark.parametrize("penalty", [make_penalty("phi1", 0.1),
                                     make_penalty("phi2", 0.5),
                                     make_penalty("phi3", 1.0),
                                     make_penalty("phi1", 1e-3),
                                     make_penalty("phi2", 2.0)],
                         ids=["phi1", "phi2", "phi3", "phi1-small", "phi2-big"])
def test_psi_closed_form_matches_bruteforce(penalty):
    mult = Multiplicative()
    s0 = penalty.weight_at_zero
    for s in np.linspace(0.02 * s0, 1.2 * s0, 17):
        brute = conjugate_bruteforce(_ScaledPhi(penalty), mult, float(s),
                                     t_hi=max(100.0, 5.0 / float(s)))
        assert abs(float(penalty.psi(s)) - brute) < 1e-9


def test_psi_rejects_nonpositive_weights():
    with pytest.raises(ValidationError):
        make_penalty("phi1", 0.1).psi(0.0)


def test_weight_scale_values():
    assert make_penalty("phi1", 0.1).weight_scale == pytest.approx(2.0)
    assert make_penalty("phi2", 0.5).weight_scale == pytest.approx(2.0)
    assert make_penalty("phi3", 1.0).weight_scale == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# duality oracle
# ---------------------------------------------------------------------------


def test_c_transform_phi1_multiplicative_single_point():
    rep = c_transform_check(make_penalty("phi1", 0.1), Multiplicative(), [1.0])
    assert rep.passed
    assert rep.max_residual < 1e-6


def test_c_transform_phi2_additive_at_zero():
    rep = c_transform_check(make_penalty("phi2", 0.5), Additive(2.0), [0.0])
    assert rep.passed
    assert rep.entries[0].s == pytest.approx(0.0)  # s(0) = a*0 - phi'(0)


def test_c_transform_phi3_at_zero_minimizer():
    penalty = make_penalty("phi3", 1.0)
    rep = c_transform_check(penalty, Multiplicative(), [0.0])
    assert rep.passed
    assert rep.entries[0].s == pytest.approx(penalty.curvature_at_zero / 2)
    assert rep.entries[0].s == pytest.approx(1.0)  # eps^2


def test_additive_existence_precondition():
    huge_quadratic = make_penalty("phi2", 1e7)  # phi(1e6)/1e12 = 0.5 at this eps
    with pytest.raises(ValidationError):
        c_transform_check(huge_quadratic, Additive(0.5), [0.0, 1.0])


def test_additive_rejects_bad_parameter():
    with pytest.raises(ValidationError):
        Additive(-1.0)


def test_penalty_constructor_validation():
    with pytest.raises(ValidationError):
        make_penalty("phi1", 0.0)
    with pytest.raises(ValidationError):
        make_penalty("phi9", 1.0)
