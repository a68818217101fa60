import numpy as np
import pytest

from mvir.errors import ValidationError
from mvir.manifolds import Circle, Rotations3, Spd, Sphere2
from mvir.synth import (NoiseSpec, TANGENT_GAUSSIAN, WRAPPED_GAUSSIAN,
                        add_noise, add_rgb_noise, atan2_image, block_mask,
                        cb_decompose, cb_recompose, center_block_mask,
                        disc_mask, err_metric, psnr, random_mask,
                        so3_grain_image, sphere_field, spd_jump_image,
                        spiral_signal, synthetic_rgb)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def test_spiral_signal_pinned_values():
    sig = spiral_signal(101)
    assert sig.shape == (1, 101)
    assert sig.pixels[0, 0, 0] == 0.0
    # x = 0.25: 8*pi*x^2 = pi/2, no wrap
    assert sig.pixels[0, 25, 0] == pytest.approx(np.pi / 2, abs=1e-12)
    # x = 0.5: exactly 2*pi, wraps to 0
    assert sig.pixels[0, 50, 0] == pytest.approx(0.0, abs=1e-12)
    sig.validate()


def test_atan2_image_pinned_values():
    img = atan2_image(129)
    assert img.shape == (129, 129)
    img.validate()
    # coordinates (c1, c2) = (0.5, 0) -> atan2(0, 0.5) = 0
    assert img.pixels[128, 64, 0] == 0.0
    # (0, 0.5) -> pi/2
    assert img.pixels[64, 128, 0] == pytest.approx(np.pi / 2)
    # (-0.5, 0) -> pi, wrapped to -pi
    assert img.pixels[0, 64, 0] == pytest.approx(-np.pi)
    # center convention
    assert img.pixels[64, 64, 0] == 0.0


def test_spd_jump_image_structure():
    img = spd_jump_image(16)
    img.validate()
    m = img.manifold
    dh = m.dist(img.pixels[:, :-1], img.pixels[:, 1:])
    dv = m.dist(img.pixels[:-1, :], img.pixels[1:, :])
    jump_col = 10  # ceil(2*16/3) = 11 (1-based) -> first right column 0-based 10
    within = max(dh[:, :jump_col - 1].max(), dh[:, jump_col:].max(), dv.max())
    jump = dh[:, jump_col - 1].min()
    assert jump > 5.0 * within
    assert within < jump  # adjacent same-side pairs are closer than the jump


def test_spd_jump_image_small_n_jump_column():
    img = spd_jump_image(3)
    assert img.shape == (3, 3)
    m = img.manifold
    dh = m.dist(img.pixels[:, :-1], img.pixels[:, 1:])
    # jump at column 2 (1-based): between 0-based columns 0 and 1
    assert np.all(dh[:, 0] > dh[:, 1])


def test_sphere_field_and_grain_image_valid():
    sphere_field(16).validate()
    img = so3_grain_image(12, n_grains=3, seed=1)
    img.validate()
    # deterministic under seed
    again = so3_grain_image(12, n_grains=3, seed=1)
    assert np.array_equal(img.pixels, again.pixels)


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------


def test_noise_deterministic_under_seed():
    sig = spiral_signal(50)
    a = add_noise(sig, NoiseSpec(WRAPPED_GAUSSIAN, 0.3, 7))
    b = add_noise(sig, NoiseSpec(WRAPPED_GAUSSIAN, 0.3, 7))
    assert np.array_equal(a.pixels, b.pixels)
    c = add_noise(sig, NoiseSpec(WRAPPED_GAUSSIAN, 0.3, 8))
    assert not np.array_equal(a.pixels, c.pixels)


def test_tiny_sigma_barely_moves_points(rng):
    field = sphere_field(8)
    noisy = add_noise(field, NoiseSpec(TANGENT_GAUSSIAN, 1e-12, 0))
    d = field.manifold.dist(field.pixels, noisy.pixels)
    assert np.max(d) < 1e-10


@pytest.mark.parametrize("manifold_img", [
    sphere_field(8),
    so3_grain_image(8, seed=0),
    spd_jump_image(8),
], ids=["sphere2", "so3q", "spd"])
def test_tangent_noise_preserves_invariants(manifold_img):
    noisy = add_noise(manifold_img, NoiseSpec(TANGENT_GAUSSIAN, 0.2, 5))
    noisy.validate()


def test_wrapped_noise_mean_sanity():
    # wrapped Gaussian around 0 has circular mean 0
    n = 100_000
    zeros = spiral_signal(2)
    import mvir.images as images
    img = images.constant_image(Circle(), (1, n))
    noisy = add_noise(img, NoiseSpec(WRAPPED_GAUSSIAN, 0.3, 11))
    vals = noisy.pixels[0, :, 0]
    mean = np.angle(np.mean(np.exp(1j * vals)))
    assert abs(mean) < 3 * 0.3 / np.sqrt(n)


def test_wrapped_noise_requires_circle():
    with pytest.raises(ValidationError):
        add_noise(sphere_field(4), NoiseSpec(WRAPPED_GAUSSIAN, 0.1, 0))


def test_noise_spec_validation():
    with pytest.raises(ValidationError):
        NoiseSpec("salt", 0.1, 0)
    with pytest.raises(ValidationError):
        NoiseSpec(WRAPPED_GAUSSIAN, 0.0, 0)


# ---------------------------------------------------------------------------
# masks
# ---------------------------------------------------------------------------


def test_random_mask_exact_counts():
    m = random_mask((10, 10), 0.3, seed=4)
    assert m.n_known == 70
    assert random_mask((10, 10), 0.0, seed=4).n_known == 100
    again = random_mask((10, 10), 0.3, seed=4)
    assert np.array_equal(m.known, again.known)


def test_center_block_mask_counts():
    m = center_block_mask((16, 16), 12)
    assert m.n_known == 256 - 144
    inner = m.known[2:14, 2:14]
    assert not inner.any()


def test_block_mask_rect():
    m = block_mask((4, 5), (1, 2, 2, 2))
    assert m.n_known == 20 - 4
    assert not m.known[1:3, 2:4].any()


def test_disc_mask_geometry():
    m = disc_mask((129, 129), 0.15)
    assert not m.known[64, 64]
    assert m.known[0, 0]
    # radius in domain units: pixels beyond 0.15 * 128 pixels survive
    assert m.known[64, 64 + 21]
    assert not m.known[64, 64 + 18]


def test_random_mask_validation():
    with pytest.raises(ValidationError):
        random_mask((2, 2), 1.0, 0)


# ---------------------------------------------------------------------------
# chromaticity-brightness and metrics
# ---------------------------------------------------------------------------


def test_cb_pinned_values():
    rgb = np.array([[[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]]])
    cb = cb_decompose(rgb)
    assert cb.brightness.pixels[0, 0, 0] == pytest.approx(1.0)
    assert np.allclose(cb.chromaticity.pixels[0, 0], [1.0, 0.0, 0.0])
    assert cb.brightness.pixels[0, 1, 0] == pytest.approx(np.sqrt(3.0))
    assert np.allclose(cb.chromaticity.pixels[0, 1], np.ones(3) / np.sqrt(3.0))


def test_cb_round_trip(rng):
    rgb = rng.uniform(0.05, 1.0, (6, 7, 3))
    out = cb_recompose(cb_decompose(rgb))
    assert np.max(np.abs(out - rgb)) < 1e-10


def test_cb_zero_pixel_flagged():
    rgb = np.zeros((1, 2, 3))
    rgb[0, 1] = [0.3, 0.4, 0.0]
    cb = cb_decompose(rgb)
    assert cb.degenerate[0, 0] and not cb.degenerate[0, 1]
    assert np.allclose(cb.chromaticity.pixels[0, 0], np.ones(3) / np.sqrt(3.0))
    assert cb.brightness.pixels[0, 0, 0] == 0.0
    cb.chromaticity.validate()


def test_err_metric_values():
    a = spiral_signal(5)
    assert err_metric(a, a) == 0.0
    one_a = np.zeros((1, 1, 1))
    one_b = np.full((1, 1, 1), np.pi / 2)
    from mvir.images import ManifoldImage
    img_a = ManifoldImage(Circle(), one_a)
    img_b = ManifoldImage(Circle(), one_b)
    assert err_metric(img_a, img_b) == pytest.approx(np.pi / 2)
    with pytest.raises(ValidationError):
        err_metric(a, spiral_signal(6))


def test_psnr_values(rng):
    ref = rng.uniform(0.2, 0.8, (5, 5, 3))
    assert psnr(ref, ref) == float("inf")
    shifted = ref + 0.1
    assert psnr(shifted, ref) == pytest.approx(20.0, abs=1e-9)


def test_synthetic_rgb_in_range():
    rgb = synthetic_rgb(20)
    assert rgb.shape == (20, 20, 3)
    assert rgb.min() >= 0.05 and rgb.max() <= 1.0


def test_rgb_noise_deterministic():
    rgb = synthetic_rgb(10)
    assert np.array_equal(add_rgb_noise(rgb, 0.1, 3), add_rgb_noise(rgb, 0.1, 3))
