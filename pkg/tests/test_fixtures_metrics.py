import math

import numpy as np
import pytest
from scipy import ndimage

from se2inpaint.errors import ConfigurationError
from se2inpaint.fixtures import FIXTURES, make_fixture, stripes
from se2inpaint.lift import LiftParams, image_gradient
from se2inpaint.metrics import compute_metrics, gradient_energy, mass, psnr, rms_contrast


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_are_deterministic_and_in_range(name):
    a, b = make_fixture(name, 48), make_fixture(name, 48)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    assert a.image.shape == a.mask.shape == a.truth.shape == (48, 48)
    assert a.mask.dtype == bool
    assert a.image.min() >= 0 and a.image.max() <= 1
    np.testing.assert_array_equal(a.image[~a.mask], a.truth[~a.mask])


def test_broken_circle_has_two_pieces():
    fx = make_fixture("broken-circle", 64)
    assert ndimage.label(fx.image > 0.5)[1] == 2
    assert ndimage.label(fx.truth > 0.5)[1] == 1
    assert fx.mask.any()


def test_broken_lines_has_two_pieces():
    fx = make_fixture("broken-lines", 64)
    assert ndimage.label(fx.image > 0.5)[1] == 2


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_stripes_mask_density(seed):
    fx = make_fixture("stripes", 128, seed=seed, density=0.95)
    assert abs(fx.mask.mean() - 0.95) <= 0.005
    np.testing.assert_array_equal(fx.image[fx.mask], 0.0)


def test_stripes_seed_changes_mask_only():
    a, b = stripes(64, seed=0), stripes(64, seed=1)
    assert (a.mask != b.mask).any()
    np.testing.assert_array_equal(a.truth, b.truth)


def test_stripes_block_mask():
    fx = stripes(64, density=0.25, mask_kind="block")
    assert fx.mask.sum() == 32 * 32
    with pytest.raises(ConfigurationError):
        stripes(64, mask_kind="lines")


def test_ramp_bump_gradient_never_degenerates():
    img = make_fixture("ramp-bump", 64).image
    gx, gy = image_gradient(img)
    norm = np.hypot(gx, gy)
    assert norm.min() >= LiftParams().gradient_floor * norm.max()


def test_fixture_errors():
    with pytest.raises(ConfigurationError):
        make_fixture("stripes", 16)
    with pytest.raises(ConfigurationError):
        make_fixture("checkerboard", 64)


def test_metric_examples():
    a = np.random.default_rng(0).random((8, 8)) * 0.8
    assert psnr(a, a) == math.inf
    assert psnr(a + 0.1, a) == pytest.approx(20.0)
    assert rms_contrast(np.full((5, 5), 0.3)) == 0.0
    assert gradient_energy(np.full((5, 5), 0.3)) == 0.0
    assert mass(np.ones((2, 3, 4))) == 24.0
    m = compute_metrics(a + 0.1, a)
    assert m.psnr == pytest.approx(20.0)
    assert m.rms_contrast == pytest.approx(a.std())
    assert m.mass == pytest.approx((a + 0.1).sum())
    with pytest.raises(ConfigurationError):
        psnr(a, a[:4])


def test_gradient_energy_of_ramp():
    img = np.tile(np.arange(6.0), (4, 1)) * 0.1
    # centered differences: 0.1 in the interior, 0.05 on the mirrored edges
    expected = 4 * (4 * 0.1**2 + 2 * 0.05**2)
    assert gradient_energy(img) == pytest.approx(expected)
