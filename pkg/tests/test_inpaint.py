import numpy as np
import pytest
from scipy import ndimage

from se2inpaint.errors import ConfigurationError
from se2inpaint.fixtures import broken_circle, ramp_bump
from se2inpaint.inpaint import InpaintParams, classic_inpaint
from se2inpaint.lift import preprocess_gaussian


@pytest.mark.parametrize("bad", [dict(lift="box"), dict(projection="median"), dict(T=-1), dict(n_theta=2), dict(sigma=-1)])
def test_params_validation(bad):
    with pytest.raises(ConfigurationError):
        InpaintParams(**bad)


def test_zero_time_returns_the_smoothed_image():
    img = ramp_bump(32).image
    out = classic_inpaint(img, InpaintParams(T=0.0, smoothing_s=1.0))
    np.testing.assert_allclose(out, preprocess_gaussian(img, 1.0), atol=1e-14)


def test_time_is_in_grid_units():
    p = InpaintParams(T=60.0, n_theta=32)
    spec = p.grid((40, 40))
    assert p.diffusion(spec).total_time == pytest.approx(60 * (np.pi / 32) ** 2)
    pixel = InpaintParams(T=3.0, isotropic=False)
    assert pixel.diffusion(pixel.grid((40, 40))).total_time == 3.0


def test_returns_stack_on_request():
    img = broken_circle(32).image
    out, stack = classic_inpaint(img, InpaintParams(T=5.0, n_theta=8), return_stack=True)
    assert stack.shape == (32, 32, 8)
    np.testing.assert_allclose(out, np.clip(stack.sum(axis=2), 0, 1))


def test_gap_coverage_grows_with_beta():
    fx = broken_circle(64)
    coverage = []
    for beta in (0.0, 0.25, 0.5):
        out = classic_inpaint(fx.image, InpaintParams(beta=beta))
        coverage.append(int(((out > 0.1) & fx.mask).sum()))
    assert coverage == sorted(coverage)
    assert coverage[0] > 0


@pytest.mark.parametrize("projection", ["max", "log_mean"])
def test_gaussian_lift_variants_run(projection):
    img = ramp_bump(32).image
    out = classic_inpaint(img, InpaintParams(lift="gaussian", projection=projection, T=2.0, n_theta=8))
    assert np.isfinite(out).all() and out.min() >= 0 and out.max() <= 1
