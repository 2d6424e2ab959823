"""Lifting images to orientation stacks and projecting stacks back.

The Gaussian lift spreads each pixel value over its fiber with an angular
Gaussian centred on the level-line direction; the Dirac lift puts the whole
value on the single best-aligned orientation.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, DomainError
from .grid import GridSpec, first_differences

LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class LiftParams:
    """Parameters of the Gaussian lift.

    Attributes
    ----------
    sigma : float
        Angular spread. Large values give nearly flat fibers.
    smoothing_s : float
        Standard deviation of the Gaussian pre-smoothing applied by the
        pipelines before lifting (0 disables it).
    gradient_floor : float
        Pixels whose gradient norm is below ``gradient_floor`` times the
        largest gradient norm in the image are treated as degenerate.
    """

    sigma: float = 1.0
    smoothing_s: float = 0.0
    gradient_floor: float = 1e-3

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if not self.smoothing_s >= 0:
            raise ConfigurationError(f"smoothing_s must be >= 0, got {self.smoothing_s}")
        if not 0 < self.gradient_floor < 1:
            raise ConfigurationError(
                f"gradient_floor must lie in (0, 1), got {self.gradient_floor}"
            )


def _image_spec(image, spec, n_theta=None):
    if spec is None:
        spec = GridSpec.for_array(image, n_theta=n_theta)
    return spec.check_image(image), spec


def preprocess_gaussian(image, s):
    """Blur with an isotropic Gaussian of standard deviation ``s`` (reflecting edges)."""
    if s < 0:
        raise ConfigurationError(f"smoothing std must be >= 0, got {s}")
    image = np.asarray(image, dtype=float)
    if s == 0:
        return image.copy()
    return ndimage.gaussian_filter(image, s, mode="reflect")


def image_gradient(image, spec=None):
    """Centered-difference gradient ``(I_x, I_y)`` with reflecting edges."""
    image, spec = _image_spec(image, spec)
    if spec.boundary != "reflect":
        spec = GridSpec(spec.rows, spec.cols, spec.n_theta, spec.dx, spec.dy, "reflect")
    return first_differences(image, spec)


def gaussian_fiber(image, thetas, params, spec=None):
    """Evaluate the Gaussian lift of ``image`` at arbitrary angles ``thetas``."""
    image, spec = _image_spec(image, spec)
    ix, iy = image_gradient(image, spec)
    norm = np.hypot(ix, iy)
    peak = norm.max()
    degenerate = norm < params.gradient_floor * peak if peak > 0 else np.ones_like(norm, bool)
    safe = np.where(degenerate, 1.0, norm)
    thetas = np.asarray(thetas, dtype=float)
    along = (ix[..., None] * np.cos(thetas) + iy[..., None] * np.sin(thetas)) / safe[..., None]
    stack = image[..., None] * np.exp(-(along**2) / (2.0 * params.sigma**2))
    stack[degenerate] = image[degenerate][:, None]
    return stack


def lift_gaussian(image, params=LiftParams(), spec=None):
    """Gaussian lift: ``I * exp(-<grad I / |grad I|, (cos t, sin t)>^2 / (2 sigma^2))``.

    The fiber peaks at the level-line orientation, where the unit gradient
    is orthogonal to ``(cos t, sin t)``. Degenerate pixels (see
    ``LiftParams.gradient_floor``) get the flat fiber ``I``.
    """
    image, spec = _image_spec(image, spec)
    return gaussian_fiber(image, spec.thetas, params, spec)


def lift_dirac(image, spec=None):
    """One-hot lift on the orientation maximising ``|X3 I|``.

    Ties go to the lowest orientation index. Pixels with zero gradient get
    an all-zero fiber.
    """
    image, spec = _image_spec(image, spec)
    ix, iy = image_gradient(image, spec)
    th = spec.thetas
    response = np.abs(-np.sin(th) * ix[..., None] + np.cos(th) * iy[..., None])
    best = np.argmax(response, axis=2)
    stack = np.zeros(spec.shape)
    rows, cols = np.indices(spec.image_shape)
    stack[rows, cols, best] = image
    stack[np.hypot(ix, iy) == 0] = 0.0
    return stack


def level_line_angle(image, spec=None):
    """Level-line orientation in ``[0, pi)`` from the image gradient."""
    ix, iy = image_gradient(image, spec)
    return np.mod(np.arctan2(iy, ix) + np.pi / 2, np.pi)


def project_max(stack):
    """Fiber maximum, clamped to ``[0, 1]``."""
    stack = np.asarray(stack, dtype=float)
    return np.clip(stack.max(axis=2), 0.0, 1.0)


def project_integral(stack):
    """Fiber sum, clamped to ``[0, 1]``.

    Each orientation sample has unit weight, so a Dirac lift is recovered
    exactly. Mixing along the fiber (``beta > 0``) moves mass between
    orientations without changing the sum.
    """
    stack = np.asarray(stack, dtype=float)
    return np.clip(stack.sum(axis=2), 0.0, 1.0)


def log_mean_constant(sigma):
    """Additive correction that makes ``project_log_mean`` invert the lift."""
    return 1.0 / (4.0 * sigma**2)


def project_log_mean(stack, sigma):
    """``exp(1 / (4 sigma^2) + mean_theta ln stack)``, clamped to ``[0, 1]``.

    Inverts ``lift_gaussian`` exactly on non-degenerate pixels: the fiber
    mean of ``cos^2`` over equispaced angles is 1/2 for any ``n_theta >= 2``.
    """
    stack = np.asarray(stack, dtype=float)
    bad = stack <= 0
    if bad.any():
        r, c, k = np.argwhere(bad)[0]
        raise DomainError(
            f"log-mean projection needs positive values; pixel ({r}, {c}) has "
            f"{stack[r, c, k]:g} at orientation index {k}"
        )
    mean_log = np.log(np.maximum(stack, LOG_FLOOR)).mean(axis=2)
    return np.clip(np.exp(log_mean_constant(sigma) + mean_log), 0.0, 1.0)
