"""Deterministic synthetic test images with ground truth and corruption masks.

Intensities follow the ink convention: 0 is white background, 1 is black.
Corrupted pixels are set to 0.
"""

from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError

FIXTURES = ("broken-circle", "broken-lines", "stripes", "ramp-bump")


class Fixture(NamedTuple):
    image: np.ndarray
    mask: np.ndarray
    truth: np.ndarray


def _coords(size):
    y, x = np.mgrid[0:size, 0:size].astype(float)
    return x, y


def broken_circle(size=64, thickness=3.0, gap=None):
    """Annulus with two diametrically opposed gaps on the horizontal axis."""
    x, y = _coords(size)
    c = (size - 1) / 2.0
    radius = 0.3 * size
    r = np.hypot(x - c, y - c)
    truth = (np.abs(r - radius) <= thickness / 2.0).astype(float)
    gap = size / 6.0 if gap is None else gap
    # gaps centred where the ring crosses the horizontal diameter
    mask = (np.abs(y - c) <= gap / 2.0) & (np.abs(r - radius) <= thickness)
    image = np.where(mask, 0.0, truth)
    return Fixture(image, mask, truth)


def broken_lines(size=64, thickness=3, gap=None):
    """A horizontal bar across the image with a gap in the middle."""
    x, y = _coords(size)
    c = (size - 1) / 2.0
    half = thickness / 2.0
    truth = ((np.abs(y - c) < half) & (x >= 0.1 * size) & (x <= 0.9 * size)).astype(float)
    gap = size / 8.0 if gap is None else gap
    mask = (np.abs(x - c) <= gap / 2.0) & (np.abs(y - c) < half + 2)
    image = np.where(mask, 0.0, truth)
    return Fixture(image, mask, truth)


def stripes(size=64, density=0.95, seed=0, mask_kind="random", period=None, angle=np.pi / 6):
    """Oblique sinusoidal stripes with a seeded random or central block mask."""
    x, y = _coords(size)
    period = size / 4.0 if period is None else period
    phase = 2.0 * np.pi * (x * np.cos(angle) + y * np.sin(angle)) / period
    truth = 0.5 + 0.3 * np.sin(phase)
    if mask_kind == "random":
        rng = np.random.default_rng(seed)
        n = size * size
        mask = np.zeros(n, dtype=bool)
        mask[rng.choice(n, size=int(round(density * n)), replace=False)] = True
        mask = mask.reshape(size, size)
    elif mask_kind == "block":
        side = int(round(np.sqrt(density) * size))
        lo = (size - side) // 2
        mask = np.zeros((size, size), dtype=bool)
        mask[lo:lo + side, lo:lo + side] = True
    else:
        raise ConfigurationError(f"unknown mask kind {mask_kind!r}")
    image = np.where(mask, 0.0, truth)
    return Fixture(image, mask, truth)


def ramp_bump(size=64):
    """Diagonal ramp plus a shallow Gaussian bump; the gradient never vanishes."""
    x, y = _coords(size)
    c = (size - 1) / 2.0
    width = size / 8.0
    ramp = 0.25 + 0.5 * (x + y) / (2.0 * (size - 1))
    bump = 0.04 * np.exp(-((x - c) ** 2 + (y - c) ** 2) / (2.0 * width**2))
    truth = ramp + bump
    return Fixture(truth.copy(), np.zeros(truth.shape, dtype=bool), truth)


def make_fixture(name, size=64, **kwargs):
    if size < 32:
        raise ConfigurationError(f"fixture size must be >= 32, got {size}")
    if name == "broken-circle":
        return broken_circle(size, **kwargs)
    if name == "broken-lines":
        return broken_lines(size, **kwargs)
    if name == "stripes":
        return stripes(size, **kwargs)
    if name == "ramp-bump":
        return ramp_bump(size, **kwargs)
    raise ConfigurationError(f"unknown fixture {name!r}; expected one of {FIXTURES}")
