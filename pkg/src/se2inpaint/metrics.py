"""Image quality numbers used by the CLI and the test suite."""

import math
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .lift import image_gradient


class Metrics(NamedTuple):
    psnr: float
    rms_contrast: float
    gradient_energy: float
    mass: float


def psnr(image, reference, peak=1.0):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    image = np.asarray(image, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if image.shape != reference.shape:
        raise ConfigurationError(f"shape mismatch: {image.shape} vs {reference.shape}")
    mse = float(np.mean((image - reference) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def rms_contrast(image):
    return float(np.std(np.asarray(image, dtype=float)))


def gradient_energy(image):
    """Sum of squared centered-difference gradient norms."""
    ix, iy = image_gradient(np.asarray(image, dtype=float))
    return float(np.sum(ix**2 + iy**2))


def mass(array):
    return float(np.sum(array))


def compute_metrics(image, reference):
    """Metrics of ``image``; PSNR is measured against ``reference``."""
    return Metrics(
        psnr=psnr(image, reference),
        rms_contrast=rms_contrast(image),
        gradient_energy=gradient_energy(image),
        mass=mass(image),
    )
