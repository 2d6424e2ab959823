"""Sharpening built on the two diffusions.

``wax_on_wax_off`` alternates level-curve diffusion (inpainting) with
regularised reverse transversal diffusion (sharpening). ``unsharp_se2`` is
unsharp masking where the blur is a transversal diffusion of the stack, and
``unsharp_r2`` is the ordinary planar filter kept for comparison.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .diffusion import DiffusionParams, run_forward, run_reverse
from .errors import BlowupError, ConfigurationError
from .grid import GridSpec

# 5-point cross average; with C = 5 unsharp masking against it gives the
# classic [[0,-1,0],[-1,5,-1],[0,-1,0]] sharpening kernel.
CROSS_AVERAGE = np.array([[0.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 0.0]]) / 5.0
SHARPEN_3X3 = np.array([[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class WaxParams:
    T_on: float = 10.0
    T_off: Optional[float] = None  # defaults to T_on / 8
    beta_on: float = 0.25
    beta_off: float = 2.0
    n: int = 1
    blowup_factor: float = 10.0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"iterations n must be >= 1, got {self.n}")
        if self.T_on < 0:
            raise ConfigurationError(f"T_on must be >= 0, got {self.T_on}")
        if self.T_off is not None and not 0 <= self.T_off <= self.T_on:
            raise ConfigurationError(
                f"T_off must lie in [0, T_on={self.T_on}], got {self.T_off}"
            )
        if self.beta_on < 0 or self.beta_off < 0:
            raise ConfigurationError("beta_on and beta_off must be >= 0")

    @property
    def off_time(self):
        return self.T_on / 8.0 if self.T_off is None else self.T_off


@dataclass(frozen=True)
class UnsharpParams:
    C: float = 1.0
    T_blur: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        if self.C < 0:
            raise ConfigurationError(f"sharpening factor C must be >= 0, got {self.C}")
        if self.T_blur < 0:
            raise ConfigurationError(f"T_blur must be >= 0, got {self.T_blur}")
        if self.beta < 0:
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")


def wax_on(stack, params, spec=None):
    on = DiffusionParams("level_curve", params.beta_on, params.T_on)
    return run_forward(stack, on, spec)


def wax_off(stack, params, spec=None):
    off = DiffusionParams("transversal", params.beta_off, params.off_time)
    return run_reverse(stack, off, spec, blowup_factor=params.blowup_factor)


def wax_on_wax_off(stack, params=WaxParams(), spec=None):
    """Repeat ``n`` times: forward level-curve diffusion, then reverse transversal diffusion."""
    if spec is None:
        spec = GridSpec.for_array(stack)
    u = spec.check_stack(stack)
    for iteration in range(params.n):
        u = wax_on(u, params, spec)
        try:
            u = wax_off(u, params, spec)
        except BlowupError as exc:
            raise BlowupError(
                f"WaxOff blew up in iteration {iteration}: {exc}",
                step=exc.step,
                iteration=iteration,
            ) from exc
    return np.clip(u, 0.0, 1.0)


def transversal_blur(stack, params, spec=None):
    """The stack after transversal diffusion for ``T_blur``, unclamped."""
    blur = DiffusionParams("transversal", params.beta, params.T_blur, clamp=False)
    return run_forward(stack, blur, spec)


def unsharp_se2(stack, params=UnsharpParams(), spec=None, clamp=True):
    """``stack + C (stack - blurred)`` with a transversal-diffusion blur."""
    if spec is None:
        spec = GridSpec.for_array(stack)
    u = spec.check_stack(stack)
    out = u + params.C * (u - transversal_blur(u, params, spec))
    return np.clip(out, 0.0, 1.0) if clamp else out


def unsharp_r2(image, C, s=1.0, kernel=None, clamp=True):
    """Planar unsharp masking ``I + C (I - blur(I))``.

    The blur is a Gaussian of standard deviation ``s`` unless an explicit
    ``kernel`` is given. Edges are reflected.
    """
    if s < 0:
        raise ConfigurationError(f"blur std must be >= 0, got {s}")
    image = np.asarray(image, dtype=float)
    if kernel is not None:
        blurred = ndimage.correlate(image, np.asarray(kernel, dtype=float), mode="reflect")
    elif s == 0:
        blurred = image
    else:
        blurred = ndimage.gaussian_filter(image, s, mode="reflect")
    out = image + C * (image - blurred)
    return np.clip(out, 0.0, 1.0) if clamp else out
