"""Grid geometry and discrete left-invariant operators on orientation stacks.

Images are ``(rows, cols)`` arrays and orientation stacks are
``(rows, cols, n_theta)`` arrays. The x axis runs along columns, the y axis
along rows, and slice ``k`` of a stack holds ``theta_k = k * pi / n_theta``.
The orientation axis is always periodic with period pi; the spatial axes use
either periodic or reflecting (edge-mirrored, zero-flux) boundaries.

All operators are pure: they read their input and return a new array.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError

BOUNDARIES = ("periodic", "reflect")


@dataclass(frozen=True)
class GridSpec:
    """Shape, spacing and boundary rule of an orientation stack."""

    rows: int
    cols: int
    n_theta: int = 32
    dx: float = 1.0
    dy: float = 1.0
    boundary: str = "reflect"

    def __post_init__(self):
        if self.rows < 3 or self.cols < 3:
            raise ConfigurationError(
                f"grid needs at least 3x3 pixels, got {self.rows}x{self.cols}"
            )
        if self.n_theta < 1:
            raise ConfigurationError(f"n_theta must be positive, got {self.n_theta}")
        if not (self.dx > 0 and self.dy > 0):
            raise ConfigurationError(f"spacings must be positive, got dx={self.dx}, dy={self.dy}")
        if self.boundary not in BOUNDARIES:
            raise ConfigurationError(
                f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}"
            )

    @classmethod
    def for_array(cls, array, n_theta=None, **kwargs):
        """Build a spec matching ``array`` (an image or a stack)."""
        array = np.asarray(array)
        if array.ndim == 3:
            n_theta = array.shape[2]
        elif array.ndim != 2:
            raise ConfigurationError(f"expected a 2-D image or 3-D stack, got ndim={array.ndim}")
        if n_theta is None:
            n_theta = 32
        return cls(array.shape[0], array.shape[1], n_theta, **kwargs)

    @classmethod
    def isotropic(cls, rows, cols, n_theta=32, boundary="reflect"):
        """Grid whose spatial spacing equals the orientation spacing ``pi / n_theta``.

        Voxels are then cubes, so ``beta`` weighs angular against spatial
        neighbours one to one, as on the pixel lattice of an image viewer.
        """
        h = np.pi / n_theta
        return cls(rows, cols, n_theta, dx=h, dy=h, boundary=boundary)

    @property
    def time_unit(self):
        """``dx * dy``: the physical time of one grid time unit.

        Pipeline times are quoted in grid units so that the same numbers
        mean the same amount of smoothing (in pixels) on any spacing.
        """
        return self.dx * self.dy

    @property
    def d_theta(self):
        return np.pi / self.n_theta

    @property
    def thetas(self):
        return np.arange(self.n_theta) * self.d_theta

    @property
    def shape(self):
        return (self.rows, self.cols, self.n_theta)

    @property
    def image_shape(self):
        return (self.rows, self.cols)

    def check_stack(self, stack):
        stack = np.asarray(stack, dtype=float)
        if stack.shape != self.shape:
            raise ConfigurationError(
                f"stack shape {stack.shape} does not match grid {self.shape}"
            )
        return stack

    def check_image(self, image):
        image = np.asarray(image, dtype=float)
        if image.shape != self.image_shape:
            raise ConfigurationError(
                f"image shape {image.shape} does not match grid {self.image_shape}"
            )
        return image


def _resolve(stack, spec):
    if spec is None:
        spec = GridSpec.for_array(stack)
    return spec.check_stack(stack), spec


def pad_spatial(u, boundary):
    """Pad the two spatial axes by one cell using the boundary rule."""
    mode = "wrap" if boundary == "periodic" else "symmetric"
    pad = [(1, 1), (1, 1)] + [(0, 0)] * (u.ndim - 2)
    return np.pad(u, pad, mode=mode)


def second_differences(u, spec):
    """Centered ``(d_xx, d_yy, d_xy)`` of every theta slice."""
    p = pad_spatial(u, spec.boundary)
    c = p[1:-1, 1:-1]
    dxx = (p[1:-1, 2:] - 2.0 * c + p[1:-1, :-2]) / spec.dx**2
    dyy = (p[2:, 1:-1] - 2.0 * c + p[:-2, 1:-1]) / spec.dy**2
    dxy = (p[2:, 2:] - p[2:, :-2] - p[:-2, 2:] + p[:-2, :-2]) / (4.0 * spec.dx * spec.dy)
    return dxx, dyy, dxy


def first_differences(u, spec):
    """Centered ``(d_x, d_y)`` of an image or of every theta slice."""
    p = pad_spatial(u, spec.boundary)
    ux = (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * spec.dx)
    uy = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * spec.dy)
    return ux, uy


def x1_squared_coefficients(thetas):
    """Per-slice weights of d_xx, d_xy, d_yy in X1^2."""
    c, s = np.cos(thetas), np.sin(thetas)
    return c * c, 2.0 * s * c, s * s


def x3_squared_coefficients(thetas):
    """Per-slice weights of d_xx, d_xy, d_yy in X3^2."""
    c, s = np.cos(thetas), np.sin(thetas)
    return s * s, -2.0 * s * c, c * c


def _theta_second_difference(u, d_theta):
    return (np.roll(u, -1, axis=2) - 2.0 * u + np.roll(u, 1, axis=2)) / d_theta**2


def apply_X1_squared(stack, spec=None):
    """Second derivative along ``X1 = cos(theta) d_x + sin(theta) d_y``."""
    u, spec = _resolve(stack, spec)
    dxx, dyy, dxy = second_differences(u, spec)
    cxx, cxy, cyy = x1_squared_coefficients(spec.thetas)
    return cxx * dxx + cxy * dxy + cyy * dyy


def apply_X3_squared(stack, spec=None):
    """Second derivative along ``X3 = -sin(theta) d_x + cos(theta) d_y``."""
    u, spec = _resolve(stack, spec)
    dxx, dyy, dxy = second_differences(u, spec)
    cxx, cxy, cyy = x3_squared_coefficients(spec.thetas)
    return cxx * dxx + cxy * dxy + cyy * dyy


def apply_X2_squared(stack, spec=None):
    """Periodic centered second difference along the orientation axis."""
    u, spec = _resolve(stack, spec)
    if spec.n_theta < 3:
        raise ConfigurationError(f"X2^2 needs n_theta >= 3, got {spec.n_theta}")
    return _theta_second_difference(u, spec.d_theta)


def apply_X1(stack, spec=None):
    u, spec = _resolve(stack, spec)
    ux, uy = first_differences(u, spec)
    return np.cos(spec.thetas) * ux + np.sin(spec.thetas) * uy


def apply_X2(stack, spec=None, antiperiodic=False):
    """Centered first difference along the orientation axis.

    ``X1`` and ``X3`` turn a pi-periodic stack into a pi-antiperiodic one
    (``cos(theta + pi) = -cos(theta)``); pass ``antiperiodic=True`` for such
    inputs so the wrap from the last slice to the first flips the sign.
    """
    u, spec = _resolve(stack, spec)
    up = np.roll(u, -1, axis=2)
    down = np.roll(u, 1, axis=2)
    if antiperiodic:
        up[..., -1] *= -1.0
        down[..., 0] *= -1.0
    return (up - down) / (2.0 * spec.d_theta)


def apply_X3(stack, spec=None):
    u, spec = _resolve(stack, spec)
    ux, uy = first_differences(u, spec)
    return -np.sin(spec.thetas) * ux + np.cos(spec.thetas) * uy


# Dense assembly. Deliberately written as explicit per-voxel loops so it shares
# no code with the vectorised stencils above and can serve as their oracle.

MAX_DENSE_VOXELS = 4096


def _neighbour(index, offset, n, boundary):
    j = index + offset
    if boundary == "periodic":
        return j % n
    if j < 0:
        return -j - 1
    if j >= n:
        return 2 * n - j - 1
    return j


def assemble_field_matrix(spec, field):
    """Dense matrix of ``"X1^2"``, ``"X2^2"`` or ``"X3^2"`` on C-order flattened stacks."""
    n = spec.rows * spec.cols * spec.n_theta
    if n > MAX_DENSE_VOXELS:
        raise ConfigurationError(
            f"dense assembly limited to {MAX_DENSE_VOXELS} voxels, grid has {n}"
        )
    if field == "X1^2":
        weights = x1_squared_coefficients(spec.thetas)
    elif field == "X3^2":
        weights = x3_squared_coefficients(spec.thetas)
    elif field == "X2^2":
        weights = None
        if spec.n_theta < 3:
            raise ConfigurationError(f"X2^2 needs n_theta >= 3, got {spec.n_theta}")
    else:
        raise ConfigurationError(f"unknown field {field!r}")

    R, C, K = spec.shape

    def flat(i, j, k):
        return (i * C + j) * K + k

    A = np.zeros((n, n))
    for i in range(R):
        for j in range(C):
            for k in range(K):
                row = flat(i, j, k)
                if weights is None:
                    h2 = spec.d_theta**2
                    A[row, flat(i, j, (k + 1) % K)] += 1.0 / h2
                    A[row, flat(i, j, (k - 1) % K)] += 1.0 / h2
                    A[row, row] -= 2.0 / h2
                    continue
                wxx = weights[0][k] / spec.dx**2
                wxy = weights[1][k] / (4.0 * spec.dx * spec.dy)
                wyy = weights[2][k] / spec.dy**2
                jp, jm = (_neighbour(j, d, C, spec.boundary) for d in (1, -1))
                ip, im = (_neighbour(i, d, R, spec.boundary) for d in (1, -1))
                A[row, flat(i, jp, k)] += wxx
                A[row, flat(i, jm, k)] += wxx
                A[row, row] -= 2.0 * wxx + 2.0 * wyy
                A[row, flat(ip, j, k)] += wyy
                A[row, flat(im, j, k)] += wyy
                A[row, flat(ip, jp, k)] += wxy
                A[row, flat(ip, jm, k)] -= wxy
                A[row, flat(im, jp, k)] -= wxy
                A[row, flat(im, jm, k)] += wxy
    return A


class CommutatorReport(NamedTuple):
    max_residual: float
    interior_max_residual: float
    spec: GridSpec


TEST_FIELDS = ("trig", "constant", "linear")


def commutator_test_field(spec, field="trig"):
    """Smooth test field sampled on ``spec`` in physical coordinates."""
    x = np.arange(spec.cols) * spec.dx
    th = spec.thetas
    X = x[None, :, None]
    T = th[None, None, :]
    if field == "trig":
        L = spec.cols * spec.dx
        f = np.sin(2.0 * np.pi * X / L) * np.cos(2.0 * T)
    elif field == "constant":
        f = np.ones_like(X * T)
    elif field == "linear":
        f = X * np.cos(2.0 * T)
    else:
        raise ConfigurationError(f"unknown test field {field!r}, expected one of {TEST_FIELDS}")
    return np.broadcast_to(f, spec.shape).copy()


def commutator_check(spec, field="trig"):
    """Max of ``|X1(X2 f) - X2(X1 f) + X3 f|`` for a smooth test field.

    The continuous bracket relation ``[X1, X2] = -X3`` makes the residual
    vanish, so the discrete value measures truncation error. ``X1 f`` is
    pi-antiperiodic in theta, so the outer ``X2`` wraps with a sign flip.
    The interior
    maximum ignores the outermost pixel ring, where reflecting boundaries
    are only first-order accurate.
    """
    f = commutator_test_field(spec, field)
    x1_x2 = apply_X1(apply_X2(f, spec), spec)
    x2_x1 = apply_X2(apply_X1(f, spec), spec, antiperiodic=True)
    res = x1_x2 - x2_x1 + apply_X3(f, spec)
    res = np.abs(res)
    return CommutatorReport(
        max_residual=float(res.max()),
        interior_max_residual=float(res[2:-2, 2:-2].max()),
        spec=spec,
    )
