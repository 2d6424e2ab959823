"""Explicit time stepping of the hypoelliptic heat equation on orientation stacks.

Two operators are supported:

* ``level_curve``: ``X1^2 + beta X2^2``, diffusion along lifted level lines;
* ``transversal``: ``X3^2 + beta X2^2``, diffusion across them.

Forward steps are plain explicit Euler. Reverse steps subtract the update
instead, which is ill-posed; they are regularised by clamping to ``[0, 1]``
after every step and aborted once the update starts growing geometrically.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import BlowupError, ConfigurationError, DomainError
from .grid import (
    GridSpec,
    assemble_field_matrix,
    second_differences,
    x1_squared_coefficients,
    x3_squared_coefficients,
)

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

OPERATORS = ("level_curve", "transversal")


@dataclass(frozen=True)
class DiffusionParams:
    operator: str = "level_curve"
    beta: float = 0.25
    total_time: float = 0.0
    dt: Optional[float] = None
    clamp: bool = True

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ConfigurationError(f"operator must be one of {OPERATORS}, got {self.operator!r}")
        if not self.beta >= 0:
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")
        if not self.total_time >= 0:
            raise ConfigurationError(f"total_time must be >= 0, got {self.total_time}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")


def stability_bound(beta, spec):
    """Largest admissible explicit step for ``X^2 + beta X2^2`` on ``spec``.

    Covers the cross-derivative term through the ``1 / (dx dy)`` part.
    """
    spatial = 1.0 / spec.dx**2 + 1.0 / spec.dy**2 + 1.0 / (spec.dx * spec.dy)
    return 1.0 / (2.0 * spatial + 2.0 * beta / spec.d_theta**2)


def auto_dt(beta, spec):
    return 0.9 * stability_bound(beta, spec)


def resolve_dt(params, spec):
    """The step size ``params`` will use on ``spec``; validates explicit steps."""
    bound = stability_bound(params.beta, spec)
    if params.dt is None:
        return 0.9 * bound
    if params.dt > bound * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt={params.dt:g} exceeds the stability bound {bound:.6g} "
            f"for beta={params.beta:g}"
        )
    return params.dt


def _coefficients(operator, spec):
    if operator == "level_curve":
        return x1_squared_coefficients(spec.thetas)
    return x3_squared_coefficients(spec.thetas)


def apply_operator(stack, operator, beta, spec=None):
    """Evaluate ``X1^2 + beta X2^2`` or ``X3^2 + beta X2^2`` with numpy stencils."""
    if spec is None:
        spec = GridSpec.for_array(stack)
    u = spec.check_stack(stack)
    if operator not in OPERATORS:
        raise ConfigurationError(f"operator must be one of {OPERATORS}, got {operator!r}")
    cxx, cxy, cyy = _coefficients(operator, spec)
    dxx, dyy, dxy = second_differences(u, spec)
    out = cxx * dxx + cxy * dxy + cyy * dyy
    if beta:
        h2 = spec.d_theta**2
        out += beta * (np.roll(u, -1, axis=2) - 2.0 * u + np.roll(u, 1, axis=2)) / h2
    return out


def assemble_dense_operator(params, spec):
    """Dense matrix of the operator selected by ``params`` (test oracle only)."""
    field = "X1^2" if params.operator == "level_curve" else "X3^2"
    A = assemble_field_matrix(spec, field)
    if params.beta:
        A = A + params.beta * assemble_field_matrix(spec, "X2^2")
    return A


# Fused update kernel: out = u + sign * dt * L(u), optionally clamped.
# Returns max |dt * L(u)|, used by the reverse-time blowup guard.


def _update_numpy(u, out, cxx, cxy, cyy, beta, dt, sign, clamp, spec):
    dxx, dyy, dxy = second_differences(u, spec)
    L = cxx * dxx + cxy * dxy + cyy * dyy
    if beta:
        L += beta * (np.roll(u, -1, axis=2) - 2.0 * u + np.roll(u, 1, axis=2)) / spec.d_theta**2
    L *= dt
    np.add(u, sign * L, out=out)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return float(np.abs(L).max())


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _update_kernel(u, out, cxx, cxy, cyy, beta_h2, dt, sign, clamp, periodic,
                       inv_dx2, inv_dy2, inv_4dxdy):
        R, C, K = u.shape
        peak = 0.0
        for i in range(R):
            ip = i + 1
            im = i - 1
            if periodic:
                ip = ip % R
                im = im % R
            else:
                if ip >= R:
                    ip = R - 1
                if im < 0:
                    im = 0
            for j in range(C):
                jp = j + 1
                jm = j - 1
                if periodic:
                    jp = jp % C
                    jm = jm % C
                else:
                    if jp >= C:
                        jp = C - 1
                    if jm < 0:
                        jm = 0
                for k in range(K):
                    c = u[i, j, k]
                    dxx = (u[i, jp, k] - 2.0 * c + u[i, jm, k]) * inv_dx2
                    dyy = (u[ip, j, k] - 2.0 * c + u[im, j, k]) * inv_dy2
                    dxy = (u[ip, jp, k] - u[ip, jm, k] - u[im, jp, k] + u[im, jm, k]) * inv_4dxdy
                    kp = k + 1
                    if kp == K:
                        kp = 0
                    km = k - 1
                    if km < 0:
                        km = K - 1
                    lap = cxx[k] * dxx + cxy[k] * dxy + cyy[k] * dyy
                    lap += beta_h2 * (u[i, j, kp] - 2.0 * c + u[i, j, km])
                    upd = dt * lap
                    if abs(upd) > peak:
                        peak = abs(upd)
                    v = c + sign * upd
                    if clamp:
                        if v < 0.0:
                            v = 0.0
                        elif v > 1.0:
                            v = 1.0
                    out[i, j, k] = v
        return peak


def _update(u, out, operator, beta, dt, sign, clamp, spec):
    cxx, cxy, cyy = _coefficients(operator, spec)
    if not HAS_NUMBA:  # pragma: no cover
        return _update_numpy(u, out, cxx, cxy, cyy, beta, dt, sign, clamp, spec)
    return _update_kernel(
        u, out, cxx, cxy, cyy, beta / spec.d_theta**2, dt, float(sign), clamp,
        spec.boundary == "periodic", 1.0 / spec.dx**2, 1.0 / spec.dy**2,
        1.0 / (4.0 * spec.dx * spec.dy),
    )


def _prepare(stack, spec):
    if spec is None:
        spec = GridSpec.for_array(stack)
    u = np.ascontiguousarray(spec.check_stack(stack), dtype=np.float64)
    if spec.n_theta < 3:
        raise ConfigurationError(f"diffusion needs n_theta >= 3, got {spec.n_theta}")
    if not np.isfinite(u).all():
        raise DomainError("stack contains NaN or infinite values")
    return u, spec


def _time_steps(total_time, dt):
    """Step sizes summing to ``total_time``; the last one is shortened."""
    if total_time == 0:
        return []
    n = max(1, math.ceil(total_time / dt - 1e-9))
    steps = [dt] * n
    steps[-1] = total_time - dt * (n - 1)
    return steps


def step_forward(stack, params, spec=None):
    """One explicit Euler step ``u + dt L(u)``."""
    u, spec = _prepare(stack, spec)
    dt = resolve_dt(params, spec)
    out = np.empty_like(u)
    _update(u, out, params.operator, params.beta, dt, 1.0, params.clamp, spec)
    return out


def run_forward(stack, params, spec=None):
    """Integrate forward to ``params.total_time``, landing on it exactly."""
    u, spec = _prepare(stack, spec)
    dt = resolve_dt(params, spec)
    u = u.copy()
    buf = np.empty_like(u)
    for h in _time_steps(params.total_time, dt):
        _update(u, buf, params.operator, params.beta, h, 1.0, params.clamp, spec)
        u, buf = buf, u
    return u


def step_reverse(stack, params, spec=None):
    """One regularised reverse step ``clip(u - dt L(u), 0, 1)``."""
    u, spec = _prepare(stack, spec)
    dt = resolve_dt(params, spec)
    out = np.empty_like(u)
    _update(u, out, params.operator, params.beta, dt, -1.0, True, spec)
    return out


def run_reverse(stack, params, spec=None, blowup_factor=10.0):
    """Run reverse steps for ``params.total_time``.

    The update size ``max |dt L(u)|`` of the first step is the reference; a
    later step whose update exceeds ``blowup_factor`` times that reference
    (after normalising for a shortened last step) raises ``BlowupError``.
    Clamping keeps values in ``[0, 1]``, so divergence shows up as runaway
    updates rather than non-finite numbers.
    """
    u, spec = _prepare(stack, spec)
    dt = resolve_dt(params, spec)
    u = u.copy()
    buf = np.empty_like(u)
    reference = None
    for index, h in enumerate(_time_steps(params.total_time, dt)):
        peak = _update(u, buf, params.operator, params.beta, h, -1.0, True, spec) / h
        if reference is None:
            reference = peak
        elif reference > 0 and peak > blowup_factor * reference:
            raise BlowupError(
                f"reverse diffusion diverging at step {index}: update grew by a "
                f"factor {peak / reference:.3g} (limit {blowup_factor:g})",
                step=index,
            )
        if not np.isfinite(peak):
            raise BlowupError(f"non-finite update at step {index}", step=index)
        u, buf = buf, u
    return u


def with_time(params, total_time, **changes):
    return replace(params, total_time=total_time, **changes)
