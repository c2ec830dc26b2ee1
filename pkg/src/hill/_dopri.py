"""Embedded Dormand-Prince 5(4) stepper with PI step-size control.

The stepper advances a *batch* of independent linear systems with one shared
step sequence; the error norm is the maximum over the whole batch.  A shared
step keeps batched evaluation over spectral grids cheap, and it makes the
result at ``conj(z)`` the exact conjugate of the result at ``z``.
"""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteState, StepLimitExceeded

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# difference between the 5th and embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 5.0
ALPHA, BETA = 0.17, 0.04  # PI gains (Gustafsson)


def integrate(rhs, y0, x0, x1, *, rtol, atol, max_steps, h0=None, steps_used=0):
    """Integrate ``y' = rhs(x, y)`` from ``x0`` to ``x1`` for a batch ``y0``.

    Returns ``(y1, steps_used)``. ``steps_used`` accumulates across calls so
    that a caller splitting ``[0, 1]`` into pieces shares one step budget.
    Overflow surfaces as :class:`NonFiniteState`, not as a numpy warning.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate(rhs, y0, x0, x1, rtol=rtol, atol=atol, max_steps=max_steps,
                          h0=h0, steps_used=steps_used)


def _integrate(rhs, y0, x0, x1, *, rtol, atol, max_steps, h0, steps_used):
    y = np.array(y0, dtype=complex)
    x = float(x0)
    span = float(x1) - x
    if span <= 0.0:
        return y, steps_used
    h = min(span, h0 if h0 is not None else span / 8)
    k1 = rhs(x, y)
    err_old = 1e-4
    while True:
        if steps_used >= max_steps:
            raise StepLimitExceeded(f"exceeded {max_steps} steps", x=x, step=h)
        last = x + h >= x1 - 1e-14 * max(1.0, abs(x1))
        if last:
            h = x1 - x
        k2 = rhs(x + C2 * h, y + h * (A21 * k1))
        k3 = rhs(x + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = rhs(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = rhs(x + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = rhs(x + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = rhs(x + h, y_new)
        steps_used += 1
        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not np.isfinite(err):
            raise NonFiniteState("non-finite state during integration", x=x)
        if err <= 1.0:
            x = x1 if last else x + h
            y = y_new
            k1 = k7
            if last:
                return y, steps_used
            err = max(err, 1e-10)
            fac = SAFETY * err ** -ALPHA * err_old ** BETA
            err_old = err
            h *= min(FAC_MAX, max(FAC_MIN, fac))
        else:
            h *= max(FAC_MIN, SAFETY * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(x)):
                raise StepLimitExceeded("step size underflow", x=x, step=h)
