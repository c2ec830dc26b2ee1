"""Bracketed root refinement: Newton steps safeguarded by bisection."""

from __future__ import annotations

import math

from .errors import BracketFailure


def safeguarded_newton(fdf, a: float, b: float, *, fa=None, fb=None, x0=None,
                       rtol: float = 1e-13, atol: float = 1e-300, maxiter: int = 200):
    """Root of ``f`` in ``[a, b]`` where ``fdf(x) -> (f(x), f'(x), payload)``.

    ``f(a)`` and ``f(b)`` must not have the same strict sign. Newton steps
    that leave the current bracket, or that fail to halve it, are replaced by
    bisection.  Returns ``(root, payload)`` where ``payload`` is whatever
    ``fdf`` returned at the final iterate (so callers avoid a re-evaluation).
    """
    if a > b:
        a, b = b, a
        fa, fb = fb, fa
    pa = pb = None
    if fa is None:
        fa, _, pa = fdf(a)
    if fb is None:
        fb, _, pb = fdf(b)
    if fa == 0.0:
        return a, pa if pa is not None else fdf(a)[2]
    if fb == 0.0:
        return b, pb if pb is not None else fdf(b)[2]
    if fa * fb > 0.0:
        raise BracketFailure("no sign change on bracket", a=a, b=b, fa=fa, fb=fb)
    # orient so that f(lo) < 0 < f(hi)
    lo, hi = (a, b) if fa < 0 else (b, a)
    x = 0.5 * (a + b) if x0 is None or not (min(a, b) < x0 < max(a, b)) else x0
    dx_old = abs(b - a)
    dx = dx_old
    f, df, payload = fdf(x)
    for _ in range(maxiter):
        if f == 0.0:
            return x, payload
        if f < 0:
            lo = x
        else:
            hi = x
        newton_ok = df != 0.0 and math.isfinite(df)
        if newton_ok:
            x_new = x - f / df
            newton_ok = (min(lo, hi) < x_new < max(lo, hi)) and abs(f / df) < 0.5 * dx_old
        dx_old = dx
        if newton_ok:
            dx = abs(f / df)
            x = x_new
        else:
            x = 0.5 * (lo + hi)
            dx = 0.5 * abs(hi - lo)
        f, df, payload = fdf(x)
        if dx <= rtol * abs(x) + atol or abs(hi - lo) <= rtol * abs(x) + atol:
            return x, payload
    raise BracketFailure("root refinement did not converge", a=a, b=b, x=x, f=f)
