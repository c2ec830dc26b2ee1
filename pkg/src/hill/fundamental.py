"""Fundamental solutions of -u'' + Q u = z u and their z-derivatives at x = 1.

``s`` and ``c`` are the solutions with ``s(0)=c'(0)=0`` and ``s'(0)=c(0)=1``.
Two independent routes are provided:

* :func:`integrate_fundamental` integrates the equation together with its
  first and second variational equations (any potential kind);
* :func:`transfer_matrix_piecewise` multiplies closed-form segment matrices
  (piecewise-constant and constant potentials only).

Both accept a scalar ``z`` or an array of ``z`` values.
"""

from __future__ import annotations

import math
import os
from collections import OrderedDict
from dataclasses import dataclass, fields

import numpy as np

from . import _dopri
from .errors import WrongKind
from .potential import PotentialSpec, potential_bounds


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-12
    max_steps: int = 10**6

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 100:
            raise ValueError("max_steps must be at least 100")

    @classmethod
    def from_env(cls) -> "IntegratorOptions":
        """Defaults, overridden by ``HILL_RTOL`` / ``HILL_ATOL`` when set."""
        kw = {}
        if os.environ.get("HILL_RTOL"):
            kw["rel_tol"] = float(os.environ["HILL_RTOL"])
        if os.environ.get("HILL_ATOL"):
            kw["abs_tol"] = float(os.environ["HILL_ATOL"])
        return cls(**kw)


DEFAULT_OPTIONS = IntegratorOptions()


@dataclass(frozen=True)
class MonodromyData:
    """Values at x = 1 and their first/second derivatives in z.

    Fields hold complex scalars or equally shaped complex arrays.
    """

    z: complex
    s1: complex
    s1p: complex
    c1: complex
    c1p: complex
    d_s1: complex
    d_s1p: complex
    d_c1: complex
    d_c1p: complex
    dd_s1: complex
    dd_s1p: complex
    dd_c1: complex
    dd_c1p: complex
    wronskian_defect: float

    @property
    def delta(self):
        return self.s1p + self.c1

    @property
    def delta_p(self):
        return self.d_s1p + self.d_c1

    @property
    def delta_pp(self):
        return self.dd_s1p + self.dd_c1

    def __getitem__(self, idx) -> "MonodromyData":
        """Select one spectral point (or a sub-batch) of a batched record."""
        return MonodromyData(**{f.name: _item(getattr(self, f.name), idx) for f in fields(self)})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _item(v, idx):
    out = np.asarray(v)[idx]
    return out.item() if np.ndim(out) == 0 else out


def _from_matrices(z, M, dM, ddM, scalar) -> MonodromyData:
    # columns: (c, s); rows: (value, x-derivative)
    vals = dict(
        s1=M[:, 0, 1], s1p=M[:, 1, 1], c1=M[:, 0, 0], c1p=M[:, 1, 0],
        d_s1=dM[:, 0, 1], d_s1p=dM[:, 1, 1], d_c1=dM[:, 0, 0], d_c1p=dM[:, 1, 0],
        dd_s1=ddM[:, 0, 1], dd_s1p=ddM[:, 1, 1], dd_c1=ddM[:, 0, 0], dd_c1p=ddM[:, 1, 0],
    )
    w = np.abs(vals["s1"] * vals["c1p"] - vals["s1p"] * vals["c1"] + 1.0)
    data = MonodromyData(z=z, wronskian_defect=w, **vals)
    return data[0] if scalar else data


# ---------------------------------------------------------------------------
# ODE route
# ---------------------------------------------------------------------------

def _scalar_potential(Q: PotentialSpec):
    if Q.kind == "constant":
        v = Q.value
        return lambda x: v
    if Q.kind == "fourier-cosine":
        a = Q.coefficients
        tau = 2.0 * math.pi

        def q(x):
            return a[0] + sum(a[k] * math.cos(tau * k * x) for k in range(1, len(a)))
        return q
    return lambda x: float(Q(x))


def _rhs_factory(qf, z: np.ndarray, levels: int):
    zc = z[:, None]

    def rhs(x, y):
        # y: (batch, ic, level, [value, derivative])
        f = np.empty_like(y)
        f[..., 0] = y[..., 1]
        qz = qf(x) - zc
        f[:, :, 0, 1] = qz * y[:, :, 0, 0]
        if levels > 1:
            f[:, :, 1, 1] = qz * y[:, :, 1, 0] - y[:, :, 0, 0]
            f[:, :, 2, 1] = qz * y[:, :, 2, 0] - 2.0 * y[:, :, 1, 0]
        return f
    return rhs


def _propagate(Q: PotentialSpec, z: np.ndarray, x_end: float, opts: IntegratorOptions, levels: int):
    """State at ``x_end`` for the batch ``z``; shape (batch, ic, level, 2)."""
    y = np.zeros((z.size, 2, levels, 2), dtype=complex)
    y[:, 0, 0, 1] = 1.0  # s: s(0)=0, s'(0)=1
    y[:, 1, 0, 0] = 1.0  # c: c(0)=1, c'(0)=0
    qmin, qmax = _bounds_cached(Q)
    omega = math.sqrt(float(np.max(np.abs(z))) + max(abs(qmin), abs(qmax)) + 1.0)
    steps = 0
    pieces = Q.smooth_pieces()
    if Q.kind == "piecewise-constant":
        rhs_list = [_rhs_factory(lambda x, v=v: v, z, levels) for v in Q.values]
    else:
        rhs_list = [_rhs_factory(_scalar_potential(Q), z, levels)] * (len(pieces) - 1)
    for a, b, rhs in zip(pieces, pieces[1:], rhs_list):
        if a >= x_end:
            break
        b = min(b, x_end)
        y, steps = _dopri.integrate(rhs, y, a, b, rtol=opts.rel_tol, atol=opts.abs_tol,
                                    max_steps=opts.max_steps, h0=min(b - a, 0.2 / omega),
                                    steps_used=steps)
    return y


_BOUNDS_CACHE: dict = {}


def _bounds_cached(Q: PotentialSpec):
    b = _BOUNDS_CACHE.get(Q)
    if b is None:
        b = _BOUNDS_CACHE[Q] = potential_bounds(Q)
    return b


_MONO_CACHE: "OrderedDict[tuple, MonodromyData]" = OrderedDict()
_MONO_CACHE_SIZE = 32


def _as_batch(z):
    scalar = np.ndim(z) == 0
    zb = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    if not np.all(np.isfinite(zb)):
        raise ValueError("spectral parameter must be finite")
    return zb, scalar


def integrate_fundamental(Q: PotentialSpec, z, opts: IntegratorOptions = DEFAULT_OPTIONS) -> MonodromyData:
    """Monodromy data from the variational ODE system.

    Integrates u'' = (Q-z)u, v'' = (Q-z)v - u, w'' = (Q-z)w - 2v from 0 to 1
    for both initial conditions with one adaptive step sequence, splitting
    at the nonsmooth points of ``Q``. For an array ``z`` the fields are
    arrays of the same (flattened) shape.
    """
    zb, scalar = _as_batch(z)
    key = (Q, opts, zb.tobytes())
    hit = _MONO_CACHE.get(key)
    if hit is None:
        y = _propagate(Q, zb, 1.0, opts, levels=3)
        # y[:, ic, level, k] -> matrix layout [row=k, col=ic] with ic 0->s, 1->c
        M = y[:, ::-1, 0, :].transpose(0, 2, 1)
        dM = y[:, ::-1, 1, :].transpose(0, 2, 1)
        ddM = y[:, ::-1, 2, :].transpose(0, 2, 1)
        hit = _from_matrices(zb, M, dM, ddM, scalar=False)
        _MONO_CACHE[key] = hit
        if len(_MONO_CACHE) > _MONO_CACHE_SIZE:
            _MONO_CACHE.popitem(last=False)
    else:
        _MONO_CACHE.move_to_end(key)
    return hit[0] if scalar else hit


def solution_at(Q: PotentialSpec, z, x: float, u0=1.0, up0=0.0,
                opts: IntegratorOptions = DEFAULT_OPTIONS):
    """``(u(x), u'(x))`` for the solution with ``u(0)=u0``, ``u'(0)=up0``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    zb, scalar = _as_batch(z)
    y = _propagate(Q, zb, float(x), opts, levels=1)
    u = u0 * y[:, 1, 0, 0] + up0 * y[:, 0, 0, 0]
    up = u0 * y[:, 1, 0, 1] + up0 * y[:, 0, 0, 1]
    if scalar:
        return complex(u[0]), complex(up[0])
    return u, up


# ---------------------------------------------------------------------------
# exact route for piecewise-constant potentials
# ---------------------------------------------------------------------------

_SERIES_RADIUS = 1.0
_NTERMS = 16
_FACT = [math.factorial(k) for k in range(2 * _NTERMS + 3)]


def _series(t, odd: bool):
    """sum (-t)^k / (2k+odd)! and its first two t-derivatives."""
    f = np.zeros_like(t)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    for k in reversed(range(_NTERMS)):
        c = (-1) ** k / _FACT[2 * k + odd]
        f = f * t + c if k < _NTERMS - 1 else np.full_like(t, c)
    # derivatives by explicit termwise sums (short, well-conditioned for |t| < 1)
    tk = np.ones_like(t)
    for k in range(1, _NTERMS):
        d1 = d1 + k * (-1) ** k / _FACT[2 * k + odd] * tk
        tk = tk * t
    tk = np.ones_like(t)
    for k in range(2, _NTERMS):
        d2 = d2 + k * (k - 1) * (-1) ** k / _FACT[2 * k + odd] * tk
        tk = tk * t
    return f, d1, d2


def entire_cs(t):
    """``C(t)=cos(sqrt t)``, ``S(t)=sin(sqrt t)/sqrt t`` and t-derivatives.

    Both are entire in ``t``; power series are used for ``|t| < 1`` where the
    closed forms of the derivatives cancel catastrophically.
    """
    t = np.asarray(t, dtype=complex)
    small = np.abs(t) < _SERIES_RADIUS
    C, C1, C2 = _series(t, 0)
    S, S1, S2 = _series(t, 1)
    big = ~small
    if np.any(big):
        tb = t[big]
        r = np.sqrt(tb)
        cb = np.cos(r)
        sb = np.sin(r) / r
        s1b = (cb - sb) / (2.0 * tb)
        C[big], S[big] = cb, sb
        C1[big], S1[big] = -sb / 2.0, s1b
        C2[big] = -s1b / 2.0
        S2[big] = -(sb / 2.0 + 3.0 * s1b) / (2.0 * tb)
    return C, C1, C2, S, S1, S2


def segment_matrices(length: float, height: float, z: np.ndarray):
    """Transfer matrix of one constant piece and its z-derivatives, (batch, 2, 2)."""
    l = length
    t = (z - height) * l * l
    C, C1, C2, S, S1, S2 = entire_cs(t)
    g, g1, g2 = t * S, S + t * S1, 2.0 * S1 + t * S2
    T = np.empty(z.shape + (2, 2), dtype=complex)
    dT = np.empty_like(T)
    ddT = np.empty_like(T)
    T[:, 0, 0] = T[:, 1, 1] = C
    T[:, 0, 1] = l * S
    T[:, 1, 0] = -g / l
    dT[:, 0, 0] = dT[:, 1, 1] = l**2 * C1
    dT[:, 0, 1] = l**3 * S1
    dT[:, 1, 0] = -l * g1
    ddT[:, 0, 0] = ddT[:, 1, 1] = l**4 * C2
    ddT[:, 0, 1] = l**5 * S2
    ddT[:, 1, 0] = -(l**3) * g2
    return T, dT, ddT


def transfer_matrix_piecewise(Q: PotentialSpec, z) -> MonodromyData:
    """Monodromy data as an ordered product of exact segment matrices."""
    if Q.kind not in ("piecewise-constant", "constant"):
        raise WrongKind(f"transfer matrices need a piecewise-constant potential, got {Q.kind!r}")
    zb, scalar = _as_batch(z)
    M = np.broadcast_to(np.eye(2, dtype=complex), zb.shape + (2, 2)).copy()
    dM = np.zeros_like(M)
    ddM = np.zeros_like(M)
    for length, height in Q.segments():
        T, dT, ddT = segment_matrices(length, height, zb)
        ddM = ddT @ M + 2.0 * (dT @ dM) + T @ ddM
        dM = dT @ M + T @ dM
        M = T @ M
    return _from_matrices(zb, M, dM, ddM, scalar)


def monodromy(Q: PotentialSpec, z, opts: IntegratorOptions = DEFAULT_OPTIONS,
              method: str = "auto") -> MonodromyData:
    """Dispatch to the exact route when available (``method='auto'``)."""
    if method == "auto":
        method = "transfer" if Q.kind in ("piecewise-constant", "constant") else "ode"
    if method == "transfer":
        return transfer_matrix_piecewise(Q, z)
    if method == "ode":
        return integrate_fundamental(Q, z, opts)
    raise ValueError(f"unknown method {method!r}")
