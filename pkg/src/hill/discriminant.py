"""Discriminant, Weyl matrix and the associated Herglotz functions.

With ``s1 = s(1;z)`` etc. the Weyl matrix of the period cell is::

    M(z) = 1/s1 * [[-c1, 1], [1, -s1p]]

and it maps boundary values ``(u(0), u(1))`` of a solution to
``(u'(0), -u'(1))``.  Its quadratic forms on ``(1, -1)`` and ``(1, 1)`` are
``h_+ = -(D + 2)/s1`` and ``h_- = -(D - 2)/s1`` where ``D`` is the
discriminant.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DirichletSingularity
from .fundamental import DEFAULT_OPTIONS, IntegratorOptions, monodromy
from .potential import PotentialSpec

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class DiscriminantValue:
    z: complex
    delta: complex
    delta_p: complex
    delta_pp: complex
    s1: complex
    d_s1: complex


@dataclass(frozen=True)
class WeylMatrix:
    z: complex
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def quadratic_form(self, xi):
        """``<M xi, xi>`` (conjugate-linear in the second slot)."""
        x1, x2 = np.conj(xi[0]), np.conj(xi[1])
        return (self.m11 * xi[0] + self.m12 * xi[1]) * x1 + (self.m21 * xi[0] + self.m22 * xi[1]) * x2

    def trace_ratio(self):
        """``(m11 + m22) / m12``, equal to ``-D(z)``."""
        return (self.m11 + self.m22) / self.m12


def discriminant(Q: PotentialSpec, z, opts: IntegratorOptions = DEFAULT_OPTIONS,
                 method: str = "auto") -> DiscriminantValue:
    """``D(z) = s'(1;z) + c(1;z)`` with its first two z-derivatives."""
    d = monodromy(Q, z, opts, method)
    return DiscriminantValue(z=d.z, delta=d.delta, delta_p=d.delta_p, delta_pp=d.delta_pp,
                             s1=d.s1, d_s1=d.d_s1)


def _check_singular(d, on_singular: str):
    bad = np.abs(d.s1) < SINGULAR_RTOL * (1.0 + np.abs(d.delta))
    if np.any(bad):
        if on_singular == "nan":
            return bad
        zs = np.atleast_1d(d.z)[np.atleast_1d(bad)]
        raise DirichletSingularity("s(1; z) vanishes numerically; z is a pole candidate",
                                   z=zs.tolist())
    return None


def h_plus_minus(Q: PotentialSpec, z, sign: int, opts: IntegratorOptions = DEFAULT_OPTIONS,
                 method: str = "auto", on_singular: str = "raise"):
    """``h_(+/-)(z) = -(D(z) +/- 2) / s(1;z)``; ``sign`` is +1 or -1.

    With ``on_singular='nan'`` points where ``s(1;z)`` vanishes numerically
    come back as NaN instead of raising :class:`DirichletSingularity`.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d = monodromy(Q, z, opts, method)
    bad = _check_singular(d, on_singular)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(d.delta + 2.0 * sign) / d.s1
    if bad is not None:
        h = np.where(bad, np.nan, h)
    return h


def weyl_matrix(Q: PotentialSpec, z, opts: IntegratorOptions = DEFAULT_OPTIONS,
                method: str = "auto", on_singular: str = "raise") -> WeylMatrix:
    d = monodromy(Q, z, opts, method)
    bad = _check_singular(d, on_singular)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d.s1
    if bad is not None:
        inv = np.where(bad, np.nan, inv)
    return WeylMatrix(z=d.z, m11=-d.c1 * inv, m12=inv, m21=inv, m22=-d.s1p * inv)


def m_n_pair(Q: PotentialSpec, z, opts: IntegratorOptions = DEFAULT_OPTIONS, method: str = "auto"):
    """``(m, n) = (-D(z), -s(1;z))``.

    Note that the Herglotz-compatible choice of ``n`` for the pair
    ``(m, n)`` is ``1/m12 = +s(1;z)``; see :mod:`hill.herglotz`.
    """
    d = monodromy(Q, z, opts, method)
    return -d.delta, -d.s1


GRID_CHUNK = 64


def _grid_chunk(args):
    Q, lam, opts, method = args
    d = discriminant(Q, lam, opts, method)
    return np.column_stack([lam, d.delta.real, d.delta_p.real, d.delta_pp.real, d.s1.real])


def discriminant_grid(Q: PotentialSpec, lam_min: float, lam_max: float, n: int,
                      opts: IntegratorOptions = DEFAULT_OPTIONS, jobs: int = 1,
                      method: str = "auto") -> np.ndarray:
    """Rows ``(lambda, D, D', D'', s1)`` on a uniform real grid.

    The grid is cut into fixed chunks of ``GRID_CHUNK`` points (each chunk
    shares one adaptive step sequence), and the chunks are distributed over
    ``jobs`` processes, so the output does not depend on ``jobs``.
    """
    if not lam_min < lam_max:
        raise ValueError("lambda_min must be smaller than lambda_max")
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    lam = np.linspace(lam_min, lam_max, n)
    chunks = [(Q, lam[i:i + GRID_CHUNK], opts, method) for i in range(0, n, GRID_CHUNK)]
    if jobs <= 1:
        parts = [_grid_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_grid_chunk, chunks))
    return np.vstack(parts)
