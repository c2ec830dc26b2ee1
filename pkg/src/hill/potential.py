"""1-periodic real potentials.

A :class:`PotentialSpec` is built either directly or from a JSON document via
:func:`parse_potential`.  Whatever period the user declares, the stored
potential is normalized to period 1: with period ``T`` the stored function is
``T**2 * Q(T*y)`` and ``energy_scale = T**2`` converts internal spectral values
back to user units (``lambda_user = lambda_internal / energy_scale``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .errors import PotentialError

KINDS = ("constant", "fourier-cosine", "piecewise-constant", "tabulated")
INTERPOLATIONS = ("linear", "cubic-periodic")

_ALLOWED_FIELDS = {
    "constant": {"kind", "value", "declared_period"},
    "fourier-cosine": {"kind", "coefficients", "declared_period"},
    "piecewise-constant": {"kind", "breakpoints", "values", "declared_period"},
    "tabulated": {"kind", "samples", "interpolation", "declared_period"},
}


def _finite_tuple(values, what: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise PotentialError(f"{what} must be a list of real numbers") from exc
    if not all(math.isfinite(v) for v in out):
        raise PotentialError(f"{what} contains non-finite entries", values=list(values))
    return out


@dataclass(frozen=True)
class PotentialSpec:
    """Validated description of a period-1 real potential.

    Only the fields belonging to ``kind`` are meaningful. All coordinates and
    values are in internal (period-1) units.
    """

    kind: str
    value: float = 0.0
    coefficients: tuple[float, ...] = ()
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    samples: tuple[tuple[float, float], ...] = ()
    interpolation: str = "cubic-periodic"
    declared_period: float = 1.0
    _spline: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PotentialError(f"unknown potential kind {self.kind!r}", allowed=list(KINDS))
        if not (math.isfinite(self.declared_period) and self.declared_period > 0):
            raise PotentialError("declared_period must be a positive finite number")
        if self.kind == "constant":
            _finite_tuple([self.value], "value")
        elif self.kind == "fourier-cosine":
            _finite_tuple(self.coefficients, "coefficients")
            if len(self.coefficients) == 0:
                raise PotentialError("fourier-cosine needs at least one coefficient")
        elif self.kind == "piecewise-constant":
            bp = _finite_tuple(self.breakpoints, "breakpoints")
            _finite_tuple(self.values, "values")
            if len(bp) < 2 or bp[0] != 0.0 or bp[-1] != 1.0:
                raise PotentialError("breakpoints must start at 0 and end at the period",
                                     breakpoints=list(bp))
            if any(b <= a for a, b in zip(bp, bp[1:])):
                raise PotentialError("breakpoints must be strictly increasing", breakpoints=list(bp))
            if len(self.values) != len(bp) - 1:
                raise PotentialError("need exactly one value per segment",
                                     segments=len(bp) - 1, values=len(self.values))
        else:
            if self.interpolation not in INTERPOLATIONS:
                raise PotentialError(f"unknown interpolation {self.interpolation!r}")
            if len(self.samples) < 4:
                raise PotentialError("tabulated potentials need at least 4 samples",
                                     count=len(self.samples))
            xs = _finite_tuple([s[0] for s in self.samples], "sample abscissae")
            _finite_tuple([s[1] for s in self.samples], "sample values")
            if xs[0] < 0.0 or xs[-1] >= 1.0 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise PotentialError("sample abscissae must be strictly increasing in [0, period)")
            if self.interpolation == "cubic-periodic":
                x = np.array(xs + (xs[0] + 1.0,))
                q = np.array([s[1] for s in self.samples] + [self.samples[0][1]])
                object.__setattr__(self, "_spline", CubicSpline(x, q, bc_type="periodic"))

    @property
    def energy_scale(self) -> float:
        return self.declared_period ** 2

    # -- evaluation -----------------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    def smooth_pieces(self) -> tuple[float, ...]:
        """Points of ``[0, 1]`` between which the potential is smooth."""
        if self.kind == "piecewise-constant":
            return self.breakpoints
        if self.kind == "tabulated":
            xs = [s[0] for s in self.samples]
            return tuple(sorted({0.0, 1.0, *xs}))
        return (0.0, 1.0)

    def segments(self) -> list[tuple[float, float]]:
        """``(length, height)`` pairs for kinds with piecewise-constant values."""
        if self.kind == "constant":
            return [(1.0, self.value)]
        if self.kind == "piecewise-constant":
            bp = self.breakpoints
            return [(bp[i + 1] - bp[i], v) for i, v in enumerate(self.values)]
        raise PotentialError(f"kind {self.kind!r} is not piecewise constant")

    def to_document(self) -> dict:
        """Serialize in internal (period-1) units."""
        doc: dict[str, Any] = {"kind": self.kind}
        if self.kind == "constant":
            doc["value"] = self.value
        elif self.kind == "fourier-cosine":
            doc["coefficients"] = list(self.coefficients)
        elif self.kind == "piecewise-constant":
            doc["breakpoints"] = list(self.breakpoints)
            doc["values"] = list(self.values)
        else:
            doc["samples"] = [list(s) for s in self.samples]
            doc["interpolation"] = self.interpolation
        return doc


def _reduce(x):
    # x - floor(x) is exact for moderate |x|, so x and x+1 reduce identically
    # whenever x+1 is representable.
    return x - np.floor(x)


def evaluate(Q: PotentialSpec, x):
    """Evaluate ``Q`` at ``x`` (scalar or array); ``Q(x) = Q(x mod 1)``."""
    scalar = np.ndim(x) == 0
    r = _reduce(np.asarray(x, dtype=float))
    if Q.kind == "constant":
        out = np.full_like(r, Q.value)
    elif Q.kind == "fourier-cosine":
        a = Q.coefficients
        out = np.full_like(r, a[0])
        for k in range(1, len(a)):
            out = out + a[k] * np.cos(2.0 * np.pi * k * r)
    elif Q.kind == "piecewise-constant":
        idx = np.searchsorted(np.asarray(Q.breakpoints), r, side="right") - 1
        idx = np.clip(idx, 0, len(Q.values) - 1)
        out = np.asarray(Q.values)[idx]
    else:
        xs = np.array([s[0] for s in Q.samples])
        qs = np.array([s[1] for s in Q.samples])
        if Q.interpolation == "linear":
            out = np.interp(r, xs, qs, period=1.0)
        else:
            x0 = xs[0]
            out = Q._spline(_reduce(r - x0) + x0)
    return float(out) if scalar else out


def potential_bounds(Q: PotentialSpec) -> tuple[float, float]:
    """Lower and upper bounds of ``Q`` over one period."""
    if Q.kind == "constant":
        return (Q.value, Q.value)
    if Q.kind == "piecewise-constant":
        return (min(Q.values), max(Q.values))
    if Q.kind == "tabulated" and Q.interpolation == "linear":
        qs = [s[1] for s in Q.samples]
        return (min(qs), max(qs))
    if Q.kind == "tabulated":
        sp = Q._spline
        crit = sp.derivative().roots(extrapolate=False)
        cand = np.concatenate([crit, sp.x])
        vals = sp(cand)
        return (float(vals.min()), float(vals.max()))
    # trigonometric polynomial: dense scan, then polish the extreme cells
    n = 2048 * len(Q.coefficients)
    x = np.arange(n) / n
    q = evaluate(Q, x)
    lo, hi = float(q.min()), float(q.max())
    for sign, i in ((1.0, int(np.argmin(q))), (-1.0, int(np.argmax(q)))):
        res = minimize_scalar(lambda t: sign * evaluate(Q, t),
                              bounds=(x[i] - 1.0 / n, x[i] + 1.0 / n),
                              method="bounded", options={"xatol": 1e-14})
        v = float(evaluate(Q, res.x))
        lo, hi = min(lo, v), max(hi, v)
    return (lo, hi)


def parse_potential(document) -> PotentialSpec:
    """Build a :class:`PotentialSpec` from a JSON string, mapping, or path.

    Coordinates in the document (breakpoints, sample abscissae) refer to the
    declared period ``T``; they are divided by ``T`` and all potential values
    are multiplied by ``T**2``.
    """
    if isinstance(document, Path):
        document = document.read_text()
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise PotentialError(f"malformed potential document: {exc}") from exc
    if not isinstance(document, Mapping):
        raise PotentialError("potential document must be an object")
    kind = document.get("kind")
    if kind not in KINDS:
        raise PotentialError(f"unknown potential kind {kind!r}", allowed=list(KINDS))
    unknown = set(document) - _ALLOWED_FIELDS[kind]
    if unknown:
        raise PotentialError(f"unknown fields for kind {kind!r}: {sorted(unknown)}")

    T = document.get("declared_period", 1.0)
    if isinstance(T, bool) or not isinstance(T, (int, float)) or not math.isfinite(T) or T <= 0:
        raise PotentialError("declared_period must be a positive finite number")
    T = float(T)
    scale = T * T

    def need(name):
        if name not in document:
            raise PotentialError(f"kind {kind!r} requires field {name!r}")
        return document[name]

    if kind == "constant":
        (v,) = _finite_tuple([need("value")], "value")
        return PotentialSpec(kind, value=scale * v, declared_period=T)
    if kind == "fourier-cosine":
        coeffs = need("coefficients")
        if not isinstance(coeffs, list):
            raise PotentialError("coefficients must be a list")
        a = _finite_tuple(coeffs, "coefficients")
        return PotentialSpec(kind, coefficients=tuple(scale * c for c in a), declared_period=T)
    if kind == "piecewise-constant":
        bp, vals = need("breakpoints"), need("values")
        if not isinstance(bp, list) or not isinstance(vals, list):
            raise PotentialError("breakpoints and values must be lists")
        bp = _finite_tuple(bp, "breakpoints")
        if len(bp) < 2 or bp[0] != 0.0 or not math.isclose(bp[-1], T, rel_tol=1e-12):
            raise PotentialError("breakpoints must cover [0, period] exactly", breakpoints=list(bp))
        bpn = tuple(b / T for b in bp[:-1]) + (1.0,)
        v = _finite_tuple(vals, "values")
        return PotentialSpec(kind, breakpoints=bpn, values=tuple(scale * x for x in v), declared_period=T)
    samples = need("samples")
    if not isinstance(samples, list) or not all(
            isinstance(s, (list, tuple)) and len(s) == 2 for s in samples):
        raise PotentialError("samples must be a list of [x, q] pairs")
    xs = _finite_tuple([s[0] for s in samples], "sample abscissae")
    qs = _finite_tuple([s[1] for s in samples], "sample values")
    interp = document.get("interpolation", "cubic-periodic")
    return PotentialSpec(kind, samples=tuple((x / T, scale * q) for x, q in zip(xs, qs)),
                         interpolation=interp, declared_period=T)


def load_potential(path) -> PotentialSpec:
    return parse_potential(Path(path).read_text())
