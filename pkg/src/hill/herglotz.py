"""Numerical certification of Herglotz structure.

A Herglotz function maps the upper half-plane into its closure and satisfies
``f(conj z) = conj f(z)``.  The tools here are falsification tests: a passing
report states the grid and tolerance it was obtained on, nothing more.

* :func:`verify_herglotz` samples a rectangle in the upper half-plane;
* :func:`residue_at` estimates residues by the trapezoidal rule on circles;
* :func:`lemma2_suite` checks the sign/ordering consequences that hold for a
  pair ``(m, n)`` whenever ``(m - a)/n`` and ``(m - b)/n`` are Herglotz.

For Hill's equation the natural pair is ``m = -D`` and ``n = 1/m12 = s(1;.)``
(see :func:`principal_instance`).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._roots import safeguarded_newton
from .errors import UnstableResidue
from .fundamental import DEFAULT_OPTIONS, IntegratorOptions, monodromy
from .potential import PotentialSpec


@dataclass(frozen=True)
class GridSpec:
    """Rectangle ``[re_min, re_max] x [im_min, im_max]`` in the upper half-plane.

    Imaginary levels are the union of a geometric ladder ``im_min * 2**k`` and
    ``n_im_linear`` equispaced levels, so the sampling refines toward the axis.
    """

    re_min: float
    re_max: float
    im_min: float = 1e-3
    im_max: float = 10.0
    n_re: int = 140
    n_im_linear: int = 4

    def __post_init__(self):
        if not self.im_min > 0:
            raise ValueError("im_min must be positive")
        if not (self.re_min < self.re_max and self.im_min <= self.im_max):
            raise ValueError("empty rectangle")
        if self.n_re < 1:
            raise ValueError("n_re must be positive")

    def imag_levels(self) -> np.ndarray:
        k = np.arange(0, 64)
        ladder = self.im_min * 2.0 ** k
        ladder = ladder[ladder <= self.im_max]
        lin = np.linspace(self.im_min, self.im_max, max(self.n_im_linear, 2))
        return np.unique(np.concatenate([ladder, lin]))

    def points(self) -> np.ndarray:
        re = np.linspace(self.re_min, self.re_max, self.n_re)
        im = self.imag_levels()
        return (re[None, :] + 1j * im[:, None]).ravel()


@dataclass
class HerglotzReport:
    grid: GridSpec
    n_points: int
    min_signed_imag: float
    argmin: complex
    symmetry_defect: float
    argmax_symmetry: complex
    tol: float
    n_failures: int = 0
    failed_points: list = field(default_factory=list)
    verdict: bool = False

    @property
    def verdict_str(self) -> str:
        return "pass" if self.verdict else "fail"

    def to_dict(self) -> dict:
        return {
            "grid": asdict(self.grid),
            "n_points": self.n_points,
            "min_signed_imag": self.min_signed_imag,
            "argmin": [self.argmin.real, self.argmin.imag],
            "symmetry_defect": self.symmetry_defect,
            "argmax_symmetry": [self.argmax_symmetry.real, self.argmax_symmetry.imag],
            "tol": self.tol,
            "n_failures": self.n_failures,
            "failed_points": [[z.real, z.imag] for z in self.failed_points],
            "verdict": self.verdict_str,
        }


def _evaluate(f, Z: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        try:
            vals = np.asarray(f(Z), dtype=complex)
            if vals.shape == Z.shape:
                return vals
        except Exception:
            pass
    out = np.empty(Z.shape, dtype=complex)
    for i, z in enumerate(Z):
        try:
            out[i] = complex(f(z))
        except Exception:
            out[i] = np.nan
    return out


def verify_herglotz(f, rect: GridSpec, tol: float = 1e-10, vectorized: bool = True) -> HerglotzReport:
    """Sample ``Im f >= -tol`` and ``|f(conj z) - conj f(z)| <= tol`` on ``rect``.

    ``f`` is called with an array of points when ``vectorized``; if that
    raises, points are evaluated one by one and those that raise or return a
    non-finite value are recorded as failures.  More than 1% failures fails
    the verdict.
    """
    Z = rect.points()
    up = _evaluate(f, Z, vectorized)
    down = _evaluate(f, np.conj(Z), vectorized)
    ok = np.isfinite(up) & np.isfinite(down)
    failed = Z[~ok]
    if not np.any(ok):
        return HerglotzReport(rect, Z.size, -math.inf, complex("nan"), math.inf, complex("nan"),
                              tol, int(failed.size), failed.tolist(), False)
    im = np.where(ok, up.imag, np.inf)
    i_min = int(np.argmin(im))
    sym = np.where(ok, np.abs(down - np.conj(up)), -np.inf)
    i_sym = int(np.argmax(sym))
    rep = HerglotzReport(
        grid=rect, n_points=int(Z.size), min_signed_imag=float(im[i_min]), argmin=complex(Z[i_min]),
        symmetry_defect=float(sym[i_sym]), argmax_symmetry=complex(Z[i_sym]), tol=tol,
        n_failures=int(failed.size), failed_points=failed.tolist(),
    )
    rep.verdict = (rep.min_signed_imag >= -tol and rep.symmetry_defect <= tol
                   and rep.n_failures <= 0.01 * rep.n_points)
    return rep


# ---------------------------------------------------------------------------
# residues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueEstimate:
    pole: float
    residue: complex
    circle_radius: float
    stability_defect: float


def _contour(f, pole, r, n):
    w = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(f(pole + r * w), dtype=complex)
    return np.mean(vals * r * w), float(np.max(np.abs(vals))) * r


def residue_at(f, pole: float, radius: float, n_points: int = 64, retries: int = 5,
               max_defect: float = 1e-6) -> ResidueEstimate:
    """``(1/2 pi i) \\oint f`` on the circle ``|z - pole| = radius``.

    ``f`` must accept an array of points.  The estimate at ``radius`` is
    compared with the one at ``radius/2``; the stability defect is their
    difference relative to ``max(|R|, radius * max|f|)`` (the latter is the
    natural noise scale when the singularity is removable).  On failure the
    radius is halved, up to ``retries`` times, before :class:`UnstableResidue`.
    """
    r = float(radius)
    history = []
    for _ in range(retries + 1):
        r1, s1 = _contour(f, pole, r, n_points)
        r2, s2 = _contour(f, pole, r / 2, n_points)
        scale = max(abs(r1), abs(r2), s1, s2)
        defect = abs(r1 - r2) / scale if scale > 0 else 0.0
        if not np.isfinite(defect):
            defect = math.inf
        history.append((r, defect))
        if defect <= max_defect:
            return ResidueEstimate(float(pole), complex(r1), r, float(defect))
        r /= 2
    raise UnstableResidue("residue estimate did not stabilize", pole=pole, history=history)


# ---------------------------------------------------------------------------
# Hill instance
# ---------------------------------------------------------------------------

def principal_instance(Q: PotentialSpec, convention: str = "weyl",
                       opts: IntegratorOptions = DEFAULT_OPTIONS, method: str = "auto"):
    """Real handles ``m(x) -> (m, m', m'')`` and ``n(x) -> (n, n')`` for Hill.

    ``m = -D``.  With ``convention='weyl'`` ``n = 1/m12 = s(1;.)``, which
    makes ``(m + 2)/n = h_-`` and ``(m - 2)/n = h_+`` Herglotz.  With
    ``convention='negated'`` ``n = -s(1;.)`` (the pair returned by
    :func:`hill.discriminant.m_n_pair`); then both quotients are
    anti-Herglotz and sign-sensitive conclusions flip.
    """
    if convention not in ("weyl", "negated"):
        raise ValueError("convention must be 'weyl' or 'negated'")
    sgn = 1.0 if convention == "weyl" else -1.0

    def m_handle(x):
        d = monodromy(Q, np.asarray(x, dtype=float), opts, method)
        return -d.delta.real, -d.delta_p.real, -d.delta_pp.real

    def n_handle(x):
        d = monodromy(Q, np.asarray(x, dtype=float), opts, method)
        return sgn * d.s1.real, sgn * d.d_s1.real

    return m_handle, n_handle


def complex_pair(Q: PotentialSpec, convention: str = "weyl",
                 opts: IntegratorOptions = DEFAULT_OPTIONS, method: str = "auto"):
    """Complex ``(m, n)`` evaluators matching :func:`principal_instance`."""
    sgn = 1.0 if convention == "weyl" else -1.0

    def m(z):
        return -monodromy(Q, z, opts, method).delta

    def n(z):
        return sgn * monodromy(Q, z, opts, method).s1

    return m, n


def hill_residues(Q: PotentialSpec, mus, opts: IntegratorOptions = DEFAULT_OPTIONS,
                  method: str = "auto", rel_floor: float = 1e-8) -> list[dict]:
    """Residues of ``h_+`` and ``h_-`` at the given Dirichlet eigenvalues.

    Each row compares the contour estimate with ``-(D(mu) +- 2)/s1_derivative``.
    A row is a genuine pole when the formula value exceeds ``rel_floor``
    times ``4/|s1_derivative|``; otherwise the singularity is removable.
    ``consistent`` means: negative and within ``1e-7`` of the formula for a
    pole, below the same floor for a removable singularity.
    """
    from .discriminant import h_plus_minus

    values = [m.mu for m in mus]
    rows = []
    for i, mu in enumerate(mus):
        neighbours = [abs(v - mu.mu) for j, v in enumerate(values) if j != i]
        radius = min([1.0] + [0.25 * d for d in neighbours])
        for sign in (1, -1):
            f = lambda z, s=sign: h_plus_minus(Q, z, s, opts, method, on_singular="nan")
            est = residue_at(f, mu.mu, radius)
            formula = -(mu.delta_at_mu + 2.0 * sign) / mu.s1_derivative
            scale = 4.0 / abs(mu.s1_derivative)
            pole = abs(formula) > rel_floor * scale
            rows.append({
                "index": mu.index, "mu": mu.mu, "sign": "+" if sign > 0 else "-",
                "residue_contour": est.residue.real, "residue_imag": est.residue.imag,
                "residue_formula": formula, "radius": est.circle_radius,
                "stability_defect": est.stability_defect, "pole": bool(pole),
                "rel_diff": abs(est.residue - formula) / max(abs(formula), rel_floor * scale),
                "scale": scale,
            })
            row = rows[-1]
            if pole:
                row["consistent"] = bool(row["residue_contour"] < 0 and row["rel_diff"] <= 1e-7)
            else:
                row["consistent"] = bool(abs(est.residue) <= rel_floor * scale)
    return rows


# ---------------------------------------------------------------------------
# (m, n) pair property suite
# ---------------------------------------------------------------------------

@dataclass
class SuiteItem:
    name: str
    passed: bool = True
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def fail(self, **info):
        self.passed = False
        self.failures.append(info)


@dataclass
class Lemma2Report:
    interval: tuple
    a: float
    b: float
    items: dict

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items.values())

    def to_dict(self) -> dict:
        return {"interval": list(self.interval), "a": self.a, "b": self.b, "passed": self.passed,
                "items": {k: asdict(v) for k, v in self.items.items()}}


def _scalar(handle, x):
    return tuple(float(np.asarray(v).ravel()[0]) for v in handle(np.array([x])))


def critical_points(m_handle, interval, n_scan: int = 2000, xtol: float = 1e-10):
    """Sign changes of ``m'`` on an ``n_scan``-point grid, refined to ``xtol``."""
    x = np.linspace(interval[0], interval[1], n_scan)
    _, mp, _ = m_handle(x)
    sgn = np.where(mp >= 0, 1, -1)
    out = []
    for i in np.nonzero(sgn[:-1] != sgn[1:])[0]:
        def fdf(t):
            _, d1, d2 = _scalar(m_handle, t)
            return d1, d2, None
        root, _ = safeguarded_newton(fdf, x[i], x[i + 1], fa=mp[i], fb=mp[i + 1],
                                     rtol=0.0, atol=xtol)
        out.append(float(root))
    return out


def lemma2_suite(m_handle, n_handle, interval, a: float, b: float, zeros_of_n,
                 n_samples: int = 2000, n_scan: int = 2000, level_tol: float | None = None,
                 deriv_floor: float = 1e-12) -> Lemma2Report:
    """Check items (a)-(e) for the pair ``(m, n)`` on ``interval``.

    ``m_handle(x)`` returns ``(m, m', m'')`` and ``n_handle(x)`` returns
    ``(n, n')`` for an array ``x``. Boundary cases are excluded from (b), (c)
    by the margin ``delta = 1e-6 (b - a)``.  In (e) ``m(x) = a`` is decided
    with ``level_tol``; the accompanying ``n(x) = 0`` is accepted within the
    distance a double root of ``m - a`` can move under a perturbation of
    ``level_tol``, i.e. ``|n| <= |n'| sqrt(2 level_tol / |m''|)``.
    """
    if not a < b:
        raise ValueError("need a < b")
    lo, hi = interval
    zeros = [float(z) for z in zeros_of_n]
    if any(not lo <= z <= hi for z in zeros) or zeros != sorted(zeros):
        raise ValueError("zeros_of_n must be sorted and inside the interval")
    delta = 1e-6 * (b - a)
    if level_tol is None:
        level_tol = 1e-9 * (1.0 + max(abs(a), abs(b)))
    items = {k: SuiteItem(k) for k in "abcde"}

    zarr = np.array(zeros) if zeros else np.zeros(0)
    if zeros:
        mz, mpz, _ = m_handle(zarr)
        nz, npz = n_handle(zarr)
    # (a) simple zeros
    for i, z in enumerate(zeros):
        items["a"].checked += 1
        if not abs(npz[i]) > deriv_floor:
            items["a"].fail(zero=z, n_prime=float(npz[i]))
    if not zeros:
        items["a"].notes.append("vacuous: no zeros of n in the interval")

    # (b) n m' > 0 where m is strictly inside (a, b)
    xs = np.linspace(lo, hi, n_samples)
    m, mp, _ = m_handle(xs)
    n, _ = n_handle(xs)
    inside = (m > a + delta) & (m < b - delta)
    prod = n * mp
    items["b"].checked = int(inside.sum())
    for x, p, mv in zip(xs[inside & ~(prod > 0)], prod[inside & ~(prod > 0)], m[inside & ~(prod > 0)]):
        items["b"].fail(x=float(x), n_times_mprime=float(p), m=float(mv))

    # (c) m(zero) outside (a, b)
    for i, z in enumerate(zeros):
        items["c"].checked += 1
        if a + delta < mz[i] < b - delta:
            items["c"].fail(zero=z, m=float(mz[i]))
    if not zeros:
        items["c"].notes.append("vacuous: no zeros of n in the interval")

    # (d) alternation across successive zeros
    for i in range(len(zeros) - 1):
        items["d"].checked += 1
        mu_v, nu_v = mz[i], mz[i + 1]
        ok = (mu_v <= a + delta and nu_v >= b - delta) or (mu_v >= b - delta and nu_v <= a + delta)
        if not ok:
            items["d"].fail(mu=zeros[i], nu=zeros[i + 1], m_mu=float(mu_v), m_nu=float(nu_v))
    if len(zeros) < 2:
        items["d"].notes.append("vacuous: fewer than two zeros")

    # (e) critical points of m on the level set {a, b}
    for x in critical_points(m_handle, interval, n_scan=n_scan):
        mv, _, mpp = _scalar(m_handle, x)
        nv, npv = _scalar(n_handle, x)
        level = "a" if abs(mv - a) <= level_tol else "b" if abs(mv - b) <= level_tol else None
        if level is None:
            items["e"].notes.append({"critical_point": x, "m": mv, "level": None})
            continue
        items["e"].checked += 1
        n_tol = abs(npv) * math.sqrt(2.0 * level_tol / max(abs(mpp), 1e-300))
        info = {"critical_point": x, "m": mv, "m_pp": mpp, "n": nv, "n_tol": n_tol, "level": level}
        items["e"].notes.append(info)
        if abs(nv) > n_tol:
            items["e"].fail(reason="n does not vanish", **info)
        if level == "a" and not mpp > 0:
            items["e"].fail(reason="m'' not positive at m = a", **info)
        if level == "b" and not mpp < 0:
            items["e"].fail(reason="m'' not negative at m = b", **info)
    return Lemma2Report((lo, hi), a, b, items)
