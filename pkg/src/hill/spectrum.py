"""Dirichlet eigenvalues, band edges and closed-gap classification.

Conventions
-----------
Band 0 is the lowest band and lies below the first Dirichlet eigenvalue
``mu_1``; band ``n >= 1`` lies in ``[mu_n, mu_(n+1)]``.  Gap ``n`` separates
band ``n-1`` from band ``n`` and contains ``mu_n``.  Inside band ``n`` the
discriminant moves monotonically with direction ``(-1)**(n+1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._roots import safeguarded_newton
from .errors import BracketFailure, InconsistentClassification, InvariantViolation
from .fundamental import DEFAULT_OPTIONS, IntegratorOptions, monodromy, solution_at
from .potential import PotentialSpec, potential_bounds

PI2 = math.pi ** 2
LEVEL_RTOL = 1e-8      # |D(e)| = 2 within LEVEL_RTOL * (1 + |e|)
CLOSED_RTOL = 1e-6     # tol_closed = CLOSED_RTOL * (1 + |mu|)
NEAR_CLOSED_FACTOR = 10.0


def tol_level(lam: float) -> float:
    return LEVEL_RTOL * (1.0 + abs(lam))


def tol_closed(mu: float) -> float:
    return CLOSED_RTOL * (1.0 + abs(mu))


@dataclass(frozen=True)
class DirichletEigenvalue:
    index: int
    mu: float
    s1_derivative: float
    delta_at_mu: float
    delta_p_at_mu: float
    delta_pp_at_mu: float


@dataclass(frozen=True)
class GapClassification:
    closed: bool
    closure_type: str  # none | periodic | antiperiodic
    c1p: float = float("nan")
    near_closed: bool = False

    def __iter__(self):
        yield self.closed
        yield self.closure_type


@dataclass(frozen=True)
class Band:
    index: int
    alpha: float
    beta: float


@dataclass(frozen=True)
class Gap:
    index: int
    left: float
    right: float
    closed: bool
    closure_type: str

    @property
    def width(self) -> float:
        return self.right - self.left


@dataclass
class BandStructure:
    bands: list[Band]
    gaps: list[Gap]
    dirichlet: list[DirichletEigenvalue]
    lambda_range: tuple[float, float]
    warnings: list[str] = field(default_factory=list)
    energy_scale: float = 1.0

    def validate(self, Q: PotentialSpec | None = None, opts: IntegratorOptions = DEFAULT_OPTIONS,
                 method: str = "auto") -> None:
        """Check structural invariants; with ``Q`` also ``|D| = 2`` at the edges.

        ``Q`` must be given in internal units, matching ``energy_scale == 1``.
        """
        problems = []
        mus = [d.mu for d in self.dirichlet]
        if any(b <= a for a, b in zip(mus, mus[1:])):
            problems.append("Dirichlet eigenvalues not strictly increasing")
        for band in self.bands:
            if not band.alpha < band.beta:
                problems.append(f"band {band.index}: alpha >= beta")
            n = band.index
            if n >= 1 and not mus[n - 1] <= band.alpha:
                problems.append(f"band {n}: mu_{n} > alpha_{n}")
            if n < len(mus) and not band.beta <= mus[n]:
                problems.append(f"band {n}: beta_{n} > mu_{n + 1}")
        for b1, b2 in zip(self.bands, self.bands[1:]):
            if not b1.beta <= b2.alpha:
                problems.append(f"bands {b1.index} and {b2.index} overlap")
        for gap in self.gaps:
            if gap.closed and (gap.width != 0.0 or gap.closure_type not in ("periodic", "antiperiodic")):
                problems.append(f"gap {gap.index}: closed gap must have zero width and a closure type")
            if not gap.closed and gap.closure_type != "none":
                problems.append(f"gap {gap.index}: open gap with closure type")
            if gap.width < 0:
                problems.append(f"gap {gap.index}: negative width")
        if Q is not None and not problems:
            edges = np.array([e for b in self.bands for e in (b.alpha, b.beta)]) * self.energy_scale
            delta = monodromy(Q, edges, opts, method).delta.real
            bad = np.abs(np.abs(delta) - 2.0) > LEVEL_RTOL * (1.0 + np.abs(edges))
            for e, d in zip(edges[bad], delta[bad]):
                problems.append(f"edge {e!r}: |D| - 2 = {abs(d) - 2:.3e}")
        if problems:
            raise InvariantViolation("band structure invariants violated", problems=problems,
                                     structure=self.to_dict())

    def scaled(self, factor: float) -> "BandStructure":
        """Copy with every spectral value divided by ``factor``."""
        f = 1.0 / factor
        return BandStructure(
            bands=[replace(b, alpha=b.alpha * f, beta=b.beta * f) for b in self.bands],
            gaps=[replace(g, left=g.left * f, right=g.right * f) for g in self.gaps],
            dirichlet=[replace(d, mu=d.mu * f, s1_derivative=d.s1_derivative * factor**1.5,
                               delta_p_at_mu=d.delta_p_at_mu * factor,
                               delta_pp_at_mu=d.delta_pp_at_mu * factor**2) for d in self.dirichlet],
            lambda_range=(self.lambda_range[0] * f, self.lambda_range[1] * f),
            warnings=list(self.warnings),
            energy_scale=self.energy_scale * factor,
        )

    def in_original_units(self, Q: PotentialSpec) -> "BandStructure":
        """Express an internal-unit structure in the units of ``Q``'s document."""
        return self.scaled(Q.energy_scale / self.energy_scale)

    def to_dict(self) -> dict:
        return {
            "bands": [asdict(b) for b in self.bands],
            "gaps": [dict(asdict(g), width=g.width) for g in self.gaps],
            "dirichlet": [asdict(d) for d in self.dirichlet],
            "lambda_range": list(self.lambda_range),
            "warnings": list(self.warnings),
            "energy_scale": self.energy_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BandStructure":
        return cls(
            bands=[Band(**b) for b in d["bands"]],
            gaps=[Gap(**{k: v for k, v in g.items() if k != "width"}) for g in d["gaps"]],
            dirichlet=[DirichletEigenvalue(**x) for x in d["dirichlet"]],
            lambda_range=tuple(d["lambda_range"]),
            warnings=list(d.get("warnings", [])),
            energy_scale=d.get("energy_scale", 1.0),
        )


# ---------------------------------------------------------------------------

def _mono_real(Q, lam, opts, method):
    d = monodromy(Q, float(lam), opts, method)
    return d


def _dirichlet_record(n, mu, d) -> DirichletEigenvalue:
    return DirichletEigenvalue(index=n, mu=float(mu), s1_derivative=float(d.d_s1.real),
                               delta_at_mu=float(d.delta.real), delta_p_at_mu=float(d.delta_p.real),
                               delta_pp_at_mu=float(d.delta_pp.real))


def dirichlet_eigenvalues(Q: PotentialSpec, n_max: int, opts: IntegratorOptions = DEFAULT_OPTIONS,
                          method: str = "auto", max_tries: int = 6) -> list[DirichletEigenvalue]:
    """The first ``n_max`` zeros of ``lambda -> s(1; lambda)``.

    Zeros are bracketed by scanning a grid uniform in ``sqrt(lambda - qmin)``
    (spacing pi/8, halved on failure) and must fall in the comparison windows
    ``[qmin + n^2 pi^2, qmax + n^2 pi^2]``; each is then refined by
    safeguarded Newton iteration on ``s(1; .)`` to relative accuracy 1e-11
    or better.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    qmin, qmax = potential_bounds(Q)
    width = qmax - qmin
    k_lo = math.sqrt(max(PI2 - 0.5, 0.25))
    hi_extra = 0.0
    density = 8
    scan = None
    for attempt in range(max_tries):
        k_hi = math.sqrt(width + n_max**2 * PI2 + 0.5 + hi_extra)
        nk = int(math.ceil((k_hi - k_lo) / (math.pi / density))) + 1
        lam = qmin + np.linspace(k_lo, k_hi, nk) ** 2
        s = monodromy(Q, lam, opts, method).s1.real
        scan = {"lambda": lam, "s1": s}
        sgn = np.where(s >= 0, 1, -1)
        idx = np.nonzero(sgn[:-1] != sgn[1:])[0]
        ok = sgn[0] > 0 and len(idx) >= n_max
        if ok:
            for n, i in enumerate(idx[:n_max], start=1):
                w_lo, w_hi = qmin + n * n * PI2, qmax + n * n * PI2
                if lam[i + 1] < w_lo - 1e-9 * (1 + abs(w_lo)) or lam[i] > w_hi + 1e-9 * (1 + abs(w_hi)):
                    ok = False
                    break
        if ok:
            break
        density *= 2
        hi_extra += width + 1.0
    else:
        raise BracketFailure("could not isolate Dirichlet eigenvalues", n_max=n_max,
                             scan_lambda=scan["lambda"], scan_s1=scan["s1"])

    def fdf(x):
        d = _mono_real(Q, x, opts, method)
        return d.s1.real, d.d_s1.real, d

    out = []
    for n, i in enumerate(idx[:n_max], start=1):
        mu, d = safeguarded_newton(fdf, lam[i], lam[i + 1], fa=s[i], fb=s[i + 1], rtol=1e-13)
        w_lo, w_hi = qmin + n * n * PI2, qmax + n * n * PI2
        if not (w_lo - 1e-9 * (1 + abs(w_lo)) <= mu <= w_hi + 1e-9 * (1 + abs(w_hi))):
            raise BracketFailure(f"mu_{n} outside its comparison window", mu=mu, window=(w_lo, w_hi))
        out.append(_dirichlet_record(n, mu, d))
    return out


def classify_gap(Q: PotentialSpec, mu: DirichletEigenvalue, opts: IntegratorOptions = DEFAULT_OPTIONS
                 ) -> GapClassification:
    """Decide whether the gap containing ``mu`` is closed.

    A gap is closed when ``|D(mu)| = 2`` and ``|D'(mu)| <= tol_closed``; a
    closed gap at ``D = +2`` is periodic, at ``D = -2`` antiperiodic.  The
    verdict is cross-checked against ``c'(1; mu)`` from an independent ODE
    solve: at ``D(mu) = +-2`` one has ``c'(1; mu) = +-D'(mu) / s1_derivative``,
    so the same threshold is applied to ``|c'(1; mu)| * |s1_derivative|``.
    """
    m = mu.mu
    D, Dp, Dpp = mu.delta_at_mu, mu.delta_p_at_mu, mu.delta_pp_at_mu
    if abs(abs(D) - 2.0) > tol_level(m):
        return GapClassification(False, "none")
    tc = tol_closed(m)
    closed = abs(Dp) <= tc
    c1p = solution_at(Q, m, 1.0, 1.0, 0.0, opts)[1].real
    c_scaled = abs(c1p * mu.s1_derivative)
    closed_c = c_scaled <= tc
    if closed != closed_c and (abs(Dp) > NEAR_CLOSED_FACTOR * tc or c_scaled > NEAR_CLOSED_FACTOR * tc):
        raise InconsistentClassification(
            "D'(mu) and c'(1; mu) disagree on gap closure", mu=m, delta_p=Dp, c1p=c1p,
            s1_derivative=mu.s1_derivative, tol_closed=tc)
    if not closed:
        return GapClassification(False, "none", c1p, near_closed=abs(Dp) <= NEAR_CLOSED_FACTOR * tc)
    kind = "periodic" if D > 0 else "antiperiodic"
    if not D * Dpp < 0:
        raise InvariantViolation("closed gap with wrong curvature sign", mu=m, delta=D, delta_pp=Dpp)
    return GapClassification(True, kind, c1p)


def _find_edge(Q, sigma, level_shift, a, b, *, at_left, d_end, closed_end, opts, method):
    """Root of ``g = sigma*D + level_shift`` in ``[a, b]``, increasing through 0.

    ``at_left`` says which endpoint is the Dirichlet eigenvalue that may sit
    on the level set (``d_end`` holds its monodromy data, ``closed_end`` its
    gap verdict).
    """
    end = a if at_left else b

    def fdf(x):
        d = _mono_real(Q, x, opts, method)
        return sigma * d.delta.real + level_shift, sigma * d.delta_p.real, d

    if closed_end:
        return end
    g_end = sigma * d_end.delta.real + level_shift
    gp_end = sigma * d_end.delta_p.real
    tol = tol_level(end)
    if abs(g_end) <= tol:
        if gp_end > 0:
            return end
        # level set touched from the wrong side: the root is strictly inside
        step = max(1e-9 * (1 + abs(end)), 10 * tol / max(abs(gp_end), 1e-300))
        direction = 1.0 if at_left else -1.0
        while True:
            x = end + direction * step
            if not a < x < b:
                raise BracketFailure("could not step off the Dirichlet eigenvalue", end=end)
            gx = fdf(x)[0]
            if (gx < 0) if at_left else (gx > 0):
                break
            step *= 2
        if at_left:
            a = x
        else:
            b = x
    elif (g_end > 0) if at_left else (g_end < 0):
        raise InvariantViolation("discriminant on the wrong side at a Dirichlet eigenvalue",
                                 lam=end, g=g_end)
    root, _ = safeguarded_newton(fdf, a, b, rtol=1e-14, atol=1e-15)
    return float(root)


def band_edges(Q: PotentialSpec, n_bands: int, opts: IntegratorOptions = DEFAULT_OPTIONS,
               method: str = "auto", validate: bool = True) -> BandStructure:
    """Bands ``(alpha_n, beta_n)``, ``n < n_bands``, and the gaps between them.

    Double roots of ``D -+ 2`` at closed gaps are never root-finding targets:
    both adjacent edges are set to the Dirichlet eigenvalue.
    """
    if n_bands < 1:
        raise ValueError("n_bands must be at least 1")
    mus = dirichlet_eigenvalues(Q, n_bands + 1, opts, method)
    qmin, _ = potential_bounds(Q)
    warnings = []
    classes = []
    for mu in mus[:n_bands]:
        cls = classify_gap(Q, mu, opts)
        classes.append(cls)
        if cls.near_closed:
            warnings.append(f"gap at mu_{mu.index}={mu.mu:.12g} is near-closed: "
                            f"|D'|={abs(mu.delta_p_at_mu):.3e}, tol_closed={tol_closed(mu.mu):.3e}")
        sign_expected = -1.0 if mu.index % 2 else 1.0
        if np.sign(mu.delta_at_mu) != sign_expected or abs(mu.delta_at_mu) < 2 - 1e-9:
            raise InvariantViolation("Dirichlet eigenvalue violates the sign alternation",
                                     index=mu.index, delta=mu.delta_at_mu)
    mono = [_mono_real(Q, m.mu, opts, method) for m in mus]

    # lowest band: D decreases from above +2
    margin = 1.0
    while True:
        lam_low = qmin - margin
        if monodromy(Q, lam_low, opts, method).delta.real > 2.0:
            break
        margin *= 2
        if margin > 1e6:
            raise BracketFailure("no left bracket for the lowest band edge", qmin=qmin)

    bands, alphas = [], []
    for n in range(n_bands + 1):
        sigma = -1.0 if n % 2 == 0 else 1.0
        if n == 0:
            a, b = lam_low, mus[0].mu
            # plain bracket: no Dirichlet eigenvalue at the left end
            alpha = _plain_edge(Q, sigma, 2.0, a, b, opts, method)
        else:
            a, b = mus[n - 1].mu, mus[n].mu
            alpha = _find_edge(Q, sigma, 2.0, a, b, at_left=True, d_end=mono[n - 1],
                               closed_end=classes[n - 1].closed if n - 1 < len(classes) else False,
                               opts=opts, method=method)
        alphas.append(alpha)
        if n == n_bands:
            break
        closed_right = classes[n].closed
        beta = _find_edge(Q, sigma, -2.0, alpha, b, at_left=False, d_end=mono[n],
                          closed_end=closed_right, opts=opts, method=method)
        bands.append(Band(n, alpha, beta))

    gaps = []
    for n in range(1, n_bands + 1):
        cls = classes[n - 1]
        left = bands[n - 1].beta
        right = alphas[n]
        gaps.append(Gap(n, left, right, cls.closed, cls.closure_type))

    bs = BandStructure(bands=bands, gaps=gaps, dirichlet=mus, lambda_range=(lam_low, mus[-1].mu),
                       warnings=warnings, energy_scale=1.0)
    if validate:
        bs.validate(Q, opts, method)
    return bs


def _plain_edge(Q, sigma, level_shift, a, b, opts, method):
    def fdf(x):
        d = _mono_real(Q, x, opts, method)
        return sigma * d.delta.real + level_shift, sigma * d.delta_p.real, d
    root, _ = safeguarded_newton(fdf, a, b, rtol=1e-14, atol=1e-15)
    return float(root)


def in_spectrum(Q: PotentialSpec, lam, opts: IntegratorOptions = DEFAULT_OPTIONS, method: str = "auto"):
    """``|D(lambda)| <= 2`` (scalar or array)."""
    d = monodromy(Q, lam, opts, method).delta.real
    out = np.abs(d) <= 2.0
    return bool(out) if np.ndim(out) == 0 else out


def _check(name):
    return {"name": name, "passed": True, "checked": 0, "failures": []}


def _fail(item, **info):
    item["passed"] = False
    item["failures"].append(info)


def property_suite(Q: PotentialSpec, bs: BandStructure, opts: IntegratorOptions = DEFAULT_OPTIONS,
                   method: str = "auto", n_samples: int = 500, n_monotone: int = 50) -> dict:
    """Run the band-structure invariants against ``bs`` in internal units.

    Returns a mapping ``name -> {passed, checked, failures}``.  Two sign
    conventions for the band sign identity are reported side by side:
    ``sign_identity_positive`` tests ``s(1;l) D'(l) > 0`` and
    ``sign_identity_negative`` tests ``s(1;l) D'(l) < 0``.  The second is the
    one implied by ``h_+-`` being Herglotz with ``n = 1/m12 = s(1;.)``.
    """
    out = {}
    bands = bs.bands
    mus = bs.dirichlet
    widths = np.array([b.beta - b.alpha for b in bands])
    counts = np.maximum(1, np.round(n_samples * widths / widths.sum()).astype(int))
    lam = np.concatenate([np.linspace(b.alpha, b.beta, k + 2)[1:-1] for b, k in zip(bands, counts)])
    d = monodromy(Q, lam, opts, method)
    prod = (d.s1 * d.delta_p).real

    for name, ok in (("sign_identity_positive", prod > 0), ("sign_identity_negative", prod < 0),
                     ("derivative_nonvanishing", np.abs(d.delta_p.real) > 0)):
        item = _check(name)
        item["checked"] = int(lam.size)
        for x, p in zip(lam[~ok], prod[~ok]):
            _fail(item, lam=float(x), s1_times_delta_p=float(p))
        out[name] = item

    # an edge with |D| = 2 and small D' must sit on some mu_n
    item = _check("edge_localization")
    edges = np.array(sorted({e for b in bands for e in (b.alpha, b.beta)}))
    de = monodromy(Q, edges, opts, method)
    mu_arr = np.array([m.mu for m in mus])
    for e, D, Dp in zip(edges, de.delta.real, de.delta_p.real):
        if abs(abs(D) - 2) <= tol_level(e) and abs(Dp) <= tol_closed(e):
            item["checked"] += 1
            dist = float(np.min(np.abs(mu_arr - e)))
            if dist > 1e-6 * (1 + abs(e)):
                _fail(item, edge=float(e), delta_p=float(Dp), distance_to_mu=dist)
    out["edge_localization"] = item

    item = _check("dirichlet_alternation")
    for m1, m2 in zip(mus, mus[1:]):
        item["checked"] += 1
        if np.sign(m1.delta_at_mu) != -np.sign(m2.delta_at_mu):
            _fail(item, index=m1.index, delta=m1.delta_at_mu, next_delta=m2.delta_at_mu)
    for m in mus:
        if abs(m.delta_at_mu) < 2 - 1e-9:
            _fail(item, index=m.index, delta=m.delta_at_mu, reason="|D(mu)| < 2")
    out["dirichlet_alternation"] = item

    item = _check("closed_gap_curvature")
    for g in bs.gaps:
        if g.closed:
            m = mus[g.index - 1]
            item["checked"] += 1
            if not m.delta_at_mu * m.delta_pp_at_mu < 0:
                _fail(item, index=g.index, delta=m.delta_at_mu, delta_pp=m.delta_pp_at_mu)
    out["closed_gap_curvature"] = item

    item = _check("interlacing")
    for b in bands:
        item["checked"] += 1
        n = b.index
        lo_ok = n == 0 or mus[n - 1].mu <= b.alpha
        hi_ok = n >= len(mus) or b.beta <= mus[n].mu
        if not (lo_ok and hi_ok and b.alpha < b.beta):
            _fail(item, band=n, alpha=b.alpha, beta=b.beta)
    out["interlacing"] = item

    item = _check("band_monotone")
    for b in bands:
        item["checked"] += 1
        vals = monodromy(Q, np.linspace(b.alpha, b.beta, n_monotone), opts, method).delta.real
        steps = np.diff(vals)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            _fail(item, band=b.index)
    out["band_monotone"] = item
    return out
