import functools
import math

import numpy as np
import pytest

from hill import band_edges, classify_gap, dirichlet_eigenvalues, in_spectrum, parse_potential
from hill.oracles import bloch_band_edges, fd_dirichlet_eigenvalues
from hill.spectrum import BandStructure, property_suite

PI2 = math.pi**2


@functools.lru_cache(maxsize=None)
def edges(Q, n):
    return band_edges(Q, n)
KP_GAP1_WIDTH = 2.5454175966256205  # exact transfer-matrix path, pinned


def test_free_dirichlet(free):
    mus = [m.mu for m in dirichlet_eigenvalues(free, 3)]
    assert mus == pytest.approx([9.8696044011, 39.4784176044, 88.8264396098], abs=1e-9)


def test_constant_shift_dirichlet(const5):
    assert dirichlet_eigenvalues(const5, 1)[0].mu == pytest.approx(5 + PI2, rel=1e-12)


def test_kp_dirichlet_matches_fd_oracle(kp):
    ours = [m.mu for m in dirichlet_eigenvalues(kp, 2)]
    ref = fd_dirichlet_eigenvalues(kp, 2)
    assert ours == pytest.approx(list(ref), rel=1e-6)


def test_dirichlet_records(mathieu):
    mus = dirichlet_eigenvalues(mathieu, 5)
    assert all(a.mu < b.mu for a, b in zip(mus, mus[1:]))
    for m in mus:
        assert m.s1_derivative != 0
        assert abs(m.delta_at_mu) >= 2 - 1e-9


def test_free_bands(free):
    bs = band_edges(free, 3)
    expected = [(0, PI2), (PI2, 4 * PI2), (4 * PI2, 9 * PI2)]
    for b, (lo, hi) in zip(bs.bands, expected):
        assert b.alpha == pytest.approx(lo, abs=1e-12)
        assert b.beta == pytest.approx(hi, rel=1e-12)
    assert all(g.closed for g in bs.gaps)
    assert [g.closure_type for g in bs.gaps] == ["antiperiodic", "periodic", "antiperiodic"]


def test_constant_bands_shift(free, const5):
    a, b = band_edges(free, 3), band_edges(const5, 3)
    for x, y in zip(a.bands, b.bands):
        assert y.alpha == pytest.approx(x.alpha + 5, abs=1e-10)
        assert y.beta == pytest.approx(x.beta + 5, abs=1e-10)


def test_kp_first_gap_open_and_matches_bloch(kp):
    bs = band_edges(kp, 2)
    gap = bs.gaps[0]
    assert not gap.closed and gap.width > 0.1
    assert gap.width == pytest.approx(KP_GAP1_WIDTH, abs=1e-9)
    for b, (lo, hi) in zip(bs.bands, bloch_band_edges(kp, 2)):
        assert b.alpha == pytest.approx(lo, abs=1e-6)
        assert b.beta == pytest.approx(hi, abs=1e-6)


def test_classify_free_gaps(free):
    mus = dirichlet_eigenvalues(free, 2)
    c1, c2 = classify_gap(free, mus[0]), classify_gap(free, mus[1])
    assert tuple(c1) == (True, "antiperiodic") and mus[0].delta_pp_at_mu > 0
    assert tuple(c2) == (True, "periodic") and mus[1].delta_pp_at_mu < 0


def test_classify_kp_first_gap_open(kp):
    assert tuple(classify_gap(kp, dirichlet_eigenvalues(kp, 1)[0])) == (False, "none")


def test_in_spectrum_examples(free, kp):
    assert not in_spectrum(free, -1.0)
    assert in_spectrum(free, 1.0)
    g = band_edges(kp, 1).gaps[0]
    assert not in_spectrum(kp, 0.5 * (g.left + g.right))


def test_mathieu_near_closed_gap_is_reported(mathieu):
    bs = band_edges(mathieu, 4)
    assert not bs.gaps[1].closed
    assert any("mu_2" in w for w in bs.warnings)


def test_structure_round_trip(kp):
    bs = band_edges(kp, 3)
    again = BandStructure.from_dict(bs.to_dict())
    again.validate(kp)
    assert again.to_dict() == bs.to_dict()


def test_scaling_round_trip():
    Q = parse_potential({"kind": "piecewise-constant", "breakpoints": [0, 1.5, 3], "values": [1, 0],
                         "declared_period": 3})
    bs = band_edges(Q, 2).in_original_units(Q)
    assert bs.energy_scale == 9
    bs.validate(Q)


@pytest.mark.parametrize("name", ["sign_identity_negative", "derivative_nonvanishing", "edge_localization",
                                  "dirichlet_alternation", "closed_gap_curvature", "interlacing",
                                  "band_monotone"])
def test_property_suite(corpus_potential, name):
    bs = edges(corpus_potential, 4)
    item = property_suite(corpus_potential, bs)[name]
    assert item["passed"], item["failures"][:3]
    assert item["checked"] > 0


def test_interlacing_exact(corpus_potential):
    bs = edges(corpus_potential, 5)
    mus = [m.mu for m in bs.dirichlet]
    for b in bs.bands[1:]:
        assert mus[b.index - 1] <= b.alpha < b.beta <= mus[b.index]


def test_edges_on_level_set(corpus_potential):
    from hill import monodromy
    bs = edges(corpus_potential, 4)
    e = np.array([x for b in bs.bands for x in (b.alpha, b.beta)])
    d = monodromy(corpus_potential, e).delta.real
    assert np.all(np.abs(np.abs(d) - 2) <= 1e-8 * (1 + np.abs(e)))
