import math

import numpy as np
import pytest

from hill import dirichlet_eigenvalues, h_plus_minus, potential_bounds
from hill.errors import UnstableResidue
from hill.herglotz import (GridSpec, complex_pair, hill_residues, lemma2_suite, principal_instance,
                           residue_at, verify_herglotz)

PI2 = math.pi**2


def test_identity_is_herglotz():
    g = GridSpec(-3, 3, 1e-3, 10)
    rep = verify_herglotz(lambda z: z, g)
    assert rep.verdict and rep.min_signed_imag == pytest.approx(1e-3)
    assert rep.n_points >= 2000


def test_minus_inverse_is_herglotz():
    assert verify_herglotz(lambda z: -1 / z, GridSpec(-3, 3)).verdict


def test_square_fails_on_left_half():
    rep = verify_herglotz(lambda z: z * z, GridSpec(-2, -1, 0.01, 1))
    assert not rep.verdict and rep.min_signed_imag < 0


def test_square_passes_on_right_half():
    assert verify_herglotz(lambda z: z * z, GridSpec(1, 2, 0.01, 1)).verdict


def test_asymmetric_function_fails():
    rep = verify_herglotz(lambda z: z + 1j * 1e-6, GridSpec(-1, 1))
    assert not rep.verdict and rep.symmetry_defect > 1e-10


def test_evaluation_failures_are_counted():
    def f(z):
        z = np.asarray(z)
        if z.ndim:
            raise RuntimeError("scalar only")
        if abs(z.real) < 0.05:
            raise ZeroDivisionError
        return z
    rep = verify_herglotz(f, GridSpec(-1, 1, 0.1, 1, n_re=41, n_im_linear=2))
    assert rep.n_failures > 0 and not rep.verdict
    assert len(rep.failed_points) == rep.n_failures


def test_imag_levels_refine_toward_axis():
    lv = GridSpec(0, 1, 1e-3, 10).imag_levels()
    assert lv[0] == 1e-3 and 2e-3 in lv and 4e-3 in lv and lv[-1] == 10


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(0, 1, 0.0, 1)


def test_residue_textbook_pole():
    est = residue_at(lambda z: 1 / (z - 3), 3.0, 0.1)
    assert est.residue == pytest.approx(1, abs=1e-14)
    assert est.stability_defect <= 1e-6


def test_residue_of_remark_family():
    est = residue_at(lambda z: (z - 1) / z, 0.0, 0.5)
    assert est.residue == pytest.approx(-1, abs=1e-14)


def test_branch_point_is_unstable():
    with pytest.raises(UnstableResidue):
        residue_at(np.log, 0.0, 0.5)


def test_nearby_pole_triggers_radius_halving():
    est = residue_at(lambda z: 1 / z + 1 / (z - 0.6), 0.0, 0.8)
    assert est.residue == pytest.approx(1, abs=1e-10)
    assert est.circle_radius == 0.4


def test_free_residues_two_ways(free):
    mu = dirichlet_eigenvalues(free, 1)[0]
    for sign in (1, -1):
        est = residue_at(lambda z: h_plus_minus(free, z, sign, on_singular="nan"), mu.mu, 1.0)
        # closed forms: D(pi^2) = -2, d/dl s(1; l) at pi^2 = -1/(2 pi^2)
        formula = -(-2 + 2 * sign) / (-1 / (2 * PI2))
        assert est.residue.real == pytest.approx(formula, abs=1e-8)


def test_hill_residue_table(kp):
    rows = hill_residues(kp, dirichlet_eigenvalues(kp, 4))
    assert len(rows) == 8
    for r in rows:
        assert r["consistent"], r
        if r["pole"]:
            assert r["residue_contour"] < 0 and r["rel_diff"] <= 1e-7


def test_lemma2_vacuous_case():
    m = lambda x: (np.asarray(x), np.ones_like(x), np.zeros_like(x))
    n = lambda x: (np.ones_like(x), np.zeros_like(x))
    rep = lemma2_suite(m, n, (-2, 2), -1, 1, [])
    assert rep.passed
    assert rep.items["b"].checked > 0
    assert rep.items["a"].notes and rep.items["c"].notes and rep.items["d"].notes


def test_lemma2_detects_wrong_sign():
    m = lambda x: (-np.asarray(x), -np.ones_like(x), np.zeros_like(x))
    n = lambda x: (np.ones_like(x), np.zeros_like(x))
    rep = lemma2_suite(m, n, (-2, 2), -1, 1, [])
    assert not rep.items["b"].passed


def test_lemma2_rejects_bad_input():
    m = lambda x: (x, x, x)
    with pytest.raises(ValueError):
        lemma2_suite(m, m, (0, 1), 1, 0, [])
    with pytest.raises(ValueError):
        lemma2_suite(m, m, (0, 1), 0, 1, [2.0])


def _suite(Q, convention, hi, n_zeros=None):
    mh, nh = principal_instance(Q, convention)
    zeros = [m.mu for m in dirichlet_eigenvalues(Q, 8) if m.mu < hi]
    if n_zeros:
        zeros = zeros[:n_zeros]
    return lemma2_suite(mh, nh, (-5, hi), -2.0, 2.0, zeros)


def test_lemma2_free_negated_pair(free):
    # m = -D, n = -s(1; .) on [-5, 100]
    rep = _suite(free, "negated", 100.0)
    fired = [x["critical_point"] for x in rep.items["e"].notes if x["level"]]
    assert fired == pytest.approx([PI2, 4 * PI2, 9 * PI2], rel=1e-8)
    assert rep.passed, {k: v.failures[:1] for k, v in rep.items.items() if not v.passed}


def test_lemma2_free_weyl_pair(free):
    rep = _suite(free, "weyl", 100.0)
    assert rep.passed
    fired = [x["critical_point"] for x in rep.items["e"].notes if x["level"]]
    assert fired == pytest.approx([PI2, 4 * PI2, 9 * PI2], rel=1e-8)


def test_lemma2_kp_negated_pair(kp):
    mus = dirichlet_eigenvalues(kp, 4)
    rep = _suite(kp, "negated", mus[2].mu + 1.0)
    assert rep.passed, {k: v.failures[:1] for k, v in rep.items.items() if not v.passed}


def test_lemma2_kp_weyl_pair(kp):
    mus = dirichlet_eigenvalues(kp, 4)
    assert _suite(kp, "weyl", mus[2].mu + 1.0).passed


def test_principal_quotients_are_herglotz(kp):
    lo, hi = potential_bounds(kp)
    g = GridSpec(lo - 5, hi + 150, n_re=60)
    m, n = complex_pair(kp, "weyl")
    for a in (-2.0, 2.0):
        assert verify_herglotz(lambda z: (m(z) - a) / n(z), g).verdict
    m, n = complex_pair(kp, "negated")
    assert not verify_herglotz(lambda z: (m(z) - 2.0) / n(z), g).verdict


def test_principal_instance_rejects_unknown_convention(kp):
    with pytest.raises(ValueError):
        principal_instance(kp, "other")
