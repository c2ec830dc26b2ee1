import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hill import band_edges, discriminant, in_spectrum, parse_potential
from hill.errors import MeshTooCoarse, TruncationUnconverged
from hill.oracles import (
    JacobiCell,
    _block,
    _cell_samples,
    band_holes,
    band_set,
    bloch_band_edges,
    bloch_eigenvalues,
    bloch_matrix,
    chain_eigenvalues,
    fd_line_spectrum,
    fourier_coefficients,
    gap_intrusions,
    jacobi_discriminant,
    polyval,
    prop4_check,
)

from conftest import KP, MATHIEU

PI2 = math.pi**2


# --- Bloch ------------------------------------------------------------------

def test_bloch_free_periodic(free):
    assert bloch_eigenvalues(free, 0.0, 8, 3) == pytest.approx([0, 4 * PI2, 4 * PI2], abs=1e-12)


def test_bloch_free_antiperiodic(free):
    assert bloch_eigenvalues(free, math.pi, 8, 2) == pytest.approx([PI2, PI2], rel=1e-14)


def test_bloch_mathieu_quarter_quasimomentum(mathieu):
    lam = bloch_eigenvalues(mathieu, math.pi / 2, 16, 1)[0]
    assert abs(discriminant(mathieu, lam).delta.real) <= 1e-7


@pytest.mark.parametrize("doc", [KP, MATHIEU], ids=["kp", "mathieu"])
@pytest.mark.parametrize("theta", [0.0, 0.7, math.pi / 2, math.pi])
def test_bloch_matrix_hermitian(doc, theta):
    B = bloch_matrix(parse_potential(doc), theta, 12)
    assert B.entries.shape == (25, 25)
    assert B.hermitian_defect() <= 1e-14
    assert np.all(np.diag(B.entries).imag == 0)


def test_fourier_cosine_coefficients_exact(mathieu):
    q = fourier_coefficients(mathieu, 3)
    j = np.arange(-6, 7)
    expected = np.where(np.abs(j) == 1, 1.0, 0.0)
    assert np.allclose(q, expected, atol=1e-15)


def test_fourier_piecewise_mean(kp):
    q = fourier_coefficients(kp, 4)
    assert q[8] == pytest.approx(2.0)
    assert q[9] == pytest.approx(np.conj(q[7]))


def test_bloch_truncation_unconverged(kp):
    # a jump potential converges slowly in K; a single doubling from K=2 is not enough
    with pytest.raises(TruncationUnconverged):
        bloch_eigenvalues(kp, 0.3, 2, 3)


def test_bloch_consistency_twenty_pairs(mathieu):
    rng = np.random.default_rng(7)
    thetas = rng.uniform(0, math.pi, 10)
    checked = 0
    for theta in thetas:
        for lam in bloch_eigenvalues(mathieu, theta, 16, 2):
            d = discriminant(mathieu, lam).delta.real
            assert abs(d - 2 * math.cos(theta)) <= 1e-6
            checked += 1
    assert checked == 20


def test_bloch_band_edges_agree_with_shooting(mathieu):
    # Bloch accuracy is the 1e-7 doubling threshold; flat edges amplify level error
    ref = band_edges(mathieu, 3)
    ours = bloch_band_edges(mathieu, 3)
    for band, (lo, hi) in zip(ref.bands, ours):
        assert lo == pytest.approx(band.alpha, abs=1e-7)
        assert hi == pytest.approx(band.beta, abs=1e-7)


# --- finite differences -----------------------------------------------------

def test_fd_free_spectrum_nonnegative(free):
    eigs = fd_line_spectrum(free, 8, 256, cutoff=50)
    assert eigs.min() >= -1e-6
    assert eigs.max() <= 50
    # free levels are (2 pi k / N)^2, so the momenta sqrt(lambda) are evenly spaced
    assert np.max(np.diff(np.sqrt(np.clip(eigs, 0, None)))) <= 2 * math.pi / 8 + 1e-6


def test_fd_free_lowest_is_zero(free):
    for M in (32, 64, 128, 256):
        assert abs(fd_line_spectrum(free, 8, M, richardson=False)[0]) <= 1e-6


def test_fd_second_order_rate(free):
    # antiperiodic ground state: pi^2 - pi^4 / (12 M^2) + O(M^-4)
    errs = [abs(fd_line_spectrum(free, 4, M, richardson=False)[3] - PI2) for M in (32, 64, 128)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert ratios == pytest.approx([4, 4], rel=1e-2)


def test_fd_rejects_small_inputs(free):
    with pytest.raises(ValueError):
        fd_line_spectrum(free, 2, 64)
    with pytest.raises(ValueError):
        fd_line_spectrum(free, 8, 16)


def test_fd_mesh_too_coarse(kp):
    rough = parse_potential({"kind": "piecewise-constant", "breakpoints": [0, 0.01, 1],
                             "values": [5.0e5, 0.0]})
    with pytest.raises(MeshTooCoarse) as info:
        fd_line_spectrum(rough, 4, 32)
    assert info.value.diagnostics["defect"] > 1e-3
    fd_line_spectrum(kp, 8, 256)


@pytest.mark.parametrize("N", [4, 5, 6])
def test_block_reduction_matches_dense(kp, N):
    M = 32
    qs = _cell_samples(kp, M)
    n = N * M
    h2 = float(M) ** 2
    H = np.diag(2 * h2 + np.tile(qs, N)) - h2 * (np.eye(n, k=1) + np.eye(n, k=-1))
    H[0, -1] = H[-1, 0] = -h2
    dense = np.linalg.eigvalsh(H)
    blocks = fd_line_spectrum(kp, N, M, richardson=False)
    assert blocks == pytest.approx(dense, abs=1e-8 * h2)


def test_block_is_hermitian():
    A = _block(np.linspace(0, 1, 40), 0.9)
    assert np.max(np.abs(A - A.conj().T)) == 0


def test_fd_kp_no_gap_intrusion(kp):
    bs = band_edges(kp, 2)
    gap = bs.gaps[0]
    eigs = fd_line_spectrum(kp, 8, 256)
    assert not gap_intrusions(eigs, [(gap.left, gap.right)])


def test_fd_indicator_matches_in_spectrum(kp):
    bs = band_edges(kp, 4)
    edges = np.array([x for b in bs.bands for x in (b.alpha, b.beta)])
    eigs = fd_line_spectrum(kp, 8192, 64, cutoff=45)
    grid = np.linspace(0, 40, 400)
    grid = grid[np.min(np.abs(grid[:, None] - edges[None, :]), axis=1) > 5e-2]
    near = np.min(np.abs(grid[:, None] - eigs[None, :]), axis=1) <= 1e-2
    assert grid.size > 300
    assert np.array_equal(near, in_spectrum(kp, grid))


def test_gap_intrusions_and_holes_helpers():
    eigs = np.array([0.0, 0.2, 0.4, 1.5, 3.0])
    assert gap_intrusions(eigs, [(1.0, 2.0)]) == [{"gap": (1.0, 2.0), "eigenvalue": 1.5}]
    holes = band_holes(eigs, [(0.0, 3.0)], max_hole=1.0)
    assert [h["hole"] for h in holes] == [(0.4, 1.5), (1.5, 3.0)]


# --- Jacobi cells -----------------------------------------------------------

def test_jacobi_single_site_is_p():
    cell = JacobiCell(b=(0,), a=(1,))
    assert jacobi_discriminant(cell) == [0, 1]
    assert band_set(cell) == [pytest.approx((-2.0, 2.0))]


def test_jacobi_diagonal_shift():
    cell = JacobiCell(b=(3,), a=(1,))
    assert jacobi_discriminant(cell) == [-3, 1]
    assert band_set(cell) == [pytest.approx((1.0, 5.0))]


def test_jacobi_two_site_closed_form():
    coeffs = jacobi_discriminant(JacobiCell(b=(0, 4), a=(1, 1)))
    assert coeffs == [-2, -4, 1]
    assert all(isinstance(c, Fraction) for c in coeffs)


def test_jacobi_rejects_nonpositive_coupling():
    with pytest.raises(ValueError):
        JacobiCell(b=(0, 0), a=(1, 0))


def test_jacobi_float_input_gives_floats():
    coeffs = jacobi_discriminant(JacobiCell(b=(0.5,), a=(1.5,)))
    assert all(isinstance(c, float) for c in coeffs)
    assert coeffs == pytest.approx([-1 / 3, 2 / 3])


def _symbolic_discriminant(b, a):
    lam = sympy.Symbol("lam")
    P = sympy.eye(2)
    p = len(b)
    for i in range(p):
        T = sympy.Matrix([[(lam - b[i]) / sympy.Integer(a[i]), -sympy.Integer(a[i - 1]) / a[i]],
                          [1, 0]])
        P = T * P
    poly = sympy.Poly(sympy.expand(P.trace()), lam)
    return [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda p: st.tuples(
    st.lists(st.integers(-5, 5), min_size=p, max_size=p),
    st.lists(st.integers(1, 4), min_size=p, max_size=p))))
def test_jacobi_exact_against_symbolic(data):
    b, a = data
    assert jacobi_discriminant(JacobiCell(b=tuple(b), a=tuple(a))) == _symbolic_discriminant(b, a)


def test_band_set_matches_periodic_chain():
    cell = JacobiCell(b=(0, 0), a=(1, 2))
    bands = band_set(cell)
    eigs = chain_eigenvalues(cell, 2000, periodic=True)

    def inside(x):
        return min(0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi)) for lo, hi in bands)

    d1 = max(inside(x) for x in eigs)
    probe = np.concatenate([np.linspace(lo, hi, 400) for lo, hi in bands])
    d2 = float(np.max(np.min(np.abs(probe[:, None] - eigs[None, :]), axis=1)))
    assert max(d1, d2) <= 1e-2


def test_polyval_matches_fraction_coefficients():
    coeffs = jacobi_discriminant(JacobiCell(b=(1, 2, 3), a=(1, 2, 1)))
    x = 0.37
    exact = sum(c * Fraction(x) ** k for k, c in enumerate(coeffs))
    assert polyval(coeffs, x) == pytest.approx(float(exact), rel=1e-13)


# --- gap characterization ---------------------------------------------------

def test_prop4_outside_band():
    rep = prop4_check(JacobiCell(b=(0,), a=(1,)), (2.5, 3.5))
    assert rep["passed"]
    assert rep["agreement"] == rep["grid_points"]
    assert rep["hypothesis"]["interval_in_h0_gap"]


def test_prop4_two_site_internal_gap():
    rep = prop4_check(JacobiCell(b=(0, 4), a=(1, 1)), (-0.2, 4.2), n_grid=200)
    assert rep["passed"]
    assert rep["unexplained"] == 0
    assert rep["agreement"] >= 196
    assert rep["discriminant"] == ["-2", "-4", "1"]


def test_prop4_inside_band_flags_hypothesis():
    # (-1, 1) contains the decoupled eigenvalue 0, so the gap hypothesis is reported as violated
    rep = prop4_check(JacobiCell(b=(0,), a=(1,)), (-1.0, 1.0))
    assert rep["agreement"] == rep["grid_points"]
    assert rep["unexplained"] == 0
    assert not rep["hypothesis"]["interval_in_h0_gap"]


def test_prop4_rejects_empty_interval():
    with pytest.raises(ValueError):
        prop4_check(JacobiCell(b=(0,), a=(1,)), (1.0, 1.0))
