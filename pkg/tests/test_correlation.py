import numpy as np
import pytest

from xlmimo.correlation import (PHI_HALF_MAX, build_correlation_matrix,
                                correlation_entry_closed_form,
                                correlation_entry_farfield,
                                correlation_entry_quadrature,
                                dump_correlation_csv, eigen_factor,
                                load_correlation_csv)
from xlmimo.errors import DomainError, NumericalError
from xlmimo.scenario import ArrayGeometry

GEOM = ArrayGeometry(num_antennas=64, wavelength=0.15, spacing=0.075)
PHI = np.sqrt(3.0) * np.deg2rad(10.0)   # spread-matched half width, 17.3 deg


def rel_err(got, ref):
    return abs(got - ref) / max(abs(ref), 1e-300)


def test_diagonal_is_beta():
    for m in (-32, 0, 17):
        val = correlation_entry_closed_form(m, m, GEOM, 0.31, PHI, 55.0, 2.7)
        assert rel_err(val, 2.7) < 1e-14


def test_conjugate_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(25):
        m, n = rng.integers(-32, 32, size=2)
        angle = rng.uniform(-np.pi / 4, np.pi / 4)
        r = rng.uniform(40.0, 230.0)
        v_mn = correlation_entry_closed_form(int(m), int(n), GEOM, angle, PHI, r, 1.0)
        v_nm = correlation_entry_closed_form(int(n), int(m), GEOM, angle, PHI, r, 1.0)
        assert abs(v_mn - np.conj(v_nm)) < 1e-12


def test_closed_form_spec_example_frozen():
    # Frozen from the adaptive-quadrature oracle (epsabs 1e-13):
    # m=10, n=-5, r=40 m, angle=pi/6, phi = sqrt(3)*10 deg, lambda=0.15, d=lambda/2
    expected = 0.0022749343373306 + 0.0135824505032318j
    got = correlation_entry_closed_form(10, -5, GEOM, np.pi / 6, PHI, 40.0, 1.0)
    assert rel_err(got, expected) < 1e-6
    oracle = correlation_entry_quadrature(10, -5, GEOM, np.pi / 6, PHI, 40.0, 1.0,
                                          abs_tol=1e-12)
    assert rel_err(got, oracle) < 1e-6


@pytest.mark.parametrize("radius", [40.0, 230.0])
@pytest.mark.parametrize("angle", [-np.pi / 4, 0.0, np.pi / 4])
def test_closed_form_vs_quadrature_grid(radius, angle):
    pairs = [(-32, 31), (-32, -31), (-5, 4), (0, 1), (2, 2), (7, -7), (17, 3),
             (31, 30), (-1, 0), (12, -20)]
    for m, n in pairs:
        closed = correlation_entry_closed_form(m, n, GEOM, angle, PHI, radius, 1.0)
        oracle = correlation_entry_quadrature(m, n, GEOM, angle, PHI, radius, 1.0,
                                              abs_tol=1e-12)
        assert rel_err(closed, oracle) < 1e-6, (m, n, radius, angle)


def test_quadrature_beta_linearity():
    one = correlation_entry_quadrature(4, -2, GEOM, 0.2, PHI, 60.0, 1.0)
    two = correlation_entry_quadrature(4, -2, GEOM, 0.2, PHI, 60.0, 2.0)
    assert abs(two - 2.0 * one) < 1e-10


def test_quadrature_diagonal():
    val = correlation_entry_quadrature(9, 9, GEOM, -0.4, PHI, 100.0, 3.3)
    assert rel_err(val, 3.3) < 1e-10


def test_quadrature_matches_farfield_at_large_radius():
    # pairs with small |n^2 - m^2|: at r = 1e6 m the genuine Fresnel residual
    # scales as ~1.2e-7 per unit of |n^2 - m^2|
    for m, n in [(0, 1), (-3, 2), (5, -5), (2, -2), (-1, 2)]:
        quad_val = correlation_entry_quadrature(m, n, GEOM, 0.25, PHI, 1e6, 1.0,
                                                abs_tol=1e-12)
        far_val = correlation_entry_farfield(m, n, GEOM, 0.25, PHI, 1.0)
        assert rel_err(quad_val, far_val) < 1e-6, (m, n)


def test_exact_trig_exponent_is_a_model_diagnostic():
    # The quadratic-phase reduction behind the closed form deviates from the
    # exact-trigonometry integrand at the per-mille level even for adjacent
    # antennas; the 'exact' mode exists to measure that modeling gap.
    closed = correlation_entry_closed_form(1, 0, GEOM, 0.0, PHI, 40.0, 1.0)
    exact = correlation_entry_quadrature(1, 0, GEOM, 0.0, PHI, 40.0, 1.0,
                                         abs_tol=1e-12, exponent="exact")
    gap = rel_err(closed, exact)
    assert 1e-4 < gap < 5e-2


def test_farfield_point_source_limit():
    phi_tiny = 1e-9
    val = correlation_entry_farfield(6, -1, GEOM, 0.3, phi_tiny, 1.0)
    expected = np.exp(1j * (2 * np.pi / 0.15) * 7 * 0.075 * np.sin(0.3))
    assert abs(val - expected) < 1e-9


def test_farfield_diagonal():
    assert rel_err(correlation_entry_farfield(4, 4, GEOM, 0.1, PHI, 1.4), 1.4) < 1e-14


def test_closed_form_farfield_convergence():
    # entrywise absolute at unit beta (entries are bounded by beta; near the
    # sinc zeros of the far-field formula a ratio would be meaningless)
    geom = ArrayGeometry(num_antennas=64, wavelength=0.15, spacing=0.075)
    idx = geom.antenna_indices()
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    for angle in (-np.pi / 4, 0.0, np.pi / 4):
        closed = correlation_entry_closed_form(mm, nn, geom, angle, PHI, 1e6, 1.0)
        far = correlation_entry_farfield(mm, nn, geom, angle, PHI, 1.0)
        worst = np.max(np.abs(closed - far))
        assert worst <= 1e-4, angle


def test_degenerate_limit_continuity():
    # drive c -> 0 by shrinking the nominal angle: the closed form must track
    # the quadrature oracle at every point of the path (c sweeps through the
    # small-|c| branch switch on the way)
    for angle in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0]:
        val = correlation_entry_closed_form(1, 0, GEOM, angle, PHI, 40.0, 1.0)
        oracle = correlation_entry_quadrature(1, 0, GEOM, angle, PHI, 40.0, 1.0,
                                              abs_tol=1e-12)
        assert rel_err(val, oracle) < 1e-6, angle


def test_branch_switch_jump_below_tolerance():
    from xlmimo.correlation import _closed_form_from_coefficients
    for b in (0.5, 3.14, 50.0, 198.0):
        below = _closed_form_from_coefficients(1.0, b, 0.999e-12, PHI, 1.0)[0]
        above = _closed_form_from_coefficients(1.0, b, 1.001e-12, PHI, 1.0)[0]
        assert abs(below - above) / abs(above) < 1e-6, b


def test_phi_half_domain():
    with pytest.raises(DomainError):
        correlation_entry_closed_form(1, 0, GEOM, 0.0, 0.0, 40.0, 1.0)
    with pytest.raises(DomainError):
        correlation_entry_closed_form(1, 0, GEOM, 0.0, PHI_HALF_MAX * 1.01, 40.0, 1.0)
    with pytest.raises(DomainError):
        correlation_entry_closed_form(1, 0, GEOM, 0.0, PHI, -4.0, 1.0)


def test_build_matrix_properties():
    corr = build_correlation_matrix(GEOM, 0.4, PHI, 75.0, 0.8)
    mat = corr.matrix
    assert np.allclose(mat, mat.conj().T, atol=1e-12)
    target = GEOM.num_antennas * 0.8
    assert abs(np.trace(mat).real - target) < 1e-10 * target
    assert np.allclose(np.diag(mat).real, 0.8, rtol=1e-10)
    eigvals = np.linalg.eigvalsh(mat)
    assert eigvals.min() >= -1e-12 * eigvals.max()
    assert np.allclose(corr.factor @ corr.factor.conj().T, mat, atol=1e-10)


def test_build_matrix_closed_form_vs_quadrature_small():
    geom = ArrayGeometry(num_antennas=16, wavelength=0.15, spacing=0.075)
    corr = build_correlation_matrix(geom, -0.35, PHI, 40.0, 1.0)
    idx = geom.antenna_indices()
    worst = 0.0
    for i, m in enumerate(idx):
        for j, n in enumerate(idx):
            oracle = correlation_entry_quadrature(int(m), int(n), geom, -0.35, PHI,
                                                  40.0, 1.0, abs_tol=1e-12)
            worst = max(worst, rel_err(corr.matrix[i, j], oracle))
    assert worst < 1e-6


def test_sampling_factor_covariance_monte_carlo():
    geom = ArrayGeometry(num_antennas=8, wavelength=0.15, spacing=0.075)
    corr = build_correlation_matrix(geom, 0.2, PHI, 60.0, 1.0)
    rng = np.random.default_rng(11)
    n_draws = 10000
    u = (rng.standard_normal((n_draws, 8)) + 1j * rng.standard_normal((n_draws, 8))) / np.sqrt(2)
    samples = u @ corr.factor.T
    est = (samples.T @ samples.conj()) / n_draws
    diag = np.real(np.diag(corr.matrix))
    sigma = np.sqrt(np.outer(diag, diag) / n_draws)
    assert np.all(np.abs(est - corr.matrix) <= 3.0 * sigma)


def test_eigen_factor_rejects_indefinite():
    bad = np.diag([1.0, -0.5])
    with pytest.raises(NumericalError):
        eigen_factor(bad.astype(complex), clip_tol=1e-8, what="test matrix")


def test_dump_roundtrip(tmp_path):
    corr = build_correlation_matrix(
        ArrayGeometry(num_antennas=6, wavelength=0.15, spacing=0.075),
        0.1, PHI, 90.0, 0.5)
    path = tmp_path / "corr.csv"
    dump_correlation_csv(corr, path)
    mat, header = load_correlation_csv(path)
    assert int(header["M"]) == 6
    assert float(header["radius"]) == 90.0
    assert np.allclose(mat, corr.matrix, rtol=0, atol=0)
