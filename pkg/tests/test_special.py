import numpy as np
import pytest
from helpers import erf_taylor, j0_series

from xlmimo.special import bessel_j0, complex_erf, complex_erf_flagged, faddeeva_w


def test_erf_zero():
    assert complex_erf(0.0) == 0.0


def test_erf_one_vs_taylor_oracle():
    assert abs(complex_erf(1.0) - 0.8427007929497149) < 1e-13
    assert abs(complex_erf(1.0) - erf_taylor(1.0)) < 1e-13


@pytest.mark.parametrize("z", [0.3 + 0.7j, -1.2 + 0.4j, 2.0 - 2.0j, 3.5 + 0.1j, -0.2 - 3.0j])
def test_erf_vs_taylor_oracle_complex(z):
    assert abs(complex_erf(z) - erf_taylor(z)) < 1e-11 * max(1.0, abs(erf_taylor(z)))


def test_erf_conjugate_reflection():
    rng = np.random.default_rng(3)
    z = rng.uniform(-4, 4, 40) + 1j * rng.uniform(-4, 4, 40)
    vals = complex_erf(z)
    conj_vals = complex_erf(np.conj(z))
    assert np.allclose(conj_vals, np.conj(vals), rtol=1e-12, atol=1e-14)


def test_erf_odd():
    rng = np.random.default_rng(4)
    z = rng.uniform(-6, 6, 40) + 1j * rng.uniform(-3, 3, 40)
    assert np.allclose(complex_erf(-z), -complex_erf(z), rtol=1e-12, atol=1e-14)


def test_erf_mpmath_grid():
    mpmath = pytest.importorskip("mpmath")
    rng = np.random.default_rng(5)
    for _ in range(150):
        x, y = rng.uniform(-25, 25), rng.uniform(-20, 20)
        if y * y - x * x > 600:   # overflow region, checked separately
            continue
        ref = complex(mpmath.erf(mpmath.mpc(x, y)))
        got = complex(complex_erf(complex(x, y)))
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_erf_overflow_flagged():
    val, flag = complex_erf_flagged(40j)
    assert flag
    assert np.isfinite(val.real) and np.isfinite(val.imag)
    _, flag_ok = complex_erf_flagged(3.0 + 0.5j)
    assert not flag_ok


def test_faddeeva_large_argument_asymptotic():
    # w(z) ~ j/(sqrt(pi) z) (1 + 1/(2 z^2) + ...); the dropped term is ~3e-8 here
    z = 4000.0 + 10.0j
    approx = 1j / (np.sqrt(np.pi) * z)
    assert abs(faddeeva_w(z) - approx) < 1e-7 * abs(approx)


def test_j0_zero():
    assert bessel_j0(0.0) == 1.0


def test_j0_first_zero():
    assert abs(bessel_j0(2.4048255576957730)) < 1e-4  # first zero of J0
    assert abs(bessel_j0(2.4048255576957730)) < 1e-12  # far tighter in practice


def test_j0_even():
    for x in (0.3, 1.7, 5.0, 23.4):
        assert bessel_j0(-x) == bessel_j0(x)


def test_j0_vs_series_oracle():
    for x in np.linspace(0.0, 11.5, 47):
        assert abs(bessel_j0(x) - j0_series(x)) < 1e-12


def test_j0_accuracy_contract():
    scipy_special = pytest.importorskip("scipy.special")
    xs = np.linspace(0.0, 50.0, 2001)
    errs = [abs(bessel_j0(x) - scipy_special.j0(x)) for x in xs]
    assert max(errs) <= 1e-10


def test_j0_table_values():
    # frozen via 30-digit evaluation of the series
    assert abs(bessel_j0(3.4906585039886591) - (-0.378826131108485921)) < 1e-12
    assert abs(bessel_j0(0.6981317007977318) - 0.881814833155137158) < 1e-12
