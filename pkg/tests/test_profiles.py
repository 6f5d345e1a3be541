import numpy as np
import pytest

from arlat.errors import InvalidModelError
from arlat.profiles import Constant, Cosine, Phased, PiecewiseLinear, as_profile, integrate


def test_constant_is_complex_and_vectorised():
    z = np.linspace(0, 1, 7)
    v = Constant(2.5)(z)
    assert v.dtype == complex and v.shape == z.shape
    assert np.all(v == 2.5)


def test_cosine_matches_formula():
    p = Cosine(1.0, 0.5, 2.0, 0.3)
    z = np.linspace(0, 3, 11)
    np.testing.assert_allclose(p(z), 1.0 + 0.5 * np.cos(2.0 * z + 0.3), rtol=0, atol=1e-15)
    assert p(0.0) == pytest.approx(1.0 + 0.5 * np.cos(0.3))


def test_cosine_at_zero_gives_base_plus_amplitude():
    assert Cosine(1.0, 1.0, 2.0, 0.0)(0.0) == 2.0


def test_piecewise_linear_interpolates_and_clamps():
    p = PiecewiseLinear(((0.0, 0.0), (1.0, 2.0 + 2j)))
    assert p(0.5) == pytest.approx(1.0 + 1j)
    assert p(-1.0) == 0.0
    assert p(5.0) == 2.0 + 2j


@pytest.mark.parametrize("samples", [((0.0, 1.0), (0.0, 2.0)), ((1.0, 1.0), (0.5, 2.0)), ()])
def test_piecewise_linear_rejects_bad_abscissae(samples):
    with pytest.raises(InvalidModelError):
        PiecewiseLinear(samples)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), "x"])
def test_non_finite_scalars_rejected(bad):
    with pytest.raises(InvalidModelError):
        Constant(bad)


def test_profiles_compare_by_value():
    assert Cosine(1, 1, 2, 0) == Cosine(1.0, 1.0, 2.0, 0.0)
    assert Constant(1) != Constant(1j)
    assert as_profile(3) == Constant(3)
    p = Cosine(1, 2)
    assert as_profile(p) is p


def test_conjugate_and_scaled():
    p = Cosine(1 + 1j, 2j, 1.0)
    z = np.linspace(0, 1, 5)
    np.testing.assert_allclose(p.conjugate()(z), np.conj(p(z)))
    np.testing.assert_allclose(p.scaled(3)(z), 3 * p(z))
    assert not p.is_real and Cosine(1, 2).is_real


def test_integrate_cosine_closed_form():
    # phi(z) = sin(2z)/2 for beta = cos(2z)
    z = np.linspace(0, 1, 101)
    phi = integrate(Cosine(0.0, 1.0, 2.0, 0.0), z)
    assert np.max(np.abs(phi - np.sin(2 * z) / 2)) <= 1e-10


def test_integrate_piecewise_linear_is_exact_across_kinks():
    p = PiecewiseLinear(((0.0, 0.0), (0.3, 3.0), (1.0, 0.0)))
    z = np.array([0.0, 0.3, 1.0, 2.0])
    np.testing.assert_allclose(integrate(p, z), [0.0, 0.45, 1.5, 1.5], atol=1e-13)


def test_integrate_rejects_negative_points():
    with pytest.raises(InvalidModelError):
        integrate(Constant(1), [-0.1])


def test_phased_modulus_and_conjugate():
    p = Phased(Constant(2.0), Constant(1.0), -1)
    z = np.linspace(0, 1, 9)
    np.testing.assert_allclose(p(z), 2 * np.exp(-1j * z), atol=1e-13)
    np.testing.assert_allclose(p.conjugate()(z), np.conj(p(z)), atol=1e-13)
