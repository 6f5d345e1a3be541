import math

import numpy as np
import pytest

from arlat import kernels
from arlat.errors import DomainError, InvalidInputError, NumericalOverflowError
from arlat.model import ChipSpec, build_chain, build_qubit, coupling_matrix
from arlat.profiles import Constant, Cosine, PiecewiseLinear
from arlat.propagator import IntegratorConfig, evolve, evolve_path, expm_oracle, propagator_matrix


def test_zero_generator_leaves_state():
    chip, _, _ = build_chain(3, 1.0, 0.0, 0.0)
    a0 = np.array([1, 2j, -3])
    np.testing.assert_array_equal(evolve(chip, a0), a0)


def test_scalar_phase():
    chip, _, _ = build_chain(2, 1.0, 1.0, 0.0)
    a = evolve(chip, [1, 0])
    assert a[0] == pytest.approx(np.exp(-1j), abs=1e-13)
    assert abs(a[0]) == pytest.approx(1.0, abs=1e-14)


def test_chain6_matches_expm(chain6):
    u = chain6["u"]
    m = coupling_matrix(chain6["chip"], 0.0)
    assert np.max(np.abs(u.matrix - expm_oracle(m))) <= 1e-10
    assert u.unitarity_error() <= 1e-8
    assert u.step == pytest.approx(1e-3)


def test_modulated_chain_unitary(modulated6):
    assert modulated6["u"].unitarity_error() <= 1e-8


def test_empty_span_is_identity():
    chip, _, _ = build_chain(4, 1.0, 1.0, 2.0)
    np.testing.assert_array_equal(propagator_matrix(chip, 0.4, 0.4).matrix, np.eye(4))


def test_composition():
    chip, _, _ = build_chain(5, 1.0, Cosine(1.0, 1.0, 2.0), 2.0)
    full = propagator_matrix(chip).matrix
    first = propagator_matrix(chip, 0.0, 0.5).matrix
    second = propagator_matrix(chip, 0.5, 1.0).matrix
    assert np.max(np.abs(full - second @ first)) <= 1e-9


def test_fourth_order_unitarity_tightening():
    chip, _, _ = build_chain(4, 1.0, Cosine(1.0, 2.0, 3.0), 3.0)
    coarse = propagator_matrix(chip, cfg=IntegratorConfig(step=1 / 100)).unitarity_error()
    fine = propagator_matrix(chip, cfg=IntegratorConfig(step=1 / 200)).unitarity_error()
    assert 8 < coarse / fine < 40


def test_rk4_global_order_against_expm():
    chip, _, _ = build_chain(4, 1.0, 1.0, 2.0)
    ref = expm_oracle(coupling_matrix(chip, 0.0))
    errs = [np.max(np.abs(propagator_matrix(chip, cfg=IntegratorConfig(step=h)).matrix - ref)) for h in (1 / 50, 1 / 100)]
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.2)


def test_step_adjusted_to_divisor():
    chip, _, _ = build_chain(2, 1.0, 1.0, 1.0)
    u = propagator_matrix(chip, cfg=IntegratorConfig(step=0.3))
    assert u.step == pytest.approx(1 / 3)
    assert IntegratorConfig(step=1 / 3).n_steps(1.0, 1.0) == 3


def test_expm_scheme_for_constant_chips():
    chip, _, _ = build_chain(3, 1.0, 1.0, 2.0)
    u = propagator_matrix(chip, cfg=IntegratorConfig(scheme="expm"))
    np.testing.assert_allclose(u.matrix, expm_oracle(coupling_matrix(chip, 0)), atol=1e-12)
    varying, _, _ = build_chain(3, 1.0, Cosine(1, 1, 1), 2.0)
    with pytest.raises(InvalidInputError):
        propagator_matrix(varying, cfg=IntegratorConfig(scheme="expm"))


def test_evolve_path_samples_on_grid():
    chip, _, _ = build_chain(3, 1.0, Cosine(1, 1, 2), 1.0)
    z, states = evolve_path(chip, [1, 0, 0], 0.0, 1.0, samples=200)
    assert states.shape == (201, 3)
    np.testing.assert_allclose(z, np.linspace(0, 1, 201))
    np.testing.assert_allclose(states[-1], evolve(chip, [1, 0, 0]), atol=1e-14)


def test_invalid_spans_and_states():
    chip, _, _ = build_chain(3, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        evolve(chip, [1, 0, 0], 0.0, 1.5)
    with pytest.raises(DomainError):
        evolve(chip, [1, 0, 0], 0.6, 0.5)
    with pytest.raises(InvalidInputError):
        evolve(chip, [1, 0])
    with pytest.raises(InvalidInputError):
        evolve(chip, [1, np.nan, 0])
    with pytest.raises(InvalidInputError):
        IntegratorConfig(step=-1)
    with pytest.raises(InvalidInputError):
        IntegratorConfig(scheme="euler")


def test_overflow_reports_position():
    # a large gain term blows the state up within the segment
    chip = ChipSpec(1, 1.0, (PiecewiseLinear(((0.0, 0.0), (0.5, 0.0), (0.6, 4000j))),), (), 1, ((1, 1),))
    with pytest.raises(NumericalOverflowError) as info:
        evolve(chip, [1.0])
    assert 0.5 < info.value.z <= 1.0


def test_expm_oracle_closed_forms():
    np.testing.assert_array_equal(expm_oracle(np.zeros((3, 3))), np.eye(3))
    np.testing.assert_allclose(expm_oracle(np.diag([1.0, 2.0])), np.diag(np.exp([-1j, -2j])), atol=1e-15)
    rot = expm_oracle(np.array([[0, np.pi / 2], [np.pi / 2, 0]]))
    np.testing.assert_allclose(rot, [[0, -1j], [-1j, 0]], atol=1e-15)
    with pytest.raises(InvalidInputError):
        expm_oracle(np.ones((2, 3)))


@pytest.mark.skipif(len(kernels.available_backends()) < 2, reason="compiled kernel not built")
def test_backends_agree():
    chip, _, _ = build_qubit(3, 1.0, Cosine(1, 0.5, 2), 2.0, 3.0, 1.0, 1.0, 1.0)
    start = kernels.BACKEND
    try:
        results = {}
        for name in kernels.available_backends():
            kernels.use_backend(name)
            results[name] = propagator_matrix(chip).matrix
    finally:
        kernels.use_backend(start)
    assert np.max(np.abs(results["cython"] - results["python"])) <= 1e-13


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_each_backend_reports_overflow(backend):
    chip = ChipSpec(1, 1.0, (Constant(3000j),), (), 1, ((1, 1),))
    start = kernels.BACKEND
    kernels.use_backend(backend)
    try:
        with pytest.raises(NumericalOverflowError):
            evolve(chip, [1.0])
    finally:
        kernels.use_backend(start)
