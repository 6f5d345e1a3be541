import json

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from arlat.config import RunConfig, build_model
from arlat.model import FeedbackMap, SourceVector, build_chain, build_qubit
from arlat.oracle import fd_solve
from arlat.problem import ARProblem, ARTerm, SegmentCoefficient, from_chip
from arlat.profiles import Constant
from arlat.propagator import IntegratorConfig, evolve, expm_oracle, propagator_matrix
from arlat.steady import solve_fixed_point
from chips import random_real_chip

SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
COARSE = IntegratorConfig(step=1 / 400)

seeds = st.integers(0, 2**32 - 1)
finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


@SETTINGS
@given(seeds, st.integers(1, 6), st.booleans())
def test_real_chips_are_unitary(seed, n, modulated):
    chip, _ = random_real_chip(np.random.default_rng(seed), n, modulated=modulated)
    assert propagator_matrix(chip, cfg=COARSE).unitarity_error() <= 1e-8


@SETTINGS
@given(seeds, st.integers(1, 6))
def test_constant_chips_match_expm(seed, n):
    chip, m = random_real_chip(np.random.default_rng(seed), n)
    u = propagator_matrix(chip).matrix
    gap = np.max(np.abs(u - expm_oracle(m * chip.tau)))
    # leading RK4 error on an eigenvalue lam: tau lam^5 h^4 / 120
    lam = np.linalg.norm(m, 2)
    h = chip.tau / 1000
    assert gap <= 1.1 * chip.tau * lam**5 * h**4 / 120 + 1e-13
    if lam * chip.tau <= 6.5:
        assert gap <= 1e-10


@SETTINGS
@given(seeds, st.integers(2, 5), cplx, cplx)
def test_evolve_is_linear(seed, n, c1, c2):
    rng = np.random.default_rng(seed)
    chip, _ = random_real_chip(rng, n, modulated=True)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lhs = evolve(chip, c1 * x + c2 * y, cfg=COARSE)
    rhs = c1 * evolve(chip, x, cfg=COARSE) + c2 * evolve(chip, y, cfg=COARSE)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (1 + np.linalg.norm(lhs))


@SETTINGS
@given(seeds, st.integers(1, 5))
def test_split_evolution_composes(seed, n):
    rng = np.random.default_rng(seed)
    chip, _ = random_real_chip(rng, n, modulated=True)
    cfg = IntegratorConfig(step=1 / 1000)
    u1 = propagator_matrix(chip, 0.0, 0.4, cfg).matrix
    u2 = propagator_matrix(chip, 0.4, 1.0, cfg).matrix
    u = propagator_matrix(chip, cfg=cfg).matrix
    assert np.max(np.abs(u2 @ u1 - u)) <= 1e-9


@SETTINGS
@given(seeds, st.integers(2, 6), st.floats(0, 0.95))
def test_fixed_point_satisfies_system(seed, n, s):
    rng = np.random.default_rng(seed)
    chip, f, src = build_chain(n, 1.0, float(rng.uniform(-2, 2)), float(rng.uniform(0, 4)))
    u = propagator_matrix(chip, cfg=COARSE)
    ss = solve_fixed_point(u, f.scaled(s), src)
    system = np.eye(n) - f.scaled(s).matrix(n) @ u.matrix
    assert np.linalg.norm(system @ ss.a0 - src.array) <= 1e-12 * (1 + np.linalg.norm(ss.a0))
    # a lossy loop strictly contracts, so the solve never hits a resonance
    assert ss.condition_estimate > 1e-3


@settings(max_examples=10, deadline=None)
@given(cplx, cplx, st.integers(1, 3))
def test_oracle_conjugation(c0, c1, segments):
    def problem(a, b, x0):
        pieces = (Constant(a),) * segments
        relay = (Constant(b),) * (segments - 1)
        terms = [ARTerm(1, 1, 0, SegmentCoefficient(1.0, pieces))]
        if segments > 1:
            terms.append(ARTerm(1, 1, 1, SegmentCoefficient(1.0, relay + (None,))))
        return ARProblem(1, 1.0, segments, tuple(terms), (x0,))

    # keep |c| h small so the collocation matrix stays well away from resonance
    c0, c1 = 0.3 * c0, 0.3 * c1
    a = fd_solve(problem(c0, c1, 1 + 0.5j), 1 / 100)
    b = fd_solve(problem(-np.conj(c0), -np.conj(c1), 1 - 0.5j), 1 / 100)
    np.testing.assert_allclose(b.values, np.conj(a.values), atol=1e-11)


@SETTINGS
@given(st.integers(2, 6), finite, st.floats(0, 4), st.booleans())
def test_builders_are_deterministic(n, beta, kappa, crossed):
    assert build_chain(n, 1.0, beta, kappa) == build_chain(n, 1.0, beta, kappa)
    q1 = build_qubit(n, 1.0, beta, 1.0, kappa, 1.0, 0.5, 0.5, crossed=crossed)
    q2 = build_qubit(n, 1.0, beta, 1.0, kappa, 1.0, 0.5, 0.5, crossed=crossed)
    assert q1 == q2
    chip, f, src = q1
    p1, p2 = from_chip(chip, f, src), from_chip(chip, f, src)
    assert p1.terms == p2.terms


@SETTINGS
@given(
    st.integers(1, 8),
    st.floats(0.1, 5),
    finite,
    st.floats(0, 4),
    st.floats(0, 1),
    st.sampled_from(["csv", "json"]),
    st.lists(st.floats(0, 1), max_size=3),
)
def test_config_round_trip(n, tau, beta, kappa, factor, fmt, starts):
    data = {
        "schema_version": 1,
        "model": "chain",
        "params": {"n": n, "tau": tau, "beta": beta, "kappa": kappa},
        "feedback": {"factor": factor},
        "output": {"format": fmt},
        "transient": {"starts": ["alpha"] + starts},
    }
    cfg = RunConfig.from_dict(data)
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    assert build_model(again) == build_model(cfg)


@SETTINGS
@given(st.integers(2, 6), st.integers(1, 6))
def test_source_unit_vectors(n, j):
    j = min(j, n)
    src = SourceVector.unit(n, j)
    assert np.array_equal(src.array, np.eye(n)[j - 1])
    f = FeedbackMap(((j, j, 0.0),), 1.0)
    chip, _, _ = build_chain(n, 1.0, 1.0, 1.0)
    ss = solve_fixed_point(propagator_matrix(chip, cfg=COARSE), f, src)
    np.testing.assert_array_equal(ss.a0, src.array)
