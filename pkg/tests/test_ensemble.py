import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hebbian_kuramoto import ensemble as ens
from hebbian_kuramoto.ode import IntegratorConfig
from hebbian_kuramoto.pair import PairParams, simulate as pair_simulate


def loop_field(state, p):
    """Direct transcription of the model with explicit loops (oracle)."""
    N = p.N
    K = state.coupling
    dphi = state.velocities.copy()
    dv = np.empty(N)
    for i in range(N):
        acc = 0.0
        for j in range(N):
            if j != i:
                acc += K[i, j] * math.sin(state.phases[j] - state.phases[i])
        dv[i] = (-state.velocities[i] + state.frequencies[i] + acc / N) / p.mass
    dK = []
    for i in range(N):
        for j in range(i + 1, N):
            dK.append(p.beta * (p.alpha * math.cos(state.phases[j] - state.phases[i]) - K[i, j]))
    return np.concatenate([dphi, dv, dK])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**31), st.floats(0.2, 50), st.floats(0.1, 20))
def test_vectorized_field_matches_loops(N, seed, mass, alpha):
    p = ens.EnsembleParams(N, mass, alpha, 0.5, seed=seed, beta=0.7)
    rng = np.random.default_rng(seed)
    s = ens.EnsembleState(rng.uniform(-10, 10, N), rng.normal(size=N), rng.normal(size=N * (N - 1) // 2),
                          ens.draw_frequencies(p))
    np.testing.assert_allclose(ens.vector_field(s, p), loop_field(s, p), rtol=1e-12, atol=1e-12)


def test_dimension_and_flatten_roundtrip():
    p = ens.EnsembleParams(50, 1.0, 1.0, 0.1)
    assert p.dimension == 1325
    s = ens.init(p)
    x = ens.flatten(s)
    assert x.shape == (1325,)
    back = ens.unflatten(x, s.frequencies)
    np.testing.assert_array_equal(back.couplings, s.couplings)


def test_init_conventions():
    p = ens.EnsembleParams(8, 1.0, 1.0, 0.25, seed=3)
    s = ens.init(p)
    np.testing.assert_allclose(s.phases, 2 * np.pi * np.arange(8) / 8)
    assert np.all(s.velocities == 0) and np.all(s.couplings == 1)
    z = np.random.Generator(np.random.PCG64(3)).standard_normal(8)
    np.testing.assert_array_equal(s.frequencies, 0.5 * z)
    with pytest.raises(ValueError):
        ens.init(p, frequencies=[0.0, 1.0])


@pytest.mark.parametrize("kwargs", [dict(N=1), dict(mass=0.0), dict(alpha=0.0), dict(sigma2=-1.0), dict(beta=0.0)])
def test_params_validation(kwargs):
    base = dict(N=4, mass=1.0, alpha=1.0, sigma2=0.1)
    with pytest.raises(ValueError):
        ens.EnsembleParams(**{**base, **kwargs})


def test_order_parameter_identities():
    assert ens.order_param_r2(np.full(50, 0.7)) == pytest.approx(1.0)
    assert ens.order_param_r2(np.r_[np.zeros(25), np.full(25, np.pi)]) == pytest.approx(1.0)
    assert ens.order_param_r2(2 * np.pi * np.arange(50) / 50) < 1e-12
    assert ens.order_param(np.r_[np.zeros(25), np.full(25, np.pi)], q=1) < 1e-12
    with pytest.raises(ValueError):
        ens.order_param_r2([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=60))
def test_order_parameter_bounded_and_shift_invariant(phases):
    r = ens.order_param_r2(phases)
    assert 0 <= r <= 1
    assert ens.order_param_r2(np.asarray(phases) + 1.234) == pytest.approx(r, abs=1e-9)


def test_coupling_matrix_symmetric_and_bounded_along_run():
    p = ens.EnsembleParams(12, 1.0, 2.0, 0.3, seed=1)
    run = ens.simulate(p, horizon=10.0, sample_interval=0.5, with_r1=True)
    for x in run.trajectory.states:
        K = ens.unflatten(x, run.final.frequencies).coupling
        assert np.array_equal(K, K.T)
    assert run.coupling_max_after(0.0) <= p.alpha + 0.01
    assert run.series.r1 is not None and len(run.series.r1) == len(run.series.times)


def test_fixed_step_runs_are_deterministic():
    p = ens.EnsembleParams(10, 1.0, 1.0, 0.5, seed=4)
    a = ens.simulate(p, horizon=5.0, sample_interval=0.5)
    b = ens.simulate(p, horizon=5.0, sample_interval=0.5)
    np.testing.assert_array_equal(a.trajectory.states, b.trajectory.states)
    assert a.config.method == "rk4"
    assert ens.simulate(ens.EnsembleParams(4, 100.0, 1.0, 0.1), horizon=1.0).config.method == "adaptive"


def test_two_oscillators_reduce_to_pair():
    omega = np.array([0.9, -0.6])
    p = ens.EnsembleParams(2, 1.3, 4.0, 1.0)
    cfg = IntegratorConfig(horizon=10.0, abs_tol=1e-12, rel_tol=1e-12, sample_interval=0.5)
    run = ens.simulate(p, cfg=cfg, frequencies=omega)
    x = run.trajectory.states
    pair = PairParams(1.3, 1.5, 4.0)
    ref = pair_simulate(pair, [x[0, 0] - x[0, 1], 0.0, 1.0], cfg)
    np.testing.assert_allclose(x[:, 0] - x[:, 1], ref.states[:, 0], atol=1e-6)
    np.testing.assert_allclose(x[:, 2] - x[:, 3], ref.states[:, 1], atol=1e-6)
    np.testing.assert_allclose(x[:, 4], ref.states[:, 2], atol=1e-6)


def test_detect_clusters():
    v = np.array([0.0, 0.01, 1.0, 1.02, 1.04, 5.0])
    rep = ens.detect_clusters(v, 0.05)
    assert rep.clusters == [[2, 3, 4], [0, 1], [5]]
    assert len(rep) == 3
    assert rep.mean_velocity[0] == pytest.approx(1.02)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=40), st.floats(0.001, 1.0))
def test_cluster_partition_invariants(v, tol):
    rep = ens.detect_clusters(v, tol)
    flat = sorted(i for c in rep.clusters for i in c)
    assert flat == list(range(len(v)))
    for c in rep.clusters:
        vals = np.asarray(v)[c]
        assert vals.max() - vals.min() <= tol + 1e-12
    sizes = [len(c) for c in rep.clusters]
    assert sizes == sorted(sizes, reverse=True)


def test_mean_velocities_over_window():
    p = ens.EnsembleParams(3, 1.0, 1.0, 0.0)
    run = ens.simulate(p, horizon=4.0, sample_interval=0.5, cluster_window=2.0)
    assert run.clusters is not None
    assert ens.mean_velocities(run.trajectory, 3, 2.0).shape == (3,)
