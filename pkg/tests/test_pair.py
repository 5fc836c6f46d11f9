import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hebbian_kuramoto import cubic
from hebbian_kuramoto.ode import IntegratorConfig
from hebbian_kuramoto.pair import (
    DomainError,
    PairParams,
    PairState,
    RawPairParams,
    boundedness_audit,
    characteristic_cubic,
    classify,
    divergence,
    energy,
    energy_gradient,
    equilibria,
    gamma_bound,
    gamma_boundary,
    gamma_raster,
    in_gamma_region,
    in_gamma_region_by_curves,
    jacobian,
    rescale,
    simulate,
    uv,
    vector_field,
    wrap_phase,
)

P10 = PairParams(1.0, 3.0, 10.0)


def test_rescale_scales_out_learning_rate():
    p = rescale(RawPairParams(m=2.0, omega1=1.0, omega2=4.0, alpha=6.0, beta=0.5))
    assert (p.m, p.omega, p.alpha) == (1.0, 6.0, 12.0)


@pytest.mark.parametrize("bad", [dict(m=0.0, omega=1.0, alpha=1.0), dict(m=1.0, omega=-1.0, alpha=1.0),
                                 dict(m=1.0, omega=1.0, alpha=0.0)])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        PairParams(**bad)


def test_wrap_phase_range():
    x = np.linspace(-20, 20, 1001)
    w = wrap_phase(x)
    assert np.all((w >= -math.pi) & (w < math.pi))
    np.testing.assert_allclose(np.sin(w), np.sin(x), atol=1e-12)
    assert wrap_phase(math.pi) == -math.pi


def test_state_keeps_lift():
    s = PairState.from_array([7.0, 0.5, 1.0])
    assert s.phi_lift == 7.0 and s.phi == pytest.approx(7.0 - 2 * math.pi)
    np.testing.assert_array_equal(s.as_array(), [7.0, 0.5, 1.0])


def test_field_example():
    np.testing.assert_allclose(vector_field(PairState(0.0, 0.0, 0.0), PairParams(1, 3, 5)), [0.0, 3.0, 5.0])


def test_no_equilibria_below_threshold():
    assert equilibria(PairParams(1.0, 3.0, 5.0)) == []
    with pytest.raises(DomainError):
        uv(PairParams(1.0, 3.0, 5.0))
    with pytest.raises(DomainError):
        classify("P1", PairParams(1.0, 3.0, 5.0))


def test_equilibria_are_fixed_points():
    for e in equilibria(P10):
        assert np.max(np.abs(vector_field(e.state, P10))) < 1e-14
        assert math.sin(2 * e.state.phi) == pytest.approx(0.6, abs=1e-14)
    assert [e.label for e in equilibria(P10)] == ["P1", "P2", "P3", "P4"]


def test_uv_identities():
    point = uv(P10)
    assert point.u + point.v == pytest.approx(20.0)
    assert point.u * point.v == pytest.approx(36.0)


def test_stability_at_10():
    r1, r2 = classify("P1", P10), classify("P2", P10)
    assert r1.stability == "complex-pair-sink"
    assert r2.stability == "saddle-complex"
    assert r1.oracle_deviation < 1e-9 and r2.oracle_deviation < 1e-9
    assert sum(z.real > 0 for z in r2.eigenvalues) == 1
    assert all(z.real < 0 for z in r1.eigenvalues)
    assert classify("P3", P10).eigenvalues == pytest.approx(r1.eigenvalues)


def test_all_real_negative_inside_gamma1():
    # at u = 0.5 the boundary v values are 0 and 1/27 for m = 1; take v = 0.02
    p = PairParams(1.0, math.sqrt(0.5 * 0.02) / 2, (0.5 + 0.02) / 2)
    rep = classify("P1", p)
    assert rep.in_gamma_region
    assert rep.stability == "all-real-negative"
    assert all(z.imag == 0 and z.real < 0 for z in rep.eigenvalues)


def test_saddle_node_at_threshold():
    p = PairParams(1.0, 1.0, 2.0)
    assert p.degenerate
    eqs = equilibria(p)
    assert len(eqs) == 4 and all(e.degenerate for e in eqs)
    assert eqs[0].state.phi == pytest.approx(eqs[1].state.phi)
    for lbl in "P1", "P2", "P3", "P4":
        rep = classify(lbl, p)
        assert rep.stability == "saddle-node-degenerate"
        assert sorted(rep.eigenvalues, key=lambda z: (z.real, z.imag)) == pytest.approx([-1 - 1j, -1 + 1j, 0j])
        assert rep.oracle_deviation < 1e-7


def test_unknown_label():
    with pytest.raises(ValueError):
        classify("P5", P10)


def test_characteristic_cubic_matches_jacobian_polynomial():
    for e in equilibria(P10):
        ref = np.poly(jacobian(e.state, P10))  # monic, det(xI - J)
        c = np.array(characteristic_cubic(e.label, P10))
        np.testing.assert_allclose(c / c[0], ref, atol=1e-10)


def test_gamma_bound_and_boundary():
    assert gamma_bound(1.0) == pytest.approx(2 / 3)
    assert gamma_boundary(1.0, 2 / 3) == pytest.approx((2 / 27, 2 / 27))
    assert gamma_boundary(1.0, 0.5) == pytest.approx((0.0, 1 / 27), abs=1e-15)
    with pytest.raises(DomainError):
        gamma_boundary(1.0, 0.7)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0]), st.floats(0, 2.5), st.floats(0, 2.5), st.sampled_from(["P1P3", "P2P4"]))
def test_curve_sandwich_matches_discriminant(m, u, v, pair):
    from hebbian_kuramoto.pair import UVPoint, _cubic_uv

    coeffs = _cubic_uv(pair, u, v, m)
    disc = cubic.discriminant(*coeffs)
    if abs(disc) < 1e-9 * max(1.0, float(cubic.discriminant_scale(*coeffs))):
        return  # boundary band
    assert bool(in_gamma_region_by_curves(pair, u, v, m)) == in_gamma_region(pair, UVPoint(u, v), m)


def test_gamma_raster_empty_beyond_bound():
    r = gamma_raster(1.0, 200, extent=1.0)
    assert not r.in_gamma1[:, r.u > 2 / 3 + 1e-12].any()
    assert not r.in_gamma2[r.v > 2 / 3 + 1e-12, :].any()
    assert r.rows().shape == (200 * 200, 7)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.1, 10), st.floats(0, 5),
       st.floats(0.1, 20))
def test_divergence_equals_trace(phi, gamma, k, m, omega, alpha):
    p = PairParams(m, omega, alpha)
    assert np.trace(jacobian(PairState(phi, gamma, k), p)) == pytest.approx(divergence(p), abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-5, 5), st.floats(-10, 10), st.floats(0.1, 5), st.floats(0, 5),
       st.floats(0.1, 20))
def test_energy_rate_is_gradient_dot_field(phi, gamma, k, m, omega, alpha):
    p = PairParams(m, omega, alpha)
    s = PairState(phi, gamma, k)
    audit = energy(s, p)
    dot = float(energy_gradient(s, p) @ vector_field(s, p))
    assert audit.dE_dt <= 0
    assert audit.dE_dt == pytest.approx(dot, abs=1e-9 * max(1.0, abs(dot)))


def test_energy_gradient_by_finite_differences():
    p = PairParams(1.5, 2.0, 7.0)
    s = PairState(0.3, -0.4, 2.0)
    h = 1e-6
    fd = []
    for i in range(3):
        x = s.as_array().copy()
        x[i] += h
        xp = PairState(*x)
        x[i] -= 2 * h
        xm = PairState(*x)
        fd.append((energy(xp, p).E - energy(xm, p).E) / (2 * h))
    np.testing.assert_allclose(energy_gradient(s, p), fd, rtol=1e-7, atol=1e-7)


def test_boundedness_audit():
    p = PairParams(1.0, 3.0, 5.0)
    traj = simulate(p, [0.0, 0.0, 100.0], IntegratorConfig(horizon=30.0, sample_interval=0.01))
    audit = boundedness_audit(traj, p, 0.01)
    assert audit.satisfied and audit.k_bound == 5.01 and audit.gamma_bound == 8.01
    assert 5 < audit.T_epsilon < 12
    with pytest.raises(ValueError):
        boundedness_audit(traj, p, 0.0)
