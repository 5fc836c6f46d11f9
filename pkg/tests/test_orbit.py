import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hebbian_kuramoto import cubic
from hebbian_kuramoto.orbit import (
    UniquenessError,
    approx_state,
    approximate,
    approximation_error,
    orbit_distance,
    overlay_rows,
    solve_zeta,
    zeta_cubic,
)
from hebbian_kuramoto.pair import DomainError, PairParams

P = PairParams(1.0, 3.0, 5.0)


def test_zeta_exact_example():
    assert solve_zeta(P) == pytest.approx(2.0, abs=1e-14)
    appx = approximate(P)
    assert (appx.a, appx.b, appx.c, appx.d) == pytest.approx((1.0, 2.0, 3 / 17, 7 / 34), abs=1e-14)


def test_zero_frequency_gives_zero_rotation():
    assert solve_zeta(PairParams(1.0, 0.0, 1.0)) == 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 10), st.floats(0.05, 1.0))
def test_zeta_unique_real_root_in_rotating_region(omega, frac):
    p = PairParams(1.0, omega, frac * 2 * omega * 0.999)
    z = solve_zeta(p)
    coeffs = zeta_cubic(p)
    assert abs(cubic.polyval(coeffs, z)) < 1e-9 * max(1.0, omega**3)
    assert 0 < z <= omega  # rotation never exceeds the free-running rate


def test_uniqueness_error_when_three_real_roots():
    # only possible when alpha > 2 omega, i.e. outside the rotating region
    p = PairParams(1.0, 10.0, 40.0)
    assert cubic.discriminant(*zeta_cubic(p)) > 0
    with pytest.raises(UniquenessError):
        solve_zeta(p)


def test_unit_mass_required():
    with pytest.raises(ValueError):
        solve_zeta(PairParams(2.0, 3.0, 5.0))


def test_approx_state_is_periodic():
    appx = approximate(P)
    T = 2 * math.pi / appx.zeta
    s0, s1 = approx_state(appx, 0.3), approx_state(appx, 0.3 + T)
    assert s0.gamma == pytest.approx(s1.gamma) and s0.k == pytest.approx(s1.k)
    assert s1.phi_lift - s0.phi_lift == pytest.approx(2 * math.pi)


def test_distance_zero_on_the_approximation_itself():
    appx = approximate(P)
    phi = np.linspace(-math.pi, math.pi, 500, endpoint=False)
    rms, sup = orbit_distance(appx, phi, appx.gamma_at(phi), appx.k_at(phi))
    assert rms == 0 and sup == 0


def test_error_against_simulation_and_domain():
    err = approximation_error(P, horizon=150, transient=50)
    assert err.rms_gamma_k <= 0.15 * err.k_amplitude
    with pytest.raises(DomainError):
        approximation_error(PairParams(1.0, 3.0, 6.0))
    rows = overlay_rows(P, horizon=20, transient=10, sample_interval=0.1)
    assert rows.shape[1] == 5
