import math

import numpy as np
import pytest

from hebbian_kuramoto import regions
from hebbian_kuramoto.ode import CrossingEvent
from hebbian_kuramoto.regions import SweepConfig, classify_point, initial_conditions, sheets_crossed, sweep

SHORT = SweepConfig(n_initial_conditions=4, horizon=200.0)


def test_grid_axes():
    cfg = SweepConfig(grid=(4, 5))
    np.testing.assert_allclose(cfg.alphas, [0, 12, 24, 36])
    assert cfg.omegas[0] == 0 and cfg.omegas[-1] < 2 * math.pi and len(cfg.omegas) == 5


@pytest.mark.parametrize("kwargs", [dict(grid=(1, 5)), dict(n_initial_conditions=0), dict(horizon=0.0),
                                    dict(crossing_threshold=0), dict(alpha_range=(3.0, 1.0)), dict(m=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SweepConfig(**kwargs)


def test_initial_conditions_depend_only_on_seed_and_cell():
    a = initial_conditions(SHORT, 7)
    np.testing.assert_array_equal(a, initial_conditions(SHORT, 7))
    assert not np.array_equal(a, initial_conditions(SHORT, 8))
    assert np.all(a[:, 0] == 0) and np.all(np.abs(a[:, 1:]) <= math.pi)


def _ev(phi):
    return CrossingEvent(0.0, np.array([phi, 0.0, 0.0]), "up")


def test_sheets_crossed_counts_distinct_multiples():
    assert sheets_crossed([]) == 0
    # back and forth over 2 pi counts once
    assert sheets_crossed([_ev(2 * math.pi), _ev(2 * math.pi), _ev(2 * math.pi)]) == 1
    assert sheets_crossed([_ev(0.0), _ev(2 * math.pi), _ev(4 * math.pi)]) == 3


def test_omega1_is_not_simulated():
    r = classify_point(5.0, 3.0, SHORT)
    assert r.label == "Omega1" and not r.simulated and math.isnan(r.mean_crossings)


def test_compiled_and_python_engines_agree():
    cfg = SweepConfig(n_initial_conditions=3, horizon=60.0)
    for alpha in (10.0, 15.0):
        c = classify_point(alpha, 3.0, cfg, engine="compiled")
        p = classify_point(alpha, 3.0, cfg, engine="python")
        np.testing.assert_array_equal(c.counts, p.counts)
        assert c.label == p.label
    with pytest.raises(ValueError):
        classify_point(10.0, 3.0, cfg, engine="fortran")


def test_sweep_independent_of_jobs():
    cfg = SweepConfig(grid=(4, 3), n_initial_conditions=2, horizon=100.0, alpha_range=(0.0, 18.0),
                      omega_range=(0.0, 6.0))
    a, b = sweep(cfg, jobs=1), sweep(cfg, jobs=2)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.counts, b.counts)
    A, W = np.meshgrid(a.alphas, a.omegas)
    np.testing.assert_array_equal(a.labels == "Omega1", A < 2 * W)
    assert len(list(a.rows())) == 12
    assert a.label_at(0.0, 5.9) == "Omega1"


def test_row_transitions_reports_switches():
    cfg = SweepConfig(grid=(3, 2))
    labels = np.array([["Omega1", "Omega2", "Omega3"], ["Omega1", "Omega3", "Omega2"]], dtype=object)
    res = regions.SweepResult(cfg, cfg.alphas, cfg.omegas, labels, np.zeros((2, 3)), np.zeros((2, 3), int),
                              np.zeros((2, 3, 1), int))
    rep = regions.row_transitions(res)
    assert rep[0]["monotone"] and rep[0]["omega2_to_omega3"] == [36.0]
    assert not rep[1]["monotone"]
