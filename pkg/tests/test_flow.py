"""Integrator: accuracy, domain handling, events, failure reporting, repulsion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from conftest import HOPF_EXAMPLE, matrices_for, oracle_field, params
from gameenv.errors import IntegrationError, PreconditionError
from gameenv.flow import (IntegratorOptions, Section, boundary_repulsion_check, integrate,
                          section_crossings)
from gameenv.model import SystemParams

TIGHT = IntegratorOptions(rel_tol=1e-12, abs_tol=1e-14)


def _rotation(x, r):
    """Rigid rotation about (1/2, 1/2): x = 1/2 + R cos t, r = 1/2 + R sin t."""
    return -(r - 0.5), x - 0.5


def test_matches_solve_ivp_oracle(hopf_set):
    poor, rich = matrices_for(*HOPF_EXAMPLE)
    sol = solve_ivp(lambda t, y: oracle_field(y[0], y[1], poor, rich, mu=0.1), (0, 50), [0.3, 0.4],
                    method="DOP853", rtol=1e-13, atol=1e-14)
    tr = integrate((0.3, 0.4), hopf_set, TIGHT, t_end=50)
    np.testing.assert_allclose(tr.final, sol.y[:, -1], atol=1e-9)
    assert tr.times[-1] == 50


def test_dense_output_against_exact_solution():
    tr = integrate((0.8, 0.5), SystemParams(*HOPF_EXAMPLE), TIGHT, t_end=10, field=_rotation)
    t = np.linspace(0, 10, 101)
    exact = np.column_stack([0.5 + 0.3 * np.cos(t), 0.5 + 0.3 * np.sin(t)])
    np.testing.assert_allclose(tr.at(t), exact, atol=1e-8)


def test_event_location_accuracy():
    secs = [Section(0.5, -1), Section(0.5, +1)]
    tr = integrate((0.8, 0.5), SystemParams(*HOPF_EXAMPLE), TIGHT, t_end=7.0, sections=secs, field=_rotation)
    assert [e.direction for e in tr.events] == [-1, 1]
    assert tr.events[0].t == pytest.approx(math.pi / 2, abs=1e-10)
    assert tr.events[1].t == pytest.approx(3 * math.pi / 2, abs=1e-10)
    assert tr.events[0].state.r == pytest.approx(0.8, abs=1e-10)
    assert tr.events[1].state.r == pytest.approx(0.2, abs=1e-10)
    crossings = section_crossings(tr, 0.5, direction=-1)
    assert len(crossings) == 1
    assert crossings[0].t == pytest.approx(math.pi / 2, abs=1e-10)


def test_stop_after_terminates_on_event():
    tr = integrate((0.8, 0.5), SystemParams(*HOPF_EXAMPLE), TIGHT, t_end=100, sections=[Section(0.5, +1)],
                   stop_after=1, field=_rotation)
    assert tr.terminated
    assert tr.times[-1] == pytest.approx(3 * math.pi / 2, abs=1e-10)
    assert tr.final.x == 0.5


def test_backward_integration_retraces(hopf_set):
    fwd = integrate((0.3, 0.4), hopf_set, TIGHT, t_end=5)
    back = integrate(fwd.final, hopf_set, TIGHT, t_end=5, backward=True)
    np.testing.assert_allclose(back.final, (0.3, 0.4), atol=1e-8)


def test_underflow_raises_with_state(hopf_set):
    bad = lambda x, r: (float("nan"), 0.0)
    with pytest.raises(IntegrationError) as info:
        integrate((0.3, 0.4), hopf_set, t_end=1.0, field=bad)
    assert info.value.state == (0.3, 0.4)
    assert info.value.t == 0.0


def test_clamp_keeps_boundary_starts_on_boundary():
    p = SystemParams(*HOPF_EXAMPLE, mu=0.0)
    tr = integrate((0.3, 0.0), p, t_end=50)
    assert np.all(tr.states[:, 1] == 0.0)
    assert tr.final.x == pytest.approx(1.0, abs=1e-6)  # slides to the corner (1, 0)


@pytest.mark.parametrize("kw", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_step=0), dict(min_step=0)])
def test_options_validated(kw):
    with pytest.raises(PreconditionError):
        IntegratorOptions(**kw)


def test_section_must_be_interior(hopf_set):
    tr = integrate((0.3, 0.4), hopf_set, t_end=1)
    with pytest.raises(PreconditionError):
        section_crossings(tr, 1.0)


@given(params(), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=40, deadline=None)
def test_trajectories_stay_in_unit_square(p, x0, r0):
    tr = integrate((x0, r0), p, t_end=60, record=True)
    assert np.all((tr.states >= 0) & (tr.states <= 1))


def test_csv_and_dict_roundtrip(tmp_path, hopf_set):
    tr = integrate((0.3, 0.4), hopf_set, t_end=2)
    path = tmp_path / "traj.csv"
    tr.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 1:], tr.states, rtol=1e-11)
    assert set(tr.to_dict()) == {"t", "x", "r", "events"}


def test_boundary_repulsion_worked_example(hopf_set):
    diag = boundary_repulsion_check(hopf_set)
    assert diag.skipped is None
    assert diag.passed
    assert len(diag.records) == 20
    assert {rec.side for rec in diag.records} == {"bottom", "top", "left", "right"}


def test_boundary_repulsion_skipped_without_mutation():
    diag = boundary_repulsion_check(SystemParams(*HOPF_EXAMPLE, mu=0.0))
    assert diag.passed is None
    assert diag.skipped == "boundary invariant at mu=0"
