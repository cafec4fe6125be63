"""Incentive design: controlled equilibria, thresholds, regimes and verification."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import BALANCED_EXAMPLE, CONTROL_BOUNDARY, CONTROL_INTERIOR, coef, matrices_for, oracle_field, unit_open
from gameenv.bifurcation import divergence_product_rule
from gameenv.control import (Regime, balance, control_thresholds, controlled_boundary_equilibrium,
                             controlled_dulac_divergence, controlled_equilibrium,
                             controlled_exponents, extra_top_side_roots, start_grid,
                             threshold_values, u_half, verify_design)
from gameenv.equilibria import Stability
from gameenv.errors import PreconditionError, SingularPointError, UnsupportedConfigurationError
from gameenv.model import SystemParams, jacobian

# [DERIVED] sympy on the matrix-form field with incentive: r_c(u) = (2u + 5)/11, u2 = 34/15
U2_TOP = 34 / 15
R_C_TOP_28 = (2 * 2.8 + 5) / 11


@pytest.fixture
def top():
    return SystemParams(*CONTROL_INTERIOR, mu=0.05)


@pytest.fixture
def bottom():
    return SystemParams(*CONTROL_BOUNDARY, mu=0.15)


def test_controlled_equilibrium_matches_oracle(top):
    eq = controlled_equilibrium(top.with_(u=2.8))
    assert eq.location.x == 0.5
    assert eq.location.r == pytest.approx(R_C_TOP_28, abs=1e-15)
    poor, rich = matrices_for(*CONTROL_INTERIOR)
    assert max(map(abs, oracle_field(0.5, eq.location.r, poor, rich, mu=0.05, u=2.8))) < 1e-14
    np.testing.assert_allclose(eq.jacobian, jacobian(eq.location, top.with_(u=2.8)), atol=1e-13)
    assert eq.stability is Stability.STABLE
    assert controlled_equilibrium(top.with_(u=u_half(top))) is None


def test_thresholds_worked_example(top):
    design = control_thresholds(top)
    assert design.regime is Regime.INTERIOR_STABILIZABLE
    assert design.u2 == pytest.approx(U2_TOP, rel=1e-14)
    assert design.u2 <= design.u1 < design.u_half == 3.0
    lo, hi = design.window()
    # [PAPER] the stabilizing window lies inside (2.2, 3)
    assert 2.2 < lo < hi <= 3.0
    assert lo < design.recommended_u < hi
    assert design.target.stability is Stability.STABLE
    d = design.to_dict()
    assert d["regime"] == "InteriorStabilizable" and d["window"][1] == 3.0


@given(coef, coef, coef, st.floats(0.1, 3.0), st.floats(0.05, 0.95))
@settings(max_examples=200, deadline=None)
def test_u2_is_where_stability_flips(b, c, d, excess, frac):
    # a + c > b + d by construction; mu is chosen so that u2 = frac * (c+d)/2
    a = b + d - c + excess
    assume(a > 0.1)
    target = frac * 0.5 * (c + d)
    mu = (a * d - b * c - target * excess) / (4 * (a + b + c + d))
    assume(1e-3 < mu <= 1.0)
    p = SystemParams(a, b, c, d, mu=mu)
    _, u2 = threshold_values(p)
    assert u2 == pytest.approx(target, rel=1e-9, abs=1e-12)
    below = controlled_equilibrium(p.with_(u=u2 - 1e-3)).eigenvalues.real.max()
    above = controlled_equilibrium(p.with_(u=u2 + 1e-3)).eigenvalues.real.max()
    assert below > 0 > above


@given(coef, coef, coef, coef, st.floats(0.0, 1.0), st.floats(0.0, 0.999))
@settings(max_examples=200, deadline=None)
def test_controlled_r_increases_with_u(a, b, c, d, mu, frac):
    p = SystemParams(a, b, c, d, mu=mu)
    u = frac * u_half(p)
    r1 = controlled_equilibrium(p.with_(u=u)).location.r
    r2 = controlled_equilibrium(p.with_(u=min(u + 1e-3, 0.9999 * u_half(p)))).location.r
    assert 0 < r1 <= r2 < 1


def test_boundary_only_worked_example(bottom):
    design = control_thresholds(bottom)
    assert design.regime is Regime.BOUNDARY_ONLY
    assert design.window() == (2.5, float("inf"))
    assert design.target.location.r == 1.0
    assert design.target.stability is Stability.STABLE
    # [PAPER] a small incentive leaves the interior equilibrium unstable
    assert controlled_equilibrium(bottom.with_(u=1.8)).stability is Stability.UNSTABLE
    eq = controlled_boundary_equilibrium(bottom.with_(u=2.6))
    assert 0.5 < eq.location.x < 1 and eq.stability is Stability.STABLE
    # [DERIVED] brentq on the matrix-form field restricted to r = 1
    poor, rich = matrices_for(*CONTROL_BOUNDARY)
    xo = brentq(lambda x: oracle_field(x, 1.0, poor, rich, mu=0.15, u=2.6)[0], 0.5, 1.0, xtol=1e-15)
    assert eq.location.x == pytest.approx(xo, abs=1e-13)


def test_extra_top_roots(bottom):
    extra = extra_top_side_roots(bottom.with_(u=2.6))
    assert len(extra) == 2
    xs = [e.location.x for e in extra]
    # [DERIVED] sign-change scan + brentq on the r = 1 restriction
    assert xs == pytest.approx([0.1255, 0.44397], abs=1e-4)
    assert all(np.max(e.eigenvalues.real) > 0 for e in extra)


def test_amplitude_reduction_regime():
    design = control_thresholds(SystemParams(*BALANCED_EXAMPLE, mu=0.05))
    assert design.regime is Regime.AMPLITUDE_REDUCTION_ONLY
    assert design.recommended_u == pytest.approx(1.1 * 2.0)
    assert design.notes


def test_control_preconditions(top):
    with pytest.raises(UnsupportedConfigurationError):
        control_thresholds(top.with_(theta=2.0))
    with pytest.raises(PreconditionError):
        control_thresholds(top.with_(mu=0.0))
    with pytest.raises(PreconditionError):
        controlled_boundary_equilibrium(top.with_(u=2.0))


@given(coef, coef, coef, coef, st.floats(0.0, 1.0), st.floats(0.0, 5.0), unit_open, unit_open)
@settings(max_examples=200, deadline=None)
def test_controlled_dulac_matches_product_rule(a, b, c, d, mu, u, x, r):
    p = SystemParams(a, b, c, d, mu=mu, u=u)
    exps = controlled_exponents(p)
    from gameenv.bifurcation import dulac_factor
    phi = dulac_factor(x, r, exps)
    closed = controlled_dulac_divergence((x, r), p) / phi
    raw = divergence_product_rule((x, r), p, exps) / phi
    assert closed == pytest.approx(raw, rel=1e-9, abs=1e-9)


def test_controlled_dulac_singular(top):
    with pytest.raises(SingularPointError):
        controlled_dulac_divergence((0.5, 1.0), top)


def test_verify_design_converges(top):
    starts = [(0.1, 0.1), (0.9, 0.5), (0.3, 0.9)]
    res = verify_design(top, 2.8, (0.5, R_C_TOP_28), starts=starts)
    assert res.passed
    assert res.finals.shape == (3, 2)


def test_start_grid():
    g = start_grid()
    assert len(g) == 25 and g[0] == (0.1, 0.1) and g[-1] == (0.9, 0.9)
