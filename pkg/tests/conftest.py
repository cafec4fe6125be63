"""Shared fixtures, independent oracles and hypothesis strategies."""

import numpy as np
import pytest
from hypothesis import strategies as st

from gameenv.model import SystemParams

#: Coefficient sets from the worked examples.
HOPF_EXAMPLE = (3.0, 0.2, 0.5, 1.0)
BALANCED_EXAMPLE = (3.0, 1.0, 1.0, 3.0)
CONTROL_INTERIOR = (4.0, 1.0, 3.0, 3.0)
CONTROL_BOUNDARY = (2.0, 3.0, 1.0, 4.0)


def oracle_field(x, r, poor, rich, mu=0.0, u=0.0, theta=1.0):
    """Closed-loop field written directly from the payoff matrices.

    The cooperator-minus-defector payoff advantage is interpolated linearly in
    ``r`` between the two matrices; this shares no code with the package.
    """
    (R1, S1), (T1, P1) = poor
    (R2, S2), (T2, P2) = rich
    adv0 = x * (R1 - T1) + (1 - x) * (S1 - P1)
    adv1 = x * (R2 - T2) + (1 - x) * (S2 - P2)
    adv = (1 - r) * adv0 + r * adv1 + u
    return (x * (1 - x) * adv + mu * (1 - 2 * x),
            r * (1 - r) * (theta * x - (1 - x)))


def matrices_for(a, b, c, d):
    """A payoff pair whose reparameterization is ``(a, b, c, d)``."""
    poor = ((a + 1.0, b + 0.5), (1.0, 0.5))
    rich = ((1.0, 0.5), (c + 1.0, d + 0.5))
    return poor, rich


coef = st.floats(0.1, 5.0, allow_nan=False, allow_infinity=False)
thetas = st.floats(0.25, 4.0, allow_nan=False, allow_infinity=False)
mus = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
unit_open = st.floats(1e-3, 1 - 1e-3, allow_nan=False)


@st.composite
def params(draw, theta=None, mu=None):
    a, b, c, d = (draw(coef) for _ in range(4))
    th = draw(thetas) if theta is None else theta
    m = draw(mus) if mu is None else mu
    return SystemParams(a, b, c, d, theta=th, mu=m)


@st.composite
def hopf_params(draw, theta=None):
    """Parameter sets with ``mu1`` in ``(0, 1]`` and an interior equilibrium there."""
    from hypothesis import assume

    from gameenv.bifurcation import hopf_admissible, hopf_mu
    from gameenv.equilibria import interior_condition_holds

    p = draw(params(theta=theta, mu=0.0))
    assume(hopf_admissible(p))
    assume(interior_condition_holds(p.with_(mu=hopf_mu(p))))
    return p


@pytest.fixture
def hopf_set():
    return SystemParams(*HOPF_EXAMPLE, theta=1.0, mu=0.1)


@pytest.fixture
def balanced_set():
    return SystemParams(*BALANCED_EXAMPLE, theta=1.0, mu=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print one line per acceptance criterion after the run."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(RESULTS):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
