"""Liénard form of the balanced system and the uniqueness conditions."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import HOPF_EXAMPLE, BALANCED_EXAMPLE
from gameenv.bifurcation import hopf_mu
from gameenv.errors import UnsupportedConfigurationError
from gameenv.lienard import all_pass, check_lienard_conditions, lienard_transform
from gameenv.model import SystemParams


@st.composite
def balanced(draw):
    """theta = 1, a + c = b + d, ad > bc, 0 < mu < mu1."""
    b, c, d = (draw(st.floats(0.1, 5.0)) for _ in range(3))
    a = b + d - c
    assume(a > 0.1 and a * d - b * c > 1e-3)
    p = SystemParams(a, b, c, d)
    mu1 = hopf_mu(p)
    assume(mu1 <= 1.0)
    return p.with_(mu=draw(st.floats(0.02, 0.98)) * mu1)


def test_transform_worked_example():
    form = lienard_transform(SystemParams(*BALANCED_EXAMPLE, mu=0.05))
    assert form.r_star_prime == 0.5
    assert form.mu1 == 0.25
    assert form.nu == pytest.approx(math.sqrt(0.2), rel=1e-15)


def test_shift_uses_equilibrium_not_printed_constant():
    # a + b != c + d here, so the two candidate shifts differ
    p = SystemParams(4.0, 1.0, 2.0, 5.0, mu=0.05)
    form = lienard_transform(p)
    assert form.r_star_prime == pytest.approx(7 / 12)
    xt, rt = form.from_original(0.5, (p.a + p.b) / (p.a + p.b + p.c + p.d))
    assert abs(xt) < 1e-15 and abs(rt) < 1e-15


@given(balanced())
@settings(max_examples=200, deadline=None)
def test_eight_mu1_identity(p):
    mu1 = hopf_mu(p)
    assert 8 * mu1 == pytest.approx(p.d - p.c, rel=1e-12)
    assert 8 * mu1 == pytest.approx(p.a - p.b, rel=1e-12, abs=1e-12)


@given(balanced())
@settings(max_examples=20, deadline=None)
def test_lienard_field_is_rescaled_original(p):
    form = lienard_transform(p)
    rng = np.random.default_rng(7)
    x, r = rng.uniform(1e-3, 1 - 1e-3, (2, 10_000))
    xt, rt = form.from_original(x, r)
    lx, lr = form.field(xt, rt)
    ox, orr = form.original_field(xt, rt)
    scale = form.alpha(xt) * form.beta(rt)
    np.testing.assert_allclose(lx * scale, ox, atol=1e-12)
    np.testing.assert_allclose(lr * scale, orr, atol=1e-12)
    np.testing.assert_allclose(form.to_original(xt, rt), (x, r), atol=1e-15)


def test_G_is_antiderivative_of_g():
    form = lienard_transform(SystemParams(*BALANCED_EXAMPLE, mu=0.05))
    xs = np.linspace(-0.45, 0.45, 19)
    h = 1e-6
    np.testing.assert_allclose((form.G(xs + h) - form.G(xs - h)) / (2 * h), form.g(xs), rtol=1e-7)
    assert form.G(0.0) == 0.0


def test_conditions_pass_for_amplitude_example():
    verdicts = check_lienard_conditions(lienard_transform(SystemParams(*BALANCED_EXAMPLE, mu=0.05)))
    for key in ("1", "2", "3", "4"):
        assert verdicts[key].passed, verdicts[key]
    assert all_pass(verdicts)
    # the unsigned reading cannot hold since F is odd in x~
    assert not verdicts["4_literal"].passed
    assert verdicts["4_literal"].witness[0] < 0
    assert verdicts["1"].to_dict()["verdict"] == "Pass"


@given(balanced())
@settings(max_examples=10, deadline=None)
def test_conditions_pass_on_balanced_sets(p):
    assert all_pass(check_lienard_conditions(lienard_transform(p), n_grid=100, n_random=200))


@pytest.mark.parametrize("p,match", [
    (SystemParams(*BALANCED_EXAMPLE, theta=2.0, mu=0.05), "theta"),
    (SystemParams(*HOPF_EXAMPLE, mu=0.05), "a\\+c=b\\+d"),
    (SystemParams(*BALANCED_EXAMPLE, mu=0.05, u=0.5), "u=0"),
    (SystemParams(*BALANCED_EXAMPLE, mu=0.3), "mu1"),
    (SystemParams(*BALANCED_EXAMPLE, mu=0.0), "mu1"),
])
def test_transform_preconditions(p, match):
    with pytest.raises(UnsupportedConfigurationError, match=match):
        lienard_transform(p)
