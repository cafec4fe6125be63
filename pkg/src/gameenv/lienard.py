"""Generalized Liénard form of the balanced system and its uniqueness conditions.

With ``theta = 1`` and ``a + c = b + d`` the cross term ``x r`` drops out of the
vector field. Shifting the equilibrium to the origin via
``x~ = x - 1/2``, ``r~ = (1 - r) - r'*`` and dividing by the positive factor
``alpha(x~) beta(r~) = x(1-x) r(1-r)`` gives::

    dx~/dt = phi(r~) - F(x~, r~),     dr~/dt = -g(x~)

with ``phi = (b+d) r~ / beta``, ``F = x~ (2 mu - 8 mu1 alpha) / (alpha beta)`` and
``g = 2 x~ / alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .bifurcation import hopf_mu
from .control import balance
from .errors import UnsupportedConfigurationError
from .model import SystemParams, rhs

#: Slack used in strict monotonicity comparisons.
MONO_SLACK = 1e-12


@dataclass(frozen=True)
class LienardForm:
    b: float
    d: float
    mu: float
    mu1: float
    r_star_prime: float
    nu: float
    params: SystemParams

    # -- auxiliary functions ----------------------------------------------------
    @staticmethod
    def alpha(xt):
        return 0.25 - np.asarray(xt) ** 2

    def beta(self, rt):
        rp = np.asarray(rt) + self.r_star_prime
        return rp * (1.0 - rp)

    def phi(self, rt):
        return (self.b + self.d) * np.asarray(rt) / self.beta(rt)

    def F(self, xt, rt):
        xt = np.asarray(xt)
        al = self.alpha(xt)
        return xt * (2 * self.mu - 8 * self.mu1 * al) / (al * self.beta(rt))

    def g(self, xt):
        return 2 * np.asarray(xt) / self.alpha(xt)

    @staticmethod
    def G(xt):
        """``int_0^x~ g(s) ds = -log(1 - 4 x~^2)``."""
        return -np.log1p(-4 * np.asarray(xt) ** 2)

    # -- coordinates -----------------------------------------------------------
    def from_original(self, x, r):
        return np.asarray(x) - 0.5, (1.0 - np.asarray(r)) - self.r_star_prime

    def to_original(self, xt, rt):
        return np.asarray(xt) + 0.5, 1.0 - (np.asarray(rt) + self.r_star_prime)

    def field(self, xt, rt):
        """Liénard-form vector field ``(phi - F, -g)``."""
        return self.phi(rt) - self.F(xt, rt), -self.g(xt)

    def original_field(self, xt, rt):
        """Original field expressed in the shifted/reflected coordinates."""
        x, r = self.to_original(xt, rt)
        fx, fr = rhs(self.params)(x, r)
        return fx, -fr


def lienard_transform(p: SystemParams) -> LienardForm:
    """Build the Liénard form; requires ``theta=1``, ``a+c=b+d``, ``u=0`` and
    ``0 < mu < mu1``."""
    if p.theta != 1.0:
        raise UnsupportedConfigurationError(f"Liénard form requires theta=1 (got {p.theta})")
    if balance(p) != 0:
        raise UnsupportedConfigurationError("Liénard form requires a+c=b+d")
    if p.u != 0:
        raise UnsupportedConfigurationError("Liénard form is built for u=0")
    mu1 = hopf_mu(p)
    if not (0.0 < p.mu < mu1):
        raise UnsupportedConfigurationError(f"Liénard form requires 0 < mu < mu1={mu1}")
    rsp = (p.c + p.d) / (2 * (p.b + p.d))
    nu = math.sqrt((mu1 - p.mu) / (4 * mu1))
    return LienardForm(p.b, p.d, p.mu, mu1, rsp, nu, p)


@dataclass(frozen=True)
class ConditionVerdict:
    passed: bool
    method: str
    witness: tuple | None = None
    detail: str = ""

    def to_dict(self):
        return {"verdict": "Pass" if self.passed else "Fail", "method": self.method,
                "witness": list(self.witness) if self.witness is not None else None,
                "detail": self.detail}


def _open_grid(lo, hi, n):
    return np.linspace(lo, hi, n + 2)[1:-1]


def _first_bad(mask, X, R):
    idx = np.argwhere(mask)
    if idx.size == 0:
        return None
    i, j = idx[0]
    return (float(X[i, j]), float(R[i, j]))


def check_lienard_conditions(form: LienardForm, n_grid: int = 400, n_random: int = 1000,
                             seed: int = 0) -> dict:
    """Verdicts for the four uniqueness conditions.

    (1) ``G(-nu) = G(nu)``: ``g`` is odd; confirmed by quadrature.
    (2) ``r~ -> F/phi`` strictly decreasing for ``x~ in (-nu, 0)`` and strictly
        increasing for ``x~ in (0, nu)``, on each side of ``r~ = 0``.
    (3) ``g F <= 0`` on ``(-nu, nu)``.
    (4) Outside ``(-nu, nu)``: ``x~ F >= 0`` (F has the sign of ``x~``), and
        ``x~ -> F`` increasing on ``(-1/2, -nu)`` and ``(nu, 1/2)``.
        The unsigned reading ``F >= 0`` is reported separately as
        ``4_literal``; it cannot hold left of ``-nu`` because ``F`` is odd in ``x~``.

    Conditions (2)-(4) are checked on an ``n_grid x n_grid`` grid per region
    plus ``n_random`` random points.
    """
    rng = np.random.default_rng(seed)
    nu, rsp = form.nu, form.r_star_prime
    r_lo, r_hi = -rsp, 1.0 - rsp
    out = {}

    # (1)
    gp = quad(lambda s: float(form.g(s)), 0.0, nu, epsabs=1e-14)[0]
    gm = quad(lambda s: float(form.g(s)), 0.0, -nu, epsabs=1e-14)[0]
    odd = abs(gp - gm) <= 1e-10 * max(1.0, abs(gp))
    out["1"] = ConditionVerdict(odd, "analytic (odd integrand) + quadrature",
                                None if odd else (nu,), f"G(nu)={gp:.12e}, G(-nu)={gm:.12e}")

    # (2) monotonicity of F/phi in r~
    ok2, witness2 = True, None
    for xs_lo, xs_hi, sign in ((-nu, 0.0, -1), (0.0, nu, +1)):
        xs = _open_grid(xs_lo, xs_hi, n_grid)
        for rs_lo, rs_hi in ((r_lo, 0.0), (0.0, r_hi)):
            rs = _open_grid(rs_lo, rs_hi, n_grid)
            X, R = np.meshgrid(xs, rs, indexing="ij")
            Q = form.F(X, R) / form.phi(R)
            D = np.diff(Q, axis=1) * sign
            scale = MONO_SLACK * np.maximum(np.abs(Q[:, 1:]), np.abs(Q[:, :-1]))
            bad = ~(D > -scale) | ~np.isfinite(D)
            if ok2 and bad.any():
                ok2, witness2 = False, _first_bad(bad, X[:, 1:], R[:, 1:])
            # random pairs in the same sub-interval
            xr = rng.uniform(xs_lo, xs_hi, n_random // 4)
            r1 = rng.uniform(rs_lo, rs_hi, n_random // 4)
            r2 = rng.uniform(rs_lo, rs_hi, n_random // 4)
            lo_, hi_ = np.minimum(r1, r2), np.maximum(r1, r2)
            keep = (hi_ > lo_) & (xr != 0)
            q1 = form.F(xr, lo_) / form.phi(lo_)
            q2 = form.F(xr, hi_) / form.phi(hi_)
            d = (q2 - q1) * sign
            badr = keep & ~(d > -MONO_SLACK * np.maximum(np.abs(q1), np.abs(q2)))
            if ok2 and badr.any():
                k = int(np.argmax(badr))
                ok2, witness2 = False, (float(xr[k]), float(lo_[k]), float(hi_[k]))
    out["2"] = ConditionVerdict(ok2, f"{n_grid}x{n_grid} grid per region + random pairs", witness2)

    # (3) g F <= 0 inside
    xs = _open_grid(-nu, nu, n_grid)
    rs = _open_grid(r_lo, r_hi, n_grid)
    X, R = np.meshgrid(xs, rs, indexing="ij")
    GF = form.g(X) * form.F(X, R)
    bad = ~(GF <= MONO_SLACK)
    w3 = _first_bad(bad, X, R)
    xr, rr = rng.uniform(-nu, nu, n_random), rng.uniform(r_lo, r_hi, n_random)
    badr = ~(form.g(xr) * form.F(xr, rr) <= MONO_SLACK)
    if w3 is None and badr.any():
        k = int(np.argmax(badr))
        w3 = (float(xr[k]), float(rr[k]))
    out["3"] = ConditionVerdict(w3 is None, f"{n_grid}x{n_grid} grid + {n_random} random points", w3)

    # (4) outside (-nu, nu)
    w4 = w4_lit = None
    mono_ok = True
    for lo, hi in ((-0.5, -nu), (nu, 0.5)):
        xs = _open_grid(lo, hi, n_grid)
        X, R = np.meshgrid(xs, rs, indexing="ij")
        Fv = form.F(X, R)
        bad = ~(X * Fv >= -MONO_SLACK)
        if w4 is None:
            w4 = _first_bad(bad, X, R)
        if w4_lit is None:
            w4_lit = _first_bad(~(Fv >= -MONO_SLACK), X, R)
        D = np.diff(Fv, axis=0)
        badm = ~(D > -MONO_SLACK * np.maximum(np.abs(Fv[1:]), np.abs(Fv[:-1])))
        if mono_ok and badm.any():
            mono_ok = False
            w4 = w4 or _first_bad(badm, X[1:], R[1:])
        xr = rng.uniform(lo, hi, n_random // 2)
        rr = rng.uniform(r_lo, r_hi, n_random // 2)
        badr = ~(xr * form.F(xr, rr) >= -MONO_SLACK)
        if w4 is None and badr.any():
            k = int(np.argmax(badr))
            w4 = (float(xr[k]), float(rr[k]))
    out["4"] = ConditionVerdict(w4 is None and mono_ok,
                                f"{n_grid}x{n_grid} grid per side + {n_random} random points",
                                w4, "sign condition read as x~ F >= 0")
    out["4_literal"] = ConditionVerdict(w4_lit is None, "grid", w4_lit,
                                        "unsigned reading F >= 0 (informational)")
    return out


def all_pass(verdicts: dict) -> bool:
    """True when conditions 1-4 pass (the informational literal reading is ignored)."""
    return all(verdicts[k].passed for k in ("1", "2", "3", "4"))
