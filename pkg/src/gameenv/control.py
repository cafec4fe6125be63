"""Constant-incentive control: controlled equilibria, thresholds and regimes.

An incentive ``u >= 0`` is added to both cooperator payoffs. With ``theta = 1``
the interior equilibrium moves up to ``(1/2, (a+b+2u)/sigma)`` and disappears
at ``u = (c+d)/2``; beyond that a stable equilibrium appears on the top side.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .bifurcation import dulac_exponents, dulac_factor, g_shape
from .equilibria import EquilibriumReport, Kind, _report, top_residual
from .errors import PreconditionError, SingularPointError, UnsupportedConfigurationError
from .flow import IntegratorOptions, integrate
from .model import SystemParams, jacobian

#: Relative band within which ``a+c`` and ``b+d`` are treated as equal.
BALANCE_BAND = 1e-12
#: Margin factor above ``(c+d)/2`` for boundary-stabilizing recommendations.
BOUNDARY_MARGIN = 1.1


class Regime(str, Enum):
    INTERIOR_STABILIZABLE = "InteriorStabilizable"
    BOUNDARY_ONLY = "BoundaryOnly"
    AMPLITUDE_REDUCTION_ONLY = "AmplitudeReductionOnly"


def _require_theta1(p: SystemParams):
    if p.theta != 1.0:
        raise UnsupportedConfigurationError(f"control analysis requires theta=1 (got {p.theta})")


def u_half(p: SystemParams) -> float:
    """Incentive ``(c+d)/2`` at which the interior equilibrium leaves the square."""
    return 0.5 * (p.c + p.d)


def balance(p: SystemParams) -> int:
    """Sign of ``(a+c) - (b+d)``, zero inside the relative equality band."""
    s = (p.a + p.c) - (p.b + p.d)
    if abs(s) <= BALANCE_BAND * max(p.a + p.c, p.b + p.d):
        return 0
    return 1 if s > 0 else -1


def controlled_jacobian(p: SystemParams):
    """Closed-form Jacobian and eigenvalues at the controlled interior equilibrium."""
    a, b, c, d, mu, u = p.a, p.b, p.c, p.d, p.mu, p.u
    sig = a + b + c + d
    J11 = (a * d - b * c + (b + d - a - c) * u) / (2 * sig) - 2 * mu
    J12 = -sig / 8
    J21 = 2 * (a + b + 2 * u) * (c + d - 2 * u) / sig**2
    J = np.array([[J11, J12], [J21, 0.0]])
    root = cmath.sqrt(J11**2 + 4 * J12 * J21)
    return J, np.array([(J11 + root) / 2, (J11 - root) / 2])


def controlled_equilibrium(p: SystemParams) -> EquilibriumReport | None:
    """Interior equilibrium under incentive ``p.u``; ``None`` once ``u >= (c+d)/2``."""
    _require_theta1(p)
    if p.u >= u_half(p):
        return None
    J, eigs = controlled_jacobian(p)
    r = (p.a + p.b + 2 * p.u) / (p.a + p.b + p.c + p.d)
    return _report(0.5, r, Kind.INTERIOR, J, eigs)


def _require_boundary_regime(p: SystemParams):
    _require_theta1(p)
    if p.u <= u_half(p):
        raise PreconditionError(f"top-side stabilization needs u > (c+d)/2 = {u_half(p)}, got {p.u}")
    if not (0.0 < p.mu <= 1.0):
        raise PreconditionError("mu must lie in (0, 1]")


def controlled_boundary_equilibrium(p: SystemParams) -> EquilibriumReport:
    """Top-side equilibrium ``(x_t*, 1)`` with ``x_t* in (1/2, 1)`` for ``u > (c+d)/2``.

    The top-side residual equals ``(u - (c+d)/2)/4 > 0`` at ``x = 1/2`` and
    ``-mu`` at ``x = 1``, so the root is bracketed.
    """
    _require_boundary_regime(p)
    x = brentq(lambda s: top_residual(s, p), 0.5, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return _report(x, 1.0, Kind.TOP, jacobian((x, 1.0), p))


def extra_top_side_roots(p: SystemParams, n_sub: int = 1000, eps: float = 1e-6):
    """Further top-side equilibria in ``(eps, 1/2)``, found by sign-change scanning."""
    _require_boundary_regime(p)
    xs = np.linspace(eps, 0.5, n_sub + 1)
    vals = top_residual(xs, p)
    out = []
    for k in range(n_sub):
        if vals[k] == 0.0:
            x = xs[k]
        elif vals[k] * vals[k + 1] < 0:
            x = brentq(lambda s: top_residual(s, p), xs[k], xs[k + 1], xtol=1e-15)
        else:
            continue
        out.append(_report(x, 1.0, Kind.TOP, jacobian((x, 1.0), p)))
    return out


@dataclass(frozen=True)
class ControlDesign:
    regime: Regime
    u1: float | None
    u2: float | None
    u_half: float
    recommended_u: float
    target: EquilibriumReport
    borderline: bool = False
    notes: tuple = field(default=())

    def window(self):
        """Proven interval of stabilizing incentives for the regime."""
        if self.regime is Regime.INTERIOR_STABILIZABLE:
            return (max(self.u1, 0.0), self.u_half)
        return (self.u_half, float("inf"))

    def to_dict(self):
        lo, hi = self.window()
        return {"regime": self.regime.value, "u1": self.u1, "u2": self.u2,
                "u_half": self.u_half, "window": [lo, hi if np.isfinite(hi) else None],
                "recommended_u": self.recommended_u, "target": self.target.to_dict(),
                "borderline": self.borderline, "notes": list(self.notes)}


def threshold_values(p: SystemParams):
    """``(u1, u2)`` from the closed forms; meaningful when ``a+c > b+d``."""
    a, b, c, d, mu = p.a, p.b, p.c, p.d, p.mu
    sig = a + b + c + d
    s = a + c - b - d
    g = dulac_exponents(p.with_(u=0.0)).g_at_xbar
    u2 = (a * d - b * c - 4 * mu * sig) / s
    u1 = (a * d - b * c - (4 - g) * mu * sig) / s
    return u1, u2


def control_thresholds(p: SystemParams) -> ControlDesign:
    """Classify the control regime and recommend an incentive.

    * ``a+c > b+d`` and ``u1 < (c+d)/2``: the interior equilibrium is stabilized
      for ``u`` in ``(u1, (c+d)/2)``; the midpoint is recommended.
    * ``a+c > b+d`` with ``u1 >= (c+d)/2``, or ``a+c < b+d``: only the top-side
      equilibrium can be made attracting; ``1.1 (c+d)/2`` is recommended.
    * ``a+c = b+d``: the incentive cannot stabilize the interior equilibrium,
      only shrink the oscillation; the boundary option ``1.1 (c+d)/2`` is
      still recommended.
    """
    _require_theta1(p)
    if not (0.0 < p.mu <= 1.0):
        raise PreconditionError("control thresholds need mu in (0, 1]")
    uh = u_half(p)
    sign = balance(p)
    notes = []
    borderline = False
    u1 = u2 = None
    if sign > 0:
        u1, u2 = threshold_values(p)
        if u1 < uh:
            regime = Regime.INTERIOR_STABILIZABLE
            rec = 0.5 * (max(u1, 0.0) + uh)
        else:
            regime = Regime.BOUNDARY_ONLY
            rec = BOUNDARY_MARGIN * uh
            if u1 == uh:
                borderline = True
                notes.append("u1 equals (c+d)/2 exactly; treated as boundary-only")
    elif sign < 0:
        regime = Regime.BOUNDARY_ONLY
        rec = BOUNDARY_MARGIN * uh
    else:
        regime = Regime.AMPLITUDE_REDUCTION_ONLY
        rec = BOUNDARY_MARGIN * uh
        notes.append("interior equilibrium cannot be stabilized; "
                     "u < (c+d)/2 only reduces the oscillation amplitude")
    q = p.with_(u=rec)
    target = controlled_equilibrium(q) if regime is Regime.INTERIOR_STABILIZABLE \
        else controlled_boundary_equilibrium(q)
    return ControlDesign(regime, u1, u2, uh, rec, target, borderline, tuple(notes))


def controlled_exponents(p: SystemParams):
    """Exponents ``(alpha, beta, gamma - u/2, delta + u/2)`` of the controlled
    Dulac factor, in the order used by :func:`dulac_factor`."""
    e = dulac_exponents(p.with_(u=0.0))
    return (e.alpha, e.beta, e.gamma - 0.5 * p.u, e.delta + 0.5 * p.u)


def controlled_dulac_divergence(s, p: SystemParams) -> float:
    """Closed-form divergence of ``phi_c f`` for the controlled system."""
    _require_theta1(p)
    x, r = s
    if not (0 < x < 1 and 0 < r < 1):
        raise SingularPointError(f"controlled Dulac factor singular at ({x}, {r})")
    exps = controlled_exponents(p)
    al = exps[0]
    sig = p.a + p.b + p.c + p.d
    return dulac_factor(x, r, exps) * (g_shape(x, al) * p.mu - 2 * p.mu + (1.5 + al) * p.u
                                       - (p.b * p.c - p.a * p.d) / (2 * sig))


# -- verification ---------------------------------------------------------------

@dataclass(frozen=True)
class VerificationResult:
    u: float
    target: tuple
    finals: np.ndarray
    distances: np.ndarray
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.distances < self.tol))


def start_grid(n: int = 5, lo: float = 0.1, hi: float = 0.9):
    g = np.linspace(lo, hi, n)
    return [(x, r) for x in g for r in g]


def verify_design(p: SystemParams, u: float, target, *, t_end: float = 1000.0,
                  tol: float = 1e-3, starts=None, opts: IntegratorOptions | None = None):
    """Integrate the controlled system from a start grid and measure the final
    distance to ``target``."""
    q = p.with_(u=u)
    starts = start_grid() if starts is None else starts
    opts = opts or IntegratorOptions(rel_tol=1e-8, abs_tol=1e-11, max_step=0.5)
    finals = np.array([integrate(s, q, opts, t_end=t_end, record=False).final for s in starts])
    dist = np.max(np.abs(finals - np.asarray(target, dtype=float)), axis=1)
    return VerificationResult(u, tuple(target), finals, dist, tol)
