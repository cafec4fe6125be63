"""Equilibria of the closed-loop system and their linear stability."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import PreconditionError
from .model import State, SystemParams, derived_constants, jacobian

#: Dead band on eigenvalue real parts used for stability labels.
EIG_TOL = 1e-10


class Kind(str, Enum):
    INTERIOR = "Interior"
    BOTTOM = "BottomSide"
    TOP = "TopSide"
    CORNER = "Corner"


class Stability(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    SADDLE = "Saddle"
    CENTER_CANDIDATE = "Center-candidate"


@dataclass(frozen=True)
class EquilibriumReport:
    location: State
    kind: Kind
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    stability: Stability

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "x": float(self.location.x),
            "r": float(self.location.r),
            "jacobian": np.asarray(self.jacobian, dtype=float).tolist(),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "stability": self.stability.value,
        }


def classify(eigenvalues, tol=EIG_TOL) -> Stability:
    """Label from eigenvalue real parts; anything inside the dead band that is
    not already unstable becomes a center candidate."""
    re = np.real(np.asarray(eigenvalues))
    pos = re > tol
    neg = re < -tol
    if neg.all():
        return Stability.STABLE
    if pos.any() and neg.any():
        return Stability.SADDLE
    if pos.any():
        return Stability.UNSTABLE
    return Stability.CENTER_CANDIDATE


def _report(x, r, kind, J, eigs=None):
    J = np.asarray(J, dtype=float)
    if eigs is None:
        eigs = np.linalg.eigvals(J)
    eigs = np.asarray(eigs, dtype=complex)
    # sort: larger real part first, then positive imaginary part first
    eigs = eigs[np.lexsort((-eigs.imag, -eigs.real))]
    return EquilibriumReport(State(float(x), float(r)), kind, J, eigs, classify(eigs))


def interior_condition_holds(p: SystemParams) -> bool:
    """Existence condition of the interior equilibrium."""
    th = p.theta
    k = derived_constants(p)
    return -(th * p.a + th**2 * p.b) < p.mu * k.theta_hat < th * p.c + th**2 * p.d


def standing_assumption_holds(p: SystemParams) -> bool:
    """Existence condition holds for every ``mu`` in ``[0, 1]`` (it is linear in
    ``mu``, so checking the endpoints suffices)."""
    return interior_condition_holds(p.with_(mu=0.0)) and interior_condition_holds(p.with_(mu=1.0))


def interior_location(p: SystemParams):
    """``(x*, r*)`` from the closed form (no existence check)."""
    th = p.theta
    k = derived_constants(p)
    return 1.0 / (th + 1.0), (th * p.a + th**2 * p.b + p.mu * k.theta_hat) / (th * k.zeta)


def interior_jacobian(p: SystemParams):
    """Closed-form Jacobian and eigenvalues at the interior equilibrium.

    Returns ``None`` when the interior equilibrium does not exist.
    """
    if p.u != 0:
        raise PreconditionError("use control.controlled_equilibrium for u > 0")
    if not interior_condition_holds(p):
        return None
    a, b, c, d, th, mu = p.a, p.b, p.c, p.d, p.theta, p.mu
    zeta, th_hat, delta, _ = derived_constants(p)
    J11 = (th**2 * (a * d - b * c) - mu * delta) / (th * (th + 1) * zeta)
    J12 = -th * zeta / (th + 1) ** 3
    J21 = (th + 1) * (c * th + d * th**2 - mu * th_hat) * (a * th + b * th**2 + mu * th_hat) \
        / (th**2 * zeta**2)
    J = np.array([[J11, J12], [J21, 0.0]])
    root = cmath.sqrt(J11**2 + 4 * J12 * J21)
    eigs = np.array([(J11 + root) / 2, (J11 - root) / 2])
    return J, eigs


def interior_equilibrium(p: SystemParams) -> EquilibriumReport | None:
    """Unique interior equilibrium, or ``None`` if the existence condition fails."""
    res = interior_jacobian(p)
    if res is None:
        return None
    J, eigs = res
    x, r = interior_location(p)
    return _report(x, r, Kind.INTERIOR, J, eigs)


# -- boundary sides -----------------------------------------------------------

def bottom_residual(x, p: SystemParams):
    """``dx/dt`` restricted to ``r=0``; its zeros are bottom-side equilibria."""
    return x * (1 - x) * (p.a * x + p.b * (1 - x) + p.u) + p.mu * (1 - 2 * x)


def top_residual(x, p: SystemParams):
    """``dx/dt`` restricted to ``r=1``."""
    return x * (1 - x) * (x * (p.d - p.c) - p.d + p.u) + p.mu * (1 - 2 * x)


def _unique_root(f, lo, hi):
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise PreconditionError(f"no sign change on [{lo}, {hi}]")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def boundary_equilibria(p: SystemParams) -> list[EquilibriumReport]:
    """Equilibria on the bottom (``r=0``) and top (``r=1``) sides for ``mu > 0``.

    The bottom-side residual is positive at ``x=1/2`` and equals ``-mu`` at
    ``x=1``; it has no zero on ``[0, 1/2]``, so bracketing ``(1/2, 1)`` finds the
    only root. The top side is the mirror image under ``x -> 1-x`` with
    ``(a, b) -> (d, c)``.
    """
    if p.mu == 0:
        raise PreconditionError("at mu=0 the boundary equilibria are the corners; use corner_analysis")
    if p.u != 0:
        raise PreconditionError("boundary_equilibria covers u=0; use the control module for u > 0")
    xb = _unique_root(lambda x: bottom_residual(x, p), 0.5, 1.0)
    xt = _unique_root(lambda x: top_residual(x, p), 0.0, 0.5)
    return [
        _report(xb, 0.0, Kind.BOTTOM, jacobian((xb, 0.0), p)),
        _report(xt, 1.0, Kind.TOP, jacobian((xt, 1.0), p)),
    ]


def side_location_intervals(p: SystemParams):
    """Proven location intervals ``(bottom, top)`` for the side equilibria.

    The side residuals do not involve ``theta``; the ``1/(theta+1)`` bounds are
    guaranteed only when :func:`standing_assumption_holds`.
    """
    s = 1.0 / (p.theta + 1.0)
    return (max(0.5, s), 1.0), (0.0, min(0.5, s))


# -- corners at mu = 0 --------------------------------------------------------

@dataclass(frozen=True)
class CornerAnalysis:
    reports: list
    traces: tuple


def corner_analysis(p: SystemParams) -> CornerAnalysis:
    """The four corner saddles ``E1..E4 = (0,0), (1,0), (1,1), (0,1)`` at ``mu=0``."""
    if p.mu != 0:
        raise PreconditionError("corners are equilibria only at mu=0")
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    diagonals = [(b, -1.0), (-a, th), (c, -th), (-d, 1.0)]
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    reports = [
        _report(x, r, Kind.CORNER, np.diag(diag), np.array(diag, dtype=complex))
        for (x, r), diag in zip(corners, diagonals)
    ]
    traces = (b - 1.0, th - a, c - th, 1.0 - d)
    return CornerAnalysis(reports, traces)


def all_equilibria(p: SystemParams) -> list[EquilibriumReport]:
    """Every equilibrium the analysis knows about for uncontrolled ``p``."""
    out = []
    eq = interior_equilibrium(p)
    if eq is not None:
        out.append(eq)
    if p.mu == 0:
        out.extend(corner_analysis(p).reports)
    else:
        out.extend(boundary_equilibria(p))
    return out
