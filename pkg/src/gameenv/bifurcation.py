"""Hopf point, first Lyapunov coefficient, Dulac exponents and the
heteroclinic-cycle classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import interior_condition_holds, interior_location
from .errors import (DegenerateEigenvectorError, PreconditionError,
                     SingularPointError)
from .model import SystemParams, derived_constants, jacobian


@dataclass(frozen=True)
class HopfReport:
    """Hopf point of the interior equilibrium in the mutation rate.

    ``ell1`` is the closed-form coefficient; ``ell1_numeric`` comes from the
    normal-form algorithm with unit-length eigenvector (see
    :func:`first_lyapunov_numeric`). Both have the same sign, but their
    magnitudes depend on different eigenvector scalings.
    """

    mu1: float
    omega0: float
    ell1: float
    admissible: bool
    ell1_numeric: float = float("nan")

    def to_dict(self):
        return {"mu1": self.mu1, "omega0": self.omega0, "ell1": self.ell1,
                "ell1_numeric": self.ell1_numeric, "admissible": self.admissible}


def hopf_mu(p: SystemParams) -> float:
    """Raw ``theta^2 (ad-bc) / Delta`` (may be outside ``(0, 1]``)."""
    return p.theta**2 * p.det / derived_constants(p).delta


def _omega_sq(p: SystemParams, mu: float) -> float:
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    zeta, th_hat, _, _ = derived_constants(p)
    return (c * th + d * th**2 - mu * th_hat) * (a * th + b * th**2 + mu * th_hat) \
        / (th * (th + 1) ** 2 * zeta)


def hopf_admissible(p: SystemParams) -> bool:
    """``0 < ad - bc <= Delta / theta^2``, i.e. ``mu1`` in ``(0, 1]``."""
    return 0 < p.det <= derived_constants(p).delta / p.theta**2


def hopf_point(p: SystemParams) -> HopfReport | None:
    """Hopf bifurcation data, or ``None`` when ``ad - bc <= 0`` (the interior
    equilibrium never changes stability)."""
    if p.u != 0:
        raise PreconditionError("hopf_point is defined for the uncontrolled system (u=0)")
    if p.det <= 0:
        return None
    mu1 = hopf_mu(p)
    admissible = 0 < mu1 <= 1
    at = p.with_(mu=min(mu1, 1.0)) if admissible else None
    if at is None or not interior_condition_holds(at):
        return HopfReport(mu1, float("nan"), float("nan"), False)
    omega0 = math.sqrt(_omega_sq(p, mu1))
    return HopfReport(mu1, omega0, _ell1_formula(p, omega0), True,
                      first_lyapunov_numeric(p))


def _ell1_formula(p, omega0):
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    zeta, _, delta, _ = derived_constants(p)
    return th * (b * c - a * d) * zeta * ((b + d) * (th**3 + 2 * th) + (a + c) * (2 * th**3 + 1)) \
        / (2 * omega0**3 * (th + 1) ** 4 * delta)


def first_lyapunov_closed(p: SystemParams) -> float:
    """Closed-form first Lyapunov coefficient at ``mu = mu1``."""
    if not hopf_admissible(p):
        raise PreconditionError("closed-form l1 requires 0 < ad-bc <= Delta/theta^2")
    mu1 = hopf_mu(p)
    w2 = _omega_sq(p, mu1)
    if w2 <= 0:
        raise PreconditionError("no interior equilibrium at mu1")
    return _ell1_formula(p, math.sqrt(w2))


# -- normal-form computation --------------------------------------------------

def second_derivatives(y, p: SystemParams) -> np.ndarray:
    """Exact Hessians ``H[i, j, k] = d^2 f_i / dy_j dy_k`` (the field is cubic)."""
    x, r = y
    k = -p.c + p.d - p.a + p.b
    m = p.a - p.b
    n = p.d + p.b
    L = k * x * r + m * x - n * r + p.b + p.u
    tp1 = p.theta + 1
    f1_xx = -2 * L + 2 * (1 - 2 * x) * (k * r + m)
    f1_xr = (1 - 2 * x) * (k * x - n) + x * (1 - x) * k
    f2_xr = tp1 * (1 - 2 * r)
    f2_rr = -2 * (tp1 * x - 1)
    return np.array([[[f1_xx, f1_xr], [f1_xr, 0.0]],
                     [[0.0, f2_xr], [f2_xr, f2_rr]]])


def third_derivatives(y, p: SystemParams) -> np.ndarray:
    """Exact third-derivative tensor ``T[i, j, k, l]``."""
    x, r = y
    k = -p.c + p.d - p.a + p.b
    m = p.a - p.b
    n = p.d + p.b
    T = np.zeros((2, 2, 2, 2))
    T[0, 0, 0, 0] = -6 * (k * r + m)
    v = -2 * (k * x - n) + 2 * (1 - 2 * x) * k
    T[0, 0, 0, 1] = T[0, 0, 1, 0] = T[0, 1, 0, 0] = v
    w = -2 * (p.theta + 1)
    T[1, 0, 1, 1] = T[1, 1, 0, 1] = T[1, 1, 1, 0] = w
    return T


def lyapunov_from_vectors(A0, omega0, q, pvec, hess, third) -> float:
    """``l1 = Re(i g20 g11 + omega0 g21) / (2 omega0^2)`` for given eigenvectors.

    ``q`` and ``pvec`` are used as given (only ``<p, q> = 1`` is enforced), so
    the result scales with ``|q|^2``.
    """
    q = np.asarray(q, dtype=complex)
    pvec = np.asarray(pvec, dtype=complex)
    if abs(np.vdot(pvec, q) - 1) > 1e-10:
        raise DegenerateEigenvectorError("eigenvectors must satisfy <p, q> = 1")
    qb = q.conj()
    B = lambda u, v: np.einsum("ijk,j,k->i", hess, u, v)
    C = lambda u, v, w: np.einsum("ijkl,j,k,l->i", third, u, v, w)
    g20 = np.vdot(pvec, B(q, q))
    g11 = np.vdot(pvec, B(q, qb))
    g21 = np.vdot(pvec, C(q, q, qb))
    return float((1j * g20 * g11 + omega0 * g21).real / (2 * omega0**2))


def hopf_eigenvectors(A0, omega0):
    """Unit-length ``q`` with ``A0 q = i w q`` and ``p`` with ``A0^T p = -i w p``,
    ``<p, q> = 1``."""
    A0 = np.asarray(A0, dtype=float)
    ev, V = np.linalg.eig(A0)
    i = int(np.argmin(np.abs(ev - 1j * omega0)))
    if abs(ev[i] - 1j * omega0) > 1e-8 * max(1.0, omega0):
        raise DegenerateEigenvectorError(f"A0 has no eigenvalue i*{omega0}")
    q = V[:, i] / np.linalg.norm(V[:, i])
    evt, W = np.linalg.eig(A0.T)
    j = int(np.argmin(np.abs(evt + 1j * omega0)))
    pv = W[:, j]
    s = np.vdot(pv, q)
    if abs(s) < 1e-12:
        raise DegenerateEigenvectorError("cannot normalize <p, q> = 1")
    pv = pv / s.conjugate()
    return q, pv


def first_lyapunov_numeric(p: SystemParams, q=None) -> float:
    """First Lyapunov coefficient at ``mu1`` by the normal-form algorithm.

    Eigenvectors are normalized so that ``<q, q> = 1`` and ``<p, q> = 1``; a
    user-supplied ``q`` is rescaled to unit length first. The Taylor
    coefficients come from exact polynomial derivatives.
    """
    if p.det <= 0:
        raise PreconditionError("no Hopf point when ad-bc <= 0")
    mu1 = hopf_mu(p)
    pm = p.with_(mu=min(max(mu1, 0.0), 1.0))
    if not (0 < mu1 <= 1) or not interior_condition_holds(pm):
        raise PreconditionError("Hopf point outside the admissible range")
    y0 = interior_location(pm)
    A0 = jacobian(y0, pm)
    A0[1, 1] = 0.0
    omega0 = math.sqrt(-A0[0, 1] * A0[1, 0])
    qq, pv = hopf_eigenvectors(A0, omega0)
    if q is not None:
        q = np.asarray(q, dtype=complex)
        if np.linalg.norm(A0 @ q - 1j * omega0 * q) > 1e-8 * np.linalg.norm(q):
            raise DegenerateEigenvectorError("supplied q is not an eigenvector for i*omega0")
        qq = q / np.linalg.norm(q)
        s = np.vdot(pv, qq)
        pv = pv / s.conjugate()
    return lyapunov_from_vectors(A0, omega0, qq, pv,
                                 second_derivatives(y0, pm), third_derivatives(y0, pm))


def transversality_slope(p: SystemParams) -> float:
    """``d Re(lambda) / d mu`` at the Hopf point.

    The Jacobian has a zero ``(2, 2)`` entry at the interior equilibrium, so
    ``Re(lambda) = J11 / 2`` and the slope is half of
    ``d J11 / d mu = -Delta / (theta (theta+1) zeta)``.
    """
    zeta, _, delta, _ = derived_constants(p)
    return -delta / (2 * p.theta * (p.theta + 1) * zeta)


# -- Dulac function -----------------------------------------------------------

def g_shape(x, alpha):
    """Mutation-free shape ``(1-2x)(3x+alpha) / (x(1-x))``."""
    return (1 - 2 * x) * (3 * x + alpha) / (x * (1 - x))


def xbar_of(alpha: float) -> float:
    """Maximizer of :func:`g_shape` on ``(0, 1)`` for ``alpha`` in ``(-2, -1)``."""
    # critical points solve (3 + 2 alpha) x^2 - 2 alpha x + alpha = 0; the root
    # in (0, 1) takes the + sign on both sides of alpha = -3/2
    if alpha == -1.5:
        return 0.5
    root = math.sqrt(-alpha * (3 + alpha))
    return (alpha + root) / (3 + 2 * alpha)


@dataclass(frozen=True)
class DulacExponents:
    alpha: float
    beta: float
    gamma: float
    delta: float
    xbar: float
    g_at_xbar: float
    mu0: float | None
    regime: str
    residuals: np.ndarray = field(repr=False)

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma,
                "delta": self.delta, "xbar": self.xbar, "g_at_xbar": self.g_at_xbar,
                "mu0": self.mu0, "regime": self.regime,
                "max_residual": float(np.max(np.abs(self.residuals)))}


def exponent_values(p: SystemParams):
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    z = derived_constants(p).zeta
    alpha = -(z + c + a) / z
    beta = (-2 * z + c + a) / z
    gamma = (-(a + th + 1) * z + a * a + a * c - a * b - b * c) / ((th + 1) * z)
    delta = -((a + c) * (th * b + th * d + d + a) + (th + 1 - a) * z) / ((th + 1) * z)
    return alpha, beta, gamma, delta


def dulac_system_residuals(p: SystemParams, exps=None) -> np.ndarray:
    """Residuals of the five linear conditions that make every non-mutation
    term of the Dulac divergence cancel."""
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    al, be, ga, de = exps if exps is not None else exponent_values(p)
    s1 = -c + 2 * d - a + 2 * b
    return np.array([
        (al + be + 3) * (-c + d - a + b),
        (al + be + 3) * (a - b),
        s1 * al + (d + b) * be - (th + 1) * (ga + de + 2) + 2 * s1,
        (a - 2 * b) * al - b * be + (th + 1) * (ga + 1) + 2 * a - 4 * b,
        -(d + b) * al + ga + de + 2 - b - d,
    ])


MU0_ANY = "no closed orbits for any mu"
MU0_POSITIVE = "no closed orbits for mu>0"
MU0_THRESHOLD = "no closed orbits for mu>=mu0"


@dataclass(frozen=True)
class Mu0Result:
    value: float | None
    regime: str


def mu0_threshold(p: SystemParams) -> Mu0Result:
    """Mutation rate above which the Dulac criterion excludes closed orbits."""
    if p.det < 0:
        return Mu0Result(None, MU0_ANY)
    if p.det == 0:
        return Mu0Result(None, MU0_POSITIVE)
    al = exponent_values(p)[0]
    xb = xbar_of(al)
    th = p.theta
    zeta = derived_constants(p).zeta
    bracket = (1 - 2 * al) * xb + al - 4 * xb**2
    val = th * (p.b * p.c - p.a * p.d) * xb * (1 - xb) / ((th + 1) * zeta * bracket)
    return Mu0Result(val, MU0_THRESHOLD)


def dulac_exponents(p: SystemParams) -> DulacExponents:
    exps = exponent_values(p)
    xb = xbar_of(exps[0])
    m0 = mu0_threshold(p)
    return DulacExponents(*exps, xbar=xb, g_at_xbar=g_shape(xb, exps[0]),
                          mu0=m0.value, regime=m0.regime,
                          residuals=dulac_system_residuals(p, exps))


def dulac_factor(x, r, exps):
    al, be, ga, de = exps
    return x**al * (1 - x) ** be * r**ga * (1 - r) ** de


def _check_interior(x, r, strict_r=False):
    if not (0 < x < 1):
        raise SingularPointError(f"Dulac factor singular at x={x}")
    if strict_r and not (0 < r < 1):
        raise SingularPointError(f"Dulac factor singular at r={r}")
    if not (0 <= r <= 1):
        raise SingularPointError(f"r={r} outside [0, 1]")


def dulac_divergence(s, p: SystemParams) -> float:
    """``div(phi f)`` via the simplified closed form."""
    x, r = s
    _check_interior(x, r)
    if p.u != 0:
        raise PreconditionError("use control.controlled_dulac_divergence for u > 0")
    exps = exponent_values(p)
    th = p.theta
    zeta = derived_constants(p).zeta
    phi = dulac_factor(x, r, exps)
    return phi * (p.mu * g_shape(x, exps[0]) - 2 * p.mu
                  - th * (p.b * p.c - p.a * p.d) / ((th + 1) * zeta))


def divergence_product_rule(s, p: SystemParams, exps) -> float:
    """``div(phi f)`` expanded by the product rule from the raw field and its
    Jacobian; independent of the simplified forms."""
    from .model import vector_field
    x, r = s
    al, be, ga, de = exps
    f1, f2 = vector_field((x, r), p)
    J = jacobian((x, r), p)
    phi = dulac_factor(x, r, exps)
    dlog_x = al / x - be / (1 - x)
    # (ga/r - de/(1-r)) * f2 with the r(1-r) factor cancelled by hand
    term_r = (ga * (1 - r) - de * r) * (p.theta * x - (1 - x))
    return phi * (dlog_x * f1 + J[0, 0] + term_r + J[1, 1])


# -- heteroclinic cycle -------------------------------------------------------

@dataclass(frozen=True)
class HeteroclinicReport:
    stability: str
    traces: tuple
    conditions: dict
    bifurcation_possible: bool

    def to_dict(self):
        return {"stability": self.stability, "traces": list(self.traces),
                "conditions": self.conditions,
                "bifurcation_possible": self.bifurcation_possible}


def heteroclinic_classification(p: SystemParams) -> HeteroclinicReport:
    """Stability of the boundary heteroclinic cycle at ``mu=0`` and whether a
    stable cycle may bifurcate from it for small ``mu > 0``."""
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    if p.det > 0:
        stab = "stable"
    elif p.det < 0:
        stab = "unstable"
    else:
        stab = "marginal"
    conds = {"a>theta": a > th, "b<1": b < 1, "c<theta": c < th, "d>1": d > 1}
    traces = (b - 1.0, th - a, c - th, 1.0 - d)
    return HeteroclinicReport(stab, traces, conds, all(conds.values()))
