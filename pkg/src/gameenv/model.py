"""Parameter/state types and the closed-loop vector field.

The strategy share ``x`` (cooperators) follows replicator-mutator dynamics on an
environment-dependent prisoner's-dilemma payoff matrix, and the resource
``r`` follows logistic dynamics driven by the strategy mix::

    dx/dt = x(1-x) [x r (-c+d-a+b) + x (a-b) - r (d+b) + b + u] + mu (1-2x)
    dr/dt = r(1-r) [theta x - (1-x)]

All downstream analysis is expressed in the coefficients ``(a, b, c, d)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedConfigurationError

#: Tolerance for unit-square membership of a State.
DOMAIN_TOL = 1e-9


def _as_matrix(m, name):
    arr = np.array(m, dtype=float)
    if arr.shape != (2, 2):
        raise ParameterError(f"{name} payoff matrix must be 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} payoff matrix has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PayoffPair:
    """Payoff matrices at depleted (``r=0``) and rich (``r=1``) environments.

    ``poor = [[R1, S1], [T1, P1]]`` must satisfy ``R1>T1, S1>P1`` and
    ``rich = [[R2, S2], [T2, P2]]`` must satisfy ``R2<T2, S2<P2``.
    """

    poor: np.ndarray
    rich: np.ndarray

    def __post_init__(self):
        poor = _as_matrix(self.poor, "poor")
        rich = _as_matrix(self.rich, "rich")
        object.__setattr__(self, "poor", poor)
        object.__setattr__(self, "rich", rich)
        (R1, S1), (T1, P1) = poor
        (R2, S2), (T2, P2) = rich
        for ok, label in ((R1 > T1, "R1>T1"), (S1 > P1, "S1>P1"),
                          (R2 < T2, "R2<T2"), (S2 < P2, "S2<P2")):
            if not ok:
                raise ParameterError(f"payoff inequality {label} violated")

    @classmethod
    def from_entries(cls, R1, S1, T1, P1, R2, S2, T2, P2):
        return cls([[R1, S1], [T1, P1]], [[R2, S2], [T2, P2]])

    def to_dict(self):
        (R1, S1), (T1, P1) = self.poor
        (R2, S2), (T2, P2) = self.rich
        return dict(R1=R1, S1=S1, T1=T1, P1=P1, R2=R2, S2=S2, T2=T2, P2=P2)


def reparameterize(pair: PayoffPair):
    """Return the game coefficients ``(a, b, c, d)`` of a payoff pair.

    ``a = R1-T1``, ``b = S1-P1``, ``c = T2-R2``, ``d = P2-S2``; all are
    positive by the payoff inequalities (checked on construction).
    """
    (R1, S1), (T1, P1) = pair.poor
    (R2, S2), (T2, P2) = pair.rich
    return (float(R1 - T1), float(S1 - P1), float(T2 - R2), float(P2 - S2))


def payoff_at(pair: PayoffPair, r: float, u: float = 0.0) -> np.ndarray:
    """Payoff matrix at resource level ``r``, with incentive ``u`` added to the
    cooperator row."""
    if not (0.0 <= r <= 1.0):
        raise DomainError(f"resource level r={r} outside [0, 1]")
    A = (1.0 - r) * pair.poor + r * pair.rich
    A[0, :] += u
    return A


class DerivedConstants(NamedTuple):
    zeta: float
    theta_hat: float
    delta: float
    sigma: float


@dataclass(frozen=True)
class SystemParams:
    """Coefficients, environment ratio, mutation rate and incentive.

    Parameters
    ----------
    a, b, c, d : float
        Game coefficients, all strictly positive.
    theta : float
        Ratio of enhancement (by cooperators) to degradation (by defectors).
    mu : float
        Symmetric mutation rate in ``[0, 1]``.
    u : float
        Constant incentive paid to cooperators; only supported with ``theta=1``.
    payoffs : PayoffPair, optional
        Raw matrices the coefficients were derived from, kept for reporting.
    """

    a: float
    b: float
    c: float
    d: float
    theta: float = 1.0
    mu: float = 0.0
    u: float = 0.0
    payoffs: PayoffPair | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "theta", "mu", "u"):
            val = getattr(self, name)
            try:
                val = float(val)
            except (TypeError, ValueError):
                raise ParameterError(f"{name} must be a real number, got {val!r}") from None
            if not math.isfinite(val):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        for name in ("a", "b", "c", "d"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"coefficient {name} must be > 0, got {getattr(self, name)}")
        if self.theta <= 0:
            raise ParameterError(f"theta must be > 0, got {self.theta}")
        if not (0.0 <= self.mu <= 1.0):
            raise ParameterError(f"mu must lie in [0, 1], got {self.mu}")
        if self.u < 0:
            raise ParameterError(f"incentive u must be >= 0, got {self.u}")

    @classmethod
    def from_payoffs(cls, pair: PayoffPair, theta=1.0, mu=0.0, u=0.0):
        a, b, c, d = reparameterize(pair)
        return cls(a, b, c, d, theta=theta, mu=mu, u=u, payoffs=pair)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @property
    def coefficients(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def det(self):
        """``ad - bc``; its sign governs most of the qualitative behavior."""
        return self.a * self.d - self.b * self.c

    @property
    def derived(self) -> DerivedConstants:
        return derived_constants(self)

    def to_dict(self):
        out = dict(a=self.a, b=self.b, c=self.c, d=self.d,
                   theta=self.theta, mu=self.mu, u=self.u)
        return out


def derived_constants(p: SystemParams) -> DerivedConstants:
    a, b, c, d, th = p.a, p.b, p.c, p.d, p.theta
    zeta = a + c + th * b + th * d
    theta_hat = th**3 + th**2 - th - 1
    delta = (a + c) * (1 + th**2 + 2 * th**3) + (b + d) * (2 * th + th**2 + th**4)
    return DerivedConstants(zeta, theta_hat, delta, a + b + c + d)


class State(NamedTuple):
    """Point ``(x, r)`` of the unit square."""

    x: float
    r: float

    def check(self, tol=DOMAIN_TOL) -> "State":
        if not (-tol <= self.x <= 1 + tol and -tol <= self.r <= 1 + tol):
            raise DomainError(f"state ({self.x}, {self.r}) outside the unit square")
        return self


def make_state(s, tol=DOMAIN_TOL) -> State:
    x, r = s
    return State(float(x), float(r)).check(tol)


def check_control_support(p: SystemParams):
    if p.u > 0 and p.theta != 1.0:
        raise UnsupportedConfigurationError(
            f"incentive u={p.u} requires theta=1 (got theta={p.theta})")


def rhs(p: SystemParams):
    """Return a fast scalar closure ``f(x, r) -> (dx, dr)`` for ``p``."""
    check_control_support(p)
    k = -p.c + p.d - p.a + p.b
    m = p.a - p.b
    n = p.d + p.b
    b_u = p.b + p.u
    mu = p.mu
    tp1 = p.theta + 1.0

    def f(x, r):
        return (x * (1.0 - x) * (k * x * r + m * x - n * r + b_u) + mu * (1.0 - 2.0 * x),
                r * (1.0 - r) * (tp1 * x - 1.0))

    return f


def vector_field(s, p: SystemParams):
    """Evaluate ``(dx/dt, dr/dt)`` at state ``s``.

    Works elementwise on arrays too (``s = (x_array, r_array)``), in which case
    no domain check is performed.
    """
    check_control_support(p)
    x, r = s
    if np.ndim(x) == 0 and np.ndim(r) == 0:
        x, r = make_state(s)
    a, b, c, d = p.coefficients
    dx = x * (1 - x) * (x * r * (-c + d - a + b) + x * (a - b) - r * (d + b) + b + p.u) \
        + p.mu * (1 - 2 * x)
    dr = r * (1 - r) * (p.theta * x - (1 - x))
    return dx, dr


def jacobian(s, p: SystemParams) -> np.ndarray:
    """Analytic Jacobian of the vector field at ``s``."""
    check_control_support(p)
    x, r = s
    k = -p.c + p.d - p.a + p.b
    m = p.a - p.b
    n = p.d + p.b
    L = k * x * r + m * x - n * r + p.b + p.u
    w = x * (1 - x)
    return np.array([
        [(1 - 2 * x) * L + w * (k * r + m) - 2 * p.mu, w * (k * x - n)],
        [(p.theta + 1) * r * (1 - r), (1 - 2 * r) * ((p.theta + 1) * x - 1)],
    ])


# -- parameter files ----------------------------------------------------------

_MATRIX_KEYS = ("R1", "S1", "T1", "P1", "R2", "S2", "T2", "P2")
_COEF_KEYS = ("a", "b", "c", "d")
_EXTRA_KEYS = ("theta", "mu", "u")


def params_from_mapping(data: Mapping) -> SystemParams:
    """Build parameters from a mapping holding exactly one of the key groups
    ``{R1..P2}`` or ``{a,b,c,d}``, plus optional ``theta``, ``mu``, ``u``."""
    if not isinstance(data, Mapping):
        raise ParameterError("parameter data must be a mapping")
    has_m = [k for k in _MATRIX_KEYS if k in data]
    has_c = [k for k in _COEF_KEYS if k in data]
    if has_m and has_c:
        raise ParameterError("give either payoff entries (R1..P2) or coefficients (a..d), not both")
    unknown = set(data) - set(_MATRIX_KEYS) - set(_COEF_KEYS) - set(_EXTRA_KEYS)
    if unknown:
        raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")
    extra = {k: data[k] for k in _EXTRA_KEYS if k in data}
    if has_m:
        missing = [k for k in _MATRIX_KEYS if k not in data]
        if missing:
            raise ParameterError(f"missing payoff entries: {missing}")
        pair = PayoffPair.from_entries(*(float(data[k]) for k in _MATRIX_KEYS))
        return SystemParams.from_payoffs(pair, **extra)
    if has_c:
        missing = [k for k in _COEF_KEYS if k not in data]
        if missing:
            raise ParameterError(f"missing coefficients: {missing}")
        return SystemParams(*(data[k] for k in _COEF_KEYS), **extra)
    raise ParameterError("no payoff entries (R1..P2) or coefficients (a..d) given")


def load_params(path) -> SystemParams:
    """Read parameters from a ``.json`` or ``.toml`` file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read parameter file {path}: {exc}") from exc
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ParameterError(f"malformed TOML in {path}: {exc}") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed JSON in {path}: {exc}") from exc
    return params_from_mapping(data)
