"""Limit-cycle detection by first-return maps and parameter sweeps.

The section is the line ``x = x* = 1/(theta+1)``. Because ``dr/dt`` changes
sign exactly there, an orbit crosses it with decreasing ``x`` at its maximum
``r`` and with increasing ``x`` at its minimum ``r``. The return map ``P`` uses
the decreasing-``x`` crossings, which lie above the equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid

from .equilibria import interior_equilibrium
from .errors import IntegrationError, PreconditionError
from .flow import IntegratorOptions, Section, integrate
from .model import State, SystemParams

#: Integrator settings used for return maps; tighter than the flow defaults so
#: that fixed-point residuals of 1e-8 are meaningful.
CYCLE_OPTIONS = IntegratorOptions(rel_tol=1e-11, abs_tol=1e-13, max_step=0.1)


class CycleStatus(str, Enum):
    FOUND = "found"
    ABSENT = "absent"
    INCONCLUSIVE = "inconclusive"
    NO_EQUILIBRIUM = "interior equilibrium absent"


@dataclass(frozen=True)
class LimitCycle:
    samples: np.ndarray
    times: np.ndarray
    period: float
    r_min: float
    r_max: float
    floquet: float
    section_r: float
    residual: float
    winding: int

    @property
    def r_amplitude(self) -> float:
        return self.r_max - self.r_min

    @property
    def stable(self) -> bool:
        return abs(self.floquet) < 1.0

    @property
    def r_mean(self) -> float:
        """Time average of ``r`` over one period (trapezoid rule)."""
        return float(trapezoid(self.samples[:, 1], self.times) / self.period)

    def to_dict(self):
        return {"period": self.period, "r_min": self.r_min, "r_max": self.r_max,
                "r_amplitude": self.r_amplitude, "floquet": self.floquet,
                "section_r": self.section_r, "residual": self.residual,
                "winding": self.winding, "stable": self.stable,
                "t": self.times.tolist(), "x": self.samples[:, 0].tolist(),
                "r": self.samples[:, 1].tolist()}


@dataclass(frozen=True)
class CycleSearch:
    status: CycleStatus
    cycle: LimitCycle | None
    iterates: tuple
    returns: int
    message: str = ""


def equilibrium_of(p: SystemParams):
    """Interior (controlled when ``u > 0``) equilibrium report or ``None``."""
    if p.u == 0:
        return interior_equilibrium(p)
    from .control import controlled_equilibrium
    return controlled_equilibrium(p)


class ReturnMap:
    """First-return map on ``x = x*`` (decreasing-``x`` crossings)."""

    def __init__(self, p: SystemParams, opts: IntegratorOptions = CYCLE_OPTIONS,
                 t_max: float = 2000.0):
        self.p = p
        self.opts = opts
        self.t_max = t_max
        self.xs = 1.0 / (p.theta + 1.0)
        self.section = Section(self.xs, -1)
        self.calls = 0

    def first_hit(self, s0):
        """Integrate from ``s0`` to the next decreasing-``x`` crossing.

        Returns the crossing event (``None`` if there is none within ``t_max``)
        and the final state of the run.
        """
        tr = integrate(s0, self.p, self.opts, t_end=self.t_max, sections=[self.section],
                       stop_after=1, record=False)
        return (tr.events[0] if tr.events else None), tr.final

    def __call__(self, r: float):
        self.calls += 1
        ev, last = self.first_hit((self.xs, r))
        if ev is None:
            raise _NoReturn(r, last)
        return ev.state.r

    def orbit(self, r: float):
        """One full revolution from ``(x*, r)``, recording both crossings."""
        secs = [Section(self.xs, -1), Section(self.xs, +1)]
        tr = integrate((self.xs, r), self.p, self.opts, t_end=self.t_max, sections=secs,
                       stop_after=2)
        return tr


def _winding(samples, center):
    ang = np.unwrap(np.arctan2(samples[:, 1] - center[1], samples[:, 0] - center[0]))
    return int(round((ang[-1] - ang[0]) / (2 * math.pi)))


def _build_cycle(P: ReturnMap, r_fix: float, center, fd_step: float = 1e-5):
    tr = P.orbit(r_fix)
    if len(tr.events) < 2:
        return None
    up, down = tr.events[0], tr.events[1]
    samples = tr.states
    r_min = min(up.state.r, float(samples[:, 1].min()))
    r_max = max(r_fix, down.state.r, float(samples[:, 1].max()))
    residual = abs(down.state.r - r_fix)
    h = min(fd_step, 0.5 * (r_fix - center[1]), 0.5 * (1.0 - r_fix))
    try:
        floquet = (P(r_fix + h) - P(r_fix - h)) / (2 * h) if h > 0 else float("nan")
    except _NoReturn:
        floquet = float("nan")
    return LimitCycle(samples, tr.times, float(down.t), float(r_min), float(r_max),
                      float(floquet), float(r_fix), float(residual), _winding(samples, center))


def find_limit_cycle(p: SystemParams, seed=None, *, tol: float = 1e-9, max_returns: int = 500,
                     absent_tol: float = 1e-7, opts: IntegratorOptions = CYCLE_OPTIONS,
                     accelerate: bool = True) -> CycleSearch:
    """Search for an attracting cycle by iterating the first-return map.

    Parameters
    ----------
    seed : State or (x, r), optional
        Start point; defaults to the equilibrium displaced by 1e-2 along the
        section. The first crossing of the section from the seed starts the
        iteration.
    tol : float
        Convergence threshold on ``|r_{k+1} - r_k|``.
    max_returns : int
        Budget of return-map evaluations before the search is inconclusive.
    absent_tol : float
        Iterates closer than this to the equilibrium mean the orbit spirals in.
    accelerate : bool
        Apply an Aitken extrapolation after every two plain returns (falls back
        to the plain iterate if the extrapolation leaves the admissible range).

    Returns
    -------
    CycleSearch
        ``found`` with the cycle, ``absent`` when the iterates collapse onto the
        equilibrium, or ``inconclusive`` with the iterates seen so far.
    """
    eq = equilibrium_of(p)
    if eq is None:
        return CycleSearch(CycleStatus.NO_EQUILIBRIUM, None, (), 0,
                           "no interior equilibrium for these parameters")
    center = (eq.location.x, eq.location.r)
    rs = center[1]
    P = ReturnMap(p, opts)
    if seed is None:
        seed = (P.xs, min(rs + 1e-2, 0.5 * (rs + 1.0)))
    try:
        its = []
        ev, last = P.first_hit(seed)
        if ev is None:
            raise _NoReturn(None, last)
        r = ev.state.r
        its.append(r)

        def step(v):
            w = P(v)
            its.append(w)
            return w

        while P.calls < max_returns:
            if r - rs < absent_tol:
                return CycleSearch(CycleStatus.ABSENT, None, tuple(its), P.calls,
                                   "return map iterates converge to the equilibrium")
            r1 = step(r)
            if abs(r1 - r) < tol:
                r = r1
                break
            if not accelerate:
                r = r1
                continue
            r2 = step(r1)
            if abs(r2 - r1) < tol:
                r = r2
                break
            den = r2 - 2 * r1 + r
            ra = r - (r1 - r) ** 2 / den if den != 0 else r2
            r = ra if rs < ra < 1.0 and math.isfinite(ra) else r2
        else:
            return CycleSearch(CycleStatus.INCONCLUSIVE, None, tuple(its), P.calls,
                               f"no convergence within {max_returns} returns")
        if r - rs < absent_tol:
            return CycleSearch(CycleStatus.ABSENT, None, tuple(its), P.calls,
                               "return map iterates converge to the equilibrium")
        cyc = _build_cycle(P, r, center)
    except _NoReturn as exc:
        last = exc.args[1]
        if _settled_on_boundary(p, last):
            return CycleSearch(CycleStatus.ABSENT, None, tuple(its), P.calls,
                               f"orbit converges to the boundary equilibrium "
                               f"({last.x:.6f}, {last.r:.6f})")
        return CycleSearch(CycleStatus.INCONCLUSIVE, None, tuple(its), P.calls,
                           "orbit did not return to the section")
    except IntegrationError as exc:
        return CycleSearch(CycleStatus.INCONCLUSIVE, None, (), P.calls, str(exc))
    if cyc is None:
        return CycleSearch(CycleStatus.INCONCLUSIVE, None, tuple(its), P.calls,
                           "cycle orbit did not close")
    return CycleSearch(CycleStatus.FOUND, cyc, tuple(its), P.calls)


class _NoReturn(Exception):
    """Raised with ``(start_r, final_state)`` when an orbit misses the section."""


def _settled_on_boundary(p: SystemParams, s, tol: float = 1e-8) -> bool:
    from .model import rhs
    on_side = min(s.r, 1.0 - s.r) < tol or min(s.x, 1.0 - s.x) < tol
    fx, fr = rhs(p)(s.x, s.r)
    return on_side and math.hypot(fx, fr) < 1e-6


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class BranchRecord:
    param: float
    eq_x: float
    eq_r: float
    eq_stability: str
    status: CycleStatus
    cycle: LimitCycle | None

    def row(self):
        c = self.cycle
        nan = float("nan")
        return (self.param, self.eq_x, self.eq_r, self.eq_stability,
                c.r_min if c else nan, c.r_max if c else nan,
                c.period if c else nan, c.floquet if c else nan, self.status.value)


CSV_COLUMNS = ("param", "eq_x", "eq_r", "eq_stable", "cyc_rmin", "cyc_rmax", "period",
               "floquet", "status")


def _fmt(v):
    if isinstance(v, str):
        return v
    return f"{v:.11e}"


@dataclass
class BifurcationDiagram:
    parameter: str
    records: list = field(default_factory=list)
    verdict: str | None = None

    @property
    def grid(self):
        return np.array([rec.param for rec in self.records])

    def amplitudes(self):
        return np.array([rec.cycle.r_amplitude if rec.cycle else np.nan for rec in self.records])

    def to_csv(self, path=None):
        lines = [",".join(CSV_COLUMNS)]
        for rec in self.records:
            lines.append(",".join(_fmt(v) for v in rec.row()))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_dict(self):
        return {"parameter": self.parameter, "verdict": self.verdict,
                "records": [dict(zip(CSV_COLUMNS, rec.row())) for rec in self.records]}


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise PreconditionError("parameter grid must be a non-empty sequence")
    if np.any(np.diff(grid) <= 0):
        raise PreconditionError("parameter grid must be strictly increasing")
    return grid


def _initial_seed(p: SystemParams, eq):
    """Equilibrium displaced by 1e-2 along the unstable direction; for a
    complex pair the real part of the eigenvector is used."""
    vals, vecs = np.linalg.eig(eq.jacobian)
    v = np.real(vecs[:, int(np.argmax(vals.real))])
    v = v / np.linalg.norm(v)
    if v[1] < 0:
        v = -v
    return (eq.location.x + 1e-2 * v[0], eq.location.r + 1e-2 * v[1])


def _sweep(p: SystemParams, name: str, grid, max_returns: int):
    diagram = BifurcationDiagram(name)
    prev = None
    for val in grid:
        q = p.with_(**{name: float(val)})
        eq = equilibrium_of(q)
        if eq is None:
            diagram.records.append(BranchRecord(float(val), float("nan"), float("nan"), "absent",
                                                CycleStatus.NO_EQUILIBRIUM, None))
            prev = None
            continue
        xs = eq.location.x
        if prev is not None and prev.cycle is not None:
            seed = (xs, prev.cycle.section_r)
        else:
            seed = _initial_seed(q, eq)
        res = find_limit_cycle(q, seed, max_returns=max_returns)
        diagram.records.append(BranchRecord(float(val), xs, eq.location.r, eq.stability.value,
                                            res.status, res.cycle))
        prev = res
    return diagram


def sweep_mu(p: SystemParams, grid, *, max_returns: int = 500) -> BifurcationDiagram:
    """Equilibrium branch and cycle envelope over a grid of mutation rates."""
    if p.u != 0:
        raise PreconditionError("sweep_mu is defined for the uncontrolled system (u=0)")
    return _sweep(p, "mu", _check_grid(grid), max_returns)


def monotonicity(values) -> str:
    v = np.asarray(values, dtype=float)
    if v.size < 2 or np.any(~np.isfinite(v)):
        return "undetermined"
    d = np.diff(v)
    if np.all(d < 0):
        return "strictly decreasing"
    if np.all(d > 0):
        return "strictly increasing"
    return "non-monotone"


def sweep_u_amplitude(p: SystemParams, grid, *, max_returns: int = 500) -> BifurcationDiagram:
    """Cycle amplitude as the incentive grows, in the balanced regime
    ``theta=1, a+c=b+d`` with ``0 < mu < mu1``.

    Grid points with ``u >= (c+d)/2`` are recorded with status
    ``interior equilibrium absent``; the monotonicity verdict covers the rest.
    """
    from .bifurcation import hopf_mu
    from .control import balance
    if p.theta != 1.0:
        raise PreconditionError("amplitude sweep requires theta=1")
    if balance(p) != 0:
        raise PreconditionError("amplitude sweep requires a+c=b+d")
    base = p.with_(u=0.0)
    if not (0.0 < p.mu < hopf_mu(base)):
        raise PreconditionError("amplitude sweep requires 0 < mu < mu1")
    diagram = _sweep(base, "u", _check_grid(grid), max_returns)
    amps = [rec.cycle.r_amplitude for rec in diagram.records if rec.cycle is not None]
    diagram.verdict = monotonicity(amps)
    return diagram
