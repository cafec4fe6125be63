"""Trajectory integration on the unit square.

Dormand-Prince 5(4) with step rejection, clamping of sub-``clamp_band``
excursions, cubic Hermite dense output and section-crossing events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import IntegrationError, PreconditionError
from .model import State, SystemParams, make_state, rhs

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 0.1
    t_end: float = 100.0
    clamp_band: float = 1e-12
    min_step: float = 1e-14

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "t_end", "clamp_band", "min_step"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"IntegratorOptions.{name} must be positive")


@dataclass(frozen=True)
class Section:
    """Line ``x = x_s``; ``direction`` -1 keeps crossings with decreasing x,
    +1 increasing, 0 both."""

    x: float
    direction: int = 0


@dataclass(frozen=True)
class Event:
    t: float
    state: State
    section: int
    direction: int


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    events: list = field(default_factory=list)
    terminated: bool = False
    field: Callable | None = field(default=None, repr=False)

    @property
    def final(self) -> State:
        return State(float(self.states[-1, 0]), float(self.states[-1, 1]))

    def at(self, t):
        """Cubic Hermite interpolation at time(s) ``t``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        t0 = self.times[idx]
        h = self.times[idx + 1] - t0
        s = ((t - t0) / h)[:, None]
        y0, y1 = self.states[idx], self.states[idx + 1]
        f0, f1 = self.derivs[idx] * h[:, None], self.derivs[idx + 1] * h[:, None]
        return _hermite(s, y0, y1, f0, f1)

    def window(self, t_start):
        """States at recorded steps with ``t >= t_start``."""
        return self.states[self.times >= t_start]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,x,r\n")
            for t, (x, r) in zip(self.times, self.states):
                fh.write(f"{t:.11e},{x:.11e},{r:.11e}\n")

    def to_dict(self):
        return {"t": self.times.tolist(), "x": self.states[:, 0].tolist(),
                "r": self.states[:, 1].tolist(),
                "events": [{"t": e.t, "x": e.state.x, "r": e.state.r,
                            "section": e.section, "direction": e.direction}
                           for e in self.events]}


def _hermite(s, y0, y1, f0, f1):
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * f0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * f1)


def _dp_step(f, x, r, k1x, k1r, h):
    """One Dormand-Prince step; returns new state, its derivative and the
    embedded error estimate."""
    k2x, k2r = f(x + h * _A21 * k1x, r + h * _A21 * k1r)
    k3x, k3r = f(x + h * (_A31 * k1x + _A32 * k2x), r + h * (_A31 * k1r + _A32 * k2r))
    k4x, k4r = f(x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
                 r + h * (_A41 * k1r + _A42 * k2r + _A43 * k3r))
    k5x, k5r = f(x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
                 r + h * (_A51 * k1r + _A52 * k2r + _A53 * k3r + _A54 * k4r))
    k6x, k6r = f(x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
                 r + h * (_A61 * k1r + _A62 * k2r + _A63 * k3r + _A64 * k4r + _A65 * k5r))
    xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    rn = r + h * (_B1 * k1r + _B3 * k3r + _B4 * k4r + _B5 * k5r + _B6 * k6r)
    k7x, k7r = f(xn, rn)
    ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    er = h * (_E1 * k1r + _E3 * k3r + _E4 * k4r + _E5 * k5r + _E6 * k6r + _E7 * k7r)
    return xn, rn, k7x, k7r, ex, er


def _clamp(v, band):
    """Clamp ``v`` into [0, 1] if it is within ``band`` outside; ``None`` if
    the excursion is larger."""
    if v < 0.0:
        return 0.0 if v >= -band else None
    if v > 1.0:
        return 1.0 if v <= 1.0 + band else None
    return v


def _locate(f, t0, x0, r0, fx0, fr0, t1, x1, r1, fx1, fr1, xs):
    """Crossing of ``x = xs`` inside an accepted step.

    The Hermite interpolant gives the time to 1e-12; the state is then
    recomputed by a Dormand-Prince step from the step start and polished by
    Newton iterations in time so that it carries integrator accuracy.
    """
    h = t1 - t0
    gx = lambda s: _hermite(s, x0, x1, fx0 * h, fx1 * h) - xs
    g0, g1 = gx(0.0), gx(1.0)
    if g0 == 0.0:
        s = 0.0
    elif g1 == 0.0:
        s = 1.0
    elif g0 * g1 > 0:
        s = -g0 / (g1 - g0)
    else:
        s = brentq(gx, 0.0, 1.0, xtol=1e-12 / max(abs(h), 1e-300))
    tau = s * h
    for _ in range(4):
        if tau == 0.0:
            xe, re = x0, r0
        else:
            xe, re, _, _, _, _ = _dp_step(f, x0, r0, fx0, fr0, tau)
        fxe, _ = f(xe, re)
        if fxe == 0.0:
            break
        dt = -(xe - xs) / fxe
        if abs(xe - xs) < 1e-15:
            break
        tau += dt
    return t0 + tau, xs, re


def integrate(s0, p: SystemParams, opts: IntegratorOptions | None = None, *,
              t_end: float | None = None, sections=(), stop_after: int | None = None,
              backward: bool = False, record: bool = True, field=None) -> Trajectory:
    """Integrate from ``s0`` over ``[0, t_end]``.

    Parameters
    ----------
    sections : sequence of Section
        Lines whose crossings are recorded as events.
    stop_after : int, optional
        Stop as soon as this many events have been recorded; the final state is
        the last event.
    backward : bool
        Integrate the negated field (times are reported as elapsed reverse time).
    record : bool
        Keep every accepted step (needed for interpolation); otherwise only the
        endpoints and events are kept.
    field : callable, optional
        Replacement ``f(x, r)``; defaults to the closed-loop field of ``p``.
    """
    opts = opts or IntegratorOptions()
    T = opts.t_end if t_end is None else float(t_end)
    x, r = make_state(s0)
    x = min(max(x, 0.0), 1.0)
    r = min(max(r, 0.0), 1.0)
    base = field or rhs(p)
    if backward:
        f = lambda xx, rr: tuple(-v for v in base(xx, rr))
    else:
        f = base
    rtol, atol, hmax, band = opts.rel_tol, opts.abs_tol, opts.max_step, opts.clamp_band
    sections = list(sections)

    t = 0.0
    fx, fr = f(x, r)
    ts, xs_, rs_, dxs, drs = [t], [x], [r], [fx], [fr]
    events = []
    h = min(hmax, 1e-2, T) if T > 0 else 0.0
    terminated = False
    while t < T and not terminated:
        if t + h > T:
            h = T - t
        if h < opts.min_step:
            raise IntegrationError(f"step size underflow at t={t}", t=t, state=State(x, r))
        xn, rn, fxn, frn, ex, er = _dp_step(f, x, r, fx, fr, h)
        sx = atol + rtol * max(abs(x), abs(xn))
        sr = atol + rtol * max(abs(r), abs(rn))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (er / sr) ** 2))
        if err > 1.0 or not math.isfinite(err):
            h *= max(0.2, 0.9 * err ** -0.2) if math.isfinite(err) else 0.2
            continue
        cx, cr = _clamp(xn, band), _clamp(rn, band)
        if cx is None or cr is None:
            h *= 0.5
            continue
        if cx != xn or cr != rn:
            xn, rn = cx, cr
            fxn, frn = f(xn, rn)
        tn = t + h
        for i, sec in enumerate(sections):
            g0, g1 = x - sec.x, xn - sec.x
            down = g0 > 0.0 and g1 <= 0.0
            up = g0 < 0.0 and g1 >= 0.0
            if (down and sec.direction <= 0) or (up and sec.direction >= 0):
                te, xe, re = _locate(f, t, x, r, fx, fr, tn, xn, rn, fxn, frn, sec.x)
                events.append(Event(te, State(xe, re), i, -1 if down else 1))
                if stop_after is not None and len(events) >= stop_after:
                    terminated = True
                    xn, rn, tn = xe, re, te
                    fxn, frn = f(xn, rn)
                    break
        t, x, r, fx, fr = tn, xn, rn, fxn, frn
        if record or terminated or t >= T:
            ts.append(t)
            xs_.append(x)
            rs_.append(r)
            dxs.append(fx)
            drs.append(fr)
        if err == 0.0:
            fac = 5.0
        else:
            fac = min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(hmax, h * fac)
    states = np.column_stack([xs_, rs_])
    derivs = np.column_stack([dxs, drs])
    return Trajectory(np.array(ts), states, derivs, events, terminated, field=f)


def section_crossings(traj: Trajectory, x_s: float, direction: int = 0):
    """Crossings of ``x = x_s`` along a recorded trajectory, in time order.

    Each crossing is an :class:`Event` whose state carries the ``r``
    coordinate of the crossing.
    """
    if not (0.0 < x_s < 1.0):
        raise PreconditionError("section must satisfy 0 < x_s < 1")
    out = []
    T, Y, D = traj.times, traj.states, traj.derivs
    g = Y[:, 0] - x_s
    f = traj.field
    for k in range(len(T) - 1):
        g0, g1 = g[k], g[k + 1]
        down = g0 > 0.0 and g1 <= 0.0
        up = g0 < 0.0 and g1 >= 0.0
        if (down and direction <= 0) or (up and direction >= 0):
            if f is None:
                h = T[k + 1] - T[k]
                gx = lambda s: _hermite(s, Y[k, 0], Y[k + 1, 0], D[k, 0] * h, D[k + 1, 0] * h) - x_s
                s = brentq(gx, 0.0, 1.0, xtol=1e-12)
                y = _hermite(np.array([[s]]), Y[k], Y[k + 1], D[k] * h, D[k + 1] * h)[0]
                te, re = T[k] + s * h, y[1]
            else:
                te, _, re = _locate(f, T[k], Y[k, 0], Y[k, 1], D[k, 0], D[k, 1],
                                    T[k + 1], Y[k + 1, 0], Y[k + 1, 1], D[k + 1, 0], D[k + 1, 1], x_s)
            out.append(Event(float(te), State(float(x_s), float(re)), 0, -1 if down else 1))
    return out


# -- boundary repulsion -------------------------------------------------------

@dataclass(frozen=True)
class RepulsionRecord:
    side: str
    start: State
    initial_measure: float
    late_min_F: float
    late_min_xdist: float
    passed: bool


@dataclass(frozen=True)
class RepulsionDiagnostic:
    passed: bool | None
    skipped: str | None
    records: tuple = ()


def boundary_repulsion_check(p: SystemParams, eps: float = 1e-3, *, t_end: float = 300.0,
                             n_per_side: int = 5, late_fraction: float = 0.8,
                             opts: IntegratorOptions | None = None) -> RepulsionDiagnostic:
    """Start ``eps`` away from each side and check the trajectories move away.

    For starts near the bottom/top sides the measure is ``F(r) = r(1-r)``; for
    the left/right sides it is ``x(1-x)``. A start passes if the minimum of its
    measure over ``[late_fraction * t_end, t_end]`` exceeds the initial value.
    """
    if p.mu == 0:
        return RepulsionDiagnostic(None, "boundary invariant at mu=0")
    opts = opts or IntegratorOptions(rel_tol=1e-8, abs_tol=1e-12)
    grid = np.linspace(0.1, 0.9, n_per_side)
    starts = ([("bottom", (g, eps)) for g in grid] + [("top", (g, 1 - eps)) for g in grid]
              + [("left", (eps, g)) for g in grid] + [("right", (1 - eps, g)) for g in grid])
    records = []
    for side, s in starts:
        traj = integrate(s, p, opts, t_end=t_end)
        late = traj.window(late_fraction * t_end)
        F = late[:, 1] * (1 - late[:, 1])
        X = late[:, 0] * (1 - late[:, 0])
        if side in ("bottom", "top"):
            init = s[1] * (1 - s[1])
            ok = F.min() > init
        else:
            init = s[0] * (1 - s[0])
            ok = X.min() > init
        records.append(RepulsionRecord(side, State(*s), init, float(F.min()), float(X.min()), bool(ok)))
    return RepulsionDiagnostic(all(rec.passed for rec in records), None, tuple(records))
