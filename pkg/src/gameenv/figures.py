"""Parameter sets and data generators for the reproduced figures.

Each generator returns a :class:`FigureResult` holding plot-ready tables and a
list of named pass/fail checks. Nothing here renders plots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bifurcation import hopf_mu
from .control import (control_thresholds, controlled_boundary_equilibrium,
                      controlled_equilibrium, start_grid, verify_design)
from .cycles import CycleStatus, find_limit_cycle, sweep_mu, sweep_u_amplitude
from .equilibria import interior_equilibrium
from .flow import IntegratorOptions, integrate
from .model import SystemParams

#: Coefficient sets: fig2a/fig2b use the Hopf example, fig3 and fig5* the
#: balanced example, fig4a/fig4b and fig4c/fig4d the two control examples.
HOPF_EXAMPLE = (3.0, 0.2, 0.5, 1.0)
BALANCED_EXAMPLE = (3.0, 1.0, 1.0, 3.0)
CONTROL_INTERIOR = (4.0, 1.0, 3.0, 3.0)
CONTROL_BOUNDARY = (2.0, 3.0, 1.0, 4.0)

FIGURES = ("fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig4c", "fig4d",
           "fig5a", "fig5b", "fig5c", "fig5d")

FIG3_GRID = np.round(np.arange(0.005, 0.4, 0.01), 12)
FIG5D_GRID = (0.0, 0.4, 0.8, 1.2, 1.6)
PORTRAIT_STARTS = ((0.2, 0.2), (0.8, 0.3), (0.3, 0.9), (0.7, 0.95))


@dataclass
class FigureResult:
    name: str
    params: dict
    tables: dict = field(default_factory=dict)   # file stem -> (columns, rows)
    summary: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)   # (name, passed, detail)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))


def eigen_crossing_mu(p: SystemParams, lo: float = 1e-9, hi: float = 1.0) -> float:
    """Mutation rate where the interior eigenvalues cross the imaginary axis,
    found by bisection on the numerically computed real part."""
    def re(mu):
        J = interior_equilibrium(p.with_(mu=mu)).jacobian
        return float(np.max(np.linalg.eigvals(J).real))
    return brentq(re, lo, hi, xtol=1e-14, rtol=1e-15)


def _portrait(res: FigureResult, p: SystemParams, t_end=200.0, starts=PORTRAIT_STARTS):
    opts = IntegratorOptions(max_step=0.5)
    for k, s in enumerate(starts):
        tr = integrate(s, p, opts, t_end=t_end)
        res.tables[f"traj{k}"] = (("t", "x", "r"),
                                  [(t, x, r) for t, (x, r) in zip(tr.times, tr.states)])


def _cycle_table(res: FigureResult, cyc):
    res.tables["cycle"] = (("t", "x", "r"),
                           [(t, x, r) for t, (x, r) in zip(cyc.times, cyc.samples)])


def _cycle_figure(name, p, amp_check):
    res = FigureResult(name, p.to_dict())
    out = find_limit_cycle(p)
    eq = interior_equilibrium(p) if p.u == 0 else controlled_equilibrium(p)
    res.summary["equilibrium"] = eq.to_dict() if eq else None
    res.summary["status"] = out.status.value
    res.summary["message"] = out.message
    if out.cycle is None:
        res.check("cycle found", False, out.message)
        _portrait(res, p)
        return res, None
    c = out.cycle
    res.summary["cycle"] = {k: v for k, v in c.to_dict().items() if k not in ("t", "x", "r")}
    res.summary["cycle"]["r_mean"] = c.r_mean
    _cycle_table(res, c)
    _portrait(res, p)
    res.check("cycle found", True)
    res.check("stable (|floquet| < 1)", c.stable, f"floquet={c.floquet:.6e}")
    res.check("return-map residual < 1e-8", c.residual < 1e-8, f"residual={c.residual:.3e}")
    res.check("encircles the equilibrium", abs(c.winding) == 1 and c.r_min < eq.location.r < c.r_max)
    if amp_check is not None:
        label, ok = amp_check(c)
        res.check(label, ok, f"r_amplitude={c.r_amplitude:.6f}")
    return res, c


def fig2a():
    p = SystemParams(*HOPF_EXAMPLE, theta=1.0, mu=0.005)
    return _cycle_figure("fig2a", p, lambda c: ("r_amplitude > 0.5", c.r_amplitude > 0.5))[0]


def fig2b():
    p = SystemParams(*HOPF_EXAMPLE, theta=1.0, mu=0.1540)
    return _cycle_figure("fig2b", p, lambda c: ("r_amplitude < 0.15", c.r_amplitude < 0.15))[0]


def fig3():
    p = SystemParams(*BALANCED_EXAMPLE, theta=1.0)
    res = FigureResult("fig3", p.to_dict())
    mu1 = hopf_mu(p)
    mu1_b = eigen_crossing_mu(p)
    res.summary.update(mu1_closed=mu1, mu1_bisection=mu1_b, mu1_printed=0.1633)
    res.check("closed-form mu1 matches eigenvalue crossing (1e-8)", abs(mu1 - mu1_b) < 1e-8,
              f"{mu1:.12f} vs {mu1_b:.12f}")
    diag = sweep_mu(p, FIG3_GRID)
    res.tables["diagram"] = (("param", "eq_x", "eq_r", "eq_stable", "cyc_rmin", "cyc_rmax",
                              "period", "floquet", "status"), [rec.row() for rec in diag.records])
    below = [rec for rec in diag.records if rec.param < mu1]
    above = [rec for rec in diag.records if rec.param > mu1]
    res.check("cycles found below mu1", all(rec.status is CycleStatus.FOUND for rec in below))
    res.check("no cycles above mu1", all(rec.status is CycleStatus.ABSENT for rec in above))
    first = below[0].cycle
    res.check("near-heteroclinic envelope at mu=0.005", first.r_min < 0.02 and first.r_max > 0.98,
              f"r_min={first.r_min:.4f}, r_max={first.r_max:.4f}")
    amps = np.array([rec.cycle.r_amplitude for rec in below])
    res.check("envelope shrinks towards mu1", bool(np.all(np.diff(amps) < 0)))
    # amplitude^2 is linear in (mu1 - mu) near the Hopf point; extrapolate to zero
    mus = np.array([rec.param for rec in below[-3:]])
    coef = np.polyfit(mus, amps[-3:] ** 2, 1)
    mu_zero = -coef[1] / coef[0]
    res.summary["envelope_collapse_mu"] = mu_zero
    res.check("envelope collapses at mu1 (extrapolated, 0.01)", abs(mu_zero - mu1) < 0.01,
              f"extrapolated zero at mu={mu_zero:.5f}")
    flips = [rec.param for a_, rec in zip(diag.records, diag.records[1:])
             if a_.eq_stability != rec.eq_stability]
    res.summary["stability_flip_between"] = flips
    res.check("equilibrium branch flips stability at mu1",
              len(flips) == 1 and flips[0] - 0.01 < mu1 < flips[0])
    return res


def _convergence_figure(name, p, u, target):
    res = FigureResult(name, p.with_(u=u).to_dict())
    v = verify_design(p, u, target)
    res.summary.update(target=list(target), max_distance=float(v.distances.max()))
    res.tables["grid_finals"] = (("x0", "r0", "x_final", "r_final", "distance"),
                                 [(s[0], s[1], f[0], f[1], d) for s, f, d in
                                  zip(start_grid(), v.finals, v.distances)])
    res.check("5x5 start grid converges within 1e-3 by t=1000", v.passed,
              f"max distance {v.distances.max():.3e}")
    _portrait(res, p.with_(u=u))
    return res


def fig4a():
    p = SystemParams(*CONTROL_INTERIOR, theta=1.0, mu=0.05)
    design = control_thresholds(p)
    eq = controlled_equilibrium(p.with_(u=2.8))
    res = _convergence_figure("fig4a", p, 2.8, (eq.location.x, eq.location.r))
    res.summary["design"] = design.to_dict()
    lo, hi = design.window()
    res.check("regime InteriorStabilizable", design.regime.value == "InteriorStabilizable")
    res.check("u-window inside (2.2, 3)", 2.2 < lo < hi <= 3.0, f"window=({lo:.6f}, {hi:.6f})")
    res.check("equilibrium r = 0.9636 +- 1e-3", abs(eq.location.r - 0.9636) < 1e-3)
    return res


def fig4b():
    p = SystemParams(*CONTROL_INTERIOR, theta=1.0, mu=0.05)
    eq = controlled_boundary_equilibrium(p.with_(u=3.5))
    res = _convergence_figure("fig4b", p, 3.5, (eq.location.x, 1.0))
    res.summary["top_equilibrium"] = eq.to_dict()
    res.check("x_t* in (1/2, 1)", 0.5 < eq.location.x < 1.0)
    return res


def fig4c():
    p = SystemParams(*CONTROL_BOUNDARY, theta=1.0, mu=0.15)
    q = p.with_(u=1.8)
    res = FigureResult("fig4c", q.to_dict())
    design = control_thresholds(p)
    eq = controlled_equilibrium(q)
    res.summary.update(design=design.to_dict(), equilibrium=eq.to_dict())
    res.check("regime BoundaryOnly", design.regime.value == "BoundaryOnly")
    res.check("u=1.8 leaves the interior equilibrium unstable",
              bool(np.all(eq.eigenvalues.real > 0)), eq.stability.value)
    _portrait(res, q)
    return res


def fig4d():
    p = SystemParams(*CONTROL_BOUNDARY, theta=1.0, mu=0.15)
    eq = controlled_boundary_equilibrium(p.with_(u=2.6))
    res = _convergence_figure("fig4d", p, 2.6, (eq.location.x, 1.0))
    res.summary["top_equilibrium"] = eq.to_dict()
    res.check("top-side equilibrium stable", eq.stability.value == "Stable")
    return res


def fig5a():
    p = SystemParams(*BALANCED_EXAMPLE, theta=1.0, mu=0.05)
    return _cycle_figure("fig5a", p, None)[0]


def fig5b():
    base = SystemParams(*BALANCED_EXAMPLE, theta=1.0, mu=0.05)
    res, cyc = _cycle_figure("fig5b", base.with_(u=1.6), None)
    ref = find_limit_cycle(base).cycle
    if cyc is not None:
        res.check("cycle shifted up relative to u=0", cyc.r_mean > ref.r_mean,
                  f"mean r {cyc.r_mean:.4f} vs {ref.r_mean:.4f}")
    return res


def fig5c():
    p = SystemParams(*BALANCED_EXAMPLE, theta=1.0, mu=0.05)
    eq = controlled_boundary_equilibrium(p.with_(u=2.1))
    res = _convergence_figure("fig5c", p, 2.1, (eq.location.x, 1.0))
    res.summary["top_equilibrium"] = eq.to_dict()
    res.check("top-side equilibrium stable", eq.stability.value == "Stable")
    return res


def fig5d():
    p = SystemParams(*BALANCED_EXAMPLE, theta=1.0, mu=0.05)
    res = FigureResult("fig5d", p.to_dict())
    diag = sweep_u_amplitude(p, FIG5D_GRID)
    rows = []
    for rec in diag.records:
        amp = rec.cycle.r_amplitude if rec.cycle else float("nan")
        rows.append((rec.param, amp, rec.status.value))
    res.tables["amplitude"] = (("u", "r_amplitude", "status"), rows)
    res.summary["verdict"] = diag.verdict
    res.summary["messages"] = {f"{rec.param:g}": rec.status.value for rec in diag.records}
    all_found = all(rec.cycle is not None for rec in diag.records)
    res.check("cycle exists at every grid point", all_found,
              "; ".join(f"u={rec.param:g}: {rec.status.value}" for rec in diag.records
                        if rec.cycle is None))
    res.check("r_amplitude strictly decreasing", all_found and diag.verdict == "strictly decreasing",
              f"amplitudes of the cycles found: {diag.verdict}")
    return res


GENERATORS = {name: globals()[name] for name in FIGURES}


def reproduce(name: str) -> FigureResult:
    try:
        gen = GENERATORS[name]
    except KeyError:
        from .errors import ParameterError
        raise ParameterError(f"unknown figure id {name!r}; expected one of {', '.join(FIGURES)}") from None
    return gen()
