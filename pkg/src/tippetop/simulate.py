"""Time integration of the full and reduced systems with invariant monitors."""
from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from . import dynamics as dyn
from .errors import ChartSingularity, ModelBreakdown
from .model import TopParams
from .reduction import (
    ReducedState,
    _cdot,
    _reduced_accel,
    _velocities,
    kinetic_coeffs,
    effective_potential,
)

__all__ = [
    "Termination",
    "IntegratorConfig",
    "Trajectory",
    "MonitorSummary",
    "integrate_full",
    "integrate_reduced",
    "monitor_report",
]

FULL_COLUMNS = ("t", "theta", "phi", "psi", "x", "y", "thetadot", "phidot", "psidot", "J", "E", "Rn", "vQ")
REDUCED_COLUMNS = ("t", "theta", "thetadot", "phibardot", "J", "E_red")

# the vector field itself is evaluated with a much tighter guard than the
# termination event, so trial stages just inside the band do not abort a step
_RHS_GUARD = 1e-14


class Termination(str, enum.Enum):
    TIME_END = "TimeEnd"
    POLE_REACHED = "PoleReached"
    MODEL_BREAKDOWN = "ModelBreakdown"
    CONVERGED = "Converged"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.05  # keeps dense-output samples at integrator accuracy
    t_end: float = 10.0
    pole_guard: float = 1e-8
    convergence_eps: float = 1e-10
    sample_dt: float | None = 1e-3  # None records every accepted step

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if not 0 < self.pole_guard <= 1e-3:
            raise ValueError("pole_guard must lie in (0, 1e-3]")
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.convergence_eps < 0:
            raise ValueError("convergence_eps must be >= 0")


@dataclass
class Trajectory:
    kind: str  # "full" or "reduced"
    times: np.ndarray
    states: np.ndarray  # one row per sample
    fields: tuple[str, ...]
    monitors: dict[str, np.ndarray]
    termination: Termination
    message: str = ""
    extras: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        if name in self.monitors:
            return self.monitors[name]
        return self.states[:, self.fields.index(name)]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path) -> None:
        cols = FULL_COLUMNS if self.kind == "full" else REDUCED_COLUMNS
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i, t in enumerate(self.times):
                row = [t] + [self.column(c)[i] for c in cols[1:]]
                w.writerow([f"{v:.17g}" for v in row])


@dataclass(frozen=True)
class MonitorSummary:
    max_rel_dJ: float
    max_pos_dEdt: float
    min_Rn: float
    max_rel_dE: float
    termination: str
    t_final: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _full_monitors(p: TopParams, y: np.ndarray, truncated: bool) -> tuple[float, ...]:
    J = dyn.jellet(p, y)
    E = dyn.energy(p, y)
    if truncated:
        Rn = dyn._normal_reaction(p, y[2], y[3], 0.0, 0.0, y[7], y[8], y[9])
    else:
        Rn = dyn._normal_reaction(p, y[2], y[3], y[5], y[6], y[7], y[8], y[9])
    vx, vy = dyn._slip_h(p.R, p.eps, y[2], y[3], y[5], y[6], y[7], y[8], y[9])
    dEdt = dyn.energy_rate(p, y, truncated=truncated)
    return J, E, Rn, math.hypot(vx, vy), dEdt


def _full_rate_norm(p: TopParams, y: np.ndarray) -> float:
    vx, vy = dyn._slip_h(p.R, p.eps, y[2], y[3], y[5], y[6], y[7], y[8], y[9])
    return math.sqrt(y[7] ** 2 + (vx * vx + vy * vy + y[5] ** 2 + y[6] ** 2) / (p.R * p.R))


def _first_pole_hit(dense, t0, t1, theta_index, guard):
    """Earliest time in (t0, t1] where |sin(theta)| drops to ``guard``, or None.

    A sampled scan catches both entries into the guard band and clean
    crossings of a pole (sign change of sin(theta)) within one step.
    """
    def sin_th(s):
        return math.sin(dense(s)[theta_index])

    def pole(s):
        return abs(sin_th(s)) - guard

    ts = np.linspace(t0, t1, 17)
    for a, b in zip(ts[:-1], ts[1:]):
        if pole(b) < 0:
            return brentq(pole, a, b, xtol=1e-14)
        sa, sb = sin_th(a), sin_th(b)
        if sa * sb < 0:
            z = brentq(sin_th, a, b, xtol=1e-15)
            return brentq(pole, a, z, xtol=1e-14)
    return None


def _run(fun, y0, cfg: IntegratorConfig, theta_index: int, rate_norm, record):
    """Adaptive DOP853 loop with pole, breakdown and convergence handling.

    ``record(t, y)`` stores one sample. Returns (termination, message).
    """
    rate_index = theta_index + 1 if theta_index == 0 else 7

    def settled(t, y):
        # small rates alone are not enough: a tilted top released from rest
        # still accelerates; at the poles a state at rest is an equilibrium
        if rate_norm(y) >= cfg.convergence_eps:
            return False
        try:
            accel = fun(t, y)[rate_index]
        except (ChartSingularity, ModelBreakdown):
            accel = 0.0
        return abs(accel) < cfg.convergence_eps

    record(0.0, y0)
    if settled(0.0, y0):
        return Termination.CONVERGED, "initial state is stationary"
    if abs(math.sin(y0[theta_index])) < cfg.pole_guard:
        return Termination.POLE_REACHED, "initial state inside pole guard"
    if cfg.t_end == 0:
        return Termination.TIME_END, ""
    try:
        solver = DOP853(fun, 0.0, y0, cfg.t_end, max_step=cfg.max_step, rtol=cfg.rel_tol, atol=cfg.abs_tol)
    except ModelBreakdown as exc:
        return Termination.MODEL_BREAKDOWN, str(exc)
    dt = cfg.sample_dt
    k_next = 1

    def pole(y):
        return abs(math.sin(y[theta_index])) - cfg.pole_guard

    def emit_until(t_stop, dense):
        nonlocal k_next
        if dt is None:
            return
        while k_next * dt < t_stop:
            record(k_next * dt, dense(k_next * dt))
            k_next += 1

    while True:
        t_prev, y_prev = solver.t, solver.y.copy()
        try:
            msg = solver.step()
        except ModelBreakdown as exc:
            return Termination.MODEL_BREAKDOWN, f"t={t_prev:.6g}: {exc}"
        except (ChartSingularity, np.linalg.LinAlgError) as exc:
            record(t_prev, y_prev)
            return Termination.POLE_REACHED, f"t={t_prev:.6g}: {exc}"
        if solver.status == "failed":
            return Termination.MODEL_BREAKDOWN, f"integrator failed: {msg}"
        t_new, y_new = solver.t, solver.y
        dense = solver.dense_output()

        t_hit = None
        # the pole is only reachable inside the step if theta can travel that far
        reach = max(abs(y_prev[rate_index]), abs(y_new[rate_index])) * (t_new - t_prev)
        if pole(y_new) < 0 or min(pole(y_prev), pole(y_new)) < 2.0 * reach:
            t_hit = _first_pole_hit(dense, t_prev, t_new, theta_index, cfg.pole_guard)
        if t_hit is not None:
            emit_until(t_hit, dense)
            record(t_hit, dense(t_hit))
            return Termination.POLE_REACHED, f"|sin(theta)| reached {cfg.pole_guard:g} at t={t_hit:.6g}"

        emit_until(t_new, dense)
        converged = settled(t_new, y_new)
        if dt is None or converged or solver.status == "finished":
            record(t_new, y_new)
        if converged:
            return Termination.CONVERGED, f"rates and tilt acceleration below {cfg.convergence_eps:g} at t={t_new:.6g}"
        if solver.status == "finished":
            return Termination.TIME_END, ""


def integrate_full(params: TopParams, state0, config: IntegratorConfig | None = None,
                   truncated: bool = False) -> Trajectory:
    """Integrate the full equations (or the truncated-friction variant).

    Failures never raise: they end the run and are reported in
    ``termination``.
    """
    cfg = config or IntegratorConfig()
    p = params
    y0 = state0.to_array() if isinstance(state0, dyn.FullState) else np.asarray(state0, dtype=float)
    times, rows, mons = [], [], []

    def record(t, y):
        y = np.array(y, dtype=float)
        try:
            m = _full_monitors(p, y, truncated)
        except ModelBreakdown:
            m = (dyn.jellet(p, y), dyn.energy(p, y), math.nan, math.nan, math.nan)
        if times and t <= times[-1]:
            return
        times.append(float(t))
        rows.append(y)
        mons.append(m)

    def fun(t, y):
        return dyn.full_rhs(p, y, truncated=truncated, pole_guard=_RHS_GUARD)

    term, msg = _run(fun, y0, cfg, 2, lambda y: _full_rate_norm(p, y), record)
    m = np.array(mons, dtype=float).reshape(-1, 5)
    return Trajectory(
        kind="full",
        times=np.array(times),
        states=np.array(rows).reshape(-1, 10),
        fields=dyn.STATE_FIELDS,
        monitors={"J": m[:, 0], "E": m[:, 1], "Rn": m[:, 2], "vQ": m[:, 3], "dEdt": m[:, 4]},
        termination=term,
        message=msg,
        extras={"truncated": truncated},
    )


REDUCED_FIELDS = ("theta", "thetadot", "phibardot", "phibar", "c")


def integrate_reduced(params: TopParams, rstate0: ReducedState, config: IntegratorConfig | None = None,
                      phibar0: float = 0.0, c0: float = 0.0) -> Trajectory:
    """Integrate the reduced equations at fixed J.

    The ignorable coordinates ``phibar`` and ``c`` are carried along as
    quadratures so the Euler angles can be rebuilt afterwards.
    """
    cfg = config or IntegratorConfig()
    p = params
    J = rstate0.J
    y0 = np.array([rstate0.theta, rstate0.thetadot, rstate0.phibardot, phibar0, c0])
    times, rows, mons = [], [], []

    def fun(t, y):
        thdd, pbdd = _reduced_accel(p, y[0], y[1], y[2], J, _RHS_GUARD)
        return np.array([y[1], thdd, pbdd, y[2], _cdot(p, y[0], y[2], J)])

    def record(t, y):
        y = np.array(y, dtype=float)
        if times and t <= times[-1]:
            return
        th, thd, pbd = y[0], y[1], y[2]
        Mth, Mpb = kinetic_coeffs(p, th)
        E = 0.5 * (Mth * thd * thd + Mpb * pbd * pbd) + effective_potential(p, th, J)
        phd, psd = _velocities(p, th, pbd, J)
        try:
            Rn = dyn._normal_reaction(p, th, 0.0, 0.0, 0.0, thd, phd, psd)
        except ModelBreakdown:
            Rn = math.nan
        h = p.R - p.eps * math.cos(th)
        st = math.sin(th)
        dE = -p.mu * Rn * (h * h * thd * thd + st * st * pbd * pbd)
        times.append(float(t))
        rows.append(y)
        mons.append((J, E, Rn, abs(st * pbd) + abs(h * thd), dE))

    def rate_norm(y):
        return math.sqrt(y[1] ** 2 + (math.sin(y[0]) * y[2] / p.R) ** 2)

    term, msg = _run(fun, y0, cfg, 0, rate_norm, record)
    m = np.array(mons, dtype=float).reshape(-1, 5)
    return Trajectory(
        kind="reduced",
        times=np.array(times),
        states=np.array(rows).reshape(-1, 5),
        fields=REDUCED_FIELDS,
        monitors={"J": m[:, 0], "E_red": m[:, 1], "Rn": m[:, 2], "vQ": m[:, 3], "dEdt": m[:, 4]},
        termination=term,
        message=msg,
        extras={"J": J},
    )


def monitor_report(trajectory: Trajectory) -> MonitorSummary:
    """Invariant drift and dissipation summary.

    ``max_pos_dEdt`` is the largest positive secant slope of the energy
    between consecutive samples (zero for a perfectly dissipative record).
    """
    tr = trajectory
    J = tr.monitors["J"]
    E = tr.monitors["E"] if "E" in tr.monitors else tr.monitors["E_red"]
    J0 = J[0]
    rel_dJ = float(np.max(np.abs(J - J0)) / abs(J0)) if J0 != 0 else float(np.max(np.abs(J)))
    if len(tr.times) > 1:
        slopes = np.diff(E) / np.diff(tr.times)
        pos = float(max(0.0, np.max(slopes)))
    else:
        pos = 0.0
    E0 = E[0]
    rel_dE = float(np.max(np.abs(E - E0)) / abs(E0)) if E0 != 0 else float(np.max(np.abs(E)))
    Rn = tr.monitors["Rn"]
    return MonitorSummary(
        max_rel_dJ=rel_dJ,
        max_pos_dEdt=pos,
        min_Rn=float(np.nanmin(Rn)) if np.any(np.isfinite(Rn)) else math.nan,
        max_rel_dE=rel_dE,
        termination=tr.termination.value,
        t_final=float(tr.times[-1]),
    )
