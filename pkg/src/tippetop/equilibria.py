"""Steady states on a Jellet level and their continuation in J^2."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .model import TopParams
from .reduction import ReducedState, reconstruct_velocities

__all__ = [
    "SteadyKind",
    "SteadyState",
    "EquilibriumBranch",
    "f_intermediate",
    "existence_condition",
    "theta_c",
    "branch_jsq",
    "solve_intermediate",
    "vertical_states",
    "continue_branch",
    "write_branches_csv",
]

N_PANELS = 1024
MAX_LINK_STEP = 0.1


class SteadyKind(str, enum.Enum):
    REST = "rest"
    VERTICAL_UP = "vertical_up"
    VERTICAL_DOWN = "vertical_down"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class SteadyState:
    kind: SteadyKind
    theta0: float
    J: float
    spin_n: float
    phidot: float
    psidot: float
    phibardot0: float = 0.0

    @property
    def reduced(self) -> ReducedState:
        return ReducedState(self.theta0, 0.0, self.phibardot0, self.J)


@dataclass
class EquilibriumBranch:
    kind: SteadyKind
    samples: list[tuple[float, float, bool]] = field(default_factory=list)  # (Jsq, theta0, stable)

    @property
    def jsq(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def theta(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def stable(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples], dtype=bool)


def _scale(p: TopParams) -> float:
    return p.m * p.g * p.C * p.R * p.R * p.eps


def f_intermediate(params: TopParams, Jsq, cos_theta):
    """Dimensionless residual whose zeros (away from the poles) are the
    intermediate states. Vectorised over ``cos_theta``."""
    a = params.inertia_ratio
    e = params.eccentricity_ratio
    x = np.asarray(cos_theta, dtype=float)
    lhs = Jsq / _scale(params) * ((a - 1.0) * x + e)
    rhs = (a * (1.0 - x * x) + (x - e) ** 2) ** 2
    out = lhs - rhs
    return float(out) if out.ndim == 0 else out


def existence_condition(params: TopParams, theta: float) -> bool:
    return (params.inertia_ratio - 1.0) * math.cos(theta) + params.eccentricity_ratio > 0


def theta_c(params: TopParams) -> float | None:
    """Angle bounding the interval where intermediate states may exist, or
    ``None`` when they may exist at every tilt (Group II) or A = C."""
    a, e = params.inertia_ratio, params.eccentricity_ratio
    if a == 1.0:
        return None
    x = e / (1.0 - a)
    if abs(x) > 1.0:
        return None
    return math.acos(x)


def branch_jsq(params: TopParams, cos_theta):
    """J^2 of the intermediate state at the given tilt (explicit branch
    parametrisation); ``nan`` where the existence condition fails."""
    a, e = params.inertia_ratio, params.eccentricity_ratio
    x = np.asarray(cos_theta, dtype=float)
    drive = (a - 1.0) * x + e
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(drive > 0, _scale(params) * (a * (1.0 - x * x) + (x - e) ** 2) ** 2 / drive, np.nan)
    return float(out) if out.ndim == 0 else out


def _intermediate(p: TopParams, theta: float, J: float) -> SteadyState:
    phd, psd = reconstruct_velocities(p, ReducedState(theta, 0.0, 0.0, J))
    return SteadyState(kind=SteadyKind.INTERMEDIATE, theta0=theta, J=J,
                       spin_n=psd + phd * math.cos(theta), phidot=phd, psidot=psd)


def solve_intermediate(params: TopParams, J: float, n_panels: int = N_PANELS) -> list[SteadyState]:
    """All intermediate states on the Jellet level ``J``, sorted by tilt.

    Sign changes of the residual are bracketed on a uniform tilt grid and
    polished with Brent's method. A tangential (double) root can only sit at
    the bifurcation angle, which is probed directly.
    """
    if J == 0.0:
        return []
    p = params
    Jsq = J * J
    th = np.linspace(0.0, math.pi, n_panels + 1)
    fv = f_intermediate(p, Jsq, np.cos(th))
    f = lambda t: f_intermediate(p, Jsq, math.cos(t))  # noqa: E731
    roots: list[float] = []
    for i in range(n_panels):
        a, b = fv[i], fv[i + 1]
        if a == 0.0 and 0 < i:
            roots.append(th[i])
        elif a * b < 0:
            roots.append(brentq(f, th[i], th[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))

    from .stability import bifurcation_point

    xb = bifurcation_point(p)
    if xb is not None and abs(xb) < 1.0:
        tb = math.acos(xb)
        fb = f(tb)
        if abs(fb) < 1e-12 and all(abs(r - tb) > 1e-6 for r in roots):
            roots.append(tb)

    out = []
    for r in sorted(roots):
        if not 0.0 < r < math.pi or not existence_condition(p, r):
            continue
        out.append(_intermediate(p, r, J))
    return out


def vertical_states(params: TopParams, J: float) -> tuple[SteadyState, SteadyState]:
    """Upright (theta=0) and inverted (theta=pi) spinning states on level J."""
    p = params
    n0 = J / (p.C * (p.R - p.eps))
    npi = -J / (p.C * (p.R + p.eps))
    up_kind = SteadyKind.REST if J == 0 else SteadyKind.VERTICAL_UP
    down_kind = SteadyKind.REST if J == 0 else SteadyKind.VERTICAL_DOWN
    # phi and psi are not separately defined on the axis; the spin is put in psi
    return (SteadyState(up_kind, 0.0, J, n0, 0.0, n0),
            SteadyState(down_kind, math.pi, J, npi, 0.0, npi))


def continue_branch(params: TopParams, Jsq_range, n_steps: int) -> list[EquilibriumBranch]:
    """Intermediate states on a uniform J^2 grid linked into branches.

    Roots at consecutive grid points are linked to the nearest tilt within
    ``MAX_LINK_STEP``; anything else starts a new branch. Every branch is
    monotone in J^2.
    """
    from .stability import stability_flag

    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    lo, hi = float(Jsq_range[0]), float(Jsq_range[1])
    if lo < 0 or hi < lo:
        raise ValueError("invalid J^2 range")
    finished: list[EquilibriumBranch] = []
    open_: list[EquilibriumBranch] = []
    for jsq in np.linspace(lo, hi, n_steps):
        states = solve_intermediate(params, math.sqrt(jsq))
        still_open: list[EquilibriumBranch] = []
        claimed: set[int] = set()
        for br in open_:
            last = br.samples[-1][1]
            best, dist = None, MAX_LINK_STEP
            for k, s in enumerate(states):
                d = abs(s.theta0 - last)
                if k not in claimed and d <= dist:
                    best, dist = k, d
            if best is None:
                finished.append(br)
                continue
            claimed.add(best)
            s = states[best]
            br.samples.append((float(jsq), s.theta0, stability_flag(params, s)))
            still_open.append(br)
        for k, s in enumerate(states):
            if k not in claimed:
                br = EquilibriumBranch(SteadyKind.INTERMEDIATE,
                                       [(float(jsq), s.theta0, stability_flag(params, s))])
                still_open.append(br)
        open_ = still_open
    finished.extend(open_)
    finished.sort(key=lambda b: (b.samples[0][0], b.samples[0][1]))
    return finished


def write_branches_csv(rows, path) -> None:
    """Rows of ``(Jsq, theta0, stable, kind)``."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Jsq", "theta0", "stable", "kind"])
        for jsq, th, st, kind in rows:
            w.writerow([f"{jsq:.17g}", f"{th:.17g}", int(bool(st)), kind])
