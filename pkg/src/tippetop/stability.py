"""Linear stability of steady states and the six-group classification."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .equilibria import (
    SteadyKind,
    SteadyState,
    branch_jsq,
    continue_branch,
    theta_c,
    vertical_states,
)
from .errors import DegenerateCase
from .model import TopParams
from .reduction import (
    _gyro_d1_over_sin,
    denominator,
    effective_potential_d2,
    kinetic_coeffs,
)

__all__ = [
    "LinearizationCoeffs",
    "ClassificationReport",
    "DiagramSeries",
    "Diagram",
    "linearization",
    "characteristic_polynomial",
    "eigenvalues",
    "hurwitz_conditions",
    "is_linearly_stable",
    "stability_flag",
    "threshold_n1",
    "threshold_n2",
    "n_star",
    "g_function",
    "bifurcation_point",
    "classify",
    "default_jsq_range",
    "diagram",
]

BOUNDARY_TOL = 1e-12
GROUPS = ("Ia", "Ib", "IIa", "IIb", "IIc", "III")


@dataclass(frozen=True)
class LinearizationCoeffs:
    alpha: float
    beta: float
    gamma: float
    delta: float


def linearization(params: TopParams, steady: SteadyState) -> LinearizationCoeffs:
    """Coefficients of the cubic factor of the characteristic polynomial.

    The normal reaction equals ``m g`` at any steady state. Both ``beta`` and
    ``gamma`` are evaluated in forms where the vanishing ``sin(theta0)``
    factors have been cancelled, so vertical states need no special casing.
    """
    p = params
    th = steady.theta0
    J = steady.J
    mg = p.m * p.g
    Mth, _ = kinetic_coeffs(p, th)
    D = denominator(p, th)
    h = p.R - p.eps * math.cos(th)
    alpha = p.mu * mg * h * h / Mth
    # T_pbpb = A C sin^2 / D, so sin^2 / T_pbpb = D / (A C)
    gamma = p.mu * mg * D / (p.A * p.C)
    beta = _gyro_d1_over_sin(p, th, J) * math.sqrt(D / (Mth * p.A * p.C))
    delta = effective_potential_d2(p, th, J) / Mth
    return LinearizationCoeffs(alpha, beta, gamma, delta)


def characteristic_polynomial(params: TopParams, steady: SteadyState) -> np.ndarray:
    """Coefficients (highest degree first) of
    ``lambda * (lambda^3 + (a+g) lambda^2 + (a g + b^2 + d) lambda + d g)``."""
    c = linearization(params, steady)
    return np.array([
        1.0,
        c.alpha + c.gamma,
        c.alpha * c.gamma + c.beta ** 2 + c.delta,
        c.delta * c.gamma,
        0.0,
    ])


def eigenvalues(params: TopParams, steady: SteadyState) -> np.ndarray:
    return np.roots(characteristic_polynomial(params, steady))


def hurwitz_conditions(coeffs: LinearizationCoeffs) -> tuple[bool, bool, bool]:
    a, b, g, d = coeffs.alpha, coeffs.beta, coeffs.gamma, coeffs.delta
    return (a + g > 0, (a + g) * (a * g + b * b + d) - d * g > 0, d * g > 0)


def _delta_tol(p: TopParams, steady: SteadyState) -> float:
    Mth, _ = kinetic_coeffs(p, steady.theta0)
    return 1e-12 * p.m * p.g * p.eps / Mth


def is_linearly_stable(params: TopParams, steady: SteadyState) -> bool:
    """True iff the effective potential has a strict minimum in theta.

    Raises :class:`DegenerateCase` without friction (the nonzero roots are
    then purely imaginary) or when the curvature is numerically zero.
    """
    if params.mu == 0:
        raise DegenerateCase("no friction: linear stability is marginal")
    d = linearization(params, steady).delta
    if abs(d) < _delta_tol(params, steady):
        raise DegenerateCase(f"marginal curvature delta={d:.3g} at theta0={steady.theta0:.6g}")
    return d > 0


def stability_flag(params: TopParams, steady: SteadyState) -> bool:
    """Sign of the curvature only; never raises. Used for diagrams."""
    return linearization(params, steady).delta > 0


def threshold_n1(params: TopParams) -> float | None:
    """Upright spin above which theta=0 loses stability; ``None`` when it is
    stable for every spin."""
    a, e = params.inertia_ratio, params.eccentricity_ratio
    gap = a - (1.0 - e)
    if gap <= 0:
        return None
    p = params
    return math.sqrt(p.m * p.g * p.eps / (p.C * gap)) * (1.0 - e)


def threshold_n2(params: TopParams) -> float | None:
    """Inverted spin above which theta=pi is stable; ``None`` when it never is."""
    a, e = params.inertia_ratio, params.eccentricity_ratio
    gap = (1.0 + e) - a
    if gap <= 0:
        return None
    p = params
    return math.sqrt(p.m * p.g * p.eps / (p.C * gap)) * (1.0 + e)


def n_star(params: TopParams) -> float:
    p = params
    return 2.0 * math.sqrt(p.A * p.m * p.g * p.eps) / p.C


def g_function(params: TopParams, cos_theta):
    """Sign of this function on an intermediate state is its stability."""
    a, e = params.inertia_ratio, params.eccentricity_ratio
    x = np.asarray(cos_theta, dtype=float)
    out = (a - 1.0) + 4.0 * ((a - 1.0) * x + e) ** 2 / (a * (1.0 - x * x) + (x - e) ** 2)
    return float(out) if out.ndim == 0 else out


def _xb_raw(a: float, e: float) -> float | None:
    rad = 1.0 - a - e * e
    if rad <= 0:
        return None
    return e / (1.0 - a) - math.sqrt(3.0) / 3.0 * math.sqrt(a) * math.sqrt(rad) / (1.0 - a)


def bifurcation_point(params: TopParams) -> float | None:
    """Cosine of the tilt where the intermediate branch changes stability,
    or ``None`` if there is no such point in [-1, 1]."""
    xb = _xb_raw(params.inertia_ratio, params.eccentricity_ratio)
    if xb is None or abs(xb) > 1.0:
        return None
    return xb


@dataclass
class ClassificationReport:
    group: str
    theta_c: float | None = None
    theta_b: float | None = None
    x_b: float | None = None
    n1: float | None = None
    n2: float | None = None
    n_star: float | None = None
    boundary_flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def classify(params: TopParams) -> ClassificationReport:
    a, e = params.inertia_ratio, params.eccentricity_ratio
    d = a - 1.0
    flags = []
    if abs(d + e) < BOUNDARY_TOL:
        flags.append("I/II")
    if abs(d - e) < BOUNDARY_TOL:
        flags.append("II/III")
    rad = 1.0 - a - e * e
    if abs(rad) < BOUNDARY_TOL:
        flags.append("bifurcation_radicand_zero")
    xb_raw = _xb_raw(a, e)
    if xb_raw is not None:
        if abs(xb_raw + 1.0) < BOUNDARY_TOL:
            flags.append("x_b=-1")
        if abs(xb_raw - 1.0) < BOUNDARY_TOL:
            flags.append("x_b=+1")

    # closed inequalities at the group boundaries: n1 (resp. n2) is undefined there
    if d <= -e:
        # x_b always exists below 1 in Group I
        group = "Ia" if xb_raw is None or xb_raw <= -1.0 else "Ib"
    elif d >= e:
        group = "III"
    elif xb_raw is not None and abs(xb_raw) < 1.0:
        group = "IIa"
    elif xb_raw is not None and xb_raw < -1.0:
        group = "IIc"
    else:
        group = "IIb"

    xb = bifurcation_point(params)
    n2 = threshold_n2(params)
    return ClassificationReport(
        group=group,
        theta_c=theta_c(params),
        theta_b=math.acos(xb) if xb is not None else None,
        x_b=xb,
        n1=threshold_n1(params),
        n2=n2,
        n_star=n_star(params) if n2 is not None else None,
        boundary_flags=flags,
    )


def _jsq_up(p: TopParams, n: float) -> float:
    return (p.C * n * (p.R - p.eps)) ** 2


def _jsq_down(p: TopParams, n: float) -> float:
    return (p.C * n * (p.R + p.eps)) ** 2


def default_jsq_range(params: TopParams, factor: float = 2.0) -> tuple[float, float]:
    """[0, factor * largest finite J^2 of interest]: the vertical thresholds
    and the fold of the intermediate branch."""
    p = params
    marks = []
    n1, n2 = threshold_n1(p), threshold_n2(p)
    if n1 is not None:
        marks.append(_jsq_up(p, n1))
    if n2 is not None:
        marks.append(_jsq_down(p, n2))
    xb = bifurcation_point(p)
    if xb is not None:
        marks.append(float(branch_jsq(p, xb)))
    if not marks:
        marks.append(_jsq_up(p, n_star(p)))
    return 0.0, factor * max(marks)


@dataclass
class DiagramSeries:
    kind: str
    rows: list[tuple[float, float, bool, str]]  # (Jsq, theta0, stable, kind)

    def transitions(self) -> int:
        st = [r[2] for r in self.rows]
        return sum(1 for u, v in zip(st, st[1:]) if u != v)


@dataclass
class Diagram:
    group: str
    series: list[DiagramSeries]
    jsq_thresholds: dict[str, float | None]


def diagram(params: TopParams, Jsq_range=None, n_steps: int = 400) -> Diagram:
    """Plot-ready bifurcation data: the two vertical lines with per-sample
    stability and one intermediate curve ordered by tilt.

    Intermediate roots found on the J^2 grid all lie on the single curve
    J^2(theta), so the grid branches (which split at the fold) are merged
    back into one series.
    """
    p = params
    if Jsq_range is None:
        Jsq_range = default_jsq_range(p)
    lo, hi = float(Jsq_range[0]), float(Jsq_range[1])
    if lo < 0 or hi < lo:
        raise ValueError("invalid J^2 range")
    grid = np.linspace(lo, hi, n_steps) if hi > lo else np.array([lo])
    up_rows, down_rows = [], []
    for jsq in grid:
        up, down = vertical_states(p, math.sqrt(jsq))
        up_rows.append((float(jsq), 0.0, stability_flag(p, up), up.kind.value))
        down_rows.append((float(jsq), math.pi, stability_flag(p, down), down.kind.value))
    series = [DiagramSeries(SteadyKind.VERTICAL_UP.value, up_rows),
              DiagramSeries(SteadyKind.VERTICAL_DOWN.value, down_rows)]
    if hi > lo:
        pts = []
        for br in continue_branch(p, (lo, hi), n_steps):
            pts.extend((*s, SteadyKind.INTERMEDIATE.value) for s in br.samples)
        if pts:
            pts.sort(key=lambda r: r[1])
            series.append(DiagramSeries(SteadyKind.INTERMEDIATE.value, pts))
    n1, n2 = threshold_n1(p), threshold_n2(p)
    xb = bifurcation_point(p)
    return Diagram(
        group=classify(p).group,
        series=series,
        jsq_thresholds={
            "n1": _jsq_up(p, n1) if n1 is not None else None,
            "n2": _jsq_down(p, n2) if n2 is not None else None,
            "fold": float(branch_jsq(p, xb)) if xb is not None else None,
        },
    )
