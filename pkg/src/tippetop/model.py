"""Physical parameters of an eccentric-sphere tippe top.

All quantities are SI; angles are in radians.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ParameterError

__all__ = [
    "TopParams",
    "ShapeRatios",
    "validate",
    "height",
    "height_prime",
    "height_second",
    "calligraphic_B",
    "load_params",
    "save_params",
]

PARAM_KEYS = ("m", "R", "eps", "A", "C", "mu", "g")


@dataclass(frozen=True)
class ShapeRatios:
    inertia_ratio: float
    eccentricity_ratio: float


@dataclass(frozen=True)
class TopParams:
    """Mass ``m``, sphere radius ``R``, centre-of-mass offset ``eps``,
    transverse and axial moments of inertia ``A`` and ``C``, viscous
    friction coefficient ``mu`` (s/m) and gravity ``g``."""

    m: float
    R: float
    eps: float
    A: float
    C: float
    mu: float = 0.1
    g: float = 9.81

    @property
    def ratios(self) -> ShapeRatios:
        return ShapeRatios(self.A / self.C, self.eps / self.R)

    @property
    def inertia_ratio(self) -> float:
        return self.A / self.C

    @property
    def eccentricity_ratio(self) -> float:
        return self.eps / self.R

    def replace(self, **changes) -> "TopParams":
        d = asdict(self)
        d.update(changes)
        return TopParams(**d)

    @classmethod
    def from_ratios(cls, m, R, C, inertia_ratio, eccentricity_ratio, mu=0.1, g=9.81):
        return cls(m=m, R=R, eps=eccentricity_ratio * R, A=inertia_ratio * C, C=C, mu=mu, g=g)

    def to_dict(self) -> dict:
        return asdict(self)


def validate(params: TopParams) -> TopParams:
    """Return ``params`` unchanged, or raise :class:`ParameterError` naming
    the first violated invariant."""
    p = params
    for name in PARAM_KEYS:
        v = getattr(p, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ParameterError(f"{name} must be a finite number, got {v!r}")
    for name in ("m", "R", "A", "C", "g"):
        if getattr(p, name) <= 0:
            raise ParameterError(f"{name} must be > 0")
    if p.mu < 0:
        raise ParameterError("μ must be ≥ 0")
    if not 0 < p.eps < p.R:
        raise ParameterError("eccentricity must satisfy 0<ε<R")
    return p


def height(params: TopParams, theta: float) -> float:
    """Height of the centre of mass above the table."""
    return params.R - params.eps * math.cos(theta)


def height_prime(params: TopParams, theta: float) -> float:
    return params.eps * math.sin(theta)


def height_second(params: TopParams, theta: float) -> float:
    return params.eps * math.cos(theta)


def calligraphic_B(params: TopParams, theta0: float) -> float:
    """(A - C) cos(theta0) + C eps/R; its sign governs where intermediate
    states can exist."""
    return (params.A - params.C) * math.cos(theta0) + params.C * params.eps / params.R


def load_params(path) -> TopParams:
    """Read a preset JSON file with keys exactly ``m,R,eps,A,C,mu,g``."""
    data = json.loads(Path(path).read_text())
    keys = set(data)
    if keys != set(PARAM_KEYS):
        missing = sorted(set(PARAM_KEYS) - keys)
        extra = sorted(keys - set(PARAM_KEYS))
        raise ParameterError(f"preset keys mismatch (missing={missing}, unexpected={extra})")
    return validate(TopParams(**{k: float(data[k]) for k in PARAM_KEYS}))


def save_params(params: TopParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n")
