"""Reference tops, one per classification group.

All presets share the mass, radius and axial moment of a small wooden tippe
top and differ only in the two shape ratios ``A/C`` and ``eps/R``.
"""
from __future__ import annotations

from .model import TopParams

__all__ = ["GROUP_RATIOS", "BASE", "group_preset", "demo_preset", "all_presets"]

BASE = {"m": 0.015, "R": 0.025, "C": 2e-6, "g": 9.81}

# group -> (A/C, eps/R)
GROUP_RATIOS: dict[str, tuple[float, float]] = {
    "Ia": (0.88, 0.05),
    "Ib": (0.6, 0.3),
    "IIa": (0.8, 0.3),
    "IIb": (1.1, 0.2),
    "IIc": (0.99, 0.03),
    "III": (1.5, 0.3),
}


def group_preset(group: str, mu: float = 0.3) -> TopParams:
    try:
        a, e = GROUP_RATIOS[group]
    except KeyError:
        raise KeyError(f"unknown group {group!r}; expected one of {sorted(GROUP_RATIOS)}") from None
    return TopParams.from_ratios(BASE["m"], BASE["R"], BASE["C"], a, e, mu=mu, g=BASE["g"])


def demo_preset() -> TopParams:
    """The Group IIa top used in the walkthroughs."""
    return group_preset("IIa")


def all_presets(mu: float = 0.3) -> dict[str, TopParams]:
    return {g: group_preset(g, mu) for g in GROUP_RATIOS}
