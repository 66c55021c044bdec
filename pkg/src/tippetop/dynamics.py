"""Full (untruncated) equations of motion of the eccentric sphere on a table.

The state vector is laid out as ``(x, y, theta, phi, psi, xdot, ydot,
thetadot, phidot, psidot)``. The height of the centre of mass is slaved to
``theta`` by the contact constraint and never stored.

Frame conventions: ``e_y = (cos phi, sin phi, 0)`` is the horizontal node
line, ``u = e_y x e_Z = (sin phi, -cos phi, 0)`` the horizontal direction in
which the symmetry axis leans, ``e_z = cos(theta) e_Z + sin(theta) u`` the
symmetry axis and ``e_x = e_y x e_z``.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.linalg.lapack import dgesv

from .errors import ChartSingularity, ModelBreakdown
from .model import TopParams

__all__ = [
    "FullState",
    "ContactKinematics",
    "STATE_FIELDS",
    "spin",
    "contact_kinematics",
    "body_frame",
    "slip_velocity",
    "normal_reaction",
    "friction_moments",
    "mass_matrix",
    "full_rhs",
    "jellet",
    "energy",
    "energy_rate",
    "state_from_spin",
]

POLE_GUARD = 1e-8

STATE_FIELDS = ("x", "y", "theta", "phi", "psi", "xdot", "ydot", "thetadot", "phidot", "psidot")


@dataclass(frozen=True)
class FullState:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    psi: float = 0.0
    xdot: float = 0.0
    ydot: float = 0.0
    thetadot: float = 0.0
    phidot: float = 0.0
    psidot: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, y) -> "FullState":
        return cls(*(float(v) for v in y[:10]))

    def replace(self, **changes) -> "FullState":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return FullState(**d)


@dataclass(frozen=True)
class ContactKinematics:
    omega: np.ndarray  # body-frame (e_x, e_y, e_z) components
    q: np.ndarray  # centre of mass -> contact point, body frame
    vQ: np.ndarray  # slip velocity, lab frame
    n: float


def _arr(state) -> np.ndarray:
    if isinstance(state, FullState):
        return state.to_array()
    return np.asarray(state, dtype=float)


def spin(state) -> float:
    """Spin about the symmetry axis, psidot + phidot cos(theta)."""
    y = _arr(state)
    return y[9] + y[8] * math.cos(y[2])


def body_frame(theta: float, phi: float) -> np.ndarray:
    """Columns are e_x, e_y, e_z expressed in the lab frame."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    u = np.array([sp, -cp, 0.0])
    ez_lab = np.array([0.0, 0.0, 1.0])
    e_y = np.array([cp, sp, 0.0])
    e_z = ct * ez_lab + st * u
    e_x = ct * u - st * ez_lab
    return np.column_stack([e_x, e_y, e_z])


def contact_kinematics(params: TopParams, state) -> ContactKinematics:
    y = _arr(state)
    _, _, th, ph, _, xd, yd, thd, phd, psd = y
    R, eps = params.R, params.eps
    st, ct = math.sin(th), math.cos(th)
    n = psd + phd * ct
    omega = np.array([-phd * st, thd, n])
    q = np.array([R * st, 0.0, eps - R * ct])
    vO = np.array([xd, yd, eps * st * thd])
    vQ = vO + body_frame(th, ph) @ np.cross(omega, q)
    scale = max(1.0, float(np.abs(vO).max()), float(np.abs(vQ[:2]).max()))
    assert abs(vQ[2]) < 1e-10 * scale, "contact point lost the table"
    return ContactKinematics(omega=omega, q=q, vQ=vQ, n=n)


def slip_velocity(params: TopParams, state) -> np.ndarray:
    """Lab-frame velocity of the material point at the contact."""
    return contact_kinematics(params, state).vQ


def _slip_h(R, eps, th, ph, xd, yd, thd, phd, psd):
    # horizontal slip: v_O - thetadot*h*u + sin(theta)*(R psidot + eps phidot)*e_y
    st = math.sin(th)
    cp, sp = math.cos(ph), math.sin(ph)
    h = R - eps * math.cos(th)
    roll = st * (R * psd + eps * phd)
    return xd - sp * thd * h + cp * roll, yd + cp * thd * h + sp * roll


def _normal_reaction(p: TopParams, th, ph, xd, yd, thd, phd, psd) -> float:
    st, ct = math.sin(th), math.cos(th)
    h = p.R - p.eps * ct
    h1 = p.eps * st
    h2 = p.eps * ct
    num = p.g + thd * thd * h2 + h1 * phd * st * (phd * ct - p.C * (psd + phd * ct) / p.A)
    den = 1.0 / p.m + h1 / p.A * (-h * p.mu * (math.sin(ph) * xd - math.cos(ph) * yd - thd * h) + h1)
    if not math.isfinite(den) or abs(den) < 1e-12 / p.m:
        raise ModelBreakdown("normal reaction denominator vanishes")
    Rn = num / den
    if not Rn > 0:
        raise ModelBreakdown(f"normal reaction R_n={Rn:.6g} <= 0: top leaves the table")
    return Rn


def normal_reaction(params: TopParams, state) -> float:
    """Normal reaction R_n of the table, from Newton's law for the centre of
    mass with thetaddot eliminated through the theta equation."""
    y = _arr(state)
    return _normal_reaction(params, y[2], y[3], y[5], y[6], y[7], y[8], y[9])


def _friction(p: TopParams, Rn, th, ph, xd, yd, thd, phd, psd):
    st, ct = math.sin(th), math.cos(th)
    cp, sp = math.cos(ph), math.sin(ph)
    h = p.R - p.eps * ct
    roll = st * (p.R * psd + p.eps * phd)
    k = -p.mu * Rn
    lateral = cp * xd + sp * yd + roll
    Qx = k * (xd - sp * thd * h + cp * roll)
    Qy = k * (yd + cp * thd * h + sp * roll)
    Qth = k * h * (cp * yd - sp * xd + h * thd)
    Qph = k * p.eps * st * lateral
    Qps = k * p.R * st * lateral
    return Qx, Qy, Qth, Qph, Qps


def friction_moments(params: TopParams, state, Rn: float | None = None) -> np.ndarray:
    """Generalised friction force ``(Q_x, Q_y, Q_theta, Q_phi, Q_psi)``."""
    y = _arr(state)
    if Rn is None:
        Rn = normal_reaction(params, y)
    return np.array(_friction(params, Rn, y[2], y[3], y[5], y[6], y[7], y[8], y[9]))


def mass_matrix(params: TopParams, theta: float) -> np.ndarray:
    p = params
    st, ct = math.sin(theta), math.cos(theta)
    M = np.zeros((5, 5))
    M[0, 0] = M[1, 1] = p.m
    M[2, 2] = p.A + p.m * (p.eps * st) ** 2
    M[3, 3] = p.A * st * st + p.C * ct * ct
    M[3, 4] = M[4, 3] = p.C * ct
    M[4, 4] = p.C
    return M


def full_rhs(params: TopParams, state, truncated: bool = False, pole_guard: float = POLE_GUARD) -> np.ndarray:
    """Time derivative of the 10-component state.

    With ``truncated=True`` the translational velocity is dropped from the
    normal reaction and from the rotational friction moments; the centre of
    mass is then driven by the angular motion only.

    This is the integrator's hot path, so the generalised forces are
    assembled inline from scalars before the dense solve of ``M qddot = F``.
    """
    y = state.to_array() if isinstance(state, FullState) else state
    _, _, th, ph, _, xd, yd, thd, phd, psd = (y.tolist() if isinstance(y, np.ndarray) else y)
    p = params
    st, ct = math.sin(th), math.cos(th)
    if abs(st) < pole_guard:
        raise ChartSingularity(f"|sin(theta)| < {pole_guard:g} at theta={th:.17g}")
    if truncated:
        Rn = _normal_reaction(p, th, ph, 0.0, 0.0, thd, phd, psd)
        Qx, Qy, _, _, _ = _friction(p, Rn, th, ph, xd, yd, thd, phd, psd)
        _, _, Qth, Qph, Qps = _friction(p, Rn, th, ph, 0.0, 0.0, thd, phd, psd)
    else:
        Rn = _normal_reaction(p, th, ph, xd, yd, thd, phd, psd)
        Qx, Qy, Qth, Qph, Qps = _friction(p, Rn, th, ph, xd, yd, thd, phd, psd)
    A, C = p.A, p.C
    n = psd + phd * ct
    sc = st * ct
    F = np.array([
        Qx,
        Qy,
        -p.m * p.eps * p.eps * sc * thd * thd + A * sc * phd * phd - C * n * phd * st
        - p.m * p.g * p.eps * st + Qth,
        -2.0 * (A - C) * sc * thd * phd + C * st * thd * psd + Qph,
        C * st * thd * phd + Qps,
    ])
    M = np.zeros((5, 5))
    M[0, 0] = M[1, 1] = p.m
    M[2, 2] = A + p.m * (p.eps * st) ** 2
    M[3, 3] = A * st * st + C * ct * ct
    M[3, 4] = M[4, 3] = C * ct
    M[4, 4] = C
    # direct dense LAPACK solve; cheaper per call than numpy's wrapper
    _, _, acc, info = dgesv(M, F)
    if info != 0:
        raise np.linalg.LinAlgError(f"singular mass matrix at theta={th:.17g}")
    out = np.empty(10)
    out[:5] = y[5:]
    out[5:] = acc
    return out


def jellet(params: TopParams, state) -> float:
    """Jellet's integral J = C n (R cos(theta) - eps) + A phidot R sin^2(theta)."""
    y = _arr(state)
    th = y[2]
    st = math.sin(th)
    n = y[9] + y[8] * math.cos(th)
    return params.C * n * (params.R * math.cos(th) - params.eps) + params.A * y[8] * params.R * st * st


def energy(params: TopParams, state) -> float:
    y = _arr(state)
    p = params
    th = y[2]
    st, ct = math.sin(th), math.cos(th)
    n = y[9] + y[8] * ct
    T = 0.5 * (p.m * (y[5] ** 2 + y[6] ** 2) + (p.m * (p.eps * st) ** 2 + p.A) * y[7] ** 2
               + p.A * st * st * y[8] ** 2 + p.C * n * n)
    return T + p.m * p.g * (p.R - p.eps * ct)


def energy_rate(params: TopParams, state, truncated: bool = False) -> float:
    """Power of the friction force, v_Q . R_f = -mu R_n |v_Q|^2."""
    y = _arr(state)
    if truncated:
        # power of the truncated force one-form; not sign-definite in general
        Rn = _normal_reaction(params, y[2], y[3], 0.0, 0.0, y[7], y[8], y[9])
        Qx, Qy, Qth, Qph, Qps = _friction(params, Rn, y[2], y[3], y[5], y[6], y[7], y[8], y[9])
        _, _, Qth, Qph, Qps = _friction(params, Rn, y[2], y[3], 0.0, 0.0, y[7], y[8], y[9])
        return Qx * y[5] + Qy * y[6] + Qth * y[7] + Qph * y[8] + Qps * y[9]
    Rn = normal_reaction(params, y)
    vx, vy = _slip_h(params.R, params.eps, y[2], y[3], y[5], y[6], y[7], y[8], y[9])
    return -params.mu * Rn * (vx * vx + vy * vy)


def state_from_spin(params: TopParams, theta0: float, n0: float | None = None, *,
                    J: float | None = None, phidot0: float | None = None, thetadot0: float = 0.0,
                    phi0: float = 0.0, psi0: float = 0.0, precession: str = "none") -> FullState:
    """Initial state at tilt ``theta0`` on the Jellet level of an upright
    spin ``n0`` (J = C n0 (R - eps)).

    The precession rate is ``phidot0`` if given. Otherwise ``precession="none"``
    starts with ``phidot = 0``, and ``"slow"`` picks the slow precession that
    balances the tilt, which suppresses the initial nutation.
    """
    p = params
    if J is None:
        if n0 is None:
            raise ValueError("need n0 or J")
        J = p.C * n0 * (p.R - p.eps)
    if phidot0 is None:
        if precession == "none":
            phidot0 = 0.0
        elif precession == "slow":
            from .reduction import ReducedState, precession_rates, reconstruct_velocities

            rates = precession_rates(p, theta0, J)
            if rates.size == 0:
                raise ValueError(f"no balancing precession at theta0={theta0:g}")
            phd, psd = reconstruct_velocities(p, ReducedState(theta0, thetadot0, float(rates[0]), J))
            return FullState(theta=theta0, phi=phi0, psi=psi0, thetadot=thetadot0,
                             phidot=phd, psidot=psd)
        else:
            raise ValueError(f"unknown precession mode {precession!r}")
    st, ct = math.sin(theta0), math.cos(theta0)
    lever = p.R * ct - p.eps
    if abs(lever) < 1e-15:
        raise ValueError("spin is unconstrained by J where R cos(theta) = eps")
    n = (J - p.A * phidot0 * p.R * st * st) / (p.C * lever)
    return FullState(theta=theta0, phi=phi0, psi=psi0, thetadot=thetadot0,
                     phidot=phidot0, psidot=n - phidot0 * ct)
