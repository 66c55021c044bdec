"""Routhian reduction of the truncated system on a Jellet level.

The translational velocity is dropped from the friction moments, leaving a
Lagrangian system on SO(3). In the coordinates ``phibar = eps*phi + R*psi``
and ``c = R*phi - eps*psi`` the coordinate ``c`` is cyclic with conjugate
momentum ``J / (eps^2 + R^2)``. Eliminating ``cdot`` yields a two degree of
freedom system in ``(theta, phibar)`` with Routhian ``T2 + T1 - W``.

The reduced vector field treats the velocity-linear term ``T1`` as a
gyroscopic force, so it is regular on the whole open interval
``0 < theta < pi``.

Convention: the kinetic coefficients ``T_thth`` and ``T_pbpb`` returned here
are mass-matrix entries, i.e. ``T2 = (T_thth*thetadot**2 + T_pbpb*phibardot**2)/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .dynamics import POLE_GUARD, FullState, _friction, _normal_reaction, full_rhs, jellet
from .errors import ChartSingularity
from .model import TopParams

__all__ = [
    "ReducedState",
    "RouthianPieces",
    "denominator",
    "truncate",
    "to_reduced",
    "cdot",
    "routhian_pieces",
    "routhian",
    "effective_potential",
    "effective_potential_d1",
    "effective_potential_d2",
    "gyroscopic_coeff",
    "gyroscopic_coeff_d1",
    "precession_rates",
    "kinetic_coeffs",
    "reduced_normal_reaction",
    "reduced_rhs",
    "reduced_energy",
    "reconstruct_velocities",
    "to_full",
    "replay_translation",
]


@dataclass(frozen=True)
class ReducedState:
    theta: float
    thetadot: float
    phibardot: float
    J: float


@dataclass(frozen=True)
class RouthianPieces:
    T_thth: float
    T_pbpb: float
    T1_coeff: float
    W: float


def denominator(params: TopParams, theta: float) -> float:
    """D(theta) = R^2 A sin^2(theta) + C (R cos(theta) - eps)^2, strictly positive."""
    p = params
    st, ct = math.sin(theta), math.cos(theta)
    return p.R * p.R * p.A * st * st + p.C * (p.R * ct - p.eps) ** 2


def _numerator(p: TopParams, theta: float) -> float:
    st, ct = math.sin(theta), math.cos(theta)
    return p.R * p.eps * p.A * st * st + p.C * (p.R + p.eps * ct) * (p.R * ct - p.eps)


def _calB(p: TopParams, theta: float) -> float:
    return (p.A - p.C) * math.cos(theta) + p.C * p.eps / p.R


def truncate(params: TopParams, state):
    """Angular part of ``state`` and the truncated friction moments
    ``(Q'_theta, Q'_phi, Q'_psi)`` evaluated with the centre of mass at rest."""
    y = state.to_array() if isinstance(state, FullState) else np.asarray(state, dtype=float)
    th, ph, thd, phd, psd = y[2], y[3], y[7], y[8], y[9]
    Rn = _normal_reaction(params, th, ph, 0.0, 0.0, thd, phd, psd)
    _, _, Qth, Qph, Qps = _friction(params, Rn, th, ph, 0.0, 0.0, thd, phd, psd)
    angular = np.array([y[2], y[3], y[4], thd, phd, psd])
    return angular, np.array([Qth, Qph, Qps])


def to_reduced(params: TopParams, state) -> ReducedState:
    y = state.to_array() if isinstance(state, FullState) else np.asarray(state, dtype=float)
    return ReducedState(theta=float(y[2]), thetadot=float(y[7]),
                        phibardot=params.eps * y[8] + params.R * y[9], J=jellet(params, y))


def _cdot(p: TopParams, theta: float, phibardot: float, J: float) -> float:
    S = p.eps * p.eps + p.R * p.R
    return (J * S - _numerator(p, theta) * phibardot) / denominator(p, theta)


def cdot(params: TopParams, rstate: ReducedState) -> float:
    """Rate of the cyclic coordinate on the Jellet level."""
    return _cdot(params, rstate.theta, rstate.phibardot, rstate.J)


def _velocities(p: TopParams, theta, phibardot, J):
    S = p.eps * p.eps + p.R * p.R
    cd = _cdot(p, theta, phibardot, J)
    return (p.eps * phibardot + p.R * cd) / S, (p.R * phibardot - p.eps * cd) / S


def reconstruct_velocities(params: TopParams, rstate: ReducedState) -> tuple[float, float]:
    """``(phidot, psidot)`` recovered from ``phibardot`` and the Jellet level."""
    return _velocities(params, rstate.theta, rstate.phibardot, rstate.J)


def to_full(params: TopParams, rstate: ReducedState, phi: float = 0.0, psi: float = 0.0,
            xdot: float = 0.0, ydot: float = 0.0) -> FullState:
    phd, psd = reconstruct_velocities(params, rstate)
    return FullState(theta=rstate.theta, phi=phi, psi=psi, xdot=xdot, ydot=ydot,
                     thetadot=rstate.thetadot, phidot=phd, psidot=psd)


def kinetic_coeffs(params: TopParams, theta: float) -> tuple[float, float]:
    """Mass-matrix entries ``(T_thth, T_pbpb)`` of the reduced kinetic energy."""
    p = params
    st = math.sin(theta)
    return p.A + p.m * (p.eps * st) ** 2, p.A * p.C * st * st / denominator(p, theta)


def _kinetic_d1(p: TopParams, theta: float) -> tuple[float, float]:
    st, ct = math.sin(theta), math.cos(theta)
    D = denominator(p, theta)
    dMth = 2.0 * p.m * p.eps * p.eps * st * ct
    dMpb = 2.0 * p.A * p.C * st * (ct * D - p.R * p.R * st * st * _calB(p, theta)) / (D * D)
    return dMth, dMpb


def gyroscopic_coeff(params: TopParams, theta: float, J: float) -> float:
    """Coefficient of phibardot in T1."""
    p = params
    S = p.eps * p.eps + p.R * p.R
    return J * _numerator(p, theta) / (S * denominator(p, theta))


def _gyro_d1_over_sin(p: TopParams, theta: float, J: float) -> float:
    # d/dtheta of the T1 coefficient, divided by sin(theta); regular at the poles
    ct = math.cos(theta)
    S = p.eps * p.eps + p.R * p.R
    D = denominator(p, theta)
    dN = 2.0 * p.R * p.eps * p.A * ct - p.C * (2.0 * p.eps * p.R * ct + p.R * p.R - p.eps * p.eps)
    dD = 2.0 * p.R * p.R * _calB(p, theta)
    return J / S * (dN * D - _numerator(p, theta) * dD) / (D * D)


def gyroscopic_coeff_d1(params: TopParams, theta: float, J: float) -> float:
    return math.sin(theta) * _gyro_d1_over_sin(params, theta, J)


def precession_rates(params: TopParams, theta: float, J: float) -> np.ndarray:
    """Values of ``phibardot`` for which ``theta`` is momentarily balanced
    (zero tilt acceleration at zero tilt rate, without friction), sorted by
    magnitude. The first entry is the slow precession; empty if none exist."""
    p = params
    if abs(math.sin(theta)) < POLE_GUARD:
        raise ChartSingularity(f"precession undefined at theta={theta:.17g}")
    _, dMpb = _kinetic_d1(p, theta)
    coeffs = [0.5 * dMpb, gyroscopic_coeff_d1(p, theta, J), -effective_potential_d1(p, theta, J)]
    roots = np.roots(np.trim_zeros(coeffs, "f")) if any(coeffs) else np.array([])
    roots = roots[np.abs(roots.imag) <= 1e-12 * max(1.0, float(np.max(np.abs(roots), initial=0.0)))].real
    return roots[np.argsort(np.abs(roots))]


def effective_potential(params: TopParams, theta: float, J: float) -> float:
    """W = J^2 / (2 D) - m g eps cos(theta); the constant m g R is omitted."""
    p = params
    return 0.5 * J * J / denominator(p, theta) - p.m * p.g * p.eps * math.cos(theta)


def effective_potential_d1(params: TopParams, theta: float, J: float) -> float:
    p = params
    D = denominator(p, theta)
    return math.sin(theta) * (p.m * p.g * p.eps - J * J * p.R * p.R * _calB(p, theta) / (D * D))


def effective_potential_d2(params: TopParams, theta: float, J: float) -> float:
    p = params
    st, ct = math.sin(theta), math.cos(theta)
    D = denominator(p, theta)
    B = _calB(p, theta)
    R2 = p.R * p.R
    return (ct * (p.m * p.g * p.eps - J * J * R2 * B / (D * D))
            + J * J * R2 * st * st * ((p.A - p.C) / (D * D) + 4.0 * R2 * B * B / D ** 3))


def routhian_pieces(params: TopParams, rstate: ReducedState) -> RouthianPieces:
    Mth, Mpb = kinetic_coeffs(params, rstate.theta)
    return RouthianPieces(T_thth=Mth, T_pbpb=Mpb,
                          T1_coeff=gyroscopic_coeff(params, rstate.theta, rstate.J),
                          W=effective_potential(params, rstate.theta, rstate.J))


def routhian(params: TopParams, rstate: ReducedState) -> float:
    r = routhian_pieces(params, rstate)
    T2 = 0.5 * (r.T_thth * rstate.thetadot ** 2 + r.T_pbpb * rstate.phibardot ** 2)
    return T2 + r.T1_coeff * rstate.phibardot - r.W


def reduced_energy(params: TopParams, rstate: ReducedState) -> float:
    """T2 + W; non-increasing along reduced trajectories."""
    Mth, Mpb = kinetic_coeffs(params, rstate.theta)
    return (0.5 * (Mth * rstate.thetadot ** 2 + Mpb * rstate.phibardot ** 2)
            + effective_potential(params, rstate.theta, rstate.J))


def reduced_normal_reaction(params: TopParams, rstate: ReducedState) -> float:
    phd, psd = reconstruct_velocities(params, rstate)
    return _normal_reaction(params, rstate.theta, 0.0, 0.0, 0.0, rstate.thetadot, phd, psd)


def _reduced_accel(p: TopParams, th, thd, pbd, J, pole_guard):
    st, ct = math.sin(th), math.cos(th)
    if abs(st) < pole_guard:
        raise ChartSingularity(f"|sin(theta)| < {pole_guard:g} at theta={th:.17g}")
    phd, psd = _velocities(p, th, pbd, J)
    Rn = _normal_reaction(p, th, 0.0, 0.0, 0.0, thd, phd, psd)
    Mth, Mpb = kinetic_coeffs(p, th)
    dMth, dMpb = _kinetic_d1(p, th)
    dk = gyroscopic_coeff_d1(p, th, J)
    h = p.R - p.eps * ct
    Qth = -p.mu * Rn * h * h * thd
    Qpb = -p.mu * Rn * st * st * pbd
    thdd = (-0.5 * dMth * thd * thd + 0.5 * dMpb * pbd * pbd + dk * pbd
            - effective_potential_d1(p, th, J) + Qth) / Mth
    pbdd = (-dMpb * thd * pbd - dk * thd + Qpb) / Mpb
    return thdd, pbdd


def reduced_rhs(params: TopParams, rstate: ReducedState, pole_guard: float = POLE_GUARD) -> np.ndarray:
    """``(thetadot, thetaddot, phibarddot)`` of the reduced equations."""
    thdd, pbdd = _reduced_accel(params, rstate.theta, rstate.thetadot, rstate.phibardot,
                                rstate.J, pole_guard)
    return np.array([rstate.thetadot, thdd, pbdd])


def replay_translation(params: TopParams, times, angles, rates, accels=None, xy0=(0.0, 0.0),
                       vxy0=(0.0, 0.0), rtol: float = 1e-10, atol: float = 1e-12):
    """Centre-of-mass motion driven by a sampled angular trajectory.

    ``angles`` and ``rates`` are ``(len(times), 3)`` arrays of ``(theta, phi,
    psi)`` and their rates; ``accels`` (same shape) are the angular
    accelerations used as Hermite slopes for the rates, and are recomputed
    from the truncated equations when omitted. Friction uses the truncated
    normal reaction. Returns ``(x, y, xdot, ydot)`` sampled at ``times``.
    """
    p = params
    times = np.asarray(times, dtype=float)
    angles = np.asarray(angles, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if accels is None:
        accels = np.empty_like(rates)
        for i in range(len(times)):
            y = np.zeros(10)
            y[2:5] = angles[i]
            y[7:10] = rates[i]
            accels[i] = full_rhs(p, y, truncated=True, pole_guard=0.0)[7:10]
    ang = CubicHermiteSpline(times, angles, rates, axis=0)
    rat = CubicHermiteSpline(times, rates, np.asarray(accels, dtype=float), axis=0)

    def rhs(t, z):
        th, ph, _ = ang(t)
        thd, phd, psd = rat(t)
        Rn = _normal_reaction(p, th, ph, 0.0, 0.0, thd, phd, psd)
        Qx, Qy, _, _, _ = _friction(p, Rn, th, ph, z[2], z[3], thd, phd, psd)
        return [z[2], z[3], Qx / p.m, Qy / p.m]

    z0 = [xy0[0], xy0[1], vxy0[0], vxy0[1]]
    sol = solve_ivp(rhs, (times[0], times[-1]), z0, method="DOP853", t_eval=times, rtol=rtol, atol=atol)
    return sol.y.T
