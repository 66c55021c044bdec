import csv
import math

import numpy as np
import pytest

from tippetop import dynamics as dyn
from tippetop.dynamics import FullState
from tippetop.equilibria import solve_intermediate
from tippetop.presets import group_preset
from tippetop.reduction import ReducedState, reduced_energy
from tippetop.simulate import (
    IntegratorConfig,
    Termination,
    integrate_full,
    integrate_reduced,
    monitor_report,
)
from tippetop.stability import eigenvalues, is_linearly_stable

from .conftest import GROUPS


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(pole_guard=1e-2)
    with pytest.raises(ValueError):
        IntegratorConfig(pole_guard=0.0)
    IntegratorConfig(pole_guard=1e-3)


def test_rest_converges_immediately():
    p = group_preset("IIa")
    tr = integrate_full(p, FullState(theta=0.0))
    assert tr.termination is Termination.CONVERGED
    assert len(tr) == 1
    assert tr.column("J")[0] == 0.0
    assert tr.column("E")[0] == pytest.approx(p.m * p.g * (p.R - p.eps))


def test_tilted_release_is_not_converged():
    p = group_preset("IIa", mu=0.0)
    tr = integrate_full(p, FullState(theta=0.5), IntegratorConfig(t_end=0.05))
    assert tr.termination is Termination.TIME_END
    assert tr.column("theta")[-1] < 0.5


def test_times_strictly_increasing_and_monitors_aligned():
    p = group_preset("IIa")
    tr = integrate_full(p, dyn.state_from_spin(p, 0.2, 120.0), IntegratorConfig(t_end=0.5))
    assert np.all(np.diff(tr.times) > 0)
    for name in ("J", "E", "Rn", "vQ"):
        assert len(tr.column(name)) == len(tr.times)
    raw = integrate_full(p, dyn.state_from_spin(p, 0.2, 120.0), IntegratorConfig(t_end=0.5, sample_dt=None))
    assert np.all(np.diff(raw.times) > 0)
    assert raw.times[-1] == 0.5


def test_frictionless_full_energy_constant():
    p = group_preset("IIa", mu=0.0)
    tr = integrate_full(p, FullState(theta=0.5), IntegratorConfig(t_end=1.0))
    E = tr.column("E")
    assert monitor_report(tr).max_rel_dE < 1e-9
    assert np.ptp(E) / E[0] < 1e-9


def test_monitor_report_bars():
    p = group_preset("IIb")
    tr = integrate_full(p, dyn.state_from_spin(p, 0.3, 90.0, phidot0=4.0), IntegratorConfig(t_end=2.0))
    rep = monitor_report(tr)
    assert rep.max_rel_dJ < 1e-8
    assert rep.max_pos_dEdt < 1e-9
    assert rep.min_Rn > 0
    assert rep.termination == tr.termination.value
    assert set(rep.to_dict()) >= {"max_rel_dJ", "max_pos_dEdt", "min_Rn"}


def test_pole_event_lands_on_guard():
    p = group_preset("IIa", mu=0.0)
    # J = 0 pendulum swings through the upright pole
    tr = integrate_full(p, FullState(theta=0.5), IntegratorConfig(t_end=3.0))
    assert tr.termination is Termination.POLE_REACHED
    assert abs(math.sin(tr.final[2])) == pytest.approx(1e-8, rel=1e-3)
    assert np.all(tr.column("theta") > 0)


def test_model_breakdown_is_termination_not_exception():
    p = group_preset("IIa")
    tr = integrate_full(p, FullState(theta=1.0, thetadot=-400.0))
    assert tr.termination is Termination.MODEL_BREAKDOWN
    assert "R_n" in tr.message


def test_tipping_and_return():
    p = group_preset("IIa", mu=0.3)
    cfg = IntegratorConfig(t_end=30.0, pole_guard=1e-3)
    up = integrate_full(p, dyn.state_from_spin(p, 0.1, 150.0, precession="slow"), cfg)
    assert up.termination is Termination.POLE_REACHED and up.final[2] > 3.0
    back = integrate_full(p, dyn.state_from_spin(p, 0.1, 30.0, precession="slow"), cfg)
    assert back.termination is Termination.POLE_REACHED and back.final[2] < 0.01


def test_halving_tolerance_changes_final_state_little():
    p = group_preset("IIa")
    s0 = dyn.state_from_spin(p, 0.3, 100.0, phidot0=5.0)
    a = integrate_full(p, s0, IntegratorConfig(t_end=1.0, rel_tol=1e-10, abs_tol=1e-10))
    b = integrate_full(p, s0, IntegratorConfig(t_end=1.0, rel_tol=5e-11, abs_tol=5e-11))
    # angles are O(100) rad after a second of spinning, so compare relative to the state scale
    diff = np.abs(a.final - b.final) / np.maximum(1.0, np.abs(a.final))
    assert diff.max() < 10 * 1e-10 * 100


def _steady(group, n0=70.0):
    p = group_preset(group, mu=0.3)
    J = p.C * n0 * (p.R - p.eps)
    return p, J, solve_intermediate(p, J)


@pytest.mark.parametrize("group", ["IIa", "III", "IIb"])
def test_intermediate_state_stays_fixed(group):
    p, J, states = _steady(group)
    assert states
    for s in states:
        tr = integrate_reduced(p, s.reduced, IntegratorConfig(t_end=10.0, convergence_eps=0.0))
        assert tr.termination is Termination.TIME_END
        assert np.max(np.abs(tr.column("theta") - s.theta0)) < 1e-9
        assert np.max(np.abs(tr.column("thetadot"))) < 1e-9
        assert np.max(np.abs(tr.column("phibardot"))) < 1e-9


def test_intermediate_state_reports_converged_by_default():
    p, J, states = _steady("IIa")
    tr = integrate_reduced(p, states[0].reduced)
    assert tr.termination is Termination.CONVERGED


@pytest.mark.parametrize("group,n0", [("IIa", 70.0), ("IIb", 40.0), ("IIb", 70.0), ("III", 120.0)])
def test_perturbed_stable_state_decays_at_predicted_rate(group, n0):
    p, J, states = _steady(group, n0)
    s = states[-1]
    assert is_linearly_stable(p, s)
    ev = eigenvalues(p, s)
    ev = ev[np.abs(ev) > 1e-8]
    lam = ev[np.argmax(ev.real)]
    assert abs(lam.imag) < 1e-9  # slowest mode is monotone, so log|dtheta| is a straight line
    T = 8.0 / abs(lam.real)
    tr = integrate_reduced(p, ReducedState(s.theta0 + 1e-3, 0.0, 0.0, J),
                           IntegratorConfig(t_end=T, convergence_eps=0.0))
    d = np.abs(tr.column("theta") - s.theta0)
    late = tr.times > T / 2
    slope = np.polyfit(tr.times[late], np.log(d[late]), 1)[0]
    assert slope == pytest.approx(lam.real, rel=0.10)


@pytest.mark.parametrize("group", GROUPS)
def test_dynamical_confirmation_of_linear_stability(group):
    """A 1e-3 perturbation of an intermediate state decays iff it is stable."""
    p = group_preset(group, mu=0.3)
    checked = 0
    for n0 in (30.0, 50.0, 70.0, 120.0):
        J = p.C * n0 * (p.R - p.eps)
        for s in solve_intermediate(p, J):
            if min(s.theta0, math.pi - s.theta0) < 0.05:
                continue
            ev = eigenvalues(p, s)
            rate = np.max(ev[np.abs(ev) > 1e-8].real)
            T = min(20.0, 5.0 / abs(rate))
            tr = integrate_reduced(p, ReducedState(s.theta0 + 1e-3, 0.0, 0.0, J),
                                   IntegratorConfig(t_end=T, convergence_eps=0.0, pole_guard=1e-3))
            dev = abs(tr.column("theta")[-1] - s.theta0)
            if is_linearly_stable(p, s):
                assert tr.termination is Termination.TIME_END and dev < 1e-4
            else:
                # departs: grows by at least half the predicted exponent
                assert dev > 1e-3 * math.exp(0.5 * rate * tr.times[-1])
                assert dev > 1e-3
            checked += 1
    assert checked >= 1


def test_reduced_frictionless_energy_constant():
    p = group_preset("IIa", mu=0.0)
    r0 = ReducedState(0.8, 0.7, 0.5, p.C * 80.0 * (p.R - p.eps))
    tr = integrate_reduced(p, r0, IntegratorConfig(t_end=2.0))
    E = tr.column("E_red")
    assert np.max(np.abs(E - E[0])) / abs(E[0]) < 1e-9
    assert E[0] == pytest.approx(reduced_energy(p, r0), rel=1e-14)
    assert np.all(tr.column("J") == r0.J)


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_full_csv_export(tmp_path):
    p = group_preset("IIa")
    tr = integrate_full(p, dyn.state_from_spin(p, 0.2, 100.0), IntegratorConfig(t_end=0.01))
    tr.to_csv(tmp_path / "t.csv")
    header, rows = _read_csv(tmp_path / "t.csv")
    assert header == "t,theta,phi,psi,x,y,thetadot,phidot,psidot,J,E,Rn,vQ".split(",")
    assert len(rows) == len(tr)
    # 17 significant digits: exact float round trip
    assert float(rows[5][1]) == tr.column("theta")[5]
    assert float(rows[5][9]) == tr.column("J")[5]


def test_reduced_csv_export(tmp_path):
    p = group_preset("IIa")
    tr = integrate_reduced(p, ReducedState(0.5, 0.0, 0.1, 3e-6), IntegratorConfig(t_end=0.01))
    tr.to_csv(tmp_path / "r.csv")
    header, rows = _read_csv(tmp_path / "r.csv")
    assert header == "t,theta,thetadot,phibardot,J,E_red".split(",")
    assert float(rows[-1][3]) == tr.column("phibardot")[-1]
