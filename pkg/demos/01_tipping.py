"""Spin a Group IIa top fast enough to invert, then too slowly to invert.

Run: python3 demos/01_tipping.py
"""
import math

from tippetop import IntegratorConfig, demo_preset, integrate_full, monitor_report, state_from_spin
from tippetop.stability import threshold_n1, threshold_n2

p = demo_preset()
n1, n2 = threshold_n1(p), threshold_n2(p)
n_tip = max(n1, n2 * (p.R + p.eps) / (p.R - p.eps))
print(f"upright threshold n1 = {n1:.1f} rad/s, tipping needs |n0| > {n_tip:.1f} rad/s")

cfg = IntegratorConfig(t_end=30.0, pole_guard=1e-3)
for n0 in (150.0, 30.0):
    # start with the slow steady precession matching the initial tilt
    tr = integrate_full(p, state_from_spin(p, 0.1, n0, precession="slow"), cfg)
    th = tr.column("theta")
    summary = monitor_report(tr)
    print(f"n0={n0:5.1f}: {tr.termination.value} at t={tr.times[-1]:.2f} s, "
          f"theta {th[0]:.3f} -> {th[-1]:.4f} (max {th.max():.3f}), "
          f"final spin {tr.final[9] + tr.final[8] * math.cos(th[-1]):.2f} rad/s, "
          f"Jellet drift {summary.max_rel_dJ:.1e}")
