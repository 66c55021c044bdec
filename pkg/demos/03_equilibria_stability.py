"""Steady states on one Jellet level and their linear stability.

Run: python3 demos/03_equilibria_stability.py
"""
import math

import numpy as np

from tippetop import demo_preset, eigenvalues, solve_intermediate, vertical_states
from tippetop.stability import linearization, stability_flag

p = demo_preset()
for n0 in (30.0, 60.0, 100.0):
    J = p.C * n0 * (p.R - p.eps)
    print(f"n0 = {n0} rad/s  (J = {J:.3e})")
    for s in [*vertical_states(p, J), *solve_intermediate(p, J)]:
        c = linearization(p, s)
        lam = eigenvalues(p, s)
        lead = max(lam.real[np.abs(lam) > 1e-12], default=0.0)
        print(f"  {s.kind.value:<14} theta={math.degrees(s.theta0):7.2f} deg  spin={s.spin_n:8.2f}  "
              f"delta={c.delta:+.3e}  stable={stability_flag(p, s)}  leading Re(lambda)={lead:+.3e}")
