"""Classify the six reference tops and summarise their bifurcation diagrams.

Run: python3 demos/02_classification.py
"""
from tippetop import all_presets, classify, diagram

for group, p in all_presets().items():
    rep = classify(p)
    d = diagram(p, n_steps=200)
    print(f"{group:>3}: A/C={p.inertia_ratio:.2f} eps/R={p.eccentricity_ratio:.2f} -> {rep.group}")
    print(f"     n1={rep.n1}  n2={rep.n2}  theta_c={rep.theta_c}  theta_b={rep.theta_b}")
    for s in d.series:
        stable = [r[2] for r in s.rows]
        print(f"     {s.kind:<14} {len(s.rows):4d} samples, "
              f"stable fraction {sum(stable) / len(stable):.2f}, transitions {s.transitions()}")
