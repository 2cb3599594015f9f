"""Conjugate-edge graphs on Cay(F2, S^[2]) after a relative cut along a = "a*a".

For each n, the edges (a^i b a^-i g, g), 1 <= i <= n, are kept when the
b-edge they are built from survived.  Each kept edge is spanned by the
relative forest through the a-lines, so the graph is a forest of width at
most 2n, and the root degree should match 2n times the survival frequency
of a single b-edge.  In this block tree that frequency is exactly 5/8.

    python3 demos/05_conjugate_edges.py
"""
from msf_lab import ExperimentConfig, run_experiment

cfg = ExperimentConfig.load("configs/tau_free.ini")
cfg.trials = 300
rec = run_experiment(cfg)
for row in rec.rows:
    r = dict(zip(rec.columns, row))
    print(f"n={r['n']}: width {r['width_emp']}, root degree {r['deg_emp']:.3f}, "
          f"2n * tau {2 * r['n'] * r['tau_X_hat']:.3f}, acyclic {r['all_acyclic']}")
print(f"exact 2n * 5/8 at n=1..4: {[2 * n * 5 / 8 for n in (1, 2, 3, 4)]}")
