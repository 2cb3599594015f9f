"""Free minimal spanning forest degree on two graphs where the answer is known.

On the 4-regular tree Cay(F2, {a, b}) nothing is ever cut, so every trial
sees degree 4.  On the 6x6 torus the forest is a spanning tree, and any
spanning tree on 36 vertices has mean degree 2 - 2/36 = 70/36; by
transitivity that is also the expected degree of the root.

    python3 demos/01_tree_and_torus.py
"""
from msf_lab import FreeAbelian, FreeGroup, build_ball, build_quotient, estimate_delta_fmsf, standard_multiset

S = standard_multiset(FreeGroup(2))
ball = build_ball(S, 5)
for est in estimate_delta_fmsf(ball, trials=200, seed=1, radius_sweep=[1, 3, 5]):
    print(f"tree, radius {est.radius}: mean degree {est.mean} (stderr {est.stderr})")

torus = build_quotient(standard_multiset(FreeAbelian(2)), [6, 6])
est = estimate_delta_fmsf(torus, trials=5000, seed=2)[0]
print(f"torus 6x6: {est.mean:.4f} +- {est.stderr:.4f}, exact {70 / 36:.4f}")
