"""Cay(F2, S^[2]) as a tree of K4 blocks.

With S = {a, a^-1, b, b^-1}, the squared multiset has 16 slots.  The four
slots s t with s t = e are loops; the other twelve reach the twelve elements
of length two.  For every element h of odd length, the four vertices
a h, a^-1 h, b h, b^-1 h span a K4, and these blocks are glued in a tree
pattern: each even-length vertex lies in exactly four of them.

Every simple cycle stays inside one block, so the forest restricted to a
block is a uniform spanning tree of K4.  A vertex of K4 has expected
degree 2 * 3 / 4 = 3/2 in such a tree, giving a root degree of exactly 6.

    python3 demos/02_block_tree.py
"""
from msf_lab import FreeGroup, build_ball, estimate_delta_fmsf, power_multiset, standard_multiset
from msf_lab.fmsf import theorem1_bound
from msf_lab.spectral import lambda_exact

S = standard_multiset(FreeGroup(2))
S2 = power_multiset(S, 2)
print("slots:", S2.names)

ball = build_ball(S2, 3)
# only even-length words are reachable: the graph lives on an index-2 subgroup
print(f"ball radius 3: {ball.n_vertices} vertices, {ball.n_edges} edges")

lam = lambda_exact(S) ** 2
print(f"lambda(S^[2]) = {lam:.4f}, degree lower bound {theorem1_bound(lam):.4f}")
for est in estimate_delta_fmsf(ball, trials=2000, seed=9, radius_sweep=[1, 2, 3]):
    print(f"radius {est.radius}: {est.mean:.4f} +- {est.stderr:.4f}")
# radius 1 already decides every root edge, so the three means coincide
print("per-slot survival:", {k: round(v, 3) for k, v in est.slot_frequencies.items()})
