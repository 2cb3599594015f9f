"""Spectral radius of the simple random walk, estimated three ways.

For F2 the exact value is sqrt(3)/2.  Power iteration on a ball gives a
lower bound that climbs slowly with the radius.  The n-th root of the
return count c(n) converges even more slowly (polynomial prefactor), while
the ratio sqrt(c(n)/c(n-2)) removes most of that prefactor.

    python3 demos/03_spectral.py
"""
import math

from msf_lab import FreeGroup, build_ball, count_rooted_cycles, spectral_radius_power_iteration, standard_multiset
from msf_lab.spectral import cycle_ratio_estimate

S = standard_multiset(FreeGroup(2))
big = build_ball(S, 12)
print(f"exact: {math.sqrt(3) / 2:.6f}")
for R in (2, 4, 6, 8, 10, 12):
    est = spectral_radius_power_iteration(big.restrict(R) if R < 12 else big)
    print(f"power iteration R={R:2d}: {est.lambda_lower:.6f}")

for n in (10, 16, 20):
    c = count_rooted_cycles(big, n)
    print(f"n={n}: c(n)={c}, root {c ** (1 / n) / 4:.4f}, ratio {cycle_ratio_estimate(big, n):.4f}")
