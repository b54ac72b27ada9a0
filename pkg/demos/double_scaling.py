"""The two-level "double scaling" effect, in one table.

An n-site cluster flip is modeled as a two-level system whose tunneling
amplitude shrinks exponentially with n.  Without noise, time-to-solution
grows with one slope on the log10 vs sqrt(n) axis.  Per-site dephasing
multiplies success by (1-q)^n, which *steepens* the slope: the same model,
two scaling laws, and the noisy one is the one a physical annealer shows.
"""

import math

from wscbench.twolevel import double_scaling_curve

points = double_scaling_curve(n_max=12, t_ann=500.0, dt=0.01, noise=(0.0, 0.1))
by_noise = {}
for p in points:
    by_noise.setdefault(p.q, []).append(p)

print(f"{'n':>3} {'sqrt(n)':>8} {'p_succ':>10} | {'log10 tts (q=0)':>16} {'log10 tts (q=0.1)':>18}")
clean = {p.n: p for p in by_noise[0.0]}
noisy = {p.n: p for p in by_noise[0.1]}
for n in sorted(clean):
    c, d = clean[n], noisy[n]
    print(f"{n:>3} {c.sqrt_n:>8.3f} {c.p_succ:>10.3e} | {math.log10(c.tts):>16.2f} {math.log10(d.tts):>18.2f}")

def slope(pts, i, j):
    return (math.log10(pts[j].tts) - math.log10(pts[i].tts)) / (pts[j].sqrt_n - pts[i].sqrt_n)

head_c, head_n = slope(by_noise[0.0], 0, 3), slope(by_noise[0.1], 0, 3)
tail_c, tail_n = slope(by_noise[0.0], -4, -1), slope(by_noise[0.1], -4, -1)
print(f"\nslope at small n: clean {head_c:.2f}, noisy {head_n:.2f} — noise adds scaling where the clean model is flat")
print(f"slope at large n: clean {tail_c:.2f}, noisy {tail_n:.2f} — and keeps steepening it once tunneling dominates")
