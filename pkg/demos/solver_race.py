"""Race all six solvers on one mid-sized network.

Generates a 9-pair ladder network (144 sites), hands the same instance to
every solver at a moderate budget, and prints what each found, whether it
matched the exact construction energy, and what it cost in site updates.
Single-spin annealing needs far more work than the cluster methods here,
and that gap is the whole point of the benchmark.
"""

import time

from wscbench.instance import generate_network, ladder_layout
from wscbench.mcmc import derive_rng
from wscbench.solvers import run_solver

BUDGETS = {
    "sa": {"n_beta": 100, "sweeps_per_beta": 300},
    "pa": {"population": 1000, "n_temps": 30},
    "pt-icm": {"sweeps": 100},
    "rmc-icm": {"sweeps": 1000},
    "hcm": {"steps": 2000},
    "ss": {"sweeps": 100},
}

inst = generate_network(ladder_layout(9), 25, derive_rng(42))
print(f"9-pair ladder network: {inst.n} sites, exact ground energy {inst.reference_energy_scaled}")
print(f"{'solver':<8} {'best':>8} {'hit':>4} {'work':>12} {'wall':>9}")

for solver, params in BUDGETS.items():
    t0 = time.perf_counter()
    out = run_solver(solver, inst, derive_rng(43, hash(solver) % 1000), **params)
    wall = time.perf_counter() - t0
    hit = "yes" if out.success else "NO"
    print(f"{solver:<8} {out.best_energy_scaled:>8} {hit:>4} {out.work_site_updates:>12,} {wall * 1e3:>7.0f}ms")

print("\nwork = site updates (Metropolis proposals + cluster sites); wall time is hardware-dependent.")
