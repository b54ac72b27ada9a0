"""Anatomy of one weak-strong pair: the trap that makes these networks hard.

Two K4,4 cells, ferromagnetically glued, with a strong field (-1 per site) on
one cell and a weak field (+lambda per site) on the other.  The global
ground state aligns *both* cells against the weak field; the local trap
aligns the weak cell with its own field and costs only a little.  Every
single-spin path out of the trap goes uphill, which is exactly why
single-spin solvers stall and cluster moves matter.
"""

import numpy as np

from wscbench.instance import all_down_state, brute_force_ground_state, generate_network, ladder_layout
from wscbench.mcmc import derive_rng

inst = generate_network(ladder_layout(1), 25, derive_rng(0))
gs_energy, gs_state = brute_force_ground_state(inst)

trap = all_down_state(inst.n)
trap[:8] = 1  # flip the weak cell as one block
trap_energy = inst.energy(trap)

print(f"sites: {inst.n}, integer scale: {inst.scale}")
print(f"ground state : {gs_energy:6d}  ({gs_energy / inst.scale:+.2f} in physical units, all spins down)")
print(f"weak-cell trap: {trap_energy:6d}  ({trap_energy / inst.scale:+.2f}), excess {trap_energy - gs_energy}")

# climb out of the trap one spin at a time: every first step is uphill
costs = []
for i in range(inst.n):
    s = trap.copy()
    s[i] = -s[i]
    costs.append(inst.energy(s) - trap_energy)
print(f"single-flip exits from the trap cost {min(costs)}..{max(costs)} (all positive: a genuine local minimum)")

# the barrier vanishes if the whole 8-spin cell moves together
cell_flip = trap.copy()
cell_flip[:8] = -cell_flip[:8]
print(f"flipping the weak cell as one cluster lands back on the ground state: {inst.energy(cell_flip) == gs_energy}")
