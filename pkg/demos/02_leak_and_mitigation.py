"""
What the contacts give away, and how complement programming hides it.
"""

# %%
import math

import numpy as np

from antifuse_pvc.leak import (Assumptions, DataHalf, analyze, mitigate, or_view,
                               simulate_pvc, verify_mitigated)
from antifuse_pvc.memory import FuseMemory

rng = np.random.default_rng(1)

# %% a 128-bit key in page 5, words 0..7 (the lower half of the page)
key = rng.integers(0, 1 << 16, size=8)
mem = FuseMemory()
for i, k in enumerate(key):
    mem = mem.program(5 * 64 + i, int(k))
print("key words:", [f"{k:04X}" for k in key])

# %% the PVC image sees word | partner; with the partner blank that is the key
view = or_view(mem)
print("or view of page 5:", [f"{int(w):04X}" for w in view[5 * 64: 5 * 64 + 8]])

# %% analysis with no prior: each bright contact is one of three pair states
obs = simulate_pvc(mem)
report = analyze(obs)
ones = int(obs.planes.sum())
print("bright contacts:", ones, " residual entropy:", round(report.residual_entropy_bits, 2),
      " = ones x log2 3:", round(ones * math.log2(3), 2))

# %% knowing the upper half of the page is blank closes the gap
report = analyze(obs, Assumptions(upper_half_empty="all"))
print("complete:", report.complete, " key recovered:", report.recovered_memory() == mem)

# %% mitigation: burn the complement of each word into its partner
safe = mitigate(mem, DataHalf.A_IS_DATA, "strict")
print("verified:", verify_mitigated(safe, "strict"))
print("contacts bright:", int(simulate_pvc(safe).planes.sum()), "of", 24 * 2048)

# %% now the image is uniform and the analysis learns nothing
report = analyze(simulate_pvc(safe), Assumptions(exactly_one_per_pair=True))
print("determined bits:", report.determined_count,
      " residual entropy:", report.residual_entropy_bits, "bits, one per unit cell")
