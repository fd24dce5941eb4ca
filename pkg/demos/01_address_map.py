"""
Where does a fuse bit live on the die?

Walk one fuse word through the address map, then look at a whole plane.
Run with ``python demos/01_address_map.py``.
"""

# %%
import numpy as np

from antifuse_pvc import geometry as geo
from antifuse_pvc.memory import gen_pattern
from antifuse_pvc.render import render_physical

# %% the array in numbers
g = geo.GEOMETRY
print("active columns per tile:", g.active_cols_per_tile)
print("unit cells per plane:   ", g.unit_cells_per_plane)
print("bits per plane:         ", g.bits_per_plane)
print("planes west to east:    ", geo.PLANE_BITS)

# %% one word, bit 5, and its pair partner
row = 0x105
for r in (row, geo.pair_partner(row)):
    loc = geo.logical_to_physical((r, 5))
    print(f"row {r:03X} bit 5 ->", loc.tile_row.value, "tile, col", loc.phys_col,
          "unit row", loc.unit_row, "half", loc.pair_half.value,
          "grid", geo.grid_position(loc))

# %% the partner sits in the same unit cell; only the half differs,
# which is why the contact shows the OR of the two

# %% mirrored planes east of the spine
for plane in (0, 11, 12, 23):
    print("plane", plane, "bit", geo.bit_of_plane(plane), "mirrored", geo.plane_is_mirrored(plane))

# %% plane_id labels every plane with its own bit number in page 1,
# one unit row in from the south edge, so look at the bottom of the frame
art = render_physical(gen_pattern("plane_id"))
lines = art.splitlines()
print(len(lines), "lines x", len(lines[0]), "chars")
print("\n".join(ln[:150] for ln in lines[-8:]))

# %% a cross check: every grid cell of every plane owns a distinct half-A row
rows = geo.plane_cell_rows()
print("distinct (plane, row) pairs:", len({(p, r) for p in range(24) for r in np.unique(rows[p])}))
