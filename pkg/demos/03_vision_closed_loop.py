"""
Synthetic micrographs, and reading bits back out of them.
"""

# %%
import dataclasses


from antifuse_pvc.errors import GridNotFoundError
from antifuse_pvc.render import demo_memory
from antifuse_pvc.leak import simulate_pvc
from antifuse_pvc.vision import (ExtractOptions, SynthParams, extract_plane,
                                 extract_plane_full, synth_plane_image)

obs = simulate_pvc(demo_memory())
plane = 4
truth = obs.planes[plane]

# %% a clean image at the default contrast
params = SynthParams()
img = synth_plane_image(truth, params)
print("image", img.shape, img.dtype, " nominal separation:", params.contrast)
result = extract_plane_full(img, plane)
print("grid pitch:", round(result.grid.pitch_y, 2), round(result.grid.pitch_x, 2), " threshold:", round(result.classified.threshold, 1),
      " measured separation:", round(result.classified.contrast, 1))
print("cells correct:", int((result.cells == truth).sum()), "/ 2048")

# %% a charging ramp; flattening removes it before thresholding
ramped = dataclasses.replace(params, charge_gradient=60, seed=1)
img = synth_plane_image(truth, ramped)
for flatten in (True, False):
    try:
        cells = extract_plane(img, plane, ExtractOptions(flatten=flatten))
        print("flatten", flatten, "errors:", int((cells != truth).sum()))
    except GridNotFoundError as exc:
        print("flatten", flatten, "failed:", type(exc).__name__)

# %% faint contrast and rising noise
faint = SynthParams.with_contrast(24)
opts = ExtractOptions(margin_floor=2, min_contrast=6)
for noise in (5, 15, 25, 40):
    img = synth_plane_image(truth, dataclasses.replace(faint, noise_sigma=noise, seed=noise))
    try:
        cells = extract_plane(img, plane, opts)
    except GridNotFoundError as exc:
        # at this contrast the lattice itself drowns before the bits do
        print(f"noise {noise:2d}: no grid ({exc})")
        continue
    print(f"noise {noise:2d}: errors {int((cells != truth).sum()):4d}, unknown {int((cells == -1).sum())}")

# %% the cells as art, north up
print("\n".join("".join("#" if v == 1 else "." for v in row) for row in result.cells[:16]))
