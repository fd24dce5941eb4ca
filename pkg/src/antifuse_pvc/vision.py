"""
Synthetic PVC micrographs of a bit plane, and bit extraction from them.

Images are 2-D ``uint8`` arrays (row-major, ``img[y, x]``), north up.  A
plane image shows a regular lattice of 64 x 32 bitline contacts: bright for
a contact whose pair holds a blown fuse, dark otherwise, on a mid-gray
field.

Extraction is ``flatten_background`` -> ``fit_grid`` (projection profiles
and peak spacing) -> ``classify`` (disc-sampled site means, two-class
variance-maximising threshold).
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .errors import GridNotFoundError, NoContrastError, SynthParamsError
from .leak import ONE, UNKNOWN, ZERO, PvcObservation

__all__ = [
    "SynthParams", "GridModel", "ClassifiedGrid", "ExtractOptions",
    "PlaneExtraction", "synth_plane_image", "fit_grid", "classify",
    "extract_plane", "extract_plane_full", "extract_observation",
    "flatten_background", "otsu_threshold", "site_means",
]

GRID_ROWS, GRID_COLS = 64, 32


@dataclass(frozen=True)
class SynthParams:
    """Rendering parameters for :func:`synth_plane_image`.

    ``charge_gradient`` is the amplitude of a linear ramp along the image
    diagonal: the north-west corner is offset by ``-charge_gradient`` and the
    south-east corner by ``+charge_gradient``.
    """

    bright_mean: float = 190.0
    dark_mean: float = 60.0
    background: float = 125.0
    noise_sigma: float = 6.0
    psf_sigma: float = 1.5
    charge_gradient: float = 0.0
    seed: int = 0
    pitch: float = 20.0
    blob_radius: float = 6.0
    margin: float = 20.0

    def __post_init__(self):
        if not self.bright_mean > self.dark_mean:
            raise SynthParamsError("bright_mean must exceed dark_mean")
        for name in ("bright_mean", "dark_mean", "background"):
            if not 0 <= getattr(self, name) <= 255:
                raise SynthParamsError(f"{name} must lie in 0..255")
        if self.noise_sigma < 0 or self.psf_sigma < 0:
            raise SynthParamsError("noise_sigma and psf_sigma must be non-negative")
        if self.pitch <= 2:
            raise SynthParamsError("pitch must exceed 2 px")
        if not 0 < self.blob_radius < self.pitch / 2:
            raise SynthParamsError("blob_radius must be positive and below pitch/2")
        if self.margin < self.blob_radius:
            raise SynthParamsError("margin must be at least blob_radius")

    @property
    def contrast(self):
        return self.bright_mean - self.dark_mean

    @classmethod
    def with_contrast(cls, contrast, **kw):
        """Params whose class means sit symmetrically about the background."""
        mid = kw.get("background", cls.background)
        return cls(bright_mean=mid + contrast / 2, dark_mean=mid - contrast / 2, **kw)


@dataclass(frozen=True)
class GridModel:
    origin_x: float
    origin_y: float
    pitch_x: float
    pitch_y: float
    rows: int
    cols: int

    def centers(self):
        """Site centres as ``(ys, xs)`` arrays of shape ``(rows, cols)``."""
        ys = self.origin_y + self.pitch_y * np.arange(self.rows)
        xs = self.origin_x + self.pitch_x * np.arange(self.cols)
        return np.meshgrid(ys, xs, indexing="ij")


@dataclass(frozen=True, eq=False)
class ClassifiedGrid:
    values: np.ndarray
    margins: np.ndarray
    site_means: np.ndarray
    threshold: float
    contrast: float

    @property
    def unknown_count(self):
        return int(np.count_nonzero(self.values == UNKNOWN))


@dataclass(frozen=True)
class ExtractOptions:
    """Knobs for :func:`extract_plane`.

    ``flip`` rotates the input by 180 degrees first (image taken south-up).
    ``uniform`` names the state to report when a plane shows no contrast
    (``"one"`` for a fully mitigated plane); ``None`` raises instead.
    """

    margin_floor: float = 10.0
    min_contrast: float = 30.0
    flip: bool = False
    flatten: bool = True
    uniform: str = None
    rows: int = GRID_ROWS
    cols: int = GRID_COLS


@dataclass(frozen=True, eq=False)
class PlaneExtraction:
    plane: int
    grid: GridModel
    classified: ClassifiedGrid

    @property
    def cells(self):
        return self.classified.values


def _lattice_shape(p, rows, cols):
    w = int(np.ceil(2 * p.margin + (cols - 1) * p.pitch)) + 1
    h = int(np.ceil(2 * p.margin + (rows - 1) * p.pitch)) + 1
    return h, w


def synth_plane_image(plane_obs, params=None):
    """Render a PVC image of one plane from its 64 x 32 contact grid.

    Unknown cells are drawn at background level.
    """
    p = params or SynthParams()
    grid = np.asarray(plane_obs)
    if grid.ndim != 2:
        raise SynthParamsError("plane observation must be 2-D")
    rows, cols = grid.shape
    h, w = _lattice_shape(p, rows, cols)

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    iy = np.clip(np.rint((yy - p.margin) / p.pitch), 0, rows - 1).astype(int)
    ix = np.clip(np.rint((xx - p.margin) / p.pitch), 0, cols - 1).astype(int)
    dy = yy - (p.margin + iy * p.pitch)
    dx = xx - (p.margin + ix * p.pitch)
    inside = dy * dy + dx * dx <= p.blob_radius ** 2

    levels = np.where(grid == ONE, p.bright_mean,
                      np.where(grid == ZERO, p.dark_mean, p.background))
    img = np.where(inside, levels[iy, ix], p.background)
    if p.psf_sigma > 0:
        img = ndimage.gaussian_filter(img, p.psf_sigma, mode="nearest")
    if p.charge_gradient:
        ramp = xx / max(w - 1, 1) + yy / max(h - 1, 1) - 1.0
        img = img + p.charge_gradient * ramp
    if p.noise_sigma > 0:
        rng = np.random.default_rng(p.seed)
        img = img + rng.normal(0.0, p.noise_sigma, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _robust_plane(img, iterations=4, k=2.5, step=2):
    """Least-squares plane fitted to background pixels.

    Pixels far from the current fit (contacts) are dropped each round.
    """
    h, w = img.shape
    ys, xs = np.mgrid[0:h:step, 0:w:step]
    z = img[::step, ::step].astype(np.float64).ravel()
    design = np.column_stack([np.ones(z.size), xs.ravel(), ys.ravel()])
    keep = np.ones(z.size, dtype=bool)
    coef = np.zeros(3)
    for _ in range(iterations):
        coef, *_ = np.linalg.lstsq(design[keep], z[keep], rcond=None)
        resid = z - design @ coef
        med = np.median(resid[keep])
        scale = max(1.4826 * np.median(np.abs(resid[keep] - med)), 1.0)
        keep = np.abs(resid - med) <= k * scale
        if keep.sum() < 3:
            break
    # Faint contacts survive the clipping and drag the offset towards the
    # majority contact state; the field is the most common level, so anchor
    # the offset on the histogram mode instead.
    resid = z - design @ coef
    lo, hi = np.floor(resid.min()), np.ceil(resid.max()) + 1
    hist, edges = np.histogram(resid, bins=np.arange(lo, hi + 1))
    smooth = ndimage.gaussian_filter1d(hist.astype(np.float64), max(scale / 2, 1.0))
    coef[0] += edges[np.argmax(smooth)] + 0.5
    yy, xx = np.mgrid[0:h, 0:w]
    return coef[0] + coef[1] * xx + coef[2] * yy


def flatten_background(img):
    """Remove a linear charging ramp, re-centring the background on 128."""
    img = np.asarray(img)
    flat = img.astype(np.float64) - _robust_plane(img) + 128.0
    return np.clip(np.rint(flat), 0, 255).astype(np.uint8)


def _profile_positions(profile, expected, noise_floor, axis_name):
    min_prominence = max(0.5, noise_floor)
    peaks, props = signal.find_peaks(profile, prominence=min_prominence, distance=2)
    if len(peaks) >= expected:
        # side lobes between contacts are far weaker than the lattice itself
        typical = np.median(np.sort(props["prominences"])[-expected:])
        strong = props["prominences"] >= 0.25 * typical
        peaks = peaks[strong]
        props = {"prominences": props["prominences"][strong]}
    if len(peaks) < expected:
        raise GridNotFoundError(
            f"{axis_name}: found {len(peaks)} lattice peaks, expected {expected}")
    if len(peaks) > expected:
        # keep the strongest run of consecutive peaks
        height = np.convolve(props["prominences"], np.ones(expected), mode="valid")
        start = int(np.argmax(height))
        peaks = peaks[start:start + expected]
    pos = peaks.astype(np.float64)
    inner = (peaks > 0) & (peaks < len(profile) - 1)
    l, c, r = (profile[peaks[inner] - 1], profile[peaks[inner]], profile[peaks[inner] + 1])
    denom = l - 2 * c + r
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(denom != 0, 0.5 * (l - r) / denom, 0.0)
    pos[inner] += np.clip(shift, -0.5, 0.5)
    if expected > 1:
        gaps = np.diff(pos)
        if gaps.mean() <= 2 or gaps.std() > 0.1 * gaps.mean():
            raise GridNotFoundError(
                f"{axis_name}: irregular peak spacing (mean {gaps.mean():.2f}, std {gaps.std():.2f})")
    return pos


def _fit_axis(pos):
    idx = np.arange(len(pos))
    if len(pos) == 1:
        return float(pos[0]), float("nan")
    pitch, origin = np.polyfit(idx, pos, 1)
    return float(origin), float(pitch)


def fit_grid(img, expected_rows=GRID_ROWS, expected_cols=GRID_COLS):
    """Locate the contact lattice from row and column projection profiles.

    Every contact, bright or dark, stands out from the field, so the mean
    absolute deviation from the background peaks once per lattice row and
    column.  Peak positions are refined to sub-pixel and fitted with a
    straight line per axis.

    Raises
    ------
    GridNotFoundError
        Too few peaks, irregular spacing, or a lattice leaving the image.
    """
    img = np.asarray(img)
    h, w = img.shape
    resid = img.astype(np.float64) - _robust_plane(img)
    dev = np.abs(ndimage.gaussian_filter(resid, 2.0))
    col_profile = dev.mean(axis=0)
    row_profile = dev.mean(axis=1)
    # peaks must rise well above what pixel noise alone can produce
    spread = dev.std()
    xs = _profile_positions(col_profile, expected_cols, 8 * spread / np.sqrt(h), "columns")
    ys = _profile_positions(row_profile, expected_rows, 8 * spread / np.sqrt(w), "rows")
    ox, px = _fit_axis(xs)
    oy, py = _fit_axis(ys)
    if expected_cols == 1:
        px = py
    if expected_rows == 1:
        py = px
    model = GridModel(ox, oy, px, py, expected_rows, expected_cols)
    if not (px > 2 and py > 2):
        raise GridNotFoundError(f"lattice pitch too small ({px:.2f}, {py:.2f})")
    cy, cx = model.centers()
    if cy.min() < 0 or cx.min() < 0 or cy.max() > h - 1 or cx.max() > w - 1:
        raise GridNotFoundError("fitted lattice extends beyond the image")
    return model


def site_means(img, grid, radius=None):
    """Mean intensity in a disc around every lattice site."""
    img = np.asarray(img, dtype=np.float64)
    if radius is None:
        radius = min(grid.pitch_x, grid.pitch_y) / 4
    r = max(radius, 1.0)
    ri = int(np.floor(r))
    oy, ox = np.mgrid[-ri:ri + 1, -ri:ri + 1]
    disc = oy * oy + ox * ox <= r * r
    oy, ox = oy[disc], ox[disc]
    cy, cx = grid.centers()
    py = np.clip(np.rint(cy)[..., None].astype(int) + oy, 0, img.shape[0] - 1)
    px = np.clip(np.rint(cx)[..., None].astype(int) + ox, 0, img.shape[1] - 1)
    return img[py, px].mean(axis=-1)


def otsu_threshold(values):
    """Split maximising between-class variance, evaluated exactly.

    Returns ``(threshold, dark_mean, bright_mean)``; the threshold is the
    midpoint between the two values straddling the best split.
    """
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    n = v.size
    if n < 2 or v[0] == v[-1]:
        m = float(v.mean()) if n else 0.0
        return m, m, m
    csum = np.cumsum(v)
    k = np.arange(1, n)
    w0 = k / n
    m0 = csum[:-1] / k
    m1 = (csum[-1] - csum[:-1]) / (n - k)
    between = w0 * (1 - w0) * (m1 - m0) ** 2
    # only split between distinct values
    between[v[1:] == v[:-1]] = -1
    best = int(np.argmax(between))
    return (v[best] + v[best + 1]) / 2, float(m0[best]), float(m1[best])


def classify(img, grid, margin_floor=10.0, min_contrast=30.0, uniform=None, radius=None):
    """Threshold lattice sites into zero / one / unknown.

    Raises
    ------
    NoContrastError
        The class means differ by less than ``min_contrast`` and no
        ``uniform`` fallback (``"one"`` or ``"zero"``) was given.
    """
    means = site_means(img, grid, radius)
    threshold, dark, bright = otsu_threshold(means)
    contrast = bright - dark
    if contrast < min_contrast:
        if uniform is None:
            raise NoContrastError(
                f"site contrast {contrast:.1f} below minimum {min_contrast}", contrast)
        state = {"one": ONE, "zero": ZERO}[uniform]
        values = np.full(means.shape, state, dtype=np.int8)
        return ClassifiedGrid(values, np.full(means.shape, np.inf), means,
                              float(threshold), float(contrast))
    margins = np.abs(means - threshold)
    values = np.where(means > threshold, ONE, ZERO).astype(np.int8)
    values[margins < margin_floor] = UNKNOWN
    return ClassifiedGrid(values, margins, means, float(threshold), float(contrast))


def extract_plane_full(img, plane, options=None):
    opts = options or ExtractOptions()
    if not 0 <= plane < 24:
        raise ValueError(f"plane {plane} out of range 0..23")
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("expected a single-channel image")
    if opts.flip:
        img = img[::-1, ::-1]
    if opts.flatten:
        img = flatten_background(img)
    grid = fit_grid(img, opts.rows, opts.cols)
    classified = classify(img, grid, opts.margin_floor, opts.min_contrast, opts.uniform)
    return PlaneExtraction(plane, grid, classified)


def extract_plane(img, plane, options=None):
    """Read a plane's 64 x 32 contact grid (``ZERO``/``ONE``/``UNKNOWN``)."""
    return extract_plane_full(img, plane, options).cells


def extract_observation(images, options=None, base=None):
    """Build an extracted :class:`PvcObservation` from ``{plane: image}``.

    Planes without an image stay unknown (or keep their state in ``base``).
    """
    obs = base if base is not None else PvcObservation.unknown()
    for plane, img in sorted(images.items()):
        obs = obs.with_plane(plane, extract_plane(img, plane, options))
    return PvcObservation(obs.planes, "extracted")
