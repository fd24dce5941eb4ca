"""
ASCII-art renders of fuse memory, and the reverse conversion.

Glyphs: ``#`` programmed / bright, ``.`` blank / dark, ``?`` unknown,
``T`` hard-wired test row, ``c`` calibration row, ``x`` dummy column.
Planes are laid out west to east separated by one space, with `` | ``
marking the address spine between plane 11 and plane 12.

Each plane is 36 characters wide (dummy, 16 data columns, dummy, for each
of the two tile columns) and 69 unit-cell rows tall, north to south::

    T               north tile outer test row
    pages 32..63    north tile, outer edge inward
    T               north tile inner test row
    T               south tile inner test row
    pages 31..0     south tile, centre outward
    c               calibration row (outside the address map)
    T               south tile outer test row

The ``physical`` view spends two text lines per unit-cell row, one per
bitcell of the shared-contact pair.  The ``pvc`` view shows one line per
unit-cell row holding the OR the FIB sees.
"""

from enum import Enum
from functools import lru_cache

import numpy as np

from . import geometry as geo
from .errors import ArtError, LayoutError, PlacementError
from .leak import ONE, UNKNOWN, PvcObservation, simulate_pvc
from .memory import ROW_COUNT, FuseMemory

__all__ = [
    "RenderView", "render", "render_logical", "render_physical",
    "render_pvc", "art_to_memory", "memory_from_cells", "demo_memory",
    "frame_size", "GLYPHS",
]

GLYPHS = {"one": "#", "zero": ".", "unknown": "?", "test": "T",
          "calibration": "c", "dummy": "x", "gap": " ", "spine": "|"}

PLANE_WIDTH = 36
_UNIT_ROWS = 69


class RenderView(str, Enum):
    LOGICAL_BITS = "logical"
    PHYSICAL_BITS = "physical"
    PHYSICAL_PVC = "pvc"


def _plane_x0(plane):
    return plane * (PLANE_WIDTH + 1) + (2 if plane >= 12 else 0)


FRAME_WIDTH = _plane_x0(23) + PLANE_WIDTH


def _unit_rows():
    """Per render unit-row: ``(kind, y)``; ``y`` is the grid row for data."""
    out = [("test", None)]
    out += [("data", y) for y in range(32)]
    out += [("test", None), ("test", None)]
    out += [("data", y) for y in range(32, 64)]
    out += [("calibration", None), ("test", None)]
    assert len(out) == _UNIT_ROWS
    return out


def _plane_columns():
    """Per character column of a plane: the grid column ``x`` or None (dummy)."""
    cols = []
    for tile in range(2):
        cols.append(None)
        cols.extend(range(tile * 16, tile * 16 + 16))
        cols.append(None)
    return cols


def frame_size(view):
    """``(lines, width)`` of the physical render frame for ``view``."""
    view = RenderView(view)
    if view is RenderView.PHYSICAL_BITS:
        return 2 * _UNIT_ROWS, FRAME_WIDTH
    if view is RenderView.PHYSICAL_PVC:
        return _UNIT_ROWS, FRAME_WIDTH
    return ROW_COUNT, 4 + 24


@lru_cache(maxsize=None)
def _frame(lines_per_unit):
    """Template glyphs plus the data-cell index for a physical frame.

    Returns ``(template, cells)`` where ``cells`` has columns
    ``line, col, plane, y, x, half`` (half 0 = A, 1 = B).
    """
    template = np.full((_UNIT_ROWS * lines_per_unit, FRAME_WIDTH), GLYPHS["gap"], dtype="<U1")
    template[:, _plane_x0(12) - 2] = GLYPHS["spine"]
    cells = []
    a_outer = geo.half_a_on_outer_edge()
    columns = _plane_columns()
    for u, (kind, y) in enumerate(_unit_rows()):
        for sub in range(lines_per_unit):
            line = u * lines_per_unit + sub
            half = 0
            if lines_per_unit == 2 and y is not None:
                # north tile's outer edge is at the top of the frame
                a_on_top = (y < 32) == a_outer
                half = 0 if (sub == 0) == a_on_top else 1
            for plane in range(24):
                x0 = _plane_x0(plane)
                for c, x in enumerate(columns):
                    if x is None:
                        template[line, x0 + c] = GLYPHS["dummy"]
                    elif kind != "data":
                        template[line, x0 + c] = GLYPHS[kind]
                    else:
                        template[line, x0 + c] = GLYPHS["zero"]
                        cells.append((line, x0 + c, plane, y, x, half))
    cells = np.array(cells, dtype=np.int64)
    template.setflags(write=False)
    cells.setflags(write=False)
    return template, cells


def _join(chars):
    return "".join("".join(line) + "\n" for line in chars)


def render_logical(mem):
    """One line per fuse row: ``RRR `` then bits 23 down to 0."""
    bits = mem.bits()[:, ::-1]
    glyphs = np.where(bits == 1, GLYPHS["one"], GLYPHS["zero"])
    return "".join(f"{row:03X} " + "".join(g) + "\n" for row, g in enumerate(glyphs))


def render_physical(mem):
    """Every bitcell in physical position, two lines per unit-cell row."""
    template, cells = _frame(2)
    chars = template.copy()
    line, col, plane, y, x, half = cells.T
    rows = geo.plane_cell_rows()[plane, y, x] | (32 * half)
    bits = np.array(geo.PLANE_BITS)[plane]
    values = (mem.words[rows] >> bits.astype(np.uint32)) & 1
    chars[line, col] = np.where(values == 1, GLYPHS["one"], GLYPHS["zero"])
    return _join(chars)


def render_pvc(source):
    """The contact states the FIB sees, from a memory or an observation."""
    obs = source if isinstance(source, PvcObservation) else simulate_pvc(source)
    template, cells = _frame(1)
    chars = template.copy()
    line, col, plane, y, x, _ = cells.T
    states = obs.planes[plane, y, x]
    chars[line, col] = np.where(states == ONE, GLYPHS["one"],
                                np.where(states == UNKNOWN, GLYPHS["unknown"], GLYPHS["zero"]))
    return _join(chars)


def render(mem, view=RenderView.PHYSICAL_BITS):
    view = RenderView(view)
    if view is RenderView.LOGICAL_BITS:
        return render_logical(mem)
    if view is RenderView.PHYSICAL_BITS:
        return render_physical(mem)
    return render_pvc(mem)


_ALPHABET = frozenset("#.Tcx |")


def art_to_memory(text):
    """Convert a ``physical`` view frame back into a fuse memory.

    Furniture cells (``T``, ``c``, ``x``) may be left as their glyph or
    written as ``.``.

    Raises
    ------
    LayoutError
        Wrong number of lines or line width, or a misplaced separator.
    ArtError
        A glyph outside ``# . T c x | space``.
    PlacementError
        ``#`` on a test, calibration or dummy cell.
    """
    template, cells = _frame(2)
    lines = [ln.rstrip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if len(lines) != template.shape[0]:
        raise LayoutError(f"art has {len(lines)} lines, frame needs {template.shape[0]}")
    chars = np.full(template.shape, " ", dtype="<U1")
    for i, ln in enumerate(lines):
        if len(ln) != FRAME_WIDTH:
            raise LayoutError(f"line {i + 1}: width {len(ln)}, frame needs {FRAME_WIDTH}")
        bad = set(ln) - _ALPHABET
        if bad:
            raise ArtError(f"line {i + 1}: glyph(s) {''.join(sorted(bad))!r} outside the art alphabet")
        chars[i] = list(ln)

    data = np.zeros(template.shape, dtype=bool)
    line, col, plane, y, x, half = cells.T
    data[line, col] = True
    furniture = ~data & np.isin(template, [GLYPHS["test"], GLYPHS["calibration"], GLYPHS["dummy"]])
    placed = furniture & (chars == GLYPHS["one"])
    if placed.any():
        i, j = map(int, np.argwhere(placed)[0])
        raise PlacementError(
            f"line {i + 1} column {j + 1}: '#' on a {template[i, j]!r} cell outside the address map")
    wrong = furniture & (chars != template) & (chars != GLYPHS["zero"])
    wrong |= ~data & ~furniture & (chars != template)
    wrong |= data & ~np.isin(chars, [GLYPHS["one"], GLYPHS["zero"]])
    if wrong.any():
        i, j = map(int, np.argwhere(wrong)[0])
        raise LayoutError(
            f"line {i + 1} column {j + 1}: {chars[i, j]!r} where the frame has {template[i, j]!r}")

    bits = np.zeros((ROW_COUNT, 24), dtype=np.uint8)
    rows = geo.plane_cell_rows()[plane, y, x] | (32 * half)
    set_ = chars[line, col] == GLYPHS["one"]
    bits[rows[set_], np.array(geo.PLANE_BITS)[plane[set_]]] = 1
    return FuseMemory.from_bits(bits)


def memory_from_cells(cells, half=geo.PairHalf.A):
    """Program one pair half from per-plane ``(24, 64, 32)`` cell art."""
    cells = np.asarray(cells).astype(bool)
    if cells.shape != (24, 64, 32):
        raise LayoutError(f"cell art must be (24, 64, 32), got {cells.shape}")
    offset = 32 if geo.PairHalf(half) is geo.PairHalf.B else 0
    rows = geo.plane_cell_rows() | offset
    bits = np.zeros((ROW_COUNT, 24), dtype=np.uint8)
    plane_idx = np.broadcast_to(np.arange(24)[:, None, None], cells.shape)
    bits[rows[cells], np.array(geo.PLANE_BITS)[plane_idx[cells]]] = 1
    return FuseMemory.from_bits(bits)


_DIGITS = {
    "0": ("###", "#.#", "#.#", "#.#", "###"),
    "1": (".#.", "##.", ".#.", ".#.", "###"),
    "2": ("###", "..#", "###", "#..", "###"),
    "3": ("###", "..#", ".##", "..#", "###"),
    "4": ("#.#", "#.#", "###", "..#", "..#"),
    "5": ("###", "#..", "###", "..#", "###"),
    "6": ("###", "#..", "###", "#.#", "###"),
    "7": ("###", "..#", ".#.", ".#.", ".#."),
    "8": ("###", "#.#", "###", "#.#", "###"),
    "9": ("###", "#.#", "###", "..#", "###"),
}

_CAT = (
    "#.......#",
    "##.....##",
    "#.#####.#",
    "#.......#",
    "#.#...#.#",
    "#.......#",
    "#...#...#",
    "#.#.#.#.#",
    ".#.#.#.#.",
    "..#####..",
)

_ARROW = (
    "....#...",
    "....##..",
    "#######.",
    "########",
    "#######.",
    "....##..",
    "....#...",
)


def _stamp(canvas, art, y0, x0):
    for dy, row in enumerate(art):
        for dx, ch in enumerate(row):
            if ch == "#":
                canvas[y0 + dy, x0 + dx] = True


def demo_memory():
    """Built-in pixel-art test pattern, programmed on pair half A only.

    Every plane carries its bit number, an arrow and a cat face, so every
    plane shows both contact states and no plane is mirror symmetric.  Pair
    half B stays blank, so the whole memory is recoverable from its PVC
    image under the upper-half-empty assumption.
    """
    cells = np.zeros((24, 64, 32), dtype=bool)
    for plane in range(24):
        label = f"{geo.PLANE_BITS[plane]:02d}"
        _stamp(cells[plane], _DIGITS[label[0]], 3, 3)
        _stamp(cells[plane], _DIGITS[label[1]], 3, 7)
        _stamp(cells[plane], _ARROW, 14, 12 + plane % 8)
        _stamp(cells[plane], _CAT, 40, 4 + plane % 16)
    return memory_from_cells(cells, geo.PairHalf.A)
