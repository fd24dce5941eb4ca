"""
Logical <-> physical address map of the RP2350 antifuse array.

The array holds 4096 words of 24 bits.  Each bit position lives in its own
bit plane; planes sit side by side west to east, 12 on each side of the
address spine.  A plane is 2x2 tiles of 16 active unit-cell columns by 32
active unit-cell rows, and every unit cell holds two bitcells that share a
single metal-1 bitline contact: bit N of word M and bit N of word M ^ 32.

Coordinates used throughout the package:

* ``BitAddress(row, bit)`` -- logical fuse word and bit.
* ``CellLocation`` -- plane, tile row, physical unit column (west to east
  across the whole plane), unit row counted from the tile's outer edge, and
  the pair half.
* grid position ``(y, x)`` -- the unit cell inside a plane's 64 x 32
  observation grid, ``y = 0`` at the north edge, ``x = 0`` at the west edge.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import AddressRangeError

__all__ = [
    "ArrayGeometry", "GEOMETRY", "TileRow", "PairHalf", "BitAddress",
    "RowDecomposition", "CellLocation", "PLANE_BITS", "COLUMN_TABLE",
    "plane_of_bit", "bit_of_plane", "decompose_row", "pair_partner",
    "column_to_physical", "column_to_logical", "logical_to_physical",
    "physical_to_logical", "grid_position", "location_at",
    "plane_cell_rows", "half_a_on_outer_edge",
]


@dataclass(frozen=True)
class ArrayGeometry:
    plane_count: int = 24
    tile_cols_per_plane: int = 2
    tile_rows_per_plane: int = 2
    raw_cols_per_tile: int = 18
    raw_rows_per_tile: int = 34
    dummy_cols_per_tile: int = 2
    test_rows_per_tile: int = 2
    bits_per_unit_cell: int = 2
    row_count: int = 4096
    word_bits: int = 24
    page_words: int = 64

    @property
    def active_cols_per_tile(self):
        return self.raw_cols_per_tile - self.dummy_cols_per_tile

    @property
    def active_rows_per_tile(self):
        return self.raw_rows_per_tile - self.test_rows_per_tile

    @property
    def unit_cells_per_tile(self):
        return self.active_cols_per_tile * self.active_rows_per_tile

    @property
    def unit_cells_per_plane(self):
        return self.tile_cols_per_plane * self.tile_rows_per_plane * self.unit_cells_per_tile

    @property
    def bits_per_plane(self):
        return self.unit_cells_per_plane * self.bits_per_unit_cell

    @property
    def grid_rows(self):
        """Unit-cell rows per plane (both tiles)."""
        return self.tile_rows_per_plane * self.active_rows_per_tile

    @property
    def grid_cols(self):
        """Unit-cell columns per plane (both tile columns)."""
        return self.tile_cols_per_plane * self.active_cols_per_tile

    @property
    def page_count(self):
        return self.row_count // self.page_words

    @property
    def total_bits(self):
        return self.row_count * self.word_bits


GEOMETRY = ArrayGeometry()

_G = GEOMETRY
assert _G.active_cols_per_tile == 16
assert _G.active_rows_per_tile == 32
assert _G.unit_cells_per_tile == 512
assert _G.unit_cells_per_plane == 2048
assert _G.bits_per_plane == 4096 == _G.row_count
assert _G.plane_count == _G.word_bits
assert _G.grid_rows == _G.page_count == 64
assert _G.grid_cols * _G.bits_per_unit_cell == _G.page_words


class TileRow(str, Enum):
    SOUTH = "south"
    NORTH = "north"


class PairHalf(str, Enum):
    A = "A"  # words 0..31 of a page
    B = "B"  # words 32..63 of a page


# West to east: ECC bits 16..23, data bits 0..3, [address spine], data bits 4..15.
PLANE_BITS = tuple(range(16, 24)) + tuple(range(0, 4)) + tuple(range(4, 16))
_PLANE_OF_BIT = {b: p for p, b in enumerate(PLANE_BITS)}
_EAST_PLANES = frozenset(range(12, 24))


def _build_column_table():
    # 8 groups of 4 logical columns, placed east to west in increasing group
    # number.  Even groups count east to west, odd groups west to east.
    table = []
    for col in range(32):
        group, k = divmod(col, 4)
        east = 31 - 4 * group
        west = east - 3
        table.append(east - k if group % 2 == 0 else west + k)
    return tuple(table)


COLUMN_TABLE = _build_column_table()
_COLUMN_INVERSE = tuple(COLUMN_TABLE.index(p) for p in range(32))
assert sorted(COLUMN_TABLE) == list(range(32))


def half_a_on_outer_edge():
    """Whether half A is the bitcell nearer the tile's outer (row 0) edge.

    Not derivable from the published map; isolated here so a silicon
    observation can flip it in one place.  Only rendering depends on it.
    """
    return True


@dataclass(frozen=True, order=True)
class BitAddress:
    row: int
    bit: int

    def __post_init__(self):
        _check_row(self.row)
        _check_bit(self.bit)


@dataclass(frozen=True)
class RowDecomposition:
    page: int
    word_in_page: int
    pair_half: PairHalf
    unit_col_logical: int

    @property
    def row(self):
        return self.page * 64 + self.word_in_page


@dataclass(frozen=True)
class CellLocation:
    plane: int
    tile_row: TileRow
    phys_col: int
    unit_row: int
    pair_half: PairHalf

    def __post_init__(self):
        _check_range("plane", self.plane, 24)
        _check_range("phys_col", self.phys_col, 32)
        _check_range("unit_row", self.unit_row, 32)
        object.__setattr__(self, "tile_row", TileRow(self.tile_row))
        object.__setattr__(self, "pair_half", PairHalf(self.pair_half))

    @property
    def tile_col(self):
        return self.phys_col // 16


def _check_range(name, value, limit):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise AddressRangeError(f"{name} must be an integer, got {value!r}")
    if not 0 <= value < limit:
        raise AddressRangeError(f"{name} {value} out of range 0..{limit - 1}")


def _check_row(row):
    _check_range("row", row, 4096)


def _check_bit(bit):
    _check_range("bit", bit, 24)


def plane_of_bit(bit):
    """Return ``(plane, mirrored)`` for a bit position.

    >>> plane_of_bit(16)
    (0, False)
    >>> plane_of_bit(15)
    (23, True)
    """
    _check_bit(bit)
    plane = _PLANE_OF_BIT[int(bit)]
    return plane, plane in _EAST_PLANES


def bit_of_plane(plane):
    _check_range("plane", plane, 24)
    return PLANE_BITS[plane]


def plane_is_mirrored(plane):
    _check_range("plane", plane, 24)
    return plane in _EAST_PLANES


def decompose_row(row):
    _check_row(row)
    page, word = divmod(int(row), 64)
    half = PairHalf.A if word < 32 else PairHalf.B
    return RowDecomposition(page, word, half, word % 32)


def pair_partner(row):
    """The word sharing bitline contacts with ``row`` (``row ^ 32``)."""
    _check_row(row)
    return int(row) ^ 32


def column_to_physical(unit_col_logical, mirrored):
    _check_range("unit_col_logical", unit_col_logical, 32)
    phys = COLUMN_TABLE[unit_col_logical]
    return 31 - phys if mirrored else phys


def column_to_logical(phys_col, mirrored):
    """Inverse of :func:`column_to_physical`."""
    _check_range("phys_col", phys_col, 32)
    if mirrored:
        phys_col = 31 - phys_col
    return _COLUMN_INVERSE[phys_col]


def logical_to_physical(addr):
    """Map a :class:`BitAddress` (or ``(row, bit)`` tuple) to its bitcell."""
    if not isinstance(addr, BitAddress):
        addr = BitAddress(*addr)
    plane, mirrored = plane_of_bit(addr.bit)
    dec = decompose_row(addr.row)
    if dec.page < 32:
        tile, unit_row = TileRow.SOUTH, dec.page
    else:
        tile, unit_row = TileRow.NORTH, dec.page - 32
    return CellLocation(
        plane=plane,
        tile_row=tile,
        phys_col=column_to_physical(dec.unit_col_logical, mirrored),
        unit_row=unit_row,
        pair_half=dec.pair_half,
    )


def physical_to_logical(loc):
    bit = bit_of_plane(loc.plane)
    col = column_to_logical(loc.phys_col, plane_is_mirrored(loc.plane))
    page = loc.unit_row if loc.tile_row is TileRow.SOUTH else loc.unit_row + 32
    word = col + (32 if loc.pair_half is PairHalf.B else 0)
    return BitAddress(page * 64 + word, bit)


def grid_position(loc):
    """``(y, x)`` of a cell in its plane's north-up observation grid."""
    if loc.tile_row is TileRow.NORTH:
        y = loc.unit_row
    else:
        y = 63 - loc.unit_row
    return y, loc.phys_col


def location_at(plane, y, x, half=PairHalf.A):
    """Inverse of :func:`grid_position` for a chosen pair half."""
    _check_range("y", y, 64)
    _check_range("x", x, 32)
    if y < 32:
        tile, unit_row = TileRow.NORTH, y
    else:
        tile, unit_row = TileRow.SOUTH, 63 - y
    return CellLocation(plane, tile, x, unit_row, PairHalf(half))


@lru_cache(maxsize=None)
def plane_cell_rows():
    """Half-A fuse row of every unit cell, indexed ``[plane, y, x]``.

    The half-B row is the returned value ``| 32``.  The bit stored in plane
    ``p`` is ``PLANE_BITS[p]``.  The array is read-only and cached.
    """
    rows = np.empty((24, 64, 32), dtype=np.int64)
    for plane in range(24):
        mirrored = plane in _EAST_PLANES
        for x in range(32):
            col = column_to_logical(x, mirrored)
            for y in range(64):
                page = 63 - y if y >= 32 else y + 32
                rows[plane, y, x] = page * 64 + col
    rows.setflags(write=False)
    return rows
