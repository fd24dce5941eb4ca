import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from antifuse_pvc import geometry as geo
from antifuse_pvc.errors import AddressRangeError
from antifuse_pvc.geometry import (GEOMETRY, BitAddress, CellLocation, PairHalf,
                                   TileRow)

rows = st.integers(0, 4095)
bits = st.integers(0, 23)


def test_constants():
    g = GEOMETRY
    assert g.active_cols_per_tile == 16
    assert g.active_rows_per_tile == 32
    assert g.unit_cells_per_tile == 512
    assert g.unit_cells_per_plane == 2048
    assert g.bits_per_plane == 4096
    assert g.total_bits == 98304


@pytest.mark.parametrize("bit,expected", [(16, (0, False)), (0, (8, False)), (15, (23, True)),
                                          (23, (7, False)), (3, (11, False)), (4, (12, True))])
def test_plane_of_bit(bit, expected):
    assert geo.plane_of_bit(bit) == expected


@pytest.mark.parametrize("plane,bit", [(0, 16), (11, 3), (7, 23), (12, 4), (23, 15)])
def test_bit_of_plane(plane, bit):
    assert geo.bit_of_plane(plane) == bit


def test_plane_order_west_to_east():
    assert [geo.bit_of_plane(p) for p in range(24)] == \
        list(range(16, 24)) + list(range(0, 4)) + list(range(4, 16))
    for b in range(24):
        assert geo.bit_of_plane(geo.plane_of_bit(b)[0]) == b
    mirrored = {b for b in range(24) if geo.plane_of_bit(b)[1]}
    assert mirrored == set(range(4, 16))


@pytest.mark.parametrize("bad", [-1, 24, 100])
def test_bit_range(bad):
    with pytest.raises(AddressRangeError):
        geo.plane_of_bit(bad)
    with pytest.raises(AddressRangeError):
        geo.bit_of_plane(bad)


@pytest.mark.parametrize("row,expected", [
    (0, (0, 0, PairHalf.A, 0)),
    (4095, (63, 63, PairHalf.B, 31)),
    (100, (1, 36, PairHalf.B, 4)),
])
def test_decompose_row(row, expected):
    d = geo.decompose_row(row)
    assert (d.page, d.word_in_page, d.pair_half, d.unit_col_logical) == expected
    assert d.row == row


@given(rows)
def test_decompose_pairs(row):
    d, p = geo.decompose_row(row), geo.decompose_row(row ^ 32)
    assert d.pair_half != p.pair_half
    assert d.unit_col_logical == p.unit_col_logical
    assert d.page == p.page


@pytest.mark.parametrize("row,partner", [(0, 32), (32, 0), (4095, 4063)])
def test_pair_partner(row, partner):
    assert geo.pair_partner(row) == partner


@given(rows)
def test_pair_partner_involution(row):
    assert geo.pair_partner(geo.pair_partner(row)) == row
    assert geo.pair_partner(row) // 64 == row // 64


def test_row_range():
    with pytest.raises(AddressRangeError):
        geo.decompose_row(4096)
    with pytest.raises(AddressRangeError):
        geo.pair_partner(-1)
    with pytest.raises(AddressRangeError):
        BitAddress(4096, 0)


def test_column_examples():
    assert geo.column_to_physical(0, False) == 31
    assert geo.column_to_physical(4, False) == 24
    for c in range(32):
        assert geo.column_to_physical(c, True) == 31 - geo.column_to_physical(c, False)
    with pytest.raises(AddressRangeError):
        geo.column_to_physical(32, False)


def test_column_group_rules():
    # checked against the ordering rules directly rather than the table
    for group in range(8):
        positions = [geo.column_to_physical(4 * group + k, False) for k in range(4)]
        assert sorted(positions) == list(range(28 - 4 * group, 32 - 4 * group))
        steps = np.diff(positions)
        if group % 2 == 0:
            assert (steps == -1).all()  # east to west
        else:
            assert (steps == 1).all()   # west to east
    # broadly right to left: group centres move west with group number
    centres = [np.mean([geo.column_to_physical(4 * g + k, False) for k in range(4)]) for g in range(8)]
    assert all(a > b for a, b in zip(centres, centres[1:]))


@pytest.mark.parametrize("mirrored", [False, True])
def test_column_inverse(mirrored):
    for c in range(32):
        assert geo.column_to_logical(geo.column_to_physical(c, mirrored), mirrored) == c


def test_logical_to_physical_examples():
    loc = geo.logical_to_physical(BitAddress(0, 16))
    assert (loc.plane, loc.tile_row, loc.unit_row, loc.pair_half) == (0, TileRow.SOUTH, 0, PairHalf.A)
    loc = geo.logical_to_physical(BitAddress(2048, 16))
    assert (loc.plane, loc.tile_row, loc.unit_row, loc.pair_half) == (0, TileRow.NORTH, 0, PairHalf.A)
    # page 31 is just south of the centreline, page 63 just north of it
    assert geo.logical_to_physical((31 * 64, 0)).unit_row == 31
    assert geo.logical_to_physical((63 * 64, 0)).unit_row == 31
    for loc_ex in (geo.logical_to_physical((0, 16)), geo.logical_to_physical((2048, 16))):
        assert geo.physical_to_logical(loc_ex) in (BitAddress(0, 16), BitAddress(2048, 16))


def test_grid_position_north_up():
    assert geo.grid_position(geo.logical_to_physical((32 * 64, 0)))[0] == 0   # far north page 32
    assert geo.grid_position(geo.logical_to_physical((0, 0)))[0] == 63        # page 0, south edge
    assert geo.grid_position(geo.logical_to_physical((31 * 64, 0)))[0] == 32
    assert geo.grid_position(geo.logical_to_physical((63 * 64, 0)))[0] == 31


def test_east_planes_hold_data_bits_4_to_15():
    for unit_row, col in itertools.product(range(32), range(32)):
        addr = geo.physical_to_logical(CellLocation(23, TileRow.SOUTH, col, unit_row, PairHalf.A))
        assert 4 <= addr.bit <= 15


def _all_locations():
    for plane, tile, col, urow, half in itertools.product(
            range(24), TileRow, range(32), range(32), PairHalf):
        yield CellLocation(plane, tile, col, urow, half)


def test_bijection_exhaustive():
    seen = set()
    for row in range(4096):
        for bit in range(24):
            a = BitAddress(row, bit)
            loc = geo.logical_to_physical(a)
            assert geo.physical_to_logical(loc) == a
            seen.add(loc)
    assert len(seen) == 98304
    assert seen == set(_all_locations())


@given(rows, bits)
def test_pair_sharing(row, bit):
    a = geo.logical_to_physical((row, bit))
    b = geo.logical_to_physical((row ^ 32, bit))
    assert (a.plane, a.tile_row, a.phys_col, a.unit_row) == (b.plane, b.tile_row, b.phys_col, b.unit_row)
    assert a.pair_half != b.pair_half


@given(rows, st.integers(0, 3))
def test_mirror_relation(row, k):
    # west-half data bit k and east-half data bit 4+k in the same row
    west = geo.logical_to_physical((row, k))
    east = geo.logical_to_physical((row, 4 + k))
    assert east.phys_col == 31 - west.phys_col


@given(st.integers(0, 63), bits)
def test_page_shares_unit_row(page, bit):
    locs = {(geo.logical_to_physical((page * 64 + w, bit)).tile_row,
             geo.logical_to_physical((page * 64 + w, bit)).unit_row) for w in range(64)}
    assert len(locs) == 1


def test_plane_cell_rows_matches_scalar_map():
    table = geo.plane_cell_rows()
    for plane in range(24):
        for y in range(64):
            for x in range(32):
                addr = geo.physical_to_logical(geo.location_at(plane, y, x))
                assert table[plane, y, x] == addr.row
                assert addr.bit == geo.bit_of_plane(plane)
    assert not table.flags.writeable


def test_location_range():
    with pytest.raises(AddressRangeError):
        CellLocation(24, TileRow.SOUTH, 0, 0, PairHalf.A)
    with pytest.raises(AddressRangeError):
        CellLocation(0, TileRow.SOUTH, 32, 0, PairHalf.A)
    with pytest.raises(ValueError):
        CellLocation(0, "east", 0, 0, PairHalf.A)
