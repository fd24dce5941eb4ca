"""
Fuse memory values, the text dump format, and address-map test patterns.

Dump format (UTF-8 text)::

    # optional comment lines
    000: 000001
    FFF: FFFFFF

One ``row: value`` pair per line, row as 3 hex digits and the raw 24-bit
word as 6 hex digits.  The parser also accepts lowercase digits and ``0x``
prefixes; rows that are not listed are unprogrammed (zero).
"""

import re
from enum import Enum

import numpy as np

from . import geometry as geo
from .errors import (AddressRangeError, DumpFormatError, DumpRangeError,
                     DuplicateRowError, PatternError)

__all__ = [
    "ROW_COUNT", "WORD_MASK", "FuseMemory", "PatternKind", "parse_dump",
    "serialize_dump", "read_dump", "write_dump", "gen_pattern", "set_bit",
]

ROW_COUNT = 4096
WORD_MASK = 0xFFFFFF

_LINE_RE = re.compile(
    r"^\s*(?:0[xX])?([0-9A-Fa-f]+)\s*:\s*(?:0[xX])?([0-9A-Fa-f]+)\s*$")


class FuseMemory:
    """4096 raw 24-bit fuse words.

    Instances are values: the word array is read-only and every programming
    operation returns a new memory.  No operation clears a bit.
    """

    __slots__ = ("_words",)

    def __init__(self, words=None):
        if words is None:
            arr = np.zeros(ROW_COUNT, dtype=np.uint32)
        else:
            raw = np.asarray(words)
            if raw.shape != (ROW_COUNT,):
                raise AddressRangeError(
                    f"fuse memory needs {ROW_COUNT} words, got shape {raw.shape}")
            if raw.size and (raw.min() < 0 or raw.max() > WORD_MASK):
                raise AddressRangeError("fuse word exceeds 24 bits")
            arr = raw.astype(np.uint32)
        arr.setflags(write=False)
        self._words = arr

    @classmethod
    def zeros(cls):
        return cls()

    @property
    def words(self):
        return self._words

    def __getitem__(self, row):
        return int(self._words[row])

    def __len__(self):
        return ROW_COUNT

    def __eq__(self, other):
        if not isinstance(other, FuseMemory):
            return NotImplemented
        return np.array_equal(self._words, other._words)

    def __hash__(self):
        return hash(self._words.tobytes())

    def __repr__(self):
        return f"FuseMemory(programmed_rows={np.count_nonzero(self._words)}, popcount={self.popcount()})"

    def bit(self, row, bit):
        geo.BitAddress(row, bit)
        return (int(self._words[row]) >> bit) & 1

    def bits(self):
        """Bit matrix of shape ``(4096, 24)``; column ``b`` is bit ``b``."""
        return ((self._words[:, None] >> np.arange(24, dtype=np.uint32)) & 1).astype(np.uint8)

    @classmethod
    def from_bits(cls, bits):
        bits = np.asarray(bits)
        if bits.shape != (ROW_COUNT, 24):
            raise AddressRangeError(f"bit matrix must be (4096, 24), got {bits.shape}")
        weights = (1 << np.arange(24, dtype=np.uint64))
        return cls((bits.astype(np.uint64) @ weights).astype(np.uint32))

    def popcount(self):
        return int(np.unpackbits(self._words.view(np.uint8)).sum())

    def program(self, row, value):
        """Return a copy with ``value`` ORed into word ``row``."""
        geo.BitAddress(row, 0)
        if not 0 <= value <= WORD_MASK:
            raise AddressRangeError(f"value {value:#x} exceeds 24 bits")
        words = self._words.copy()
        words[row] |= np.uint32(value)
        return FuseMemory(words)

    def program_words(self, values):
        """Return a copy with every word ORed with ``values`` (4096 words)."""
        other = FuseMemory(values)
        return FuseMemory(self._words | other._words)

    def is_subset_of(self, other):
        """True when every bit set here is also set in ``other``."""
        return not np.any(self._words & ~other._words)


def set_bit(mem, addr):
    """Return ``mem`` with one fuse bit programmed.  Idempotent."""
    if not isinstance(addr, geo.BitAddress):
        addr = geo.BitAddress(*addr)
    return mem.program(addr.row, 1 << addr.bit)


def parse_dump(text, path=None):
    words = np.zeros(ROW_COUNT, dtype=np.uint32)
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE_RE.match(stripped)
        if m is None:
            raise DumpFormatError(f"malformed dump line {line!r}", lineno, path)
        row, value = int(m.group(1), 16), int(m.group(2), 16)
        if row >= ROW_COUNT:
            raise DumpRangeError(f"row {row:#x} out of range (max 0xFFF)", lineno, path)
        if value > WORD_MASK:
            raise DumpRangeError(f"value {value:#x} exceeds 24 bits", lineno, path)
        if row in seen:
            raise DuplicateRowError(f"row {row:03X} listed twice", lineno, path)
        seen.add(row)
        words[row] = value
    return FuseMemory(words)


def serialize_dump(mem, omit_zero=True):
    lines = []
    for row, value in enumerate(mem.words.tolist()):
        if omit_zero and not value:
            continue
        lines.append(f"{row:03X}: {value:06X}\n")
    return "".join(lines)


def read_dump(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dump(fh.read(), path=str(path))


def write_dump(path, mem, omit_zero=True):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_dump(mem, omit_zero))


class PatternKind(str, Enum):
    ALT_10 = "alt_10"
    ALT_1100 = "alt_1100"
    ALT_11110000 = "alt_11110000"
    PLANE_ID = "plane_id"
    ASYMMETRIC_MARKER = "asymmetric_marker"
    CUSTOM = "custom"


_PERIODS = {
    PatternKind.ALT_10: 2,
    PatternKind.ALT_1100: 4,
    PatternKind.ALT_11110000: 8,
}

# "F"-shaped glyph, 7 rows x 5 columns; no mirror symmetry in either axis.
_MARKER = (
    "#####",
    "#....",
    "#....",
    "####.",
    "#....",
    "#....",
    "#....",
)


def _periodic(period, phase):
    stream = (np.arange(ROW_COUNT * 24) + phase) % period < period // 2
    return FuseMemory.from_bits(stream.reshape(ROW_COUNT, 24))


def _plane_id(page):
    if not 0 <= page < 64:
        raise PatternError(f"page {page} out of range 0..63")
    bits = np.zeros((ROW_COUNT, 24), dtype=np.uint8)
    for bit in range(24):
        # six-bit value: bit index plus an always-set marker in bit 5
        value = bit | 0x20
        for k in range(6):
            if (value >> k) & 1:
                bits[page * 64 + k, bit] = 1
    return FuseMemory.from_bits(bits)


def _asymmetric_marker(y0, x0):
    if not (0 <= y0 <= 64 - len(_MARKER) and 0 <= x0 <= 32 - len(_MARKER[0])):
        raise PatternError("marker does not fit in the plane grid")
    rows = geo.plane_cell_rows()
    bits = np.zeros((ROW_COUNT, 24), dtype=np.uint8)
    for plane in range(24):
        bit = geo.PLANE_BITS[plane]
        for dy, line in enumerate(_MARKER):
            for dx, ch in enumerate(line):
                if ch == "#":
                    bits[rows[plane, y0 + dy, x0 + dx], bit] = 1
    return FuseMemory.from_bits(bits)


def _custom(words=None, bits=None):
    if words is None and bits is None:
        raise PatternError("custom pattern needs 'words' or 'bits'")
    mem = FuseMemory()
    if words is not None:
        if isinstance(words, dict):
            for row, value in words.items():
                mem = mem.program(row, value)
        else:
            mem = mem.program_words(words)
    for addr in bits or ():
        mem = set_bit(mem, addr)
    return mem


def gen_pattern(kind, **params):
    """Deterministic test pattern for address-map reverse engineering.

    Parameters
    ----------
    kind : PatternKind or str
    phase : int, optional
        Offset into the periodic bit stream (``alt_*`` kinds).  The stream
        runs over ``(row, bit)`` in ascending order, i.e. bit index
        ``row * 24 + bit``.
    page : int, optional
        Page used by ``plane_id`` (default 1).  Word ``page*64 + k`` carries
        bit ``k`` of ``bit | 0x20`` in every plane.
    y, x : int, optional
        Grid corner of the ``asymmetric_marker`` glyph (default 2, 2).
    words, bits : optional
        ``custom`` contents: a 4096-word sequence or ``{row: value}`` dict,
        and/or an iterable of ``(row, bit)`` addresses.
    """
    try:
        kind = PatternKind(kind)
    except ValueError:
        raise PatternError(f"unknown pattern kind {kind!r}") from None

    def take(allowed, defaults):
        unknown = set(params) - set(allowed)
        if unknown:
            raise PatternError(f"{kind.value}: unexpected parameters {sorted(unknown)}")
        out = dict(defaults)
        out.update(params)
        return out

    if kind in _PERIODS:
        p = take(["phase"], {"phase": 0})
        if not isinstance(p["phase"], int) or p["phase"] < 0:
            raise PatternError("phase must be a non-negative integer")
        return _periodic(_PERIODS[kind], p["phase"])
    if kind is PatternKind.PLANE_ID:
        return _plane_id(take(["page"], {"page": 1})["page"])
    if kind is PatternKind.ASYMMETRIC_MARKER:
        p = take(["y", "x"], {"y": 2, "x": 2})
        return _asymmetric_marker(p["y"], p["x"])
    return _custom(**take(["words", "bits"], {}))
