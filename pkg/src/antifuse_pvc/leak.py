"""
What the FIB sees, and what an attacker can conclude from it.

Under ion-beam passive voltage contrast a bitline contact shows up bright
whenever either bitcell sharing it is blown, so every unit cell leaks the OR
of bit N in word M and word ``M ^ 32``.  This module simulates that leak,
analyses the information it gives away under explicit assumptions, and
implements complement programming, which makes every contact read as one.
"""

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import geometry as geo
from .errors import (InconsistentObservationError, MitigationConflictError,
                     ObservationFormatError)
from .memory import ROW_COUNT, WORD_MASK, FuseMemory

__all__ = [
    "ZERO", "ONE", "UNKNOWN", "KNOWN0", "KNOWN1", "AMBIGUOUS",
    "PvcObservation", "Assumptions", "RecoveryReport", "DataHalf",
    "MitigationMode", "simulate_pvc", "or_view", "observation_or_view",
    "mitigate", "verify_mitigated", "analyze", "parse_page_set",
]

# cell states in an observation grid
ZERO, ONE, UNKNOWN = 0, 1, -1
# per-bit recovery status
KNOWN0, KNOWN1, AMBIGUOUS = 0, 1, -1

_GLYPHS = {ZERO: "0", ONE: "1", UNKNOWN: "?"}
_FROM_GLYPH = {"0": ZERO, "1": ONE, "?": UNKNOWN}
_PARTNER = np.arange(ROW_COUNT) ^ 32


class DataHalf(str, Enum):
    A_IS_DATA = "A_is_data"
    B_IS_DATA = "B_is_data"


class MitigationMode(str, Enum):
    STRICT = "strict"
    LAX = "lax"


@dataclass(frozen=True, eq=False)
class PvcObservation:
    """Per-plane 64 x 32 grids of contact states, indexed ``[plane, y, x]``.

    ``y = 0`` is the north edge of the plane and ``x = 0`` its west edge.
    States are ``ZERO``, ``ONE`` or ``UNKNOWN``.
    """

    planes: np.ndarray
    provenance: str = "simulated"

    def __post_init__(self):
        arr = np.asarray(self.planes, dtype=np.int8)
        if arr.shape != (24, 64, 32):
            raise ObservationFormatError(f"observation must be (24, 64, 32), got {arr.shape}")
        if not np.isin(arr, (ZERO, ONE, UNKNOWN)).all():
            raise ObservationFormatError("observation cells must be 0, 1 or -1")
        if self.provenance not in ("simulated", "extracted"):
            raise ObservationFormatError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "simulated" and (arr == UNKNOWN).any():
            raise ObservationFormatError("simulated observations cannot contain unknown cells")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "planes", arr)

    def __eq__(self, other):
        if not isinstance(other, PvcObservation):
            return NotImplemented
        return self.provenance == other.provenance and np.array_equal(self.planes, other.planes)

    @classmethod
    def unknown(cls):
        return cls(np.full((24, 64, 32), UNKNOWN, dtype=np.int8), "extracted")

    def with_plane(self, plane, grid, provenance="extracted"):
        planes = self.planes.copy()
        planes[plane] = np.asarray(grid, dtype=np.int8)
        return PvcObservation(planes, provenance)

    def to_json(self):
        doc = {
            "provenance": self.provenance,
            "planes": [
                {"plane": p,
                 "grid": ["".join(_GLYPHS[int(v)] for v in row) for row in self.planes[p]]}
                for p in range(24)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ObservationFormatError(f"invalid JSON: {exc}") from None
        if not isinstance(doc, dict) or "planes" not in doc:
            raise ObservationFormatError("missing 'planes'")
        planes = np.full((24, 64, 32), UNKNOWN, dtype=np.int8)
        seen = set()
        entries = doc["planes"]
        if not isinstance(entries, list) or len(entries) != 24:
            raise ObservationFormatError("'planes' must list 24 planes")
        for entry in entries:
            try:
                p = entry["plane"]
                grid = entry["grid"]
            except (TypeError, KeyError):
                raise ObservationFormatError("plane entries need 'plane' and 'grid'") from None
            if not isinstance(p, int) or not 0 <= p < 24 or p in seen:
                raise ObservationFormatError(f"bad or duplicate plane index {p!r}")
            seen.add(p)
            if len(grid) != 64 or any(len(line) != 32 for line in grid):
                raise ObservationFormatError(f"plane {p}: grid must be 64 strings of 32 chars")
            for y, line in enumerate(grid):
                try:
                    planes[p, y] = [_FROM_GLYPH[ch] for ch in line]
                except KeyError:
                    raise ObservationFormatError(f"plane {p} row {y}: glyph outside '01?'") from None
        return cls(planes, doc.get("provenance", "extracted"))


def simulate_pvc(mem):
    """Contact states a perfect PVC readout of ``mem`` would show."""
    rows = geo.plane_cell_rows()
    words = mem.words
    ored = words[rows] | words[rows | 32]
    shifts = np.array(geo.PLANE_BITS, dtype=np.uint32)[:, None, None]
    return PvcObservation(((ored >> shifts) & 1).astype(np.int8), "simulated")


def or_view(mem):
    """Each word replaced by the OR of itself and its pair partner."""
    words = mem.words
    return words | words[_PARTNER]


def observation_or_view(obs):
    """Map an observation back onto logical rows.

    Returns ``(values, unknown)``: 4096-word arrays of the OR value and of
    the bits whose contact state is unknown.  Both words of a pair receive
    the same value.
    """
    rows = geo.plane_cell_rows()
    values = np.zeros(ROW_COUNT, dtype=np.uint32)
    unknown = np.zeros(ROW_COUNT, dtype=np.uint32)
    for plane in range(24):
        weight = np.uint32(1 << geo.PLANE_BITS[plane])
        grid = obs.planes[plane]
        a_rows = rows[plane]
        values[a_rows[grid == ONE]] |= weight
        unknown[a_rows[grid == UNKNOWN]] |= weight
    values |= values[_PARTNER]
    unknown |= unknown[_PARTNER]
    return values, unknown


def _halves(data_half):
    data_half = DataHalf(data_half)
    idx = np.arange(ROW_COUNT)
    lower = idx[(idx & 32) == 0]
    if data_half is DataHalf.A_IS_DATA:
        return lower, lower | 32
    return lower | 32, lower


def mitigate(mem, data_half=DataHalf.A_IS_DATA, mode=MitigationMode.STRICT):
    """Complement-program every pair so its contact reads as one.

    Each bit that is zero in a data word gets set in the partner word.  In
    strict mode the partner words must be blank and no pair may already have
    both bits set, so the result has exactly one bit set per pair; lax mode
    ORs the complement in regardless and guarantees at least one.
    """
    mode = MitigationMode(mode)
    data_rows, comp_rows = _halves(data_half)
    words = mem.words
    data, comp = words[data_rows], words[comp_rows]
    if mode is MitigationMode.STRICT:
        both = data & comp
        if both.any():
            i = int(np.flatnonzero(both)[0])
            bit = int(both[i]).bit_length() - 1
            raise MitigationConflictError(
                f"rows {data_rows[i]:03X} and {comp_rows[i]:03X} both have bit {bit} set",
                row=int(data_rows[i]), partner=int(comp_rows[i]), bit=bit)
        if comp.any():
            i = int(np.flatnonzero(comp)[0])
            bit = int(comp[i]).bit_length() - 1
            raise MitigationConflictError(
                f"complement row {comp_rows[i]:03X} already holds data (bit {bit}) "
                f"paired with row {data_rows[i]:03X}",
                row=int(data_rows[i]), partner=int(comp_rows[i]), bit=bit)
    out = words.copy()
    out[comp_rows] = comp | (~data & np.uint32(WORD_MASK))
    return FuseMemory(out)


def verify_mitigated(mem, mode=MitigationMode.STRICT):
    mode = MitigationMode(mode)
    words = mem.words
    partner = words[_PARTNER]
    combined = (words ^ partner) if mode is MitigationMode.STRICT else (words | partner)
    return bool(np.all(combined == WORD_MASK))


def parse_page_set(selection):
    """Parse ``"all"``, ``"0-3,7"`` or an iterable of ints into a frozenset."""
    if selection is None:
        return frozenset()
    if isinstance(selection, str):
        selection = selection.strip()
        if selection.lower() == "all":
            return frozenset(range(64))
        pages = set()
        for part in filter(None, (p.strip() for p in selection.split(","))):
            lo, sep, hi = part.partition("-")
            lo = int(lo, 0)
            hi = int(hi, 0) if sep else lo
            pages.update(range(lo, hi + 1))
    else:
        pages = set(int(p) for p in selection)
    if any(not 0 <= p < 64 for p in pages):
        raise ValueError("page numbers must be in 0..63")
    return frozenset(pages)


@dataclass(frozen=True)
class Assumptions:
    """Prior knowledge about how the memory was programmed.

    ``upper_half_empty`` lists pages whose words 32..63 are known to be
    blank.  ``exactly_one_per_pair`` asserts complement programming.
    """

    upper_half_empty: frozenset = field(default_factory=frozenset)
    exactly_one_per_pair: bool = False

    def __post_init__(self):
        object.__setattr__(self, "upper_half_empty", parse_page_set(self.upper_half_empty))


# Pair states as (lower, upper) bits: lower = half A (word M), upper = M ^ 32.
_STATES = np.array([(0, 0), (1, 0), (0, 1), (1, 1)], dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    """Per-bit knowledge after analysis.

    ``status[row, bit]`` is ``KNOWN0``, ``KNOWN1`` or ``AMBIGUOUS``;
    ``pair_states[row, bit]`` (half-A rows only are meaningful) counts the
    pair states consistent with the evidence.
    """

    status: np.ndarray
    pair_states: np.ndarray
    residual_entropy_bits: float

    @property
    def determined_count(self):
        return int(np.count_nonzero(self.status != AMBIGUOUS))

    @property
    def ambiguous_count(self):
        return int(np.count_nonzero(self.status == AMBIGUOUS))

    @property
    def complete(self):
        return self.ambiguous_count == 0

    def recovered_memory(self):
        """Memory holding every bit known to be one; ambiguous bits read 0."""
        return FuseMemory.from_bits((self.status == KNOWN1).astype(np.uint8))

    def page_summaries(self):
        out = []
        for page in range(64):
            sl = slice(page * 64, page * 64 + 64)
            status = self.status[sl]
            counts = self.pair_states[page * 64: page * 64 + 32]
            out.append({
                "page": page,
                "determined": int(np.count_nonzero(status != AMBIGUOUS)),
                "ambiguous": int(np.count_nonzero(status == AMBIGUOUS)),
                "known1": int(np.count_nonzero(status == KNOWN1)),
                "entropy_bits": float(np.log2(counts).sum()),
            })
        return out

    def to_dict(self):
        return {
            "determined_count": self.determined_count,
            "ambiguous_count": self.ambiguous_count,
            "residual_entropy_bits": self.residual_entropy_bits,
            "complete": self.complete,
            "pages": self.page_summaries(),
        }


def analyze(obs, assumptions=None):
    """Work out which fuse bits an observation pins down.

    For each unit cell the four pair states are filtered by the observed
    OR (unknown cells keep all four) and by the assumptions.  A bit is known
    when all surviving states agree on it.  Entropy sums ``log2`` of the
    number of surviving states, treating pairs as independent.

    Raises
    ------
    InconsistentObservationError
        If no pair state survives for some cell.
    """
    if assumptions is None:
        assumptions = Assumptions()
    rows = geo.plane_cell_rows()

    ored = _STATES[:, 0] | _STATES[:, 1]
    status = np.empty((ROW_COUNT, 24), dtype=np.int8)
    pair_states = np.ones((ROW_COUNT, 24), dtype=np.int64)
    entropy = 0.0

    for plane in range(24):
        bit = geo.PLANE_BITS[plane]
        grid = obs.planes[plane].ravel()
        lower_rows = rows[plane].ravel()
        # allowed[cell, state]
        allowed = np.ones((grid.size, 4), dtype=bool)
        allowed &= (grid[:, None] == UNKNOWN) | (ored[None, :] == grid[:, None])
        if assumptions.upper_half_empty:
            pages = lower_rows // 64
            empty = np.isin(pages, list(assumptions.upper_half_empty))
            allowed[empty] &= _STATES[:, 1] == 0
        if assumptions.exactly_one_per_pair:
            allowed &= (_STATES[:, 0] ^ _STATES[:, 1])[None, :] == 1

        counts = allowed.sum(axis=1)
        if (counts == 0).any():
            cell = int(np.flatnonzero(counts == 0)[0])
            y, x = divmod(cell, 32)
            row = int(lower_rows[cell])
            raise InconsistentObservationError(
                f"plane {plane} (bit {bit}) cell y={y} x={x}, rows {row:03X}/{row | 32:03X}: "
                f"observed {_GLYPHS[int(grid[cell])]!r} contradicts the assumptions")

        for half, half_rows in ((0, lower_rows), (1, lower_rows | 32)):
            can0 = (allowed & (_STATES[:, half] == 0)[None, :]).any(axis=1)
            can1 = (allowed & (_STATES[:, half] == 1)[None, :]).any(axis=1)
            st = np.where(can0 & can1, AMBIGUOUS, np.where(can1, KNOWN1, KNOWN0))
            status[half_rows, bit] = st
        pair_states[lower_rows, bit] = counts
        pair_states[lower_rows | 32, bit] = counts
        entropy += float(np.log2(counts).sum())

    status.setflags(write=False)
    pair_states.setflags(write=False)
    return RecoveryReport(status, pair_states, entropy)
