"""Desk-scale toolkit for antifuse PVC data extraction on the RP2350 fuse array."""

from .geometry import (GEOMETRY, BitAddress, CellLocation, PairHalf, TileRow,
                       bit_of_plane, logical_to_physical, pair_partner,
                       physical_to_logical, plane_of_bit)
from .leak import (Assumptions, PvcObservation, RecoveryReport, analyze,
                   mitigate, or_view, simulate_pvc, verify_mitigated)
from .memory import (FuseMemory, PatternKind, gen_pattern, parse_dump,
                     serialize_dump, set_bit)

__version__ = "0.1.0"

__all__ = [
    "GEOMETRY", "BitAddress", "CellLocation", "PairHalf", "TileRow",
    "bit_of_plane", "logical_to_physical", "pair_partner", "physical_to_logical",
    "plane_of_bit", "Assumptions", "PvcObservation", "RecoveryReport", "analyze",
    "mitigate", "or_view", "simulate_pvc", "verify_mitigated", "FuseMemory",
    "PatternKind", "gen_pattern", "parse_dump", "serialize_dump", "set_bit",
]
