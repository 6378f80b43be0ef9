"""Space-efficient qubit encodings of fermionic Fock states, with reversible query circuits."""

from .circuit import Builder, Circuit, depth, deserialize, gate_count, invert, lower, serialize, simulate
from .encodings import ENCODINGS, Encoding, JordanWigner, from_slots, make_encoding
from .fock import Capacity, FockBitstring, bit_flip_oracle, info_bound, majorana_oracle, sgn_rank_oracle
from .implicit import Implicit
from .ops import (MajoranaProduct, RotationSpec, capacity_for, compile_majorana, compile_product,
                  compile_rotation, compile_select, evaluate_rotation, hopping_rotations)
from .sorted_list import BufferedList, SortedList
from .succinct import Succinct
from .succinct_tree import SuccinctTree
from .verify import verify_queries

__all__ = [
    "BufferedList", "Builder", "Capacity", "Circuit", "ENCODINGS", "Encoding", "FockBitstring", "Implicit",
    "JordanWigner", "MajoranaProduct", "RotationSpec", "SortedList", "Succinct", "SuccinctTree",
    "bit_flip_oracle", "capacity_for", "compile_majorana", "compile_product", "compile_rotation",
    "compile_select", "depth", "deserialize", "evaluate_rotation", "from_slots", "gate_count",
    "hopping_rotations", "info_bound", "invert", "lower", "majorana_oracle", "make_encoding", "serialize",
    "sgn_rank_oracle", "simulate", "verify_queries",
]
