"""Common interface for fermion encodings, the Jordan-Wigner baseline and a registry."""

from __future__ import annotations

from .circuit import BasisPhaseState, Builder, Circuit, state_from_registers, read_registers
from .fock import CapacityError, FockBitstring
from .gadgets import Temp, le, eq, phase_flip, xor_into


class IntegrityError(ValueError):
    """Register contents do not describe any valid encoded state."""


class Encoding:
    """A qubit layout for M modes plus builders for the two queries.

    Subclasses declare their data registers in `declare`, map bitstrings to
    register values in `encode`/`decode`, and emit gates in
    `emit_sgn_rank`/`emit_bit_flip`.  The position argument `p` of the emit
    methods is the 0-based mode index, either an int or an LSB-first literal
    list (for index-register circuits).
    """

    name = "abstract"
    register_positions = True
    """Whether the emit methods accept a literal-list position."""

    def __init__(self, M: int):
        if M < 1:
            raise ValueError("need at least one mode")
        self.M = M

    # -- layout ------------------------------------------------------------
    def declare(self, b: Builder) -> None:
        raise NotImplementedError

    def new_builder(self) -> Builder:
        b = Builder()
        self.declare(b)
        return b

    @property
    def weights(self) -> range:
        """Hamming weights this layout can hold."""
        raise NotImplementedError

    def accepts(self, b: FockBitstring) -> bool:
        return b.modes == self.M and b.weight in self.weights

    @property
    def data_registers(self) -> list[tuple[str, int]]:
        b = self.new_builder()
        return [(n, len(q)) for n, q in b.regs.items()]

    @property
    def qubits(self) -> int:
        return sum(w for _, w in self.data_registers)

    def encode(self, b: FockBitstring) -> dict[str, int]:
        raise NotImplementedError

    def decode(self, values: dict[str, int]) -> FockBitstring:
        raise NotImplementedError

    def _check(self, b: FockBitstring) -> None:
        if b.modes != self.M:
            raise ValueError(f"expected {self.M} modes, got {b.modes}")
        if b.weight not in self.weights:
            raise CapacityError(f"weight {b.weight} outside {self.weights.start}..{self.weights.stop - 1}")

    def basis_state(self, c: Circuit, b: FockBitstring) -> BasisPhaseState:
        return state_from_registers(c, self.encode(b))

    def read_state(self, c: Circuit, s: BasisPhaseState) -> FockBitstring:
        vals = read_registers(c, s)
        return self.decode({n: vals[n] for n, _ in self.data_registers})

    # -- queries -----------------------------------------------------------
    def emit_sgn_rank(self, b: Builder, p) -> None:
        raise NotImplementedError

    def emit_bit_flip(self, b: Builder, p) -> None:
        raise NotImplementedError

    def _mode_index(self, j: int) -> int:
        if not 1 <= j <= self.M:
            raise IndexError(f"mode {j} outside 1..{self.M}")
        return j - 1

    def sgn_rank(self, j: int) -> Circuit:
        """R_j: phase (-1)^(b_1 + ... + b_j)."""
        return _cached(self, "sgn-rank", j)

    def bit_flip(self, j: int) -> Circuit:
        """F_j: flip occupation j."""
        return _cached(self, "bit-flip", j)

    def build(self, op: str, j: int) -> Circuit:
        p = self._mode_index(j)
        b = self.new_builder()
        if op == "sgn-rank":
            self.emit_sgn_rank(b, p)
        elif op == "bit-flip":
            self.emit_bit_flip(b, p)
        else:
            raise ValueError(f"unknown query {op!r}")
        return b.build()

    def describe(self) -> dict:
        return {"encoding": self.name, "M": self.M, "qubits": self.qubits,
                "weights": [self.weights.start, self.weights.stop - 1]}

    def _key(self) -> tuple:
        return (type(self).__name__, self.M)

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self._key()[1:]}"


_CACHE: dict = {}


def _cached(enc: Encoding, op: str, j: int) -> Circuit:
    key = (enc._key(), op, j)
    c = _CACHE.get(key)
    if c is None:
        c = enc.build(op, j)
        if len(_CACHE) > 4096:
            _CACHE.clear()
        _CACHE[key] = c
    return c


class JordanWigner(Encoding):
    """One qubit per mode; the reference layout."""

    name = "jordan-wigner"

    @property
    def weights(self) -> range:
        return range(0, self.M + 1)

    def declare(self, b: Builder) -> None:
        b.register("modes", self.M)

    def encode(self, b: FockBitstring) -> dict[str, int]:
        self._check(b)
        return {"modes": sum(v << i for i, v in enumerate(b.bits))}

    def decode(self, values: dict[str, int]) -> FockBitstring:
        v = values["modes"]
        return FockBitstring(tuple((v >> i) & 1 for i in range(self.M)))

    def emit_sgn_rank(self, b: Builder, p) -> None:
        qs = b.regs["modes"]
        with b.payload():
            if isinstance(p, int):
                for q in qs[: p + 1]:
                    b.z(q)
                return
        for i, q in enumerate(qs):
            t = Temp(b, b.lane_pool(f"jw{i}"))
            f = le(b, t, i, p)
            t.done()
            with b.payload():
                phase_flip(b, [f, (q, True)])
            t.undo()

    def emit_bit_flip(self, b: Builder, p) -> None:
        qs = b.regs["modes"]
        if isinstance(p, int):
            with b.payload():
                b.x(qs[p])
            return
        for i, q in enumerate(qs):
            t = Temp(b, b.lane_pool(f"jw{i}"))
            f = eq(b, t, i, p)
            t.done()
            with b.payload():
                xor_into(b, q, f)
            t.undo()


ENCODINGS = ("sorted", "buffered", "succinct", "succinct-tree", "implicit", "jordan-wigner")


def slots_for(name: str, F: int, k: int = 0) -> int:
    """Pointer slots a layout needs so every weight in F-k..F+k fits."""
    if name == "sorted":
        return F + k
    if name in ("buffered", "succinct", "succinct-tree"):
        return F + k + 1
    return F


def make_encoding(name: str, M: int, F: int, k: int = 0) -> Encoding:
    """Encoding `name` able to hold every weight in F-k..F+k (clamped to 0..M).

    For the pointer encodings F is turned into a slot count by `slots_for`;
    use the classes directly to pick the slot count yourself.
    """
    if name == "jordan-wigner":
        return JordanWigner(M)
    if name == "implicit":
        from .implicit import Implicit

        return Implicit(M, F, k)
    # more slots than the layout can ever fill buy nothing
    slots = min(slots_for(name, F, k), M if name == "sorted" else M + 1)
    if name == "sorted":
        from .sorted_list import SortedList

        return SortedList(M, slots)
    if name == "buffered":
        from .sorted_list import BufferedList

        return BufferedList(M, slots)
    if name == "succinct":
        from .succinct import Succinct

        return Succinct(M, slots)
    if name == "succinct-tree":
        from .succinct_tree import SuccinctTree

        return SuccinctTree(M, slots)
    raise ValueError(f"unknown encoding {name!r}; choose from {', '.join(ENCODINGS)}")


def from_slots(name: str, M: int, F: int, k: int = 0) -> Encoding:
    """Encoding `name` whose own size parameter is F (slot count for pointer layouts)."""
    if name == "jordan-wigner":
        return JordanWigner(M)
    if name == "implicit":
        from .implicit import Implicit

        return Implicit(M, F, k)
    mod = {"sorted": ("sorted_list", "SortedList"), "buffered": ("sorted_list", "BufferedList"),
           "succinct": ("succinct", "Succinct"), "succinct-tree": ("succinct_tree", "SuccinctTree")}
    if name not in mod:
        raise ValueError(f"unknown encoding {name!r}; choose from {', '.join(ENCODINGS)}")
    import importlib

    m, cls = mod[name]
    return getattr(importlib.import_module(f".{m}", __package__), cls)(M, F)
