"""Gate-level circuit IR, builder, lowering, metrics and a basis-state simulator.

Every circuit in this package maps computational basis states to basis
states times a power of i, so the simulator only tracks bits plus a phase
mod 4.  H and RZ exist for rotation circuits; `simulate_sparse` handles
them with an amplitude dictionary.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

TOFFOLI_COST = 15
"""1- and 2-qubit gates charged per Toffoli in `gate_count` totals."""

KINDS = ("X", "Z", "S", "SWAP", "MCX", "CZ", "H", "RZ", "MACRO")


class CircuitError(ValueError):
    pass


class SynthesisError(CircuitError):
    pass


class StateError(CircuitError):
    pass


class ParseError(CircuitError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


Control = tuple[int, bool]


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    params: tuple = ()
    payload: bool = False

    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def is_primitive(self) -> bool:
        if self.kind == "MACRO":
            return False
        if self.kind == "MCX":
            return len(self.controls) <= 2
        if self.kind in ("CZ",):
            return len(self.controls) <= 1
        return not self.controls


@dataclass(frozen=True)
class Circuit:
    registers: tuple[tuple[str, tuple[int, ...]], ...]
    num_qubits: int
    gates: tuple[Gate, ...]
    ancillas: tuple[str, ...] = ()
    global_phase: int = 0

    def reg(self, name: str) -> tuple[int, ...]:
        for n, qs in self.registers:
            if n == name:
                return qs
        raise KeyError(name)

    @property
    def register_map(self) -> dict[str, tuple[int, ...]]:
        return dict(self.registers)

    def ancilla_qubits(self) -> list[int]:
        m = self.register_map
        return [q for name in self.ancillas for q in m[name]]

    def data_qubits(self) -> list[int]:
        anc = set(self.ancilla_qubits())
        return [q for q in range(self.num_qubits) if q not in anc]

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return replace(self, gates=tuple(gates))

    def __len__(self) -> int:
        return len(self.gates)


def empty_circuit() -> Circuit:
    return Circuit((), 0, ())


# ---------------------------------------------------------------------------
# builder


class Pool:
    """Reusable zeroed ancilla qubits living in one ancilla register."""

    def __init__(self, builder: "Builder", name: str):
        self.b = builder
        self.name = name
        self.free: list[int] = []

    def take(self, n: int = 1) -> list[int]:
        out = []
        while len(out) < n and self.free:
            out.append(self.free.pop())
        if len(out) < n:
            out.extend(self.b.grow(self.name, n - len(out)))
        return out

    def take1(self) -> int:
        return self.take(1)[0]

    def give(self, qubits: Iterable[int]) -> None:
        self.free.extend(reversed(list(qubits)))


class Builder:
    """Mutable circuit under construction.

    Registers are lists of global qubit indices, least significant bit
    first.  Gates emitted inside `payload()` are the ones that receive an
    extra control when the circuit is later controlled.
    """

    def __init__(self):
        self.regs: dict[str, list[int]] = {}
        self.anc: list[str] = []
        self.n = 0
        self.gates: list[Gate] = []
        self._payload = 0
        self._pools: dict[str, Pool] = {}
        self.pool = self.new_pool("anc")
        self.global_phase = 0

    def register(self, name: str, width: int, ancilla: bool = False) -> list[int]:
        if name in self.regs:
            raise CircuitError(f"duplicate register {name!r}")
        qs = list(range(self.n, self.n + width))
        self.n += width
        self.regs[name] = qs
        if ancilla:
            self.anc.append(name)
        return qs

    def ancilla(self, name: str, width: int) -> list[int]:
        return self.register(name, width, ancilla=True)

    def grow(self, name: str, width: int) -> list[int]:
        if name not in self.regs:
            self.register(name, 0, ancilla=True)
        qs = list(range(self.n, self.n + width))
        self.n += width
        self.regs[name].extend(qs)
        return qs

    def new_pool(self, name: str) -> Pool:
        if name in self._pools:
            raise CircuitError(f"duplicate pool {name!r}")
        p = Pool(self, name)
        self._pools[name] = p
        return p

    def lane_pool(self, name: str) -> Pool:
        """Pool `name`, created on first use.  Separate lanes keep depth parallel."""
        if name not in self._pools:
            return self.new_pool(name)
        return self._pools[name]

    @contextmanager
    def payload(self):
        self._payload += 1
        try:
            yield
        finally:
            self._payload -= 1

    # -- emission ----------------------------------------------------------
    def add(self, gate: Gate) -> None:
        if self._payload and not gate.payload:
            gate = replace(gate, payload=True)
        self.gates.append(gate)

    def x(self, q: int, controls: Sequence[Control] = ()) -> None:
        controls = tuple(controls)
        self.add(Gate("MCX" if controls else "X", (q,), controls))

    def cx(self, c: int, t: int, polarity: bool = True) -> None:
        self.add(Gate("MCX", (t,), ((c, polarity),)))

    def z(self, q: int, controls: Sequence[Control] = ()) -> None:
        controls = tuple(controls)
        self.add(Gate("CZ" if controls else "Z", (q,), controls))

    def s(self, q: int, power: int = 1) -> None:
        self.add(Gate("S", (q,), (), (power % 4,)))

    def swap(self, a: int, b: int, controls: Sequence[Control] = ()) -> None:
        self.add(Gate("SWAP", (a, b), tuple(controls)))

    def h(self, q: int) -> None:
        self.add(Gate("H", (q,)))

    def rz(self, q: int, angle: float) -> None:
        self.add(Gate("RZ", (q,), (), (float(angle),)))

    def macro(self, name: str, operands: dict[str, Sequence[int]], params: dict) -> None:
        layout = tuple((k, len(v)) for k, v in operands.items())
        targets = tuple(q for v in operands.values() for q in v)
        self.add(Gate("MACRO", targets, (), (name, json.dumps(params, sort_keys=True), layout)))

    def mark(self) -> int:
        return len(self.gates)

    def since(self, mark: int) -> list[Gate]:
        return list(self.gates[mark:])

    def emit_inverse(self, gates: Sequence[Gate]) -> None:
        for g in reversed(gates):
            for h in _invert_gate(g):
                self.add(h)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.add(g)

    def build(self) -> Circuit:
        regs = tuple((k, tuple(v)) for k, v in self.regs.items())
        return Circuit(regs, self.n, tuple(self.gates), tuple(self.anc), self.global_phase % 4)


def from_circuit(c: Circuit) -> Builder:
    """A builder pre-loaded with the layout and gates of `c`."""
    b = Builder()
    for name, qs in c.registers:
        b.regs[name] = list(qs)
    b.anc = list(c.ancillas)
    b.n = c.num_qubits
    b.gates = list(c.gates)
    b.global_phase = c.global_phase
    if "anc" in b.regs:
        b.pool = Pool(b, "anc")
        b._pools = {"anc": b.pool}
    return b


# ---------------------------------------------------------------------------
# macros


@dataclass(frozen=True)
class MacroDef:
    expand: Callable[[Builder, dict, dict], None]
    semantics: Callable[[dict, dict], dict]
    inverse: Callable[[dict], tuple[str, dict]]


MACROS: dict[str, MacroDef] = {}


def register_macro(name: str, expand, semantics, inverse=None) -> None:
    if inverse is None:
        def inverse(params, _name=name):
            return _name, params
    MACROS[name] = MacroDef(expand, semantics, inverse)


def _macro_parts(g: Gate) -> tuple[str, dict, dict[str, list[int]]]:
    name, ptext, layout = g.params
    params = json.loads(ptext)
    operands, i = {}, 0
    for key, w in layout:
        operands[key] = list(g.targets[i:i + w])
        i += w
    return name, params, operands


def _lookup(name: str) -> MacroDef:
    _ensure_gadgets()
    if name not in MACROS:
        raise SynthesisError(f"unknown macro {name!r}")
    return MACROS[name]


def _ensure_gadgets() -> None:
    if not MACROS:
        from . import gadgets  # noqa: F401  (registers the gadget macros)


# ---------------------------------------------------------------------------
# inversion


def _invert_gate(g: Gate) -> list[Gate]:
    if g.kind == "S":
        return [replace(g, params=((-g.params[0]) % 4,))]
    if g.kind == "RZ":
        return [replace(g, params=(-g.params[0],))]
    if g.kind == "MACRO":
        name, params, operands = _macro_parts(g)
        iname, iparams = _lookup(name).inverse(params)
        layout = g.params[2]
        return [replace(g, params=(iname, json.dumps(iparams, sort_keys=True), layout))]
    return [g]


def invert(c: Circuit) -> Circuit:
    gates = []
    for g in reversed(c.gates):
        gates.extend(_invert_gate(g))
    return replace(c, gates=tuple(gates), global_phase=(-c.global_phase) % 4)


def compose(first: Circuit, second: Circuit) -> Circuit:
    """`first` then `second`; both must share one layout."""
    if first.registers != second.registers:
        raise CircuitError("layouts differ")
    return replace(first, gates=first.gates + second.gates,
                   global_phase=(first.global_phase + second.global_phase) % 4)


def controlled(c: Circuit, name: str = "ctrl", polarity: bool = True) -> Circuit:
    """Add a one-qubit control register to `c`.

    Only gates tagged as payload receive the control; compute/uncompute
    scaffolding around them runs unconditionally.  Untagged circuits get the
    control on every gate.
    """
    b = from_circuit(c)
    b.gates = []
    ctl = b.register(name, 1)[0]
    tagged = any(g.payload for g in c.gates)
    for g in c.gates:
        if tagged and not g.payload:
            b.gates.append(g)
            continue
        if g.kind in ("X", "MCX"):
            b.gates.append(Gate("MCX", g.targets, g.controls + ((ctl, polarity),), g.params, True))
        elif g.kind in ("Z", "CZ"):
            b.gates.append(Gate("CZ", g.targets, g.controls + ((ctl, polarity),), g.params, True))
        elif g.kind == "SWAP":
            b.gates.append(Gate("SWAP", g.targets, g.controls + ((ctl, polarity),), g.params, True))
        else:
            raise SynthesisError(f"cannot control gate kind {g.kind}")
    if c.global_phase:
        # the phase becomes a relative phase on the control wire
        if not polarity:
            b.x(ctl)
        b.s(ctl, c.global_phase)
        if not polarity:
            b.x(ctl)
        b.global_phase = 0
    return b.build()


# ---------------------------------------------------------------------------
# lowering


class _Lowerer:
    """Expands one circuit; scratch qubits are reused only when that adds no depth."""

    def __init__(self, c: Circuit):
        self.b = from_circuit(c)
        self.b.gates = []
        self.name = "lowering"
        while self.name in self.b.regs:
            self.name += "_"
        self.last = [0] * c.num_qubits
        self.free: list[int] = []
        self.macro_pool: Pool | None = None

    def emit(self, g: Gate) -> None:
        qs = g.qubits()
        d = 1 + max((self.last[q] for q in qs), default=0)
        for q in qs:
            self.last[q] = d
        self.b.gates.append(g)

    def take(self, ready: int) -> int:
        best = -1
        for k, q in enumerate(self.free):
            if self.last[q] <= ready and (best < 0 or self.last[q] > self.last[self.free[best]]):
                best = k
        if best >= 0:
            return self.free.pop(best)
        q = self.b.grow(self.name, 1)[0]
        self.last.append(0)
        return q

    def give(self, qs: Iterable[int]) -> None:
        self.free.extend(qs)

    def ready(self, lits: Iterable[Control]) -> int:
        return max((self.last[q] for q, _ in lits), default=0)

    def and_tree(self, lits: list[Control]) -> tuple[list[Control], list[Gate]]:
        """Reduce literals to at most two by a balanced Toffoli tree."""
        seg: list[Gate] = []
        layer = list(lits)
        while len(layer) > 2:
            nxt = []
            for i in range(0, len(layer) - 1, 2):
                q = self.take(self.ready(layer[i:i + 2]))
                g = Gate("MCX", (q,), (layer[i], layer[i + 1]))
                self.emit(g)
                seg.append(g)
                nxt.append((q, True))
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer, seg

    def undo(self, seg: list[Gate]) -> None:
        for g in reversed(seg):
            self.emit(g)
        self.give(g.targets[0] for g in seg)

    def reduce_to_one(self, lits: list[Control]) -> tuple[Control, list[Gate]]:
        layer, seg = self.and_tree(lits)
        if len(layer) == 2:
            q = self.take(self.ready(layer))
            g = Gate("MCX", (q,), tuple(layer))
            self.emit(g)
            seg.append(g)
            return (q, True), seg
        return layer[0], seg

    def cswap(self, c: Control, p: int, q: int, payload: bool) -> None:
        self.emit(Gate("MCX", (p,), ((q, True),), (), payload))
        self.emit(Gate("MCX", (q,), (c, (p, True)), (), payload))
        self.emit(Gate("MCX", (p,), ((q, True),), (), payload))

    def lower_gate(self, g: Gate) -> None:
        if g.kind == "MACRO":
            name, params, operands = _macro_parts(g)
            sub = Builder()
            sub.regs, sub.n, sub.anc = self.b.regs, self.b.n, self.b.anc
            if self.macro_pool is None:
                self.macro_pool = Pool(sub, self.name + "_macro")
            self.macro_pool.b = sub
            sub.pool = self.macro_pool
            sub._pools = {}
            _lookup(name).expand(sub, operands, params)
            self.b.n = sub.n
            self.last.extend([0] * (self.b.n - len(self.last)))
            for h in sub.gates:
                self.lower_gate(replace(h, payload=h.payload or g.payload))
            return
        if g.is_primitive():
            self.emit(g)
            return
        controls = list(g.controls)
        if g.kind == "MCX":
            layer, seg = self.and_tree(controls)
            self.emit(Gate("MCX", g.targets, tuple(layer), g.params, g.payload))
            self.undo(seg)
        elif g.kind in ("CZ", "Z"):
            lit, seg = self.reduce_to_one(controls)
            self.emit(Gate("CZ", g.targets, (lit,), g.params, g.payload))
            self.undo(seg)
        elif g.kind == "SWAP":
            p, q = g.targets
            lit, seg = self.reduce_to_one(controls)
            self.cswap(lit, p, q, g.payload)
            self.undo(seg)
        else:
            raise SynthesisError(f"cannot lower {g.kind} with {len(controls)} controls")


def lower(c: Circuit) -> Circuit:
    """Expand macros and wide controls into X/CX/CCX, Z/CZ, S, SWAP, H, RZ."""
    if all(g.is_primitive() for g in c.gates):
        return c
    lw = _Lowerer(c)
    for g in c.gates:
        lw.lower_gate(g)
    return lw.b.build()


# ---------------------------------------------------------------------------
# metrics


def depth(c: Circuit) -> int:
    """Greedy as-soon-as-possible layer count over qubit-disjoint gates."""
    last = [0] * c.num_qubits
    best = 0
    for g in c.gates:
        qs = g.qubits()
        d = 1 + max((last[q] for q in qs), default=0)
        for q in qs:
            last[q] = d
        best = max(best, d)
    return best


def _kind_key(g: Gate) -> str:
    if g.kind == "MCX":
        return f"MCX{len(g.controls)}"
    if g.kind == "CZ":
        return f"CZ{len(g.controls)}"
    if g.kind == "SWAP" and g.controls:
        return f"CSWAP{len(g.controls)}"
    return g.kind


def gate_count(c: Circuit) -> dict:
    """Histogram of lowered gate kinds plus a weighted total.

    The total counts each 1- and 2-qubit gate once and each Toffoli as
    `TOFFOLI_COST` gates.
    """
    lc = lower(c)
    hist = Counter(_kind_key(g) for g in lc.gates)
    total = 0
    for key, n in hist.items():
        total += n * (TOFFOLI_COST if key == "MCX2" else 1)
    return {"by_kind": dict(sorted(hist.items())), "total": total,
            "gates": sum(hist.values()), "toffoli_cost": TOFFOLI_COST}


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class BasisPhaseState:
    """Basis state of `width` qubits (bit q of `bits` is qubit q) times i**phase."""

    bits: int
    width: int
    phase: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.width:
            raise StateError("bits do not fit the declared width")
        object.__setattr__(self, "phase", self.phase % 4)

    def bit(self, q: int) -> int:
        return (self.bits >> q) & 1

    def value(self, qubits: Sequence[int]) -> int:
        return sum(((self.bits >> q) & 1) << i for i, q in enumerate(qubits))

    def with_value(self, qubits: Sequence[int], value: int) -> "BasisPhaseState":
        bits = self.bits
        for i, q in enumerate(qubits):
            bits = (bits & ~(1 << q)) | (((value >> i) & 1) << q)
        return BasisPhaseState(bits, self.width, self.phase)


def state_from_registers(c: Circuit, values: dict[str, int], phase: int = 0) -> BasisPhaseState:
    s = BasisPhaseState(0, c.num_qubits, phase)
    m = c.register_map
    for name, v in values.items():
        if v >> len(m[name]):
            raise StateError(f"value {v} does not fit register {name}")
        s = s.with_value(m[name], v)
    return s


def read_registers(c: Circuit, s: BasisPhaseState) -> dict[str, int]:
    return {name: s.value(qs) for name, qs in c.registers}


def _masks(controls) -> tuple[int, int]:
    cm = cv = 0
    for q, pol in controls:
        cm |= 1 << q
        if pol:
            cv |= 1 << q
    return cm, cv


def simulate(c: Circuit, state: BasisPhaseState) -> BasisPhaseState:
    """Apply every gate of `c` to a basis state (global phase not applied)."""
    if state.width != c.num_qubits:
        raise StateError(f"state has {state.width} qubits, circuit {c.num_qubits}")
    s, ph = state.bits, state.phase
    for g in c.gates:
        k = g.kind
        if k == "MACRO":
            s, dph = _macro_apply(g, s)
            ph += dph
            continue
        cm, cv = _masks(g.controls)
        if (s & cm) != cv:
            continue
        if k in ("X", "MCX"):
            s ^= 1 << g.targets[0]
        elif k in ("Z", "CZ"):
            if (s >> g.targets[0]) & 1:
                ph += 2
        elif k == "S":
            if (s >> g.targets[0]) & 1:
                ph += g.params[0]
        elif k == "SWAP":
            a, b = g.targets
            if ((s >> a) ^ (s >> b)) & 1:
                s ^= (1 << a) | (1 << b)
        else:
            raise StateError(f"gate {k} does not map basis states to basis states")
    return BasisPhaseState(s, state.width, ph % 4)


def _macro_apply(g: Gate, s: int) -> tuple[int, int]:
    name, params, operands = _macro_parts(g)
    vals = {k: sum(((s >> q) & 1) << i for i, q in enumerate(qs)) for k, qs in operands.items()}
    out = _lookup(name).semantics(dict(vals), params)
    dph = out.pop("_phase", 0)
    for k, v in out.items():
        for i, q in enumerate(operands[k]):
            s = (s & ~(1 << q)) | (((v >> i) & 1) << q)
    return s, dph


@dataclass
class Batch:
    """Bit-sliced batch of basis states: column q holds qubit q of every state."""

    cols: list[int]
    p0: int
    p1: int
    size: int

    @property
    def full(self) -> int:
        return (1 << self.size) - 1


def _phase_planes(phases: Sequence[int] | None, n: int) -> tuple[int, int]:
    if phases is None:
        return 0, 0
    import numpy as np

    ph = np.asarray(phases, dtype=np.int64) % 4
    lo = np.packbits((ph & 1).astype(np.uint8), bitorder="little")
    hi = np.packbits((ph >> 1).astype(np.uint8), bitorder="little")
    return int.from_bytes(lo.tobytes(), "little"), int.from_bytes(hi.tobytes(), "little")


def pack_states(states: Sequence[int], width: int, phases: Sequence[int] | None = None) -> Batch:
    """Transpose basis states (ints, bit q = qubit q) into per-qubit columns."""
    import numpy as np

    n = len(states)
    p0, p1 = _phase_planes(phases, n)
    if n == 0 or width == 0:
        return Batch([0] * width, p0, p1, n)
    nbytes = (width + 7) // 8
    raw = b"".join(s.to_bytes(nbytes, "little") for s in states)
    arr = np.frombuffer(raw, dtype=np.uint8).reshape(n, nbytes)
    bits = np.unpackbits(arr, axis=1, bitorder="little")[:, :width]
    rows = np.packbits(np.ascontiguousarray(bits.T), axis=1, bitorder="little")
    cols = [int.from_bytes(r.tobytes(), "little") for r in rows]
    return Batch(cols, p0, p1, n)


def unpack_states(batch: Batch) -> tuple[list[int], list[int]]:
    import numpy as np

    n, width = batch.size, len(batch.cols)
    if n == 0:
        return [], []
    cbytes = (n + 7) // 8
    raw = b"".join(c.to_bytes(cbytes, "little") for c in batch.cols) if width else b""
    nb = (width + 7) // 8
    if width:
        arr = np.frombuffer(raw, dtype=np.uint8).reshape(width, cbytes)
        bits = np.unpackbits(arr, axis=1, bitorder="little")[:, :n]
        padded = np.zeros((n, nb * 8), dtype=np.uint8)
        padded[:, :width] = bits.T
        rows = np.packbits(padded, axis=1, bitorder="little")
        states = [int.from_bytes(r.tobytes(), "little") for r in rows]
    else:
        states = [0] * n
    phases = [((batch.p0 >> k) & 1) | (((batch.p1 >> k) & 1) << 1) for k in range(n)]
    return states, phases


def simulate_batch(c: Circuit, batch: Batch) -> Batch:
    """Bit-sliced simulation; equivalent to `simulate` on each packed state."""
    if len(batch.cols) != c.num_qubits:
        raise StateError(f"batch has {len(batch.cols)} qubits, circuit {c.num_qubits}")
    cols = list(batch.cols)
    full = batch.full
    p0, p1 = batch.p0, batch.p1
    for g in c.gates:
        k = g.kind
        if k == "MACRO":
            g_low = lower(Circuit((), c.num_qubits, (g,)))
            sub = simulate_batch(replace(g_low, num_qubits=g_low.num_qubits),
                                 Batch(cols + [0] * (g_low.num_qubits - len(cols)), p0, p1, batch.size))
            cols = sub.cols[: len(cols)]
            p0, p1 = sub.p0, sub.p1
            continue
        cond = full
        for q, pol in g.controls:
            cond &= cols[q] if pol else ~cols[q]
        if not cond:
            continue
        if k in ("X", "MCX"):
            cols[g.targets[0]] ^= cond & full
        elif k in ("Z", "CZ"):
            p1 ^= cond & cols[g.targets[0]] & full
        elif k == "S":
            hit = cond & cols[g.targets[0]] & full
            for _ in range(g.params[0]):
                p1 ^= p0 & hit
                p0 ^= hit
        elif k == "SWAP":
            a, b = g.targets
            diff = (cols[a] ^ cols[b]) & cond & full
            cols[a] ^= diff
            cols[b] ^= diff
        else:
            raise StateError(f"gate {k} does not map basis states to basis states")
    return Batch(cols, p0, p1, batch.size)


# ---------------------------------------------------------------------------
# serialization

FORMAT = "fermenc-circuit"
VERSION = 1


def serialize(c: Circuit) -> str:
    head = {"format": FORMAT, "version": VERSION, "num_qubits": c.num_qubits,
            "registers": [[n, list(qs)] for n, qs in c.registers],
            "ancillas": list(c.ancillas), "global_phase": c.global_phase,
            "gates": len(c.gates)}
    lines = [json.dumps(head)]
    for g in c.gates:
        rec = {"k": g.kind, "t": list(g.targets)}
        if g.controls:
            rec["c"] = [[q, int(p)] for q, p in g.controls]
        if g.params:
            rec["p"] = [list(x) if isinstance(x, tuple) else x for x in g.params]
        if g.payload:
            rec["pl"] = 1
        lines.append(json.dumps(rec))
    return "\n".join(lines) + "\n"


def _gate_from_record(rec: dict, lineno: int, nq: int) -> Gate:
    if not isinstance(rec, dict):
        raise ParseError(lineno, "gate record must be an object")
    kind = rec.get("k")
    if kind not in KINDS:
        raise ParseError(lineno, f"unknown gate kind {kind!r}")
    try:
        targets = tuple(int(q) for q in rec["t"])
        controls = tuple((int(q), bool(p)) for q, p in rec.get("c", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(lineno, f"bad operands: {exc}") from None
    for q in targets + tuple(q for q, _ in controls):
        if not 0 <= q < nq:
            raise ParseError(lineno, f"qubit {q} out of range")
    if set(targets) & {q for q, _ in controls}:
        raise ParseError(lineno, "targets and controls overlap")
    params = rec.get("p", [])
    if kind == "MACRO":
        try:
            name, ptext, layout = params
            params = (name, ptext, tuple((str(k), int(w)) for k, w in layout))
        except (TypeError, ValueError) as exc:
            raise ParseError(lineno, f"bad macro payload: {exc}") from None
    else:
        params = tuple(params)
    return Gate(kind, targets, controls, params, bool(rec.get("pl", 0)))


def deserialize(text: str) -> Circuit:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(1, "missing header")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(1, f"invalid JSON: {exc.msg}") from None
    if not isinstance(head, dict) or head.get("format") != FORMAT:
        raise ParseError(1, "not a circuit header")
    try:
        nq = int(head["num_qubits"])
        regs = tuple((str(n), tuple(int(q) for q in qs)) for n, qs in head["registers"])
        anc = tuple(str(a) for a in head.get("ancillas", []))
        expected = int(head.get("gates", -1))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(1, f"bad header field: {exc}") from None
    gates = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
        gates.append(_gate_from_record(rec, lineno, nq))
    if expected >= 0 and expected != len(gates):
        raise ParseError(len(lines) + 1, f"expected {expected} gates, found {len(gates)} (truncated?)")
    return Circuit(regs, nq, tuple(gates), anc, int(head.get("global_phase", 0)) % 4)


def to_text(c: Circuit) -> str:
    """One gate per line with QASM-like mnemonics (inspection only)."""
    names = {}
    for name, qs in c.registers:
        for i, q in enumerate(qs):
            names[q] = f"{name}[{i}]"
    out = []
    for g in c.gates:
        ctl = ",".join(("" if p else "!") + names.get(q, f"q{q}") for q, p in g.controls)
        tgt = ",".join(names.get(q, f"q{q}") for q in g.targets)
        mnem = {"MCX": "x", "CZ": "z"}.get(g.kind, g.kind.lower())
        if g.kind == "S" and g.params and g.params[0] != 1:
            mnem = f"s^{g.params[0]}"
        if g.kind == "RZ":
            mnem = f"rz({g.params[0]:.6g})"
        if g.kind == "MACRO":
            mnem = f"macro {g.params[0]}{g.params[1]}"
        out.append(f"{mnem} {('[' + ctl + '] ') if ctl else ''}{tgt}")
    return "\n".join(out) + ("\n" if out else "")


def simulate_sparse(c: Circuit, amps: dict[int, complex], tol: float = 1e-15) -> dict[int, complex]:
    """Amplitude-dictionary simulation; handles H and RZ as well as the basis gates.

    The circuit's global phase i**global_phase is applied at the end.
    """
    import cmath

    cur = {s: complex(a) for s, a in amps.items() if abs(a) > tol}
    for g in c.gates:
        k = g.kind
        nxt: dict[int, complex] = {}
        if k == "MACRO":
            for s, a in cur.items():
                t, dph = _macro_apply(g, s)
                nxt[t] = nxt.get(t, 0) + a * 1j**dph
            cur = nxt
            continue
        cm, cv = _masks(g.controls)
        q = g.targets[0]
        bit = 1 << q
        for s, a in cur.items():
            if (s & cm) != cv:
                nxt[s] = nxt.get(s, 0) + a
                continue
            if k in ("X", "MCX"):
                nxt[s ^ bit] = nxt.get(s ^ bit, 0) + a
            elif k in ("Z", "CZ"):
                nxt[s] = nxt.get(s, 0) + (-a if s & bit else a)
            elif k == "S":
                nxt[s] = nxt.get(s, 0) + (a * 1j**g.params[0] if s & bit else a)
            elif k == "SWAP":
                x, y = g.targets
                t = s ^ ((1 << x) | (1 << y)) if ((s >> x) ^ (s >> y)) & 1 else s
                nxt[t] = nxt.get(t, 0) + a
            elif k == "H":
                r = a / math.sqrt(2)
                nxt[s & ~bit] = nxt.get(s & ~bit, 0) + r
                nxt[s | bit] = nxt.get(s | bit, 0) + (-r if s & bit else r)
            elif k == "RZ":
                half = g.params[0] / 2
                nxt[s] = nxt.get(s, 0) + a * cmath.exp(1j * half if s & bit else -1j * half)
            else:
                raise StateError(f"unknown gate kind {k}")
        cur = {s: a for s, a in nxt.items() if abs(a) > tol}
    ph = 1j**c.global_phase
    return {s: a * ph for s, a in cur.items()}
