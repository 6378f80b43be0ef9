"""Majorana products, rotations, index-controlled queries and capacity bookkeeping.

Conventions: gamma_{2j-1} = a_j + a_j^dagger and gamma_{2j} = i(a_j^dagger - a_j),
so every gamma squares to the identity.  On an encoded state gamma_{2j-1}
is R_{j-1} followed by F_j, and gamma_{2j} is R_j followed by F_j times i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .circuit import (BasisPhaseState, Builder, Circuit, Gate, SynthesisError, controlled, from_circuit,
                      pack_states, simulate_batch, unpack_states)
from .encodings import Encoding, make_encoding
from .fock import Capacity, CapacityError, FockBitstring, majorana_oracle
from .gadgets import Temp, eq, reg_bits


@dataclass(frozen=True)
class MajoranaProduct:
    """i**phase * gamma_{indices[0]} * gamma_{indices[1]} * ...

    The rightmost factor acts first.
    """

    indices: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        idx = tuple(int(m) for m in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"Majorana indices must be distinct, got {idx}")
        if any(m < 1 for m in idx):
            raise ValueError("Majorana indices start at 1")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "phase", self.phase % 4)

    def __len__(self) -> int:
        return len(self.indices)

    def check_modes(self, M: int) -> None:
        bad = [m for m in self.indices if m > 2 * M]
        if bad:
            raise IndexError(f"Majorana index {bad[0]} outside 1..{2 * M}")

    def is_involution(self) -> bool:
        """U*U = I, i.e. U is Hermitian as well as unitary."""
        n = len(self.indices)
        # reversing n anticommuting factors gives (-1)^(n(n-1)/2)
        sign = 2 * ((n * (n - 1) // 2) % 2)
        return (2 * self.phase + sign) % 4 == 0

    def apply(self, b: FockBitstring) -> tuple[int, FockBitstring]:
        """Oracle action: (power of i, output string)."""
        ph = self.phase
        for m in reversed(self.indices):
            d, b = majorana_oracle(m, b)
            ph += d
        return ph % 4, b

    def path(self, b: FockBitstring) -> list[FockBitstring]:
        """Intermediate strings after each factor, starting with `b`."""
        out = [b]
        for m in reversed(self.indices):
            b = majorana_oracle(m, b)[1]
            out.append(b)
        return out


def pair_generator(mu: int, nu: int) -> MajoranaProduct:
    """i * gamma_mu * gamma_nu, a Hermitian involution for mu != nu."""
    return MajoranaProduct((mu, nu), 1)


def hopping_terms(j: int, k: int) -> list[tuple[MajoranaProduct, float]]:
    """a_j^dagger a_k + a_k^dagger a_j as a sum of commuting weighted pair generators."""
    if j == k:
        raise ValueError("hopping needs two distinct modes")
    return [(pair_generator(2 * j - 1, 2 * k), 0.5), (pair_generator(2 * k - 1, 2 * j), 0.5)]


@dataclass(frozen=True)
class RotationSpec:
    """exp(i * theta * U) for an involutory Majorana product U."""

    generator: MajoranaProduct
    theta: float

    def __post_init__(self):
        if len(self.generator) % 2:
            raise ValueError("rotation generators need an even number of Majorana factors")
        if not self.generator.is_involution():
            raise ValueError("generator does not square to the identity; adjust its phase")


def hopping_rotations(j: int, k: int, theta: float) -> list[RotationSpec]:
    """Rotations whose product is exp(-i theta (a_j^dagger a_k + h.c.))."""
    return [RotationSpec(g, -theta * w) for g, w in hopping_terms(j, k)]


# ---------------------------------------------------------------------------
# compilation


def emit_majorana(enc: Encoding, b: Builder, mu: int) -> None:
    if not 1 <= mu <= 2 * enc.M:
        raise IndexError(f"Majorana index {mu} outside 1..{2 * enc.M}")
    j = (mu + 1) // 2
    rank = j - 1 if mu % 2 else j
    if rank:
        enc.emit_sgn_rank(b, rank - 1)
    enc.emit_bit_flip(b, j - 1)
    if mu % 2 == 0:
        b.global_phase += 1


def compile_majorana(enc: Encoding, mu: int) -> Circuit:
    b = enc.new_builder()
    emit_majorana(enc, b, mu)
    return b.build()


def compile_product(enc: Encoding, prod: MajoranaProduct) -> Circuit:
    prod.check_modes(enc.M)
    b = enc.new_builder()
    for mu in reversed(prod.indices):
        emit_majorana(enc, b, mu)
    b.global_phase += prod.phase
    return b.build()


def require_capacity(enc: Encoding, F: int, excursion: int) -> None:
    """Raise unless `enc` holds every weight within `excursion` of F (clamped to 0..M)."""
    need = range(max(0, F - excursion), min(enc.M, F + excursion) + 1)
    w = enc.weights
    if need.start < w.start or need.stop > w.stop:
        raise CapacityError(f"{enc!r} holds weights {w.start}..{w.stop - 1}; "
                            f"need {need.start}..{need.stop - 1}")


def compile_rotation(enc: Encoding, spec: RotationSpec, F: int | None = None) -> Circuit:
    """H, controlled U, H, RZ(-2 theta), H, controlled U, H on a fresh ancilla `rot`.

    With F given, the layout must hold every weight a weight-F input passes
    through: each Majorana factor moves the weight by one.
    """
    if F is not None:
        require_capacity(enc, F, len(spec.generator))
    cu = controlled(compile_product(enc, spec.generator), name="rot")
    b = from_circuit(cu)
    b.gates = []
    b.anc.append("rot")
    r = cu.reg("rot")[0]
    b.h(r)
    b.extend(cu.gates)
    b.h(r)
    b.rz(r, -2 * spec.theta)
    b.h(r)
    b.extend(cu.gates)
    b.h(r)
    return b.build()


def evaluate_rotation(enc: Encoding, spec: RotationSpec, state: FockBitstring,
                      circuit: Circuit | None = None) -> list[tuple[complex, BasisPhaseState]]:
    """exp(i theta U)|s> = cos(theta)|s> + i sin(theta) U|s>, with U|s> from the simulator.

    Returns (amplitude, basis state) pairs; the basis state's own phase is
    part of the branch, so its full amplitude is amplitude * i**phase.
    Branches with a zero coefficient are dropped.
    """
    return evaluate_rotation_batch(enc, spec, [state], circuit)[0]


def evaluate_rotation_batch(enc: Encoding, spec: RotationSpec, states: Sequence[FockBitstring],
                            circuit: Circuit | None = None) -> list[list[tuple[complex, BasisPhaseState]]]:
    """`evaluate_rotation` for many inputs with one bit-sliced simulation of U."""
    c = circuit if circuit is not None else compile_product(enc, spec.generator)
    for s in states:
        for t in spec.generator.path(s):
            if not enc.accepts(t):
                raise CapacityError(f"{spec.generator} takes {s} through {t}, outside {enc!r}")
    ins = [enc.basis_state(c, s) for s in states]
    got = simulate_batch(c, pack_states([s.bits for s in ins], c.num_qubits))
    bits, phases = unpack_states(got)
    anc = 0
    for q in c.ancilla_qubits():
        anc |= 1 << q
    cs, sn = math.cos(spec.theta), math.sin(spec.theta)
    out = []
    for s, v, ph in zip(ins, bits, phases):
        if v & anc:
            raise RuntimeError("generator circuit left an ancilla dirty")
        branches = []
        if cs != 0.0:
            branches.append((complex(cs), s))
        if sn != 0.0:
            branches.append((1j * sn, BasisPhaseState(v, c.num_qubits, ph + c.global_phase)))
        out.append(branches)
    return out


def branch_amplitudes(enc: Encoding, c: Circuit,
                      branches: Sequence[tuple[complex, BasisPhaseState]]) -> dict[FockBitstring, complex]:
    """Sum branches into decoded Fock strings with full complex amplitudes."""
    acc: dict[FockBitstring, complex] = {}
    for amp, s in branches:
        f = enc.read_state(c, s)
        acc[f] = acc.get(f, 0) + amp * 1j**s.phase
    return acc


# ---------------------------------------------------------------------------
# index-controlled queries


SELECT_OPS = ("sgn-rank", "bit-flip")


def index_width(M: int) -> int:
    return max(1, (M - 1).bit_length())


def compile_select(enc: Encoding, op: str = "bit-flip") -> Circuit:
    """R or F with the mode taken from register `index` (holding j-1, left unchanged).

    Layouts whose builders only take constant positions get a multiplexer:
    one [index == j-1]-controlled copy of each fixed circuit.
    """
    if op not in SELECT_OPS:
        raise ValueError(f"select supports {', '.join(SELECT_OPS)}, not {op!r}")
    b = enc.new_builder()
    idx = b.register("index", index_width(enc.M))
    emit = enc.emit_sgn_rank if op == "sgn-rank" else enc.emit_bit_flip
    if enc.register_positions:
        emit(b, reg_bits(idx))
        return b.build()
    for j in range(1, enc.M + 1):
        fixed = enc.sgn_rank(j) if op == "sgn-rank" else enc.bit_flip(j)
        t = Temp(b)
        flag = eq(b, t, reg_bits(idx), j - 1)
        t.done()
        _append_controlled(b, fixed, flag)
        t.undo()
    return b.build()


def _append_controlled(b: Builder, c: Circuit, flag) -> None:
    """Copy `c` into `b`, adding `flag` to its payload gates; data registers map by name."""
    qmap: dict[int, int] = {}
    for name, qs in c.registers:
        if name in b.regs and name not in c.ancillas:
            qmap.update(zip(qs, b.regs[name]))
    rest = [q for q in range(c.num_qubits) if q not in qmap]
    scratch = b.pool.take(len(rest))
    qmap.update(zip(rest, scratch))
    tagged = any(g.payload for g in c.gates)
    for g in c.gates:
        ctl = tuple((qmap[q], p) for q, p in g.controls)
        tg = tuple(qmap[q] for q in g.targets)
        if tagged and not g.payload:
            b.add(Gate(g.kind, tg, ctl, g.params))
            continue
        kind = {"X": "MCX", "Z": "CZ"}.get(g.kind, g.kind)
        if kind not in ("MCX", "CZ", "SWAP"):
            raise SynthesisError(f"cannot control gate kind {g.kind}")
        b.add(Gate(kind, tg, ctl + (flag,), g.params, True))
    if c.global_phase:
        with b.payload():
            b.s(flag[0], c.global_phase if flag[1] else -c.global_phase)
        if not flag[1]:
            b.global_phase += c.global_phase
    b.pool.give(scratch)


# ---------------------------------------------------------------------------
# capacity


def capacity_for(k: int, F: int) -> Capacity:
    """Weights F-k..F+k: enough room for products of up to k Majoranas on weight-F states."""
    return Capacity(F, k)


def capacity_overhead(name: str, M: int, F: int, k: int) -> int:
    """Extra data qubits layout `name` spends to hold F-k..F+k instead of exactly F."""
    return make_encoding(name, M, F, k).qubits - make_encoding(name, M, F, 0).qubits
