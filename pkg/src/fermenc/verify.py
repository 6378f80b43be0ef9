"""Batch verification of encoded circuits against the reference oracle.

States are packed bit-sliced (one big int per qubit) so one pass of the
simulator covers every input.  Expected outputs are the encodings of the
oracle results with all ancillas zero, so a single column comparison checks
bits, phases and ancilla cleanliness at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .circuit import Circuit, pack_states, simulate_batch
from .encodings import Encoding
from .fock import FockBitstring, bit_flip_oracle, majorana_oracle


@dataclass
class Mismatch:
    state: FockBitstring
    expected: tuple[int, int]
    got: tuple[int, int]

    def __str__(self) -> str:
        return (f"input {self.state}: expected state {self.expected[0]:#x} phase i^{self.expected[1]}, "
                f"got {self.got[0]:#x} phase i^{self.got[1]}")


@dataclass
class Report:
    checked: int = 0
    circuits: int = 0
    failures: list[tuple[str, Mismatch]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def merge(self, other: "Report") -> None:
        self.checked += other.checked
        self.circuits += other.circuits
        self.failures.extend(other.failures)


def _all_states(M: int, weights: range) -> list[FockBitstring]:
    from .fock import weight_class

    out = []
    for f in weights:
        if 0 <= f <= M:
            out.extend(weight_class(M, f))
    return out


class Harness:
    """Encodes a fixed state set once and checks circuits against it."""

    def __init__(self, enc: Encoding, states: Sequence[FockBitstring] | None = None):
        self.enc = enc
        self.states = list(states) if states is not None else _all_states(enc.M, enc.weights)
        b = enc.new_builder()
        self.offsets = {n: qs[0] if qs else 0 for n, qs in b.regs.items()}
        self._ints: dict[tuple, int] = {}

    def as_int(self, s: FockBitstring) -> int:
        v = self._ints.get(s.bits)
        if v is None:
            v = 0
            for name, val in self.enc.encode(s).items():
                v |= val << self.offsets[name]
            self._ints[s.bits] = v
        return v

    def check(self, c: Circuit, cases: Sequence[tuple[FockBitstring, int, FockBitstring]],
              label: str = "", limit: int = 5) -> Report:
        """cases: (input, expected phase, expected output)."""
        rep = Report(checked=len(cases), circuits=1)
        if not cases:
            return rep
        n = c.num_qubits
        ins = [self.as_int(s) for s, _, _ in cases]
        outs = [self.as_int(o) for _, _, o in cases]
        phases = [(ph - c.global_phase) % 4 for _, ph, _ in cases]
        got = simulate_batch(c, pack_states(ins, n))
        exp = pack_states(outs, n, phases)
        bad = (got.p0 ^ exp.p0) | (got.p1 ^ exp.p1)
        for a, e in zip(got.cols, exp.cols):
            bad |= a ^ e
        k = 0
        while bad and k < limit:
            low = bad & -bad
            i = low.bit_length() - 1
            bad ^= low
            gv = sum(((col >> i) & 1) << q for q, col in enumerate(got.cols))
            gp = ((got.p0 >> i) & 1) | (((got.p1 >> i) & 1) << 1)
            rep.failures.append((label, Mismatch(cases[i][0], (outs[i], phases[i]), (gv, gp))))
            k += 1
        if bad:
            rep.failures.append((label, Mismatch(cases[0][0], (0, 0), (0, 0))))
        return rep

    # -- standard case sets ---------------------------------------------------
    def sgn_rank_cases(self, j: int):
        return [(s, 2 * (sum(s.bits[:j]) % 2), s) for s in self.states]

    def bit_flip_cases(self, j: int):
        out = []
        for s in self.states:
            t = bit_flip_oracle(j, s)
            if self.enc.accepts(t):
                out.append((s, 0, t))
        return out

    def majorana_cases(self, mu: int):
        out = []
        for s in self.states:
            ph, t = majorana_oracle(mu, s)
            if self.enc.accepts(t):
                out.append((s, ph, t))
        return out


def verify_queries(enc: Encoding, js: Sequence[int] | None = None,
                   ops: Sequence[str] = ("sgn-rank", "bit-flip")) -> Report:
    """Check R_j and F_j on every state the layout accepts."""
    h = Harness(enc)
    rep = Report()
    for j in js if js is not None else range(1, enc.M + 1):
        if "sgn-rank" in ops:
            rep.merge(h.check(enc.sgn_rank(j), h.sgn_rank_cases(j), f"sgn-rank j={j}"))
        if "bit-flip" in ops:
            rep.merge(h.check(enc.bit_flip(j), h.bit_flip_cases(j), f"bit-flip j={j}"))
    return rep
