"""Succinct pointer encoding: stars-and-bars high bits plus per-slot low bits.

Each of the F pointers (sorted, empty slots all-ones) is split into its top
G = ceil(log2 F) bits and the remaining w - G low bits.  The high parts are
stored as a unary bin histogram: ``1^{r_0} 0 1^{r_1} 0 ... 0 1^{r_last}``,
a string of H = 2^G + F - 1 bits.  The low parts are stored in slot order.
"""

from __future__ import annotations

from .circuit import Builder
from .encodings import Encoding, IntegrityError
from .fock import FockBitstring, ceil_log2
from .gadgets import (SERIAL, Temp, add_const, and2, eq, exchange, is_const, const_value, le, lt,
                      neg, operand, phase_flip, reg_bits, swap_if, xor2, xor_into, xor_sum)
from .sorted_list import pointer_width


def msb_string(ptrs: list[int], low: int, bins: int) -> list[int]:
    counts = [0] * bins
    for v in ptrs:
        counts[v >> low] += 1
    out: list[int] = []
    for r, c in enumerate(counts):
        if r:
            out.append(0)
        out.extend([1] * c)
    return out


def ones_before_zero(m: list[int], k: int) -> int:
    """Number of ones before the k-th zero (1-based); k=0 gives 0, k past the end gives all."""
    if k <= 0:
        return 0
    zeros = ones = 0
    for v in m:
        if v:
            ones += 1
        else:
            zeros += 1
            if zeros == k:
                return ones
    return ones


class Succinct(Encoding):
    """LSB registers l0..l{F-1} then the MSB bit string m; weights below F."""

    name = "succinct"

    def __init__(self, M: int, F: int, mode: str = SERIAL):
        super().__init__(M)
        if F < 1:
            raise ValueError("succinct layouts need F >= 1")
        self.F = F
        self.w = pointer_width(M)
        self.G = ceil_log2(F)
        if self.G > self.w:
            raise ValueError(f"F={F} needs more high bits than a {self.w}-bit pointer has")
        self.L = self.w - self.G
        self.bins = 1 << self.G
        self.H = self.bins + F - 1
        self.inf = (1 << self.w) - 1
        self.cw = F.bit_length()
        self.mode = mode

    def _key(self) -> tuple:
        return (type(self).__name__, self.M, self.F, self.mode)

    @property
    def weights(self) -> range:
        return range(0, min(self.F - 1, self.M) + 1)

    def declare(self, b: Builder) -> None:
        for i in range(self.F):
            b.register(f"l{i}", self.L)
        b.register("m", self.H)

    def describe(self) -> dict:
        d = super().describe()
        d.update(F=self.F, pointer_width=self.w, high_bits=self.G, low_bits=self.L, msb_length=self.H)
        return d

    # -- classical side ------------------------------------------------------
    def pointers(self, b: FockBitstring) -> list[int]:
        self._check(b)
        ptrs = [j - 1 for j in b.occupied()]
        return ptrs + [self.inf] * (self.F - len(ptrs))

    def encode(self, b: FockBitstring) -> dict[str, int]:
        ptrs = self.pointers(b)
        mask = (1 << self.L) - 1
        vals = {f"l{i}": v & mask for i, v in enumerate(ptrs)}
        m = msb_string(ptrs, self.L, self.bins)
        vals["m"] = sum(bit << q for q, bit in enumerate(m))
        return vals

    def msb_bits(self, values: dict[str, int]) -> list[int]:
        return [(values["m"] >> q) & 1 for q in range(self.H)]

    def decode(self, values: dict[str, int]) -> FockBitstring:
        m = self.msb_bits(values)
        if m.count(0) != self.bins - 1:
            raise IntegrityError("MSB string has the wrong number of delimiters")
        highs, zeros = [], 0
        for v in m:
            if v:
                highs.append(zeros)
            else:
                zeros += 1
        ptrs = [(h << self.L) | values[f"l{i}"] for i, h in enumerate(highs)]
        real = [v for v in ptrs if v != self.inf]
        if ptrs[len(real):] != [self.inf] * (len(ptrs) - len(real)):
            raise IntegrityError("empty slot before an occupied one")
        if any(a >= c for a, c in zip(real, real[1:])) or any(v >= self.M for v in real):
            raise IntegrityError("pointers not strictly increasing within range")
        return FockBitstring.from_modes(self.M, [v + 1 for v in real])

    # -- circuit pieces ------------------------------------------------------
    def split(self, p):
        pv = operand(p, self.w)
        return pv[: self.L], pv[self.L:]

    def lsb(self, b: Builder, i: int) -> list:
        return reg_bits(b.regs[f"l{i}"])

    def emit_count_scan(self, b: Builder, p_m, P: list[int] | None, E: list[int] | None) -> None:
        """P ^= ones before zero #p_m, E ^= ones before zero #(p_m+1), by one serial pass."""
        m = b.regs["m"]
        zc = b.pool.take(self.G)
        for q in range(self.H):
            one = (m[q], True)
            t = Temp(b)
            cp = lt(b, t, reg_bits(zc), p_m, self.mode) if P is not None else False
            ce = le(b, t, reg_bits(zc), p_m, self.mode) if E is not None else False
            gp = and2(b, t, one, cp)
            ge_ = and2(b, t, one, ce)
            t.done()
            if P is not None:
                add_const(b, P, 1, gp)
            if E is not None:
                add_const(b, E, 1, ge_)
            t.undo()
            add_const(b, zc, 1, neg(one))
        # every valid string has bins-1 zeros, so the counter ends at a known value
        for i, q in enumerate(zc):
            if ((self.bins - 1) >> i) & 1:
                b.x(q)
        b.pool.give(zc)

    def emit_ranges(self, b: Builder, p_m) -> tuple[list, list]:
        """Registers holding the first and one-past-last slot in bin p_m."""
        P = b.pool.take(self.cw)
        E = b.pool.take(self.cw)
        self.emit_count_scan(b, p_m, P, E)
        return P, E

    def in_range(self, b: Builder, t: Temp, P, E, i: int):
        return and2(b, t, le(b, t, P, i, self.mode), lt(b, t, i, E, self.mode))

    def slot_rel(self, b: Builder, t: Temp, P, E, i: int, rel: str, p_l):
        """[pointer_i REL p] from the bin range and the low bits."""
        x = self.lsb(b, i)
        inr = self.in_range(b, t, P, E, i)
        if rel == "<=":
            return and2(b, t, inr, le(b, t, x, p_l, self.mode))
        if rel == "==":
            return and2(b, t, inr, eq(b, t, x, p_l, self.mode))
        if rel == "<":
            before = lt(b, t, i, P, self.mode)
            # slots before the bin and in-bin smaller slots are disjoint
            return xor2(b, t, before, and2(b, t, inr, lt(b, t, x, p_l, self.mode)))
        raise ValueError(rel)

    # -- queries -------------------------------------------------------------
    def emit_sgn_rank(self, b: Builder, p) -> None:
        p_l, p_m = self.split(p)
        m0 = b.mark()
        P, E = self.emit_ranges(b, p_m)
        scan = b.since(m0)
        with b.payload():
            phase_flip(b, [(P[0], True)])
        for i in range(self.F):
            t = Temp(b)
            c = self.slot_rel(b, t, reg_bits(P), reg_bits(E), i, "<=", p_l)
            t.done()
            with b.payload():
                phase_flip(b, [c])
            t.undo()
        b.emit_inverse(scan)
        b.pool.give(P + E)

    def _index_and_flag(self, b: Builder, p_l, p_m, tq: list[int], f: int) -> tuple[list, list, list]:
        """Returns (scan, count, flag) segments; count adds the rank of p to tq, flag xors presence into f."""
        m0 = b.mark()
        P, E = self.emit_ranges(b, p_m)
        scan = b.since(m0)
        m1 = b.mark()
        for i in range(self.F):
            t = Temp(b)
            c = self.slot_rel(b, t, reg_bits(P), reg_bits(E), i, "<", p_l)
            t.done()
            add_const(b, tq, 1, c)
            t.undo()
        count = b.since(m1)
        m2 = b.mark()
        for i in range(self.F):
            t = Temp(b)
            c = self.slot_rel(b, t, reg_bits(P), reg_bits(E), i, "==", p_l)
            t.done()
            xor_into(b, f, c)
            t.undo()
        flag = b.since(m2)
        b.emit_inverse(scan)
        b.pool.give(P + E)
        return scan, count, flag

    def _cycle(self, b: Builder, regs: list[list[int]], start: list, ctrl, up: bool) -> None:
        """Move element `start` to the end (up) or the end to `start` (down), when ctrl."""
        n = len(regs)
        t = Temp(b)
        flags = [and2(b, t, ctrl, le(b, t, start, q, self.mode)) for q in range(n - 1)]
        t.done()
        order = range(n - 1) if up else reversed(range(n - 1))
        with b.payload():
            for q in order:
                for x, y in zip(regs[q], regs[q + 1]):
                    swap_if(b, x, y, [flags[q]])
        t.undo()

    def emit_bit_flip(self, b: Builder, p) -> None:
        p_l, p_m = self.split(p)
        tq = b.pool.take(self.cw)
        f = b.pool.take1()
        scan, count, flag = self._index_and_flag(b, p_l, p_m, tq, f)
        lsbs = [b.regs[f"l{i}"] for i in range(self.F)]
        fl = (f, True)
        # deletion: move the slot holding p to the end; insertion: reverse
        self._cycle(b, lsbs, reg_bits(tq), fl, up=True)
        if self.L and not (is_const(p_l) and const_value(p_l) == (1 << self.L) - 1):
            exchange(b, lsbs[-1], p_l, (1 << self.L) - 1, mode=self.mode)
        self._cycle(b, lsbs, reg_bits(tq), neg(fl), up=False)
        sw = max(self.cw, self.G, (self.H - 1).bit_length(), 1)
        s = b.pool.take(sw)
        m0 = b.mark()
        xor_sum(b, s, reg_bits(tq), p_m, False, self.mode)
        ssum = b.since(m0)
        bits = [[q] for q in b.regs["m"]]
        self._cycle(b, bits, reg_bits(s), fl, up=True)
        self._cycle(b, bits, reg_bits(s), neg(fl), up=False)
        b.emit_inverse(ssum)
        b.pool.give(s)
        # rank of p is unchanged and presence has flipped: recompute to clear
        b.extend(scan)
        b.emit_inverse(count)
        b.extend(flag)
        b.emit_inverse(scan)
        with b.payload():
            b.x(f)
        b.pool.give(tq + [f])
