"""Sorted pointer-list encodings.

`SortedList` stores the occupied modes as F ascending w-bit pointers, with
the all-ones value standing for "empty slot".  `BufferedList` interleaves a
buffer register between neighbouring pointers so an insertion or deletion
takes a constant number of parallel swap layers.
"""

from __future__ import annotations

from .circuit import Builder
from .encodings import Encoding, IntegrityError
from .fock import FockBitstring, ceil_log2
from .gadgets import (LOGDEPTH, SERIAL, Temp, cond_exchange, cond_swap, eq, exchange, fanout,
                      le, ordered_swap, operand, phase_flip, reg_bits, xor_all, xor_into)


def pointer_width(M: int) -> int:
    return ceil_log2(M + 1)


class _PointerLayout(Encoding):
    def __init__(self, M: int, F: int, mode: str):
        super().__init__(M)
        if F < 0:
            raise ValueError("F must be non-negative")
        self.F = F
        self.w = pointer_width(M)
        self.inf = (1 << self.w) - 1
        self.mode = mode

    def _key(self) -> tuple:
        return (type(self).__name__, self.M, self.F, self.mode)

    def pointers(self, b: FockBitstring) -> list[int]:
        self._check(b)
        ptrs = [j - 1 for j in b.occupied()]
        return ptrs + [self.inf] * (self.F - len(ptrs))

    def bits_from_pointers(self, ptrs) -> FockBitstring:
        real = [v for v in ptrs if v != self.inf]
        if any(v != self.inf for v in ptrs[len(real):]):
            raise IntegrityError("empty slot before an occupied one")
        if any(a >= c for a, c in zip(real, real[1:])):
            raise IntegrityError("pointers not strictly increasing")
        if any(v >= self.M for v in real):
            raise IntegrityError("pointer beyond the last mode")
        return FockBitstring.from_modes(self.M, [v + 1 for v in real])

    def describe(self) -> dict:
        d = super().describe()
        d.update(F=self.F, pointer_width=self.w)
        return d


class SortedList(_PointerLayout):
    """F pointer registers x0..x{F-1}; holds any weight up to F."""

    name = "sorted"

    def __init__(self, M: int, F: int, mode: str = SERIAL):
        super().__init__(M, F, mode)

    @property
    def weights(self) -> range:
        return range(0, min(self.F, self.M) + 1)

    def declare(self, b: Builder) -> None:
        for i in range(self.F):
            b.register(f"x{i}", self.w)

    def regs(self, b: Builder) -> list[list[int]]:
        return [b.regs[f"x{i}"] for i in range(self.F)]

    def encode(self, b: FockBitstring) -> dict[str, int]:
        return {f"x{i}": v for i, v in enumerate(self.pointers(b))}

    def decode(self, values: dict[str, int]) -> FockBitstring:
        return self.bits_from_pointers([values[f"x{i}"] for i in range(self.F)])

    def emit_sgn_rank(self, b: Builder, p) -> None:
        pv = operand(p, self.w)
        for i, x in enumerate(self.regs(b)):
            t = Temp(b, b.lane_pool(f"lane{i}"))
            f = le(b, t, reg_bits(x), pv, self.mode)
            t.done()
            with b.payload():
                phase_flip(b, [f])
            t.undo()

    def emit_bit_flip(self, b: Builder, p) -> None:
        xs = self.regs(b)
        if not xs:
            return
        pv = operand(p, self.w)
        # bubble p to the last slot, trade it for the empty marker, bubble back
        for i in range(len(xs) - 1):
            ordered_swap(b, xs[i], xs[i + 1], pv, mode=self.mode)
        exchange(b, xs[-1], pv, self.inf, mode=self.mode)
        for i in reversed(range(len(xs) - 1)):
            ordered_swap(b, xs[i], xs[i + 1], pv, mode=self.mode)


class BufferedList(_PointerLayout):
    """Pointers interleaved with all-ones buffers, plus a trailing all-ones sentinel.

    Register order: buf0, x0, buf1, x1, ..., x{F-1}, buf{F}, sentinel.
    Holds weights strictly below F.
    """

    name = "buffered"

    def __init__(self, M: int, F: int, mode: str = LOGDEPTH):
        super().__init__(M, F, mode)

    @property
    def weights(self) -> range:
        return range(0, min(self.F - 1, self.M) + 1)

    def declare(self, b: Builder) -> None:
        for i in range(self.F):
            b.register(f"buf{i}", self.w)
            b.register(f"x{i}", self.w)
        b.register(f"buf{self.F}", self.w)
        b.register("sentinel", self.w)

    def encode(self, b: FockBitstring) -> dict[str, int]:
        vals = {f"x{i}": v for i, v in enumerate(self.pointers(b))}
        for i in range(self.F + 1):
            vals[f"buf{i}"] = self.inf
        vals["sentinel"] = self.inf
        return vals

    def decode(self, values: dict[str, int]) -> FockBitstring:
        bad = [n for n in values if (n.startswith("buf") or n == "sentinel") and values[n] != self.inf]
        if bad:
            raise IntegrityError(f"buffer registers not empty: {', '.join(sorted(bad))}")
        return self.bits_from_pointers([values[f"x{i}"] for i in range(self.F)])

    def emit_sgn_rank(self, b: Builder, p) -> None:
        pv = operand(p, self.w)
        for i in range(self.F):
            t = Temp(b, b.lane_pool(f"lane{i}"))
            f = le(b, t, reg_bits(b.regs[f"x{i}"]), pv, self.mode)
            t.done()
            with b.payload():
                phase_flip(b, [f])
            t.undo()

    def _present_flag(self, b: Builder, pv, flag: int) -> None:
        """flag ^= [p is stored], via parallel equality tests and a parity tree."""
        temps = []
        lits = []
        for i in range(self.F):
            t = Temp(b, b.lane_pool(f"lane{i}"))
            lits.append(eq(b, t, reg_bits(b.regs[f"x{i}"]), pv, self.mode))
            temps.append(t.done())
        t = Temp(b)
        par = xor_all(b, t, lits)
        t.done()
        xor_into(b, flag, par)
        t.undo()
        for t in reversed(temps):
            t.undo()

    def _insert(self, b: Builder, pv, ctrls) -> None:
        F = self.F
        x = [b.regs[f"x{i}"] for i in range(F)]
        buf = [b.regs[f"buf{i}"] for i in range(F + 1)]
        lane = [b.lane_pool(f"lane{i}") for i in range(F)]
        for k in range(F):
            cond_exchange(b, x[k - 1] if k else None, buf[k], x[k], pv, [ctrls[k]], self.mode, lane[k])
        for k in range(F):
            cond_swap(b, x[k], buf[k + 1], pv, [ctrls[k]], self.mode, lane[k])
        for k in range(F):
            cond_swap(b, buf[k], x[k], pv, [ctrls[k]], self.mode, lane[k])

    def emit_bit_flip(self, b: Builder, p) -> None:
        if self.F == 0:
            return
        pv = operand(p, self.w)
        f = b.pool.take1()
        self._present_flag(b, pv, f)
        copies = b.pool.take(self.F - 1)
        m = b.mark()
        fanout(b, (f, True), copies)
        fan = b.since(m)
        fd = [(f, True)] + [(q, True) for q in copies]
        self._insert(b, pv, [(q, not pol) for q, pol in fd])
        m = b.mark()
        self._insert(b, pv, fd)
        seg = b.since(m)
        del b.gates[m:]
        b.emit_inverse(seg)
        b.emit_inverse(fan)
        b.pool.give(copies)
        # the flag is recomputed on the new state, where presence has flipped
        self._present_flag(b, pv, f)
        with b.payload():
            b.x(f)
        b.pool.give([f])
