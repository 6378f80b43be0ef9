"""Implicit encoding: a state is stored as its index in a sorted, padded list.

At level j the capacity set is ordered by total weight, then by the weight
of the suffix x_{j+1..M} (a "book"), then by the reversed prefix
x_j..x_1 (a "chapter"), then lexicographically by the suffix.  Each chapter
is padded at its tail to a power of two, and unused indices form a pool at
the end of the array.  At level j, flipping or testing x_j moves whole
label ranges, and moving between levels j and j+1 takes a constant number
of range translations and aligned bit permutations per book.

All label arithmetic acts on one register, "label", of n qubits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

from .circuit import Builder, Circuit
from .encodings import Encoding, IntegrityError
from .fock import Capacity, FockBitstring
from .gadgets import SERIAL, Temp, add_const, and2, and_all, le, lt, phase_flip, reg_bits, swap_if, xor_into

MODE = SERIAL


class LayoutError(ValueError):
    """Array too small for a requested rearrangement."""


def pow2(n: int) -> int:
    """Smallest power of two >= n, with pow2(0) = 0."""
    return 0 if n <= 0 else 1 << (n - 1).bit_length()


def log2_exact(n: int) -> int:
    if n <= 0 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def C(n: int, r: int) -> int:
    return comb(n, r) if 0 <= r <= n else 0


def lex_rank(bits) -> int:
    """Rank among strings of the same length and weight, ordered lexicographically."""
    n, left, r = len(bits), sum(bits), 0
    for i, v in enumerate(bits):
        if v:
            r += C(n - i - 1, left)
            left -= 1
    return r


def lex_unrank(n: int, w: int, r: int) -> tuple[int, ...]:
    out = []
    for i in range(n):
        zeros_here = C(n - i - 1, w)
        if r < zeros_here:
            out.append(0)
        else:
            r -= zeros_here
            out.append(1)
            w -= 1
    return tuple(out)


def order_key(j: int, x: FockBitstring) -> tuple:
    pre, suf = x.bits[:j], x.bits[j:]
    return (x.weight, sum(suf), tuple(reversed(pre)) + tuple(suf))


def order_less(j: int, x: FockBitstring, y: FockBitstring) -> bool:
    """The level-j order: weight, suffix weight, reversed prefix then suffix."""
    if x.modes != y.modes:
        raise ValueError("strings of different lengths")
    return order_key(j, x) < order_key(j, y)


@dataclass(frozen=True)
class Book:
    weight: int
    s: int          # suffix weight
    start: int
    K: int          # chapters
    P: int          # padded chapter length
    size: int       # configurations per chapter

    @property
    def length(self) -> int:
        return self.K * self.P


@dataclass(frozen=True)
class BookStep:
    """One book's rearrangement inside a level step."""

    base: int
    T: int          # used length of the array before this step
    K: int
    P: int
    a: int          # chapter entries with x_{j+1} = 0
    bb: int         # chapter entries with x_{j+1} = 1

    @property
    def Pa(self) -> int:
        return pow2(self.a)

    @property
    def Pb(self) -> int:
        return pow2(self.bb)

    @property
    def U(self) -> int:
        return max(self.Pa, self.Pb)

    @property
    def Q(self) -> int:
        return max(self.P, 2 * self.U)

    @property
    def Kp(self) -> int:
        return pow2(self.K)

    @property
    def R(self) -> int:
        return self.Kp * self.Q

    @property
    def trivial(self) -> bool:
        return self.a == 0 or self.bb == 0

    @property
    def need(self) -> int:
        return self.T if self.trivial else self.T + self.R - self.K * self.P


class ImplicitLayout:
    """Geometry of the padded label array for M modes and weights F-k..F+k."""

    def __init__(self, M: int, F: int, k: int = 0):
        if M < 1:
            raise ValueError("need at least one mode")
        self.M, self.F, self.k = M, F, k
        self.weights = Capacity(F, k).weights(M)
        if len(self.weights) == 0:
            raise ValueError(f"no weights of F={F}, k={k} fit in {M} modes")
        self.count = sum(C(M, w) for w in self.weights)

    # -- geometry ----------------------------------------------------------
    def books(self, j: int) -> list[Book]:
        if not 0 <= j <= self.M:
            raise IndexError(f"level {j} outside 0..{self.M}")
        r = self.M - j
        out, pos = [], 0
        for w in self.weights:
            for s in range(max(0, w - j), min(w, r) + 1):
                K, size = C(j, w - s), C(r, s)
                bk = Book(w, s, pos, K, pow2(size), size)
                out.append(bk)
                pos += bk.length
        return out

    def book(self, j: int, w: int, s: int) -> Book | None:
        for bk in self.books(j):
            if bk.weight == w and bk.s == s:
                return bk
        return None

    def used(self, j: int) -> int:
        return sum(bk.length for bk in self.books(j))

    def steps(self, j: int) -> list[BookStep]:
        """Book rearrangements taking level j to level j+1, in order."""
        if not 0 <= j < self.M:
            raise IndexError(f"no step out of level {j}")
        r = self.M - j
        T = self.used(j)
        out, cursor = [], 0
        for bk in self.books(j):
            st = BookStep(cursor, T, bk.K, bk.P, C(r - 1, bk.s), C(r - 1, bk.s - 1))
            out.append(st)
            new = bk.length if st.trivial else st.K * (st.Pa + st.Pb)
            cursor += new
            T += new - bk.length
        return out

    @cached_property
    def size(self) -> int:
        need = 4 * self.count
        for j in range(self.M + 1):
            need = max(need, self.used(j))
        for j in range(self.M):
            for st in self.steps(j):
                need = max(need, st.need)
        return pow2(need)

    @property
    def width(self) -> int:
        return max(1, log2_exact(self.size))

    # -- labels --------------------------------------------------------------
    def label(self, x: FockBitstring, j: int) -> int:
        if x.modes != self.M or x.weight not in self.weights:
            raise ValueError(f"{x} is not in the capacity set")
        pre, suf = x.bits[:j], x.bits[j:]
        bk = self.book(j, x.weight, sum(suf))
        return bk.start + lex_rank(tuple(reversed(pre))) * bk.P + lex_rank(suf)

    def unlabel(self, v: int, j: int) -> FockBitstring | None:
        """Configuration at index v of level j, or None for a padding slot."""
        if not 0 <= v < self.size:
            raise IndexError(f"label {v} outside 0..{self.size - 1}")
        r = self.M - j
        for bk in self.books(j):
            if bk.start <= v < bk.start + bk.length:
                ch, off = divmod(v - bk.start, bk.P)
                if off >= bk.size:
                    return None
                pre = tuple(reversed(lex_unrank(j, bk.weight - bk.s, ch)))
                return FockBitstring(pre + lex_unrank(r, bk.s, off))
        return None

    def flip_ranges(self, j: int) -> list[tuple[int, int, int]]:
        """(x, y, d): the x_j = 0 chapters at [x, x+d) trade places with the x_j = 1 chapters at [y, y+d)."""
        out = []
        for bk in self.books(j):
            if bk.weight + 1 not in self.weights:
                continue
            up = self.book(j, bk.weight + 1, bk.s)
            n0 = C(j - 1, bk.weight - bk.s)
            if not n0 or up is None:
                continue
            y = up.start + (up.K - n0) * up.P
            out.append((bk.start, y, n0 * bk.P))
        return out

    def one_ranges(self, j: int) -> list[tuple[int, int]]:
        """[lo, hi) label ranges of configurations with x_j = 1."""
        out = []
        for bk in self.books(j):
            n1 = C(j - 1, bk.weight - bk.s - 1)
            if n1:
                out.append((bk.start + (bk.K - n1) * bk.P, bk.start + bk.length))
        return _merge(out)

    def odd_prefix_ranges(self, j: int) -> list[tuple[int, int]]:
        """[lo, hi) label ranges where x_1 + ... + x_j is odd."""
        return _merge([(bk.start, bk.start + bk.length) for bk in self.books(j) if (bk.weight - bk.s) % 2])


def _merge(rs):
    out: list[list[int]] = []
    for lo, hi in sorted(rs):
        if out and out[-1][1] == lo:
            out[-1][1] = hi
        else:
            out.append([lo, hi])
    return [tuple(r) for r in out]


# ---------------------------------------------------------------------------
# label-register gadgets


def range_flag(b: Builder, t: Temp, reg, lo: int, hi: int):
    """[lo <= v < hi] for the value v of `reg`."""
    n = len(reg)
    lo, hi = max(lo, 0), min(hi, 1 << n)
    if lo >= hi:
        return False
    xs = reg_bits(reg)
    above = le(b, t, lo, xs, MODE) if lo > 0 else True
    below = lt(b, t, xs, hi, MODE) if hi < (1 << n) else True
    return and2(b, t, above, below)


def translate(b: Builder, reg, segs, ctrl=True) -> None:
    """Move each [src, src+len) to [dst, dst+len); the segments must permute their union."""
    n = len(reg)
    mod = 1 << n
    segs = [(s, ln, d) for s, ln, d in segs if ln > 0 and s != d]
    if not segs or ctrl is False:
        return
    srcs = sorted((s, s + ln) for s, ln, _ in segs)
    dsts = sorted((d, d + ln) for _, ln, d in segs)
    if _merge(srcs) != _merge(dsts):
        raise LayoutError("segments do not permute their union")
    if any(e > mod for _, e in srcs + dsts):
        raise LayoutError("segment beyond the end of the array")
    flags = b.pool.take(len(segs))
    for f, (s, ln, _) in zip(flags, segs):
        t = Temp(b)
        c = and2(b, t, range_flag(b, t, reg, s, s + ln), ctrl)
        t.done()
        xor_into(b, f, c)
        t.undo()
    for f, (s, _, d) in zip(flags, segs):
        add_const(b, reg, (d - s) % mod, (f, True), MODE)
    for f, (_, ln, d) in zip(flags, segs):
        t = Temp(b)
        c = and2(b, t, range_flag(b, t, reg, d, d + ln), ctrl)
        t.done()
        xor_into(b, f, c)
        t.undo()
    b.pool.give(flags)


def rotate(b: Builder, reg, i: int, k: int, n: int, ctrl=True) -> None:
    """v -> i + ((v - i + k) mod n) for v in [i, i+n)."""
    if not 0 <= k < max(n, 1):
        raise ValueError("need 0 <= k < n")
    translate(b, reg, [(i, n - k, i + k), (i + n - k, k, i)], ctrl)


def block_swap(b: Builder, reg, pa: int, la: int, pb: int, lb: int, ctrl=True) -> None:
    """Exchange blocks A = [pa, pa+la) and B = [pb, pb+lb), shifting what lies between."""
    if pa > pb:
        pa, la, pb, lb = pb, lb, pa, la
    if pa + la > pb:
        raise ValueError("blocks overlap")
    mid = pb - (pa + la)
    translate(b, reg, [(pa, la, pa + lb + mid), (pa + la, mid, pa + lb), (pb, lb, pa)], ctrl)


def permute_bits(b: Builder, reg, nbits: int, high: int, sigma: dict[int, int], ctrl=True) -> None:
    """Move bit p of the low `nbits` to position sigma[p], for labels whose higher bits equal `high`."""
    n = len(reg)
    if nbits > n or high >> (n - nbits):
        raise LayoutError("bit permutation region outside the array")
    t = Temp(b)
    lits = [(q, bool((high >> (i - nbits)) & 1)) for i, q in enumerate(reg) if i >= nbits]
    f = and2(b, t, and_all(b, t, lits), ctrl)
    t.done()
    seen = set()
    for p0 in range(nbits):
        if p0 in seen or sigma.get(p0, p0) == p0:
            continue
        cyc = [p0]
        seen.add(p0)
        q = sigma[p0]
        while q != p0:
            cyc.append(q)
            seen.add(q)
            q = sigma.get(q, q)
        for q in cyc[1:]:
            swap_if(b, reg[cyc[0]], reg[q], [f])
    t.undo()


def field_swap(lo: int, wa: int, wb: int) -> dict[int, int]:
    """Bit map exchanging adjacent fields [lo, lo+wa) and [lo+wa, lo+wa+wb)."""
    sigma = {}
    for i in range(wa):
        sigma[lo + i] = lo + wb + i
    for i in range(wb):
        sigma[lo + wa + i] = lo + i
    return sigma


def simple_interleave(b: Builder, reg, n_blocks: int, block_len: int, inverse: bool = False, ctrl=True) -> None:
    """A_1..A_n B_1..B_n -> A_1 B_1 .. A_n B_n at the array start; power-of-two block length.

    For n not a power of two, the B half is first moved up to make room, so
    labels from [2n*len, 2n'*len) (n' = next power of two) are used as padding.
    """
    L = log2_exact(block_len)
    npow = pow2(n_blocks)
    lk = log2_exact(npow)
    half = n_blocks * block_len
    gather = [(half, half, npow * block_len), (2 * half, (npow - n_blocks) * block_len, half)]
    sigma = field_swap(L, lk, 1)
    if not inverse:
        translate(b, reg, gather, ctrl)
        permute_bits(b, reg, L + lk + 1, 0, sigma, ctrl)
    else:
        permute_bits(b, reg, L + lk + 1, 0, {v: k for k, v in sigma.items()}, ctrl)
        translate(b, reg, [(d, ln, s) for s, ln, d in gather], ctrl)


def spread(b: Builder, reg, base_high: int, nbits: int, lo: int, wi: int, wz: int, inverse: bool = False, ctrl=True):
    """Within an aligned region, move blocks of 2^lo from stride 2^lo to stride 2^(lo+wz) (or back)."""
    sigma = field_swap(lo, wi, wz)
    if inverse:
        sigma = {v: k for k, v in sigma.items()}
    permute_bits(b, reg, nbits, base_high, sigma, ctrl)


def interleave_padded(b: Builder, reg, n_blocks: int, len_a: int, len_b: int, ctrl=True) -> None:
    """A_1..A_n B_1..B_n (lengths 2^kA, 2^kB) -> blocks [A_i pad][B_i pad], each half max(lenA, lenB).

    Uses [0, 2 * n' * max(lenA, lenB)) where n' is the next power of two; the
    labels beyond the inputs are treated as padding.
    """
    U = max(len_a, len_b)
    npow = pow2(n_blocks)
    lk, lu = log2_exact(npow), log2_exact(U)
    la, lb = log2_exact(len_a), log2_exact(len_b)
    na, nb = n_blocks * len_a, n_blocks * len_b
    # B half up to its aligned place
    translate(b, reg, [(na, nb, npow * U), (na + nb, npow * U - na, na)], ctrl)
    if len_a < U:
        spread(b, reg, 0, lu + lk, la, lk, lu - la, ctrl=ctrl)
    if len_b < U:
        spread(b, reg, 1, lu + lk, lb, lk, lu - lb, ctrl=ctrl)
    permute_bits(b, reg, lu + lk + 1, 0, field_swap(lu, lk, 1), ctrl)


# ---------------------------------------------------------------------------
# level steps and logical operations


def emit_book_step(b: Builder, reg, st: BookStep) -> None:
    if st.trivial:
        return
    n = len(reg)
    N = 1 << n
    if st.need > N:
        raise LayoutError("array too small for this rearrangement")
    K, P, a, bb = st.K, st.P, st.a, st.bb
    Pa, Pb, U, Q, Kp, R = st.Pa, st.Pb, st.U, st.Q, st.Kp, st.R
    lp, lq, lu, lk = (log2_exact(v) for v in (P, Q, U, Kp))
    lr = lq + lk
    after = st.T - st.base - K * P
    add_const(b, reg, (-st.base) % N, True, MODE)
    # pull padding from the pool so the book fills an aligned region [0, R)
    translate(b, reg, [(K * P, after, R), (st.T - st.base, R - K * P, K * P)])
    if Q > P:
        permute_bits(b, reg, lr, 0, field_swap(lp, lk, lq - lp))
    # per slot: [A B pad] -> [B pad | A pad], each half U long
    t = Temp(b)
    inr = and_all(b, t, [(q, False) for q in reg[lr:]])
    t.done()
    translate(b, reg[:lq], [(0, a, U), (a, bb, 0), (a + bb, U - bb, bb)], inr)
    t.undo()
    # slot-major [B_i A_i] -> [B_1..B_K'] [A_1..A_K']
    permute_bits(b, reg, lr, 0, field_swap(lu, lq - lu, lk))
    if Pb < U:
        permute_bits(b, reg, lu + lk, 0, field_swap(log2_exact(Pb), lu - log2_exact(Pb), lk))
    if Pa < U:
        permute_bits(b, reg, lu + lk, 1, field_swap(log2_exact(Pa), lu - log2_exact(Pa), lk))
    translate(b, reg, [(Kp * U, K * Pa, K * Pb), (K * Pb, Kp * U - K * Pb, K * Pb + K * Pa)])
    Cn = K * (Pa + Pb)
    translate(b, reg, [(R, after, Cn), (Cn, R - Cn, Cn + after)])
    add_const(b, reg, st.base % N, True, MODE)


def emit_layer_step(b: Builder, reg, layout: ImplicitLayout, j: int) -> None:
    """Level-j labels to level-(j+1) labels."""
    for st in layout.steps(j):
        emit_book_step(b, reg, st)


def emit_logical_x(b: Builder, reg, layout: ImplicitLayout, j: int) -> None:
    for x, y, d in layout.flip_ranges(j):
        translate(b, reg, [(x, d, y), (y, d, x)])


def emit_range_phase(b: Builder, reg, ranges) -> None:
    for lo, hi in ranges:
        t = Temp(b)
        f = range_flag(b, t, reg, lo, hi)
        t.done()
        phase_flip(b, [f])
        t.undo()


def _label_builder(width: int) -> tuple[Builder, list[int]]:
    b = Builder()
    return b, b.register("label", width)


def build_rotate(i: int, k: int, n: int, width: int) -> Circuit:
    if i < 0 or n < 1 or i + n > (1 << width):
        raise ValueError("rotation range outside the array")
    b, reg = _label_builder(width)
    rotate(b, reg, i, k, n)
    return b.build()


def build_block_swap(pos_a: int, len_a: int, pos_b: int, len_b: int, width: int) -> Circuit:
    if max(pos_a + len_a, pos_b + len_b) > (1 << width):
        raise LayoutError("blocks outside the array")
    b, reg = _label_builder(width)
    block_swap(b, reg, pos_a, len_a, pos_b, len_b)
    return b.build()


def build_simple_interleave(n_blocks: int, block_len: int, width: int, inverse: bool = False) -> Circuit:
    if 2 * pow2(n_blocks) * block_len > (1 << width):
        raise LayoutError("not enough room to pad the block count to a power of two")
    b, reg = _label_builder(width)
    simple_interleave(b, reg, n_blocks, block_len, inverse)
    return b.build()


def build_interleave_padded(n_blocks: int, len_a: int, len_b: int, width: int) -> Circuit:
    if 2 * pow2(n_blocks) * max(len_a, len_b) > (1 << width):
        raise LayoutError("not enough room for the padded interleave")
    b, reg = _label_builder(width)
    interleave_padded(b, reg, n_blocks, len_a, len_b)
    return b.build()


class Implicit(Encoding):
    """Single label register holding the level-0 index of the state."""

    name = "implicit"
    register_positions = False

    def __init__(self, M: int, F: int, k: int = 0):
        super().__init__(M)
        self.F, self.k = F, k
        self.layout = ImplicitLayout(M, F, k)

    def _key(self) -> tuple:
        return (type(self).__name__, self.M, self.F, self.k)

    @property
    def weights(self) -> range:
        return self.layout.weights

    def declare(self, b: Builder) -> None:
        b.register("label", self.layout.width)

    def describe(self) -> dict:
        d = super().describe()
        d.update(F=self.F, k=self.k, array_size=self.layout.size, capacity_states=self.layout.count)
        return d

    def encode(self, b: FockBitstring) -> dict[str, int]:
        self._check(b)
        return {"label": self.layout.label(b, 0)}

    def decode(self, values: dict[str, int]) -> FockBitstring:
        x = self.layout.unlabel(values["label"], 0)
        if x is None:
            raise IntegrityError(f"label {values['label']} is a padding slot")
        return x

    def _conjugated(self, b: Builder, j: int, middle) -> None:
        reg = b.regs["label"]
        m0 = b.mark()
        for i in range(j):
            emit_layer_step(b, reg, self.layout, i)
        walk = b.since(m0)
        with b.payload():
            middle(reg)
        b.emit_inverse(walk)

    def emit_bit_flip(self, b: Builder, p) -> None:
        if not isinstance(p, int):
            raise TypeError("implicit circuits take a fixed mode index")
        j = p + 1
        self._conjugated(b, j, lambda reg: emit_logical_x(b, reg, self.layout, j))

    def emit_sgn_rank(self, b: Builder, p) -> None:
        if not isinstance(p, int):
            raise TypeError("implicit circuits take a fixed mode index")
        j = p + 1
        self._conjugated(b, j, lambda reg: emit_range_phase(b, reg, self.layout.odd_prefix_ranges(j)))

    # standalone pieces
    def layer_step(self, j: int, inverse: bool = False) -> Circuit:
        b = self.new_builder()
        reg = b.regs["label"]
        m0 = b.mark()
        emit_layer_step(b, reg, self.layout, j)
        if inverse:
            seg = b.since(m0)
            del b.gates[m0:]
            b.emit_inverse(seg)
        return b.build()

    def logical_x(self, j: int) -> Circuit:
        b = self.new_builder()
        emit_logical_x(b, b.regs["label"], self.layout, j)
        return b.build()

    def logical_z(self, j: int) -> Circuit:
        b = self.new_builder()
        emit_range_phase(b, b.regs["label"], self.layout.one_ranges(j))
        return b.build()
