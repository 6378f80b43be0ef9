"""Succinct layout with a binary tree of zero counts over the MSB string.

Each internal node covering positions [a, b) of the MSB string stores how
many zeros lie in its left half [a, mid).  The counts let a circuit find the
k-th zero (and so the slot range of a bin) by one root-to-leaf walk, and let
an insertion or deletion in the MSB string be done with a constant number
of parallel swap layers plus one counter update per node.  All per-slot and
per-node work uses separate ancilla lanes so it runs in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .circuit import Builder, Pool
from .encodings import IntegrityError
from .fock import FockBitstring
from .gadgets import (LOGDEPTH, Temp, add_const, and2, const_bits, eq, fanout, fanout_reg, ge,
                      is_const, le, lt, neg, phase_flip, reg_bits, swap_if, xor2, xor_all,
                      xor_into, xor_sum)
from .succinct import Succinct

LEAF = 4


def _bits(n: int) -> int:
    return max(1, n.bit_length())


@dataclass
class Node:
    idx: int
    a: int
    b: int
    mid: int = 0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def leaf(self) -> bool:
        return self.left is None

    @property
    def size(self) -> int:
        return self.b - self.a


def build_tree(n: int, leaf: int = LEAF) -> list[Node]:
    """Nodes in preorder; ranges longer than `leaf` split with the larger half on the left."""
    nodes: list[Node] = []

    def rec(a: int, b: int) -> Node:
        node = Node(len(nodes), a, b)
        nodes.append(node)
        if b - a > leaf:
            node.mid = a + (b - a + 1) // 2
            node.left = rec(a, node.mid)
            node.right = rec(node.mid, b)
        return node

    rec(0, n)
    return nodes


class _Arena:
    """Scratch allocations kept until a recorded segment has been inverted."""

    def __init__(self, b: Builder):
        self.b = b
        self.temps: list[Temp] = []

    def temp(self, pool: Pool | None = None) -> Temp:
        t = Temp(self.b, pool)
        self.temps.append(t)
        return t

    def release(self) -> None:
        for t in self.temps:
            t.pool.give(t.taken)
            t.taken = []
        self.temps = []


@dataclass
class Affine:
    """A value val(lits) + off, where lits may be empty (a known constant)."""

    lits: list
    off: int

    def le_const(self, b, t, i):
        """[value <= i]"""
        c = i - self.off
        if c < 0:
            return False
        if not self.lits:
            return True
        return le(b, t, self.lits, c, LOGDEPTH)

    def gt_const(self, b, t, i):
        """[i < value]"""
        return neg(self.le_const(b, t, i))


class SuccinctTree(Succinct):
    """Succinct registers plus node counters S{idx}; weights below F."""

    name = "succinct-tree"

    def __init__(self, M: int, F: int, mode: str = LOGDEPTH):
        super().__init__(M, F, mode)
        self.nodes = build_tree(self.H)
        self.internal = [n for n in self.nodes if not n.leaf]

    def declare(self, b: Builder) -> None:
        super().declare(b)
        for n in self.internal:
            b.register(f"S{n.idx}", _bits(n.mid - n.a))

    def describe(self) -> dict:
        d = super().describe()
        d.update(tree_nodes=len(self.nodes), counter_qubits=sum(_bits(n.mid - n.a) for n in self.internal))
        return d

    def encode(self, b: FockBitstring) -> dict[str, int]:
        vals = super().encode(b)
        m = self.msb_bits(vals)
        for n in self.internal:
            vals[f"S{n.idx}"] = m[n.a:n.mid].count(0)
        return vals

    def decode(self, values: dict[str, int]) -> FockBitstring:
        m = self.msb_bits(values)
        for n in self.internal:
            if values[f"S{n.idx}"] != m[n.a:n.mid].count(0):
                raise IntegrityError(f"counter at node {n.idx} disagrees with the MSB string")
        return super().decode(values)

    # -- select ------------------------------------------------------------
    def _pool(self, b: Builder, n: Node) -> Pool:
        return b.lane_pool(f"node{n.idx}")

    def _walk_select(self, b: Builder, ar: _Arena, n: Node, f, o: list) -> list:
        """Offset within node n of the o-th zero (1-based), when f; zero otherwise."""
        m = b.regs["m"]
        if n.leaf:
            t = ar.temp(self._pool(b, n))
            rel = t.take(_bits(n.size - 1))
            ow = _bits(n.size)
            o = (o + [False] * ow)[:ow]
            for r in range(1, n.size):
                for pat in product((0, 1), repeat=r):
                    v = pat.count(0) + 1
                    ctrl = self._eq_lits(o, v)
                    if ctrl is None:
                        continue
                    ctrl += [(m[n.a + k], bool(bit)) for k, bit in enumerate(pat)]
                    ctrl.append((m[n.a + r], False))
                    for k in range(len(rel)):
                        if (r >> k) & 1:
                            xor_into(b, rel[k], f, ctrl)
            return reg_bits(rel)
        t = ar.temp(self._pool(b, n))
        S = reg_bits(b.regs[f"S{n.idx}"])
        c = le(b, t, o, S, LOGDEPTH)
        fl, fr = and2(b, t, f, c), and2(b, t, f, neg(c))
        lw, rw = _bits(n.mid - n.a), _bits(n.b - n.mid)
        ol = (list(o) + [False] * lw)[:lw]
        orr = t.take(rw)
        ob = (list(o) + [False] * rw)[:rw]
        nots = [neg(S[k]) if k < len(S) else True for k in range(rw)]
        xor_sum(b, orr, ob, nots, True, LOGDEPTH, t.pool)
        rl = self._walk_select(b, ar, n.left, fl, ol)
        rr = self._walk_select(b, ar, n.right, fr, reg_bits(orr))
        rel = t.take(_bits(n.size - 1))
        for q, x in zip(rel, rl):
            xor_into(b, q, x)
        off = const_bits(n.mid - n.a, len(rel))
        xor_sum(b, rel, rr, [fr if bit else False for bit in off], False, LOGDEPTH, t.pool)
        return reg_bits(rel)

    @staticmethod
    def _eq_lits(o: list, v: int):
        """Control literals for [o == v], None when impossible."""
        if v >> len(o):
            return None
        out = []
        for k, x in enumerate(o):
            want = bool((v >> k) & 1)
            if isinstance(x, bool):
                if x != want:
                    return None
                continue
            out.append((x[0], x[1] == want))
        return out

    def select_count(self, b: Builder, ar: _Arena, k) -> Affine:
        """Number of ones before the k-th zero of the MSB string (k = 0 gives 0, k = 2^G gives F)."""
        if isinstance(k, int):
            if k <= 0:
                return Affine([], 0)
            if k >= self.bins:
                return Affine([], self.F)
            rel = self._walk_select(b, ar, self.nodes[0], True, const_bits(k, _bits(self.H)))
            return Affine(rel, 1 - k)
        k = list(k)
        t = ar.temp()
        lo = neg(eq(b, t, k, 0, LOGDEPTH))
        hi = lt(b, t, k, self.bins, LOGDEPTH)
        zb = eq(b, t, k, self.bins, LOGDEPTH)
        f = and2(b, t, lo, hi)
        ow = max(_bits(self.H), len(k))
        rel = self._walk_select(b, ar, self.nodes[0], f, (k + [False] * ow)[:ow])
        W = max(_bits(self.H) + 1, len(k) + 1)
        diff = t.take(W)
        nots = [neg(k[i]) if i < len(k) else True for i in range(W)]
        xor_sum(b, diff, rel, nots, True, LOGDEPTH, t.pool)
        out = t.take(W)
        corr = []
        for i in range(W):
            one = bool((1 >> i) & 1)
            top = bool(((1 + self.H) >> i) & 1)
            corr.append(xor2(b, t, f if one else False, zb if top else False))
        xor_sum(b, out, reg_bits(diff), corr, False, LOGDEPTH, t.pool)
        return Affine(reg_bits(out[: self.cw]), 0)

    # -- per-slot lanes --------------------------------------------------------
    def _lanes(self, b: Builder, ar: _Arena, P: Affine, E: Affine, p_l):
        """Per-slot copies of P, E and the low bits of p."""
        srcs = [P.lits, E.lits] + ([] if is_const(p_l) else [list(p_l)])
        out = []
        for i in range(self.F):
            t = ar.temp(b.lane_pool(f"lane{i}"))
            out.append((t, [t.take(len(s)) for s in srcs]))
        for si, s in enumerate(srcs):
            for k, lit in enumerate(s):
                fanout(b, lit, [cp[si][k] for _, cp in out])
        lanes = []
        for t, cp in out:
            Pi = Affine(reg_bits(cp[0]), P.off)
            Ei = Affine(reg_bits(cp[1]), E.off)
            pl = p_l if is_const(p_l) else reg_bits(cp[2])
            lanes.append((t, Pi, Ei, pl))
        return lanes

    def _ranges(self, b: Builder, ar: _Arena, p_l, p_m):
        P = self.select_count(b, ar, self._as_k(p_m, 0, b, ar))
        E = self.select_count(b, ar, self._as_k(p_m, 1, b, ar))
        return P, E, self._lanes(b, ar, P, E, p_l)

    def _as_k(self, p_m, plus: int, b: Builder, ar: _Arena):
        if is_const(p_m):
            return sum(int(v) << i for i, v in enumerate(p_m)) + plus
        if not plus:
            return list(p_m)
        t = ar.temp()
        r = t.take(self.G + 1)
        xor_sum(b, r, list(p_m), [], True, LOGDEPTH, t.pool)
        return reg_bits(r)

    # -- queries -------------------------------------------------------------
    def emit_sgn_rank(self, b: Builder, p) -> None:
        p_l, p_m = self.split(p)
        ar = _Arena(b)
        m0 = b.mark()
        P, E, lanes = self._ranges(b, ar, p_l, p_m)
        flags = []
        for i, (t, Pi, Ei, pl) in enumerate(lanes):
            inr = and2(b, t, Pi.le_const(b, t, i), Ei.gt_const(b, t, i))
            flags.append(and2(b, t, inr, le(b, t, self.lsb(b, i), pl, LOGDEPTH)))
        seg = b.since(m0)
        with b.payload():
            phase_flip(b, [bool(P.off & 1)])
            if P.lits:
                phase_flip(b, [P.lits[0]])
            for c in flags:
                phase_flip(b, [c])
        b.emit_inverse(seg)
        ar.release()

    def _phase_a(self, b: Builder, p_l, p_m, g: list[int], bd: list[int], tq: list[int], f: int) -> list:
        """g_i ^= [slot i >= p], bd_i ^= [i is the first such slot], tq ^= that slot, f ^= [p stored]."""
        ar = _Arena(b)
        m0 = b.mark()
        _, _, lanes = self._ranges(b, ar, p_l, p_m)
        gs, eqs = [], []
        for i, (t, Pi, Ei, pl) in enumerate(lanes):
            x = self.lsb(b, i)
            inr = and2(b, t, Pi.le_const(b, t, i), Ei.gt_const(b, t, i))
            after = neg(Ei.gt_const(b, t, i))
            gs.append(xor2(b, t, after, and2(b, t, inr, ge(b, t, x, pl, LOGDEPTH))))
            eqs.append(and2(b, t, inr, eq(b, t, x, pl, LOGDEPTH)))
        firsts = [and2(b, lanes[i][0], gs[i], neg(gs[i - 1]) if i else True) for i in range(self.F)]
        t = ar.temp()
        tbits = [xor_all(b, t, [firsts[i] for i in range(self.F) if (i >> k) & 1]) for k in range(len(tq))]
        fl = xor_all(b, t, eqs)
        seg = b.since(m0)
        for i in range(self.F):
            xor_into(b, g[i], gs[i])
            xor_into(b, bd[i], firsts[i])
        for q, x in zip(tq, tbits):
            xor_into(b, q, x)
        xor_into(b, f, fl)
        b.emit_inverse(seg)
        ar.release()
        return b.since(m0)

    def emit_tree_insert(self, b: Builder, s: list, ctrl) -> None:
        """When ctrl: move the last MSB bit (a one) to position s, shifting the rest up, and fix the counters."""
        m = b.regs["m"]
        ar = _Arena(b)
        m0 = b.mark()
        updates, marks = [], []

        def walk(n: Node, inn, bef, o: list):
            t = ar.temp(self._pool(b, n))
            if n.leaf:
                for i in range(n.a, min(n.b, self.H - 1)):
                    marks.append((i, xor2(b, t, bef, and2(b, t, inn, le(b, t, o, i - n.a, LOGDEPTH)))))
                return
            half = n.mid - n.a
            c = lt(b, t, o, half, LOGDEPTH)
            il, ir = and2(b, t, inn, c), and2(b, t, inn, neg(c))
            lw, rw = _bits(n.mid - n.a - 1), _bits(n.b - n.mid - 1)
            orr = t.take(rw)
            ob = (list(o) + [False] * rw)[:rw]
            xor_sum(b, orr, ob, const_bits((-half) % (1 << rw), rw), False, LOGDEPTH, t.pool)
            br = xor2(b, t, bef, il)
            updates.append((n, bef, br))
            walk(n.left, il, bef, (list(o) + [False] * lw)[:lw])
            walk(n.right, ir, br, reg_bits(orr))

        ow = _bits(self.H - 1)
        walk(self.nodes[0], ctrl, False, (list(s) + [False] * ow)[:ow])
        flags = b.since(m0)
        # counters read the old string, so they change before the bits move
        for n, bef, br in updates:
            t = Temp(b, self._pool(b, n))
            dec = and2(b, t, br, (m[n.mid - 1], False))
            inc = and2(b, t, bef, (m[n.a - 1], False)) if n.a else False
            t.done()
            with b.payload():
                add_const(b, b.regs[f"S{n.idx}"], -1, dec, LOGDEPTH, t.pool)
                add_const(b, b.regs[f"S{n.idx}"], 1, inc, LOGDEPTH, t.pool)
            t.undo()
        if marks:
            pool = b.lane_pool("cycle")
            buf = pool.take(len(marks))
            for q in buf:
                b.x(q)
            with b.payload():
                for (i, mk), q in zip(marks, buf):
                    swap_if(b, m[i], q, [mk])
                for (i, mk), q in zip(marks, buf):
                    swap_if(b, q, m[i + 1], [mk])
            for q in buf:
                b.x(q)
            pool.give(buf)
        b.emit_inverse(flags)
        ar.release()

    def emit_bit_flip(self, b: Builder, p) -> None:
        p_l, p_m = self.split(p)
        F = self.F
        g = b.pool.take(F)
        bd = b.pool.take(F)
        tq = b.pool.take(_bits(F - 1))
        f = b.pool.take1()
        seg_a = self._phase_a(b, p_l, p_m, g, bd, tq, f)

        copies = b.pool.take(F - 1)
        m0 = b.mark()
        fanout(b, (f, True), copies)
        fd = [f] + copies
        ar = _Arena(b)
        pls = [p_l] * F
        if not is_const(p_l):
            cps = [ar.temp(b.lane_pool(f"lane{i}")).take(self.L) for i in range(F)]
            fanout_reg(b, list(p_l), cps)
            pls = [reg_bits(c) for c in cps]
        h, d, hi, di = [], [], [], []
        for i in range(F):
            t = ar.temp(b.lane_pool(f"lane{i}"))
            h.append(and2(b, t, (g[i], True), (fd[i], False)))
            d.append(and2(b, t, (g[i], True), (fd[i], True)))
            hi.append(and2(b, t, (bd[i], True), (fd[i], False)))
            di.append(and2(b, t, (bd[i], True), (fd[i], True)))
        prep = b.since(m0)
        if self.L:
            self._insert_lsb_lanes(b, h, hi, pls)
            m1 = b.mark()
            self._insert_lsb_lanes(b, d, di, pls)
            seg = b.since(m1)
            del b.gates[m1:]
            b.emit_inverse(seg)
        sw = max(self.cw, self.G, (self.H - 1).bit_length(), 1)
        s = b.pool.take(sw)
        m2 = b.mark()
        xor_sum(b, s, reg_bits(tq), p_m, False, LOGDEPTH)
        ssum = b.since(m2)
        self.emit_tree_insert(b, reg_bits(s), (f, False))
        m3 = b.mark()
        self.emit_tree_insert(b, reg_bits(s), (f, True))
        seg = b.since(m3)
        del b.gates[m3:]
        b.emit_inverse(seg)
        b.emit_inverse(ssum)
        b.pool.give(s)
        b.emit_inverse(prep)
        ar.release()
        b.pool.give(copies)

        # slot flags, rank and presence recomputed on the new state
        b.emit_inverse(seg_a)
        with b.payload():
            b.x(f)
        b.pool.give(g + bd + tq + [f])

    def _insert_lsb_lanes(self, b: Builder, h: list, first: list, pls: list) -> None:
        F = self.F
        regs = [b.regs[f"l{i}"] for i in range(F)]
        for k in range(self.L):
            pool = b.lane_pool(f"plane{k}")
            buf = pool.take(F)
            r = [x[k] for x in regs]
            with b.payload():
                for i in range(F):
                    swap_if(b, r[i], buf[i], [h[i]])
                for i in range(1, F):
                    swap_if(b, buf[i - 1], r[i], [h[i - 1]])
                for i in range(F):
                    xor_into(b, r[i], pls[i][k], [first[i]])
                xor_into(b, buf[F - 1], h[F - 1])
            pool.give(buf)
