"""Reversible comparison and arithmetic gadgets.

Everything here works on *literals*: a literal is either a Python bool (a
known constant) or a ``(qubit, polarity)`` pair whose value is ``bit`` when
polarity is True and ``not bit`` otherwise.  Operands are LSB-first lists of
literals, so one code path covers register-vs-constant and
register-vs-register cases, and constants fold away at build time.

Functions that produce a literal may allocate scratch qubits through a
`Temp`; callers use the value and then call ``Temp.undo`` to run the
recorded gates backwards and hand the qubits back to the pool.
"""

from __future__ import annotations

from typing import Sequence, Union

from .circuit import Builder, Circuit, Gate, Pool, register_macro

Lit = Union[bool, tuple[int, bool]]

SERIAL = "serial"
LOGDEPTH = "logdepth"
MODES = (SERIAL, LOGDEPTH)


class GadgetError(ValueError):
    pass


# ---------------------------------------------------------------------------
# literals


def neg(x: Lit) -> Lit:
    if isinstance(x, bool):
        return not x
    return (x[0], not x[1])


def const_bits(value: int, width: int) -> list[Lit]:
    if value < 0 or value >> width:
        raise GadgetError(f"constant {value} does not fit {width} bits")
    return [bool((value >> i) & 1) for i in range(width)]


def reg_bits(qubits: Sequence[int]) -> list[Lit]:
    return [(q, True) for q in qubits]


def operand(x, width: int) -> list[Lit]:
    """Int constant or literal list, padded with False to `width`."""
    if isinstance(x, int) and not isinstance(x, bool):
        return const_bits(x, width)
    x = list(x)
    if len(x) > width:
        if any(v is not False for v in x[width:]):
            raise GadgetError("operand wider than target")
        x = x[:width]
    return x + [False] * (width - len(x))


def is_const(xs: Sequence[Lit]) -> bool:
    return all(isinstance(v, bool) for v in xs)


def const_value(xs: Sequence[Lit]) -> int:
    return sum(int(v) << i for i, v in enumerate(xs))


class Temp:
    """Scratch qubits plus the gate segment that computed them."""

    def __init__(self, b: Builder, pool: Pool | None = None):
        self.b = b
        self.pool = pool if pool is not None else b.pool
        self.taken: list[int] = []
        self.start = b.mark()
        self.seg: list[Gate] | None = None

    def take1(self) -> int:
        q = self.pool.take1()
        self.taken.append(q)
        return q

    def take(self, n: int) -> list[int]:
        qs = self.pool.take(n)
        self.taken.extend(qs)
        return qs

    def done(self) -> "Temp":
        self.seg = self.b.since(self.start)
        return self

    def undo(self) -> None:
        if self.seg is None:
            raise RuntimeError("Temp.undo before done")
        self.b.emit_inverse(self.seg)
        self.pool.give(self.taken)
        self.taken = []


def _controls(lits: Sequence[Lit]) -> tuple[tuple[int, bool], ...] | None:
    """Drop True constants; None if any control is constant False."""
    out = []
    for x in lits:
        if x is True:
            continue
        if x is False:
            return None
        out.append(x)
    # x AND x -> x, x AND not x -> never
    seen: dict[int, bool] = {}
    uniq = []
    for q, p in out:
        if q in seen:
            if seen[q] != p:
                return None
            continue
        seen[q] = p
        uniq.append((q, p))
    return tuple(uniq)


def xor_into(b: Builder, target: int, x: Lit, ctrl: Sequence[Lit] = ()) -> None:
    """target ^= x AND ctrl..."""
    cs = _controls([x, *ctrl])
    if cs is None:
        return
    if any(q == target for q, _ in cs):
        raise GadgetError("target used as its own control")
    b.add(Gate("MCX" if cs else "X", (target,), cs))


def phase_flip(b: Builder, lits: Sequence[Lit]) -> None:
    """Multiply the phase by -1 when every literal holds."""
    cs = _controls(lits)
    if cs is None:
        return
    if not cs:
        b.global_phase += 2
        return
    (q, p), rest = cs[0], cs[1:]
    if not p:
        b.x(q)
    b.z(q, rest)
    if not p:
        b.x(q)


def swap_if(b: Builder, x: int, y: int, ctrl: Sequence[Lit] = ()) -> None:
    cs = _controls(ctrl)
    if cs is None or x == y:
        return
    b.swap(x, y, cs)


def and2(b: Builder, t: Temp, x: Lit, y: Lit) -> Lit:
    if x is False or y is False:
        return False
    if x is True:
        return y
    if y is True:
        return x
    if x[0] == y[0]:
        return x if x[1] == y[1] else False
    q = t.take1()
    b.add(Gate("MCX", (q,), (x, y)))
    return (q, True)


def or2(b: Builder, t: Temp, x: Lit, y: Lit) -> Lit:
    return neg(and2(b, t, neg(x), neg(y)))


def xor2(b: Builder, t: Temp, x: Lit, y: Lit) -> Lit:
    if isinstance(x, bool):
        return neg(y) if x else y
    if isinstance(y, bool):
        return neg(x) if y else x
    if x[0] == y[0]:
        return x[1] != y[1]
    q = t.take1()
    xor_into(b, q, x)
    xor_into(b, q, y)
    return (q, True)


def and_all(b: Builder, t: Temp, lits: Sequence[Lit]) -> Lit:
    """AND of many literals via one wide MCX (lowered to a log-depth tree)."""
    cs = _controls(lits)
    if cs is None:
        return False
    if not cs:
        return True
    if len(cs) == 1:
        return cs[0]
    q = t.take1()
    b.add(Gate("MCX", (q,), cs))
    return (q, True)


def xor_all(b: Builder, t: Temp, lits: Sequence[Lit]) -> Lit:
    """Parity of literals by a balanced tree of fresh qubits."""
    layer = list(lits)
    if not layer:
        return False
    while len(layer) > 1:
        nxt = [xor2(b, t, layer[i], layer[i + 1]) for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def maj(b: Builder, t: Temp, x: Lit, y: Lit, z: Lit) -> Lit:
    """Majority of three literals; one Toffoli in the generic case."""
    for a, c, k in ((x, y, z), (x, z, y), (y, z, x)):
        if isinstance(k, bool):
            return or2(b, t, a, c) if k else and2(b, t, a, c)
    for a, c, k in ((x, y, z), (x, z, y), (y, z, x)):
        if a[0] == c[0]:
            return a if a[1] == c[1] else k
    # maj = x ^ ((x ^ y) & (x ^ z)); the xors are done in place and undone
    qx, px = x
    b.cx(qx, y[0])
    b.cx(qx, z[0])
    q = t.take1()
    b.add(Gate("MCX", (q,), ((y[0], px == y[1]), (z[0], px == z[1]))))
    xor_into(b, q, x)
    b.cx(qx, y[0])
    b.cx(qx, z[0])
    return (q, True)


# ---------------------------------------------------------------------------
# comparisons


def lt(b: Builder, t: Temp, xs, ys, mode: str = LOGDEPTH) -> Lit:
    """Literal for [x < y] (unsigned)."""
    width = max(_w(xs), _w(ys))
    xs, ys = operand(xs, width), operand(ys, width)
    if width == 0:
        return False
    if is_const(xs) and is_const(ys):
        return const_value(xs) < const_value(ys)
    if mode == SERIAL:
        borrow: Lit = False
        for xi, yi in zip(xs, ys):
            borrow = maj(b, t, neg(xi), yi, borrow)
        return borrow
    if mode != LOGDEPTH:
        raise GadgetError(f"unknown mode {mode!r}")
    return _lt_tree(b, t, xs, ys, 0, width, need_eq=False)[0]


def _lt_tree(b, t, xs, ys, lo, hi, need_eq):
    """(lt, eq) of the slice [lo, hi); eq only when asked for."""
    if hi - lo == 1:
        xi, yi = xs[lo], ys[lo]
        lt_i = and2(b, t, neg(xi), yi)
        eq_i = neg(xor2(b, t, xi, yi)) if need_eq else None
        return lt_i, eq_i
    mid = (lo + hi) // 2
    lt_l, eq_l = _lt_tree(b, t, xs, ys, lo, mid, need_eq)
    lt_h, eq_h = _lt_tree(b, t, xs, ys, mid, hi, True)
    # the two terms are exclusive so xor serves as or
    lt_n = xor2(b, t, lt_h, and2(b, t, eq_h, lt_l))
    eq_n = and2(b, t, eq_h, eq_l) if need_eq else None
    return lt_n, eq_n


def le(b: Builder, t: Temp, xs, ys, mode: str = LOGDEPTH) -> Lit:
    return neg(lt(b, t, ys, xs, mode))


def gt(b: Builder, t: Temp, xs, ys, mode: str = LOGDEPTH) -> Lit:
    return lt(b, t, ys, xs, mode)


def ge(b: Builder, t: Temp, xs, ys, mode: str = LOGDEPTH) -> Lit:
    return neg(lt(b, t, xs, ys, mode))


def eq(b: Builder, t: Temp, xs, ys, mode: str = LOGDEPTH) -> Lit:
    """Literal for [x == y]."""
    width = max(_w(xs), _w(ys))
    xs, ys = operand(xs, width), operand(ys, width)
    bits = [neg(xor2(b, t, xi, yi)) for xi, yi in zip(xs, ys)]
    return and_all(b, t, bits)


def compare(b: Builder, t: Temp, xs, rel: str, ys, mode: str = LOGDEPTH) -> Lit:
    if rel == "!=":
        return neg(eq(b, t, xs, ys, mode))
    fn = {"<": lt, "<=": le, ">": gt, ">=": ge, "==": eq}[rel]
    return fn(b, t, xs, ys, mode)


def _w(x) -> int:
    if isinstance(x, int) and not isinstance(x, bool):
        return max(1, x.bit_length())
    return len(x)


# ---------------------------------------------------------------------------
# addition


def _prefix(b, t, nodes):
    """Brent-Kung inclusive prefix over (G, P) literal pairs, low index first."""
    a = list(nodes)
    n = len(a)

    def comb(hi, lo):
        g = xor2(b, t, hi[0], and2(b, t, hi[1], lo[0]))
        p = and2(b, t, hi[1], lo[1])
        return (g, p)

    s = 2
    while s <= n:
        for i in range(s - 1, n, s):
            a[i] = comb(a[i], a[i - s // 2])
        s *= 2
    s //= 2
    while s >= 2:
        for i in range(s - 1 + s // 2, n, s):
            a[i] = comb(a[i], a[i - s // 2])
        s //= 2
    return a


def carries(b: Builder, t: Temp, xs: list[Lit], ys: list[Lit], cin: Lit = False,
            mode: str = LOGDEPTH, need_top: bool = False) -> list[Lit]:
    """c_i = carry into bit i of x + y + cin, for i < len(xs) (+1 if need_top)."""
    n = len(xs)
    top = n if need_top else n - 1
    if mode == SERIAL:
        cs = [cin]
        for i in range(top):
            cs.append(maj(b, t, xs[i], ys[i], cs[-1]))
        return cs
    nodes = [(cin, False)]
    for i in range(top):
        nodes.append((and2(b, t, xs[i], ys[i]), xor2(b, t, xs[i], ys[i])))
    return [g for g, _ in _prefix(b, t, nodes)]


def xor_sum(b: Builder, target: Sequence[int], xs, ys, cin: Lit = False,
            mode: str = LOGDEPTH, pool: Pool | None = None) -> None:
    """target ^= (x + y + cin) mod 2**len(target); scratch restored."""
    w = len(target)
    if w == 0:
        return
    xs, ys = operand(xs, w), operand(ys, w)
    t = Temp(b, pool)
    cs = carries(b, t, xs, ys, cin, mode)
    s = [xor2(b, t, xi, yi) for xi, yi in zip(xs, ys)]
    t.done()
    for i, q in enumerate(target):
        xor_into(b, q, s[i])
        xor_into(b, q, cs[i])
    t.undo()


def add_into(b: Builder, reg: Sequence[int], ys, mode: str = SERIAL,
             pool: Pool | None = None) -> None:
    """reg += y (mod 2**len(reg)) in place.

    `y` must not share qubits with `reg`.  A controlled add is an add of
    (ctrl AND y); for a constant y that costs no extra gates.
    """
    w = len(reg)
    if w == 0:
        return
    ys = operand(ys, w)
    if is_const(ys):
        if const_value(ys) == 0:
            return
    pool = pool if pool is not None else b.pool
    xs = reg_bits(reg)
    if mode == LOGDEPTH:
        s = pool.take(w)
        xor_sum(b, s, xs, ys, False, LOGDEPTH, pool)
        # reg ^= s - y, which is reg itself, so reg becomes 0
        xor_sum(b, reg, reg_bits(s), [neg(v) for v in ys], True, LOGDEPTH, pool)
        for q, r in zip(s, reg):
            b.swap(q, r)
        pool.give(s)
        return
    # ripple: carries ascending, then sum bits and carry uncompute descending
    temps: list[Temp] = []
    cs: list[Lit] = [False]
    for i in range(w - 1):
        tt = Temp(b, pool)
        cs.append(maj(b, tt, xs[i], ys[i], cs[-1]))
        temps.append(tt.done())
    for i in reversed(range(w)):
        if i < w - 1:
            temps[i].undo()
        xor_into(b, reg[i], ys[i])
        xor_into(b, reg[i], cs[i])


def sub_into(b: Builder, reg: Sequence[int], ys, mode: str = SERIAL, pool: Pool | None = None) -> None:
    """reg -= y as ~(~reg + y)."""
    for q in reg:
        b.x(q)
    add_into(b, reg, ys, mode, pool)
    for q in reg:
        b.x(q)


def add_const(b: Builder, reg: Sequence[int], c: int, ctrl: Lit = True,
              mode: str = SERIAL, pool: Pool | None = None) -> None:
    w = len(reg)
    if w == 0:
        return
    c %= 1 << w
    add_into(b, reg, [ctrl if bit else False for bit in const_bits(c, w)], mode, pool)


# ---------------------------------------------------------------------------
# swaps and exchanges


def exchange(b: Builder, reg: Sequence[int], a, c, ctrl: Sequence[Lit] = (),
             mode: str = LOGDEPTH, pool: Pool | None = None) -> None:
    """|a> <-> |c> on `reg` when ctrl holds; other values fixed.

    `a` and `c` are constants or literal lists and must differ whenever the
    exchange can fire.  One flag qubit is used and returned clean.
    """
    w = len(reg)
    if w == 0:
        return
    av, cv = operand(a, w), operand(c, w)
    if is_const(av) and is_const(cv) and const_value(av) == const_value(cv):
        raise GadgetError("exchange of a value with itself")
    pool = pool if pool is not None else b.pool
    f = pool.take1()

    def flag():
        t = Temp(b, pool)
        ea = eq(b, t, reg_bits(reg), av, mode)
        ec = eq(b, t, reg_bits(reg), cv, mode)
        t.done()
        xor_into(b, f, ea)
        xor_into(b, f, ec)
        t.undo()

    flag()
    t = Temp(b, pool)
    diff = [xor2(b, t, x, y) for x, y in zip(av, cv)]
    t.done()
    with b.payload():
        for q, d in zip(reg, diff):
            xor_into(b, q, d, [(f, True), *ctrl])
    t.undo()
    flag()
    pool.give([f])


def swap_regs(b: Builder, xs: Sequence[int], ys: Sequence[int], ctrl: Sequence[Lit] = ()) -> None:
    with b.payload():
        for x, y in zip(xs, ys):
            swap_if(b, x, y, ctrl)


def ordered_swap(b: Builder, x: Sequence[int], y: Sequence[int], p, ctrl: Sequence[Lit] = (),
                 mode: str = LOGDEPTH, pool: Pool | None = None) -> None:
    """U_p: swap x, y iff one equals p and the other is greater."""
    pool = pool if pool is not None else b.pool
    s = pool.take1()
    w = len(x)
    pv = operand(p, w)

    def flag():
        t = Temp(b, pool)
        ex = eq(b, t, reg_bits(x), pv, mode)
        gy = gt(b, t, reg_bits(y), pv, mode)
        ey = eq(b, t, reg_bits(y), pv, mode)
        gx = gt(b, t, reg_bits(x), pv, mode)
        t.done()
        xor_into(b, s, ex, [gy])
        xor_into(b, s, ey, [gx])
        t.undo()

    flag()
    swap_regs(b, x, y, [(s, True), *ctrl])
    flag()
    pool.give([s])


def cond_swap(b: Builder, x: Sequence[int], y: Sequence[int], p, ctrl: Sequence[Lit] = (),
              mode: str = LOGDEPTH, pool: Pool | None = None) -> None:
    """S_p: swap x, y iff both are >= p."""
    pool = pool if pool is not None else b.pool
    s = pool.take1()
    w = len(x)
    pv = operand(p, w)

    def flag():
        t = Temp(b, pool)
        gx = ge(b, t, reg_bits(x), pv, mode)
        gy = ge(b, t, reg_bits(y), pv, mode)
        t.done()
        xor_into(b, s, gx, [gy])
        t.undo()

    flag()
    swap_regs(b, x, y, [(s, True), *ctrl])
    flag()
    pool.give([s])


def cond_exchange(b: Builder, x, y: Sequence[int], z, p, ctrl: Sequence[Lit] = (),
                  mode: str = LOGDEPTH, pool: Pool | None = None) -> None:
    """E_p: on y exchange p <-> all-ones iff x < p and z > p.

    `x` may be None for a hard-coded minus infinity.
    """
    pool = pool if pool is not None else b.pool
    w = len(y)
    pv = operand(p, w)
    t = Temp(b, pool)
    cx = True if x is None else lt(b, t, reg_bits(x), pv, mode)
    cz = gt(b, t, reg_bits(z), pv, mode)
    c = and2(b, t, cx, cz)
    t.done()
    exchange(b, y, pv, (1 << w) - 1, [c, *ctrl], mode, pool)
    t.undo()


def fanout(b: Builder, src: Lit, targets: Sequence[int]) -> None:
    """targets[i] ^= src through a balanced CX tree (targets start at 0)."""
    if isinstance(src, bool):
        if src:
            for q in targets:
                b.x(q)
        return
    holders: list[Lit] = [src]
    rest = list(targets)
    while rest:
        new = []
        for h in holders:
            if not rest:
                break
            q = rest.pop(0)
            xor_into(b, q, h)
            new.append((q, True))
        holders += new


def fanout_reg(b: Builder, src: Sequence[Lit], copies: Sequence[Sequence[int]]) -> None:
    for i, s in enumerate(src):
        fanout(b, s, [c[i] for c in copies])


# ---------------------------------------------------------------------------
# standalone circuits


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise GadgetError(f"unknown mode {mode!r}")


def _two_operand(width: int, against, name_b: str = "b"):
    if width < 1:
        raise GadgetError("width must be at least 1")
    bld = Builder()
    a = bld.register("a", width)
    if isinstance(against, int):
        const_bits(against, width)
        ys = against
    else:
        ys = reg_bits(bld.register(name_b, width))
    r = bld.register("result", 1)[0]
    return bld, a, ys, r


def _xor_result(bld, a, ys, r, fn, mode):
    t = Temp(bld)
    v = fn(bld, t, reg_bits(a), ys, mode)
    t.done()
    xor_into(bld, r, v)
    t.undo()
    return bld.build()


def build_equality(width: int, against="reg", mode: str = SERIAL) -> Circuit:
    """result ^= [a == against]; `against` is an int or "reg" for a second register."""
    _check_mode(mode)
    bld, a, ys, r = _two_operand(width, against if isinstance(against, int) else None)
    return _xor_result(bld, a, ys, r, eq, mode)


def build_less_than(width: int, against="reg", mode: str = SERIAL, rel: str = "<") -> Circuit:
    """result ^= [a REL against] for REL in <, <=, >, >=."""
    _check_mode(mode)
    fns = {"<": lt, "<=": le, ">": gt, ">=": ge}
    if rel not in fns:
        raise GadgetError(f"unknown relation {rel!r}")
    bld, a, ys, r = _two_operand(width, against if isinstance(against, int) else None)
    return _xor_result(bld, a, ys, r, fns[rel], mode)


def build_exchange_constants(width: int, a: int, c: int) -> Circuit:
    if a == c:
        raise GadgetError("exchange needs two different constants")
    bld = Builder()
    x = bld.register("x", width)
    const_bits(a, width), const_bits(c, width)
    exchange(bld, x, a, c)
    return bld.build()


def _pair(width: int, names=("x", "y")):
    bld = Builder()
    return bld, [bld.register(n, width) for n in names]


def build_ordered_swap_Up(width: int, p: int, mode: str = LOGDEPTH) -> Circuit:
    bld, (x, y) = _pair(width)
    ordered_swap(bld, x, y, p, mode=mode)
    return bld.build()


def build_cond_swap_Sp(width: int, p: int, mode: str = LOGDEPTH) -> Circuit:
    bld, (x, y) = _pair(width)
    cond_swap(bld, x, y, p, mode=mode)
    return bld.build()


def build_cond_exchange_Ep(width: int, p: int, mode: str = LOGDEPTH) -> Circuit:
    if p == (1 << width) - 1:
        raise GadgetError("p must differ from the all-ones value")
    bld, (x, y, z) = _pair(width, ("x", "y", "z"))
    cond_exchange(bld, x, y, z, p, mode=mode)
    return bld.build()


def build_add_constant(width: int, c: int, mode: str = SERIAL) -> Circuit:
    bld = Builder()
    x = bld.register("x", width)
    add_const(bld, x, c, mode=mode)
    return bld.build()


def build_increment(width: int, mode: str = SERIAL) -> Circuit:
    return build_add_constant(width, 1, mode)


def build_decrement(width: int, mode: str = SERIAL) -> Circuit:
    return build_add_constant(width, -1, mode)


def build_fanout(copies: int) -> Circuit:
    bld = Builder()
    src = bld.register("src", 1)[0]
    dst = bld.register("dst", copies)
    fanout(bld, (src, True), dst)
    return bld.build()


# ---------------------------------------------------------------------------
# macros: gadgets addressable by name in serialized circuits


def _m_cmp(fn):
    def expand(b, ops, params):
        ys = params["c"] if "c" in params else reg_bits(ops["b"])
        t = Temp(b)
        v = fn(b, t, reg_bits(ops["a"]), ys, params.get("mode", SERIAL))
        t.done()
        xor_into(b, ops["r"][0], v)
        t.undo()
    return expand


def _s_cmp(op):
    def sem(vals, params):
        y = params["c"] if "c" in params else vals["b"]
        return {"r": vals["r"] ^ int(op(vals["a"], y))}
    return sem


def _register_all() -> None:
    import operator as o

    for name, fn, op in (("EQ_CONST", eq, o.eq), ("EQ_REG", eq, o.eq),
                         ("LT_CONST", lt, o.lt), ("LT_REG", lt, o.lt),
                         ("LEQ", le, o.le), ("GEQ", ge, o.ge)):
        register_macro(name, _m_cmp(fn), _s_cmp(op))

    def add_expand(b, ops, params):
        add_const(b, ops["a"], params["c"], mode=params.get("mode", SERIAL))

    def add_sem(vals, params, w_key="a"):
        return {"a": (vals["a"] + params["c"]) % (1 << params["w"])}

    def add_inv(params):
        q = dict(params)
        q["c"] = (-params["c"]) % (1 << params["w"])
        return "ADD_CONST", q

    register_macro("ADD_CONST", add_expand, add_sem, add_inv)
    register_macro("INC", lambda b, ops, p: add_const(b, ops["a"], 1),
                   lambda v, p: {"a": (v["a"] + 1) % (1 << p["w"])}, lambda p: ("DEC", p))
    register_macro("DEC", lambda b, ops, p: add_const(b, ops["a"], -1),
                   lambda v, p: {"a": (v["a"] - 1) % (1 << p["w"])}, lambda p: ("INC", p))

    def exch_sem(vals, params):
        x = vals["a"]
        if x == params["x"]:
            x = params["y"]
        elif x == params["y"]:
            x = params["x"]
        return {"a": x}

    register_macro("EXCHANGE_CONSTS", lambda b, ops, p: exchange(b, ops["a"], p["x"], p["y"]), exch_sem)

    def up_sem(vals, params):
        x, y, p = vals["x"], vals["y"], params["p"]
        if (x == p and y > p) or (y == p and x > p):
            x, y = y, x
        return {"x": x, "y": y}

    def sp_sem(vals, params):
        x, y, p = vals["x"], vals["y"], params["p"]
        if x >= p and y >= p:
            x, y = y, x
        return {"x": x, "y": y}

    def ep_sem(vals, params):
        x, y, z, p = vals["x"], vals["y"], vals["z"], params["p"]
        inf = (1 << params["w"]) - 1
        if x < p < z:
            y = inf if y == p else p if y == inf else y
        return {"y": y}

    register_macro("ORDERED_SWAP_Up", lambda b, ops, p: ordered_swap(b, ops["x"], ops["y"], p["p"]), up_sem)
    register_macro("COND_SWAP_Sp", lambda b, ops, p: cond_swap(b, ops["x"], ops["y"], p["p"]), sp_sem)
    register_macro("COND_EXCHANGE_Ep",
                   lambda b, ops, p: cond_exchange(b, ops["x"], ops["y"], ops["z"], p["p"]), ep_sem)

    def fan_sem(vals, params):
        n = params["n"]
        return {"dst": vals["dst"] ^ (((1 << n) - 1) if vals["src"] else 0)}

    register_macro("FANOUT", lambda b, ops, p: fanout(b, (ops["src"][0], True), ops["dst"]), fan_sem)


_register_all()
