import itertools
import operator

import pytest
from hypothesis import given, settings, strategies as st

from fermenc.circuit import Builder, lower
from fermenc.gadgets import (LOGDEPTH, SERIAL, GadgetError, Temp, add_into, build_add_constant,
                             build_cond_exchange_Ep, build_cond_swap_Sp, build_decrement, build_equality,
                             build_exchange_constants, build_fanout, build_increment, build_less_than,
                             build_ordered_swap_Up, reg_bits, sub_into, xor_sum)

from _util import ancillas_clear, put, reg_value, run_all

MODES = (SERIAL, LOGDEPTH)


def _compare_table(c, width, against):
    ins = []
    for a in range(1 << width):
        if against == "reg":
            for y in range(1 << width):
                ins.append(put(c, {"a": a, "b": y}))
        else:
            ins.append(put(c, {"a": a}))
    out = {}
    for s_in, (s, ph) in zip(ins, run_all(c, ins)):
        assert ph == 0 and ancillas_clear(c, s)
        assert reg_value(c, s, "a") == reg_value(c, s_in, "a")
        key = (reg_value(c, s_in, "a"), reg_value(c, s_in, "b") if against == "reg" else against)
        out[key] = reg_value(c, s, "result")
    return out


def test_equality_examples():
    c = build_equality(3)
    assert run_all(c, [put(c, {"a": 5, "b": 5})])[0][0] >> c.reg("result")[0] & 1 == 1
    assert run_all(c, [put(c, {"a": 5, "b": 4})])[0][0] >> c.reg("result")[0] & 1 == 0


@pytest.mark.parametrize("mode", MODES)
def test_equality_exhaustive(mode):
    table = _compare_table(build_equality(4, mode=mode), 4, "reg")
    assert len(table) == 256
    assert all(v == int(a == b) for (a, b), v in table.items())
    for k in range(16):
        t = _compare_table(build_equality(4, k, mode), 4, k)
        assert all(v == int(a == b) for (a, b), v in t.items())


def test_less_than_examples():
    c = build_less_than(3)
    assert reg_value(c, run_all(c, [put(c, {"a": 2, "b": 5})])[0][0], "result") == 1
    assert reg_value(c, run_all(c, [put(c, {"a": 5, "b": 5})])[0][0], "result") == 0


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("rel,op", [("<", operator.lt), ("<=", operator.le), (">", operator.gt),
                                    (">=", operator.ge)])
def test_comparators_exhaustive(mode, rel, op):
    t = _compare_table(build_less_than(4, "reg", mode, rel), 4, "reg")
    assert all(v == int(op(a, b)) for (a, b), v in t.items())
    for k in range(16):
        t = _compare_table(build_less_than(4, k, mode, rel), 4, k)
        assert all(v == int(op(a, b)) for (a, b), v in t.items())


def test_comparator_bad_relation():
    with pytest.raises(GadgetError):
        build_less_than(3, rel="!")
    with pytest.raises(GadgetError):
        build_equality(0)


def _perm_table(c, names, width):
    ins = [put(c, dict(zip(names, vals))) for vals in itertools.product(range(1 << width), repeat=len(names))]
    res = {}
    for s_in, (s, ph) in zip(ins, run_all(c, ins)):
        assert ph == 0 and ancillas_clear(c, s)
        res[tuple(reg_value(c, s_in, n) for n in names)] = tuple(reg_value(c, s, n) for n in names)
    return res


def test_exchange_examples():
    c = build_exchange_constants(6, 5, 63)
    t = {v: run_all(c, [put(c, {"x": v})])[0][0] for v in (5, 63, 17)}
    assert reg_value(c, t[5], "x") == 63 and reg_value(c, t[63], "x") == 5 and reg_value(c, t[17], "x") == 17
    c = build_exchange_constants(2, 0, 3)
    assert _perm_table(c, ["x"], 2) == {(0,): (3,), (1,): (1,), (2,): (2,), (3,): (0,)}


def test_exchange_exhaustive():
    for a, b in itertools.permutations(range(16), 2):
        t = _perm_table(build_exchange_constants(4, a, b), ["x"], 4)
        for (v,), (w,) in t.items():
            assert w == (b if v == a else a if v == b else v)
    with pytest.raises(GadgetError):
        build_exchange_constants(3, 2, 2)


def test_ordered_swap_exhaustive():
    for p in range(8):
        t = _perm_table(build_ordered_swap_Up(3, p), ["x", "y"], 3)
        for (x, y), out in t.items():
            swap = (x == p and y > p) or (y == p and x > p)
            assert out == ((y, x) if swap else (x, y))
    t = _perm_table(build_ordered_swap_Up(3, 4), ["x", "y"], 3)
    assert t[(4, 5)] == (5, 4) and t[(4, 4)] == (4, 4)


def test_cond_swap_exhaustive():
    for p in range(8):
        t = _perm_table(build_cond_swap_Sp(3, p), ["x", "y"], 3)
        for (x, y), out in t.items():
            assert out == ((y, x) if x >= p and y >= p else (x, y))


def test_cond_exchange_exhaustive():
    inf = 7
    for p in range(7):
        t = _perm_table(build_cond_exchange_Ep(3, p), ["x", "y", "z"], 3)
        for (x, y, z), out in t.items():
            ny = y
            if x < p < z:
                ny = inf if y == p else p if y == inf else y
            assert out == (x, ny, z)
    t = _perm_table(build_cond_exchange_Ep(3, 4), ["x", "y", "z"], 3)
    assert t[(3, 4, 5)] == (3, 7, 5)
    with pytest.raises(GadgetError):
        build_cond_exchange_Ep(3, 7)


@pytest.mark.parametrize("mode", MODES)
def test_add_constant_exhaustive(mode):
    for c_ in range(-16, 17):
        c = build_add_constant(4, c_, mode)
        for v in range(16):
            s, ph = run_all(c, [put(c, {"x": v})])[0]
            assert reg_value(c, s, "x") == (v + c_) % 16 and ph == 0 and ancillas_clear(c, s)


def test_add_constant_examples():
    c = build_add_constant(3, 1)
    assert reg_value(c, run_all(c, [put(c, {"x": 7})])[0][0], "x") == 0
    c = build_add_constant(4, 5)
    assert reg_value(c, run_all(c, [put(c, {"x": 3})])[0][0], "x") == 8
    inc, dec = build_increment(3), build_decrement(3)
    assert reg_value(inc, run_all(inc, [put(inc, {"x": 6})])[0][0], "x") == 7
    assert reg_value(dec, run_all(dec, [put(dec, {"x": 0})])[0][0], "x") == 7


def test_fanout():
    c = build_fanout(5)
    # copies go into cleared targets
    (on, _), (off, _) = run_all(c, [put(c, {"src": 1}), put(c, {"src": 0})])
    assert reg_value(c, on, "dst") == 0b11111 and reg_value(c, off, "dst") == 0


@pytest.mark.parametrize("mode", MODES)
def test_register_adders(mode):
    b = Builder()
    x = b.register("x", 4)
    y = b.register("y", 4)
    z = b.register("z", 4)
    add_into(b, x, reg_bits(y), mode)
    sub_into(b, z, reg_bits(y), mode)
    xor_sum(b, b.register("s", 4), reg_bits(x), reg_bits(z), False, mode)
    c = b.build()
    ins = [put(c, {"x": u, "y": v, "z": w}) for u in range(16) for v in range(16) for w in (0, 5, 15)]
    for s_in, (s, ph) in zip(ins, run_all(c, ins)):
        u, v, w = (reg_value(c, s_in, n) for n in "xyz")
        assert ph == 0 and ancillas_clear(c, s)
        assert reg_value(c, s, "x") == (u + v) % 16
        assert reg_value(c, s, "z") == (w - v) % 16
        assert reg_value(c, s, "s") == ((u + v) + (w - v)) % 16


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 9), st.data())
def test_wide_comparators_random(width, data):
    k = data.draw(st.integers(0, (1 << width) - 1))
    mode = data.draw(st.sampled_from(MODES))
    c = build_less_than(width, k, mode, "<")
    vals = data.draw(st.lists(st.integers(0, (1 << width) - 1), min_size=1, max_size=20))
    for v, (s, ph) in zip(vals, run_all(c, [put(c, {"a": v}) for v in vals])):
        assert reg_value(c, s, "result") == int(v < k) and ph == 0 and ancillas_clear(c, s)
    assert all(g.is_primitive() for g in lower(c).gates)


def test_temp_undo_restores_pool():
    b = Builder()
    b.register("q", 2)
    t = Temp(b)
    t.take(3)
    t.done()
    t.undo()
    assert len(b.pool.take(3)) == 3
