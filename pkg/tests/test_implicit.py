import math

import pytest
from hypothesis import given, settings, strategies as st

from fermenc.circuit import compose
from fermenc.fock import Capacity, FockBitstring, enumerate_capacity_states, weight_class
from fermenc.implicit import (Implicit, ImplicitLayout, LayoutError, build_block_swap, build_interleave_padded,
                              build_rotate, build_simple_interleave, lex_rank, lex_unrank, order_key, order_less,
                              pow2)
from fermenc.verify import verify_queries

from _util import run_all

B = FockBitstring.from_str


def perm(c, width):
    out = run_all(c, range(1 << width))
    assert all(ph == 0 for _, ph in out)
    mask = (1 << width) - 1
    assert all(s & ~mask == 0 for s, _ in out), "ancilla left dirty"
    res = [s for s, _ in out]
    assert sorted(res) == list(range(1 << width))
    return res


def brute_labels(M, F, k, j):
    """Level-j labels from sorting by the level-j order; blocks padded to powers of two."""
    states = enumerate_capacity_states(M, Capacity(F, k))
    out, pos, prev = {}, 0, None
    for x in sorted(states, key=lambda x: order_key(j, x)):
        blk = (x.weight, x.bits[:j])
        if blk != (prev and prev[0]):
            if prev is not None:
                pos = prev[1] + pow2(prev[2])
            prev = (blk, pos, 0)
        out[x] = prev[1] + prev[2]
        prev = (blk, prev[1], prev[2] + 1)
    return out


def test_order_examples():
    assert order_less(0, B("0011"), B("0101"))
    assert order_less(1, B("1001"), B("0011"))
    level0 = sorted(enumerate_capacity_states(4, Capacity(2, 1)), key=lambda x: order_key(0, x))
    assert [str(x) for x in level0[:5]] == ["0001", "0010", "0100", "1000", "0011"]
    assert [str(x) for x in level0][-1] == "1110"


def test_weight_two_block_at_level_one():
    got = sorted(weight_class(4, 2), key=lambda x: order_key(1, x))
    assert [str(x) for x in got] == ["1001", "1010", "1100", "0011", "0101", "0110"]


def test_label_example():
    L = ImplicitLayout(4, 2, 1)
    assert L.label(B("0011"), 0) == 4
    assert L.count == 14


@pytest.mark.parametrize("M", [4, 5, 6])
def test_labels_match_brute_force(M):
    for F in range(1, M):
        for k in (0, 1):
            L = ImplicitLayout(M, F, k)
            for j in range(M + 1):
                want = brute_labels(M, F, k, j)
                for x, v in want.items():
                    assert L.label(x, j) == v
                    assert L.unlabel(v, j) == x


def test_unlabel_padding_is_none():
    L = ImplicitLayout(4, 2, 0)
    used = {L.label(x, 0) for x in weight_class(4, 2)}
    assert any(L.unlabel(v, 0) is None for v in range(L.size) if v not in used)


def test_lex_rank_round_trip():
    for n in range(1, 8):
        for w in range(n + 1):
            for r, x in enumerate(sorted(weight_class(n, w), key=lambda s: s.bits)):
                assert lex_rank(x.bits) == r
                assert lex_unrank(n, w, r) == x.bits


def test_rotate_examples():
    p = perm(build_rotate(0, 1, 4, 3), 3)
    assert p[:4] == [1, 2, 3, 0] and p[5] == 5
    assert perm(build_rotate(2, 0, 5, 3), 3) == list(range(8))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_rotate_random(data):
    i = data.draw(st.integers(0, 62))
    n = data.draw(st.integers(1, 64 - i))
    k = data.draw(st.integers(0, n - 1))
    p = perm(build_rotate(i, k, n, 6), 6)
    for v in range(64):
        assert p[v] == (i + (v - i + k) % n if i <= v < i + n else v)


def _block_swap_oracle(pa, la, pb, lb, N):
    seq = list(range(N))
    a, mid, bb = seq[pa:pa + la], seq[pa + la:pb], seq[pb:pb + lb]
    new = seq[:pa] + bb + mid + a + seq[pb + lb:]
    out = [0] * N
    for pos, v in enumerate(new):
        out[v] = pos
    return out


def test_block_swap_examples():
    assert perm(build_block_swap(2, 1, 3, 1, 3), 3) == [0, 1, 3, 2, 4, 5, 6, 7]
    c = build_block_swap(1, 2, 5, 3, 4)
    p = perm(compose(c, c), 4)
    assert p != list(range(16))
    fwd = perm(c, 4)
    back = perm(build_block_swap(1, 3, 6, 2, 4), 4)
    assert [back[fwd[v]] for v in range(16)] == list(range(16))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_block_swap_random(data):
    pa = data.draw(st.integers(0, 60))
    la = data.draw(st.integers(1, 62 - pa))
    pb = data.draw(st.integers(pa + la, 63))
    lb = data.draw(st.integers(1, 64 - pb))
    assert perm(build_block_swap(pa, la, pb, lb, 6), 6) == _block_swap_oracle(pa, la, pb, lb, 64)


def test_interleave_example():
    assert perm(build_simple_interleave(2, 1, 2), 2) == [0, 2, 1, 3]
    fwd = perm(build_simple_interleave(3, 2, 5), 5)
    back = perm(build_simple_interleave(3, 2, 5, inverse=True), 5)
    assert [back[fwd[v]] for v in range(32)] == list(range(32))


@pytest.mark.parametrize("n,ln", [(1, 1), (2, 2), (3, 1), (3, 4), (5, 2), (7, 1), (4, 8)])
def test_simple_interleave_oracle(n, ln):
    width = max(1, (2 * pow2(n) * ln - 1).bit_length())
    p = perm(build_simple_interleave(n, ln, width), width)
    for i in range(n):
        for e in range(ln):
            assert p[i * ln + e] == 2 * ln * i + e
            assert p[n * ln + i * ln + e] == 2 * ln * i + ln + e


@pytest.mark.parametrize("n,la,lb", [(1, 1, 2), (2, 2, 2), (3, 1, 4), (3, 4, 1), (5, 2, 8), (6, 1, 1)])
def test_interleave_padded_oracle(n, la, lb):
    U = max(la, lb)
    width = max(1, (2 * pow2(n) * U - 1).bit_length())
    p = perm(build_interleave_padded(n, la, lb, width), width)
    for i in range(n):
        for e in range(la):
            assert p[i * la + e] == 2 * U * i + e
        for e in range(lb):
            assert p[n * la + i * lb + e] == 2 * U * i + U + e


def test_layout_errors():
    with pytest.raises(LayoutError):
        build_simple_interleave(5, 4, 4)
    with pytest.raises(LayoutError):
        build_block_swap(0, 4, 10, 8, 4)


@pytest.mark.parametrize("M", [4, 5, 6])
def test_level_steps_carry_labels(M):
    for F in range(1, M):
        for k in (0, 1):
            enc = Implicit(M, F, k)
            L = enc.layout
            for j in range(M):
                p = perm(enc.layer_step(j), L.width)
                inv = perm(enc.layer_step(j, inverse=True), L.width)
                for x in enumerate_capacity_states(M, Capacity(F, k)):
                    assert p[L.label(x, j)] == L.label(x, j + 1)
                assert [inv[p[v]] for v in range(1 << L.width)] == list(range(1 << L.width))


def test_logical_x_example():
    enc = Implicit(4, 2, 1)
    L = enc.layout
    c = enc.logical_x(1)
    p = perm(c, L.width)
    assert L.unlabel(p[L.label(B("0100"), 1)], 1) == B("1100")
    assert p[L.label(B("1000"), 1)] == L.label(B("1000"), 1)


def test_logical_z_phase():
    enc = Implicit(4, 2, 1)
    L = enc.layout
    c = enc.logical_z(2)
    for x in enumerate_capacity_states(4, Capacity(2, 1)):
        (_, ph), = run_all(c, [L.label(x, 2)])
        assert ph == 2 * x[2]


@pytest.mark.parametrize("M", [4, 5, 6])
def test_queries_exhaustive(M):
    for F in range(1, M):
        for k in (0, 1):
            rep = verify_queries(Implicit(M, F, k))
            assert rep.ok, [str(m) for _, m in rep.failures[:3]]


def test_even_weight_full_rank():
    enc = Implicit(5, 2, 1)
    c = enc.sgn_rank(5)
    evens = [x for x in enumerate_capacity_states(5, Capacity(2, 1)) if x.weight % 2 == 0]
    assert all(ph == 0 for _, ph in run_all(c, [enc.layout.label(x, 0) for x in evens]))


def test_flip_twice_identity():
    enc = Implicit(5, 2, 1)
    for j in range(1, 6):
        c = compose(enc.bit_flip(j), enc.bit_flip(j))
        vals = [enc.layout.label(x, 0) for x in enumerate_capacity_states(5, Capacity(2, 1))]
        assert run_all(c, vals) == [(v, 0) for v in vals]


def test_register_position_rejected():
    enc = Implicit(4, 2, 0)
    b = enc.new_builder()
    with pytest.raises(TypeError):
        enc.emit_bit_flip(b, [(0, True)])


@pytest.mark.parametrize("M", range(6, 25))
def test_label_width_budget(M):
    F = math.ceil(M / 3)
    L = ImplicitLayout(M, F, 1)
    assert L.width <= math.ceil(math.log2(L.count)) + 4
