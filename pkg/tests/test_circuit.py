import cmath
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from fermenc.circuit import (BasisPhaseState, Builder, Circuit, CircuitError, Gate, ParseError, StateError,
                             compose, controlled, depth, deserialize, empty_circuit, gate_count, invert, lower,
                             read_registers, serialize, simulate, simulate_sparse, state_from_registers, to_text)
from fermenc.fock import FockBitstring
from fermenc.sorted_list import SortedList

from _util import run_all


def _one(kind_fn, n=3):
    b = Builder()
    b.register("q", n)
    kind_fn(b)
    return b.build()


def test_z_phase():
    c = _one(lambda b: b.z(1))
    assert simulate(c, BasisPhaseState(0b010, 3)).phase == 2
    assert simulate(c, BasisPhaseState(0b000, 3)).phase == 0


def test_closed_control_off():
    c = _one(lambda b: b.x(2, [(0, True)]))
    assert simulate(c, BasisPhaseState(0b000, 3)).bits == 0
    assert simulate(c, BasisPhaseState(0b001, 3)).bits == 0b101


def test_open_control():
    c = _one(lambda b: b.x(2, [(0, False)]))
    assert simulate(c, BasisPhaseState(0b000, 3)).bits == 0b100


def test_s_phase():
    c = _one(lambda b: b.s(0))
    assert simulate(c, BasisPhaseState(1, 3)).phase == 1
    assert simulate(invert(c), BasisPhaseState(1, 3)).phase == 3


def test_h_is_not_a_basis_gate():
    c = _one(lambda b: b.h(0))
    with pytest.raises(StateError):
        simulate(c, BasisPhaseState(0, 3))


def test_depth_examples():
    assert depth(empty_circuit()) == 0
    assert depth(_one(lambda b: (b.x(0), b.x(1)))) == 1
    assert depth(_one(lambda b: (b.x(0), b.x(0)))) == 2


def test_gate_count_examples():
    assert gate_count(empty_circuit())["by_kind"] == {}
    c = _one(lambda b: (b.x(0), b.cx(0, 1), b.x(2, [(0, True), (1, True)])))
    gc = gate_count(c)
    assert gc["by_kind"] == {"X": 1, "MCX1": 1, "MCX2": 1}
    assert gc["total"] == 2 + gc["toffoli_cost"]


def test_sorted_list_gate_total_in_range():
    enc = SortedList(8, 2)
    for j in range(1, 9):
        total = gate_count(enc.sgn_rank(j))["total"]
        assert 1 <= total <= 64 * 2 * math.ceil(math.log2(9))


def test_invert_examples():
    c = _one(lambda b: b.x(0))
    assert invert(c).gates == c.gates
    enc = SortedList(6, 3)
    f = enc.bit_flip(3)
    assert invert(invert(f)) == f


def test_round_trip_random_states():
    enc = SortedList(6, 3)
    c = compose(enc.bit_flip(2), invert(enc.bit_flip(2)))
    rng = random.Random(7)
    ins = [rng.getrandbits(c.num_qubits) for _ in range(100)]
    assert [s for s, _ in run_all(c, ins)] == ins
    assert all(p == 0 for _, p in run_all(c, ins))


def test_compose_requires_same_layout():
    with pytest.raises(CircuitError):
        compose(_one(lambda b: b.x(0), 3), _one(lambda b: b.x(0), 4))


def test_lower_equality_macro_matches():
    b = Builder()
    a = b.register("a", 3)
    y = b.register("b", 3)
    r = b.register("r", 1)
    b.macro("EQ_REG", {"a": a, "b": y, "r": r}, {"mode": "serial"})
    c = b.build()
    lc = lower(c)
    assert all(g.is_primitive() for g in lc.gates)
    for v in range(64):
        s0 = BasisPhaseState(v, c.num_qubits)
        want = simulate(c, s0)
        got = run_all(lc, [v])[0]
        assert got == (want.bits, want.phase)
        assert (want.bits >> 6) & 1 == int((v & 7) == (v >> 3))


def test_lower_trivial_cases():
    assert lower(empty_circuit()).gates == ()
    c = _one(lambda b: b.x(0))
    assert lower(c).gates == c.gates


def test_lower_wide_controls():
    b = Builder()
    q = b.register("q", 6)
    b.x(q[5], [(q[i], i % 2 == 0) for i in range(5)])
    b.z(q[4], [(q[i], True) for i in range(4)])
    b.swap(q[0], q[1], [(q[2], True), (q[3], True), (q[5], False)])
    c = b.build()
    lc = lower(c)
    assert all(g.is_primitive() for g in lc.gates)
    for v in range(64):
        want = simulate(c, BasisPhaseState(v, 6))
        s, ph = run_all(lc, [v])[0]
        assert (s & 63, ph) == (want.bits, want.phase)
        assert s >> 6 == 0


def test_parallel_comparisons_have_flat_depth():
    from fermenc.gadgets import Temp, le, reg_bits, phase_flip

    def build(F):
        b = Builder()
        regs = [b.register(f"r{i}", 5) for i in range(F)]
        for i, r in enumerate(regs):
            t = Temp(b, b.lane_pool(f"lane{i}"))
            f = le(b, t, reg_bits(r), 11)
            t.done()
            phase_flip(b, [f])
            t.undo()
        return depth(lower(b.build()))

    assert build(4) == build(1)


def _random_circuit(rng, n, gates):
    b = Builder()
    b.register("q", n)
    for _ in range(gates):
        k = rng.randrange(5)
        qs = rng.sample(range(n), 3)
        if k == 0:
            b.x(qs[0], [(qs[1], bool(rng.getrandbits(1)))])
        elif k == 1:
            b.z(qs[0], [(qs[1], True), (qs[2], True)])
        elif k == 2:
            b.swap(qs[0], qs[1], [(qs[2], False)])
        elif k == 3:
            b.s(qs[0], rng.randrange(1, 4))
        else:
            b.x(qs[0], [(qs[1], True), (qs[2], True)])
    return b.build()


def test_serialize_round_trip_empty():
    c = empty_circuit()
    assert deserialize(serialize(c)) == c


def test_serialize_round_trip_large():
    c = _random_circuit(random.Random(3), 12, 1000)
    assert deserialize(serialize(c)) == c


def test_serialize_truncated():
    text = serialize(_random_circuit(random.Random(1), 5, 20))
    with pytest.raises(ParseError):
        deserialize("\n".join(text.splitlines()[:-3]))
    with pytest.raises(ParseError):
        deserialize("")
    with pytest.raises(ParseError):
        deserialize('{"format": "other"}')


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_invert_undoes_random_circuits(seed):
    rng = random.Random(seed)
    c = _random_circuit(rng, 7, 40)
    both = compose(c, invert(c))
    ins = [rng.getrandbits(7) for _ in range(20)]
    assert run_all(both, ins) == [(v, 0) for v in ins]


def test_controlled_payload_only():
    enc = SortedList(5, 2)
    c = enc.bit_flip(3)
    cc = controlled(c, "go")
    assert cc.reg("go")
    for s in ("00100", "10000", "00000"):
        fb = FockBitstring.from_str(s)
        vals = enc.encode(fb)
        off = state_from_registers(cc, vals)
        on = state_from_registers(cc, {**vals, "go": 1})
        assert simulate(cc, off) == off
        want = enc.encode(FockBitstring.from_str(s[:2] + str(1 - int(s[2])) + s[3:]))
        got = read_registers(cc, simulate(cc, on))
        assert {k: got[k] for k in want} == want and got["go"] == 1


def test_controlled_global_phase_becomes_s():
    b = Builder()
    b.register("q", 1)
    b.x(0)
    b.global_phase = 1
    cc = controlled(b.build())
    assert cc.global_phase == 0
    assert any(g.kind == "S" for g in cc.gates)


def test_simulate_sparse_rotation():
    theta = 0.37
    b = Builder()
    b.register("q", 1)
    b.h(0)
    b.rz(0, 2 * theta)
    b.h(0)
    out = simulate_sparse(b.build(), {0: 1})
    # H RZ(a) H = cos(a/2) I - i sin(a/2) X
    assert abs(out[0] - math.cos(theta)) < 1e-12
    assert abs(out[1] + 1j * math.sin(theta)) < 1e-12


def test_simulate_sparse_matches_basis_simulator():
    rng = random.Random(11)
    c = _random_circuit(rng, 6, 60)
    c = Circuit(c.registers, c.num_qubits, c.gates, c.ancillas, 3)
    for v in range(64):
        want = simulate(c, BasisPhaseState(v, 6))
        out = simulate_sparse(c, {v: 1})
        assert list(out) == [want.bits]
        assert cmath.isclose(out[want.bits], 1j ** (want.phase + 3))


def test_text_dump():
    txt = to_text(_one(lambda b: (b.x(0, [(1, False)]), b.s(2, 3), b.rz(1, 0.5))))
    assert txt.splitlines()[0] == "x [!q[1]] q[0]"
    assert txt.splitlines()[1].startswith("s^3")


def test_register_errors():
    b = Builder()
    b.register("a", 2)
    with pytest.raises(CircuitError):
        b.register("a", 1)
    with pytest.raises(StateError):
        state_from_registers(b.build(), {"a": 4})


def test_gate_qubits():
    g = Gate("MCX", (2,), ((0, True), (1, False)))
    assert g.qubits() == (2, 0, 1)
    assert g.is_primitive()
