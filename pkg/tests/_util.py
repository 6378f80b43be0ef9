"""Shared simulation helpers for the test suite."""

from fermenc.circuit import pack_states, simulate_batch, unpack_states


def run_all(c, inputs):
    """Simulate `c` on integer basis states; returns [(state, phase)] including the global phase."""
    got = simulate_batch(c, pack_states(list(inputs), c.num_qubits))
    states, phases = unpack_states(got)
    return [(s, (p + c.global_phase) % 4) for s, p in zip(states, phases)]


def reg_value(c, state, name):
    return sum(((state >> q) & 1) << i for i, q in enumerate(c.reg(name)))


def put(c, values):
    s = 0
    for name, v in values.items():
        for i, q in enumerate(c.reg(name)):
            s |= ((v >> i) & 1) << q
    return s


def ancillas_clear(c, state):
    return all(not (state >> q) & 1 for q in c.ancilla_qubits())
