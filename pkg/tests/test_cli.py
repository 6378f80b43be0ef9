import csv
import io
import json

import pytest

from fermenc import cli
from fermenc.circuit import deserialize, serialize
from fermenc.encodings import from_slots


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_synth_succinct_reports_39_qubits(capsys, tmp_path):
    path = tmp_path / "c.txt"
    code, info = run_json(capsys, "synth", "--encoding", "succinct", "--modes", 63, "--fermions", 8,
                          "--op", "sgn-rank", "--index", 14, "--out", path)
    assert code == 0 and info["qubits"] == 39
    c = deserialize(path.read_text())
    assert c.num_qubits >= 39 and c.gates


def test_synth_sorted_zero_fermions(capsys):
    code, info = run_json(capsys, "synth", "--encoding", "sorted", "--modes", 8, "--fermions", 0,
                          "--op", "bit-flip", "--index", 1)
    assert code == 0 and info["qubits"] == 0


def test_synth_implicit_round_trip(capsys, tmp_path):
    path = tmp_path / "imp.json"
    code, _ = run_json(capsys, "synth", "--encoding", "implicit", "--modes", 6, "--fermions", 2, "--slack", 1,
                       "--op", "bit-flip", "--index", 3, "--out", path)
    assert code == 0
    c = deserialize(path.read_text())
    enc = from_slots("implicit", 6, 2, 1)
    ref = enc.bit_flip(3)
    assert c == ref and serialize(c) == serialize(ref)


@pytest.mark.parametrize("op", ["majorana", "rotation", "select"])
def test_synth_other_ops(capsys, op):
    code, info = run_json(capsys, "synth", "--encoding", "buffered", "--modes", 6, "--fermions", 3, "--op", op)
    assert code == 0 and info["gates_total"] > 0


def test_synth_text_output(capsys):
    code, out, _ = run(capsys, "synth", "--encoding", "jordan-wigner", "--modes", 4)
    assert code == 0 and "qubits: 4" in out


@pytest.mark.parametrize("argv", [
    ["synth", "--encoding", "nope", "--modes", 4],
    ["synth", "--encoding", "sorted", "--modes", 4, "--index", 9],
    ["synth", "--encoding", "sorted", "--modes", 4, "--op", "rotation", "--index", 3, "--partner", 3],
    ["bench", "--encoding", "nope", "--modes", 8],
    ["bench", "--modes", "x"],
    ["estimate", "--encoding", "sorted", "--modes", 4, "--lambda-t", 0, "--epsilon", 1],
])
def test_usage_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = cli.main([str(a) for a in argv])
        raise SystemExit(code)
    assert exc.value.code == 2


@pytest.mark.parametrize("name,M,F,k", [("sorted", 8, 3, 0), ("succinct-tree", 16, 4, 0), ("implicit", 6, 2, 1)])
def test_verify_exhaustive_passes(capsys, name, M, F, k):
    code, res = run_json(capsys, "verify", "--encoding", name, "--modes", M, "--fermions", F, "--slack", k)
    assert code == 0 and res["ok"] and res["cases"] > 0


def test_verify_refuses_large_scope(capsys):
    code, _, err = run(capsys, "verify", "--encoding", "sorted", "--modes", 64, "--fermions", 8)
    assert code == 2 and "random" in err


def test_verify_random_is_seeded(capsys):
    argv = ("verify", "--encoding", "succinct", "--modes", 40, "--fermions", 6, "--scope", "random",
            "--samples", 50, "--seed", 7)
    a = run_json(capsys, *argv)[1]
    b = run_json(capsys, *argv)[1]
    assert a["ok"] and a["seed"] == 7 and a["cases"] == b["cases"]


def test_verify_failure_exits_one(capsys, monkeypatch):
    enc = from_slots("sorted", 4, 2, 0)
    broken = enc.bit_flip(1)
    monkeypatch.setattr(type(enc), "bit_flip", lambda self, j: broken)
    code, res = run_json(capsys, "verify", "--encoding", "sorted", "--modes", 4, "--fermions", 2,
                         "--scope", "random", "--samples", 40, "--op", "bit-flip")
    assert code == 1 and not res["ok"] and "counterexample" in res


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_single_row(capsys):
    code, out, _ = run(capsys, "bench", "--encoding", "sorted,succinct", "--modes", 63, "--fermions", 8,
                       "--op", "sgn-rank", "--format", "csv")
    rows = _rows(out)
    assert code == 0
    assert {r["encoding"]: int(r["qubits"]) for r in rows} == {"sorted": 48, "succinct": 39, "jordan-wigner": 63}
    assert out.splitlines()[0].startswith(cli.CSV_SCHEMA)
    assert [int(r[cli.CSV_SCHEMA]) for r in rows] == list(range(len(rows)))


def test_bench_tree_sweep_near_bound(capsys, tmp_path):
    path = tmp_path / "b.csv"
    code, _, _ = run(capsys, "bench", "--encoding", "succinct-tree", "--modes", "64,256,1024",
                     "--op", "sgn-rank", "--no-baseline", "--out", path)
    rows = _rows(path.read_text())
    assert code == 0 and [int(r["M"]) for r in rows] == [64, 256, 1024]
    for r in rows:
        assert int(r["qubits"]) - int(r["info_bound"]) <= 4 * int(r["F"])


def test_bench_empty_sweep(capsys):
    code, out, _ = run(capsys, "bench", "--modes", "", "--format", "csv")
    assert code == 0 and out.strip().split(",") == cli.CSV_FIELDS


def test_bench_deterministic_rows(capsys, monkeypatch):
    argv = ("bench", "--modes", "8,12", "--fermions", "frac:3", "--format", "csv")
    monkeypatch.setenv("FERMENC_THREADS", "2")
    a = run(capsys, *argv)[1]
    monkeypatch.setenv("FERMENC_THREADS", "1")
    b = run(capsys, *argv)[1]
    strip = lambda t: [{k: v for k, v in r.items() if k != "wall_s"} for r in _rows(t)]
    assert strip(a) == strip(b)


def test_estimate_single_rotation(capsys):
    _, est = run_json(capsys, "estimate", "--encoding", "succinct", "--modes", 8, "--fermions", 3,
                      "--lambda-t", 1, "--epsilon", 1)
    assert est["rotations"] == 1 and est["gates_total"] == est["per_rotation_gates"]
    assert "not a simulation" in est["kind"]


def test_estimate_scales_quadratically(capsys):
    base = ("estimate", "--encoding", "sorted", "--modes", 8, "--fermions", 3, "--epsilon", 0.01)
    one = run_json(capsys, *base, "--lambda-t", 1)[1]
    two = run_json(capsys, *base, "--lambda-t", 2)[1]
    assert two["gates_total"] == 4 * one["gates_total"]


def test_estimate_tree_space_below_sorted():
    tree = cli.estimate(from_slots("succinct-tree", 4096, 64, 0), 1.0, 1.0)
    srt = cli.estimate(from_slots("sorted", 4096, 64, 0), 1.0, 1.0)
    assert tree["qubits"] <= srt["qubits"]
