"""Command-line front end: synth, verify, bench, estimate.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from .circuit import Circuit, depth, gate_count, lower, serialize, to_text
from .encodings import ENCODINGS, Encoding, from_slots
from .fock import FockBitstring, info_bound
from .ops import RotationSpec, compile_majorana, compile_rotation, compile_select, pair_generator
from .verify import Harness, Report, verify_queries

CSV_SCHEMA = "fermenc_bench_v1"
CSV_FIELDS = [CSV_SCHEMA, "encoding", "M", "F", "k", "op", "j", "qubits", "ancillas", "gates_total",
              "gates_by_kind", "depth", "info_bound", "wall_s"]
EXHAUSTIVE_LIMIT = 1 << 20
DEFAULT_SEED = 1234
OPS = ("sgn-rank", "bit-flip", "majorana", "rotation", "select")


class UsageError(Exception):
    pass


def _encoding(args) -> Encoding:
    try:
        return from_slots(args.encoding, args.modes, args.fermions, args.slack)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None


def default_index(M: int) -> int:
    return (M + 1) // 2


def rotation_pair(M: int, j: int | None, partner: int | None) -> tuple[int, int]:
    """Majorana indices of the generator i*gamma_mu*gamma_nu; defaults to a hopping term."""
    if M < 2:
        raise UsageError("rotations need at least two modes")
    mu = j if j is not None else 2 * default_index(M) - 1
    nu = partner if partner is not None else min(2 * M, mu + 3)
    if not (1 <= mu <= 2 * M and 1 <= nu <= 2 * M) or mu == nu:
        raise UsageError(f"rotation needs two distinct Majorana indices in 1..{2 * M}")
    return mu, nu


def build_op(enc: Encoding, op: str, j: int | None, partner: int | None = None, theta: float = 0.5) -> Circuit:
    try:
        if op in ("sgn-rank", "bit-flip"):
            j = j if j is not None else default_index(enc.M)
            return enc.sgn_rank(j) if op == "sgn-rank" else enc.bit_flip(j)
        if op == "majorana":
            return compile_majorana(enc, j if j is not None else 2 * default_index(enc.M))
        if op == "rotation":
            mu, nu = rotation_pair(enc.M, j, partner)
            return compile_rotation(enc, RotationSpec(pair_generator(mu, nu), theta))
        if op == "select":
            return compile_select(enc, "bit-flip")
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown op {op!r}")


def summary(enc: Encoding, c: Circuit) -> dict:
    lc = lower(c)
    gc = gate_count(c)
    return {**enc.describe(), "ancillas": lc.num_qubits - enc.qubits, "gates_total": gc["total"],
            "gates": gc["gates"], "gates_by_kind": gc["by_kind"], "depth": depth(lc)}


def _emit(data: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        print(json.dumps(data, sort_keys=True), file=out)
    elif fmt == "csv":
        w = csv.writer(out)
        flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in data.items()}
        w.writerow(list(flat))
        w.writerow(list(flat.values()))
    else:
        for k, v in data.items():
            print(f"{k}: {v}", file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    enc = _encoding(args)
    c = build_op(enc, args.op, args.index, args.partner, args.theta)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(to_text(c) if args.format == "text" else serialize(c))
    info = summary(enc, c)
    info.update(op=args.op, out=args.out)
    _emit(info, args.format if args.format != "csv" else "text")
    return 0


def _verify_random(enc: Encoding, ops, n: int, seed: int) -> Report:
    rng = random.Random(seed)
    weights = list(enc.weights)
    rep = Report()
    cells: dict[tuple[str, int], list] = {}
    for _ in range(n):
        w = rng.choice(weights)
        s = FockBitstring.from_modes(enc.M, rng.sample(range(1, enc.M + 1), w))
        cells.setdefault((rng.choice(ops), rng.randint(1, enc.M)), []).append(s)
    for (op, j), states in sorted(cells.items()):
        h = Harness(enc, states)
        if op == "sgn-rank":
            rep.merge(h.check(enc.sgn_rank(j), h.sgn_rank_cases(j), f"sgn-rank j={j}"))
        else:
            rep.merge(h.check(enc.bit_flip(j), h.bit_flip_cases(j), f"bit-flip j={j}"))
    return rep


def cmd_verify(args) -> int:
    enc = _encoding(args)
    ops = ("sgn-rank", "bit-flip") if args.op is None else (args.op,)
    if any(op not in ("sgn-rank", "bit-flip") for op in ops):
        raise UsageError("verify checks sgn-rank and bit-flip")
    t0 = time.perf_counter()
    if args.scope == "exhaustive":
        count = sum(math.comb(enc.M, w) for w in enc.weights)
        if count > EXHAUSTIVE_LIMIT:
            raise UsageError(f"exhaustive scope needs {count} states x {enc.M} modes; limit is "
                             f"{EXHAUSTIVE_LIMIT} states (use --scope random)")
        js = [args.index] if args.index is not None else None
        rep = verify_queries(enc, js, ops)
    else:
        rep = _verify_random(enc, ops, args.samples, args.seed)
    res = {"encoding": enc.name, "M": enc.M, "scope": args.scope, "seed": args.seed,
           "cases": rep.checked, "circuits": rep.circuits, "ok": rep.ok,
           "seconds": round(time.perf_counter() - t0, 3)}
    if not rep.ok:
        label, mm = rep.failures[0]
        res["counterexample"] = f"{label}: {mm}"
    _emit(res, args.format if args.format != "csv" else "text")
    return 0 if rep.ok else 1


def _fermions_for(rule: str, M: int) -> int:
    if rule == "sqrt":
        return math.isqrt(M - 1) + 1 if M > 1 else 1
    if rule.startswith("frac:"):
        return max(1, math.ceil(M / int(rule[5:])))
    return int(rule)


def bench_cell(cell: tuple) -> dict:
    name, M, F, k, op, j = cell
    enc = from_slots(name, M, F, k)
    jj = j if j is not None else default_index(M)
    t0 = time.perf_counter()
    c = build_op(enc, op, jj)
    lc = lower(c)
    gc = gate_count(c)
    wall = time.perf_counter() - t0
    return {"encoding": name, "M": M, "F": F, "k": k, "op": op, "j": jj, "qubits": enc.qubits,
            "ancillas": lc.num_qubits - enc.qubits, "gates_total": gc["total"],
            "gates_by_kind": json.dumps(gc["by_kind"], sort_keys=True), "depth": depth(lc),
            "info_bound": info_bound(M, min(F, M)), "wall_s": round(wall, 4)}


def _threads() -> int:
    cap = os.environ.get("FERMENC_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError("FERMENC_THREADS must be an integer") from None
    return n


def run_bench(encodings, modes, rule: str, slack: int, ops, j=None, threads: int = 1) -> list[dict]:
    cells = []
    for M in modes:
        F = _fermions_for(rule, M)
        for name in encodings:
            for op in ops:
                cells.append((name, M, F, slack, op, j))
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(bench_cell, cells))
    else:
        rows = [bench_cell(c) for c in cells]
    for i, r in enumerate(rows):
        r[CSV_SCHEMA] = i
    return rows


def write_csv(rows: list[dict], out) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def _split(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def cmd_bench(args) -> int:
    names = list(ENCODINGS) if args.encoding in (None, "all") else _split(args.encoding)
    for n in names:
        if n not in ENCODINGS:
            raise UsageError(f"unknown encoding {n!r}")
    if args.baseline and "jordan-wigner" not in names:
        names.append("jordan-wigner")
    try:
        modes = [int(m) for m in _split(args.modes_list)]
    except ValueError:
        raise UsageError("--modes takes a comma-separated list of integers") from None
    ops = _split(args.ops)
    if any(op not in ("sgn-rank", "bit-flip") for op in ops):
        raise UsageError("bench measures sgn-rank and bit-flip")
    try:
        rows = run_bench(names, modes, args.fermions_rule, args.slack, ops, args.index, _threads())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    if args.format == "json":
        print(json.dumps(rows))
    elif args.format == "csv" or not args.out:
        buf = io.StringIO()
        write_csv(rows, buf)
        sys.stdout.write(buf.getvalue())
    else:
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def estimate(enc: Encoding, lambda_t: float, epsilon: float) -> dict:
    if lambda_t <= 0 or epsilon <= 0:
        raise UsageError("lambda*t and epsilon must be positive")
    mu, nu = rotation_pair(enc.M, None, None)
    c = compile_rotation(enc, RotationSpec(pair_generator(mu, nu), 0.5))
    per = summary(enc, c)
    n = math.ceil(lambda_t ** 2 / epsilon)
    return {"kind": "estimate (not a simulation)", "encoding": enc.name, "M": enc.M,
            "qubits": enc.qubits, "rotations": n, "per_rotation_gates": per["gates_total"],
            "per_rotation_depth": per["depth"], "gates_total": n * per["gates_total"],
            "depth_total": n * per["depth"], "generator": [mu, nu]}


def cmd_estimate(args) -> int:
    enc = _encoding(args)
    _emit(estimate(enc, args.lambda_t, args.epsilon), args.format if args.format != "csv" else "text")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _layout_args(p: argparse.ArgumentParser, need_encoding: bool = True) -> None:
    p.add_argument("--encoding", required=need_encoding, choices=ENCODINGS)
    p.add_argument("--modes", type=int, required=True, help="number of modes M")
    p.add_argument("--fermions", type=int, default=1,
                   help="layout size: pointer slots, or the central weight F for implicit")
    p.add_argument("--slack", type=int, default=0, help="weight slack k (implicit)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fermenc", description="Space-efficient fermion encodings")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("synth", help="build one circuit")
    _layout_args(s)
    s.add_argument("--op", choices=OPS, default="bit-flip")
    s.add_argument("--index", type=int, help="mode j, or Majorana index for majorana/rotation")
    s.add_argument("--partner", type=int, help="second Majorana index of a rotation generator")
    s.add_argument("--theta", type=float, default=0.5)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_synth)

    v = sub.add_parser("verify", help="simulate queries against the reference oracle")
    _layout_args(v)
    v.add_argument("--op", choices=("sgn-rank", "bit-flip"))
    v.add_argument("--index", type=int)
    v.add_argument("--scope", choices=("exhaustive", "random"), default="exhaustive")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("bench", help="gate and qubit counts as CSV")
    b.add_argument("--encoding", default="all", help="comma-separated names or 'all'")
    b.add_argument("--modes", dest="modes_list", required=True, help="comma-separated M values")
    b.add_argument("--fermions", dest="fermions_rule", default="sqrt",
                   help="integer, 'sqrt' for ceil(sqrt(M)), or 'frac:d' for ceil(M/d)")
    b.add_argument("--slack", type=int, default=0)
    b.add_argument("--op", dest="ops", default="sgn-rank,bit-flip")
    b.add_argument("--index", type=int)
    b.add_argument("--no-baseline", dest="baseline", action="store_false")
    b.add_argument("--out")
    b.add_argument("--format", choices=("json", "csv", "text"), default="text")
    b.set_defaults(fn=cmd_bench)

    e = sub.add_parser("estimate", help="randomized-simulation cost estimate")
    _layout_args(e)
    e.add_argument("--lambda-t", type=float, required=True)
    e.add_argument("--epsilon", type=float, required=True)
    e.set_defaults(fn=cmd_estimate)
    return ap


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"fermenc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
