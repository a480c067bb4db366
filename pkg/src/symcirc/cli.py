"""Command-line interface.

Machine-readable JSON goes to stdout, human summaries to stderr.
Exit codes: 0 success / decision yes, 1 decision no, 2 usage or parse
error, 3 algorithmic precondition violated, 4 enumeration budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import core, evaluation, gireduce, majcompile, normalize, oracle, rankeval
from .core import PreconditionError, SymcircError, TooLarge
from .equivalence import NotTransparent, quotient, syntactic_classes
from .serialize import (
    SchemaError,
    circuit_document,
    parse_bipartite,
    parse_circuit,
    parse_structure,
    parse_tables,
    serialize_circuit,
)
from .symmetry import Permutation, gate_orbits, parse_permutation, analysis

YES, NO, USAGE, PRECOND, BUDGET = 0, 1, 2, 3, 4


def _emit(doc, human: str = "") -> None:
    json.dump(doc, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    if human:
        print(human, file=sys.stderr)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_circuit(path: str) -> core.Circuit:
    return parse_circuit(_read(path))


def _write_out(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_gamma(text: str) -> dict[str, int]:
    gamma = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        name, _, val = piece.partition("=")
        gamma[name.strip()] = int(val)
    return gamma


def cmd_validate(args) -> int:
    c = _load_circuit(args.circuit)
    report = core.validate(c)
    _emit(
        {
            "ok": report.ok,
            "errors": [
                {"code": v.code, "gate": v.gate, "message": v.message}
                for v in report.errors
            ],
            "warnings": report.warnings,
        },
        f"{'ok' if report.ok else 'INVALID'}: {len(report.errors)} errors, "
        f"{len(report.warnings)} warnings",
    )
    return YES if report.ok else NO


def cmd_eval(args) -> int:
    c = _load_circuit(args.circuit)
    a = parse_structure(_read(args.structure))
    gamma = _parse_gamma(args.gamma)
    out = evaluation.evaluate(c, a, gamma)
    _emit({"outputs": [[list(k), v] for k, v in sorted(out.items())]})
    return YES


def cmd_invariant(args) -> int:
    c = _load_circuit(args.circuit)
    inv = evaluation.decide_invariant(c, max_n=args.max_n, budget=args.max_budget)
    _emit({"invariant": inv}, "invariant" if inv else "not invariant")
    return YES if inv else NO


def cmd_classes(args) -> int:
    c = _load_circuit(args.circuit)
    eq = syntactic_classes(c)
    _emit({"classes": {r: list(v) for r, v in eq.classes().items()}})
    return YES


def cmd_quotient(args) -> int:
    c = _load_circuit(args.circuit)
    _write_out(args.output, serialize_circuit(quotient(c)))
    return YES


def cmd_transparent(args) -> int:
    c = _load_circuit(args.circuit)
    ok, witness = normalize.is_transparent(c)
    doc = {"transparent": ok}
    if witness:
        doc["witness"] = {"gate": witness[0], "reason": witness[1]}
    _emit(doc, "transparent" if ok else f"not transparent: {witness}")
    return YES if ok else NO


def cmd_unique_labels(args) -> int:
    c = _load_circuit(args.circuit)
    ok = normalize.has_unique_labels(c)
    _emit({"unique_labels": ok})
    return YES if ok else NO


def cmd_normalize(args) -> int:
    c = _load_circuit(args.circuit)
    _write_out(args.output, serialize_circuit(normalize.to_unique_labels(c)))
    return YES


def cmd_symmetric(args) -> int:
    c = _load_circuit(args.circuit)
    report = gate_orbits(c)
    doc = {"symmetric": report.symmetric}
    if report.witness:
        doc["witness_transposition"] = list(report.witness)
    _emit(doc, "symmetric" if report.symmetric else "not symmetric")
    return YES if report.symmetric else NO


def cmd_orbits(args) -> int:
    c = _load_circuit(args.circuit)
    report = gate_orbits(c)
    if not report.symmetric:
        _emit({"symmetric": False}, "not symmetric")
        return NO
    _emit(
        {
            "symmetric": True,
            "orbits": {g: list(o) for g, o in sorted(report.orbit.items())},
        }
    )
    return YES


def cmd_supports(args) -> int:
    c = _load_circuit(args.circuit)
    report = gate_orbits(c)
    if not report.symmetric:
        _emit({"symmetric": False}, "not symmetric")
        return NO
    per_gate = {}
    for gid in sorted(c.gates):
        info = report.support[gid]
        per_gate[gid] = {
            "sp": [list(p) for p in info.partition.parts],
            "norm": info.norm,
            "support": list(info.canonical_support)
            if info.canonical_support is not None
            else None,
            "orbit_size": len(report.orbit[gid]),
        }
    measured = {
        "order": c.order,
        "size": len(c.gates),
        "max_norm": max(v["norm"] for v in per_gate.values()),
        "max_orbit": max(v["orbit_size"] for v in per_gate.values()),
    }
    _emit({"symmetric": True, "gates": per_gate, "support_report": measured})
    return YES


def cmd_extend(args) -> int:
    c = _load_circuit(args.circuit)
    sigma = parse_permutation(args.perm, c.order)
    ext = analysis(c).extend(sigma)
    if ext is None:
        _emit({"extends": False}, "no automorphism extends the permutation")
        return NO
    _emit({"extends": True, "mapping": dict(sorted(ext.mapping.items()))})
    return YES


def cmd_compile_sym(args) -> int:
    spec = majcompile.SymmetricSpec.from_bits(args.cf)
    if args.n is not None and args.n != spec.n:
        raise SchemaError(f"--cf encodes n={spec.n}, but --n={args.n}")
    convention = evaluation.STRICT if args.strict else evaluation.AT_LEAST_HALF
    c = majcompile.compile_symmetric(spec, convention)
    _write_out(args.output, serialize_circuit(c))
    print(
        f"size={len(c.gates)} depth={c.max_depth()} width={core.circuit_width(c)}",
        file=sys.stderr,
    )
    return YES


def cmd_lower(args) -> int:
    c = _load_circuit(args.circuit)
    tables = parse_tables(_read(args.tables)) if args.tables else {}
    out = majcompile.lower_to_majority(c, tables)
    _write_out(args.output, serialize_circuit(out))
    return YES


def cmd_gen_gi(args) -> int:
    b1 = parse_bipartite(_read(args.b1))
    b2 = parse_bipartite(_read(args.b2))
    r, p = args.rank_r, args.rank_p
    if args.kind == "syn":
        c, g1, g2 = gireduce.gen_syntactic_instance(b1, b2, r, p)
        extra = {"gate1": g1, "gate2": g2}
    elif args.kind == "uc":
        c, g1, g2 = gireduce.gen_unique_children_instance(b1, b2, r, p)
        extra = {"gate1": g1, "gate2": g2}
    elif args.kind == "sym":
        c = gireduce.gen_symmetry_instance(b1, b2, r, p)
        extra = {}
    else:
        base, g1, g2 = gireduce.gen_syntactic_instance(b1, b2, r, p)
        c, gout = gireduce.gen_unique_labels_instance(base, g1, g2)
        extra = {"gate": gout}
    _write_out(args.output, serialize_circuit(c))
    if extra:
        print(json.dumps(extra), file=sys.stderr)
    return YES


def cmd_rank_eval(args) -> int:
    c = _load_circuit(args.circuit)
    a = parse_structure(_read(args.structure))
    gids = (
        [args.gate]
        if args.gate
        else sorted(
            g.gid for g in c.internal_gates() if not g.fn.is_symmetric
        )
    )
    evs = rankeval.all_ev_sets(c, a)
    report = []
    agree = True
    for gid in gids:
        ctx = rankeval.RankGateContext(c, a, gid)
        child_evs = {h: evs[h] for h in c.children_of(gid)}
        skipped = 0
        rows = []
        for eta in rankeval.injective_assignments(ctx.gate_support, a.universe):
            try:
                rm = ctx.build_matrix(eta, child_evs)
            except rankeval.InsufficientFreshElements:
                skipped += 1
                continue
            fn = ctx.gate.fn
            rank_m = evaluation.rank_mod_p(rm.matrix(), fn.p)
            rank_q = evaluation.rank_mod_p(rm.quotient_matrix(), fn.p)
            gamma = rankeval.complete_gamma(eta, a.universe, c.order)
            rank_direct = evaluation.rank_mod_p(ctx.direct_label_matrix(gamma), fn.p)
            ok = rank_m == rank_q == rank_direct and int(rank_m <= fn.r) == ctx.direct_bit(eta)
            agree = agree and ok
            rows.append(
                {
                    "eta": [[k, v] for k, v in eta.pairs],
                    "I": len(rm.row_index),
                    "J": len(rm.col_index),
                    "I_classes": len(rm.row_classes),
                    "J_classes": len(rm.col_classes),
                    "rank_M": rank_m,
                    "rank_M_quotient": rank_q,
                    "rank_direct": rank_direct,
                    "agree": ok,
                }
            )
        report.append({"gate": gid, "skipped": skipped, "etas": rows})
    _emit({"gates": report, "agree": agree})
    return YES if agree else NO


def cmd_oracle(args) -> int:
    if args.which == "iso-check":
        b1 = parse_bipartite(_read(args.b1))
        b2 = parse_bipartite(_read(args.b2))
        iso = gireduce.bipartite_iso(b1, b2)
        _emit({"isomorphic": iso})
        return YES if iso else NO
    if args.which == "brute-aut":
        c = _load_circuit(args.circuit)
        from .symmetry import all_permutations

        counts = {
            sigma.one_line(): len(oracle.all_extensions(c, sigma))
            for sigma in all_permutations(c.order)
        }
        _emit(
            {
                "extensions_per_permutation": counts,
                "symmetric": all(v > 0 for v in counts.values()),
                "unique_extensions": all(v <= 1 for v in counts.values()),
            }
        )
        return YES
    spec = majcompile.SymmetricSpec.from_bits(args.cf)
    table = {format(m, f"0{spec.n}b"): int(spec.fires(bin(m).count("1"))) for m in range(2**spec.n)}
    _emit({"truth_table": table})
    return YES


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="symcirc", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def with_circuit(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("circuit", help="circuit JSON file")
        p.set_defaults(fn=fn)
        return p

    with_circuit("validate", cmd_validate)
    p = with_circuit("eval", cmd_eval)
    p.add_argument("--structure", required=True)
    p.add_argument("--gamma", required=True, help='bijection, e.g. "a=1,b=2"')
    p = with_circuit("invariant", cmd_invariant)
    p.add_argument("--max-budget", type=int, default=None)
    p.add_argument("--max-n", type=int, default=4)
    with_circuit("classes", cmd_classes)
    p = with_circuit("quotient", cmd_quotient)
    p.add_argument("-o", "--output", default=None)
    with_circuit("transparent", cmd_transparent)
    with_circuit("unique-labels", cmd_unique_labels)
    p = with_circuit("normalize", cmd_normalize)
    p.add_argument("-o", "--output", default=None)
    with_circuit("symmetric", cmd_symmetric)
    with_circuit("orbits", cmd_orbits)
    with_circuit("supports", cmd_supports)
    p = with_circuit("extend", cmd_extend)
    p.add_argument("--perm", required=True, help='"2 1 3" or "(1 2)(3)"')

    p = sub.add_parser("compile-sym")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--cf", required=True, help="0/1 string of accepted counts")
    p.add_argument("--strict", action="store_true", help="strict majority")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_compile_sym)

    p = with_circuit("lower", cmd_lower)
    p.add_argument("--tables", default=None, help="JSON: gate id -> c_F bits")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("gen-gi")
    p.add_argument("--kind", choices=["syn", "uc", "sym", "ul"], required=True)
    p.add_argument("--b1", required=True)
    p.add_argument("--b2", required=True)
    p.add_argument("--rank-r", type=int, default=1)
    p.add_argument("--rank-p", type=int, default=2)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=cmd_gen_gi)

    p = with_circuit("rank-eval", cmd_rank_eval)
    p.add_argument("--structure", required=True)
    p.add_argument("--gate", default=None)

    p = sub.add_parser("oracle")
    osub = p.add_subparsers(dest="which", required=True)
    q = osub.add_parser("iso-check")
    q.add_argument("--b1", required=True)
    q.add_argument("--b2", required=True)
    q.set_defaults(fn=cmd_oracle)
    q = osub.add_parser("brute-aut")
    q.add_argument("circuit")
    q.set_defaults(fn=cmd_oracle)
    q = osub.add_parser("truth-table")
    q.add_argument("--cf", required=True)
    q.set_defaults(fn=cmd_oracle)
    return top


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else YES
    try:
        return args.fn(args)
    except (SchemaError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except TooLarge as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return BUDGET
    except (NotTransparent, PreconditionError) as e:
        print(f"precondition violated: {e}", file=sys.stderr)
        return PRECOND
    except SymcircError as e:
        print(f"error: {e}", file=sys.stderr)
        return PRECOND


if __name__ == "__main__":
    sys.exit(main())
