"""Command line front end: block theory, Burnside tables, idempotent
lifting, and tilting-complex verification, with JSON or text reports.

Exit codes: 0 success, 2 computed-but-verdict-false (verify commands),
1 error.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import fixtures
from .coeff import GR
from .groups import PermGroup, GSet
from .galgebra import (GroupAlgebra, coefficient_field_for, lift_blocks,
                       block_idempotents_mod_p, defect_group,
                       brauer_correspondent, block_partition_of_characters)
from . import burnside as bu
from . import idemlift as il
from . import modrep
from . import rouquier as rq
from .algcore import StructAlgebra

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# plumbing

def _group_from(name: str) -> PermGroup:
    if os.path.sep in name or name.endswith(".grp"):
        return PermGroup.from_file(name)
    return fixtures.load_group(name)


def _cache_dir(args) -> str:
    if getattr(args, "cache", None):
        return args.cache
    env = os.environ.get("BRAUERLIFT_CACHE")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "brauerlift")


def _cache_key(parts) -> str:
    blob = json.dumps(parts, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:24]


def cache_load(args, parts):
    path = os.path.join(_cache_dir(args), _cache_key(parts) + ".json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return json.load(fh)


def cache_store(args, parts, obj):
    d = _cache_dir(args)
    os.makedirs(d, exist_ok=True)
    path = os.path.join(d, _cache_key(parts) + ".json")
    # atomic: write to a temp file in the same directory, then rename
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, sort_keys=True)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, obj, text_lines=None) -> None:
    obj = dict(obj)
    obj["schema_version"] = SCHEMA_VERSION
    if getattr(args, "json", False) or text_lines is None:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        for ln in text_lines:
            print(ln)


def _ints(x):
    if isinstance(x, np.ndarray):
        return x.astype(int).tolist()
    return x


# ---------------------------------------------------------------------------
# commands

def cmd_blocks(args) -> int:
    G = _group_from(args.group)
    spec = coefficient_field_for(G, args.p)
    R = GR(spec, args.prec)
    A = GroupAlgebra(R, G)
    blocks1 = block_idempotents_mod_p(A)
    blocks = lift_blocks(A, blocks1)
    out = []
    for i, b in enumerate(blocks):
        D, defect, _ = defect_group(A, blocks1[i])
        out.append({"index": i, "dim": b.dim(), "defect": defect,
                    "defect_group_order": len(D)})
    report = {"group": G.name or args.group, "p": args.p,
              "precision": args.prec, "count": len(blocks), "blocks": out}
    if fixtures.chars_path(args.group):
        table = fixtures.load_chars(args.group)
        report["character_partition"] = block_partition_of_characters(A, table)
    _emit(args, report,
          [f"{len(blocks)} block(s) of Z/{args.p}^{args.prec}[{args.group}]"] +
          [f"  block {x['index']}: dim {x['dim']}, defect {x['defect']}, "
           f"|D| = {x['defect_group_order']}" for x in out])
    return 0


def cmd_defect_group(args) -> int:
    G = _group_from(args.group)
    A = GroupAlgebra(GR(coefficient_field_for(G, args.p), 1), G)
    blocks1 = block_idempotents_mod_p(A)
    b = blocks1[args.block]
    D, defect, _ = defect_group(A, b)
    orders = sorted({_element_order(G, x) for x in D})
    report = {"group": args.group, "p": args.p, "block": args.block,
              "defect": defect, "order": len(D),
              "cyclic": _is_cyclic_subgroup(G, D),
              "element_orders": orders}
    _emit(args, report,
          [f"block {args.block}: defect {defect}, |D| = {len(D)}, "
           f"cyclic: {report['cyclic']}"])
    return 0


def _element_order(G: PermGroup, x: int) -> int:
    k, y = 1, x
    while y != 0:
        y = G.mul(y, x)
        k += 1
    return k


def _is_cyclic_subgroup(G: PermGroup, D: frozenset) -> bool:
    return any(_element_order(G, x) == len(D) for x in D)


def cmd_correspondent(args) -> int:
    G = _group_from(args.group)
    A = GroupAlgebra(GR(coefficient_field_for(G, args.p), 1), G)
    blocks1 = block_idempotents_mod_p(A)
    b = blocks1[args.block]
    D, defect, _ = defect_group(A, b)
    Ngrp, AN, bp = brauer_correspondent(A, b, D)
    nblocks = block_idempotents_mod_p(AN)
    report = {"group": args.group, "p": args.p, "block": args.block,
              "normalizer_order": Ngrp.order,
              "normalizer_block_count": len(nblocks),
              "correspondent_dim": int(np.count_nonzero(
                  np.any(bp % args.p != 0, axis=-1)) and
                  modrep.rank_mod_p(AN.ring, AN.left_mult(bp)))}
    _emit(args, report,
          [f"N_G(D) has order {Ngrp.order}; correspondent block dim "
           f"{report['correspondent_dim']}"])
    return 0


def cmd_brauer_tree(args) -> int:
    G = _group_from(args.group)
    A = GroupAlgebra(GR(coefficient_field_for(G, args.p), 1), G)
    table = fixtures.load_chars(args.group)
    rng = np.random.default_rng(args.seed)
    idx = 0 if args.block == "principal" else int(args.block)
    tree = modrep.brauer_tree(A, table, idx, rng)
    report = json.loads(tree.to_json())
    _emit(args, report, tree.to_dot().splitlines())
    return 0


def cmd_burnside(args) -> int:
    G = _group_from(args.group)
    classes = G.subgroup_classes()
    if args.what == "marks":
        parts = ["marks", args.group]
        cached = cache_load(args, parts)
        if cached is None:
            M = bu.table_of_marks(G, classes)
            cached = {"orders": [len(H) for H in classes],
                      "marks": _ints(M)}
            cache_store(args, parts, cached)
        _emit(args, cached,
              [f"{len(cached['orders'])} subgroup classes"] +
              [" ".join(str(v) for v in row) for row in cached["marks"]])
        return 0
    if args.what == "idempotents":
        perfect, idems = bu.dress_idempotents(G, args.p, classes)
        report = {"group": args.group, "p": args.p, "count": len(perfect),
                  "perfect_classes": [int(i) for i in perfect],
                  "idempotents": {str(i): [str(c) for c in idems[i]]
                                  for i in perfect}}
        _emit(args, report, [f"{len(perfect)} Dress idempotent(s)"])
        return 0
    if args.what == "basis":
        basis = bu.completed_basis(G, args.p, args.prec, classes)
        report = {"group": args.group, "p": args.p, "precision": args.prec,
                  "rank": len(basis),
                  "class_indices": [int(i) for i in basis],
                  "class_orders": [len(classes[i]) for i in basis]}
        _emit(args, report, [f"completed Burnside rank {len(basis)}"])
        return 0
    if args.what == "compose":
        X = GSet.natural(G)
        sb = bu.span_basis(G, X, X)
        i, j = args.i, args.j
        ci = np.zeros(len(sb.entries), dtype=np.int64)
        cj = np.zeros(len(sb.entries), dtype=np.int64)
        ci[i] = 1
        cj[j] = 1
        out = bu.compose_spans(G, sb, sb, sb, ci, cj)
        report = {"group": args.group, "i": i, "j": j,
                  "coefficients": _ints(np.asarray(out))}
        _emit(args, report, [f"composite span coefficients: {report['coefficients']}"])
        return 0
    raise ValueError(f"unknown burnside subcommand {args.what!r}")


def _algebra_from_json(obj) -> StructAlgebra:
    from .coeff import FieldSpec
    R = GR(FieldSpec(obj["p"], tuple(obj.get("field_poly", (0, 1)))),
           obj["precision"])
    C = np.asarray(obj["structure"], dtype=np.int64)[..., None] % R.pN
    one = np.asarray(obj["one"], dtype=np.int64)[:, None] % R.pN
    return StructAlgebra(R, C, one)


def cmd_lift_idem(args) -> int:
    with open(args.input) as fh:
        spec = json.load(fh)
    src = _algebra_from_json(spec["source"])
    dst = _algebra_from_json(spec["target"])
    rng = np.random.default_rng(args.seed)
    mat = np.asarray(spec["map"], dtype=np.int64)[..., None]
    f = il.algebra_hom(src, dst, mat, rng)
    eprime = np.asarray(spec["idempotent"], dtype=np.int64)[:, None]
    w = il.lift_primitive_idempotent(f, eprime, rng)
    report = {"idempotent": _ints(w.idempotent[:, 0]),
              "unit": _ints(w.unit[:, 0]) if w.unit is not None else None,
              "steps": w.steps}
    _emit(args, report, [f"lifted idempotent: {report['idempotent']}"])
    return 0


def cmd_witness(args) -> int:
    G = _group_from(args.group)
    rng = np.random.default_rng(args.seed)
    idems = il.central_idempotents_zp(G, args.p, args.prec, rng=rng)
    e0 = idems[args.block]
    db = bu.diagonal_burnside(G, args.p)
    w = il.burnside_witness(G, None, e0, args.p, args.prec, db=db, rng=rng)
    ok = not np.any((w.linearized() - e0) % (args.p ** args.prec))
    report = {"group": args.group, "p": args.p, "precision": args.prec,
              "block": args.block, "round_trip": bool(ok),
              "idempotent": _ints(e0[:, 0]),
              "witness": [{"entry": list(map(_ints, db.entries[i])),
                           "coefficient": int(w.coeffs[i, 0])}
                          for i in range(db.dim) if w.coeffs[i, 0]]}
    _emit(args, report,
          [f"witness with {len(report['witness'])} span term(s); "
           f"round trip exact: {ok}"])
    return 0 if ok else 2


def cmd_rouquier_verify(args) -> int:
    G = _group_from(args.group)
    rng = np.random.default_rng(args.seed)
    ctx = rq.block_context(G, args.prime, precision=args.prec,
                           block_index=args.block, rng=rng)
    verify = None
    if args.strategy == "search":
        verify = lambda c: rq.verify_tilting(ctx, c, rng).verdict
    cx = rq.build_complex(ctx, P_idx=args.P, Q_idx=args.Q,
                          strategy=args.strategy, rng=rng, verify=verify)
    rep = rq.verify_tilting(ctx, cx, rng)
    report = {"group": args.group, "p": args.prime, "precision": args.prec,
              "strategy": args.strategy, "meta": cx.meta,
              "verdict": bool(rep.verdict),
              "h0_rank": rep.h0_rank, "iso": rep.iso_ok,
              "homology": {side: {str(k): v for k, v in inv.items()}
                           for side, inv in rep.homology.items()}}
    _emit(args, report,
          [f"verdict: {rep.verdict}",
           f"H0 ranks: {rep.h0_rank}",
           f"bimodule isomorphisms: {rep.iso_ok}"])
    return 0 if rep.verdict else 2


def cmd_fixtures(args) -> int:
    if args.what == "list":
        rows = []
        for name, p in fixtures.FIXTURES.items():
            G = fixtures.load_group(name)
            rows.append({"name": name, "order": G.order, "p": p,
                         "character_table": fixtures.chars_path(name) is not None})
        _emit(args, {"fixtures": rows},
              [f"{r['name']}: order {r['order']}, p = {r['p']}" for r in rows])
        return 0
    if args.what == "check":
        bad = []
        for name in fixtures.FIXTURES:
            G = fixtures.load_group(name)
            if G.order < 1:
                bad.append(name)
            if fixtures.chars_path(name):
                table = fixtures.load_chars(name)
                table.check_degree_relation(G.order)
        _emit(args, {"ok": not bad, "failures": bad},
              ["all fixtures load and satisfy the degree relation"
               if not bad else f"failures: {bad}"])
        return 0 if not bad else 1
    raise ValueError(f"unknown fixtures subcommand {args.what!r}")


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p, prec_default=4):
    p.add_argument("--group", required=True)
    p.add_argument("--prec", type=int, default=prec_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--cache", default=None)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="brauerlift")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("blocks")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("defect-group")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--block", type=int, default=0)
    p.set_defaults(func=cmd_defect_group)

    p = sub.add_parser("correspondent")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--block", type=int, default=0)
    p.set_defaults(func=cmd_correspondent)

    p = sub.add_parser("brauer-tree")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--block", default="principal")
    p.set_defaults(func=cmd_brauer_tree)

    p = sub.add_parser("burnside")
    p.add_argument("what", choices=["marks", "idempotents", "basis", "compose"])
    _add_common(p)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--j", type=int, default=0)
    p.set_defaults(func=cmd_burnside)

    p = sub.add_parser("lift-idem")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_lift_idem)

    p = sub.add_parser("witness")
    _add_common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--block", type=int, default=0)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("rouquier")
    rsub = p.add_subparsers(dest="rcommand", required=True)
    v = rsub.add_parser("verify")
    _add_common(v)
    v.add_argument("--prime", type=int, required=True)
    v.add_argument("--block", type=int, default=0)
    v.add_argument("--strategy", choices=["explicit", "search"],
                   default="explicit")
    v.add_argument("--P", type=int, default=None)
    v.add_argument("--Q", type=int, default=None)
    v.set_defaults(func=cmd_rouquier_verify)

    p = sub.add_parser("fixtures")
    p.add_argument("what", choices=["list", "check"])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixtures)
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # report and use the error exit code
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
