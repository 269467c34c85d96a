"""Command-line front end.

Subcommands: ``dims`` (dimension tables), ``lovelock`` (evaluate and verify
a Lovelock tensor on a seeded jet), ``graph`` (classify a component key),
``verify-all`` (run the acceptance suite).

Exit codes: 0 success, 1 verification failure, 2 usage/parse error,
3 infeasible-size refusal.  All output is deterministic given the flags;
the DIVLAB_CACHE environment variable overrides --cache-dir.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from .cache import BasisCache
from .divspaces import DivVariant, div_space
from .graphs import (KeyEdge, KeyParseError, classify_hairy,
                     connected_to_cycle, graph_of_component, key_edge,
                     parse_component_key, vanish_by_cycle,
                     zero_functional_oracle)
from .invariants import invariant_div_dim
from .linalg import format_rational
from .normal import expected_n2_dim
from .tensors import Signature

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

VARIANTS = {"plain": DivVariant.plain, "sym3": DivVariant.sym_last3,
            "skew": DivVariant.fully_skew, "fullsym": DivVariant.fully_sym}


def _parse_range(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_signature(text: str, n: int) -> Signature:
    if text is None:
        return Signature(n, 0)
    p, q = text.split(",")
    sig = Signature(int(p), int(q))
    if sig.n != n:
        raise ValueError(f"signature {text} does not sum to n={n}")
    return sig


def _emit(rows, fmt: str, stream):
    if fmt == "json":
        for row in rows:
            stream.write(json.dumps(row, sort_keys=True,
                                    separators=(",", ":")) + "\n")
    else:
        if not rows:
            return
        cols = sorted({k for row in rows for k in row})
        stream.write(",".join(cols) + "\n")
        for row in rows:
            stream.write(",".join(str(row.get(c, "")) for c in cols) + "\n")


def _word_count(variant: DivVariant, n: int) -> int:
    p = variant.p
    if variant.kind == "plain":
        return n ** p
    if variant.kind == "sym3":
        return n ** (p - 3) * math.comb(n + 2, 3)
    if variant.kind == "skew":
        return math.comb(n, p)
    return math.comb(n + p - 1, p)


def _ambient_estimate(variant: DivVariant, n: int, m: int) -> int:
    nd = expected_n2_dim(n)
    return _word_count(variant, n) * math.comb(nd + m - 1, m)


def cmd_dims(args, stream) -> int:
    variant_ctor = VARIANTS[args.variant]
    policy = "exact" if args.modulus == "exact" else "two-prime"
    rows = []
    for n in _parse_range(args.n):
        try:
            sig = _parse_signature(args.signature, n)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for p in _parse_range(args.p):
            try:
                variant = variant_ctor(p)
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_USAGE
            for m in _parse_range(args.m):
                estimate = _ambient_estimate(variant, n, m)
                if estimate > args.ceiling:
                    print(f"refused: estimated ambient dimension {estimate} "
                          f"exceeds ceiling {args.ceiling} at n={n} p={p} "
                          f"m={m}", file=sys.stderr)
                    return EXIT_INFEASIBLE
                ds = div_space(n, p, m, variant, policy=policy,
                               with_basis=False, threads=args.threads)
                inv = invariant_div_dim(n, p, m, variant, sig)
                rows.append({"n": n, "p": p, "m": m, "variant": variant.kind,
                             "signature": str(sig),
                             "ambient_dim": ds.ambient_dim, "div_dim": ds.dim,
                             "invariant_dim": inv})
    _emit(rows, args.format, stream)
    return EXIT_OK


def cmd_lovelock(args, stream) -> int:
    from .lovelock import (curvature, divergence, einstein_contravariant,
                           lovelock_delta, lovelock_form, random_metric_jet)
    n = int(args.n)
    sig = _parse_signature(args.signature, n)
    k = int(args.k)
    if k < 0 or 2 * k > n - 1:
        print(f"error: k={k} outside 0..floor((n-1)/2) for n={n}",
              file=sys.stderr)
        return EXIT_USAGE
    mj = random_metric_jet(n, sig, 3, seed=args.seed)
    lk = lovelock_delta(k, mj)
    residual = divergence(lk, mj)
    report = {
        "n": n, "signature": str(sig), "k": k, "seed": args.seed,
        "L_at_origin": [[i + 1, j + 1, format_rational(
            lk[i][j].constant_term())] for i in range(n) for j in range(n)
            if lk[i][j].constant_term()],
        "div_residual": [format_rational(x) for x in residual],
    }
    ok = all(x == 0 for x in residual)
    if k == 1:
        ein = einstein_contravariant(curvature(mj))
        factor = Fraction((-1) ** (sig.minus + 1)
                          * math.factorial(n - 3))
        lf = lovelock_form(1, mj)
        einstein_ok = all(lf[i][j] == ein[i][j] * factor
                          for i in range(n) for j in range(n))
        report["einstein_ok"] = einstein_ok
        ok = ok and einstein_ok
    _emit([report], args.format, stream)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_graph(args, stream) -> int:
    n = int(args.n)
    try:
        key = parse_component_key(args.key, n)
    except KeyParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    g = graph_of_component(key)
    report = {"key": str(key), "n": n, "graph": g.to_json()}
    jp = key.word[-1]
    report["jp"] = jp
    report["jp_connected_to_cycle"] = connected_to_cycle(g, jp)
    classification = []
    for vs, es in g.components():
        if not es:
            classification.append({"vertices": sorted(vs), "kind": "isolated"})
            continue
        deco = classify_hairy(g, component=(vs, es))
        classification.append({
            "vertices": sorted(vs),
            "kind": "hairy-cycle" if deco else "not-hairy",
            "decomposition": deco.to_json() if deco else None})
    report["components"] = classification
    if g.num_edges >= g.num_vertices:
        result = key_edge(g)
        if isinstance(result, KeyEdge):
            report["key_edge"] = result.to_json()
        else:
            report["key_edge"] = {"certificate": result.to_json()}
    else:
        report["key_edge"] = None
    trace = vanish_by_cycle(key)
    report["trace"] = trace.to_json() if trace else None
    report["oracle"] = None
    cache = BasisCache(args.cache_dir)
    if key.m >= 1:
        verdict = _oracle_with_cache(cache, key, args.ceiling)
        report["oracle"] = verdict
    _emit([report], args.format, stream)
    return EXIT_OK


def _oracle_with_cache(cache: BasisCache, key, ceiling: int):
    """Evaluate the zero-functional oracle when the divergence space is
    small enough to materialize; the basis round-trips through the cache."""
    from .divspaces import DivProblem, DivSpace
    from .linalg import SubspaceBasis
    variant = DivVariant.plain(key.p)
    estimate = _ambient_estimate(variant, key.n, key.m)
    if estimate > min(ceiling, 5000):
        return None
    cache_key = f"div/{key.n}/{key.p}/{key.m}/plain"
    payload = cache.get(cache_key)
    if payload is not None:
        problem = DivProblem(key.n, key.p, key.m, variant)
        basis = SubspaceBasis.from_json(payload["basis"])
        ds = DivSpace(n=key.n, p=key.p, m=key.m, variant=variant,
                      problem=problem, dim=basis.dim, basis=basis,
                      block_dims={}, vector_blocks=[])
    else:
        ds = div_space(key.n, key.p, key.m, variant)
        cache.put(cache_key, ds.summary(basis_ref=cache_key) | {
            "basis": ds.basis.to_json()})
    _ensure_n2_cached(cache, key.n)
    return zero_functional_oracle(key, ds)


def _ensure_n2_cached(cache: BasisCache, n: int) -> None:
    from .divspaces import cached_basis_n2
    from .normal import n2_space_to_json
    key = f"N2/{n}/up"
    if cache.get(key) is None:
        cache.put(key, n2_space_to_json(cached_basis_n2(n)))


def cmd_verify_all(args, stream) -> int:
    from .acceptance import run_suite
    results = run_suite(ceiling=args.ceiling, stream=stream)
    failed = [r for r in results if r["status"] == "FAIL"]
    return EXIT_OK if not failed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divlab",
        description="Exact computations around second-order divergence-free "
                    "natural tensors.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--signature", default=None,
                        help="P,Q with P+Q=n (default: n,0)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--modulus", choices=["exact", "2prime"],
                        default="exact")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--cache-dir", default=None)
        sp.add_argument("--format", choices=["json", "csv"], default="json")
        sp.add_argument("--ceiling", type=int, default=200000,
                        help="refuse computations above this ambient size")

    sp = sub.add_parser("dims", help="dimension table of divergence spaces")
    sp.add_argument("--n", required=True, help="dimension or range a..b")
    sp.add_argument("--p", required=True, help="tensor slots or range")
    sp.add_argument("--m", required=True, help="degree or range")
    sp.add_argument("--variant", choices=sorted(VARIANTS), default="plain")
    common(sp)
    sp.set_defaults(func=cmd_dims)

    sp = sub.add_parser("lovelock", help="evaluate and verify L_k on a seeded jet")
    sp.add_argument("--n", required=True)
    sp.add_argument("--k", required=True)
    common(sp)
    sp.set_defaults(func=cmd_lovelock)

    sp = sub.add_parser("graph", help="classify a component key")
    sp.add_argument("key", help='component key "j1..jp;a1b1c1d1;..."')
    sp.add_argument("--n", required=True)
    common(sp)
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("verify-all", help="run the acceptance suite")
    common(sp)
    sp.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code or 0)
    if getattr(args, "cache_dir", None) is None:
        args.cache_dir = os.environ.get("DIVLAB_CACHE")
    elif os.environ.get("DIVLAB_CACHE"):
        args.cache_dir = os.environ["DIVLAB_CACHE"]
    try:
        return args.func(args, sys.stdout)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
