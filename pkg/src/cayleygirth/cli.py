"""Command-line interface.

Every command prints a JSON document by default (--format text/csv for the
human and spreadsheet renderings) and is fully determined by its flags: the
same invocation always produces the same bytes, whatever --threads says.

Exit codes: 0 success, 2 configuration error, 3 resource limit hit,
4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import random
import sys

from . import genetics, words
from .experiments import (
    ExperimentConfig,
    SearchSpaceExceeded,
    count_projective_zeros,
    HomogeneousPoly,
    mix64,
    pgl_word_prob_bound,
    run_girth_experiment,
    estimate_word_prob,
    shortest_law,
    sn_word_prob_bound,
    split_product_poly,
    union_bound_threshold,
    verify_ping_pong_form,
    wn_order_experiment,
    _round12,
)
from .genetics import PopulationCapExceeded, p1_bound, wn_word_prob_bound
from .girth import (
    DEFAULT_MAX_GIRTH,
    DEFAULT_MEMORY_LIMIT,
    GeneratorTuple,
    GirthMemoryError,
    girth,
    moore_bound,
    power_upper_bound,
)
from .groups import make_context

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--out", default=None, help="write output to this path instead of stdout")
    sub.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sub.add_argument("--verbose", action="store_true")


def _add_group_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--group", required=True, choices=("sym", "sl2", "pgl2", "w2"))
    sub.add_argument("--p", type=int, help="prime modulus (sl2/pgl2)")
    sub.add_argument("--n", type=int, help="degree (sym)")
    sub.add_argument("--height", type=int, help="tree height (w2)")


def _resolve_param(args) -> int:
    wanted = {"sym": "n", "sl2": "p", "pgl2": "p", "w2": "height"}[args.group]
    value = getattr(args, wanted)
    if value is None:
        raise ValueError(f"group {args.group} needs --{wanted}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cayleygirth")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("girth", help="girth of one random Cayley graph")
    _add_group_flags(sub)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--max-girth", type=int, default=DEFAULT_MAX_GIRTH)
    sub.add_argument("--memory-limit", type=int, default=DEFAULT_MEMORY_LIMIT)
    _add_common(sub)

    sub = commands.add_parser("experiment", help="seeded multi-trial girth experiment")
    _add_group_flags(sub)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--trials", type=int, default=1000)
    sub.add_argument("--max-girth", type=int, default=DEFAULT_MAX_GIRTH)
    sub.add_argument("--memory-limit", type=int, default=DEFAULT_MEMORY_LIMIT)
    _add_common(sub)

    sub = commands.add_parser("wordprob", help="Monte Carlo identity probability of a word")
    _add_group_flags(sub)
    sub.add_argument("--word", required=True, help="a-z forward, A-Z inverse, e.g. AbcaaC")
    sub.add_argument("--trials", type=int, default=10000)
    _add_common(sub)

    sub = commands.add_parser("amoeba", help="crossover fission model")
    sub.add_argument("--word", required=True)
    sub.add_argument("--mode", choices=("fission", "greedy", "population"), default="population")
    sub.add_argument("--active", default="", help="active bases for --mode fission, e.g. ab")
    sub.add_argument("--max-gen", type=int, default=30)
    sub.add_argument("--runs", type=int, default=1000)
    sub.add_argument("--population-cap", type=int, default=1 << 22)
    _add_common(sub)

    sub = commands.add_parser("bounds", help="evaluate the analytic bounds")
    sub.add_argument("--kind", required=True,
                     choices=("moore", "sn", "pgl", "p1", "wn", "union-pgl", "union-sn"))
    sub.add_argument("--degree", type=int)
    sub.add_argument("--size", type=int)
    sub.add_argument("--n", type=int)
    sub.add_argument("--p", type=int)
    sub.add_argument("--length", type=int)
    sub.add_argument("--height", type=int)
    _add_common(sub)

    sub = commands.add_parser("law", help="shortest identical relation over all tuples")
    _add_group_flags(sub)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--max-len", type=int, default=12)
    sub.add_argument("--node-cap", type=int, default=20_000_000)
    sub.add_argument("--ping-pong", default=None,
                     help="comma list l1,k1,l2,k2,...: verify the unipotent product shape instead")
    _add_common(sub)

    sub = commands.add_parser("zeros", help="projective zero count vs the degree bound")
    sub.add_argument("--m", type=int, default=3)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--poly", default=None,
                     help="monomials 'coeff,e0,e1,..;coeff,e0,e1,..'")
    sub.add_argument("--split", default=None,
                     help="comma list c1,c2,..: use prod (x0 - ci x1)")
    _add_common(sub)

    sub = commands.add_parser("order-stats", help="order statistics of tree automorphisms")
    sub.add_argument("--height", type=int, required=True)
    sub.add_argument("--trials", type=int, default=1000)
    _add_common(sub)

    return parser


def _cmd_girth(args) -> dict:
    ctx = make_context(args.group, _resolve_param(args))
    rng = random.Random(args.seed)
    gens = tuple(ctx.sample_uniform(rng) for _ in range(args.k))
    gt = GeneratorTuple(ctx, gens)
    result = girth(gt, args.max_girth, args.memory_limit)
    normalized = None
    if result.is_exact:
        normalized = _round12(result.girth / (ctx.group_size_log2() / math.log2(2 * args.k - 1)))
    return {
        "group": args.group,
        "param": _resolve_param(args),
        "k": args.k,
        "seed": args.seed,
        "max_girth": args.max_girth,
        "girth": result.girth,
        "witness": words.format_word(result.witness) if result.is_exact else "",
        "lower_bound": result.lower_bound,
        "normalized": normalized,
        "power_upper_bound": power_upper_bound(gt),
        "elements_stored": result.elements_stored,
        "depth_reached": result.depth_reached,
    }


def _cmd_experiment(args):
    cfg = ExperimentConfig(
        family=args.group,
        param=_resolve_param(args),
        k=args.k,
        trials=args.trials,
        seed=args.seed,
        max_girth=args.max_girth,
        threads=args.threads,
        memory_limit=args.memory_limit,
        out=args.out,
    )
    return run_girth_experiment(cfg)


def _cmd_wordprob(args) -> dict:
    ctx = make_context(args.group, _resolve_param(args))
    word = words.parse_word(args.word)
    rng = random.Random(args.seed)
    est = estimate_word_prob(ctx, word, args.trials, rng)
    return {
        "group": args.group,
        "param": _resolve_param(args),
        "word": words.format_word(word),
        "trials": args.trials,
        "seed": args.seed,
        "estimate": _round12(est.estimate),
        "ci_low": _round12(est.ci_low),
        "ci_high": _round12(est.ci_high),
        "hits": est.hits,
    }


def _cmd_amoeba(args) -> dict:
    word = words.parse_word(args.word)
    if not word:
        raise ValueError("genome reduces to the empty word")
    rng = random.Random(args.seed)
    base = {
        "word": words.format_word(word),
        "mode": args.mode,
        "seed": args.seed,
    }
    if args.mode == "fission":
        active = {abs(words.parse_word(ch)[0]): 1 for ch in args.active}
        activity = {b: active.get(b, 0) for b in {abs(l) for l in word}}
        pair = genetics.fission(word, activity)
        base.update({
            "active": sorted(args.active),
            "child1": genetics.format_dna(pair.child1, doubled=True),
            "child2": genetics.format_dna(pair.child2, doubled=True),
            "child1_complexity": genetics.complexity(pair.child1),
            "child2_complexity": genetics.complexity(pair.child2),
            "parent_complexity": genetics.complexity(word),
        })
        return base
    if args.mode == "greedy":
        first_free: dict[str, int] = {}
        final_chi: dict[str, int] = {}
        for run in range(args.runs):
            run_rng = random.Random(mix64(args.seed, run))
            traj = genetics.greedy_lineage(word, args.max_gen, run_rng)
            free_gen = next((g for g, (_, chi) in enumerate(traj) if chi <= 0), None)
            key = "none" if free_gen is None else str(free_gen)
            first_free[key] = first_free.get(key, 0) + 1
            chi_key = str(traj[-1][1])
            final_chi[chi_key] = final_chi.get(chi_key, 0) + 1
        base.update({
            "runs": args.runs,
            "max_gen": args.max_gen,
            "first_free": _sorted_hist(first_free),
            "final_complexity": _sorted_hist(final_chi),
        })
        return base
    first_free = {}
    for run in range(args.runs):
        run_rng = random.Random(mix64(args.seed, run))
        gen = genetics.population_first_free(word, args.max_gen, run_rng, args.population_cap)
        key = "none" if gen is None else str(gen)
        first_free[key] = first_free.get(key, 0) + 1
    base.update({
        "runs": args.runs,
        "max_gen": args.max_gen,
        "first_free": _sorted_hist(first_free),
    })
    return base


def _sorted_hist(hist: dict[str, int]) -> dict[str, int]:
    def key(item):
        return (1, 0) if item[0] == "none" else (0, int(item[0]))

    return dict(sorted(hist.items(), key=key))


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ValueError(f"--kind {args.kind} needs --{name.replace('_', '-')}")


def _cmd_bounds(args) -> dict:
    kind = args.kind
    if kind == "moore":
        _require(args, "degree", "size")
        value = moore_bound(args.degree, args.size)
    elif kind == "sn":
        _require(args, "n", "length")
        value = _round12(sn_word_prob_bound(args.n, args.length))
    elif kind == "pgl":
        _require(args, "p", "length")
        value = _round12(pgl_word_prob_bound(args.p, args.length))
    elif kind == "p1":
        _require(args, "n", "length")
        value = _round12(p1_bound(args.n, args.length))
    elif kind == "wn":
        _require(args, "height", "length")
        value = _round12(wn_word_prob_bound(args.height, args.length))
    elif kind == "union-pgl":
        _require(args, "degree", "p")
        value = union_bound_threshold(args.degree, args.p, "pgl")
    else:
        _require(args, "degree", "n")
        value = union_bound_threshold(args.degree, args.n, "sn")
    payload = {"kind": kind, "value": value}
    for name in ("degree", "size", "n", "p", "length", "height"):
        if getattr(args, name) is not None:
            payload[name] = getattr(args, name)
    return payload


def _cmd_law(args) -> dict:
    if args.ping_pong is not None:
        values = [int(v) for v in args.ping_pong.split(",") if v]
        if len(values) % 2:
            raise ValueError("--ping-pong needs an even number of exponents")
        pairs = list(zip(values[::2], values[1::2]))
        return {"ping_pong": values, "valid": verify_ping_pong_form(pairs)}
    ctx = make_context(args.group, _resolve_param(args))
    result = shortest_law(ctx, args.k, args.max_len, args.node_cap)
    return {
        "group": args.group,
        "param": _resolve_param(args),
        "k": args.k,
        "max_length": args.max_len,
        "length": result.length,
        "word": words.format_word(result.word) if result.is_exact else "",
        "lower_bound": result.lower_bound,
        "nodes_visited": result.nodes_visited,
    }


def _cmd_zeros(args) -> dict:
    if (args.poly is None) == (args.split is None):
        raise ValueError("give exactly one of --poly or --split")
    if args.split is not None:
        cs = [int(v) % args.p for v in args.split.split(",") if v != ""]
        poly = split_product_poly(args.p, cs, args.m)
    else:
        monomials = []
        for chunk in args.poly.split(";"):
            values = [int(v) for v in chunk.split(",")]
            if len(values) != args.m + 1:
                raise ValueError(f"monomial {chunk!r} needs coeff plus {args.m} exponents")
            monomials.append((values[0], tuple(values[1:])))
        poly = HomogeneousPoly(args.m, args.p, tuple(monomials))
    res = count_projective_zeros(poly)
    return {
        "m": poly.m,
        "p": poly.p,
        "degree": poly.degree,
        "zeros": res.zeros,
        "bound": res.bound,
        "within_bound": res.within_bound,
        "attains_bound": res.attains_bound,
    }


def _cmd_order_stats(args) -> dict:
    rng = random.Random(args.seed)
    stats = wn_order_experiment(args.height, args.trials, rng)
    return {
        "height": stats.height,
        "trials": stats.trials,
        "seed": args.seed,
        "alpha_hat": _round12(stats.alpha_hat),
        "log2_order_counts": {str(k): v for k, v in stats.log2_order_counts.items()},
    }


_HANDLERS = {
    "girth": _cmd_girth,
    "experiment": _cmd_experiment,
    "wordprob": _cmd_wordprob,
    "amoeba": _cmd_amoeba,
    "bounds": _cmd_bounds,
    "law": _cmd_law,
    "zeros": _cmd_zeros,
    "order-stats": _cmd_order_stats,
}


def _render(payload, fmt: str) -> str:
    from .experiments import GirthHistogram

    if isinstance(payload, GirthHistogram):
        if fmt == "json":
            return payload.to_json_bytes().decode()
        if fmt == "csv":
            return payload.to_csv_text()
        return payload.to_text_table()
    if fmt == "json":
        return json.dumps(payload, separators=(",", ":")) + "\n"
    if fmt == "csv":
        lines = ["key,value"]
        for key, value in payload.items():
            lines.append(f"{key},{json.dumps(value) if isinstance(value, (dict, list)) else value}")
        return "\n".join(lines) + "\n"
    return "".join(f"{key}: {value}\n" for key, value in payload.items())


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        stream=sys.stderr,
        format="%(message)s",
    )
    try:
        payload = _HANDLERS[args.command](args)
        text = _render(payload, args.format)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (GirthMemoryError, PopulationCapExceeded, SearchSpaceExceeded) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001  internal invariant violated
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
