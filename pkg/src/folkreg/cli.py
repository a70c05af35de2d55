"""Command-line front end: ``folkreg <command> [flags]``.

Exit codes: 0 success, 1 usage/input error, 2 the computation ran but failed
(irregular pair found is *not* a failure; a starved embedding or a pipeline
that finds no copy is).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import formats
from .embedding import FailureTrace, TargetGraph, embed, verify_embedding
from .formats import ParseError
from .graph import DenseGraph, GraphError, random_host
from .harness import InfeasibleEpsilon, PipelineConfig, random_target, reduced_graph, run_pipeline
from .partition import absorb_exceptional, compute_verdicts, iterate_to_regular, multicolor_index
from .regularity import RegularityParams, check_pair
from .turan import max_kp_free_oracle, turan_bound


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("FOLKREG_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"FOLKREG_THREADS must be an integer, got {env!r}") from None


def _read_host(path):
    return formats.parse_host(formats.read_text(path), str(path))


def _read_graph(path) -> DenseGraph:
    return formats.parse_graph(formats.read_text(path), str(path))


def _read_partition(path):
    return formats.parse_partition(formats.read_text(path), str(path))


def _params(args, threads: int) -> RegularityParams:
    return RegularityParams(
        epsilon=args.epsilon, m=getattr(args, "m", 1), max_rounds=getattr(args, "max_rounds", 8),
        class_size_floor=getattr(args, "floor", 1), mode=getattr(args, "mode", "practical"),
        sample_trials=args.trials, exhaustive=not args.sampled, seed=args.seed, threads=threads,
    )


def _node(text: str) -> tuple[int, int]:
    try:
        s, i = text.split(":")
        return int(s), int(i)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cluster node must look like s:i, got {text!r}") from None


# -- commands ---------------------------------------------------------------


def cmd_gen(args, threads):
    if args.target:
        if args.n is None or args.delta is None:
            raise UsageError("gen --target needs --n and --delta")
        g = random_target(args.n, args.delta, args.seed)
        formats.write_text(args.out, formats.format_graph(g))
    else:
        if None in (args.parts, args.part_size, args.colors):
            raise UsageError("gen needs --parts, --part-size and --colors (or --target)")
        host = random_host(args.parts, args.part_size, args.colors, args.seed)
        formats.write_text(args.out, formats.format_host(host))
    return 0


def cmd_partition(args, threads):
    host = _read_host(args.host)
    colors = [args.color] if args.color is not None else None
    params = _params(args, threads)
    P, rep = iterate_to_regular(host, params, colors)
    q = rep.q_history[-1]
    if args.absorb:
        P = absorb_exceptional(P)
        q, _ = multicolor_index(host, P, colors)
    formats.write_text(args.out, formats.format_partition(P, params.epsilon, q))
    print(f"k={P.k} rounds={rep.rounds} regular={'true' if rep.regular else 'false'} q={formats.frac_str(q)}")
    return 0


def cmd_check_pair(args, threads):
    host = _read_host(args.host)
    if args.partition:
        P, _ = _read_partition(args.partition)
        A, B = P.cls(args.s, args.i), P.cls(args.t, args.j)
        i, j = args.i, args.j
    else:
        A, B = host.part(args.s), host.part(args.t)
        i = j = 1
    g = host.graph.adj if host.colors is None else host.color_adjacency(args.color)
    st = check_pair(g, A, B, args.epsilon, exhaustive=not args.sampled, trials=args.trials, seed=args.seed)
    print(formats.format_pair((args.s, i, args.t, j, args.color), st))
    return 0


def cmd_reduce(args, threads):
    host = _read_host(args.host)
    P, _ = _read_partition(args.partition)
    P.validate(host)
    params = _params(args, threads)
    stats = compute_verdicts(host, P, params, None)
    F = reduced_graph(host, P, stats)
    ncolors = host.r if host.colors is not None else 1
    formats.write_text(args.out, formats.format_reduced(F, ncolors))
    print(f"edges={F.edge_count}")
    return 0


def cmd_turan(args, threads):
    b = turan_bound(args.p, args.k)
    print(f"bound={b}")
    if args.oracle:
        o = max_kp_free_oracle(args.p, args.k)
        print(f"oracle={o} agree={'true' if o == b else 'false'}")
    return 0


def cmd_embed(args, threads):
    if args.choice == "random" and args.seed is None:
        raise UsageError("embed --choice random needs --seed")
    host = _read_host(args.host)
    G = _read_graph(args.target)
    P, _ = _read_partition(args.partition)
    P.validate(host)
    clusters = [P.cls(s, i) for s, i in args.nodes]
    T = TargetGraph.from_graph(G, len(clusters))
    g = host.graph.adj if host.colors is None else host.color_adjacency(args.color)
    d_floor = args.d_floor if args.d_floor is not None else Fraction(1, host.r if host.colors is not None else 1)
    out = embed(T, g, clusters, args.epsilon, d_floor, choice=args.choice, seed=args.seed)
    if isinstance(out, FailureTrace):
        formats.write_text(args.out, formats.format_failure(out))
        print(f"embedded=false step={out.step}")
        return 2
    ok = verify_embedding(T, out, g, clusters)
    formats.write_text(args.out, formats.format_embedding(out.images, T.phi))
    print(f"embedded=true verified={'true' if ok else 'false'}")
    return 0 if ok else 2


def cmd_folkman(args, threads):
    if args.host:
        host = _read_host(args.host)
        p, part_size, r = host.p, host.part_sizes[0], host.r
    else:
        if None in (args.parts, args.part_size, args.colors):
            raise UsageError("folkman needs --host or all of --parts, --part-size, --colors")
        p, part_size, r = args.parts, args.part_size, args.colors
        host = random_host(p, part_size, r, args.seed)
    if args.target:
        G = _read_graph(args.target)
    elif args.n is not None:
        G = random_target(args.n, args.delta, args.seed)
    else:
        raise UsageError("folkman needs --target or --n")
    cfg = PipelineConfig(
        delta=args.delta, r=r, p=p, epsilon=args.epsilon, m=args.m, part_size=part_size,
        mode=args.mode, exhaustive=not args.sampled, sample_trials=args.trials,
        max_rounds=args.max_rounds, clique_retries=args.retries, paper_strict=args.paper_strict,
        class_size_floor=args.floor, seed=args.seed, threads=threads,
    )
    rep = run_pipeline(host, G, cfg)
    formats.write_text(args.out, rep.to_text(timings=not args.no_timings))
    if rep.success:
        print(f"result=ok color={rep.color}")
        return 0
    print(f"result=fail stage={rep.failed_stage}")
    return 2


def cmd_verify(args, threads):
    host = _read_host(args.host)
    if args.report:
        pr = formats.parse_report(formats.read_text(args.report), str(args.report))
        if pr.images is None or pr.color is None:
            print("verified=false reason=no-embedding")
            return 2
        G, images, color, ids = pr.target, pr.images, pr.color, pr.cluster_ids
        clusters = pr.clusters
    else:
        if not (args.target and args.embedding) or args.color is None:
            raise UsageError("verify needs --report, or --target, --embedding and --color")
        G = _read_graph(args.target)
        images, ids = formats.parse_embedding(formats.read_text(args.embedding), str(args.embedding))
        color, clusters = args.color, None
    if len(images) != G.n:
        raise ParseError(str(args.report or args.embedding), 1, f"{len(images)} map lines for a {G.n}-vertex target")
    if any(not 0 <= v < host.n for v in images):
        print("verified=false reason=vertex-out-of-range")
        return 2
    T = TargetGraph(G, max(ids, default=0) + 1, ids)
    ok = verify_embedding(T, images, host.color_adjacency(color) if host.colors is not None else host.graph.adj, clusters)
    print(f"verified={'true' if ok else 'false'}")
    return 0 if ok else 2


# -- parser -----------------------------------------------------------------


def _regularity_flags(sp, seed_required=True):
    sp.add_argument("--epsilon", type=_fraction, required=True)
    sp.add_argument("--seed", type=int, required=seed_required)
    sp.add_argument("--sampled", action="store_true", help="sampled verdicts even for small pairs")
    sp.add_argument("--trials", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="folkreg", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="worker cap (falls back to FOLKREG_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="random coloured host or random bounded-degree target")
    sp.add_argument("--parts", type=int)
    sp.add_argument("--part-size", type=int)
    sp.add_argument("--colors", type=int)
    sp.add_argument("--target", action="store_true", help="emit a target graph instead of a host")
    sp.add_argument("--n", type=int)
    sp.add_argument("--delta", type=int)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("partition", help="refine to a regular partition")
    sp.add_argument("--host", required=True)
    _regularity_flags(sp)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--max-rounds", type=int, default=8)
    sp.add_argument("--floor", type=int, default=1, help="never cut a class below this size")
    sp.add_argument("--mode", choices=("practical", "faithful"), default="practical")
    sp.add_argument("--color", type=int, help="refine for one colour only")
    sp.add_argument("--absorb", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("check-pair", help="regularity verdict for one pair")
    sp.add_argument("--host", required=True)
    sp.add_argument("--partition")
    sp.add_argument("--s", type=int, default=0)
    sp.add_argument("--i", type=int, default=1)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--color", type=int, default=0)
    _regularity_flags(sp)
    sp.set_defaults(func=cmd_check_pair)

    sp = sub.add_parser("reduce", help="reduced graph of a partition")
    sp.add_argument("--host", required=True)
    sp.add_argument("--partition", required=True)
    _regularity_flags(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("turan", help="K_p-free edge bound in K_p(k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--oracle", action="store_true")
    sp.set_defaults(func=cmd_turan)

    sp = sub.add_parser("embed", help="greedy embedding into given clusters")
    sp.add_argument("--host", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--partition", required=True)
    sp.add_argument("--nodes", type=_node, nargs="+", required=True, metavar="S:I")
    sp.add_argument("--color", type=int, default=0)
    sp.add_argument("--epsilon", type=_fraction, required=True)
    sp.add_argument("--d-floor", type=_fraction)
    sp.add_argument("--choice", choices=("lowest", "random"), default="lowest")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("folkman", help="end-to-end monochromatic copy search")
    sp.add_argument("--host")
    sp.add_argument("--target")
    sp.add_argument("--parts", type=int)
    sp.add_argument("--part-size", type=int)
    sp.add_argument("--colors", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--delta", type=int, default=3)
    sp.add_argument("--epsilon", type=_fraction, default=Fraction(1, 10))
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--mode", choices=("practical", "faithful"), default="practical")
    sp.add_argument("--sampled", action="store_true")
    sp.add_argument("--trials", type=int, default=64)
    sp.add_argument("--max-rounds", type=int, default=6)
    sp.add_argument("--retries", type=int, default=3)
    sp.add_argument("--floor", type=int, default=1)
    sp.add_argument("--paper-strict", action="store_true")
    sp.add_argument("--no-timings", action="store_true", help="write ms=0 for byte-stable reports")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_folkman)

    sp = sub.add_parser("verify", help="re-check an embedding against a host")
    sp.add_argument("--host", required=True)
    sp.add_argument("--report")
    sp.add_argument("--target")
    sp.add_argument("--embedding")
    sp.add_argument("--color", type=int)
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, _threads(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except (GraphError, InfeasibleEpsilon, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
