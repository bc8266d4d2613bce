"""Command-line interface.

Exit codes: 0 success, 1 when ``decide`` answers false, 2 on input errors,
3 when ``bench`` sees the two engines disagree.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from functools import partial

from .bench import GENERATORS, BenchMismatchError, run_bench
from .blocked import MemoTable, MemoVersionError, boxed_decide, make_partition, memo_stats
from .distance import CapExceededError, compute_bisect, compute_exact, discrete_frechet
from .encoding import signature_ranks
from .freespace import FreeSpace, naive_decide
from .generators import perturbed_copy, random_walk, zigzag
from .geometry import DegenerateInputError
from .io import CurveFormatError, format_float, parse_curve, write_curve

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_MISMATCH = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load_memo(args, alpha, theta):
    if not args.memo_persist:
        return MemoTable(alpha, theta)
    try:
        return MemoTable.load(args.memo_persist, alpha, theta)
    except FileNotFoundError:
        return MemoTable(alpha, theta)
    except MemoVersionError as exc:
        raise InputError(str(exc)) from None


def _decider(args, tau, sigma):
    """Return ``(decide_fn, memo)`` for the selected engine."""
    if args.engine == "naive":
        return naive_decide, None
    part = make_partition(len(tau), len(sigma), args.alpha, args.theta) if len(tau) > 1 and len(sigma) > 1 else None
    alpha = part.alpha if part else args.alpha
    theta = part.theta if part else args.theta
    memo = _load_memo(args, alpha, theta)
    return partial(boxed_decide, partition=part, memo=memo, debug=args.debug_table), memo


def _save_memo(args, memo):
    if memo is not None and args.memo_persist and memo.alpha is not None:
        memo.save(args.memo_persist)


def _interval_json(iv):
    return None if iv.is_null else [iv.lo, iv.hi]


def cmd_decide(args) -> int:
    tau, sigma = parse_curve(args.tau), parse_curve(args.sigma)
    if args.delta < 0:
        raise InputError("--delta must be nonnegative")
    decide, memo = _decider(args, tau, sigma)
    if args.engine == "naive":
        res = naive_decide(tau, sigma, args.delta, debug=args.debug_table)
    else:
        res = decide(tau, sigma, args.delta)
    print("true" if res.reachable else "false")
    if args.debug_table:
        if res.rows is not None:
            table = {
                "rows": [[_interval_json(iv) for iv in row] for row in res.rows],
                "cols": [[_interval_json(iv) for iv in col] for col in res.cols],
            }
            print(json.dumps(table))
        if res.stats:
            print(json.dumps(res.stats, sort_keys=True))
    if memo is not None:
        entries, hits, misses = memo_stats(memo)
        print(f"# memo entries={entries} hits={hits} misses={misses}", file=sys.stderr)
        _save_memo(args, memo)
    return EXIT_OK if res.reachable else EXIT_FALSE


def cmd_compute(args) -> int:
    tau, sigma = parse_curve(args.tau), parse_curve(args.sigma)
    decide, memo = _decider(args, tau, sigma)
    if args.exact:
        try:
            res = compute_exact(tau, sigma, decide)
        except CapExceededError as exc:
            raise InputError(str(exc)) from None
    else:
        if not args.eps > 0:
            raise InputError("--eps must be positive")
        res = compute_bisect(tau, sigma, decide, args.eps)
    if args.json:
        print(json.dumps({"value": res.value, "mode": res.mode, "certificate": res.certificate,
                          "decisions": res.decisions}, sort_keys=True))
    else:
        print(format_float(res.value))
    _save_memo(args, memo)
    return EXIT_OK


def cmd_discrete(args) -> int:
    tau, sigma = parse_curve(args.tau), parse_curve(args.sigma)
    print(format_float(discrete_frechet(tau, sigma)))
    return EXIT_OK


def _signature_dump(tau, sigma, delta, part):
    fs = FreeSpace(tau, sigma, delta)
    cols = []
    for k, rb in enumerate(part.row_blocks):
        vs = slice(rb.a, rb.a + rb.width + 1)
        ranks = signature_ranks(fs.s[vs], fs.e[vs])
        cols.append({"block": k, "a": rb.a, "width": rb.width, "ranks": ranks.tolist()})
    rows = []
    for l, cb in enumerate(part.col_blocks):
        vs = slice(cb.a, cb.a + cb.width + 1)
        ranks = signature_ranks(fs.sp[vs], fs.ep[vs])
        rows.append({"block": l, "a": cb.a, "width": cb.width, "ranks": ranks.tolist()})
    return fs, {"alpha": part.alpha, "theta": part.theta, "delta": delta,
                "col_signatures": cols, "row_signatures": rows}


def free_space_svg(fs: FreeSpace, cell: int = 40) -> str:
    """Free-space boundary intervals (blue) and reachable intervals (red) as SVG."""
    n, m = fs.n, fs.m
    res = naive_decide(fs.tau, fs.sigma, fs.delta, debug=True, space=fs)
    w, h = (m - 1) * cell, (n - 1) * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w + 2}" height="{h + 2}" viewBox="-1 -1 {w + 2} {h + 2}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white" stroke="black"/>',
    ]
    for i in range(1, n - 1):
        out.append(f'<line x1="0" y1="{h - i * cell}" x2="{w}" y2="{h - i * cell}" stroke="#ccc"/>')
    for j in range(1, m - 1):
        out.append(f'<line x1="{j * cell}" y1="0" x2="{j * cell}" y2="{h}" stroke="#ccc"/>')

    def hseg(i, j, lo, hi, color, width):
        y = h - i * cell
        out.append(f'<line x1="{(j + lo) * cell:.3f}" y1="{y}" x2="{(j + hi) * cell:.3f}" y2="{y}" '
                   f'stroke="{color}" stroke-width="{width}"/>')

    def vseg(j, i, lo, hi, color, width):
        x = j * cell
        out.append(f'<line x1="{x}" y1="{h - (i + lo) * cell:.3f}" x2="{x}" y2="{h - (i + hi) * cell:.3f}" '
                   f'stroke="{color}" stroke-width="{width}"/>')

    for i in range(n):
        for j in range(m - 1):
            iv = fs.ball(i, j)
            if not iv.is_null:
                hseg(i, j, iv.lo, iv.hi, "#36c", 4)
    for j in range(m):
        for i in range(n - 1):
            iv = fs.ball_p(j, i)
            if not iv.is_null:
                vseg(j, i, iv.lo, iv.hi, "#36c", 4)
    for i, row in enumerate(res.rows):
        for j, iv in enumerate(row):
            if not iv.is_null:
                hseg(i, j, iv.lo, iv.hi, "#c33", 1.5)
    for j, col in enumerate(res.cols):
        for i, iv in enumerate(col):
            if not iv.is_null:
                vseg(j, i, iv.lo, iv.hi, "#c33", 1.5)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_sig_dump(args) -> int:
    tau, sigma = parse_curve(args.tau), parse_curve(args.sigma)
    if args.delta < 0:
        raise InputError("--delta must be nonnegative")
    if len(tau) < 2 or len(sigma) < 2:
        raise InputError("sig-dump needs curves with at least one edge each")
    part = make_partition(len(tau), len(sigma), args.alpha, args.theta)
    fs, dump = _signature_dump(tau, sigma, args.delta, part)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(free_space_svg(fs))
    if args.format == "json":
        print(json.dumps(dump))
    else:
        print(f"# alpha={part.alpha} theta={part.theta} delta={format_float(args.delta)}")
        for blk in dump["col_signatures"]:
            for j, ranks in enumerate(blk["ranks"]):
                print(f"col block={blk['block']} a={blk['a']} width={blk['width']} edge={j}: "
                      + " ".join(map(str, ranks)))
        for blk in dump["row_signatures"]:
            for i, ranks in enumerate(blk["ranks"]):
                print(f"row block={blk['block']} a={blk['a']} width={blk['width']} edge={i}: "
                      + " ".join(map(str, ranks)))
    return EXIT_OK


def cmd_bench(args) -> int:
    memo = None
    if args.memo_persist:
        alpha = args.alpha
        theta = args.theta
        part = make_partition(args.n, args.m or args.n, alpha, theta)
        memo = _load_memo(args, part.alpha, part.theta)
    try:
        report = run_bench(
            n=args.n, m=args.m, instances=args.instances, seed=args.seed, alpha=args.alpha, theta=args.theta,
            generator=args.generator, noise=args.noise, delta_factor=args.delta_factor, memo=memo,
        )
    except BenchMismatchError as exc:
        print(f"error: naive/boxed mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    text = report.to_json(args.timings) if args.format == "json" else report.to_text(args.timings)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if memo is not None:
        _save_memo(args, memo)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "walk":
        curve = random_walk(args.n, args.dim, seed=args.seed, step=args.step)
    elif args.kind == "zigzag":
        curve = zigzag(args.n, args.amplitude, args.step, args.dim)
    else:
        if not args.input:
            raise InputError("gen perturb needs --input")
        curve = perturbed_copy(parse_curve(args.input), args.noise, seed=args.seed)
    write_curve(curve, args.out or sys.stdout, args.format)
    return EXIT_OK


def _engine_flags(p):
    p.add_argument("--engine", choices=("naive", "boxed"), default="naive")
    p.add_argument("--alpha", type=int, default=None, help="row block width for the boxed engine")
    p.add_argument("--theta", type=int, default=None, help="column block width for the boxed engine")
    p.add_argument("--memo-persist", metavar="PATH", help="load and save the boxed engine's memo table here")
    p.add_argument("--debug-table", action="store_true",
                   help="dump the interval table (naive) or verify memo hits (boxed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frechetbox", description="Fréchet distance between polygonal curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide whether the Fréchet distance is at most --delta")
    p.add_argument("tau")
    p.add_argument("sigma")
    p.add_argument("--delta", type=float, required=True)
    _engine_flags(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("compute", help="compute the Fréchet distance")
    p.add_argument("tau")
    p.add_argument("sigma")
    p.add_argument("--exact", action="store_true", help="binary search over critical values instead of bisection")
    p.add_argument("--eps", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    _engine_flags(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("discrete", help="discrete Fréchet distance")
    p.add_argument("tau")
    p.add_argument("sigma")
    p.set_defaults(func=cmd_discrete)

    p = sub.add_parser("sig-dump", help="dump block signatures and optionally a free-space SVG")
    p.add_argument("tau")
    p.add_argument("sigma")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--svg", metavar="PATH")
    p.set_defaults(func=cmd_sig_dump)

    p = sub.add_parser("bench", help="compare the naive and boxed engines on seeded instances")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--generator", choices=GENERATORS, default="perturbed")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--delta-factor", type=float, default=1.0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timings", action="store_true", help="include wall times (makes the report nondeterministic)")
    p.add_argument("--memo-persist", metavar="PATH")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="generate a curve file")
    p.add_argument("kind", choices=("walk", "zigzag", "perturb"))
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--input", metavar="PATH", help="curve to perturb")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stay quiet
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (InputError, CurveFormatError, DegenerateInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
