"""Command-line entry point: ``startreemix <command> FILE [options]``.

Metric files hold either ``{"n": .., "entries": [..]}``, a whitespace square
matrix, or a single line with the upper-triangular entries.  ``-`` reads stdin.

Exit codes: 0 success, 1 bad input, 2 enumeration budget exceeded,
3 parameters or input outside the requested domain.
"""
from __future__ import annotations

import argparse
import random
import sys
from fractions import Fraction

from . import serialize as ser
from .errors import BudgetExceeded, NotInImage, OutOfDomain, StarInput, StarTreeMixError
from .metric import DissimilarityMap, quartet_pairing, tropical_mix
from .mixture import decide_two_star_mixture, enumerate_fiber_cases, sample_decomposition
from .oracle import BUDGET_ENV, SIGN_MODES, cut_obstruction, k_star_feasible, secant_membership, star_rank_bounds
from .trees import classify_topology

EXIT_INPUT, EXIT_BUDGET, EXIT_DOMAIN = 1, 2, 3


def _read_metric(path: str) -> DissimilarityMap:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    return ser.parse_metric(text)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def cmd_classify(args) -> dict:
    D = _read_metric(args.file)
    out = ser.topology_to_json(classify_topology(D))
    if args.quartets:
        import itertools

        out["quartets"] = [
            ser.quartet_to_json(quartet_pairing(D, *quad))
            for quad in itertools.combinations(range(1, D.n + 1), 4)
        ]
    return out


def cmd_decide(args) -> dict:
    D = _read_metric(args.file)
    d = decide_two_star_mixture(
        D, cross_check=args.cross_check, regime=args.regime, budget=args.budget, threads=args.threads
    )
    return ser.decision_to_json(d)


def cmd_fibers(args) -> dict:
    D = _read_metric(args.file)
    fams = enumerate_fiber_cases(D, args.regime)
    return {"regime": args.regime, "families": [ser.family_to_json(f) for f in fams]}


def cmd_sample(args) -> dict:
    D = _read_metric(args.file)
    if (args.u is None) != (args.w is None):
        raise OutOfDomain("give both --u and --w, or neither")
    u, w = args.u, args.w
    if u is None:
        fams = {f.case_id: f for f in enumerate_fiber_cases(D, args.regime)}
        if args.case not in fams:
            raise OutOfDomain(f"case {args.case} is not admissible here; admissible: {sorted(fams)}")
        grid = fams[args.case].grid(args.grid)
        if not grid:
            raise OutOfDomain(f"case {args.case} has an empty interior")
        u, w = random.Random(args.seed).choice(grid)
    first, second = sample_decomposition(D, args.case, u, w, regime=args.regime, swap=args.swap)
    return {
        "case": args.case,
        "seed": args.seed,
        "u": ser.q(u),
        "w": ser.q(w),
        "regime": args.regime,
        "stars": [ser.star_to_json(first), ser.star_to_json(second)],
    }


def cmd_mix(args) -> dict:
    maps = [_read_metric(p) for p in args.files]
    return {"mixture": ser.metric_to_json(tropical_mix(*maps))}


def cmd_oracle(args) -> dict:
    D = _read_metric(args.file)
    res = k_star_feasible(D, args.k, args.sign, budget=args.budget, threads=args.threads)
    return ser.feasibility_to_json(res)


def cmd_secant(args) -> dict:
    D = _read_metric(args.file)
    res = secant_membership(D.entries, args.k, positivity=args.positive, budget=args.budget, threads=args.threads)
    out = ser.feasibility_to_json(res)
    out["secant_k"] = args.k
    out["positivity"] = args.positive
    return out


def cmd_rank(args) -> dict:
    D = _read_metric(args.file)
    return ser.rank_to_json(star_rank_bounds(D, args.sign, args.max_k, budget=args.budget, threads=args.threads))


def cmd_obstruction(args) -> dict:
    D = _read_metric(args.file)
    return {"cut_obstruction": cut_obstruction(D)}


def _table(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines += _table(v, indent + 1)
            else:
                lines.append(f"{pad}{k}: {_cell(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if _flat(v):
                lines.append(f"{pad}- {_cell(v)}")
            else:
                lines.append(f"{pad}- [{i}]")
                lines += _table(v, indent + 1)
    return lines


def _flat(v) -> bool:
    if isinstance(v, list):
        return all(not isinstance(x, (dict, list)) for x in v)
    return not isinstance(v, dict)


def _cell(v) -> str:
    if isinstance(v, list):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    if v is None:
        return "-"
    if isinstance(v, dict):
        return "{}"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--decimals", type=int, default=None, metavar="N",
                        help="also render rationals as decimals with N places")
    common.add_argument("--budget", type=_positive_int, default=None,
                        help=f"max k^C(n,2) patterns (default ${BUDGET_ENV} or 3^10)")
    common.add_argument("--threads", type=_positive_int, default=1)

    p = argparse.ArgumentParser(prog="startreemix", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="topology of a metric")
    s.add_argument("file")
    s.add_argument("--quartets", action="store_true", help="list every quartet's pair sums")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("decide", parents=[common], help="is it a mixture of two stars?")
    s.add_argument("file")
    s.add_argument("--regime", choices=("strict", "closed"), default="strict")
    s.add_argument("--cross-check", action="store_true", help="also run the exact oracle")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("fibers", parents=[common], help="case families of the fiber")
    s.add_argument("file")
    s.add_argument("--regime", choices=("strict", "closed"), default="strict")
    s.set_defaults(func=cmd_fibers)

    s = sub.add_parser("sample", parents=[common], help="two stars from one case family")
    s.add_argument("file")
    s.add_argument("--case", required=True)
    s.add_argument("--u", type=_rational)
    s.add_argument("--w", type=_rational)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grid", type=_positive_int, default=5, help="grid size for random draws")
    s.add_argument("--swap", action="store_true", help="exchange the two stars")
    s.add_argument("--regime", choices=("strict", "closed"), default="strict")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("mix", parents=[common], help="entrywise max of several maps")
    s.add_argument("files", nargs="+")
    s.set_defaults(func=cmd_mix)

    s = sub.add_parser("oracle", parents=[common], help="exact k-star feasibility")
    s.add_argument("file")
    s.add_argument("--k", type=_positive_int, default=2)
    s.add_argument("--sign", choices=SIGN_MODES, default="positive")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("secant", parents=[common], help="membership in the k-th tropical secant")
    s.add_argument("file")
    s.add_argument("--k", type=int, default=1)
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--positive", dest="positive", action="store_true", default=True)
    grp.add_argument("--signed", dest="positive", action="store_false")
    s.set_defaults(func=cmd_secant)

    s = sub.add_parser("rank", parents=[common], help="smallest number of star summands")
    s.add_argument("file")
    s.add_argument("--sign", choices=SIGN_MODES, default="signed")
    s.add_argument("--max-k", type=_positive_int, default=2)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("obstruction", parents=[common], help="cut-metric obstruction test")
    s.add_argument("file")
    s.set_defaults(func=cmd_obstruction)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "secant" and args.k < 0:
        print("error: --k must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        payload = args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (OutOfDomain, NotInImage, StarInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (StarTreeMixError, ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = {"command": args.command, **payload}
    payload = ser.with_decimals(payload, args.decimals)
    if args.format == "json":
        print(ser.dumps(payload))
    else:
        print("\n".join(_table({"version": ser.SCHEMA_VERSION, **payload})))
    return 0


if __name__ == "__main__":
    sys.exit(main())
