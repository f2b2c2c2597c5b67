"""Command-line interface: `liftfloor <command> ...`.

Exit codes: 0 success, 1 usage error, 2 input-format error, 3 design
infeasible (strict mode).
"""

import logging
import sys
from argparse import ArgumentParser, Namespace
from typing import List, Optional, Sequence, TextIO, Tuple

from .decode import BIAWGN, BSC, ChannelError, ChannelModel, DecoderConfig
from .gf2 import gf2_rank
from .graph import CycleBudgetExceeded, UnknownNodeError, build_tanner_graph, cycle_histogram, girth
from .ies import DesignInfeasible, IesOptions
from .lifting import DFileFormatError, SupportMismatchError, code_rate, dump_dfile, lift, load_dfile
from .matrix import AlistFormatError, IndexingError, emit_alist, read_alist, write_alist
from .sim import (
    FloorBelowSearchDepth,
    StopRule,
    StopRuleError,
    design_pipeline,
    eps_grid,
    estimate_floor,
    monte_carlo,
    predict_fer,
    write_csv,
)
from .trapping import (
    CatalogError,
    SearchBudgetExceeded,
    SearchOptions,
    critical_number_search,
    dump_catalog,
    harvest_trapping_sets,
    read_catalog,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

INPUT_ERRORS = (
    AlistFormatError,
    DFileFormatError,
    CatalogError,
    SupportMismatchError,
    UnknownNodeError,
    IndexingError,
    OSError,
)
USAGE_ERRORS = (
    ChannelError,
    StopRuleError,
    SearchBudgetExceeded,
    CycleBudgetExceeded,
    ValueError,
)


class UsageError(Exception):
    pass


class Parser(ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def parse_range(text: str) -> List[int]:
    """"4" -> [4]; "2..6" -> [2, 3, 4, 5, 6]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError:
        raise UsageError(f"bad degree range {text!r}")


def parse_channel(text: str, rate: float) -> ChannelModel:
    """"bsc:0.01" or "awgn:3.5" (Eb/N0 in dB at the code's rate)."""
    kind, _, value = text.partition(":")
    try:
        x = float(value)
    except ValueError:
        raise UsageError(f"bad channel {text!r}")
    if kind == "bsc":
        return BSC(x)
    if kind == "awgn":
        return BIAWGN.from_ebn0(x, rate)
    raise UsageError(f"unknown channel {kind!r}")


def parse_pair(text: str) -> Tuple[int, int]:
    try:
        a, b = text.split(",")
        return int(float(a)), int(float(b))
    except ValueError:
        raise UsageError(f"expected 'errors,frames', got {text!r}")


def _decoder(args: Namespace) -> DecoderConfig:
    return DecoderConfig(args.decoder, args.max_iter, scaling=args.scaling)


def _search_options(args: Namespace) -> SearchOptions:
    return SearchOptions(workers=args.workers, progress=args.progress)


# ## Commands


def cmd_girth(args: Namespace, out: TextIO) -> int:
    g = girth(build_tanner_graph(read_alist(args.alist)))
    print(g, file=out)
    return EXIT_OK


def cmd_cycles(args: Namespace, out: TextIO) -> int:
    hist = cycle_histogram(build_tanner_graph(read_alist(args.alist)), args.max_len)
    for length, count in hist.items():
        print(f"{length} {count}", file=out)
    return EXIT_OK


def cmd_rank(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    rate = code_rate(H)
    print(f"rank {gf2_rank(H)} rate {float(rate):.4f} ({rate})", file=out)
    return EXIT_OK


def cmd_lift(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    lifted = lift(H, load_dfile(args.dfile, H))
    if args.output:
        write_alist(lifted.matrix, args.output)
    else:
        out.write(emit_alist(lifted.matrix))
    return EXIT_OK


def cmd_design(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    G = build_tanner_graph(H)
    catalog = read_catalog(args.catalog, G, args.max_len)
    design = design_pipeline(
        H,
        catalog,
        parse_range(args.N),
        IesOptions(strict=args.strict),
        baseline_seed=args.baseline_seed,
        progress=args.progress,
    )
    prefix = args.out
    dump_dfile(design.D, f"{prefix}.D")
    write_alist(design.lifted.matrix, f"{prefix}.alist")
    with open(f"{prefix}.report", "w", encoding="utf-8") as f:
        f.write(design.text())
    out.write(design.text())
    return EXIT_OK


def cmd_critnum(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    config = _decoder(args)
    result = critical_number_search(H, config, args.max_weight, options=_search_options(args))
    if result.J is None:
        print(f"none <= {args.max_weight}", file=out)
        return EXIT_OK
    print(f"J {result.J} N_J {len(result.failures)}", file=out)
    if args.harvest:
        catalog = harvest_trapping_sets(result.failures, H, config, build_tanner_graph(H))
        with open(args.harvest, "w", encoding="utf-8") as f:
            f.write(dump_catalog(catalog))
    return EXIT_OK


def cmd_simulate(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    channel = parse_channel(args.channel, float(code_rate(H)) or 1.0)
    errors, frames = parse_pair(args.stop)
    result = monte_carlo(
        H,
        _decoder(args),
        channel,
        StopRule(errors, frames),
        seed=args.seed,
        workers=args.workers,
        code=args.alist,
        progress=args.progress,
    )
    write_csv([result], out, header=not args.no_header)
    return EXIT_OK


def cmd_estimate_floor(args: Namespace, out: TextIO) -> int:
    H = read_alist(args.alist)
    try:
        lo, hi, points = args.eps_grid.split(",")
        grid = eps_grid(float(lo), float(hi), int(points))
    except ValueError:
        raise UsageError(f"bad grid {args.eps_grid!r}")
    config = _decoder(args)
    try:
        floor = estimate_floor(H, config, args.max_weight, grid.tolist(), _search_options(args))
    except FloorBelowSearchDepth as err:
        print(f"floor below search depth: {err}", file=out)
        return EXIT_OK
    print("code,decoder,J,N_J,eps,fer", file=out)
    for eps, fer in zip(floor.eps, predict_fer(floor.J, floor.N_J, floor.eps)):
        print(f"{args.alist},{config.algorithm},{floor.J},{floor.N_J},{eps:.6g},{fer:.6g}", file=out)
    return EXIT_OK


def build_parser() -> ArgumentParser:
    parser = Parser(prog="liftfloor", description="Cyclic liftings against LDPC error floors.")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--progress", action="store_true", help="show progress bars")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("girth", help="girth of the Tanner graph")
    p.add_argument("alist")
    p.set_defaults(func=cmd_girth)

    p = sub.add_parser("cycles", help="number of cycles per length")
    p.add_argument("alist")
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("rank", help="GF(2) rank and rate")
    p.add_argument("alist")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("lift", help="lifted alist from a D file")
    p.add_argument("alist")
    p.add_argument("dfile")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("design", help="IES design over a range of degrees")
    p.add_argument("alist")
    p.add_argument("catalog")
    p.add_argument("--N", required=True, help="degree or range a..b")
    p.add_argument("--out", default="design")
    p.add_argument("--strict", action="store_true", help="stop at the first infeasible set")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--baseline-seed", type=int, default=None)
    p.set_defaults(func=cmd_design)

    def decoder_args(p: ArgumentParser) -> None:
        p.add_argument("--decoder", choices=["ga", "gb", "ms"], default="gb")
        p.add_argument("--max-iter", type=int, default=50)
        p.add_argument("--scaling", type=float, default=1.0)
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("critnum", help="exhaustive critical-number search")
    p.add_argument("alist")
    decoder_args(p)
    p.add_argument("--max-weight", type=int, default=3)
    p.add_argument("--harvest", help="write the harvested catalog here")
    p.set_defaults(func=cmd_critnum)

    p = sub.add_parser("simulate", help="Monte Carlo FER/BER as a CSV row")
    p.add_argument("alist")
    decoder_args(p)
    p.add_argument("--channel", required=True, help="bsc:EPS or awgn:EBN0_DB")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop", default="100,1e7", help="errors,frames")
    p.add_argument("--no-header", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate-floor", help="predicted floor N_J eps^J as CSV")
    p.add_argument("alist")
    decoder_args(p)
    p.add_argument("--max-weight", type=int, default=3)
    p.add_argument("--eps-grid", required=True, help="lo,hi,points")
    p.set_defaults(func=cmd_estimate_floor)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"liftfloor: {err}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args, out)
    except DesignInfeasible as err:
        print(f"liftfloor: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except INPUT_ERRORS as err:
        print(f"liftfloor: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError,) + USAGE_ERRORS as err:
        print(f"liftfloor: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
