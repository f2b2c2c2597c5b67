"""Monte Carlo error rates, error-floor prediction and the lifting design pipeline."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from numba import njit
from tqdm import tqdm

from .decode import (
    MIN_SUM,
    ChannelModel,
    DecoderConfig,
    decoder_graph,
    gallager_kernel,
    min_sum_kernel,
)
from .graph import TannerGraph, build_tanner_graph, girth
from .ies import DesignInfeasible, IesOptions, IesResult, run_ies
from .lifting import (
    LiftedCode,
    PermutationIndexMatrix,
    code_rate,
    cycle_order,
    lift,
    random_lifting,
)
from .matrix import ParityCheckMatrix
from .trapping import SearchOptions, TrappingSetCatalog, critical_number_search

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "code",
    "n",
    "m",
    "decoder",
    "channel",
    "param",
    "frames",
    "frame_errors",
    "bit_errors",
    "fer",
    "ber",
    "ci_lo",
    "ci_hi",
    "seed",
)

BLOCK_SIZE = 1024


class StopRuleError(ValueError):
    """Exception raised for a stopping rule that can never be met."""

    pass


class FloorBelowSearchDepth(RuntimeError):
    """Exception raised when no failing pattern exists up to the search weight."""

    def __init__(self, max_weight: int):
        super().__init__(f"No decoder failure up to weight {max_weight}.")
        self.max_weight = max_weight


@dataclass(frozen=True)
class StopRule:
    """Stop at `min_errors` frame errors or `max_frames` frames, whichever first."""

    min_errors: int = 100
    max_frames: int = 10_000_000

    def __post_init__(self) -> None:
        if self.min_errors < 1 or self.max_frames < 1:
            raise StopRuleError(
                f"Stop rule needs min_errors >= 1 and max_frames >= 1, got "
                f"({self.min_errors}, {self.max_frames})."
            )


@dataclass
class SimResult:
    """Error counts at one channel parameter; the 95% interval is a normal approximation."""

    code: str
    n: int
    m: int
    decoder: str
    channel: str
    param: float
    frames: int
    frame_errors: int
    bit_errors: int
    seed: int
    wall_clock: float = field(default=0.0, compare=False)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n) if self.frames else 0.0

    @property
    def interval(self) -> Tuple[float, float]:
        p = self.fer
        half = 1.96 * math.sqrt(p * (1.0 - p) / self.frames) if self.frames else 0.0
        return (max(0.0, p - half), min(1.0, p + half))

    def row(self) -> List[Union[str, int, float]]:
        lo, hi = self.interval
        return [
            self.code,
            self.n,
            self.m,
            self.decoder,
            self.channel,
            self.param,
            self.frames,
            self.frame_errors,
            self.bit_errors,
            self.fer,
            self.ber,
            lo,
            hi,
            self.seed,
        ]


def write_csv(results: Iterable[SimResult], out: Union[str, IO[str]], header: bool = True) -> None:
    """Write results under the fixed `CSV_HEADER`."""
    if isinstance(out, str):
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_csv(results, f, header)
        return
    writer = csv.writer(out, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    for r in results:
        writer.writerow(r.row())


# ## Monte Carlo


@njit(cache=True, nogil=True)
def _count_block(  # type: ignore
    frames,
    use_min_sum,
    edge_var,
    var_ptr,
    var_edges,
    chk_ptr,
    chk_edges,
    thresh,
    scaling,
    max_iter,
):
    # Decodes every row of `frames` (bits or LLRs) as the all-zero codeword.
    F, n = frames.shape
    E = edge_var.size
    decision = np.zeros(n, dtype=np.uint8)
    dec_h = np.zeros((0, n), dtype=np.uint8)
    msg_u8 = np.zeros((0, E), dtype=np.uint8)
    msg_f64 = np.zeros((0, E), dtype=np.float64)
    y = np.zeros(n, dtype=np.uint8)
    llr = np.zeros(n, dtype=np.float64)
    frame_errors = 0
    bit_errors = 0
    for f in range(F):
        if use_min_sum:
            for v in range(n):
                llr[v] = frames[f, v]
            min_sum_kernel(
                llr, edge_var, var_ptr, var_edges, chk_ptr, chk_edges,
                scaling, max_iter, decision, dec_h, msg_f64,
            )
        else:
            for v in range(n):
                y[v] = np.uint8(frames[f, v])
            gallager_kernel(
                y, edge_var, var_ptr, var_edges, chk_ptr, chk_edges,
                thresh, max_iter, decision, dec_h, msg_u8,
            )
        wrong = 0
        for v in range(n):
            wrong += decision[v]
        if wrong:
            frame_errors += 1
            bit_errors += wrong
    return frame_errors, bit_errors


def _frame_rng(seed: int, frame: int) -> np.random.Generator:
    return np.random.default_rng([seed, frame])


def _draw_frames(channel: ChannelModel, n: int, seed: int, first: int, size: int) -> np.ndarray:
    # The noise of frame f depends only on (seed, f).
    zeros_n = np.zeros(n, dtype=np.uint8)
    return np.stack([channel.transmit(zeros_n, _frame_rng(seed, f)) for f in range(first, first + size)])


def monte_carlo(
    H: ParityCheckMatrix,
    config: DecoderConfig,
    channel: ChannelModel,
    stop: StopRule = StopRule(),
    seed: int = 0,
    workers: int = 1,
    code: str = "code",
    block_size: int = BLOCK_SIZE,
    progress: bool = False,
    log_fn: Optional[Callable[[int, int], None]] = None,
) -> SimResult:
    """Frame and bit error rates of the all-zero codeword over `channel`.

    Frame f is drawn from the generator seeded with (seed, f). Frames are
    decoded in blocks of `block_size`; blocks are tallied in order and the
    run stops at the end of the first block where the error count reaches
    `stop.min_errors`. The noise of every frame depends only on (seed, f),
    and the totals do not depend on `workers`.

    Args:
        H : parity-check matrix
        config : decoder configuration
        channel : `BSC` or `BIAWGN`
        stop : stopping rule
        seed : base seed
        workers : threads decoding blocks in parallel
        code : label for the CSV row
        block_size : frames per block
        progress : show a tqdm bar over frames
        log_fn : called with (frames, frame errors) after each block

    Returns:
        `SimResult`

    """
    if block_size < 1:
        raise StopRuleError("block_size must be >= 1.")
    g = decoder_graph(H)
    thresh = g.thresholds(config)
    use_min_sum = config.algorithm == MIN_SUM

    def run_block(b: int) -> Tuple[int, int, int]:
        size = min(block_size, stop.max_frames - b * block_size)
        received = _draw_frames(channel, H.n, seed, b * block_size, size)
        if use_min_sum and received.dtype == np.uint8:
            received = 1.0 - 2.0 * received.astype(np.float64)
        fe, be = _count_block(
            np.ascontiguousarray(received), use_min_sum,
            g.edge_var, g.var_ptr, g.var_edges, g.chk_ptr, g.chk_edges,
            thresh, float(config.scaling), config.max_iterations,
        )
        return size, int(fe), int(be)

    start = time.perf_counter()
    n_blocks = -(-stop.max_frames // block_size)
    frames = frame_errors = bit_errors = 0
    bar = tqdm(total=stop.max_frames, desc=f"{channel.kind} {channel.param:g}", disable=not progress)
    done = False
    wave = max(1, workers)
    with ThreadPoolExecutor(max_workers=wave) as pool:
        for first in range(0, n_blocks, wave):
            blocks = range(first, min(first + wave, n_blocks))
            for size, fe, be in pool.map(run_block, blocks):
                frames += size
                frame_errors += fe
                bit_errors += be
                bar.update(size)
                if log_fn is not None:
                    log_fn(frames, frame_errors)
                if frame_errors >= stop.min_errors:
                    done = True
                    break
            if done:
                break
    bar.close()

    result = SimResult(
        code=code,
        n=H.n,
        m=H.m,
        decoder=config.algorithm,
        channel=channel.kind,
        param=float(channel.param),
        frames=frames,
        frame_errors=frame_errors,
        bit_errors=bit_errors,
        seed=seed,
        wall_clock=time.perf_counter() - start,
    )
    logger.info(
        "%s %s=%g: %d/%d frame errors, FER %.3e",
        code,
        channel.kind,
        channel.param,
        frame_errors,
        frames,
        result.fer,
    )
    return result


def fit_slope(results: Sequence[SimResult]) -> float:
    """Least-squares slope of log FER against log channel parameter.

    Points with no frame errors are left out.
    """
    pts = [(r.param, r.fer) for r in results if r.frame_errors > 0 and r.param > 0]
    if len(pts) < 2:
        raise ValueError("Need at least two points with frame errors to fit a slope.")
    x = np.log10([p for p, _ in pts])
    y = np.log10([f for _, f in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


# ## Floor estimate


def predict_fer(J: int, N_J: int, eps: Union[float, npt.ArrayLike]) -> npt.NDArray[np.float64]:
    """FER ~ N_J * eps^J."""
    return N_J * np.asarray(eps, dtype=np.float64) ** J


def eps_grid(lo: float, hi: float, points: int) -> npt.NDArray[np.float64]:
    """Logarithmic grid of crossover probabilities."""
    if not 0 < lo <= hi < 0.5 or points < 1:
        raise ValueError(f"Bad grid ({lo}, {hi}, {points}).")
    return np.logspace(np.log10(lo), np.log10(hi), points)


@dataclass
class FloorEstimate:
    J: int
    N_J: int
    eps: List[float] = field(default_factory=list)

    @property
    def predicted(self) -> List[float]:
        return predict_fer(self.J, self.N_J, self.eps).tolist()


def estimate_floor(
    H: ParityCheckMatrix,
    config: DecoderConfig,
    max_weight: int,
    eps: Optional[Sequence[float]] = None,
    options: SearchOptions = SearchOptions(),
) -> FloorEstimate:
    """J and N_J from an exhaustive all-variables search, with the predicted
    floor on the `eps` grid.

    Raises:
        FloorBelowSearchDepth : if no pattern up to `max_weight` fails

    """
    found = critical_number_search(H, config, max_weight, None, options)
    if found.J is None:
        raise FloorBelowSearchDepth(max_weight)
    return FloorEstimate(found.J, len(found.failures), list(eps or []))


# ## Design pipeline


def surviving_cycles(
    catalog: TrappingSetCatalog, G: TannerGraph, D: PermutationIndexMatrix
) -> int:
    """Catalog cycles of order 1 under D."""
    return sum(1 for t in catalog for c in t.cycles if cycle_order(G, c, D) == 1)


@dataclass
class DesignResult:
    """Chosen design with its report."""

    N: int
    ies: IesResult
    lifted: LiftedCode
    done: bool
    base_rate: Fraction
    lifted_rate: Fraction
    girth_before: Union[int, float]
    girth_after: Union[int, float]
    baseline_surviving: Optional[int] = None

    @property
    def D(self) -> PermutationIndexMatrix:
        return self.ies.D

    def text(self) -> str:
        out = [
            f"base rate {float(self.base_rate):.4f} ({self.base_rate})",
            f"lifted rate {float(self.lifted_rate):.4f} ({self.lifted_rate})",
            f"girth {self.girth_before} -> {self.girth_after}",
            f"surviving cycles {self.ies.surviving_cycles}",
        ]
        if self.baseline_surviving is not None:
            out.append(f"random lifting surviving cycles {self.baseline_surviving}")
        out.append("all sets handled" if self.done else "some sets survive")
        return "\n".join(out) + "\n" + self.ies.text()


def _rank(result: IesResult) -> Tuple[bool, int]:
    return (not result.all_lift_free, result.surviving_cycles)


def design_pipeline(
    H: ParityCheckMatrix,
    catalog: TrappingSetCatalog,
    Ns: Union[int, Sequence[int]],
    options: IesOptions = IesOptions(),
    baseline_seed: Optional[int] = None,
    progress: bool = False,
) -> DesignResult:
    """Run IES for each N in ascending order until every set is eliminated.

    When no N eliminates every set, the kept design is the smallest N under
    which no copy of any set survives the lifting, or failing that the one
    with the fewest surviving cycles (smallest N on ties).

    Args:
        H : base matrix
        catalog : ordered trapping sets
        Ns : lifting degree or degrees
        options : IES options; in strict mode a degree whose run stops early
            is skipped
        baseline_seed : also count surviving cycles of a random lifting
        progress : show a tqdm bar over the degrees

    Raises:
        DesignInfeasible : in strict mode, when every degree stops early

    """
    degrees = sorted({Ns} if isinstance(Ns, int) else set(Ns))
    if not degrees:
        raise ValueError("No lifting degree given.")
    G = build_tanner_graph(H)
    best: Optional[Tuple[int, IesResult]] = None
    last_error: Optional[DesignInfeasible] = None
    for N in tqdm(degrees, desc="N", disable=not progress):
        try:
            result = run_ies(G, catalog, N, options, H)
        except DesignInfeasible as err:
            logger.info("N=%d: %s", N, err)
            last_error = err
            continue
        if result.all_eliminated:
            best = (N, result)
            break
        if best is None or _rank(result) < _rank(best[1]):
            best = (N, result)
    if best is None:
        raise last_error or ValueError("No design produced.")

    N, result = best
    lifted = lift(H, result.D)
    baseline = None
    if baseline_seed is not None:
        baseline = surviving_cycles(catalog, G, random_lifting(H, N, baseline_seed))
    design = DesignResult(
        N=N,
        ies=result,
        lifted=lifted,
        done=result.all_eliminated or result.all_lift_free,
        base_rate=code_rate(H),
        lifted_rate=lifted.rate(),
        girth_before=girth(G),
        girth_after=girth(lifted.tanner_graph()),
        baseline_surviving=baseline,
    )
    logger.info("design at N=%d: lifted rate %s", N, design.lifted_rate)
    return design
