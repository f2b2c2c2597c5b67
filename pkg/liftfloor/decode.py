"""Gallager A/B and min-sum decoding over the BSC and the BIAWGN channel.

The message-passing loops are numba kernels over a flat edge layout: edge e
joins variable `edge_var[e]` and check `edge_chk[e]`, and the edges of
variable v (check c) are `var_edges[var_ptr[v]:var_ptr[v + 1]]`
(`chk_edges[chk_ptr[c]:chk_ptr[c + 1]]`).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from numba import njit
from typing_extensions import TypeAlias

from .matrix import ParityCheckMatrix

logger = logging.getLogger(__name__)

Bits: TypeAlias = npt.NDArray[np.uint8]
Llrs: TypeAlias = npt.NDArray[np.float64]

GALLAGER_A = "gallager-a"
GALLAGER_B = "gallager-b"
MIN_SUM = "min-sum"
ALGORITHMS = (GALLAGER_A, GALLAGER_B, MIN_SUM)
ALIASES = {"ga": GALLAGER_A, "gb": GALLAGER_B, "ms": MIN_SUM}


class ChannelError(ValueError):
    """Exception raised for channel parameters outside their valid range."""

    pass


class DecoderInputError(ValueError):
    """Exception raised for inputs of the wrong length or with non-finite values."""

    pass


# ## Configuration


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder choice and its knobs.

    Attributes
    ----------
        algorithm : "gallager-a", "gallager-b" or "min-sum" (or "ga", "gb", "ms")
        max_iterations : iteration cap
        thresholds : per-degree overrides (d_v, t) of the Gallager flip threshold
        scaling : min-sum check-message scaling factor

    """

    algorithm: str = GALLAGER_B
    max_iterations: int = 50
    thresholds: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)
    scaling: float = 1.0

    def __post_init__(self) -> None:
        algorithm = ALIASES.get(self.algorithm, self.algorithm)
        if algorithm not in ALGORITHMS:
            raise ValueError(f"Unknown decoder {self.algorithm!r}.")
        object.__setattr__(self, "algorithm", algorithm)
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1.")
        if not self.scaling > 0:
            raise ValueError("scaling must be positive.")
        object.__setattr__(self, "thresholds", tuple(sorted(dict(self.thresholds).items())))
        for dv, t in self.thresholds:
            if t < 1:
                raise ValueError(f"Threshold for degree {dv} must be >= 1, got {t}.")

    @property
    def hard_decision(self) -> bool:
        return self.algorithm != MIN_SUM

    def threshold(self, dv: int) -> int:
        """Extrinsic disagreements needed to flip a degree-`dv` variable's message."""
        overrides = dict(self.thresholds)
        if dv in overrides:
            return overrides[dv]
        if self.algorithm == GALLAGER_A:
            return max(dv - 1, 1)
        return (dv - 1) // 2 + 1


@dataclass(frozen=True)
class BSC:
    """Binary symmetric channel with crossover probability `epsilon`."""

    epsilon: float

    kind = "bsc"

    def __post_init__(self) -> None:
        # epsilon = 0 is kept as the noiseless limit.
        if not 0.0 <= self.epsilon < 0.5:
            raise ChannelError(f"BSC crossover must lie in [0, 0.5), got {self.epsilon}.")

    @property
    def param(self) -> float:
        return self.epsilon

    def transmit(self, codeword: Bits, rng: np.random.Generator) -> Bits:
        flips = rng.random(codeword.shape) < self.epsilon
        return (codeword ^ flips).astype(np.uint8)


@dataclass(frozen=True)
class BIAWGN:
    """Binary-input AWGN channel: x = 1 - 2c, y = x + N(0, sigma^2)."""

    sigma: float
    ebn0_db: Optional[float] = None

    kind = "awgn"

    def __post_init__(self) -> None:
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ChannelError(f"Noise deviation must be positive, got {self.sigma}.")

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> BIAWGN:
        if not 0 < rate <= 1:
            raise ChannelError(f"Rate must lie in (0, 1], got {rate}.")
        sigma = math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))
        return cls(sigma, ebn0_db)

    @property
    def param(self) -> float:
        return self.ebn0_db if self.ebn0_db is not None else self.sigma

    def transmit(self, codeword: Bits, rng: np.random.Generator) -> Llrs:
        x = 1.0 - 2.0 * codeword.astype(np.float64)
        y = x + self.sigma * rng.standard_normal(codeword.shape)
        return 2.0 * y / self.sigma**2


ChannelModel: TypeAlias = Union[BSC, BIAWGN]


def transmit(
    codeword: npt.ArrayLike, channel: ChannelModel, seed: Optional[int] = None
) -> np.ndarray:
    """Send `codeword` through `channel`; deterministic given `seed`.

    Returns:
        Received bits for the BSC, channel LLRs for the BIAWGN channel.

    """
    word = np.asarray(codeword, dtype=np.uint8)
    return channel.transmit(word, np.random.default_rng(seed))


# ## Edge layout


@dataclass(frozen=True)
class DecoderGraph:
    n: int
    m: int
    edge_var: npt.NDArray[np.int64]
    edge_chk: npt.NDArray[np.int64]
    var_ptr: npt.NDArray[np.int64]
    var_edges: npt.NDArray[np.int64]
    chk_ptr: npt.NDArray[np.int64]
    chk_edges: npt.NDArray[np.int64]

    @property
    def var_degrees(self) -> npt.NDArray[np.int64]:
        return np.diff(self.var_ptr)

    def thresholds(self, config: DecoderConfig) -> npt.NDArray[np.int64]:
        return np.array([config.threshold(int(d)) for d in self.var_degrees], dtype=np.int64)


@lru_cache(maxsize=16)
def decoder_graph(H: ParityCheckMatrix) -> DecoderGraph:
    entries = H.sorted_entries()
    edge_chk = np.array([i for i, _ in entries], dtype=np.int64)
    edge_var = np.array([j for _, j in entries], dtype=np.int64)
    var_edges = np.argsort(edge_var, kind="stable").astype(np.int64)
    var_ptr = np.zeros(H.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_var, minlength=H.n), out=var_ptr[1:])
    chk_ptr = np.zeros(H.m + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_chk, minlength=H.m), out=chk_ptr[1:])
    return DecoderGraph(
        H.n,
        H.m,
        edge_var,
        edge_chk,
        var_ptr,
        var_edges,
        chk_ptr,
        np.arange(len(entries), dtype=np.int64),
    )


# ## Kernels


@njit(cache=True, nogil=True)
def _syndrome_zero(decision, edge_var, chk_ptr, chk_edges):  # type: ignore
    for c in range(chk_ptr.size - 1):
        s = 0
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            s ^= decision[edge_var[chk_edges[k]]]
        if s:
            return False
    return True


@njit(cache=True, nogil=True)
def gallager_kernel(  # type: ignore
    y,
    edge_var,
    var_ptr,
    var_edges,
    chk_ptr,
    chk_edges,
    thresh,
    max_iter,
    decision,
    dec_history,
    msg_history,
):
    """Hard-decision message passing. Returns (success, iterations).

    `decision` is written in place. When the history arrays have rows, row t
    holds the decision and the variable-to-check messages after iteration t.
    """
    n = y.size
    E = edge_var.size
    record = dec_history.shape[0] > 0
    v2c = np.empty(E, dtype=np.uint8)
    c2v = np.zeros(E, dtype=np.uint8)
    for e in range(E):
        v2c[e] = y[edge_var[e]]
    for v in range(n):
        decision[v] = y[v]
    if record:
        dec_history[0, :] = decision
        msg_history[0, :] = v2c
    if _syndrome_zero(decision, edge_var, chk_ptr, chk_edges):
        return True, 0

    for it in range(1, max_iter + 1):
        for c in range(chk_ptr.size - 1):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            s = 0
            for k in range(lo, hi):
                s ^= v2c[chk_edges[k]]
            for k in range(lo, hi):
                e = chk_edges[k]
                # Degree-1 checks have no extrinsic input and send 0.
                c2v[e] = 0 if hi - lo == 1 else s ^ v2c[e]

        for v in range(n):
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            yv = y[v]
            against = 0
            for k in range(lo, hi):
                if c2v[var_edges[k]] != yv:
                    against += 1
            for k in range(lo, hi):
                e = var_edges[k]
                extrinsic = against - (1 if c2v[e] != yv else 0)
                v2c[e] = 1 - yv if extrinsic >= thresh[v] else yv
            # Majority over the channel value and all check messages; ties keep y.
            decision[v] = 1 - yv if 2 * against > hi - lo + 1 else yv

        if record:
            dec_history[it, :] = decision
            msg_history[it, :] = v2c
        if _syndrome_zero(decision, edge_var, chk_ptr, chk_edges):
            return True, it
    return False, max_iter


@njit(cache=True, nogil=True)
def min_sum_kernel(  # type: ignore
    llr,
    edge_var,
    var_ptr,
    var_edges,
    chk_ptr,
    chk_edges,
    scaling,
    max_iter,
    decision,
    dec_history,
    msg_history,
):
    """Scaled min-sum. Returns (success, iterations); `decision` written in place."""
    n = llr.size
    E = edge_var.size
    record = dec_history.shape[0] > 0
    v2c = np.empty(E, dtype=np.float64)
    c2v = np.zeros(E, dtype=np.float64)
    for e in range(E):
        v2c[e] = llr[edge_var[e]]
    for v in range(n):
        decision[v] = 1 if llr[v] < 0 else 0
    if record:
        dec_history[0, :] = decision
        msg_history[0, :] = v2c
    if _syndrome_zero(decision, edge_var, chk_ptr, chk_edges):
        return True, 0

    for it in range(1, max_iter + 1):
        for c in range(chk_ptr.size - 1):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            if hi - lo == 1:
                c2v[chk_edges[lo]] = 0.0
                continue
            sign = 1.0
            min1 = np.inf
            min2 = np.inf
            arg = -1
            for k in range(lo, hi):
                x = v2c[chk_edges[k]]
                if x < 0:
                    sign = -sign
                a = abs(x)
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg = k
                elif a < min2:
                    min2 = a
            for k in range(lo, hi):
                e = chk_edges[k]
                s = -sign if v2c[e] < 0 else sign
                c2v[e] = scaling * s * (min2 if k == arg else min1)

        for v in range(n):
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            total = llr[v]
            for k in range(lo, hi):
                total += c2v[var_edges[k]]
            for k in range(lo, hi):
                e = var_edges[k]
                v2c[e] = total - c2v[e]
            decision[v] = 1 if total < 0 else 0

        if record:
            dec_history[it, :] = decision
            msg_history[it, :] = v2c
        if _syndrome_zero(decision, edge_var, chk_ptr, chk_edges):
            return True, it
    return False, max_iter


# ## Decoders


@dataclass
class DecodeOutcome:
    """Result of decoding one frame.

    Attributes
    ----------
        success : the final decision has zero syndrome
        iterations : iterations run (0 if the input was already a codeword)
        decision : final hard decision
        error_support : positions where the decision differs from the sent word
        trace : per-iteration error counts, when requested

    """

    success: bool
    iterations: int
    decision: Bits
    error_support: Tuple[int, ...]
    trace: Optional[List[int]] = None


def _check_length(H: ParityCheckMatrix, word: np.ndarray) -> None:
    if word.ndim != 1 or word.size != H.n:
        raise DecoderInputError(f"Expected a word of length {H.n}, got shape {word.shape}.")


def _outcome(
    ok: bool,
    iters: int,
    decision: Bits,
    transmitted: Optional[npt.ArrayLike],
    history: Optional[np.ndarray],
) -> DecodeOutcome:
    sent = (
        np.zeros_like(decision)
        if transmitted is None
        else np.asarray(transmitted, dtype=np.uint8)
    )
    support = tuple(np.flatnonzero(decision != sent).tolist())
    trace = None
    if history is not None:
        trace = [int(np.count_nonzero(row != sent)) for row in history[: iters + 1]]
    return DecodeOutcome(bool(ok), int(iters), decision, support, trace)


def run_kernel(
    H: ParityCheckMatrix,
    word: np.ndarray,
    config: DecoderConfig,
    history_rows: int = 0,
) -> Tuple[bool, int, Bits, np.ndarray, np.ndarray]:
    """Run the configured kernel and return (success, iters, decision, histories)."""
    g = decoder_graph(H)
    decision = np.zeros(H.n, dtype=np.uint8)
    dec_hist = np.zeros((history_rows, H.n), dtype=np.uint8)
    if config.algorithm == MIN_SUM:
        llr = np.asarray(word, dtype=np.float64)
        if word.dtype == np.uint8:
            llr = 1.0 - 2.0 * word.astype(np.float64)
        msg_hist = np.zeros((history_rows, g.edge_var.size), dtype=np.float64)
        ok, iters = min_sum_kernel(
            llr,
            g.edge_var,
            g.var_ptr,
            g.var_edges,
            g.chk_ptr,
            g.chk_edges,
            float(config.scaling),
            config.max_iterations,
            decision,
            dec_hist,
            msg_hist,
        )
    else:
        msg_hist = np.zeros((history_rows, g.edge_var.size), dtype=np.uint8)
        ok, iters = gallager_kernel(
            np.ascontiguousarray(word, dtype=np.uint8),
            g.edge_var,
            g.var_ptr,
            g.var_edges,
            g.chk_ptr,
            g.chk_edges,
            g.thresholds(config),
            config.max_iterations,
            decision,
            dec_hist,
            msg_hist,
        )
    return ok, iters, decision, dec_hist, msg_hist


def _hard(H: ParityCheckMatrix, received: npt.ArrayLike) -> Bits:
    word = np.asarray(received)
    _check_length(H, word)
    if np.any((word != 0) & (word != 1)):
        raise DecoderInputError("Hard-decision input must be binary.")
    return word.astype(np.uint8)


def _decode_hard(
    H: ParityCheckMatrix,
    received: npt.ArrayLike,
    config: DecoderConfig,
    transmitted: Optional[npt.ArrayLike],
    trace: bool,
) -> DecodeOutcome:
    word = _hard(H, received)
    rows = config.max_iterations + 1 if trace else 0
    ok, iters, decision, hist, _ = run_kernel(H, word, config, rows)
    return _outcome(ok, iters, decision, transmitted, hist if trace else None)


def gallager_a_decode(
    H: ParityCheckMatrix,
    received: npt.ArrayLike,
    config: Optional[DecoderConfig] = None,
    transmitted: Optional[npt.ArrayLike] = None,
    trace: bool = False,
) -> DecodeOutcome:
    """Gallager A: a variable overrides its channel value only when every
    extrinsic check message disagrees with it.

    Args:
        H : parity-check matrix
        received : binary word of length n
        config : iteration cap and threshold overrides; the algorithm is forced
        transmitted : sent word for `error_support`, all-zero by default
        trace : record per-iteration error counts

    Returns:
        `DecodeOutcome`

    Raises:
        DecoderInputError : on a length mismatch or non-binary input

    """
    base = config or DecoderConfig(GALLAGER_A)
    cfg = DecoderConfig(GALLAGER_A, base.max_iterations, base.thresholds, base.scaling)
    return _decode_hard(H, received, cfg, transmitted, trace)


def gallager_b_decode(
    H: ParityCheckMatrix,
    received: npt.ArrayLike,
    config: Optional[DecoderConfig] = None,
    transmitted: Optional[npt.ArrayLike] = None,
    trace: bool = False,
) -> DecodeOutcome:
    """Gallager B: flip when at least t(d_v) extrinsic messages disagree,
    t(d_v) = floor((d_v - 1) / 2) + 1 unless overridden."""
    base = config or DecoderConfig(GALLAGER_B)
    cfg = DecoderConfig(GALLAGER_B, base.max_iterations, base.thresholds, base.scaling)
    return _decode_hard(H, received, cfg, transmitted, trace)


def min_sum_decode(
    H: ParityCheckMatrix,
    llr: npt.ArrayLike,
    config: Optional[DecoderConfig] = None,
    transmitted: Optional[npt.ArrayLike] = None,
    trace: bool = False,
) -> DecodeOutcome:
    """Min-sum on channel LLRs (positive favours 0); a zero total decides 0.

    Raises:
        DecoderInputError : on a length mismatch or non-finite LLRs

    """
    values = np.asarray(llr, dtype=np.float64)
    _check_length(H, values)
    if not np.all(np.isfinite(values)):
        raise DecoderInputError("LLRs must be finite.")
    base = config or DecoderConfig(MIN_SUM)
    cfg = DecoderConfig(MIN_SUM, base.max_iterations, base.thresholds, base.scaling)
    rows = cfg.max_iterations + 1 if trace else 0
    ok, iters, decision, hist, _ = run_kernel(H, values, cfg, rows)
    return _outcome(ok, iters, decision, transmitted, hist if trace else None)


def decode(
    H: ParityCheckMatrix,
    received: npt.ArrayLike,
    config: DecoderConfig,
    transmitted: Optional[npt.ArrayLike] = None,
    trace: bool = False,
) -> DecodeOutcome:
    """Dispatch on `config.algorithm`. Binary input to min-sum is read as +-1 LLRs."""
    if config.algorithm == GALLAGER_A:
        return gallager_a_decode(H, received, config, transmitted, trace)
    if config.algorithm == GALLAGER_B:
        return gallager_b_decode(H, received, config, transmitted, trace)
    values = np.asarray(received)
    if values.dtype.kind in "biu":
        values = 1.0 - 2.0 * _hard(H, values).astype(np.float64)
    return min_sum_decode(H, values, config, transmitted, trace)


def syndrome(H: ParityCheckMatrix, word: npt.ArrayLike) -> Bits:
    w = np.asarray(word, dtype=np.uint8)
    _check_length(H, w)
    return np.array([sum(int(w[j]) for j in row) & 1 for row in H.rows], dtype=np.uint8)
