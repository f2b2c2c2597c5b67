"""Linear algebra over GF(2): rank, nullspace and brute-force minimum distance."""

from __future__ import annotations

import logging
import math
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt
from numba import njit

from .matrix import Dense, ParityCheckMatrix

logger = logging.getLogger(__name__)

MAX_DIMENSION = 24

BinaryLike = Union[ParityCheckMatrix, npt.ArrayLike]


class DimensionTooLarge(RuntimeError):
    """Exception raised when a code has too many codewords to enumerate."""

    def __init__(self, k: int, cap: int):
        super().__init__(f"Code dimension {k} exceeds the enumeration cap {cap}.")
        self.k = k
        self.cap = cap


def as_dense(M: BinaryLike) -> Dense:
    if isinstance(M, ParityCheckMatrix):
        return M.to_dense()
    arr = np.asarray(M, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"Expected a 2-d binary matrix, got shape {arr.shape}.")
    return arr & np.uint8(1)


def pack_rows(M: Dense) -> npt.NDArray[np.uint64]:
    """Pack each row into 64-bit words (bit order is irrelevant for rank)."""
    r, c = M.shape
    width = max(64, -(-c // 64) * 64)
    padded = np.zeros((r, width), dtype=np.uint8)
    padded[:, :c] = M
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).copy()


@njit(cache=True)
def _rank_packed(rows: npt.NDArray[np.uint64]) -> int:
    r, W = rows.shape
    rank = 0
    for w in range(W):
        for b in range(64):
            if rank == r:
                return rank
            mask = np.uint64(1) << np.uint64(b)
            pivot = -1
            for i in range(rank, r):
                if rows[i, w] & mask:
                    pivot = i
                    break
            if pivot < 0:
                continue
            if pivot != rank:
                for k in range(W):
                    tmp = rows[pivot, k]
                    rows[pivot, k] = rows[rank, k]
                    rows[rank, k] = tmp
            for i in range(rank + 1, r):
                if rows[i, w] & mask:
                    for k in range(w, W):
                        rows[i, k] ^= rows[rank, k]
            rank += 1
    return rank


def gf2_rank(M: BinaryLike) -> int:
    """Rank of `M` over GF(2), by elimination on packed bit rows.

    Args:
        M : `ParityCheckMatrix` or 2-d 0/1 array

    Returns:
        The rank.

    """
    dense = as_dense(M)
    if dense.size == 0:
        return 0
    return int(_rank_packed(pack_rows(dense)))


@njit(cache=True)
def _rref(M: Dense) -> Tuple[Dense, npt.NDArray[np.int64]]:
    A = M.copy()
    m, n = A.shape
    pivots = np.empty(min(m, n), dtype=np.int64)
    rank = 0
    for col in range(n):
        if rank == m:
            break
        p = -1
        for i in range(rank, m):
            if A[i, col]:
                p = i
                break
        if p < 0:
            continue
        if p != rank:
            for k in range(n):
                tmp = A[p, k]
                A[p, k] = A[rank, k]
                A[rank, k] = tmp
        for i in range(m):
            if i != rank and A[i, col]:
                for k in range(col, n):
                    A[i, k] ^= A[rank, k]
        pivots[rank] = col
        rank += 1
    return A[:rank], pivots[:rank]


def rref(M: BinaryLike) -> Tuple[Dense, npt.NDArray[np.int64]]:
    """Reduced row echelon form and pivot columns; zero rows are dropped."""
    return _rref(np.ascontiguousarray(as_dense(M)))


def nullspace(H: BinaryLike) -> Dense:
    """Basis of {x : Hx = 0} as the rows of a k x n matrix."""
    R, pivots = rref(H)
    n = R.shape[1]
    pivot_set = set(pivots.tolist())
    free = [j for j in range(n) if j not in pivot_set]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, p in enumerate(pivots):
            basis[t, p] = R[r, f]
    return basis


@njit(cache=True)
def _min_weight_gray(B: Dense) -> int:
    # Gray-code walk: step g adds the basis row at the lowest set bit of g.
    k, n = B.shape
    word = np.zeros(n, dtype=np.uint8)
    weight = 0
    best = n + 1
    for g in range(1, 1 << k):
        j = 0
        x = g
        while (x & 1) == 0:
            x >>= 1
            j += 1
        for t in range(n):
            if B[j, t]:
                if word[t]:
                    word[t] = 0
                    weight -= 1
                else:
                    word[t] = 1
                    weight += 1
        if weight < best:
            best = weight
    return best


def min_distance_bruteforce(
    H: BinaryLike, max_dimension: int = MAX_DIMENSION
) -> Union[int, float]:
    """Minimum Hamming weight of a nonzero codeword of ker(H).

    All 2^k - 1 nonzero codewords are visited in Gray-code order, so this is
    for toy codes only.

    Args:
        H : parity-check matrix
        max_dimension : largest code dimension k that will be enumerated

    Returns:
        The minimum distance, or `math.inf` for the trivial code {0}.

    Raises:
        DimensionTooLarge : if k > `max_dimension`

    """
    B = nullspace(H)
    k = B.shape[0]
    if k == 0:
        return math.inf
    if k > max_dimension:
        raise DimensionTooLarge(k, max_dimension)
    logger.debug("enumerating %d codewords of length %d", (1 << k) - 1, B.shape[1])
    return int(_min_weight_gray(np.ascontiguousarray(B)))
