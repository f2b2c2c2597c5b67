# type: ignore

from typing import Optional, Sequence

import numpy as np

from .graph import TannerGraph
from .lifting import PermutationIndexMatrix


class ShiftOracle:
    """Explicit N x N permutation matrices, used to check the Z_N arithmetic."""

    @staticmethod
    def shift(d: int, N: int) -> np.ndarray:
        "Right cyclic shift I^(d): row r has its 1 in column (r + d) mod N"
        P = np.zeros((N, N), dtype=np.int64)
        for r in range(N):
            P[r, (r + d) % N] = 1
        return P

    @staticmethod
    def index_of(P: np.ndarray) -> int:
        "Read d back from a cyclic shift matrix"
        N = P.shape[0]
        d = int(np.argmax(P[0]))
        if not np.array_equal(P, ShiftOracle.shift(d, N)):
            raise ValueError("not a cyclic shift")
        return d

    @staticmethod
    def compose(d1: int, d2: int, N: int) -> int:
        "Product of two shift matrices"
        return ShiftOracle.index_of(ShiftOracle.shift(d1, N) @ ShiftOracle.shift(d2, N))

    @staticmethod
    def path(
        G: TannerGraph,
        edges: Sequence[int],
        D: PermutationIndexMatrix,
        start: Optional[int] = None,
    ) -> int:
        "Multiply shift matrices along a walk: I^(d) forward, its transpose backward"
        N = D.N
        if start is None:
            start = G.endpoints(edges[0])[0]
        cur = start
        M = np.eye(N, dtype=np.int64)
        for e in edges:
            v, c = G.endpoints(e)
            i, j = G.edges[e]
            P = ShiftOracle.shift(D[i, j], N)
            if cur == v:
                M = M @ P
                cur = c
            else:
                M = M @ P.T
                cur = v
        return ShiftOracle.index_of(M)
