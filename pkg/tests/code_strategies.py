from typing import Optional, Tuple

from hypothesis import settings
from hypothesis.strategies import (
    DrawFn,
    SearchStrategy,
    booleans,
    composite,
    integers,
    lists,
    sampled_from,
)

import liftfloor
from liftfloor import ParityCheckMatrix, PermutationIndexMatrix

from .strategies import degrees

settings.register_profile("ci", deadline=None)
settings.load_profile("ci")


@composite
def parity_matrices(
    draw: DrawFn,
    max_n: int = 15,
    max_m: int = 8,
    density: Optional[SearchStrategy[bool]] = None,
) -> ParityCheckMatrix:
    n = draw(integers(min_value=2, max_value=max_n))
    m = draw(integers(min_value=1, max_value=max_m))
    bits = draw(lists(density or booleans(), min_size=m * n, max_size=m * n))
    entries = [(k // n, k % n) for k, b in enumerate(bits) if b]
    return ParityCheckMatrix(m, n, entries)


@composite
def full_rank_matrices(draw: DrawFn, max_m: int = 5, max_k: int = 5) -> ParityCheckMatrix:
    # [I | A] always has full row rank; k = n - m is the code dimension.
    m = draw(integers(min_value=1, max_value=max_m))
    n = m + draw(integers(min_value=1, max_value=max_k))
    bits = draw(lists(booleans(), min_size=m * (n - m), max_size=m * (n - m)))
    entries = [(i, i) for i in range(m)]
    entries += [(k // (n - m), m + k % (n - m)) for k, b in enumerate(bits) if b]
    return ParityCheckMatrix(m, n, entries)


@composite
def index_matrices(
    draw: DrawFn, H: ParityCheckMatrix, N: Optional[int] = None
) -> PermutationIndexMatrix:
    if N is None:
        N = draw(degrees)
    D = PermutationIndexMatrix.zeros(H, N)
    for i, j in H.sorted_entries():
        D[i, j] = draw(integers(min_value=0, max_value=N - 1))
    return D


@composite
def liftings(
    draw: DrawFn,
    max_n: int = 15,
    max_m: int = 8,
    Ns: Optional[SearchStrategy[int]] = None,
) -> Tuple[ParityCheckMatrix, PermutationIndexMatrix]:
    H = draw(parity_matrices(max_n, max_m))
    N = draw(Ns or degrees)
    return H, draw(index_matrices(H, N))


powers_of_two = sampled_from([2, 4, 8])


def graph_of(H: ParityCheckMatrix) -> liftfloor.TannerGraph:
    return liftfloor.build_tanner_graph(H)
