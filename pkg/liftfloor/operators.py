"""Collection of the core Z_N operators used throughout the code base.

Cyclic permutations I^(d) of size N compose like integers modulo N, so
every permutation-index computation reduces to the small prelude below.
"""

import math
from typing import Callable, Iterable, List


# ## Elements of Z_N


def mod(d: int, N: int) -> int:
    """Reduce `d` to its residue in {0, ..., N - 1}."""
    return d % N


def compose(d1: int, d2: int, N: int) -> int:
    """$I^{(d_1)} I^{(d_2)} = I^{(d_1 + d_2 \\bmod N)}$"""
    return (d1 + d2) % N


def inverse(d: int, N: int) -> int:
    """Index of the inverse permutation, $N - d \\bmod N$."""
    return (N - d) % N


def order(d: int, N: int) -> int:
    """Order of `d` in the additive group Z_N: $N / \\gcd(d, N)$."""
    return N // math.gcd(d % N, N)


def is_power_of_two(N: int) -> bool:
    return N >= 1 and (N & (N - 1)) == 0


def signed(d: int, forward: bool) -> int:
    """Contribution of an edge index when traversed forward or backward."""
    return d if forward else -d


# ## Higher-order helpers


def map(fn: Callable[[int], int]) -> Callable[[Iterable[int]], List[int]]:
    """Higher-order map over an iterable of indices."""

    def _map(ls: Iterable[int]) -> List[int]:
        return [fn(x) for x in ls]

    return _map


def reduce(
    fn: Callable[[int, int], int], start: int
) -> Callable[[Iterable[int]], int]:
    """Higher-order left fold."""

    def _reduce(ls: Iterable[int]) -> int:
        val = start
        for x in ls:
            val = fn(val, x)
        return val

    return _reduce


def compose_all(indices: Iterable[int], N: int) -> int:
    """Compose a sequence of cyclic shifts."""
    return reduce(lambda a, b: compose(a, b, N), 0)(indices)


def alternating_sum(indices: Iterable[int], N: int) -> int:
    """$\\sum_i (-1)^i d_{i+1} \\bmod N$ for a path rooted at a variable node."""
    signs = [signed(d, i % 2 == 0) for i, d in enumerate(indices)]
    return compose_all(map(lambda x: mod(x, N))(signs), N)
