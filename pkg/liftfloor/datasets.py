import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .gf2 import gf2_rank
from .matrix import Entry, ParityCheckMatrix

logger = logging.getLogger(__name__)


def circulant_array(shifts: Sequence[Sequence[int]], p: int) -> ParityCheckMatrix:
    """Array of p x p circulant permutation blocks; block (j, l) shifts by shifts[j][l]."""
    entries: List[Entry] = []
    for j, row in enumerate(shifts):
        for l, s in enumerate(row):
            entries.extend((j * p + r, l * p + (r + s) % p) for r in range(p))
    return ParityCheckMatrix(len(shifts) * p, len(shifts[0]) * p, entries)


def tanner_155_64() -> ParityCheckMatrix:
    """(155,64) Tanner code: 3 x 5 array of 31 x 31 circulants with shifts
    b^j a^l over Z_31, a = 2 and b = 5."""
    p, a, b = 31, 2, 5
    shifts = [[(pow(b, j, p) * pow(a, l, p)) % p for l in range(5)] for j in range(3)]
    return circulant_array(shifts, p)


def hamming_7_4() -> ParityCheckMatrix:
    return ParityCheckMatrix.from_dense(
        [
            [1, 0, 1, 0, 1, 0, 1],
            [0, 1, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ]
    )


def repetition(n: int) -> ParityCheckMatrix:
    """Repetition code of length n: rows e_i + e_{i+1}."""
    return ParityCheckMatrix(n - 1, n, [(i, i) for i in range(n - 1)] + [(i, i + 1) for i in range(n - 1)])


def _fill_columns(
    col_degrees: Sequence[int],
    capacity: Sequence[int],
    rng: np.random.Generator,
    tries: int = 20,
) -> Optional[List[Entry]]:
    # Column by column, checks drawn with probability proportional to free
    # sockets; draws closing a 4-cycle are redrawn up to `tries` times.
    cap = np.array(capacity, dtype=np.float64)
    m = cap.size
    pairs: Set[Tuple[int, int]] = set()
    entries: List[Entry] = []
    for j, d in enumerate(col_degrees):
        if np.count_nonzero(cap) < d:
            return None
        pick: List[int] = []
        for _ in range(tries):
            pick = sorted(rng.choice(m, size=d, replace=False, p=cap / cap.sum()).tolist())
            if not any((x, y) in pairs for k, x in enumerate(pick) for y in pick[k + 1 :]):
                break
        for k, x in enumerate(pick):
            for y in pick[k + 1 :]:
                pairs.add((x, y))
            cap[x] -= 1
            entries.append((x, j))
    return entries


def random_regular(
    n: int = 504,
    dv: int = 3,
    dc: int = 6,
    seed: int = 0,
    full_rank: bool = True,
    attempts: int = 200,
) -> ParityCheckMatrix:
    """Random (dv, dc)-regular code of length `n`, redrawn until full rank.

    Raises:
        ValueError : if n * dv is not a multiple of dc, or no draw succeeds

    """
    if (n * dv) % dc:
        raise ValueError(f"n * dv = {n * dv} is not a multiple of dc = {dc}.")
    m = n * dv // dc
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        entries = _fill_columns([dv] * n, [dc] * m, rng)
        if entries is None:
            continue
        H = ParityCheckMatrix(m, n, entries)
        if not full_rank or gf2_rank(H) == m:
            logger.debug("regular code found after %d attempts", attempt + 1)
            return H
    raise ValueError(f"No ({dv},{dc})-regular code found in {attempts} attempts.")


def _node_counts(edge_fractions: Dict[int, float], total: int) -> Dict[int, int]:
    # Edge-perspective fractions to node counts summing to `total`.
    weights = {d: f / d for d, f in edge_fractions.items()}
    norm = sum(weights.values())
    counts = {d: int(round(total * w / norm)) for d, w in sorted(weights.items())}
    top = max(counts)
    counts[top] += total - sum(counts.values())
    return counts


def random_irregular(
    n: int = 200,
    lam: Optional[Dict[int, float]] = None,
    rho: Optional[Dict[int, float]] = None,
    seed: int = 0,
    attempts: int = 200,
) -> ParityCheckMatrix:
    """Random code with edge-perspective degree distributions lambda and rho.

    Defaults are lambda(x) = 0.1115 x^2 + 0.8885 x^3 and
    rho(x) = 0.26 x^6 + 0.74 x^7, a rate-1/2 design for Gallager A.
    """
    lam = lam or {3: 0.1115, 4: 0.8885}
    rho = rho or {7: 0.26, 8: 0.74}
    ratio = sum(f / d for d, f in rho.items()) / sum(f / d for d, f in lam.items())
    m = int(round(n * ratio))
    var_counts = _node_counts(lam, n)
    col_degrees = [d for d, c in sorted(var_counts.items()) for _ in range(c)]
    E = sum(col_degrees)
    chk_counts = _node_counts(rho, m)
    capacity = [d for d, c in sorted(chk_counts.items()) for _ in range(c)]
    # Spread the socket surplus or deficit over the checks.
    k = 0
    while sum(capacity) != E:
        capacity[k % m] += 1 if sum(capacity) < E else -1
        k += 1
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        order = rng.permutation(n)
        entries = _fill_columns([col_degrees[j] for j in order], capacity, rng)
        if entries is not None:
            return ParityCheckMatrix(m, n, [(i, int(order[j])) for i, j in entries])
    raise ValueError(f"No irregular code found in {attempts} attempts.")


# ## Trapping-set gadgets


@dataclass
class Gadget:
    """Stand-alone code whose whole Tanner graph is one trapping set."""

    name: str
    H: ParityCheckMatrix
    variables: Tuple[int, ...]


def _gadget(name: str, n: int, pairs: Sequence[Tuple[int, int]], odd: Sequence[int]) -> Gadget:
    # Each pair is a degree-2 check, each odd variable gets a degree-1 check.
    entries: List[Entry] = []
    for i, (u, v) in enumerate(pairs):
        entries += [(i, u), (i, v)]
    for k, v in enumerate(odd):
        entries.append((len(pairs) + k, v))
    H = ParityCheckMatrix(len(pairs) + len(odd), n, entries)
    return Gadget(name, H, tuple(range(n)))


def trapping_5_3() -> Gadget:
    """Two degree-3 variables joined to three others: three 8-cycles."""
    return _gadget("(5,3)", 5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)], [2, 3, 4])


def trapping_4_2() -> Gadget:
    """Four variables with one diagonal (0, 1): two 6-cycles and one 8-cycle."""
    return _gadget("(4,2)", 4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], [2, 3])


def trapping_4_4() -> Gadget:
    """Four variables on a ring: one 8-cycle."""
    return _gadget("(4,4)", 4, [(0, 1), (1, 2), (2, 3), (3, 0)], [0, 1, 2, 3])


def disjoint_union(*codes: ParityCheckMatrix) -> ParityCheckMatrix:
    """Block-diagonal matrix of the given codes."""
    entries: List[Entry] = []
    r0 = c0 = 0
    for H in codes:
        entries += [(r0 + i, c0 + j) for i, j in H.entries]
        r0 += H.m
        c0 += H.n
    return ParityCheckMatrix(r0, c0, entries)


datasets = {
    "tanner": tanner_155_64,
    "hamming": hamming_7_4,
    "regular": random_regular,
    "irregular": random_irregular,
}
gadgets = {"5,3": trapping_5_3, "4,2": trapping_4_2, "4,4": trapping_4_4}
