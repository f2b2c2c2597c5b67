"""Cyclic N-liftings: permutation indices, lifted matrices and their guarantees."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from typing_extensions import TypeAlias

from . import operators
from .gf2 import BinaryLike, gf2_rank, min_distance_bruteforce
from .graph import Cycle, TannerGraph, build_tanner_graph, girth
from .matrix import Dense, Entry, ParityCheckMatrix

logger = logging.getLogger(__name__)

INFINITY = -1
"Marker for positions of D off the support of H (the all-zero block)."

IndexArray: TypeAlias = npt.NDArray[np.int64]


class SupportMismatchError(ValueError):
    """Exception raised when the finite entries of D differ from the support of H."""

    pass


class PathError(ValueError):
    """Exception raised for an edge sequence that is not a path with finite indices."""

    pass


class Theorem1Mismatch(RuntimeError):
    """Exception raised when the lifted graph disagrees with the cycle-order algebra."""

    pass


class DFileFormatError(ValueError):
    """Exception raised for malformed D-matrix text, with its 1-based line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class PermutationIndexMatrix:
    """Matrix D of cyclic permutation indices d_ij in Z_N, `INFINITY` elsewhere.

    Entries may be reassigned with `D[i, j] = v` as long as (i, j) stays on
    the support; the support itself never changes.

    Args:
        N : lifting degree
        values : m x n integer array

    """

    N: int
    values: IndexArray

    def __init__(self, N: int, values: npt.ArrayLike):
        if N < 1:
            raise ValueError(f"Lifting degree must be >= 1, got {N}.")
        arr = np.array(values, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError(f"Expected a 2-d index array, got shape {arr.shape}.")
        finite = arr != INFINITY
        if np.any(finite & ((arr < 0) | (arr >= N))):
            raise ValueError(f"Finite indices must lie in [0, {N - 1}].")
        self.N = N
        self.values = arr

    @classmethod
    def zeros(cls, H: ParityCheckMatrix, N: int) -> PermutationIndexMatrix:
        """Index 0 on the support of `H`: N disjoint copies of the base graph."""
        arr = np.full(H.shape, INFINITY, dtype=np.int64)
        for i, j in H.entries:
            arr[i, j] = 0
        return cls(N, arr)

    @classmethod
    def from_entries(
        cls, H: ParityCheckMatrix, N: int, indices: Dict[Entry, int]
    ) -> PermutationIndexMatrix:
        D = cls.zeros(H, N)
        for (i, j), v in indices.items():
            D[i, j] = v
        return D

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))

    def support(self) -> frozenset:
        ii, jj = np.nonzero(self.values != INFINITY)
        return frozenset(zip(ii.tolist(), jj.tolist()))

    def check_support(self, H: ParityCheckMatrix) -> None:
        """Raises `SupportMismatchError` unless D is finite exactly where h_ij = 1."""
        if self.shape != H.shape:
            raise SupportMismatchError(f"D has shape {self.shape}, H has {H.shape}.")
        diff = self.support() ^ H.entries
        if diff:
            i, j = min(diff)
            raise SupportMismatchError(
                f"Support differs at ({i}, {j}) and {len(diff) - 1} other position(s)."
            )

    def is_finite(self, i: int, j: int) -> bool:
        return int(self.values[i, j]) != INFINITY

    def __getitem__(self, key: Entry) -> int:
        return int(self.values[key])

    def __setitem__(self, key: Entry, v: int) -> None:
        if not self.is_finite(*key):
            raise SupportMismatchError(f"Position {key} is off the support.")
        if not 0 <= v < self.N:
            raise ValueError(f"Index {v} outside [0, {self.N - 1}].")
        self.values[key] = v

    def copy(self) -> PermutationIndexMatrix:
        return PermutationIndexMatrix(self.N, self.values.copy())

    def nonzero(self) -> Dict[Entry, int]:
        ii, jj = np.nonzero(self.values > 0)
        return {(i, j): int(self.values[i, j]) for i, j in zip(ii.tolist(), jj.tolist())}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermutationIndexMatrix):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        m, n = self.shape
        return f"PermutationIndexMatrix(N={self.N}, shape=({m}, {n}), swapped={len(self.nonzero())})"


def random_lifting(
    H: ParityCheckMatrix, N: int, seed: Optional[int] = None
) -> PermutationIndexMatrix:
    """Uniformly random cyclic lifting of `H`, the usual baseline design."""
    rng = np.random.default_rng(seed)
    D = PermutationIndexMatrix.zeros(H, N)
    for i, j in H.sorted_entries():
        D[i, j] = int(rng.integers(0, N))
    return D


# ## Paths and cycles


def compose_shift_indices(d1: int, d2: int, N: int) -> int:
    """Index of the product $I^{(d_1)} I^{(d_2)}$."""
    if not (0 <= d1 < N and 0 <= d2 < N):
        raise ValueError(f"Indices ({d1}, {d2}) must lie in [0, {N - 1}].")
    return operators.compose(d1, d2, N)


def edge_index(G: TannerGraph, D: PermutationIndexMatrix, e: int) -> int:
    i, j = G.edges[e]
    d = D[i, j]
    if d == INFINITY:
        raise PathError(f"Edge {e} = (c{i}, b{j}) has no finite index.")
    return d


def _path_start(G: TannerGraph, edges: Sequence[int]) -> int:
    v, c = G.endpoints(edges[0])
    if len(edges) == 1 or edges[1] == edges[0]:
        return v
    nxt = set(G.endpoints(edges[1]))
    if v in nxt and c not in nxt:
        return c
    if c in nxt and v not in nxt:
        return v
    raise PathError(f"Edges {edges[0]} and {edges[1]} are not consecutive.")


def path_permutation_index(
    G: TannerGraph,
    path: Union[Cycle, Sequence[int]],
    D: PermutationIndexMatrix,
    start: Optional[int] = None,
) -> int:
    """Permutation index of the path that walks the edges of `path` in order.

    An edge walked variable->check contributes +d_ij and one walked
    check->variable contributes -d_ij, so a variable-rooted path gets the
    alternating sum d_1 - d_2 + d_3 - ... mod N.

    Args:
        G : base Tanner graph
        path : edge ids, or a `Cycle` (walked from `nodes[0]`)
        D : permutation indices
        start : node to walk from; inferred from the first two edges if None

    Returns:
        Index in Z_N.

    Raises:
        PathError : if consecutive edges do not meet at the walk's current
            node, or an edge has no finite index

    """
    if isinstance(path, Cycle):
        edges: Sequence[int] = path.edges
        start = path.nodes[0] if start is None else start
    else:
        edges = list(path)
    if not edges:
        return 0
    cur = _path_start(G, edges) if start is None else start
    steps: List[int] = []
    for e in edges:
        v, c = G.endpoints(e)
        d = edge_index(G, D, e)
        if cur == v:
            steps.append(operators.signed(d, True))
            cur = c
        elif cur == c:
            steps.append(operators.signed(d, False))
            cur = v
        else:
            raise PathError(f"Edge {e} does not leave {G.label(cur)}.")
    return operators.compose_all(operators.map(lambda x: operators.mod(x, D.N))(steps), D.N)


def cycle_order(G: TannerGraph, c: Cycle, D: PermutationIndexMatrix) -> int:
    """Order k of the cycle's permutation index in Z_N; k = 1 iff the index is 0."""
    return operators.order(path_permutation_index(G, c, D), D.N)


# ## Lifted codes


class LiftedCode:
    """Cyclic N-lifting of `H` by `D`.

    Block (i, j) of the lifted matrix is the d_ij-fold right cyclic shift of
    the N x N identity: check copy c_{i,r} meets variable copy
    b_{j,(r + d_ij) mod N}. The lifted matrix is only built when asked for.
    """

    def __init__(self, H: ParityCheckMatrix, D: PermutationIndexMatrix):
        D.check_support(H)
        self.base = H
        self.D = D
        self.N = D.N

    @property
    def n(self) -> int:
        return self.base.n * self.N

    @property
    def m(self) -> int:
        return self.base.m * self.N

    def block(self, i: int, j: int) -> Optional[int]:
        """Shift amount of block (i, j), None for the zero block."""
        return self.D[i, j] if self.D.is_finite(i, j) else None

    def lifted_entries(self, i: int, j: int) -> List[Entry]:
        d = self.D[i, j]
        N = self.N
        return [(i * N + r, j * N + operators.mod(r + d, N)) for r in range(N)]

    @cached_property
    def matrix(self) -> ParityCheckMatrix:
        entries: List[Entry] = []
        for i, j in self.base.sorted_entries():
            entries.extend(self.lifted_entries(i, j))
        return ParityCheckMatrix(self.m, self.n, entries)

    @cached_property
    def _edge_ids(self) -> Dict[Entry, int]:
        return {ij: e for e, ij in enumerate(self.matrix.sorted_entries())}

    def tanner_graph(self) -> TannerGraph:
        return build_tanner_graph(self.matrix)

    def inverse_image(self, G: TannerGraph, edges: Iterable[int]) -> List[int]:
        """Lifted edge ids lying above the given base edges of `G`."""
        out = []
        for e in edges:
            i, j = G.edges[e]
            out.extend(self._edge_ids[ij] for ij in self.lifted_entries(i, j))
        return sorted(out)

    def rank(self) -> int:
        return gf2_rank(self.matrix)

    def rate(self) -> Fraction:
        return Fraction(self.n - self.rank(), self.n)

    def __repr__(self) -> str:
        return f"LiftedCode(n={self.n}, m={self.m}, N={self.N})"


def lift(H: ParityCheckMatrix, D: PermutationIndexMatrix) -> LiftedCode:
    """Cyclic lifting of `H` by `D`.

    Raises:
        SupportMismatchError : if D is not finite exactly on the support of H

    """
    return LiftedCode(H, D)


def girth_of_lift(H: ParityCheckMatrix, D: PermutationIndexMatrix) -> Union[int, float]:
    return girth(lift(H, D).tanner_graph())


@dataclass(frozen=True)
class Theorem1Report:
    """How the inverse image of a cycle splits in the lifted graph."""

    k: int
    count: int
    lengths: Tuple[int, ...]


def verify_theorem1(
    G: TannerGraph, c: Cycle, D: PermutationIndexMatrix
) -> Theorem1Report:
    """Walk the inverse image of `c` in the materialized lifted graph.

    Starting from every copy of the cycle's start node, the lifted edges above
    c_1, c_2, ... are followed until the walk closes. The closed walks must be
    exactly N/k simple cycles of length k * len(c), with k from `cycle_order`.

    Raises:
        Theorem1Mismatch : if the traversal disagrees with the cycle order

    """
    # Restrict H and D to the edges of G so subgraphs can be checked on their own.
    H = ParityCheckMatrix(G.m, G.n, G.edges.values())
    sub = np.full(H.shape, INFINITY, dtype=np.int64)
    for i, j in H.entries:
        sub[i, j] = D[i, j]
    L = lift(H, PermutationIndexMatrix(D.N, sub))
    LG = L.tanner_graph()
    N = D.N
    ell = len(c)
    k = cycle_order(G, c, D)

    # Base node x is lifted to copies x * N + s in the lifted index space.
    def copy(node: int, s: int) -> int:
        if G.is_variable(node):
            return node * N + s
        return LG.check_node((node - G.n) * N + s)

    above = [set(L.inverse_image(G, [e])) for e in c.edges]
    seen = set()
    lengths = []
    for s in range(N):
        first = copy(c.nodes[0], s)
        if first in seen:
            continue
        cur = first
        walked = [first]
        steps = 0
        while True:
            e_lift = [e for e in LG.incident(cur) if e in above[steps % ell]]
            if len(e_lift) != 1:
                raise Theorem1Mismatch(
                    f"{LG.label(cur)} has {len(e_lift)} lifted edges above base edge "
                    f"{c.edges[steps % ell]}."
                )
            cur = LG.other(e_lift[0], cur)
            steps += 1
            if cur == first:
                break
            walked.append(cur)
            if steps > N * ell:
                raise Theorem1Mismatch(f"Walk from copy {s} did not close.")
        if len(set(walked)) != len(walked):
            raise Theorem1Mismatch(f"Walk from copy {s} is not a simple cycle.")
        seen.update(walked)
        lengths.append(steps)

    report = Theorem1Report(k=k, count=len(lengths), lengths=tuple(lengths))
    if report.count != N // k or any(x != k * ell for x in lengths):
        raise Theorem1Mismatch(
            f"Expected {N // k} cycles of length {k * ell}, traversal found {lengths}."
        )
    return report


def circulant_components(H: ParityCheckMatrix, D: PermutationIndexMatrix) -> List[Dense]:
    """A_0, ..., A_{N-1} with A_d[i, j] = 1 iff d_ij = d."""
    D.check_support(H)
    return [(D.values == d).astype(np.uint8) for d in range(D.N)]


def block_circulant_form(H: ParityCheckMatrix, D: PermutationIndexMatrix) -> Dense:
    """Block-circulant mN x nN matrix whose block (r, s) is A_{(r - s) mod N}.

    It equals the lifted matrix up to the row and column permutation that
    sends copy r to copy -r mod N, so both have the same rank.
    """
    A = circulant_components(H, D)
    N = D.N
    return np.block([[A[operators.mod(r - s, N)] for s in range(N)] for r in range(N)])


def code_rate(H: Union[BinaryLike, LiftedCode]) -> Fraction:
    """Design-independent rate (n - rank(H)) / n as an exact fraction."""
    if isinstance(H, LiftedCode):
        return H.rate()
    n = H.n if isinstance(H, ParityCheckMatrix) else np.asarray(H).shape[1]
    return Fraction(n - gf2_rank(H), n)


def theorem2_holds(H: ParityCheckMatrix, D: PermutationIndexMatrix) -> bool:
    """Lifted rate <= base rate, with equality when H has full row rank.

    Only guaranteed for N a power of two; other N are measured and logged.
    """
    base = code_rate(H)
    lifted = lift(H, D).rate()
    ok = lifted <= base
    if gf2_rank(H) == H.m:
        ok = ok and lifted == base
    if not operators.is_power_of_two(D.N):
        logger.info("N=%d (not 2^q): base rate %s, lifted rate %s", D.N, base, lifted)
    elif not ok:
        logger.warning("rate bound violated: base %s, lifted %s", base, lifted)
    return ok


def theorem3_holds(
    H: ParityCheckMatrix, D: PermutationIndexMatrix, max_dimension: Optional[int] = None
) -> bool:
    """d_min <= d_min of the lifting <= N d_min, by brute force on toy codes."""
    kwargs = {} if max_dimension is None else {"max_dimension": max_dimension}
    d = min_distance_bruteforce(H, **kwargs)
    dN = min_distance_bruteforce(lift(H, D).matrix, **kwargs)
    ok = d <= dN <= D.N * d
    if not operators.is_power_of_two(D.N):
        logger.info("N=%d (not 2^q): d_min %s, lifted d_min %s", D.N, d, dN)
    elif not ok:
        logger.warning("distance bound violated: d_min %s, lifted %s", d, dN)
    return ok


# ## D-matrix files


def parse_dfile(text: str) -> PermutationIndexMatrix:
    """Parse "m n N" followed by m rows of n tokens, each an index or "-".

    Raises:
        DFileFormatError : on a malformed header, row or token

    """
    lines = [(k + 1, ln) for k, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise DFileFormatError("missing header", 1)
    lineno, header = lines[0]
    try:
        m, n, N = (int(t) for t in header.split())
    except ValueError:
        raise DFileFormatError("expected 'm n N'", lineno)
    if m < 1 or n < 1 or N < 1:
        raise DFileFormatError("m, n and N must be >= 1", lineno)
    if len(lines) - 1 != m:
        raise DFileFormatError(f"expected {m} rows, found {len(lines) - 1}", lineno)
    arr = np.full((m, n), INFINITY, dtype=np.int64)
    for i, (lineno, line) in enumerate(lines[1:]):
        toks = line.split()
        if len(toks) != n:
            raise DFileFormatError(f"expected {n} tokens, found {len(toks)}", lineno)
        for j, tok in enumerate(toks):
            if tok == "-":
                continue
            try:
                v = int(tok)
            except ValueError:
                raise DFileFormatError(f"bad token {tok!r}", lineno)
            if not 0 <= v < N:
                raise DFileFormatError(f"index {v} outside [0, {N - 1}]", lineno)
            arr[i, j] = v
    return PermutationIndexMatrix(N, arr)


def emit_dfile(D: PermutationIndexMatrix) -> str:
    m, n = D.shape
    out = [f"{m} {n} {D.N}"]
    for row in D.values:
        out.append(" ".join("-" if v == INFINITY else str(int(v)) for v in row))
    return "\n".join(out) + "\n"


def load_dfile(path: str, H: Optional[ParityCheckMatrix] = None) -> PermutationIndexMatrix:
    """Read a D file; with `H`, also check the support against it."""
    with open(path, "r", encoding="utf-8") as f:
        D = parse_dfile(f.read())
    if H is not None:
        D.check_support(H)
    return D


def dump_dfile(D: PermutationIndexMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(emit_dfile(D))
