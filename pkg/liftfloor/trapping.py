"""Trapping sets, catalogs and critical-number search."""

from __future__ import annotations

import logging
import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import numpy as np
import numpy.typing as npt
from numba import njit
from tqdm import tqdm

from .decode import MIN_SUM, DecoderConfig, decoder_graph, gallager_kernel, min_sum_kernel, run_kernel
from .graph import (
    Cycle,
    TannerGraph,
    UnknownNodeError,
    enumerate_cycles,
    girth,
    induced_subgraph,
)
from .lifting import PermutationIndexMatrix, edge_index
from .matrix import ParityCheckMatrix

logger = logging.getLogger(__name__)

Pattern = Tuple[int, ...]


class CatalogError(ValueError):
    """Exception raised for invalid catalog records; `line` is 1-based or None."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SearchBudgetExceeded(RuntimeError):
    """Exception raised when an exhaustive search would decode too many patterns."""

    def __init__(self, patterns: int, cap: int):
        super().__init__(f"{patterns} patterns exceed the search cap {cap}.")
        self.patterns = patterns
        self.cap = cap


_max_len_cache: "weakref.WeakKeyDictionary[TannerGraph, int]" = weakref.WeakKeyDictionary()


def default_max_len(G: TannerGraph) -> int:
    """Cycle length bound for catalog sets: girth + 4, computed once per graph."""
    bound = _max_len_cache.get(G)
    if bound is None:
        g = girth(G)
        bound = 4 if math.isinf(g) else int(g) + 4
        _max_len_cache[G] = bound
    return bound


# ## Trapping sets


class TrappingSet:
    """An (a, b) trapping set: `a` variables whose induced subgraph has `b`
    odd-degree checks. `b` is always recomputed from the graph.

    Args:
        G : Tanner graph containing the set
        variables : variable indices
        critical_number : known critical number, if any
        max_len : length bound for the constituent cycles C(t)

    """

    def __init__(
        self,
        G: TannerGraph,
        variables: Iterable[int],
        critical_number: Optional[int] = None,
        max_len: Optional[int] = None,
    ):
        self.variables: Tuple[int, ...] = tuple(sorted(set(variables)))
        self.graph = induced_subgraph(G, self.variables)
        self.odd_checks: Tuple[int, ...] = tuple(self.graph.odd_checks())
        self.critical_number = critical_number
        self.max_len = max_len if max_len is not None else default_max_len(G)

    @property
    def a(self) -> int:
        return len(self.variables)

    @property
    def b(self) -> int:
        return len(self.odd_checks)

    @cached_property
    def cycles(self) -> FrozenSet[Cycle]:
        return frozenset(enumerate_cycles(self.graph, self.max_len))

    def cycle_edges(self) -> Set[int]:
        """Edges of C(t)."""
        return {e for c in self.cycles for e in c.edges}

    def key(self) -> Tuple[float, int, int, Tuple[int, ...]]:
        cn = math.inf if self.critical_number is None else self.critical_number
        return (cn, self.a, self.b, self.variables)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrappingSet):
            return NotImplemented
        return self.variables == other.variables

    def __hash__(self) -> int:
        return hash(self.variables)

    def __repr__(self) -> str:
        return f"TrappingSet(({self.a},{self.b}), variables={list(self.variables)})"


def cycles_of(t: TrappingSet, max_len: Optional[int] = None) -> Set[Cycle]:
    """C(t): the simple cycles of the induced subgraph up to `max_len`."""
    if max_len is None or max_len == t.max_len:
        return set(t.cycles)
    return enumerate_cycles(t.graph, max_len)


def edge_cycles(t: TrappingSet, e: int, cycles: Optional[Iterable[Cycle]] = None) -> Set[Cycle]:
    """C^e(t): the cycles of t containing edge `e`.

    Raises:
        UnknownNodeError : if `e` is not an edge of the induced subgraph

    """
    if not t.graph.has_edge(e):
        raise UnknownNodeError(f"Edge {e} is not in the subgraph of {t!r}.")
    return {c for c in (t.cycles if cycles is None else cycles) if e in c}


def is_lift_free(t: TrappingSet, D: PermutationIndexMatrix) -> bool:
    """True when no copy of t's subgraph survives in the lifted graph.

    A copy survives iff every connected component of the subgraph has
    balanced indices: node potentials along a spanning tree agree across
    every other edge.
    """
    G = t.graph
    N = D.N
    potential: Dict[int, int] = {}
    for root in G.nodes():
        if root in potential:
            continue
        potential[root] = 0
        stack = [root]
        while stack:
            u = stack.pop()
            for e in G.incident(u):
                v, c = G.endpoints(e)
                d = edge_index(G, D, e)
                # Variable copy s meets check copy (s - d) mod N.
                w, expect = (c, potential[u] - d) if u == v else (v, potential[u] + d)
                expect %= N
                if w not in potential:
                    potential[w] = expect
                    stack.append(w)
                elif potential[w] != expect:
                    return True
    return False


class TrappingSetCatalog:
    """Trapping sets ordered by (critical number, a, b, variables)."""

    def __init__(self, sets: Iterable[TrappingSet] = ()):
        self._sets: List[TrappingSet] = []
        for t in sets:
            self.add(t)

    def add(self, t: TrappingSet) -> None:
        if t in self._sets:
            raise CatalogError(f"Duplicate trapping set {list(t.variables)}.")
        self._sets.append(t)
        self._sets.sort(key=TrappingSet.key)

    def remove(self, t: TrappingSet) -> None:
        self._sets.remove(t)

    def __iter__(self) -> Iterator[TrappingSet]:
        return iter(self._sets)

    def __len__(self) -> int:
        return len(self._sets)

    def __getitem__(self, k: int) -> TrappingSet:
        return self._sets[k]

    def __contains__(self, t: object) -> bool:
        return t in self._sets

    def labels(self) -> List[Tuple[int, int]]:
        return [(t.a, t.b) for t in self._sets]

    def __repr__(self) -> str:
        return f"TrappingSetCatalog({self.labels()})"


def load_catalog(
    text: str, G: TannerGraph, max_len: Optional[int] = None
) -> TrappingSetCatalog:
    """Parse records "a b critical_number v1,v2,...,va" ("-" for an unknown
    critical number, "#" starts a comment).

    Raises:
        CatalogError : on malformed records, a declared (a, b) that differs
            from the recomputed one, or duplicate sets
        UnknownNodeError : if a listed variable is not in `G`

    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append((lineno, line))
    if not records:
        return TrappingSetCatalog()

    bound = default_max_len(G) if max_len is None else max_len
    catalog = TrappingSetCatalog()
    for lineno, line in records:
        toks = line.split()
        if len(toks) != 4:
            raise CatalogError("expected 'a b critical_number v1,...,va'", lineno)
        try:
            a, b = int(toks[0]), int(toks[1])
            cn = None if toks[2] == "-" else int(toks[2])
            variables = [int(v) for v in toks[3].split(",") if v]
        except ValueError:
            raise CatalogError(f"non-integer field in {line!r}", lineno)
        if len(set(variables)) != a:
            raise CatalogError(f"declared a={a} but {len(set(variables))} variables listed", lineno)
        t = TrappingSet(G, variables, cn, bound)
        if t.b != b:
            raise CatalogError(f"declared ({a},{b}) but the subgraph is ({t.a},{t.b})", lineno)
        try:
            catalog.add(t)
        except CatalogError as err:
            raise CatalogError(str(err), lineno)
    return catalog


def dump_catalog(catalog: TrappingSetCatalog) -> str:
    out = []
    for t in catalog:
        cn = "-" if t.critical_number is None else str(t.critical_number)
        out.append(f"{t.a} {t.b} {cn} {','.join(str(v) for v in t.variables)}")
    return "\n".join(out) + ("\n" if out else "")


def read_catalog(path: str, G: TannerGraph, max_len: Optional[int] = None) -> TrappingSetCatalog:
    with open(path, "r", encoding="utf-8") as f:
        return load_catalog(f.read(), G, max_len)


# ## Critical-number search


@dataclass(frozen=True)
class SearchOptions:
    """Knobs of the exhaustive search.

    Attributes
    ----------
        pattern_cap : largest number of patterns decoded in one search
        max_failures : failing patterns kept per weight
        workers : threads decoding in parallel
        progress : show a tqdm bar per weight
        period_cap : longest decoder oscillation detected when harvesting

    """

    pattern_cap: int = 50_000_000
    max_failures: int = 1_000_000
    workers: int = 1
    progress: bool = False
    period_cap: int = 16


@dataclass
class SearchResult:
    """J is None when no failure exists up to `max_weight`."""

    J: Optional[int]
    failures: List[Pattern]
    patterns: int
    max_weight: int
    truncated: bool = False

    @property
    def found(self) -> bool:
        return self.J is not None


def default_log_fn(weight: int, patterns: int, failures: int) -> None:
    logger.info("weight %d: %d patterns, %d failures", weight, patterns, failures)


@njit(cache=True, nogil=True)
def _search_chunk(  # type: ignore
    fixed,
    rest,
    w,
    n,
    use_min_sum,
    edge_var,
    var_ptr,
    var_edges,
    chk_ptr,
    chk_edges,
    thresh,
    scaling,
    max_iter,
    out,
):
    # Decodes {fixed} plus every w-subset of `rest`, in lexicographic order.
    s = rest.size
    if w > s:
        return 0, 0
    E = edge_var.size
    y = np.zeros(n, dtype=np.uint8)
    llr = np.empty(n, dtype=np.float64)
    decision = np.zeros(n, dtype=np.uint8)
    dec_h = np.zeros((0, n), dtype=np.uint8)
    msg_u8 = np.zeros((0, E), dtype=np.uint8)
    msg_f64 = np.zeros((0, E), dtype=np.float64)
    idx = np.arange(w)
    found = 0
    tried = 0
    while True:
        y[:] = 0
        if fixed >= 0:
            y[fixed] = 1
        for t in range(w):
            y[rest[idx[t]]] = 1
        if use_min_sum:
            for v in range(n):
                llr[v] = 1.0 - 2.0 * y[v]
            min_sum_kernel(
                llr, edge_var, var_ptr, var_edges, chk_ptr, chk_edges,
                scaling, max_iter, decision, dec_h, msg_f64,
            )
        else:
            gallager_kernel(
                y, edge_var, var_ptr, var_edges, chk_ptr, chk_edges,
                thresh, max_iter, decision, dec_h, msg_u8,
            )
        tried += 1
        bad = False
        for v in range(n):
            if decision[v]:
                bad = True
                break
        if bad:
            if found < out.shape[0]:
                col = 0
                if fixed >= 0:
                    out[found, 0] = fixed
                    col = 1
                for t in range(w):
                    out[found, col + t] = rest[idx[t]]
            found += 1
        i = w - 1
        while i >= 0 and idx[i] == s - w + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, w):
            idx[j] = idx[j - 1] + 1
    return found, tried


def _scope_array(H: ParityCheckMatrix, scope: Union[None, TrappingSet, Iterable[int]]) -> npt.NDArray[np.int64]:
    if scope is None:
        return np.arange(H.n, dtype=np.int64)
    vars = scope.variables if isinstance(scope, TrappingSet) else sorted(set(scope))
    for v in vars:
        if not 0 <= v < H.n:
            raise UnknownNodeError(f"Unknown variable node b{v}.")
    return np.array(vars, dtype=np.int64)


def search_weight(
    H: ParityCheckMatrix,
    config: DecoderConfig,
    w: int,
    scope: npt.NDArray[np.int64],
    options: SearchOptions = SearchOptions(),
) -> Tuple[List[Pattern], int, bool]:
    """All failing weight-`w` patterns within `scope`, sorted lexicographically.

    Returns:
        (failures, patterns decoded, truncated)

    """
    g = decoder_graph(H)
    thresh = g.thresholds(config)
    use_min_sum = config.algorithm == MIN_SUM

    def chunk(k: int) -> Tuple[npt.NDArray[np.int64], int, int]:
        rest = scope[k + 1 :]
        cap = min(options.max_failures, math.comb(rest.size, w - 1))
        out = np.zeros((cap, w), dtype=np.int64)
        found, tried = _search_chunk(
            int(scope[k]), rest, w - 1, H.n, use_min_sum,
            g.edge_var, g.var_ptr, g.var_edges, g.chk_ptr, g.chk_edges,
            thresh, float(config.scaling), config.max_iterations, out,
        )
        return out[: min(found, cap)], found, tried

    starts = range(scope.size - w + 1)
    bar = tqdm(total=len(starts), desc=f"weight {w}", disable=not options.progress)
    failures: List[Pattern] = []
    tried = 0
    truncated = False
    with ThreadPoolExecutor(max_workers=max(1, options.workers)) as pool:
        for rows, found, count in pool.map(chunk, starts):
            bar.update(1)
            tried += count
            if found > rows.shape[0]:
                truncated = True
            for row in rows:
                if len(failures) < options.max_failures:
                    failures.append(tuple(int(v) for v in row))
                else:
                    truncated = True
    bar.close()
    if truncated:
        logger.warning("weight %d: failure list truncated at %d", w, options.max_failures)
    return failures, tried, truncated


def critical_number_search(
    H: ParityCheckMatrix,
    config: DecoderConfig,
    max_weight: int,
    scope: Union[None, TrappingSet, Iterable[int]] = None,
    options: SearchOptions = SearchOptions(),
    log_fn: Callable[[int, int, int], None] = default_log_fn,
) -> SearchResult:
    """Smallest weight J <= `max_weight` of an error pattern the decoder fails on.

    Patterns are decoded as errors on the all-zero codeword; a pattern fails
    when the final decision is not all-zero. The search is exhaustive over
    the variables in `scope` (all variables when None).

    Args:
        H : parity-check matrix
        config : decoder configuration
        max_weight : largest pattern weight tried
        scope : None, a `TrappingSet`, or variable indices
        options : budget, threads and progress
        log_fn : called with (weight, patterns, failures) after each weight

    Returns:
        `SearchResult`; its failures are all weight-J failing patterns in
        lexicographic order (N_J of them for the all-variables scope).

    Raises:
        SearchBudgetExceeded : if the number of patterns is above the cap

    """
    support = _scope_array(H, scope)
    total = sum(math.comb(support.size, w) for w in range(1, max_weight + 1))
    if total > options.pattern_cap:
        raise SearchBudgetExceeded(total, options.pattern_cap)

    tried = 0
    for w in range(1, max_weight + 1):
        failures, count, truncated = search_weight(H, config, w, support, options)
        tried += count
        log_fn(w, count, len(failures))
        if failures:
            return SearchResult(w, failures, tried, max_weight, truncated)
    return SearchResult(None, [], tried, max_weight)


# ## Harvesting


def _final_support(
    H: ParityCheckMatrix, pattern: Sequence[int], config: DecoderConfig, period_cap: int
) -> Tuple[int, ...]:
    y = np.zeros(H.n, dtype=np.uint8)
    y[list(pattern)] = 1
    word = y if config.hard_decision else 1.0 - 2.0 * y.astype(np.float64)
    ok, iters, decision, dec_hist, msg_hist = run_kernel(
        H, word, config, config.max_iterations + 1
    )
    if ok:
        return tuple(np.flatnonzero(decision).tolist())
    # The message state repeats with some period when the decoder oscillates.
    final = msg_hist[iters].tobytes()
    period = 0
    for p in range(1, period_cap + 1):
        if iters - p < 0:
            break
        if msg_hist[iters - p].tobytes() == final:
            period = p
            break
    if period == 0:
        return tuple(np.flatnonzero(decision).tolist())
    union = np.any(dec_hist[iters - period + 1 : iters + 1] != 0, axis=0)
    return tuple(np.flatnonzero(union).tolist())


def harvest_trapping_sets(
    failures: Iterable[Sequence[int]],
    H: ParityCheckMatrix,
    config: DecoderConfig,
    G: TannerGraph,
    max_len: Optional[int] = None,
    period_cap: int = 16,
) -> TrappingSetCatalog:
    """Catalog of the error supports the decoder is left with on each failure.

    Each pattern is decoded to the iteration cap; the variables in error at
    the end (the union over one oscillation period when the decoder cycles)
    form a trapping set. A set's critical number is the smallest pattern
    weight that led to it.
    """
    bound = default_max_len(G) if max_len is None else max_len
    best: Dict[Tuple[int, ...], int] = {}
    for pattern in failures:
        support = _final_support(H, pattern, config, period_cap)
        if not support:
            logger.debug("pattern %s decoded to zero; skipped", tuple(pattern))
            continue
        w = len(pattern)
        best[support] = min(w, best.get(support, w))
    catalog = TrappingSetCatalog(
        TrappingSet(G, support, cn, bound) for support, cn in sorted(best.items())
    )
    logger.info("harvested %d trapping sets: %s", len(catalog), catalog.labels())
    return catalog
