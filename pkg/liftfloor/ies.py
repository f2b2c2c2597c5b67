"""Intentional edge swapping: choose edges and cyclic indices so that every
cycle of every cataloged trapping set gets order > 1 in the lifted graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .graph import Cycle, TannerGraph, UnknownNodeError
from .lifting import PermutationIndexMatrix, cycle_order
from .matrix import ParityCheckMatrix
from .trapping import TrappingSet, TrappingSetCatalog, is_lift_free

logger = logging.getLogger(__name__)

ELIMINATED = "eliminated"
PARTIAL = "partial"
UNTOUCHED = "untouched"


class Uncoverable(RuntimeError):
    """Exception raised when some cycle has no candidate edge left."""

    pass


class DesignInfeasible(RuntimeError):
    """Exception raised in strict mode when a trapping set cannot be handled.

    Carries the design built so far as `result`.
    """

    def __init__(self, message: str, result: IesResult):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class IesOptions:
    """strict : stop the whole run at the first set that cannot be handled."""

    strict: bool = False


@dataclass
class IesState:
    """Working sets of the algorithm; D starts at 0 on the support of H."""

    D: PermutationIndexMatrix
    processed: Set[int] = field(default_factory=set)
    swapped: Set[int] = field(default_factory=set)
    indices: Dict[int, int] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.D.N


@dataclass
class SetReport:
    """Outcome for one trapping set."""

    variables: Tuple[int, ...]
    a: int
    b: int
    status: str
    phase: int
    edges: List[int]
    indices: List[int]
    orders: List[int]
    lift_free: bool

    @property
    def surviving(self) -> int:
        return sum(1 for k in self.orders if k == 1)


@dataclass
class IesResult:
    D: PermutationIndexMatrix
    sets: List[SetReport]

    @property
    def all_eliminated(self) -> bool:
        return all(r.status == ELIMINATED for r in self.sets)

    @property
    def all_lift_free(self) -> bool:
        return all(r.lift_free for r in self.sets)

    @property
    def surviving_cycles(self) -> int:
        return sum(r.surviving for r in self.sets)

    def text(self) -> str:
        """Plain-text report, one block per trapping set."""
        out = [f"N {self.D.N}"]
        if not self.sets:
            out.append("nothing to do")
        for r in self.sets:
            swaps = " ".join(f"{e}:{v}" for e, v in zip(r.edges, r.indices)) or "-"
            out.append(
                f"({r.a},{r.b}) {','.join(map(str, r.variables))} {r.status} "
                f"phase={r.phase} lift_free={r.lift_free} swapped={swaps} "
                f"orders={','.join(map(str, r.orders))}"
            )
        return "\n".join(out) + "\n"


def _set(G: TannerGraph, D: PermutationIndexMatrix, e: int, v: int) -> None:
    i, j = G.edges[e]
    D[i, j] = v


def _get(G: TannerGraph, D: PermutationIndexMatrix, e: int) -> int:
    i, j = G.edges[e]
    return D[i, j]


def select_edges(
    t: TrappingSet, candidates: Iterable[int], cycles: Optional[Iterable[Cycle]] = None
) -> List[int]:
    """Greedy cover of C(t) by candidate edges.

    Repeatedly takes the candidate lying on the most uncovered cycles, the
    smallest edge id on ties.

    Returns:
        Edges in the order they were picked.

    Raises:
        Uncoverable : if some cycle contains no candidate

    """
    pool = sorted(set(candidates))
    uncovered = set(t.cycles if cycles is None else cycles)
    picked: List[int] = []
    while uncovered:
        best, hits = -1, 0
        for e in pool:
            count = sum(1 for c in uncovered if e in c)
            if count > hits:
                best, hits = e, count
        if hits == 0:
            raise Uncoverable(f"{len(uncovered)} cycle(s) of {t!r} have no candidate edge.")
        picked.append(best)
        pool.remove(best)
        uncovered = {c for c in uncovered if best not in c}
    return picked


def assign_index(
    G: TannerGraph,
    e: int,
    constraint_cycles: Iterable[Cycle],
    D: PermutationIndexMatrix,
) -> Optional[int]:
    """Smallest v in 1..N-1 giving every constraint cycle order > 1 once d_e = v.

    D is updated on success and left unchanged otherwise.

    Returns:
        The index, or None when no value works.

    """
    cycles = list(constraint_cycles)
    old = _get(G, D, e)
    for v in range(1, D.N):
        _set(G, D, e, v)
        if all(cycle_order(G, c, D) > 1 for c in cycles):
            return v
    _set(G, D, e, old)
    return None


def _phase_one(
    G: TannerGraph, t: TrappingSet, state: IesState
) -> Optional[List[Tuple[int, int]]]:
    cycles = t.cycles
    candidates = t.cycle_edges() - state.processed
    while candidates:
        try:
            picked = select_edges(t, candidates, cycles)
        except Uncoverable:
            return None
        done: List[Tuple[int, int]] = []
        failed = None
        for e in picked:
            v = assign_index(G, e, [c for c in cycles if e in c], state.D)
            if v is None:
                failed = e
                break
            done.append((e, v))
        if failed is None:
            return done
        # Undo and try the next greedy cover without the edge that failed.
        for e, _ in done:
            _set(G, state.D, e, 0)
        candidates = candidates - {failed}
        logger.debug("no index for edge %d in %r; recovering without it", failed, t)
    return None


def _phase_two(
    G: TannerGraph,
    t: TrappingSet,
    state: IesState,
    processed_cycles: Sequence[Cycle],
) -> Tuple[List[Tuple[int, int]], bool]:
    remaining = set(t.cycles)
    constraint_pool = list(processed_cycles) + list(t.cycles)
    done: List[Tuple[int, int]] = []
    while remaining:
        current = {e for c in remaining for e in c.edges}
        candidates = sorted(
            current - state.swapped,
            key=lambda e: (-sum(1 for c in remaining if e in c), e),
        )
        if not candidates:
            return done, False
        placed = False
        for e in candidates:
            v = assign_index(G, e, [c for c in constraint_pool if e in c], state.D)
            if v is None:
                continue
            state.swapped.add(e)
            done.append((e, v))
            remaining = {c for c in remaining if e not in c}
            placed = True
            break
        if not placed:
            return done, False
    return done, True


def run_ies(
    G: TannerGraph,
    T: TrappingSetCatalog,
    N: int,
    options: IesOptions = IesOptions(),
    H: Optional[ParityCheckMatrix] = None,
) -> IesResult:
    """Assign cyclic indices to trapping-set edges, one set at a time.

    Phase 1 covers the cycles of the set with edges no earlier set used.
    When that is impossible, phase 2 reuses earlier edges that are not yet
    swapped, keeping every cycle of the earlier sets through the edge at
    order > 1.

    Args:
        G : base Tanner graph
        T : catalog, ordered
        N : lifting degree, at least 2
        options : strict mode
        H : base matrix; rebuilt from `G` when None

    Returns:
        `IesResult` with D and a report per trapping set.

    Raises:
        UnknownNodeError : if a catalog edge is not in `G`
        DesignInfeasible : in strict mode, at the first set left with
            surviving cycles

    """
    if N < 2:
        raise ValueError(f"Lifting degree must be >= 2, got {N}.")
    if H is None:
        H = ParityCheckMatrix(G.m, G.n, G.edges.values())
    state = IesState(PermutationIndexMatrix.zeros(H, N))
    processed_cycles: List[Cycle] = []
    reports: List[SetReport] = []

    sets = list(T)
    for k, t in enumerate(sets):
        for e in t.cycle_edges():
            if not G.has_edge(e):
                raise UnknownNodeError(f"Edge {e} of {t!r} is not in the graph.")

        phase = 1
        swaps = _phase_one(G, t, state) if t.cycles else []
        if swaps is not None:
            state.swapped.update(e for e, _ in swaps)
            ok = True
        else:
            phase = 2
            swaps, ok = _phase_two(G, t, state, processed_cycles)
        state.indices.update(swaps)
        state.processed.update(t.cycle_edges())
        processed_cycles.extend(t.cycles)

        report = _report(G, t, state.D, phase, swaps)
        reports.append(report)
        logger.debug("%r: %s in phase %d", t, report.status, phase)

        if not ok and options.strict:
            for rest in sets[k + 1 :]:
                reports.append(_report(G, rest, state.D, 0, [], UNTOUCHED))
            raise DesignInfeasible(
                f"{t!r} keeps {report.surviving} cycle(s) of order 1 at N={N}.",
                IesResult(state.D, reports),
            )

    result = IesResult(state.D, reports)
    logger.info(
        "IES at N=%d: %d/%d sets eliminated, %d edges swapped",
        N,
        sum(1 for r in reports if r.status == ELIMINATED),
        len(reports),
        len(state.swapped),
    )
    return result


def _report(
    G: TannerGraph,
    t: TrappingSet,
    D: PermutationIndexMatrix,
    phase: int,
    swaps: List[Tuple[int, int]],
    status: Optional[str] = None,
) -> SetReport:
    orders = [cycle_order(G, c, D) for c in sorted(t.cycles, key=lambda c: c.edges)]
    if status is None:
        status = ELIMINATED if all(k > 1 for k in orders) else PARTIAL
    return SetReport(
        variables=t.variables,
        a=t.a,
        b=t.b,
        status=status,
        phase=phase,
        edges=[e for e, _ in swaps],
        indices=[v for _, v in swaps],
        orders=orders,
        lift_free=is_lift_free(t, D),
    )
