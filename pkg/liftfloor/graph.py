"""Tanner graphs, cycles and girth."""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import (
    TYPE_CHECKING,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Set,
    Tuple,
    Union,
)

from .matrix import ParityCheckMatrix

if TYPE_CHECKING:
    import networkx as nx

logger = logging.getLogger(__name__)

DEFAULT_MAX_CYCLES = 1_000_000


class UnknownNodeError(KeyError):
    """Exception raised when a node or edge is not part of the graph."""

    pass


class CycleBudgetExceeded(RuntimeError):
    """Exception raised when cycle enumeration passes its explicit cap."""

    def __init__(self, cap: int):
        super().__init__(f"More than {cap} cycles; raise max_cycles or lower max_len.")
        self.cap = cap


class TannerGraph:
    """Bipartite graph of variable nodes b_0..b_{n-1} and check nodes c_0..c_{m-1}.

    Nodes share one integer space: variable j is node j and check i is node
    n + i. Edge ids are fixed when the graph is built from a matrix (the
    row-major rank of the entry) and are kept by every subgraph, so cycles
    found in a subgraph name edges of the parent graph.

    Attributes
    ----------
        n : size of the variable index space
        m : size of the check index space
        variables : variable indices present in this graph
        checks : check indices present in this graph

    """

    n: int
    m: int
    variables: Tuple[int, ...]
    checks: Tuple[int, ...]

    def __init__(
        self,
        n: int,
        m: int,
        edges: Mapping[int, Tuple[int, int]],
        variables: Optional[Iterable[int]] = None,
        checks: Optional[Iterable[int]] = None,
    ):
        self.n = n
        self.m = m
        self._edges: Dict[int, Tuple[int, int]] = dict(sorted(edges.items()))
        var_set = set(range(n)) if variables is None else set(variables)
        chk_set = set(range(m)) if checks is None else set(checks)
        var_edges: Dict[int, List[int]] = {j: [] for j in var_set}
        chk_edges: Dict[int, List[int]] = {i: [] for i in chk_set}
        for e, (i, j) in self._edges.items():
            if j not in var_edges or i not in chk_edges:
                raise UnknownNodeError(f"Edge {e} = (c{i}, b{j}) leaves the node set.")
            var_edges[j].append(e)
            chk_edges[i].append(e)
        self.variables = tuple(sorted(var_set))
        self.checks = tuple(sorted(chk_set))
        self._var_edges = {j: tuple(es) for j, es in var_edges.items()}
        self._chk_edges = {i: tuple(es) for i, es in chk_edges.items()}

    # Node ids

    def var_node(self, j: int) -> int:
        return j

    def check_node(self, i: int) -> int:
        return self.n + i

    def is_variable(self, node: int) -> bool:
        return node < self.n

    def label(self, node: int) -> str:
        return f"b{node}" if self.is_variable(node) else f"c{node - self.n}"

    def nodes(self) -> List[int]:
        return list(self.variables) + [self.n + i for i in self.checks]

    # Edges

    @property
    def edges(self) -> Mapping[int, Tuple[int, int]]:
        """Edge id -> (check index, variable index)."""
        return self._edges

    def num_edges(self) -> int:
        return len(self._edges)

    def has_edge(self, e: int) -> bool:
        return e in self._edges

    def endpoints(self, e: int) -> Tuple[int, int]:
        """(variable node, check node) of edge `e`."""
        if e not in self._edges:
            raise UnknownNodeError(f"Edge {e} is not in the graph.")
        i, j = self._edges[e]
        return (j, self.n + i)

    def other(self, e: int, node: int) -> int:
        v, c = self.endpoints(e)
        if node == v:
            return c
        if node == c:
            return v
        raise UnknownNodeError(f"Edge {e} is not incident to {self.label(node)}.")

    def incident(self, node: int) -> Tuple[int, ...]:
        if self.is_variable(node):
            if node not in self._var_edges:
                raise UnknownNodeError(f"Unknown variable node b{node}.")
            return self._var_edges[node]
        i = node - self.n
        if i not in self._chk_edges:
            raise UnknownNodeError(f"Unknown check node c{i}.")
        return self._chk_edges[i]

    def degree(self, node: int) -> int:
        return len(self.incident(node))

    def var_degree(self, j: int) -> int:
        return len(self.incident(j))

    def check_degree(self, i: int) -> int:
        return len(self.incident(self.n + i))

    def odd_checks(self) -> List[int]:
        """Check indices of odd degree in this graph."""
        return [i for i in self.checks if self.check_degree(i) % 2 == 1]

    def edge_between(self, i: int, j: int) -> Optional[int]:
        for e in self.incident(j):
            if self._edges[e][0] == i:
                return e
        return None

    def to_networkx(self) -> nx.Graph:
        """Export as an undirected networkx graph with ("v", j) / ("c", i) nodes."""
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from((("v", j) for j in self.variables), bipartite=0)
        G.add_nodes_from((("c", i) for i in self.checks), bipartite=1)
        for e, (i, j) in self._edges.items():
            G.add_edge(("v", j), ("c", i), id=e)
        return G

    def __repr__(self) -> str:
        return (
            f"TannerGraph(variables={len(self.variables)}, "
            f"checks={len(self.checks)}, edges={self.num_edges()})"
        )


def build_tanner_graph(H: ParityCheckMatrix) -> TannerGraph:
    """Tanner graph of `H`: edge {b_j, c_i} iff h_ij = 1."""
    edges = {e: ij for e, ij in enumerate(H.sorted_entries())}
    return TannerGraph(H.n, H.m, edges)


def induced_subgraph(G: TannerGraph, vars: Iterable[int]) -> TannerGraph:
    """Subgraph on `vars`, all checks adjacent to them and the edges between.

    Raises:
        UnknownNodeError : if a variable is not in `G`

    """
    vs = set(vars)
    known = set(G.variables)
    for v in vs:
        if v not in known:
            raise UnknownNodeError(f"Unknown variable node b{v}.")
    edges = {}
    checks: Set[int] = set()
    for v in vs:
        for e in G.incident(v):
            i, _ = G.edges[e]
            edges[e] = G.edges[e]
            checks.add(i)
    return TannerGraph(G.n, G.m, edges, variables=vs, checks=checks)


# ## Cycles


@dataclass(frozen=True)
class Cycle:
    """Closed alternating walk e_1..e_l with distinct nodes, in canonical form.

    `nodes[k]` is the node shared by `edges[k - 1]` and `edges[k]`, so
    `nodes[0]` is where the walk starts. Equality and hashing use the edge
    sequence only.
    """

    edges: Tuple[int, ...]
    nodes: Tuple[int, ...] = field(compare=False)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def length(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def __contains__(self, e: object) -> bool:
        return e in self.edges

    @staticmethod
    def canonical(edges: Tuple[int, ...], nodes: Tuple[int, ...]) -> Cycle:
        """Rotate to the smallest edge id, then keep the smaller direction."""
        ell = len(edges)
        k = min(range(ell), key=lambda t: edges[t])
        fwd_e = tuple(edges[(k + t) % ell] for t in range(ell))
        fwd_n = tuple(nodes[(k + t) % ell] for t in range(ell))
        bwd_e = tuple(edges[(k - t) % ell] for t in range(ell))
        bwd_n = tuple(nodes[(k + 1 - t) % ell] for t in range(ell))
        if bwd_e < fwd_e:
            return Cycle(bwd_e, bwd_n)
        return Cycle(fwd_e, fwd_n)

    def reversed(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Edge and node sequences of the opposite traversal from the same start."""
        ell = len(self.edges)
        edges = tuple(self.edges[(-t - 1) % ell] for t in range(ell))
        nodes = tuple(self.nodes[(-t) % ell] for t in range(ell))
        return edges, nodes


def _dfs_cycles(
    G: TannerGraph, start: int, max_len: int, above_start: bool
) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    path_nodes = [start]
    path_edges: List[int] = []
    on_path = {start}

    def visit(u: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        for e in G.incident(u):
            if path_edges and e == path_edges[-1]:
                continue
            w = G.other(e, u)
            if w == start:
                if len(path_edges) + 1 >= 4:
                    yield tuple(path_edges) + (e,), tuple(path_nodes)
                continue
            if w in on_path or (above_start and w < start):
                continue
            if len(path_edges) + 2 > max_len:
                continue
            path_edges.append(e)
            path_nodes.append(w)
            on_path.add(w)
            yield from visit(w)
            on_path.discard(w)
            path_nodes.pop()
            path_edges.pop()

    yield from visit(start)


def enumerate_cycles(
    G: TannerGraph,
    max_len: int,
    through: Optional[Union[int, Tuple[str, int]]] = None,
    max_cycles: Optional[int] = DEFAULT_MAX_CYCLES,
) -> Set[Cycle]:
    """Distinct simple cycles of length <= `max_len`.

    Args:
        G : graph to search
        max_len : even length bound, at least 4
        through : optional restriction, ("node", id) or ("edge", id); a bare
            int is read as a node id
        max_cycles : cap on distinct cycles, None for no cap

    Returns:
        Set of canonical `Cycle`.

    Raises:
        ValueError : if `max_len` is odd or below 4
        CycleBudgetExceeded : if more than `max_cycles` cycles exist

    """
    if max_len < 4 or max_len % 2:
        raise ValueError(f"max_len must be even and >= 4, got {max_len}.")

    only_edge: Optional[int] = None
    if through is None:
        starts = sorted(G.nodes())
        above = True
    else:
        kind, ident = ("node", through) if isinstance(through, int) else through
        if kind == "edge":
            only_edge = ident
            starts = [G.endpoints(ident)[0]]
        elif kind == "node":
            G.incident(ident)
            starts = [ident]
        else:
            raise ValueError(f"Unknown restriction {kind!r}.")
        above = False

    found: Set[Cycle] = set()
    for s in starts:
        for edges, nodes in _dfs_cycles(G, s, max_len, above):
            if only_edge is not None and only_edge not in edges:
                continue
            found.add(Cycle.canonical(edges, nodes))
            if max_cycles is not None and len(found) > max_cycles:
                raise CycleBudgetExceeded(max_cycles)
    logger.debug("enumerated %d cycles up to length %d", len(found), max_len)
    return found


def girth(G: TannerGraph) -> Union[int, float]:
    """Length of the shortest cycle, by breadth-first search from every node.

    Returns:
        An even integer, or `math.inf` when `G` is a forest.

    """
    best: Union[int, float] = math.inf
    for root in G.nodes():
        dist = {root: 0}
        via = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for e in G.incident(u):
                if e == via[u]:
                    continue
                w = G.other(e, u)
                if w in dist:
                    best = min(best, dist[u] + dist[w] + 1)
                else:
                    dist[w] = dist[u] + 1
                    via[w] = e
                    queue.append(w)
    return best


def degree_distribution(G: TannerGraph) -> Tuple[Counter, Counter]:
    """Multisets of variable and check degrees."""
    return (
        Counter(G.var_degree(j) for j in G.variables),
        Counter(G.check_degree(i) for i in G.checks),
    )


def cycle_histogram(G: TannerGraph, max_len: int) -> Dict[int, int]:
    """Number of cycles of each length up to `max_len`."""
    return dict(sorted(Counter(c.length for c in enumerate_cycles(G, max_len)).items()))
