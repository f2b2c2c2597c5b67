from pathlib import Path
from typing import List, Tuple

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import DataObject, data, integers, sampled_from

import liftfloor
from liftfloor import (
    DFileFormatError,
    ParityCheckMatrix,
    PathError,
    PermutationIndexMatrix,
    ShiftOracle,
    SupportMismatchError,
    TannerGraph,
    operators,
)

from .code_strategies import (
    full_rank_matrices,
    graph_of,
    index_matrices,
    liftings,
    parity_matrices,
    powers_of_two,
)
from .strategies import assert_cycle_order

SQUARE = ParityCheckMatrix(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)])
sparse = sampled_from([True, False, False, False])


def some_cycles(G: TannerGraph, max_len: int, limit: int) -> List[liftfloor.Cycle]:
    return sorted(liftfloor.enumerate_cycles(G, max_len), key=lambda c: c.edges)[:limit]


# ## Z_N operators


@pytest.mark.lifting
def test_operators() -> None:
    assert operators.mod(-1, 6) == 5
    assert operators.mod(13, 6) == 1
    assert operators.order(0, 6) == 1
    assert operators.order(2, 6) == 3
    assert operators.order(5, 6) == 6
    assert operators.inverse(2, 6) == 4
    assert operators.compose(4, 5, 6) == 3
    assert operators.alternating_sum([1, 2, 3], 5) == 2
    assert operators.is_power_of_two(8)
    assert not operators.is_power_of_two(6)


@pytest.mark.lifting
@given(integers(0, 7), integers(0, 7), sampled_from([2, 3, 5, 8]))
def test_compose_matches_matrices(d1: int, d2: int, N: int) -> None:
    d1, d2 = d1 % N, d2 % N
    assert liftfloor.compose_shift_indices(d1, d2, N) == ShiftOracle.compose(d1, d2, N)


# ## Permutation index matrices


@pytest.mark.lifting
def test_index_matrix_validation() -> None:
    D = PermutationIndexMatrix.zeros(liftfloor.hamming_7_4(), 3)
    assert D[0, 0] == 0
    assert D[0, 1] == liftfloor.INFINITY
    D[0, 2] = 2
    assert D.nonzero() == {(0, 2): 2}
    with pytest.raises(ValueError):
        D[0, 2] = 3
    with pytest.raises(SupportMismatchError):
        D[0, 1] = 1
    with pytest.raises(ValueError):
        PermutationIndexMatrix(2, [[0, 2]])
    with pytest.raises(SupportMismatchError):
        liftfloor.lift(SQUARE, PermutationIndexMatrix(2, [[0, 0], [0, -1]]))


@pytest.mark.lifting
def test_random_lifting_is_seeded() -> None:
    H = liftfloor.hamming_7_4()
    assert liftfloor.random_lifting(H, 5, seed=3) == liftfloor.random_lifting(H, 5, seed=3)
    assert liftfloor.random_lifting(H, 5, seed=3).support() == H.entries


# ## Paths and cycle orders


@pytest.mark.lifting
def test_square_lift() -> None:
    G = graph_of(SQUARE)
    (c,) = liftfloor.enumerate_cycles(G, 4)
    D = PermutationIndexMatrix(2, [[0, 0], [0, 1]])
    assert liftfloor.path_permutation_index(G, c, D) == 1
    assert liftfloor.cycle_order(G, c, D) == 2
    assert liftfloor.verify_theorem1(G, c, D) == liftfloor.Theorem1Report(2, 1, (8,))
    assert liftfloor.girth_of_lift(SQUARE, D) == 8

    D4 = PermutationIndexMatrix(4, [[0, 0], [0, 2]])
    assert liftfloor.verify_theorem1(G, c, D4) == liftfloor.Theorem1Report(2, 2, (8, 8))

    zero = PermutationIndexMatrix.zeros(SQUARE, 3)
    assert liftfloor.verify_theorem1(G, c, zero) == liftfloor.Theorem1Report(1, 3, (4, 4, 4))
    assert liftfloor.girth_of_lift(SQUARE, zero) == 4


@pytest.mark.lifting
def test_path_errors() -> None:
    G = graph_of(liftfloor.hamming_7_4())
    D = PermutationIndexMatrix.zeros(liftfloor.hamming_7_4(), 2)
    # Edges 0 = (c0, b0) and 8 = (c2, b3) share no node.
    with pytest.raises(PathError):
        liftfloor.path_permutation_index(G, [0, 8], D)
    assert liftfloor.path_permutation_index(G, [], D) == 0


@pytest.mark.lifting
@given(liftings(max_n=8, max_m=5))
@settings(max_examples=100)
def test_path_index_matches_matrices(case: Tuple[ParityCheckMatrix, PermutationIndexMatrix]) -> None:
    H, D = case
    G = graph_of(H)
    for c in some_cycles(G, 8, 10):
        start = c.nodes[0]
        assert liftfloor.path_permutation_index(G, c, D) == ShiftOracle.path(G, c.edges, D, start)
        prefix = list(c.edges[: len(c) // 2])
        assert liftfloor.path_permutation_index(G, prefix, D, start) == ShiftOracle.path(
            G, prefix, D, start
        )
        reverse_edges, reverse_nodes = c.reversed()
        backwards = liftfloor.path_permutation_index(G, reverse_edges, D, reverse_nodes[0])
        assert backwards == operators.inverse(liftfloor.path_permutation_index(G, c, D), D.N)
        assert_cycle_order(G, c, D)


def check_theorem1(H: ParityCheckMatrix, D: PermutationIndexMatrix, max_len: int, limit: int) -> None:
    G = graph_of(H)
    L = liftfloor.lift(H, D)
    LG = L.tanner_graph()
    for c in some_cycles(G, max_len, limit):
        k = liftfloor.cycle_order(G, c, D)
        report = liftfloor.verify_theorem1(G, c, D)
        assert report.k == k
        assert report.count == D.N // k
        assert report.lengths == (k * len(c),) * (D.N // k)

        # A length-l cycle lies above c iff its index is 0.
        above = {e: LG.edges[e] for e in L.inverse_image(G, c.edges)}
        image = TannerGraph(LG.n, LG.m, above)
        short = liftfloor.enumerate_cycles(image, len(c))
        assert bool(short) == (liftfloor.path_permutation_index(G, c, D) == 0)


@pytest.mark.lifting
@given(liftings(max_n=8, max_m=5))
@settings(max_examples=100)
def test_theorem1(case: Tuple[ParityCheckMatrix, PermutationIndexMatrix]) -> None:
    H, D = case
    check_theorem1(H, D, 8, 12)


@pytest.mark.lifting
@pytest.mark.slow
@given(data())
@settings(max_examples=500)
def test_theorem1_full(data: DataObject) -> None:
    H = data.draw(parity_matrices(max_n=15, max_m=8, density=sparse))
    D = data.draw(index_matrices(H))
    check_theorem1(H, D, 10, 50)


@pytest.mark.lifting
def test_theorem1_on_subgraph() -> None:
    H = liftfloor.trapping_4_2().H
    G = graph_of(H)
    D = liftfloor.random_lifting(H, 5, seed=7)
    sub = liftfloor.induced_subgraph(G, [0, 1, 2])
    for c in liftfloor.enumerate_cycles(sub, 10):
        k = liftfloor.cycle_order(G, c, D)
        assert liftfloor.verify_theorem1(sub, c, D).count == 5 // k


# ## Block-circulant form and rates


@pytest.mark.lifting
@given(liftings(max_n=10, max_m=6))
@settings(max_examples=100)
def test_circulant_decomposition(case: Tuple[ParityCheckMatrix, PermutationIndexMatrix]) -> None:
    H, D = case
    N = D.N
    A = liftfloor.circulant_components(H, D)
    assert np.array_equal(sum(a.astype(np.int64) for a in A), H.to_dense())

    B = liftfloor.block_circulant_form(H, D)
    lifted = liftfloor.lift(H, D).matrix.to_dense()
    rows = [((-r) % N) * H.m + i for i in range(H.m) for r in range(N)]
    cols = [((-s) % N) * H.n + j for j in range(H.n) for s in range(N)]
    assert np.array_equal(B[np.ix_(rows, cols)], lifted)
    assert liftfloor.gf2_rank(B) == liftfloor.gf2_rank(lifted)


@pytest.mark.lifting
@given(data(), powers_of_two)
@settings(max_examples=100)
def test_theorem2(data: DataObject, N: int) -> None:
    H = data.draw(parity_matrices(max_n=10, max_m=6))
    D = data.draw(index_matrices(H, N))
    lifted = liftfloor.lift(H, D)
    assert lifted.rate() <= liftfloor.code_rate(H)
    assert liftfloor.theorem2_holds(H, D)


@pytest.mark.lifting
@given(data(), powers_of_two)
@settings(max_examples=100)
def test_theorem2_full_rank(data: DataObject, N: int) -> None:
    H = data.draw(full_rank_matrices(max_m=6, max_k=6))
    D = data.draw(index_matrices(H, N))
    assert liftfloor.gf2_rank(H) == H.m
    assert liftfloor.lift(H, D).rate() == liftfloor.code_rate(H)


@pytest.mark.lifting
@given(data(), sampled_from([2, 4]))
@settings(max_examples=30)
def test_theorem3(data: DataObject, N: int) -> None:
    H = data.draw(full_rank_matrices(max_m=5, max_k=5))
    D = data.draw(index_matrices(H, N))
    d = liftfloor.min_distance_bruteforce(H)
    dN = liftfloor.min_distance_bruteforce(liftfloor.lift(H, D).matrix)
    assert d <= dN <= N * d
    assert liftfloor.theorem3_holds(H, D)


@pytest.mark.lifting
def test_not_power_of_two_is_measured() -> None:
    H = liftfloor.hamming_7_4()
    D = liftfloor.random_lifting(H, 3, seed=0)
    assert isinstance(liftfloor.theorem2_holds(H, D), bool)


@pytest.mark.lifting
def test_inverse_image() -> None:
    H = liftfloor.hamming_7_4()
    G = graph_of(H)
    L = liftfloor.lift(H, liftfloor.random_lifting(H, 4, seed=2))
    LG = L.tanner_graph()
    assert L.inverse_image(G, []) == []
    above = L.inverse_image(G, [0, 5])
    assert len(above) == 8
    for e in above:
        i, j = LG.edges[e]
        assert (i // 4, j // 4) in {G.edges[0], G.edges[5]}


# ## D files


@pytest.mark.lifting
def test_dfile(tmp_path: Path) -> None:
    H = liftfloor.hamming_7_4()
    D = liftfloor.random_lifting(H, 4, seed=5)
    text = liftfloor.emit_dfile(D)
    assert text.splitlines()[0] == "3 7 4"
    assert text.splitlines()[1].split()[1] == "-"
    assert liftfloor.parse_dfile(text) == D

    path = str(tmp_path / "d.txt")
    liftfloor.dump_dfile(D, path)
    assert liftfloor.load_dfile(path, H) == D
    with pytest.raises(SupportMismatchError):
        liftfloor.load_dfile(path, SQUARE)


@pytest.mark.lifting
@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("2 2\n0 0\n0 0\n", 1),
        ("2 2 2\n0 0\n", 1),
        ("2 2 2\n0 0\n0 x\n", 3),
        ("2 2 2\n0 0 0\n0 0\n", 2),
        ("2 2 2\n0 2\n0 0\n", 2),
    ],
)
def test_dfile_errors(text: str, line: int) -> None:
    with pytest.raises(DFileFormatError) as info:
        liftfloor.parse_dfile(text)
    assert info.value.line == line
