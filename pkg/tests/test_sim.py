import io
from fractions import Fraction
from typing import Dict, List, Set

import numpy as np
import pytest

import liftfloor
from liftfloor import (
    BSC,
    CSV_HEADER,
    DecoderConfig,
    DesignInfeasible,
    FloorBelowSearchDepth,
    IesOptions,
    ParityCheckMatrix,
    SimResult,
    StopRule,
    StopRuleError,
    TannerGraph,
    TrappingSet,
    TrappingSetCatalog,
)

from .code_strategies import graph_of

GB = DecoderConfig("gb", 20)


def sim_result(param: float, frames: int, frame_errors: int) -> SimResult:
    return SimResult("toy", 7, 3, "gallager-b", "bsc", param, frames, frame_errors, frame_errors, 0)


def five_three_sets(G: TannerGraph) -> List[TrappingSet]:
    """(5,3) sets built as two variables joined through three common neighbours."""
    near: Dict[int, Set[int]] = {v: set() for v in G.variables}
    for v in G.variables:
        for e in G.incident(v):
            c = G.other(e, v)
            near[v].update(G.other(f, c) for f in G.incident(c) if G.other(f, c) != v)
    found: List[TrappingSet] = []
    for u in G.variables:
        for v in G.variables:
            if v <= u or v in near[u]:
                continue
            common = sorted(near[u] & near[v])
            if len(common) < 3:
                continue
            t = TrappingSet(G, [u, v, *common[:3]], max_len=12)
            if (t.a, t.b) == (5, 3) and len(t.cycles) == 3:
                found.append(t)
    return found


# ## Monte Carlo


@pytest.mark.sim
def test_stop_rule() -> None:
    for bad in [(0, 10), (10, 0), (-1, -1)]:
        with pytest.raises(StopRuleError):
            StopRule(*bad)
    with pytest.raises(StopRuleError):
        liftfloor.monte_carlo(liftfloor.hamming_7_4(), GB, BSC(0.1), block_size=0)


@pytest.mark.sim
def test_noiseless_channel() -> None:
    result = liftfloor.monte_carlo(liftfloor.hamming_7_4(), GB, BSC(0.0), StopRule(1, 2000))
    assert result.frames == 2000
    assert result.frame_errors == 0
    assert result.fer == 0.0
    assert result.interval == (0.0, 0.0)


@pytest.mark.sim
def test_monte_carlo_ignores_workers() -> None:
    H = liftfloor.hamming_7_4()
    stop = StopRule(50, 20_000)
    one = liftfloor.monte_carlo(H, GB, BSC(0.05), stop, seed=11, workers=1, block_size=256)
    many = liftfloor.monte_carlo(H, GB, BSC(0.05), stop, seed=11, workers=4, block_size=256)
    assert one == many
    assert one.frame_errors >= 50
    assert one.frames % 256 == 0
    lo, hi = one.interval
    assert lo <= one.fer <= hi


@pytest.mark.sim
@pytest.mark.parametrize("channel", [BSC(0.05), liftfloor.BIAWGN(0.8)])
def test_monte_carlo_ignores_block_size(channel: liftfloor.ChannelModel) -> None:
    H = liftfloor.hamming_7_4()
    config = DecoderConfig("ms", 10) if channel.kind == "awgn" else GB
    stop = StopRule(10**6, 1500)
    runs = [
        liftfloor.monte_carlo(H, config, channel, stop, seed=4, workers=w, block_size=b)
        for b, w in [(1024, 1), (100, 1), (7, 3)]
    ]
    assert runs[0].frames == 1500
    assert runs[0].frame_errors > 0
    assert runs[1] == runs[0]
    assert runs[2] == runs[0]


@pytest.mark.sim
def test_monte_carlo_log_fn() -> None:
    seen = []
    liftfloor.monte_carlo(
        liftfloor.hamming_7_4(),
        GB,
        BSC(0.0),
        StopRule(1, 3000),
        block_size=1024,
        log_fn=lambda frames, errors: seen.append((frames, errors)),
    )
    assert seen == [(1024, 0), (2048, 0), (3000, 0)]


@pytest.mark.sim
def test_min_sum_on_awgn() -> None:
    H = liftfloor.tanner_155_64()
    channel = liftfloor.BIAWGN.from_ebn0(6.0, float(liftfloor.code_rate(H)))
    result = liftfloor.monte_carlo(H, DecoderConfig("ms", 20), channel, StopRule(10, 2048))
    assert result.channel == "awgn"
    assert result.param == 6.0
    assert result.fer < 0.05


@pytest.mark.sim
def test_csv() -> None:
    out = io.StringIO()
    liftfloor.write_csv([sim_result(0.01, 100, 3)], out)
    header, row = out.getvalue().splitlines()
    assert header == (
        "code,n,m,decoder,channel,param,frames,frame_errors,bit_errors,fer,ber,ci_lo,ci_hi,seed"
    )
    assert len(row.split(",")) == len(CSV_HEADER)
    assert row.startswith("toy,7,3,gallager-b,bsc,0.01,100,3,3,0.03,")

    out = io.StringIO()
    liftfloor.write_csv([sim_result(0.01, 100, 3)], out, header=False)
    assert out.getvalue().startswith("toy,")


@pytest.mark.sim
def test_fit_slope() -> None:
    frames = 10**9
    points = [sim_result(p, frames, round(frames * p**2)) for p in (1e-3, 1e-2, 1e-1)]
    assert liftfloor.fit_slope(points) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        liftfloor.fit_slope([points[0], sim_result(0.2, 100, 0)])


# ## Floor estimate


@pytest.mark.sim
def test_eps_grid() -> None:
    grid = liftfloor.eps_grid(1e-3, 1e-1, 3)
    assert grid.tolist() == pytest.approx([1e-3, 1e-2, 1e-1])
    for bad in [(0.0, 0.1, 3), (0.2, 0.1, 3), (0.1, 0.5, 3), (0.01, 0.1, 0)]:
        with pytest.raises(ValueError):
            liftfloor.eps_grid(*bad)


@pytest.mark.sim
def test_estimate_floor() -> None:
    estimate = liftfloor.estimate_floor(liftfloor.hamming_7_4(), GB, 2, eps=[0.01, 0.001])
    assert estimate.J == 1
    assert estimate.N_J >= 3
    assert estimate.predicted == pytest.approx([estimate.N_J * 0.01, estimate.N_J * 0.001])
    with pytest.raises(FloorBelowSearchDepth) as info:
        liftfloor.estimate_floor(liftfloor.trapping_4_4().H, GB, 1)
    assert info.value.max_weight == 1


@pytest.mark.sim
def test_floor_formula_on_toy_code() -> None:
    H = liftfloor.hamming_7_4()
    estimate = liftfloor.estimate_floor(H, GB, 1)
    eps = [1e-3, 3e-3, 1e-2]
    results = [
        liftfloor.monte_carlo(H, GB, BSC(e), StopRule(100, 1_000_000), seed=5, workers=2)
        for e in eps
    ]
    for r, predicted in zip(results, liftfloor.predict_fer(estimate.J, estimate.N_J, eps)):
        assert r.frame_errors >= 100
        assert predicted / 2 <= r.fer <= predicted * 2
    assert abs(liftfloor.fit_slope(results) - estimate.J) <= 0.5


def paired_blocks(k: int) -> ParityCheckMatrix:
    # Two degree-3 variables sharing two checks: one error is corrected in one
    # iteration, both errors are a fixed point of Gallager B.
    block = ParityCheckMatrix(4, 2, [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (3, 1)])
    return liftfloor.disjoint_union(*[block] * k)


@pytest.mark.sim
def test_floor_formula_at_weight_two() -> None:
    k = 10
    H = paired_blocks(k)
    estimate = liftfloor.estimate_floor(H, GB, 3)
    assert (estimate.J, estimate.N_J) == (2, k)

    eps = [1e-2, 2e-2, 5e-2]
    results = [
        liftfloor.monte_carlo(H, GB, BSC(e), StopRule(100, 1_000_000), seed=8, workers=2)
        for e in eps
    ]
    for r, e, predicted in zip(results, eps, liftfloor.predict_fer(2, k, eps)):
        exact = 1 - (1 - e**2) ** k
        assert r.frame_errors >= 100
        assert predicted / 2 <= r.fer <= predicted * 2
        assert abs(r.fer - exact) <= 0.4 * exact
    assert abs(liftfloor.fit_slope(results) - 2) <= 0.3


# ## Design pipeline


def four_two_catalog() -> TrappingSetCatalog:
    G = graph_of(liftfloor.trapping_4_2().H)
    return TrappingSetCatalog([TrappingSet(G, range(4))])


@pytest.mark.sim
def test_design_sweeps_degrees() -> None:
    H = liftfloor.trapping_4_2().H
    design = liftfloor.design_pipeline(H, four_two_catalog(), [3, 2])
    assert design.N == 3
    assert design.done
    assert design.ies.all_eliminated
    assert design.lifted.N == 3
    assert "all sets handled" in design.text()


@pytest.mark.sim
def test_design_keeps_lift_free_result() -> None:
    H = liftfloor.trapping_4_2().H
    design = liftfloor.design_pipeline(H, four_two_catalog(), 2, baseline_seed=1)
    assert design.N == 2
    assert design.done
    assert not design.ies.all_eliminated
    assert design.ies.surviving_cycles == 1
    assert design.baseline_surviving is not None and 0 <= design.baseline_surviving <= 3
    assert design.lifted_rate <= design.base_rate
    assert "random lifting surviving cycles" in design.text()


@pytest.mark.sim
def test_design_strict() -> None:
    H = liftfloor.trapping_4_2().H
    with pytest.raises(DesignInfeasible):
        liftfloor.design_pipeline(H, four_two_catalog(), [2], IesOptions(strict=True))
    design = liftfloor.design_pipeline(H, four_two_catalog(), [2, 3], IesOptions(strict=True))
    assert design.N == 3
    with pytest.raises(ValueError):
        liftfloor.design_pipeline(H, four_two_catalog(), [])


@pytest.mark.sim
def test_design_empty_catalog() -> None:
    H = liftfloor.hamming_7_4()
    design = liftfloor.design_pipeline(H, TrappingSetCatalog(), [4, 2])
    assert design.N == 2
    assert design.done
    assert design.D == liftfloor.PermutationIndexMatrix.zeros(H, 2)
    assert design.girth_before == design.girth_after == 4


# ## Tanner code


@pytest.mark.sim
def test_tanner_rate() -> None:
    H = liftfloor.tanner_155_64()
    assert liftfloor.gf2_rank(H) == 91
    assert liftfloor.code_rate(H) == Fraction(64, 155)
    assert round(float(liftfloor.code_rate(H)), 4) == 0.4129


@pytest.mark.sim
def test_tanner_five_three_sets() -> None:
    H = liftfloor.tanner_155_64()
    G = graph_of(H)
    sets = five_three_sets(G)
    assert sets
    design = liftfloor.design_pipeline(H, TrappingSetCatalog(sets[:1]), [2, 3])
    assert design.N == 3
    assert design.ies.all_eliminated
    # Three cycles, each edge on two of them: their indices cannot all be odd.
    at_two = liftfloor.run_ies(G, TrappingSetCatalog(sets[:1]), 2, H=H)
    assert at_two.all_lift_free
    assert at_two.surviving_cycles == 1


@pytest.mark.sim
@pytest.mark.slow
def test_tanner_critical_number() -> None:
    H = liftfloor.tanner_155_64()
    result = liftfloor.critical_number_search(H, DecoderConfig("gb", 50), 3)
    assert result.J == 3


@pytest.mark.sim
@pytest.mark.slow
def test_tanner_lifting_raises_critical_number() -> None:
    H = liftfloor.tanner_155_64()
    G = graph_of(H)
    config = DecoderConfig("gb", 50)
    found = liftfloor.critical_number_search(H, config, 3)
    harvested = liftfloor.harvest_trapping_sets(found.failures, H, config, G)
    catalog = TrappingSetCatalog(t for t in harvested if (t.a, t.b) == (5, 3))
    assert len(catalog) > 0

    design = liftfloor.design_pipeline(H, catalog, 2)
    assert design.N == 2
    assert design.done
    assert all(r.lift_free for r in design.ies.sets)
    assert design.lifted_rate <= design.base_rate
    assert float(design.lifted_rate) == pytest.approx(0.4065, abs=0.01)

    lifted = liftfloor.critical_number_search(design.lifted.matrix, config, 3)
    assert lifted.J is None


@pytest.mark.sim
@pytest.mark.slow
@pytest.mark.parametrize("N", [2, 4, 6])
def test_rate_preserved_on_regular_code(N: int) -> None:
    H = liftfloor.random_regular(504, 3, 6, seed=0)
    assert liftfloor.gf2_rank(H) == 252
    G = graph_of(H)
    g = int(liftfloor.girth(G))
    shortest = sorted(liftfloor.enumerate_cycles(G, g), key=lambda c: c.edges)[:4]
    sets = {tuple(sorted(v for v in c.nodes if v < G.n)) for c in shortest}
    catalog = TrappingSetCatalog(TrappingSet(G, s) for s in sets)
    design = liftfloor.design_pipeline(H, catalog, N)
    if liftfloor.operators.is_power_of_two(N):
        assert design.lifted_rate == Fraction(1, 2)
    else:
        assert design.lifted_rate <= Fraction(1, 2)


@pytest.mark.sim
def test_simulated_lift_is_a_code() -> None:
    H = liftfloor.hamming_7_4()
    D = liftfloor.random_lifting(H, 2, seed=0)
    lifted: ParityCheckMatrix = liftfloor.lift(H, D).matrix
    result = liftfloor.monte_carlo(lifted, GB, BSC(0.0), StopRule(1, 100), code="lifted")
    assert (result.n, result.m) == (14, 6)
    assert result.code == "lifted"
    assert np.isclose(result.ber, 0.0)
