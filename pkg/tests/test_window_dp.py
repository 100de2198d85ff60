import numpy as np
import pytest

from conftest import planted
from edsketch.errors import AboveThreshold, ParamError
from edsketch.estimates import EstimateMap, Family, LazyBlock, WindowContext
from edsketch.oracle import ed_exact, mapping_cost_bruteforce, min_mapping_exact
from edsketch.window_dp import (band_offsets, delta_ladder, dp_threshold, drop_nested,
                                ed_of_estimate, family_strides, mapping_cost, restricted_cost)
from edsketch.windows import decompose_a, decompose_b, tau_levels


def context(A, B, d, eps=0.5):
    A = np.asarray(A, dtype=np.uint32)
    B = np.asarray(B, dtype=np.uint32)
    fams = {lv.index: Family(lv, decompose_b(len(B), d, lv, eps)) for lv in tau_levels(d, eps)}
    return WindowContext(A, B, decompose_a(len(A), d), fams, d)


def exact_map(ctx):
    """Every pair gets its true distance (a block with an unreachable threshold)."""
    E = EstimateMap(ctx)
    for ti, fam in ctx.families.items():
        E.add_block(LazyBlock(ti, np.arange(len(ctx.awin)), [(0, fam.size)], 10 ** 9))
    return E


def noisy_map(ctx, rng):
    E = EstimateMap(ctx)
    for ti, fam in ctx.families.items():
        for a in range(len(ctx.awin)):
            bs = rng.choice(fam.size, size=min(fam.size, 8), replace=False)
            dist = ctx.ed_ab(np.full(len(bs), a), ti, bs)
            E.add_direct(ti, np.full(len(bs), a), bs, dist + rng.integers(0, 2, len(bs)))
    return E


def perturbed(rng, n, sigma=3, edits=6):
    A = rng.integers(0, sigma, n)
    B = A.copy()
    for _ in range(int(rng.integers(0, edits))):
        p = int(rng.integers(0, len(B)))
        B = np.insert(B, p, rng.integers(0, sigma)) if rng.random() < 0.5 else np.delete(B, p)
    return A, B


def test_identical_strings_cost_zero():
    rng = np.random.default_rng(0)
    A = rng.integers(0, 4, 200)
    ctx = context(A, A, 5)
    res = ed_of_estimate(exact_map(ctx), eps=0.5)
    assert res.value == 0
    assert mapping_cost(res.mapping, ctx.awin.lens, ctx.n_b) == 0


def test_empty_estimates_cost_everything():
    rng = np.random.default_rng(1)
    A, B = rng.integers(0, 4, 60), rng.integers(0, 4, 50)
    ctx = context(A, B, 4)
    res = dp_threshold(EstimateMap(ctx), 2 * 60, eps=0.5)
    assert res.value == 60 + 50
    assert all(m is None for m in res.mapping)


def test_threshold_rejects_small_delta():
    rng = np.random.default_rng(2)
    ctx = context(rng.integers(0, 4, 80), rng.integers(0, 4, 80), 4)
    assert isinstance(dp_threshold(EstimateMap(ctx), 1, eps=0.5), AboveThreshold)
    with pytest.raises(ParamError):
        dp_threshold(EstimateMap(ctx), 0.5)


@pytest.mark.parametrize("seed", range(6))
def test_full_band_matches_exact_mapping_search(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        n = int(rng.integers(12, 40))
        A, B = perturbed(rng, n)
        ctx = context(A, B, int(rng.integers(3, 6)))
        E = noisy_map(ctx, rng)
        if seed % 2 == 0:
            E.add_block(LazyBlock(1, np.arange(0, len(ctx.awin), 2), [(0, ctx.families[1].size)], 2))
        delta = 2 * max(ctx.n_a, ctx.n_b)
        res = dp_threshold(E, delta, eps=0.5)
        cost, wins = restricted_cost(E, delta)
        best = min_mapping_exact(cost, ctx.awin.lens, wins, ctx.n_b)
        assert res.value == best
        # the returned mapping realizes the value and never undercuts the distance
        assert mapping_cost(res.mapping, ctx.awin.lens, ctx.n_b) == res.value
        assert res.value >= ed_exact(A, B)


def test_exact_search_agrees_with_enumeration():
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 15:
        n = int(rng.integers(6, 14))
        A, B = perturbed(rng, n)
        ctx = context(A, B, 4)
        cost, wins = restricted_cost(exact_map(ctx), 2 * n)
        if (len(wins) + 1) ** len(ctx.awin) > 2_000_000:
            continue
        assert mapping_cost_bruteforce(cost, ctx.awin.lens, wins, ctx.n_b) == \
            min_mapping_exact(cost, ctx.awin.lens, wins, ctx.n_b)
        checked += 1


@pytest.mark.parametrize("seed", range(3))
def test_sandwich_with_exact_estimates(seed):
    rng = np.random.default_rng(seed)
    eps = 0.1
    a, b = planted(128, 10, 4, rng)
    ctx = context(a, b, 8, eps)
    res = ed_of_estimate(exact_map(ctx), eps=eps)
    ed = ed_exact(a, b)
    assert ed <= res.value <= (1 + 8 * eps) * ed


def test_cost_does_not_increase_with_delta():
    rng = np.random.default_rng(4)
    a, b = planted(160, 12, 4, rng)
    ctx = context(a, b, 6)
    E = exact_map(ctx)
    vals = []
    for delta in delta_ladder(160, 0.5):
        r = dp_threshold(E, delta, eps=0.5, trace=False, subsample=False)
        vals.append(np.inf if isinstance(r, AboveThreshold) else r.value)
    finite = [v for v in vals if v != np.inf]
    assert finite and all(x >= y for x, y in zip(finite, finite[1:]))


def test_search_agrees_with_linear_scan():
    rng = np.random.default_rng(5)
    a, b = planted(200, 15, 4, rng)
    ctx = context(a, b, 6)
    E = exact_map(ctx)
    eps = 0.25
    first = next(d for d in delta_ladder(200, eps)
                 if not isinstance(dp_threshold(E, d, eps, trace=False), AboveThreshold))
    res = ed_of_estimate(E, eps=eps)
    assert res.delta == first
    assert res.value == dp_threshold(E, first, eps, trace=False).value


def test_strides_and_band():
    rng = np.random.default_rng(6)
    ctx = context(rng.integers(0, 4, 256), rng.integers(0, 4, 240), 8)
    E = EstimateMap(ctx)
    full = family_strides(E, 10, subsample=False)
    assert full == {ti: fam.windows.gamma for ti, fam in ctx.families.items()}
    wide = family_strides(E, 256)
    assert all(wide[ti] % full[ti] == 0 and wide[ti] >= full[ti] for ti in full)
    assert band_offsets(256, 240, 3) == (-16 - 30, 30)
    assert band_offsets(10, 14, 1) == (-10, 14)


def test_drop_nested_restores_monotonicity():
    m = [(-1, 5, 3, 0), (-1, 2, 3, 0), None, (-1, 9, 2, 1)]
    out = drop_nested(m)
    starts = [x[1] for x in out if x is not None]
    assert starts == sorted(starts)
    assert out[1] == m[1] and out[3] == m[3]


def test_mapping_cost_definition():
    # one window covers 1..3 of a length-5 B, the other A-window is deleted
    assert mapping_cost([(-1, 1, 3, 1), None], [3, 2], 5) == 1 + 2 + 2
    # overlap counts every extra cover
    assert mapping_cost([(-1, 1, 3, 0), (-1, 3, 3, 0)], [3, 3], 5) == 1
