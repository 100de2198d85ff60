import numpy as np
import pytest

from conftest import planted
from edsketch.driver import (ApproxConfig, approx_ed_noprep, approx_ed_prep, build_context,
                             preprocess_approx)
from edsketch.errors import EmptyInput, ParamError, ParamMismatch
from edsketch.hash_sketch import HashParams, build_sketch
from edsketch.oracle import ed_exact
from edsketch.window_dp import mapping_cost


def test_config_validation():
    with pytest.raises(ParamError):
        ApproxConfig(eps=0.6)
    with pytest.raises(ParamError):
        ApproxConfig(eps=0)
    assert ApproxConfig().window_width(4096, True) == 8
    assert ApproxConfig().window_width(3125, False) == 5


def test_equal_strings_give_zero():
    a = np.random.default_rng(0).integers(0, 4, 700)
    assert approx_ed_prep(a, a, ApproxConfig(d=6)).estimate == 0
    res = approx_ed_noprep(a, a)
    assert res.estimate == 0 and res.mode == "exact"


def test_fast_path_is_exact():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a, b = planted(1500, 25, 4, rng)
        res = approx_ed_noprep(a, b)
        assert res.mode == "exact" and res.estimate == ed_exact(a, b)


@pytest.mark.parametrize("seed", range(3))
def test_estimates_never_undercut(seed):
    rng = np.random.default_rng(seed)
    a, b = planted(1024, 120, 4, rng)
    ed = ed_exact(a, b)
    cp = ApproxConfig(d=6, eps=0.25, seed=seed)
    cn = ApproxConfig(d=5, eps=0.25, seed=seed, fast_path=False)
    for res, cfg in ((approx_ed_prep(a, b, cp), cp), (approx_ed_noprep(a, b, cn), cn)):
        assert res.estimate >= ed
        assert res.mapping_cost == res.estimate
        ctx = build_context(a, b, cfg, prep=res.mode == "prep")
        assert mapping_cost(res.mapping, ctx.awin.lens, ctx.n_b) == res.estimate
        assert res.per_tau and res.budget["window_ed_queries"] > 0


def test_independent_strings_reported():
    rng = np.random.default_rng(7)
    a, b = rng.integers(0, 4, 600), rng.integers(0, 4, 600)
    res = approx_ed_prep(a, b, ApproxConfig(d=5))
    assert res.estimate >= ed_exact(a, b)


def test_prepared_graphs_are_reused():
    rng = np.random.default_rng(3)
    a, b = planted(800, 40, 4, rng)
    cfg = ApproxConfig(d=6, eps=0.25, seed=5)
    pa = preprocess_approx(a, cfg, role="A", materialize=True)
    pb = preprocess_approx(b, cfg, role="B", materialize=True)
    res = approx_ed_prep(pa, pb, cfg)
    assert res.flags["graphs_reused"] == {"A": True, "B": True}
    assert res.estimate == approx_ed_prep(a, b, cfg).estimate


def test_mismatched_seeds_and_empty_input():
    a = np.arange(50) % 4
    with pytest.raises(ParamMismatch):
        approx_ed_noprep(build_sketch(a, HashParams(1)), build_sketch(a, HashParams(2)))
    with pytest.raises(ParamMismatch):
        approx_ed_prep(preprocess_approx(a, ApproxConfig(seed=1)), a, ApproxConfig(seed=2))
    with pytest.raises(EmptyInput):
        approx_ed_noprep([], [1, 2])
