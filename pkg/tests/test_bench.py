import numpy as np
import pytest

from edsketch.bench import InstanceSpec, compare_backends, fit_slope, generate, run_scaling, verify
from edsketch.errors import ParamError
from edsketch.oracle import ed_exact


def test_block_moves_zero_is_identity():
    inst = generate(InstanceSpec("block-moves", 100, 0))
    assert np.array_equal(inst.a, inst.b)
    assert sorted(inst.a.tolist()) == list(range(1, 101))


def test_single_planted_edit():
    for seed in range(20):
        inst = generate(InstanceSpec("planted-edits", 200, 1, seed=seed))
        assert ed_exact(inst.a, inst.b) in (0, 1)


def test_random_pair_is_far():
    inst = generate(InstanceSpec("random-pair", 4096, 32, sigma=1 << 20))
    assert verify(inst)["ok"] and verify(inst)["ed"] > 3 * 32 * 32


@pytest.mark.parametrize("family,side", [("block-moves", "yes"), ("planted-edits", "yes"),
                                         ("gap-pair", "yes"), ("gap-pair", "no")])
def test_bounds_hold_and_generation_is_deterministic(family, side):
    for seed in range(3):
        spec = InstanceSpec(family, 1500, 12, seed=seed, side=side)
        x, y = generate(spec), generate(spec)
        assert np.array_equal(x.a, y.a) and np.array_equal(x.b, y.b)
        assert verify(x)["ok"]
        assert x.record()["spec"]["seed"] == seed
    assert verify(generate(InstanceSpec(family, 9000, 4, side=side))) is None


def test_gap_yes_keeps_length():
    inst = generate(InstanceSpec("gap-pair", 500, 9, seed=1))
    assert len(inst.a) == len(inst.b)


def test_instance_spec_validation():
    with pytest.raises(ParamError):
        InstanceSpec("nope", 10)
    with pytest.raises(ParamError):
        InstanceSpec("gap-pair", 10, side="maybe")


def test_fit_slope():
    xs = [1, 2, 4, 8]
    assert fit_slope(xs, [3 * x ** 2 for x in xs]) == pytest.approx(2.0)
    with pytest.raises(ParamError):
        fit_slope([2, 2], [1, 3])


def test_small_scaling_tables():
    rep = run_scaling("small-ed", [4, 8, 16], n=1024)
    assert rep.x == "k" and len(rep.rows) == 3 and 1.5 < rep.slope < 2.5
    rep = run_scaling("prep", [512, 1024], d=6, eps=0.25)
    assert all(r["t_tau"] > 0 for r in rep.rows)
    with pytest.raises(ParamError):
        run_scaling("other", [1, 2])


def test_backend_comparison_rows():
    rows = compare_backends(n=256, repeat=1)
    assert {r["kernel"] for r in rows} >= {"prefix_hashes", "wave_ed", "ed_dp"}
    assert all(r["python_s"] > 0 for r in rows)
