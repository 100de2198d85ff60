import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import block_moves, ref_lcs, ref_perm_lcs
from edsketch.budget import QueryBudget
from edsketch.errors import NotPermutation, ParamMismatch
from edsketch.hash_sketch import HashParams
from edsketch.perm_lcs import Block, compress, his, preprocess_permutation, ulam_lcs, ulam_query

P = HashParams(2024)


def sketch(p, params=P):
    return preprocess_permutation(list(p), params)


def quadratic_his(blocks):
    """O(k^2) heaviest chain with strictly increasing y_start."""
    best = []
    for i, b in enumerate(blocks):
        prev = [best[j] for j in range(i) if blocks[j].y_start < b.y_start]
        best.append(b.weight + max(prev, default=0))
    return max(best, default=0)


def test_inverse():
    assert sketch([1]).inv.tolist() == [1]
    assert sketch([3, 1, 2]).inv.tolist() == [2, 3, 1]


@pytest.mark.parametrize("bad", [[1, 1], [0, 1], [2, 3], []])
def test_not_permutation(bad):
    with pytest.raises(NotPermutation):
        sketch(bad)


def test_compress_examples():
    x = sketch(range(1, 9))
    assert compress(x, x) == [Block(1, 1, 8)]
    assert compress(sketch([1, 2, 3, 4]), sketch([3, 4, 1, 2])) == [Block(1, 3, 2), Block(3, 1, 2)]
    singles = compress(sketch([1, 2, 3, 4]), sketch([4, 3, 2, 1]))
    assert [b.weight for b in singles] == [1, 1, 1, 1]


def test_his_examples():
    assert his([Block(1, 1, 9)]) == 9
    assert his([Block(1, 3, 2), Block(3, 1, 2)]) == 2
    assert his([Block(1, 1, 2), Block(3, 3, 2)]) == 4
    assert his([]) == 0


def test_ulam_examples():
    x = sketch(range(1, 6))
    assert ulam_lcs(x, x) == 5
    y = sketch([2, 1, 3, 4, 5])
    assert ulam_lcs(x, y) == 4 == ref_lcs([1, 2, 3, 4, 5], [2, 1, 3, 4, 5])
    rng = np.random.default_rng(5)
    p = block_moves(1024, 5, rng)
    assert ulam_lcs(sketch(range(1, 1025)), sketch(p)) == ref_perm_lcs(range(1, 1025), p)


def test_seed_mismatch():
    with pytest.raises(ParamMismatch):
        ulam_lcs(sketch([1, 2]), sketch([2, 1], HashParams(1)))


@given(st.permutations(list(range(1, 33))), st.permutations(list(range(1, 33))))
def test_matches_quadratic_lcs(p, q):
    x, y = sketch(p), sketch(q)
    res = ulam_query(x, y, reconstruct=True)
    assert res.lcs == ref_lcs(p, q)
    # blocks partition X and are token-verified against Y
    assert [t for b in res.blocks for t in p[b.x_start - 1:b.x_start - 1 + b.weight]] == list(p)
    for b in res.blocks:
        assert p[b.x_start - 1:b.x_start - 1 + b.weight] == q[b.y_start - 1:b.y_start - 1 + b.weight]
    k = len(p) - res.lcs
    assert len(res.blocks) <= 2 * k + 1
    assert his(res.blocks) == quadratic_his(res.blocks)
    # the chain is increasing in both coordinates and has the reported weight
    assert sum(b.weight for b in res.chain) == res.lcs
    assert all(u.y_start < v.y_start and u.x_start < v.x_start for u, v in zip(res.chain, res.chain[1:]))


@given(st.integers(1, 256).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**31))))
def test_random_pairs_up_to_256(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    p = rng.permutation(n) + 1
    q = rng.permutation(n) + 1
    assert ulam_lcs(sketch(p), sketch(q)) == ref_perm_lcs(p, q)


@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 5)), max_size=25))
def test_his_matches_quadratic(items):
    blocks, x = [], 1
    for y, w in items:
        blocks.append(Block(x, y, w))
        x += w
    assert his(blocks) == quadratic_his(blocks)


def test_query_budget_is_k_log_n():
    rng = np.random.default_rng(8)
    n = 4096
    ident = sketch(range(1, n + 1))
    worst = 0.0
    for m in (1, 4, 16, 32):
        p = block_moves(n, m, rng)
        b = QueryBudget()
        lcs = ulam_lcs(ident, sketch(p), b)
        k = max(1, n - lcs)
        worst = max(worst, b.hash_compares / (k * math.log2(n)))
    assert worst <= 8.0


def test_single_move_can_need_more_than_2k_plus_1_blocks():
    # only the adjacency (3, 4) survives in Y, so any block partition of X has four parts
    x, y = [1, 2, 3, 4, 5], [1, 3, 4, 2, 5]
    res = ulam_query(sketch(x), sketch(y))
    k = 5 - res.lcs
    assert k == 1 and len(res.blocks) == 4 == 3 * k + 1
