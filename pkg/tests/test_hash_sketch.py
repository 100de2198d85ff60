import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import MOD, ref_hash
from edsketch.errors import EmptyInput, LevelError, ParamMismatch
from edsketch.hash_sketch import (HashParams, build_sketch, check_compatible, direct_hash,
                                  level_contains, splitmix64, substring_hash)
from edsketch.sketch_io import dumps
from edsketch.tokens import from_text


def test_params_are_a_function_of_the_seed():
    a, b = HashParams(42), HashParams(42)
    assert a == b and a.base == b.base
    assert HashParams(43).base != a.base
    assert a.modulus == MOD
    # base follows the documented derivation
    assert a.base == 2 + splitmix64(42) % (MOD - 3)


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_base_range(seed):
    p = HashParams(seed)
    assert 2 <= p.base <= MOD - 2


def test_splitmix_reference_value():
    # first output of the public splitmix64 reference generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_single_symbol():
    sk = build_sketch("a", HashParams(1))
    assert sk.num_levels == 1
    assert sk.levels[0].tolist() == [ref_hash([ord("a")], sk.params.base)]


def test_abab_level_one():
    sk = build_sketch("abab", HashParams(5))
    base = sk.params.base
    expected = {ref_hash(map(ord, s), base) for s in ("ab", "ba")}
    assert set(sk.levels[1].tolist()) == expected
    assert len(sk.levels[1]) == 2


def test_levels_hold_every_position():
    s = "mississippi"
    sk = build_sketch(s, HashParams(9))
    assert sk.num_levels == 4  # lengths 1, 2, 4, 8
    for lv in range(sk.num_levels):
        ln = 1 << lv
        subs = {s[i:i + ln] for i in range(len(s) - ln + 1)}
        assert set(sk.levels[lv].tolist()) == {ref_hash(map(ord, x), sk.params.base) for x in subs}


def test_empty_input_rejected():
    with pytest.raises(EmptyInput):
        build_sketch("", HashParams(0))


def test_substring_hash_examples():
    sk = build_sketch("abc", HashParams(3))
    assert substring_hash(sk, 1, 3) == direct_hash(np.array([97, 98, 99]), sk.params)
    sk = build_sketch("abab", HashParams(3))
    assert substring_hash(sk, 1, 2) == substring_hash(sk, 3, 2)


@pytest.mark.parametrize("start,length", [(0, 1), (1, 0), (3, 2), (4, 1)])
def test_substring_hash_range(start, length):
    sk = build_sketch("abc", HashParams(3))
    with pytest.raises(IndexError):
        substring_hash(sk, start, length)


def test_level_contains_examples():
    sk = build_sketch("abcd", HashParams(11))
    base = sk.params.base
    assert level_contains(sk, 2, ref_hash(map(ord, "abcd"), base))
    assert not level_contains(sk, 1, ref_hash(map(ord, "ca"), base))
    for s in ("ab", "bc", "cd"):
        assert level_contains(sk, 1, ref_hash(map(ord, s), base))
    sk = build_sketch("aaaa", HashParams(11))
    assert len(sk.levels[0]) == 1
    assert level_contains(sk, 0, ref_hash([ord("a")], sk.params.base))
    with pytest.raises(LevelError):
        level_contains(sk, 3, 0)


def test_no_collisions_among_length8_substrings():
    rng = np.random.default_rng(0)
    toks = rng.integers(0, 4, 256)
    sk = build_sketch(toks.tolist(), HashParams(17))
    seen = {}
    collisions = 0
    for i in range(1, 256 - 8 + 2):
        key = tuple(toks[i - 1:i + 7].tolist())
        h = substring_hash(sk, i, 8)
        if h in seen and seen[h] != key:
            collisions += 1
        seen.setdefault(h, key)
    assert collisions == 0


@given(st.lists(st.integers(0, 3), min_size=1, max_size=40), st.integers(0, 2**64 - 1))
def test_substring_hash_matches_direct_evaluation(tokens, seed):
    sk = build_sketch(tokens, HashParams(seed))
    for start, length in itertools.product(range(1, len(tokens) + 1), (1, 2, 5)):
        if start + length - 1 <= len(tokens):
            assert substring_hash(sk, start, length) == ref_hash(
                tokens[start - 1:start - 1 + length], sk.params.base)


@given(st.lists(st.integers(0, 2), min_size=2, max_size=48))
def test_equal_substrings_equal_hashes(tokens):
    sk = build_sketch(tokens, HashParams(7))
    n = len(tokens)
    for ln in (1, 2, 3):
        for i in range(1, n - ln + 2):
            for j in range(i + 1, n - ln + 2):
                same = tokens[i - 1:i - 1 + ln] == tokens[j - 1:j - 1 + ln]
                assert (substring_hash(sk, i, ln) == substring_hash(sk, j, ln)) == same


def test_sketches_are_deterministic():
    s = from_text("the quick brown fox")
    assert dumps(build_sketch(s, HashParams(5))) == dumps(build_sketch(s, HashParams(5)))


def test_seed_mismatch():
    with pytest.raises(ParamMismatch):
        check_compatible(build_sketch("ab", HashParams(1)), build_sketch("ab", HashParams(2)))


def test_raw_embedding_optional():
    assert build_sketch("xyz", HashParams(0)).raw is not None
    assert build_sketch("xyz", HashParams(0), embed_raw=False).raw is None
