import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ref_ed, ref_lcs
from edsketch.errors import TooLarge
from edsketch.oracle import (ed_exact, ed_table, lcs_exact, mapping_cost_bruteforce,
                             min_mapping_exact)

METHODS = ["bitparallel", "dp"]


@pytest.mark.parametrize("method", METHODS)
def test_ed_examples(method):
    assert ed_exact("", "abc", method) == 3
    assert ed_exact("abc", "", method) == 3
    assert ed_exact("kitten", "sitting", method) == 3
    assert ed_exact("", "", method) == 0


@pytest.mark.parametrize("method", METHODS)
def test_lcs_examples(method):
    assert lcs_exact([1, 2, 3, 4], [2, 1, 3, 4], method) == 3
    assert lcs_exact("abcd", "abcd", method) == 4
    assert lcs_exact([1, 2, 3], [4, 5, 6], method) == 0


def test_table_matches():
    res = ed_table("kitten", "sitting")
    assert res.value == 3 and res.table.shape == (7, 8)
    assert res.table[0].tolist() == list(range(8))


seqs = st.lists(st.integers(0, 3), max_size=90)


@given(seqs, seqs)
def test_methods_agree_with_reference(a, b):
    ed = ref_ed(a, b)
    assert ed_exact(a, b) == ed_exact(a, b, "dp") == ed == ed_exact(b, a)
    lcs = ref_lcs(a, b)
    assert lcs_exact(a, b) == lcs_exact(a, b, "dp") == lcs


def test_long_inputs_cross_word_boundaries():
    rng = np.random.default_rng(0)
    for n in (63, 64, 65, 130, 300):
        a = rng.integers(0, 5, n)
        b = rng.integers(0, 5, n + 7)
        assert ed_exact(a, b) == ed_exact(a, b, "dp")
        assert lcs_exact(a, b) == lcs_exact(a, b, "dp")


def test_mapping_examples():
    inf = math.inf
    assert min_mapping_exact(lambda a, s, ln: inf, [3, 3], [(1, 3), (4, 3)], 6) == 12
    cost = lambda a, s, ln: 0 if (a, s, ln) in {(0, 1, 3), (1, 4, 3)} else inf
    assert min_mapping_exact(cost, [3, 3], [(1, 3), (4, 3)], 6) == 0
    # a gap between matched windows is paid per uncovered position
    assert min_mapping_exact(cost, [3, 3], [(1, 3), (4, 3)], 8) == 2
    with pytest.raises(TooLarge):
        min_mapping_exact(cost, [1] * 17, [(1, 1)], 17)


@given(st.integers(0, 2**31))
def test_mapping_search_equals_enumeration(seed):
    rng = np.random.default_rng(seed)
    t = int(rng.integers(1, 4))
    a_lens = rng.integers(1, 4, t).tolist()
    n_b = int(rng.integers(2, 10))
    wins = sorted({(int(s), int(ln)) for s, ln in zip(rng.integers(1, n_b + 1, 8), rng.integers(1, 4, 8))
                   if s + ln - 1 <= n_b})
    table = {(a, s, ln): int(rng.integers(0, 4)) for a in range(t) for s, ln in wins if rng.random() < 0.6}
    cost = lambda a, s, ln: table.get((a, s, ln), math.inf)
    assert min_mapping_exact(cost, a_lens, wins, n_b) == mapping_cost_bruteforce(cost, a_lens, wins, n_b)
