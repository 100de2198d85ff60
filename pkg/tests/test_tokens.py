import numpy as np
import pytest

from edsketch.errors import EmptyInput, ParamError
from edsketch.tokens import (SENTINEL, TokenString, as_tokens, dense_codes, from_bytes, from_dna,
                             from_ints, from_text, parse_fasta, read_records)


def test_constructors():
    assert from_text("hé").tokens.tolist() == [104, 233]
    assert from_bytes(b"\x00\xff").tokens.tolist() == [0, 255]
    assert from_dna("acgtn").tokens.tolist() == [0, 1, 2, 3, 4]
    assert from_ints([5, 1]).alphabet == "integer"
    assert as_tokens("ab") == from_text("ab")
    assert as_tokens(b"ab").alphabet == "bytes"


def test_sentinel_rejected():
    with pytest.raises(ParamError):
        TokenString(np.array([1, SENTINEL], dtype=np.uint32))
    with pytest.raises(ParamError):
        from_dna("ACGX")


def test_fasta_and_readers(tmp_path):
    recs = parse_fasta(">one desc\nAC\nGT\n\n>two\nTT\n")
    assert [r.name for r in recs] == ["one", "two"]
    assert recs[0].text() == "ACGT"
    p = tmp_path / "x.txt"
    p.write_text("abc\n\nde\n")
    assert [r.text() for r in read_records(p)] == ["abc", "de"]
    p.write_text("3 1 2\n")
    assert read_records(p, "ints")[0].tokens.tolist() == [3, 1, 2]
    p.write_bytes(b"")
    with pytest.raises(EmptyInput):
        read_records(p, "bytes")


def test_dense_codes_preserve_equality():
    (x, y), sigma = dense_codes([10, 500, 10], [500, 7])
    assert sigma == 3
    assert x[0] == x[2] and x[1] == y[0] and y[1] not in (x[0], x[1])
