import numpy as np
import pytest

from edsketch.driver import ApproxConfig, preprocess_approx
from edsketch.errors import FormatError
from edsketch.gap_single import preprocess_single
from edsketch.hash_sketch import HashParams, build_sketch
from edsketch.perm_lcs import preprocess_permutation
from edsketch.sketch_io import dumps, load, loads, save
from edsketch.tokens import from_text

rng = np.random.default_rng(0)
PARAMS = HashParams(42)


def samples():
    toks = rng.integers(0, 4, 300)
    yield "small-ed", build_sketch(toks, PARAMS)
    yield "small-ed", build_sketch(toks, PARAMS, embed_raw=False)
    yield "perm-lcs", preprocess_permutation(rng.permutation(200) + 1, PARAMS)
    yield "gap", preprocess_single(toks, 8, seed=42)
    yield "approx", preprocess_approx(toks, ApproxConfig(d=5, seed=42), materialize=True)
    yield "approx", preprocess_approx(from_text("abracadabra"), ApproxConfig(seed=42))


@pytest.mark.parametrize("kind,obj", list(samples()))
def test_round_trip_is_byte_identical(kind, obj):
    data = dumps(obj, name="rec")
    back, k, name = loads(data)
    assert (k, name) == (kind, "rec")
    assert dumps(back, name="rec") == data


def test_file_round_trip(tmp_path):
    sk = build_sketch(from_text("abc"), PARAMS)
    p = save(tmp_path / "x.edsk", sk, "abc")
    back, kind, name = load(p)
    assert kind == "small-ed" and name == "abc"
    assert np.array_equal(back.prefix, sk.prefix) and back.raw.tokens.tolist() == sk.raw.tokens.tolist()


def test_corruption_is_detected():
    data = dumps(build_sketch(from_text("hello world"), PARAMS))
    with pytest.raises(FormatError, match="magic"):
        loads(b"XXXX" + data[4:])
    flipped = bytearray(data)
    flipped[30] ^= 1
    with pytest.raises(FormatError, match="checksum"):
        loads(bytes(flipped))
    with pytest.raises(FormatError):
        loads(data[:10])
    with pytest.raises(FormatError):
        loads(data[:-20] + data[-8:])
