"""EDSK binary format.

Layout (little-endian)::

    magic "EDSK" | u16 version | u8 algo | u8 alphabet | u64 seed | u64 n
    | u64 string_id | u8 flags | u16 name length | name (utf-8)
    | u64 prefix length | prefix (u64) | u8 level count | per level: u64 count, hashes (u64)
    | raw tokens (u32 * n, only when flag bit 0 is set)
    | u64 payload length | payload
    | 8-byte blake2b checksum of everything before it

The payload depends on the algorithm id: the inverse permutation for
perm-lcs, nothing for small-ed, the sample and shifted tables for gap, and
window parameters plus close-window graphs for approx.
"""

from __future__ import annotations

import hashlib
import io
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .gap_single import SampledSketchB
from .hash_sketch import HashParams, StringSketch
from .perm_lcs import PermSketch
from .tokens import ALPHABETS, TokenString

MAGIC = b"EDSK"
VERSION = 1
ALGOS = {"plain": 0, "perm-lcs": 1, "small-ed": 2, "gap": 3, "approx": 4}
ALGO_NAMES = {v: k for k, v in ALGOS.items()}
_FLAG_RAW = 1
_HEAD = struct.Struct("<4sHBBQQQBH")


def _checksum(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=8).digest()


def _arr(buf: io.BytesIO, a: np.ndarray, dtype: str) -> None:
    a = np.ascontiguousarray(a, dtype=dtype)
    buf.write(struct.pack("<Q", a.size))
    buf.write(a.tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int) -> bytes:
        if count < 0 or self.pos + count > len(self.data):
            raise FormatError("truncated sketch")
        out = self.data[self.pos:self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def arr(self, dtype: str) -> np.ndarray:
        (count,) = self.unpack("<Q")
        width = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * width), dtype=dtype).copy()


def _kind(obj) -> str:
    from .driver import ApproxPrep  # driver pulls in the learners; keep it lazy

    if isinstance(obj, PermSketch):
        return "perm-lcs"
    if isinstance(obj, SampledSketchB):
        return "gap"
    if isinstance(obj, ApproxPrep):
        return "approx"
    if isinstance(obj, StringSketch):
        return "small-ed"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _base_sketch(obj) -> StringSketch | None:
    if isinstance(obj, PermSketch):
        return obj.sketch
    if isinstance(obj, StringSketch):
        return obj
    return getattr(obj, "sketch", None)


def _payload(obj, kind: str) -> bytes:
    buf = io.BytesIO()
    if kind == "perm-lcs":
        _arr(buf, obj.inv, "<u4")
    elif kind == "gap":
        buf.write(struct.pack("<QdI", obj.k, obj.c_s, obj.attempts))
        _arr(buf, obj.S, "<u8")
        _arr(buf, obj.shifted.ravel(), "<u8")
    elif kind == "approx":
        roles = {"A": 0, "B": 1, "both": 2}
        buf.write(struct.pack("<IdQB", obj.d, obj.eps, obj.tau0_cap, roles[obj.role]))
        buf.write(struct.pack("<I", len(obj.graphs)))
        for (side, radius, ti) in sorted(obj.graphs, key=lambda k: (k[0], k[1], -1 if k[2] is None else k[2])):
            adj = obj.graphs[(side, radius, ti)]
            verts = sorted(adj)
            buf.write(struct.pack("<BIi", 0 if side == "A" else 1, radius, -1 if ti is None else ti))
            _arr(buf, np.asarray(verts, dtype=np.int64), "<u4")
            sizes = np.array([len(adj[v]) for v in verts], dtype=np.int64)
            _arr(buf, np.concatenate([[0], np.cumsum(sizes)]), "<u8")
            flat = np.concatenate([np.asarray(adj[v], dtype=np.int64) for v in verts]) \
                if verts else np.empty(0, dtype=np.int64)
            _arr(buf, flat, "<u4")
    return buf.getvalue()


def dumps(obj, name: str = "") -> bytes:
    """Serialize a StringSketch, PermSketch, SampledSketchB or ApproxPrep."""
    kind = _kind(obj)
    sk = _base_sketch(obj)
    raw = sk.raw if sk is not None else None
    alphabet = sk.alphabet if sk is not None else obj.alphabet
    params = sk.params if sk is not None else obj.params
    n = sk.n if sk is not None else obj.n
    string_id = sk.string_id if sk is not None else obj.string_id
    name_b = name.encode("utf-8")
    if len(name_b) > 0xFFFF:
        raise FormatError("record name too long")
    buf = io.BytesIO()
    buf.write(_HEAD.pack(MAGIC, VERSION, ALGOS[kind], ALPHABETS.index(alphabet), params.seed, n,
                         string_id, _FLAG_RAW if raw is not None else 0, len(name_b)))
    buf.write(name_b)
    if sk is not None:
        _arr(buf, sk.prefix, "<u8")
        buf.write(struct.pack("<B", len(sk.levels)))
        for lv in sk.levels:
            _arr(buf, lv, "<u8")
    else:
        _arr(buf, np.empty(0), "<u8")
        buf.write(struct.pack("<B", 0))
    if raw is not None:
        buf.write(np.ascontiguousarray(raw.tokens, dtype="<u4").tobytes())
    payload = _payload(obj, kind)
    buf.write(struct.pack("<Q", len(payload)))
    buf.write(payload)
    body = buf.getvalue()
    return body + _checksum(body)


def loads(data: bytes):
    """Inverse of dumps. Returns (object, algorithm name, record name)."""
    data = bytes(data)
    if len(data) < _HEAD.size + 8:
        raise FormatError("file too short to be a sketch")
    body, check = data[:-8], data[-8:]
    if body[:4] != MAGIC:
        raise FormatError("bad magic; not an EDSK file")
    if _checksum(body) != check:
        raise FormatError("checksum mismatch")
    r = _Reader(body)
    _, version, algo, alpha, seed, n, string_id, flags, name_len = r.unpack(_HEAD.format)
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if algo not in ALGO_NAMES or alpha >= len(ALPHABETS):
        raise FormatError("unknown algorithm id or alphabet tag")
    kind = ALGO_NAMES[algo]
    alphabet = ALPHABETS[alpha]
    name = r.take(name_len).decode("utf-8")
    params = HashParams(seed)
    prefix = r.arr("<u8")
    (nlev,) = r.unpack("<B")
    levels = [r.arr("<u8") for _ in range(nlev)]
    raw = None
    if flags & _FLAG_RAW:
        toks = np.frombuffer(r.take(4 * n), dtype="<u4").astype(np.uint32)
        raw = TokenString(toks, alphabet, name)
    (plen,) = r.unpack("<Q")
    p = _Reader(r.take(plen))
    if r.pos != len(body):
        raise FormatError("trailing bytes after payload")
    sk = None
    if kind != "gap":
        if prefix.size != n + 1:
            raise FormatError("prefix array length disagrees with n")
        sk = StringSketch(params, n, prefix.astype(np.uint64), [lv.astype(np.uint64) for lv in levels],
                          raw, string_id, alphabet)
    if kind in ("small-ed", "plain"):
        obj = sk
    elif kind == "perm-lcs":
        obj = PermSketch(sk, p.arr("<u4").astype(np.int64))
    elif kind == "gap":
        k, c_s, attempts = p.unpack("<QdI")
        S = p.arr("<u8").astype(np.int64)
        shifted = p.arr("<u8").astype(np.uint64).reshape(2 * k + 1, S.size + 1)
        obj = SampledSketchB(params, n, k, c_s, S, shifted, string_id, alphabet, attempts)
    else:
        from .driver import ApproxPrep

        d, eps, tau0_cap, role = p.unpack("<IdQB")
        (count,) = p.unpack("<I")
        graphs = {}
        for _ in range(count):
            side, radius, ti = p.unpack("<BIi")
            verts = p.arr("<u4").astype(np.int64)
            ptr = p.arr("<u8").astype(np.int64)
            flat = p.arr("<u4").astype(np.int64)
            graphs[("A" if side == 0 else "B", radius, None if ti < 0 else ti)] = {
                int(v): flat[ptr[i]:ptr[i + 1]] for i, v in enumerate(verts.tolist())}
        obj = ApproxPrep(sk, ("A", "B", "both")[role], d, eps, tau0_cap, graphs)
    if p.pos != len(p.data):
        raise FormatError("trailing bytes inside payload")
    return obj, kind, name


def save(path: str | Path, obj, name: str = "") -> Path:
    path = Path(path)
    path.write_bytes(dumps(obj, name))
    return path


def load(path: str | Path):
    return loads(Path(path).read_bytes())
