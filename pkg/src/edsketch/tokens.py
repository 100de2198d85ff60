"""Token strings and input readers.

Every input is reduced to a sequence of 32-bit symbols. The largest 32-bit
value is reserved as a padding sentinel and never appears in a TokenString.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, ParamError

SENTINEL = 0xFFFFFFFF
ALPHABETS = ("bytes", "unicode", "dna", "integer")
_DNA = {c: i for i, c in enumerate("ACGTN")}


@dataclass(frozen=True, eq=False)
class TokenString:
    tokens: np.ndarray
    alphabet: str = "integer"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.tokens, dtype=np.uint32)
        if self.alphabet not in ALPHABETS:
            raise ParamError(f"unknown alphabet tag {self.alphabet!r}")
        if arr.size and int(arr.max()) == SENTINEL:
            raise ParamError("token stream contains the reserved sentinel symbol")
        arr.setflags(write=False)
        object.__setattr__(self, "tokens", arr)

    def __len__(self) -> int:
        return int(self.tokens.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, TokenString):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.tokens, other.tokens)

    def __hash__(self) -> int:
        return hash((self.alphabet, self.tokens.tobytes()))

    def slice(self, start: int, length: int) -> "TokenString":
        """1-based substring view."""
        return TokenString(self.tokens[start - 1:start - 1 + length], self.alphabet)

    def text(self) -> str:
        if self.alphabet == "unicode":
            return "".join(map(chr, self.tokens.tolist()))
        if self.alphabet == "bytes":
            return bytes(self.tokens.astype(np.uint8)).decode("latin-1")
        if self.alphabet == "dna":
            return "".join("ACGTN"[t] for t in self.tokens.tolist())
        return " ".join(map(str, self.tokens.tolist()))


def from_text(s: str) -> TokenString:
    return TokenString(np.fromiter(map(ord, s), dtype=np.uint32, count=len(s)), "unicode")


def from_bytes(b: bytes) -> TokenString:
    return TokenString(np.frombuffer(bytes(b), dtype=np.uint8).astype(np.uint32), "bytes")


def from_dna(s: str) -> TokenString:
    try:
        vals = [_DNA[c] for c in s.upper()]
    except KeyError as exc:
        raise ParamError(f"invalid nucleotide {exc.args[0]!r}") from None
    return TokenString(np.array(vals, dtype=np.uint32), "dna")


def from_ints(values: Iterable[int]) -> TokenString:
    return TokenString(np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                                  dtype=np.int64).astype(np.uint32), "integer")


def as_tokens(x) -> TokenString:
    """Coerce str, bytes, sequences of ints or arrays into a TokenString."""
    if isinstance(x, TokenString):
        return x
    if isinstance(x, str):
        return from_text(x)
    if isinstance(x, (bytes, bytearray, memoryview)):
        return from_bytes(bytes(x))
    return from_ints(x)


def parse_fasta(text: str, alphabet: str = "dna") -> list[TokenString]:
    records: list[TokenString] = []
    name, chunks = None, []

    def flush():
        if name is not None:
            seq = "".join(chunks)
            tok = from_dna(seq) if alphabet == "dna" else from_text(seq)
            records.append(TokenString(tok.tokens, tok.alphabet, name))

    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            name, chunks = line[1:].split()[0] if len(line) > 1 else f"record{len(records)}", []
        else:
            chunks.append(line)
    flush()
    return records


def read_records(path: str | Path, fmt: str = "auto") -> list[TokenString]:
    """Read one or more strings from a file.

    fmt is ``text`` (one string per non-empty line), ``bytes`` (the whole file
    is one record), ``fasta``, ``ints`` (whitespace-separated integers per
    line) or ``auto`` (FASTA when the first visible character is '>', else text).
    """
    path = Path(path)
    raw = path.read_bytes()
    if fmt == "bytes":
        if not raw:
            raise EmptyInput(f"{path} is empty")
        tok = from_bytes(raw)
        return [TokenString(tok.tokens, tok.alphabet, path.stem)]
    text = raw.decode("utf-8")
    if fmt == "auto":
        fmt = "fasta" if text.lstrip().startswith(">") else "text"
    if fmt == "fasta":
        recs = parse_fasta(text)
    elif fmt in ("text", "ints"):
        recs = []
        for i, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            tok = from_ints(map(int, line.split())) if fmt == "ints" else from_text(line.rstrip("\r"))
            recs.append(TokenString(tok.tokens, tok.alphabet, f"{path.stem}.{i}"))
    else:
        raise ParamError(f"unknown input format {fmt!r}")
    if not recs:
        raise EmptyInput(f"{path} holds no records")
    return recs


def dense_codes(*seqs: Sequence[int] | np.ndarray) -> tuple[list[np.ndarray], int]:
    """Remap several token arrays onto a shared alphabet 0..sigma-1."""
    arrs = [np.asarray(s, dtype=np.uint32) for s in seqs]
    if not arrs or sum(a.size for a in arrs) == 0:
        return [a.astype(np.uint32) for a in arrs], 1
    uniq, inv = np.unique(np.concatenate(arrs), return_inverse=True)
    out, pos = [], 0
    for a in arrs:
        out.append(np.ascontiguousarray(inv[pos:pos + a.size], dtype=np.uint32))
        pos += a.size
    return out, int(uniq.size)


def occurrences(pattern: np.ndarray, sigma: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR lists of the positions of each code in a densely coded pattern."""
    pattern = np.asarray(pattern, dtype=np.int64)
    ptr = np.zeros(sigma + 1, dtype=np.int64)
    np.add.at(ptr, pattern + 1, 1)
    ptr = np.cumsum(ptr)
    pos = np.argsort(pattern, kind="stable").astype(np.int64)
    return ptr, pos
