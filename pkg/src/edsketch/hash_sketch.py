"""Hierarchical rolling-hash sketches.

A sketch stores the prefix hashes of a token string under a polynomial hash
modulo the Mersenne prime 2^61 - 1, plus one sorted table per power-of-two
length holding the hashes of every substring of that length. Two parties
that agree on a seed derive the same base and can compare substrings of
independently sketched strings in O(1) time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import EmptyInput, LevelError, ParamMismatch
from .tokens import TokenString, as_tokens

MOD = (1 << 61) - 1
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class HashParams:
    """Hash parameters derived from a shared 64-bit seed.

    The base is splitmix64(seed) reduced into [2, MOD-2].
    """

    seed: int
    base: int = field(init=False)
    modulus: int = field(default=MOD, init=False)

    def __post_init__(self):
        seed = int(self.seed) & _MASK64
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "base", 2 + splitmix64(seed) % (MOD - 3))


def string_digest(tokens: np.ndarray) -> int:
    data = np.ascontiguousarray(tokens, dtype="<u4").tobytes()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


class StringSketch:
    """Prefix hashes and power-of-two level tables of one string."""

    __slots__ = ("params", "n", "prefix", "levels", "raw", "string_id", "alphabet",
                 "_pw", "_sets")

    def __init__(self, params: HashParams, n: int, prefix: np.ndarray, levels: list[np.ndarray],
                 raw: TokenString | None, string_id: int, alphabet: str):
        self.params = params
        self.n = int(n)
        self.prefix = prefix
        self.levels = levels
        self.raw = raw
        self.string_id = int(string_id)
        self.alphabet = alphabet
        self._pw = None
        self._sets: dict[int, frozenset] = {}

    @property
    def powers(self) -> np.ndarray:
        if self._pw is None:
            self._pw = K.powers(self.params.base, self.n + 1)
        return self._pw

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def substring_hash(self, start: int, length: int) -> int:
        return substring_hash(self, start, length)

    def level_contains(self, level: int, h: int) -> bool:
        return level_contains(self, level, h)

    def __repr__(self) -> str:
        return (f"StringSketch(n={self.n}, seed={self.params.seed}, levels={len(self.levels)}, "
                f"raw={'yes' if self.raw is not None else 'no'})")


def build_sketch(s, params: HashParams, embed_raw: bool = True) -> StringSketch:
    """Sketch a token string: O(n log n) time, deterministic per (s, params)."""
    s = as_tokens(s)
    n = len(s)
    if n == 0:
        raise EmptyInput("cannot sketch an empty string")
    prefix = K.prefix_hashes(s.tokens, params.base)
    pw = K.powers(params.base, n + 1)
    levels = []
    length = 1
    while length <= n:
        levels.append(np.unique(K.window_hashes(prefix, pw, length)))
        length *= 2
    sk = StringSketch(params, n, prefix, levels, s if embed_raw else None,
                      string_digest(s.tokens), s.alphabet)
    sk._pw = pw
    return sk


def substring_hash(sk: StringSketch, start: int, length: int) -> int:
    """Hash of s[start .. start+length-1] (1-based, inclusive)."""
    if length < 1 or start < 1 or start + length - 1 > sk.n:
        raise IndexError(f"substring ({start}, {length}) out of range for n={sk.n}")
    hi = int(sk.prefix[start + length - 1])
    lo = int(sk.prefix[start - 1]) * int(sk.powers[length])
    return (hi - lo) % MOD


def direct_hash(tokens, params: HashParams) -> int:
    """Polynomial hash evaluated straight from the tokens (no prefix table)."""
    h = 0
    for t in np.asarray(tokens).tolist():
        h = (h * params.base + int(t) + 1) % MOD
    return h


def level_contains(sk: StringSketch, level: int, h: int) -> bool:
    if not 0 <= level < len(sk.levels):
        raise LevelError(f"level {level} outside 0..{len(sk.levels) - 1}")
    table = sk._sets.get(level)
    if table is None:
        table = frozenset(sk.levels[level].tolist())
        sk._sets[level] = table
    return int(h) in table


def check_compatible(*sketches: StringSketch) -> None:
    seeds = {sk.params.seed for sk in sketches}
    if len(seeds) != 1:
        raise ParamMismatch(f"sketches use different seeds: {sorted(seeds)}")


def shared_powers(sa: StringSketch, sb: StringSketch) -> np.ndarray:
    return sa.powers if sa.n >= sb.n else sb.powers
