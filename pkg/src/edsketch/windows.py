"""Window decompositions.

A is cut into disjoint width-d windows. For every threshold tau in a
geometric grid, B is covered by overlapping windows of two widths h_tau and
l_tau whose starts lie on a grid of step gamma_tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Window(NamedTuple):
    start: int  # 1-based
    len: int
    source: str  # "A" or "B"
    tau_index: int = -1

    @property
    def end(self) -> int:
        return self.start + self.len - 1


@dataclass(frozen=True)
class TauLevel:
    """One entry of the tau grid with its window geometry."""

    index: int
    tau: float
    j: int  # exponent; -1 for tau = 0
    h: int
    l: int
    gamma: int


@dataclass
class WindowSet:
    """Windows stored column-wise: starts (1-based) and lengths."""

    starts: np.ndarray
    lens: np.ndarray
    source: str
    d: int
    tau: float = 0.0
    gamma: int = 1
    tau_index: int = -1

    def __len__(self) -> int:
        return int(self.starts.shape[0])

    def __getitem__(self, i: int) -> Window:
        return Window(int(self.starts[i]), int(self.lens[i]), self.source, self.tau_index)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def ends(self) -> np.ndarray:
        return self.starts + self.lens - 1


def tau_grid(d: int, eps: float) -> list[float]:
    """{0} together with (1+eps)^j / d for j >= 0, up to 1, ascending."""
    return [lv.tau for lv in tau_levels(d, eps)]


def tau_levels(d: int, eps: float) -> list[TauLevel]:
    if d < 1:
        raise ValueError("d must be positive")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    out = [TauLevel(0, 0.0, -1, d, d, 1)]
    j = 0
    while True:
        g = (1 + eps) ** j
        tau = g / d
        if tau > 1 + 1e-12:
            break
        tau = min(tau, 1.0)
        if j == 0:
            h, l = d + 1, d - 1
        else:
            step = (1 + eps) ** (j - 1)
            h, l = math.floor(d + step), math.floor(d - step)
        l = max(l, 1)
        gamma = max(1, math.floor(eps * tau * d + 1e-9))
        out.append(TauLevel(len(out), tau, j, h, l, gamma))
        j += 1
    return out


def decompose_a(n: int, d: int) -> WindowSet:
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    starts = np.arange(1, n + 1, d, dtype=np.int64)
    lens = np.minimum(d, n - starts + 1).astype(np.int64)
    return WindowSet(starts, lens, "A", d)


def decompose_b(n: int, d: int, level: TauLevel | float, eps: float, step: int | None = None) -> WindowSet:
    """Windows of widths h and l at starts 1, 1+gamma, 1+2*gamma, ... (truncated at n).

    ``level`` may be a TauLevel or a tau value from tau_grid. ``step``
    overrides the grid step (used to thin the tau = 0 family at large n).
    """
    if not isinstance(level, TauLevel):
        match = [lv for lv in tau_levels(d, eps) if abs(lv.tau - level) < 1e-12]
        if not match:
            raise ValueError(f"tau={level} is not on the grid for d={d}, eps={eps}")
        level = match[0]
    gamma = level.gamma if step is None else step
    grid = np.arange(1, n + 1, gamma, dtype=np.int64)
    widths = [level.h] if level.h == level.l else [level.h, level.l]
    starts, lens = [], []
    for w in widths:
        starts.append(grid)
        lens.append(np.minimum(w, n - grid + 1))
    starts = np.concatenate(starts)
    lens = np.concatenate(lens).astype(np.int64)
    order = np.lexsort((lens, starts))
    starts, lens = starts[order], lens[order]
    # truncation can make the h and l windows coincide near the end
    keep = np.ones(starts.shape[0], dtype=bool)
    keep[1:] = (starts[1:] != starts[:-1]) | (lens[1:] != lens[:-1])
    return WindowSet(starts[keep], lens[keep], "B", d, level.tau, gamma, level.index)


def default_d(n: int, prep: bool = True) -> int:
    exp = 0.25 if prep else 0.2
    d = math.ceil(n ** exp - 1e-9)
    return max(1, min(d, n))
