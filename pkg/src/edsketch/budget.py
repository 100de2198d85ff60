"""Operation counters used to check query-complexity claims."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field


@dataclass
class QueryBudget:
    """Monotone counters charged by every instrumented operation.

    window_ed_queries counts pairwise window-distance evaluations,
    equal_calls counts Equal / Approx-Equal invocations, hash_compares
    counts substring-hash comparisons and table probes. Preprocessing work is
    kept apart so query-phase ceilings can be asserted on their own.
    """

    window_ed_queries: int = 0
    equal_calls: int = 0
    hash_compares: int = 0
    prep_window_ed_queries: int = 0
    per_tau: dict = field(default_factory=lambda: defaultdict(int))
    prep_per_tau: dict = field(default_factory=lambda: defaultdict(int))

    def charge_windows(self, count: int, tau_index: int | None = None, prep: bool = False) -> None:
        if count < 0:
            raise ValueError("budget charges must be non-negative")
        if prep:
            self.prep_window_ed_queries += count
            if tau_index is not None:
                self.prep_per_tau[tau_index] += count
        else:
            self.window_ed_queries += count
            if tau_index is not None:
                self.per_tau[tau_index] += count

    def charge_equal(self, calls: int, compares: int = 0) -> None:
        self.equal_calls += calls
        self.hash_compares += compares

    def merge(self, other: "QueryBudget") -> None:
        self.window_ed_queries += other.window_ed_queries
        self.equal_calls += other.equal_calls
        self.hash_compares += other.hash_compares
        self.prep_window_ed_queries += other.prep_window_ed_queries
        for k, v in other.per_tau.items():
            self.per_tau[k] += v
        for k, v in other.prep_per_tau.items():
            self.prep_per_tau[k] += v

    def snapshot(self) -> dict:
        return {
            "window_ed_queries": self.window_ed_queries,
            "equal_calls": self.equal_calls,
            "hash_compares": self.hash_compares,
            "prep_window_ed_queries": self.prep_window_ed_queries,
            "per_tau": {str(k): v for k, v in sorted(self.per_tau.items())},
        }
