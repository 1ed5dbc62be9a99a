"""Certificates for exhaustive or sampled checks, plus enumeration helpers.

A certificate records whether a family of constraints held, the constraint
with the least slack, and how many constraints were checked.  Negative
slack measures the size of the worst violation.  Reports are deterministic:
ties on slack are broken toward the first constraint enumerated, and
enumeration orders are fixed (ascending bitmask for coalitions and events).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence


@dataclass(frozen=True)
class Certificate:
    """Outcome of a constraint-family check."""

    passed: bool
    worst_label: str
    worst_slack: float
    checked_count: int
    seed: int | None = None

    def to_dict(self) -> dict:
        record = {
            "passed": self.passed,
            "worst_label": self.worst_label,
            "worst_slack": self.worst_slack,
            "checked_count": self.checked_count,
        }
        if self.seed is not None:
            record["seed"] = self.seed
        return record


class SlackTracker:
    """Accumulates labelled slacks and reports the strict minimum."""

    def __init__(self) -> None:
        self.count = 0
        self.worst_label = "none"
        self.worst_slack = math.inf

    def add(self, label: str, slack: float) -> None:
        self.count += 1
        if slack < self.worst_slack:
            self.worst_slack = slack
            self.worst_label = label

    def certificate(self, tol: float, seed: int | None = None) -> Certificate:
        if self.count == 0:
            return Certificate(True, "none", 0.0, 0, seed)
        return Certificate(
            passed=self.worst_slack >= -tol,
            worst_label=self.worst_label,
            worst_slack=self.worst_slack,
            checked_count=self.count,
            seed=seed,
        )


def mask_label(mask: int) -> str:
    """Render a bitmask as a set of indices, bit ``j`` meaning member ``j``."""
    return "{" + ",".join(str(j) for j in range(mask.bit_length()) if mask >> j & 1) + "}"


def iter_set_partitions(n: int) -> Iterator[list[list[int]]]:
    """All set partitions of ``range(n)`` via restricted growth strings."""
    if n == 0:
        yield []
        return
    codes = [0] * n
    maxima = [0] * n
    while True:
        n_blocks = max(codes) + 1
        blocks: list[list[int]] = [[] for _ in range(n_blocks)]
        for idx, c in enumerate(codes):
            blocks[c].append(idx)
        yield blocks
        idx = n - 1
        while idx > 0 and codes[idx] > maxima[idx - 1]:
            codes[idx] = 0
            idx -= 1
        if idx == 0:
            return
        codes[idx] += 1
        prev = max(maxima[idx - 1], codes[idx])
        for k in range(idx, n):
            maxima[k] = prev
            if k > idx:
                codes[k] = 0


def bell_number(n: int) -> int:
    """Number of set partitions of an ``n``-element set."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def random_set_partition(rng: random.Random, n: int) -> list[list[int]]:
    """A random set partition; each element joins an existing or fresh block."""
    blocks: list[list[int]] = []
    for idx in range(n):
        choice = rng.randrange(len(blocks) + 1)
        if choice == len(blocks):
            blocks.append([idx])
        else:
            blocks[choice].append(idx)
    return blocks


def sample_participations(
    rng: random.Random, n_outcomes: int, count: int
) -> Iterator[tuple[str, tuple[float, ...]]]:
    """Seeded interior participation profiles in [0,1]^M.

    Alternates uniform and beta(1/2,1/2) coordinates; the beta draws pile
    mass near the faces of the cube, where violations concentrate.
    """
    for s in range(count):
        if s % 2 == 0:
            lam = tuple(rng.random() for _ in range(n_outcomes))
            yield f"sample {s} (uniform)", lam
        else:
            lam = tuple(rng.betavariate(0.5, 0.5) for _ in range(n_outcomes))
            yield f"sample {s} (beta)", lam


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    return math.fsum(x * y for x, y in zip(a, b))
