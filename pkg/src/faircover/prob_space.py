"""Finite probability spaces and outcome-indexed random variables.

Randomness is modelled on a finite set of outcomes with strictly positive
probabilities; the sigma-algebra is always the full power set.  Random
variables are real vectors indexed by outcome, events are boolean masks,
and probability measures that reweight the base measure are plain mass
vectors.  Everything is immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    NonPositiveProbability,
    ProbabilityMassMismatch,
    SpaceMismatch,
)

#: Absolute tolerance for probability mass adding up to one.
MASS_TOL = 1e-12

#: Absolute tolerance for scenario masses adding up to one.
SCENARIO_MASS_TOL = 1e-10

#: Absolute tolerance when comparing values for partition-cell equality.
CELL_TOL = 1e-12


@dataclass(frozen=True)
class FiniteProbSpace:
    """A finite outcome set with strictly positive probabilities."""

    probabilities: tuple[float, ...]

    def __post_init__(self):
        if not self.probabilities:
            raise NonPositiveProbability("a probability space needs at least one outcome")
        for j, p in enumerate(self.probabilities):
            if not (p > 0.0) or not math.isfinite(p):
                raise NonPositiveProbability(f"probability of outcome {j} is {p!r}; must be > 0")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > MASS_TOL:
            raise ProbabilityMassMismatch(f"probabilities sum to {total!r}, not 1")

    @property
    def n_outcomes(self) -> int:
        return len(self.probabilities)

    def event_probability(self, event: "Event") -> float:
        _require_same_space(self, event.space)
        return math.fsum(p for p, m in zip(self.probabilities, event.members) if m)


def build_space(probabilities: Sequence[float]) -> FiniteProbSpace:
    """Validate and build a finite probability space."""
    return FiniteProbSpace(tuple(float(p) for p in probabilities))


def _require_same_space(a: FiniteProbSpace, b: FiniteProbSpace) -> None:
    if a != b:
        raise SpaceMismatch("operands are defined on different probability spaces")


@dataclass(frozen=True)
class RandomVariable:
    """A bounded random variable: one finite real value per outcome."""

    space: FiniteProbSpace
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != self.space.n_outcomes:
            raise SpaceMismatch(
                f"variable has {len(self.values)} values for {self.space.n_outcomes} outcomes"
            )
        for j, v in enumerate(self.values):
            if not math.isfinite(v):
                raise ValueError(f"value at outcome {j} is {v!r}; must be finite")

    @classmethod
    def of(cls, space: FiniteProbSpace, values: Iterable[float]) -> "RandomVariable":
        return cls(space, tuple(float(v) for v in values))

    @classmethod
    def constant(cls, space: FiniteProbSpace, c: float) -> "RandomVariable":
        return cls(space, (float(c),) * space.n_outcomes)

    def __add__(self, other):
        if isinstance(other, RandomVariable):
            _require_same_space(self.space, other.space)
            return RandomVariable(self.space, tuple(a + b for a, b in zip(self.values, other.values)))
        return RandomVariable(self.space, tuple(v + other for v in self.values))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RandomVariable):
            _require_same_space(self.space, other.space)
            return RandomVariable(self.space, tuple(a - b for a, b in zip(self.values, other.values)))
        return RandomVariable(self.space, tuple(v - other for v in self.values))

    def __rsub__(self, other):
        return RandomVariable(self.space, tuple(other - v for v in self.values))

    def __mul__(self, scalar: float):
        return RandomVariable(self.space, tuple(v * scalar for v in self.values))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(self.space, tuple(-v for v in self.values))

    def positive_part(self) -> "RandomVariable":
        return RandomVariable(self.space, tuple(v if v > 0.0 else 0.0 for v in self.values))

    def negative_part(self) -> "RandomVariable":
        """Pointwise negative part, returned as a nonnegative variable."""
        return RandomVariable(self.space, tuple(-v if v < 0.0 else 0.0 for v in self.values))

    def cap(self, m: float) -> "RandomVariable":
        """Pointwise minimum with the constant ``m``."""
        return RandomVariable(self.space, tuple(v if v < m else m for v in self.values))

    def restrict(self, event: "Event") -> "RandomVariable":
        """Multiply by the indicator of ``event``."""
        _require_same_space(self.space, event.space)
        return RandomVariable(
            self.space, tuple(v if m else 0.0 for v, m in zip(self.values, event.members))
        )

    def min_value(self) -> float:
        return min(self.values)

    def max_value(self) -> float:
        return max(self.values)


@dataclass(frozen=True)
class Event:
    """A subset of outcomes, stored as a boolean mask."""

    space: FiniteProbSpace
    members: tuple[bool, ...]

    def __post_init__(self):
        if len(self.members) != self.space.n_outcomes:
            raise SpaceMismatch(
                f"event has {len(self.members)} flags for {self.space.n_outcomes} outcomes"
            )

    @classmethod
    def from_indices(cls, space: FiniteProbSpace, indices: Iterable[int]) -> "Event":
        chosen = set(indices)
        return cls(space, tuple(j in chosen for j in range(space.n_outcomes)))

    @classmethod
    def from_mask(cls, space: FiniteProbSpace, mask: int) -> "Event":
        return cls(space, tuple(bool(mask >> j & 1) for j in range(space.n_outcomes)))

    @classmethod
    def full(cls, space: FiniteProbSpace) -> "Event":
        return cls(space, (True,) * space.n_outcomes)

    @classmethod
    def empty(cls, space: FiniteProbSpace) -> "Event":
        return cls(space, (False,) * space.n_outcomes)

    @property
    def mask(self) -> int:
        return sum(1 << j for j, m in enumerate(self.members) if m)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(j for j, m in enumerate(self.members) if m)

    def complement(self) -> "Event":
        return Event(self.space, tuple(not m for m in self.members))

    def indicator(self) -> RandomVariable:
        return RandomVariable(self.space, tuple(1.0 if m else 0.0 for m in self.members))

    def label(self) -> str:
        return "{" + ",".join(str(j) for j in self.indices) + "}"


@dataclass(frozen=True)
class ScenarioMeasure:
    """A probability measure on the same outcomes, given by its mass vector.

    On a finite space with full support every such measure is automatically
    absolutely continuous with respect to the base measure.
    """

    space: FiniteProbSpace
    masses: tuple[float, ...]

    def __post_init__(self):
        if len(self.masses) != self.space.n_outcomes:
            raise SpaceMismatch(
                f"measure has {len(self.masses)} masses for {self.space.n_outcomes} outcomes"
            )
        for j, q in enumerate(self.masses):
            if not math.isfinite(q) or q < -MASS_TOL:
                raise ProbabilityMassMismatch(f"mass at outcome {j} is {q!r}; must be >= 0")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > SCENARIO_MASS_TOL:
            raise ProbabilityMassMismatch(f"scenario masses sum to {total!r}, not 1")

    @classmethod
    def of(cls, space: FiniteProbSpace, masses: Iterable[float]) -> "ScenarioMeasure":
        # Clamp float dust from distortion increments; genuine negatives still raise.
        cleaned = tuple(0.0 if -MASS_TOL <= float(q) < 0.0 else float(q) for q in masses)
        return cls(space, cleaned)

    @classmethod
    def base(cls, space: FiniteProbSpace) -> "ScenarioMeasure":
        return cls(space, space.probabilities)

    def event_mass(self, event: Event) -> float:
        _require_same_space(self.space, event.space)
        return math.fsum(q for q, m in zip(self.masses, event.members) if m)


def expectation(q: ScenarioMeasure, xi: RandomVariable) -> float:
    """Expected value of ``xi`` under the scenario measure ``q``."""
    _require_same_space(q.space, xi.space)
    return math.fsum(m * v for m, v in zip(q.masses, xi.values))


def generated_partition(
    space: FiniteProbSpace,
    generators: Sequence[RandomVariable],
    tol: float = CELL_TOL,
) -> list[list[int]]:
    """Partition of outcomes induced by equality of the generator tuple.

    Two outcomes fall in the same cell iff every generator takes equal
    values on them (absolute tolerance ``tol``); the pairwise relation is
    closed transitively.
    """
    for g in generators:
        _require_same_space(space, g.space)
    m = space.n_outcomes
    parent = list(range(m))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(m):
        for b in range(a + 1, m):
            if all(abs(g.values[a] - g.values[b]) <= tol for g in generators):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    cells: dict[int, list[int]] = {}
    for j in range(m):
        cells.setdefault(find(j), []).append(j)
    return [cells[root] for root in sorted(cells)]


def measurability_defect(
    xi: RandomVariable,
    generators: Sequence[RandomVariable],
    tol: float = CELL_TOL,
) -> float:
    """Largest spread of ``xi`` inside any cell of the generated partition.

    Zero means ``xi`` is a function of the generators.
    """
    defect = 0.0
    for members in generated_partition(xi.space, generators, tol):
        lo = min(xi.values[j] for j in members)
        hi = max(xi.values[j] for j in members)
        defect = max(defect, hi - lo)
    return defect


def sigma_measurable(
    xi: RandomVariable,
    generators: Sequence[RandomVariable],
    tol: float = CELL_TOL,
) -> bool:
    """Whether ``xi`` is measurable w.r.t. the sigma-algebra the generators induce.

    True iff ``xi`` is constant, at tolerance ``tol``, on every cell of the
    partition the generators induce.
    """
    return measurability_defect(xi, generators, tol) <= tol
