"""State-contingent payoff families for the outcome-level game.

Here the insured risks are aggregated into one state liability ``z`` with
capital ``K`` set aside, and a payoff is promised per coalition of
outcomes: an event ``A`` is covered by paying the capped liability on
``A`` plus a share of the surplus ``(K - z)^+``.  Every admissible family
of such payoffs is generated by a benefit-sharing measure,

    payoff(A) = weight(A) * (K - z)^+ + (z /\\ K) * 1_A,

with the weights a probability measure over outcomes.  The canonical fair
family concentrates the benefit measure on the default states, weighting
each by its excess liability under the pricing measure.  Certificates
verify event-wise fairness against the state price allocation, fuzzy
fairness over participation profiles, and partition-wise minimality of
residual costs.

Callers with scheduling needs outside the measure-generated class can
certify any event-to-payoff map via ``CustomStatePayoffs``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .certificates import (
    Certificate,
    SlackTracker,
    bell_number,
    dot,
    iter_set_partitions,
    mask_label,
    random_set_partition,
    sample_participations,
)
from .errors import (
    DegenerateState,
    ExhaustionLimitExceeded,
    InconsistentRepresentation,
    NegativeLiability,
    NotAdmissibleStatePayoff,
    NotASubgradient,
    SpaceMismatch,
)
from .prob_space import (
    Event,
    FiniteProbSpace,
    RandomVariable,
    ScenarioMeasure,
    expectation,
)
from .valuation import TOL, Distortion, choquet_value, subgradient_element

#: Default budget of partitions to test; Bell(6) = 203 keeps M <= 6 exhaustive.
PARTITION_BUDGET = 203

#: Default cap on outcomes for exhaustive event enumeration.
MAX_STATE_OUTCOMES = 20


def _check_state(z: RandomVariable, capital: float) -> None:
    if z.min_value() < -TOL:
        raise NegativeLiability(f"state liability has negative component {z.min_value()!r}")
    if not math.isfinite(capital) or capital <= 0.0:
        raise DegenerateState(f"capital must be positive and finite, got {capital!r}")


@dataclass(frozen=True)
class StatePayoffFamily:
    """A payoff family generated by a per-outcome benefit measure."""

    space: FiniteProbSpace
    z: RandomVariable
    capital: float
    benefit_masses: tuple[float, ...]

    def __post_init__(self):
        _check_state(self.z, self.capital)
        if len(self.benefit_masses) != self.space.n_outcomes:
            raise SpaceMismatch(
                f"{len(self.benefit_masses)} benefit masses for {self.space.n_outcomes} outcomes"
            )
        if any(b < -TOL for b in self.benefit_masses):
            raise NotAdmissibleStatePayoff("benefit masses must be nonnegative")
        total = math.fsum(self.benefit_masses)
        if abs(total - 1.0) > 1e-9:
            raise NotAdmissibleStatePayoff(f"benefit masses sum to {total!r}, not 1")

    def benefit_weight(self, event: Event) -> float:
        return math.fsum(
            b for b, member in zip(self.benefit_masses, event.members) if member
        )

    def payoff(self, event: Event) -> RandomVariable:
        """Payoff promised to an event: surplus share plus capped liability."""
        if event.space != self.space:
            raise SpaceMismatch("event not defined on the family's space")
        weight = self.benefit_weight(event)
        values = []
        for j in range(self.space.n_outcomes):
            surplus = max(self.capital - self.z.values[j], 0.0)
            capped = min(self.z.values[j], self.capital) if event.members[j] else 0.0
            values.append(weight * surplus + capped)
        return RandomVariable(self.space, tuple(values))

    def fuzzy_benefit(self, lam: Sequence[float]) -> float:
        return dot(lam, self.benefit_masses)

    def fuzzy_payoff(self, lam: Sequence[float]) -> RandomVariable:
        """Payoff integrated against a participation profile in [0,1]^M."""
        weight = self.fuzzy_benefit(lam)
        values = []
        for j in range(self.space.n_outcomes):
            surplus = max(self.capital - self.z.values[j], 0.0)
            capped = min(self.z.values[j], self.capital)
            values.append(weight * surplus + lam[j] * capped)
        return RandomVariable(self.space, tuple(values))


@dataclass(frozen=True)
class CustomStatePayoffs:
    """An arbitrary event-to-payoff map, for certifying external schedules."""

    space: FiniteProbSpace
    z: RandomVariable
    capital: float
    payoff_of_event: Callable[[Event], RandomVariable]

    def __post_init__(self):
        _check_state(self.z, self.capital)

    def payoff(self, event: Event) -> RandomVariable:
        return self.payoff_of_event(event)


def alpha_star(
    z: RandomVariable,
    capital: float,
    q_star: ScenarioMeasure,
    w: Distortion,
    tol: float = TOL,
) -> StatePayoffFamily:
    """The canonical fair family: benefit measure carried by default states.

    Each outcome receives mass proportional to its excess liability
    ``(z - capital)^+`` weighted by the pricing measure, so the whole
    benefit measure lives on the default event.  ``q_star`` must attain
    the value of ``z``.
    """
    _check_state(z, capital)
    value = choquet_value(z.space, w, z)
    if abs(expectation(q_star, z) - value) > tol:
        raise NotASubgradient(
            f"measure prices the state liability at {expectation(q_star, z)!r}, "
            f"valuation is {value!r}"
        )
    excess = (z - capital).positive_part()
    denominator = expectation(q_star, excess)
    if denominator <= tol:
        raise DegenerateState(
            "state liability never exceeds the capital; benefit measure is undetermined"
        )
    masses = tuple(q * e / denominator for q, e in zip(q_star.masses, excess.values))
    return StatePayoffFamily(z.space, z, capital, masses)


def state_payoff(family: StatePayoffFamily, event: Event) -> RandomVariable:
    """Payoff of the family for one coalition of outcomes."""
    return family.payoff(event)


def state_price_allocation(z: RandomVariable, q_star: ScenarioMeasure) -> tuple[float, ...]:
    """Per-outcome price allocation: liability times pricing mass."""
    if z.space != q_star.space:
        raise SpaceMismatch("liability and measure live on different spaces")
    return tuple(v * q for v, q in zip(z.values, q_star.masses))


def representation_extract(
    y_a: RandomVariable,
    event: Event,
    z: RandomVariable,
    capital: float,
    tol: float = TOL,
) -> float:
    """Recover the scalar benefit weight of an admissible state payoff.

    Checks admissibility first: the payoff equals the capital on the
    event's default states, covers the liability on its solvent states,
    vanishes on default states outside the event, and stays within
    ``[0, capital]``.  The weight is then read off every surplus outcome;
    disagreement beyond ``tol`` means the payoff is not generated by a
    single weight.
    """
    _check_state(z, capital)
    if y_a.space != z.space or event.space != z.space:
        raise SpaceMismatch("payoff, event and liability must share one space")
    m = z.space.n_outcomes
    for j in range(m):
        y = y_a.values[j]
        if y < -tol or y > capital + tol:
            raise NotAdmissibleStatePayoff(
                f"payoff {y!r} at outcome {j} outside [0, capital]"
            )
        if z.values[j] >= capital:
            target = capital if event.members[j] else 0.0
            if abs(y - target) > tol:
                raise NotAdmissibleStatePayoff(
                    f"payoff {y!r} at default outcome {j} must be {target!r}"
                )
        elif event.members[j] and y < z.values[j] - tol:
            raise NotAdmissibleStatePayoff(
                f"payoff {y!r} at outcome {j} below the liability {z.values[j]!r}"
            )
    weights = []
    for j in range(m):
        surplus = capital - z.values[j]
        if surplus > tol:
            capped = z.values[j] if event.members[j] else 0.0
            weights.append((y_a.values[j] - capped) / surplus)
    if not weights:
        return 0.0
    if max(weights) - min(weights) > tol:
        raise InconsistentRepresentation(
            f"benefit weight ranges over [{min(weights)!r}, {max(weights)!r}]"
        )
    weight = weights[0]
    if weight < -tol or weight > 1.0 + tol:
        raise NotAdmissibleStatePayoff(f"benefit weight {weight!r} outside [0,1]")
    return weight


def state_fairness_certificate(
    family,
    pi_star: Sequence[float],
    w: Distortion,
    tol: float = TOL,
    max_outcomes: int = MAX_STATE_OUTCOMES,
) -> Certificate:
    """Certify event-wise fairness of a state payoff family.

    For every nonempty event, the cost of the residual risk plus the
    event's price must not exceed the event's stand-alone cost.
    """
    space = family.space
    m = space.n_outcomes
    if len(pi_star) != m:
        raise SpaceMismatch(f"price allocation has {len(pi_star)} masses for {m} outcomes")
    if m > max_outcomes:
        raise ExhaustionLimitExceeded(f"{m} outcomes exceed the event limit {max_outcomes}")
    tracker = SlackTracker()
    for mask in range(1, 1 << m):
        event = Event.from_mask(space, mask)
        stand_alone = choquet_value(space, w, family.z.restrict(event))
        residual = family.z.restrict(event) - family.payoff(event)
        price = math.fsum(pi_star[j] for j in range(m) if mask >> j & 1)
        tracker.add(
            mask_label(mask),
            stand_alone - price - choquet_value(space, w, residual),
        )
    return tracker.certificate(tol)


def fuzzy_fairness_certificate(
    family: StatePayoffFamily,
    pi_star: Sequence[float],
    w: Distortion,
    sample_count: int = 10000,
    seed: int = 0,
    tol: float = TOL,
    max_outcomes: int = MAX_STATE_OUTCOMES,
) -> Certificate:
    """Certify fairness over fuzzy coalitions: participation profiles.

    Exhaustive over indicator profiles (when the outcome count permits)
    plus seeded interior samples; for each profile the residual cost plus
    the priced participation must not exceed the cost of the scaled
    liability.
    """
    space = family.space
    m = space.n_outcomes
    if len(pi_star) != m:
        raise SpaceMismatch(f"price allocation has {len(pi_star)} masses for {m} outcomes")
    tracker = SlackTracker()

    def add_profile(label: str, lam: Sequence[float]) -> None:
        scaled = RandomVariable(
            space, tuple(rate * v for rate, v in zip(lam, family.z.values))
        )
        residual = scaled - family.fuzzy_payoff(lam)
        slack = (
            choquet_value(space, w, scaled)
            - dot(lam, pi_star)
            - choquet_value(space, w, residual)
        )
        tracker.add(label, slack)

    if m <= max_outcomes:
        for mask in range(1, 1 << m):
            lam = tuple(1.0 if mask >> j & 1 else 0.0 for j in range(m))
            add_profile(mask_label(mask), lam)
    rng = random.Random(seed)
    for label, lam in sample_participations(rng, m, sample_count):
        add_profile(label, lam)
    return tracker.certificate(tol, seed=seed)


def state_maximality_certificate(
    family,
    w: Distortion,
    partition_budget: int = PARTITION_BUDGET,
    seed: int = 0,
    tol: float = TOL,
) -> Certificate:
    """Certify partition-wise minimality of residual costs.

    Over each tested partition of the outcomes, the summed residual cost
    must equal its comonotone floor: the value of minus the surplus plus
    the summed cost of excess liability per block.  All partitions are
    tested when their count fits the budget, otherwise seeded random ones.
    Each tested block is also checked for the pricing identity: the value
    of minus the benefit handed to the block equals minus its expectation
    under the canonical pricing measure.
    """
    space = family.space
    z = family.z
    capital = family.capital
    m = space.n_outcomes
    q_star = subgradient_element(space, w, z)
    surplus_cost = choquet_value(space, w, -(capital - z).positive_part())
    excess = (z - capital).positive_part()
    tracker = SlackTracker()

    exhaustive = bell_number(m) <= partition_budget
    if exhaustive:
        partitions = iter_set_partitions(m)
        used_seed = None
    else:
        rng = random.Random(seed)
        partitions = (random_set_partition(rng, m) for _ in range(partition_budget))
        used_seed = seed

    tested_blocks: set[int] = set()
    for blocks in partitions:
        residual_total = []
        floor_total = [surplus_cost]
        label_parts = []
        for block in blocks:
            event = Event.from_indices(space, block)
            tested_blocks.add(event.mask)
            residual = z.restrict(event) - family.payoff(event)
            residual_total.append(choquet_value(space, w, residual))
            floor_total.append(choquet_value(space, w, excess.restrict(event)))
            label_parts.append(mask_label(event.mask))
        slack = math.fsum(floor_total) - math.fsum(residual_total)
        tracker.add("partition " + "|".join(label_parts), slack)

    for mask in sorted(tested_blocks):
        event = Event.from_mask(space, mask)
        residual = z.restrict(event) - family.payoff(event)
        handed_out = -residual.negative_part()
        gap = abs(
            choquet_value(space, w, handed_out) - expectation(q_star, handed_out)
        )
        tracker.add(f"pricing identity on {mask_label(mask)}", -gap)
    return tracker.certificate(tol, seed=used_seed)
