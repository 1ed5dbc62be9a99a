"""Cooperative games induced by the valuation: player game and state game.

Two cost games drive contract design.  In the player game the insurer
(player 0) and the insured agents form coalitions, and a coalition's cost
is the value of its pooled liability.  In the state game the outcomes
themselves are the players, coalitions are events, and the cost of an
event is the value of the aggregate liability restricted to it.  Fuzzy
coalitions relax membership to a participation rate per outcome.

Certificates here verify core membership, the supermodularity of the
state game, and fuzzy-core membership of candidate allocations.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .certificates import Certificate, SlackTracker, dot, mask_label, sample_participations
from .errors import ExhaustionLimitExceeded, NegativeLiability, SpaceMismatch
from .prob_space import Event, RandomVariable, ScenarioMeasure, expectation
from .valuation import TOL, Distortion, choquet_value, scenario_membership

#: Default cap on players for exhaustive coalition enumeration.
MAX_PLAYERS = 20

#: Default cap on total event-pair checks before sampling kicks in.
MAX_PAIR_CHECKS = 1 << 20

#: Default number of sampled pairs once the exhaustive cap is exceeded.
PAIR_SAMPLE_COUNT = 4096


@dataclass(frozen=True)
class Coalition:
    """A subset of the N+1 players; player 0 is the insurer."""

    members: tuple[bool, ...]

    @classmethod
    def from_indices(cls, n_players: int, indices: Iterable[int]) -> "Coalition":
        chosen = set(indices)
        return cls(tuple(i in chosen for i in range(n_players)))

    @classmethod
    def from_mask(cls, n_players: int, mask: int) -> "Coalition":
        return cls(tuple(bool(mask >> i & 1) for i in range(n_players)))

    @property
    def mask(self) -> int:
        return sum(1 << i for i, m in enumerate(self.members) if m)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.members) if m)

    def label(self) -> str:
        return mask_label(self.mask)


class Preference(enum.Enum):
    """Coalition ordering of two payoff vectors by residual insurance cost."""

    PREFERS_XI = "prefers_xi"
    PREFERS_ETA = "prefers_eta"
    INDIFFERENT = "indifferent"


def pooled(players: Sequence[RandomVariable], mask: int) -> RandomVariable:
    """Sum of the players' variables selected by the bitmask."""
    space = players[0].space
    total = [0.0] * space.n_outcomes
    for i, rv in enumerate(players):
        if mask >> i & 1:
            for j, v in enumerate(rv.values):
                total[j] += v
    return RandomVariable(space, tuple(total))


def coalition_cost(
    players: Sequence[RandomVariable], coalition: Coalition, w: Distortion
) -> float:
    """Stand-alone cost of a coalition: value of its pooled liability."""
    if len(coalition.members) != len(players):
        raise SpaceMismatch(
            f"coalition over {len(coalition.members)} players, portfolio has {len(players)}"
        )
    space = players[0].space
    return choquet_value(space, w, pooled(players, coalition.mask))


def core_certificate(
    players: Sequence[RandomVariable],
    premia: Sequence[float],
    w: Distortion,
    tol: float = TOL,
    max_players: int = MAX_PLAYERS,
) -> Certificate:
    """Certify that the premium vector lies in the core of the cost game.

    Checks the grand-coalition budget equality and, for every nonempty
    coalition, that its premium total does not exceed its stand-alone cost.
    The empty coalition's constraint is vacuous and not enumerated.
    """
    n = len(players)
    if len(premia) != n:
        raise SpaceMismatch(f"{len(premia)} premia for {n} players")
    if n > max_players:
        raise ExhaustionLimitExceeded(f"{n} players exceed the coalition limit {max_players}")
    space = players[0].space
    costs = [0.0] * (1 << n)
    premium_totals = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        costs[mask] = choquet_value(space, w, pooled(players, mask))
        premium_totals[mask] = math.fsum(premia[i] for i in range(n) if mask >> i & 1)
    tracker = SlackTracker()
    grand = (1 << n) - 1
    tracker.add("grand coalition budget", -abs(premium_totals[grand] - costs[grand]))
    for mask in range(1, 1 << n):
        tracker.add(mask_label(mask), costs[mask] - premium_totals[mask])
    return tracker.certificate(tol)


def event_cost(z: RandomVariable, event: Event, w: Distortion) -> float:
    """State-game cost of an event: value of the liability restricted to it."""
    if z.min_value() < -TOL:
        raise NegativeLiability(f"state liability has negative component {z.min_value()!r}")
    return choquet_value(z.space, w, z.restrict(event))


def two_alternating_certificate(
    z: RandomVariable,
    w: Distortion,
    tol: float = TOL,
    max_checks: int = MAX_PAIR_CHECKS,
    sample_count: int = PAIR_SAMPLE_COUNT,
    seed: int = 0,
) -> Certificate:
    """Certify supermodular costs: c(A&B) + c(A|B) <= c(A) + c(B) for events.

    Exhaustive over all ordered event pairs while 4**M stays within
    ``max_checks``; beyond that, ``sample_count`` seeded random pairs.
    """
    if z.min_value() < -TOL:
        raise NegativeLiability(f"state liability has negative component {z.min_value()!r}")
    space = z.space
    m = space.n_outcomes
    tracker = SlackTracker()

    def cost_of_mask(mask: int) -> float:
        return choquet_value(space, w, z.restrict(Event.from_mask(space, mask)))

    if (1 << (2 * m)) <= max_checks:
        costs = [cost_of_mask(mask) for mask in range(1 << m)]
        for a in range(1 << m):
            for b in range(1 << m):
                slack = costs[a] + costs[b] - costs[a & b] - costs[a | b]
                tracker.add(f"({mask_label(a)},{mask_label(b)})", slack)
        return tracker.certificate(tol)

    rng = random.Random(seed)
    for _ in range(sample_count):
        a = rng.getrandbits(m)
        b = rng.getrandbits(m)
        slack = (
            cost_of_mask(a)
            + cost_of_mask(b)
            - cost_of_mask(a & b)
            - cost_of_mask(a | b)
        )
        tracker.add(f"({mask_label(a)},{mask_label(b)})", slack)
    return tracker.certificate(tol, seed=seed)


def fuzzy_core_certificate(
    z: RandomVariable,
    nu_masses: Sequence[float],
    w: Distortion,
    sample_count: int = 10000,
    seed: int = 0,
    q: ScenarioMeasure | None = None,
    tol: float = TOL,
    max_outcomes: int = MAX_PLAYERS,
) -> Certificate:
    """Certify fuzzy-core membership of an allocation of the state game.

    The allocation ``nu`` (per-outcome masses summing to the total cost)
    must price no fuzzy coalition above its cost: the budget equality
    ``nu(full) = value(z)``, the inequality over every nonempty event
    indicator, and over ``sample_count`` seeded interior participation
    profiles.  When the generating scenario measure ``q`` is supplied, the
    constructive characterisation ``nu = z * q`` with ``q`` a maximising
    scenario is verified as well; that check is the sound certificate, the
    sampling corroborates it.  Past the event cap the indicator and
    membership enumerations are skipped rather than raised; the sampled
    checks still run.
    """
    space = z.space
    m = space.n_outcomes
    if len(nu_masses) != m:
        raise SpaceMismatch(f"allocation has {len(nu_masses)} masses for {m} outcomes")
    if z.min_value() < -TOL:
        raise NegativeLiability(f"state liability has negative component {z.min_value()!r}")
    total_cost = choquet_value(space, w, z)
    tracker = SlackTracker()
    tracker.add("total-mass budget", -abs(math.fsum(nu_masses) - total_cost))
    if m <= max_outcomes:
        for mask in range(1, 1 << m):
            event = Event.from_mask(space, mask)
            mass = math.fsum(nu_masses[j] for j in range(m) if mask >> j & 1)
            tracker.add(mask_label(mask), event_cost(z, event, w) - mass)
    rng = random.Random(seed)
    for label, lam in sample_participations(rng, m, sample_count):
        priced = dot(lam, nu_masses)
        scaled = RandomVariable(space, tuple(rate * v for rate, v in zip(lam, z.values)))
        cost = choquet_value(space, w, scaled)
        tracker.add(label, cost - priced)
    if q is not None:
        if m <= max_outcomes:
            membership = scenario_membership(space, w, q, tol=tol, max_outcomes=max_outcomes)
            tracker.add("generator in scenario set", membership.worst_slack)
        tracker.add("generator attains total cost", -abs(expectation(q, z) - total_cost))
        for j in range(m):
            tracker.add(
                f"mass factorisation at outcome {j}",
                -abs(nu_masses[j] - z.values[j] * q.masses[j]),
            )
    return tracker.certificate(tol, seed=seed)


def preference_compare(
    players: Sequence[RandomVariable],
    coalition: Coalition,
    xi_rows: Sequence[RandomVariable],
    eta_rows: Sequence[RandomVariable],
    w: Distortion,
    tol: float = TOL,
) -> Preference:
    """Order two payoff vectors by a coalition's residual insurance cost.

    The coalition prefers the payoff whose residual pooled claim is cheaper
    to insure; costs within ``tol`` of each other count as indifference.
    """
    if not (len(players) == len(xi_rows) == len(eta_rows) == len(coalition.members)):
        raise SpaceMismatch("players, payoffs and coalition must have matching lengths")
    space = players[0].space
    mask = coalition.mask
    residual_xi = [0.0] * space.n_outcomes
    residual_eta = [0.0] * space.n_outcomes
    for i in range(len(players)):
        if mask >> i & 1:
            for j in range(space.n_outcomes):
                residual_xi[j] += players[i].values[j] - xi_rows[i].values[j]
                residual_eta[j] += players[i].values[j] - eta_rows[i].values[j]
    cost_xi = choquet_value(space, w, RandomVariable(space, tuple(residual_xi)))
    cost_eta = choquet_value(space, w, RandomVariable(space, tuple(residual_eta)))
    if abs(cost_xi - cost_eta) <= tol:
        return Preference.INDIFFERENT
    return Preference.PREFERS_XI if cost_xi < cost_eta else Preference.PREFERS_ETA
