"""Distortion premium principles and their Choquet valuation.

A concave distortion ``w`` on [0,1] with ``w(0)=0``, ``w(1)=1`` prices a
risk by the Choquet integral of its survival function,

    value(xi) = int_0^inf w(Prob(xi > a)) da,

extended to signed variables by cash additivity.  On a finite space this
equals a weighted sum over outcomes sorted by decreasing value, with the
weights given by increments of ``w`` along the cumulative probability.
The valuation is monotone, cash additive, positively homogeneous,
subadditive and additive on comonotone risks.

Dually, it is the supremum of expectations over the scenario set: all
probability measures ``q`` with ``q(A) <= w(Prob(A))`` for every event.
``subgradient_element`` returns a canonical maximiser, which is the
pricing measure used throughout contract design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .certificates import Certificate, SlackTracker, mask_label
from .errors import DomainError, ExhaustionLimitExceeded, SpaceMismatch
from .prob_space import (
    FiniteProbSpace,
    RandomVariable,
    ScenarioMeasure,
    expectation,
)

#: Default absolute tolerance for equalities and inequality slack.
TOL = 1e-9

#: Default cap on exhaustive event enumeration (2**MAX_EVENT_OUTCOMES events).
MAX_EVENT_OUTCOMES = 20

_KINDS = ("identity", "power", "expected_shortfall", "piecewise_linear")


@dataclass(frozen=True)
class Distortion:
    """A concave nondecreasing distortion on [0,1] fixing 0 and 1.

    Catalog: identity (plain expectation), power ``u**gamma`` with
    ``gamma`` in (0,1], expected shortfall ``min(u/(1-beta), 1)`` with
    ``beta`` in [0,1), and concave piecewise-linear interpolation of
    explicit knots.  A Wang-transform kind would slot in the same way but
    needs a normal cdf, so it is left as an extension point.
    """

    kind: str
    gamma: float | None = None
    beta: float | None = None
    knots: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown distortion kind {self.kind!r}")
        if self.kind == "power":
            if self.gamma is None or not 0.0 < self.gamma <= 1.0:
                raise DomainError(f"power distortion needs gamma in (0,1], got {self.gamma!r}")
        elif self.kind == "expected_shortfall":
            if self.beta is None or not 0.0 <= self.beta < 1.0:
                raise DomainError(
                    f"expected-shortfall distortion needs beta in [0,1), got {self.beta!r}"
                )
        elif self.kind == "piecewise_linear":
            self._validate_knots()

    def _validate_knots(self) -> None:
        knots = self.knots
        if not knots or len(knots) < 2:
            raise DomainError("piecewise-linear distortion needs at least two knots")
        us = [u for u, _ in knots]
        ws = [v for _, v in knots]
        if us[0] != 0.0 or ws[0] != 0.0 or us[-1] != 1.0 or ws[-1] != 1.0:
            raise DomainError("knots must start at (0,0) and end at (1,1)")
        if any(b <= a for a, b in zip(us, us[1:])):
            raise DomainError("knot abscissae must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in ws):
            raise DomainError("knot values must lie in [0,1]")
        slopes = [(w2 - w1) / (u2 - u1) for (u1, w1), (u2, w2) in zip(knots, knots[1:])]
        if any(s < 0.0 for s in slopes):
            raise DomainError("distortion must be nondecreasing")
        if any(s2 > s1 + 1e-12 for s1, s2 in zip(slopes, slopes[1:])):
            raise DomainError("distortion must be concave (nonincreasing slopes)")

    @classmethod
    def identity(cls) -> "Distortion":
        return cls("identity")

    @classmethod
    def power(cls, gamma: float) -> "Distortion":
        return cls("power", gamma=float(gamma))

    @classmethod
    def expected_shortfall(cls, beta: float) -> "Distortion":
        return cls("expected_shortfall", beta=float(beta))

    @classmethod
    def piecewise_linear(cls, knots: Sequence[Sequence[float]]) -> "Distortion":
        return cls(
            "piecewise_linear",
            knots=tuple((float(u), float(v)) for u, v in knots),
        )

    def __call__(self, u: float) -> float:
        return distortion_eval(self, u)

    def to_dict(self) -> dict:
        record: dict = {"kind": self.kind}
        if self.kind == "power":
            record["gamma"] = self.gamma
        elif self.kind == "expected_shortfall":
            record["beta"] = self.beta
        elif self.kind == "piecewise_linear":
            record["knots"] = [[u, v] for u, v in self.knots]
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "Distortion":
        kind = record.get("kind")
        if kind == "identity":
            return cls.identity()
        if kind == "power":
            return cls.power(record["gamma"])
        if kind == "expected_shortfall":
            return cls.expected_shortfall(record["beta"])
        if kind == "piecewise_linear":
            return cls.piecewise_linear(record["knots"])
        raise DomainError(f"unknown distortion kind {kind!r}")


def distortion_eval(w: Distortion, u: float) -> float:
    """Evaluate the distortion at a cumulative probability ``u`` in [0,1]."""
    if not 0.0 <= u <= 1.0 or not math.isfinite(u):
        raise DomainError(f"distortion argument {u!r} outside [0,1]")
    if w.kind == "identity":
        return u
    if w.kind == "power":
        return u ** w.gamma
    if w.kind == "expected_shortfall":
        return min(u / (1.0 - w.beta), 1.0)
    knots = w.knots
    for (u1, w1), (u2, w2) in zip(knots, knots[1:]):
        if u <= u2:
            return w1 + (w2 - w1) * (u - u1) / (u2 - u1)
    return 1.0


def _sorted_blocks(space: FiniteProbSpace, xi: RandomVariable):
    """Outcomes grouped into blocks of equal value, sorted by value descending.

    Block masses and cumulative probabilities use exact summation, which
    makes the valuation invariant under permuting tied outcomes.
    """
    order = sorted(range(space.n_outcomes), key=lambda j: (-xi.values[j], j))
    blocks: list[tuple[float, list[int]]] = []
    for j in order:
        v = xi.values[j]
        if blocks and blocks[-1][0] == v:
            blocks[-1][1].append(j)
        else:
            blocks.append((v, [j]))
    seen: list[float] = []
    result = []
    for v, members in blocks:
        # total mass may overshoot 1 by float dust; keep w's argument in domain
        f_lo = min(math.fsum(seen), 1.0)
        seen.extend(space.probabilities[j] for j in members)
        f_hi = min(math.fsum(seen), 1.0)
        result.append((v, members, f_lo, f_hi))
    return result


def choquet_value(space: FiniteProbSpace, w: Distortion, xi: RandomVariable) -> float:
    """Choquet value of ``xi``: the comonotone-sorted weighted sum.

    Equals the layer-cake integral of the distorted survival function for
    nonnegative ``xi`` and extends to signed ``xi`` by cash additivity.
    """
    if xi.space != space:
        raise SpaceMismatch("variable not defined on the given space")
    terms = []
    for v, _members, f_lo, f_hi in _sorted_blocks(space, xi):
        terms.append((distortion_eval(w, f_hi) - distortion_eval(w, f_lo)) * v)
    return math.fsum(terms)


def subgradient_element(
    space: FiniteProbSpace, w: Distortion, xi: RandomVariable
) -> ScenarioMeasure:
    """Canonical scenario measure attaining the Choquet value of ``xi``.

    Outcomes sorted by decreasing value receive the increments of the
    distortion along cumulative probability; within a block of tied values
    the increment is split proportionally to outcome probability.  The
    proportional split is the permutation-symmetric representative of the
    (generally non-unique) set of maximisers.
    """
    if xi.space != space:
        raise SpaceMismatch("variable not defined on the given space")
    masses = [0.0] * space.n_outcomes
    for _v, members, f_lo, f_hi in _sorted_blocks(space, xi):
        increment = distortion_eval(w, f_hi) - distortion_eval(w, f_lo)
        block_mass = math.fsum(space.probabilities[j] for j in members)
        for j in members:
            masses[j] = space.probabilities[j] / block_mass * increment
    return ScenarioMeasure.of(space, masses)


def scenario_membership(
    space: FiniteProbSpace,
    w: Distortion,
    q: ScenarioMeasure,
    tol: float = TOL,
    max_outcomes: int = MAX_EVENT_OUTCOMES,
) -> Certificate:
    """Certify ``q(A) <= w(Prob(A))`` over every event ``A``.

    Exhaustive over all 2**M events; the empty event is vacuous and not
    enumerated.  Reports the event with the smallest slack.
    """
    if q.space != space:
        raise SpaceMismatch("measure not defined on the given space")
    m = space.n_outcomes
    if m > max_outcomes:
        raise ExhaustionLimitExceeded(
            f"{m} outcomes exceed the exhaustive-event limit {max_outcomes}"
        )
    tracker = SlackTracker()
    for mask in range(1, 1 << m):
        prob = math.fsum(space.probabilities[j] for j in range(m) if mask >> j & 1)
        q_mass = math.fsum(q.masses[j] for j in range(m) if mask >> j & 1)
        tracker.add(mask_label(mask), distortion_eval(w, min(prob, 1.0)) - q_mass)
    return tracker.certificate(tol)


def acceptability(
    space: FiniteProbSpace, w: Distortion, xi: RandomVariable, tol: float = TOL
) -> bool:
    """Whether the position needs no further premium: value at most zero."""
    return choquet_value(space, w, xi) <= tol


def comonotone(xi: RandomVariable, eta: RandomVariable, tol: float = TOL) -> bool:
    """Whether two variables never move strictly against each other.

    On a finite space this pairwise criterion is equivalent to both being
    nondecreasing functions of a common variable.
    """
    if xi.space != eta.space:
        raise SpaceMismatch("variables live on different spaces")
    values_x, values_e = xi.values, eta.values
    m = len(values_x)
    for a in range(m):
        for b in range(a + 1, m):
            if (values_x[a] - values_x[b]) * (values_e[a] - values_e[b]) < -tol:
                return False
    return True


def subgradient_persistence(
    space: FiniteProbSpace,
    w: Distortion,
    xi: RandomVariable,
    m: float,
    tol: float = TOL,
) -> Certificate:
    """Certify that the canonical maximiser of ``xi`` also prices its slices.

    With ``q*`` attaining the value of ``xi``, comonotone additivity forces
    ``q*`` to attain the values of ``(xi-m)^+``, ``-(xi-m)^-`` and
    ``xi /\\ m`` as well; each of the three attainments is checked.
    """
    q_star = subgradient_element(space, w, xi)
    shifted = xi - m
    pieces = (
        ("positive part above threshold", shifted.positive_part()),
        ("negative part below threshold", -shifted.negative_part()),
        ("capped at threshold", xi.cap(m)),
    )
    tracker = SlackTracker()
    for name, piece in pieces:
        gap = abs(choquet_value(space, w, piece) - expectation(q_star, piece))
        tracker.add(name, -gap)
    return tracker.certificate(tol)

