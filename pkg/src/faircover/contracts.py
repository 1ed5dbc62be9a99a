"""Design and certification of benefit-sharing insurance contracts.

Given agent losses, insurer equity and a distortion, the pipeline prices
the pooled liability, allocates premia with the canonical pricing measure,
derives each agent's fixed share of the company surplus from its expected
share of the loss in default, and writes the payoff schedule: full
indemnity plus a surplus share while solvent, proportional rationing of
the capital in default, a zero dividend in default.

The certificates re-verify, by exhaustive coalition enumeration, that the
designed (or any supplied) contract is fair: premia in the core, payoffs
admissible, no coalition able to cut its cost by leaving, residual risks
at their comonotone minimum, and the shareholder identities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .certificates import Certificate, SlackTracker, mask_label
from .errors import (
    DegeneratePortfolio,
    DegeneratePortfolioWarning,
    ExhaustionLimitExceeded,
    NegativeLiability,
    NotASubgradient,
    SpaceMismatch,
    ValidationError,
)
from .game import MAX_PLAYERS, core_certificate, pooled
from .prob_space import (
    Event,
    FiniteProbSpace,
    RandomVariable,
    ScenarioMeasure,
    build_space,
    expectation,
    measurability_defect,
)
from .valuation import TOL, Distortion, choquet_value, subgradient_element

#: Tolerance used for type-level share validation.
SHARE_TOL = 1e-9


@dataclass(frozen=True)
class LiabilityVector:
    """Insurer equity plus the agents' nonnegative loss variables."""

    space: FiniteProbSpace
    k0: float
    losses: tuple[RandomVariable, ...]

    def __post_init__(self):
        if self.k0 < 0.0 or not math.isfinite(self.k0):
            raise NegativeLiability(f"equity {self.k0!r} must be a finite nonnegative number")
        for i, loss in enumerate(self.losses):
            if loss.space != self.space:
                raise SpaceMismatch(f"loss of agent {i + 1} lives on a different space")
            if loss.min_value() < 0.0:
                raise NegativeLiability(
                    f"loss of agent {i + 1} has negative component {loss.min_value()!r}"
                )

    @property
    def n_agents(self) -> int:
        return len(self.losses)

    def players(self) -> tuple[RandomVariable, ...]:
        """The N+1 liability rows; row 0 is the constant equity."""
        return (RandomVariable.constant(self.space, self.k0),) + self.losses

    def total_loss(self) -> RandomVariable:
        total = [0.0] * self.space.n_outcomes
        for loss in self.losses:
            for j, v in enumerate(loss.values):
                total[j] += v
        return RandomVariable(self.space, tuple(total))


@dataclass(frozen=True)
class PremiumAllocation:
    """Premia for the N+1 players; budget identities are certified, not assumed."""

    premia: tuple[float, ...]

    def __post_init__(self):
        for i, p in enumerate(self.premia):
            if not math.isfinite(p) or p < 0.0:
                raise ValueError(f"premium of player {i} is {p!r}; must be finite and >= 0")


@dataclass(frozen=True)
class BenefitShares:
    """Fixed surplus shares for the N+1 players; nonnegative, summing to one."""

    alpha: tuple[float, ...]

    def __post_init__(self):
        for i, a in enumerate(self.alpha):
            if not math.isfinite(a) or a < -SHARE_TOL or a > 1.0 + SHARE_TOL:
                raise ValueError(f"share of player {i} is {a!r}; must lie in [0,1]")
        total = math.fsum(self.alpha)
        if abs(total - 1.0) > SHARE_TOL:
            raise ValueError(f"shares sum to {total!r}, not 1")


@dataclass(frozen=True)
class PayoffMatrix:
    """Per-player payoff rows; structural checks only, economics is certified."""

    space: FiniteProbSpace
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != self.space.n_outcomes:
                raise SpaceMismatch(
                    f"payoff row {i} has {len(row)} entries for {self.space.n_outcomes} outcomes"
                )
            if any(not math.isfinite(v) for v in row):
                raise ValueError(f"payoff row {i} contains a non-finite entry")

    def row_variables(self) -> tuple[RandomVariable, ...]:
        return tuple(RandomVariable(self.space, row) for row in self.rows)

    def column_sum(self, j: int) -> float:
        return math.fsum(row[j] for row in self.rows)


@dataclass(frozen=True)
class AggregateResult:
    """Pooled liability, premium pool, total capital and the default event."""

    total_loss: RandomVariable
    premium_pool: float
    capital: float
    default_event: Event
    degenerate: bool


def aggregate(liability: LiabilityVector, w: Distortion, tol: float = TOL) -> AggregateResult:
    """Price the pooled liability and locate the default event.

    The premium pool is the value of the total loss; adding equity gives
    the capital available at settlement.  Default happens where the total
    loss exceeds the capital.  A portfolio is flagged degenerate, with a
    warning rather than an error, when it cannot default: either no
    outcome exceeds the capital, or the loss past the premium pool is
    worth less than ``tol`` (so benefit shares would be undetermined).
    """
    total = liability.total_loss()
    pool = choquet_value(liability.space, w, total)
    capital = pool + liability.k0
    flags = tuple(v > capital for v in total.values)
    default_event = Event(liability.space, flags)
    past_pool = choquet_value(liability.space, w, (total - pool).positive_part())
    degenerate = not any(flags) or past_pool <= tol
    if degenerate:
        warnings.warn(
            "portfolio cannot default: premium pool plus equity covers every outcome",
            DegeneratePortfolioWarning,
            stacklevel=2,
        )
    return AggregateResult(total, pool, capital, default_event, degenerate)


def fair_premia(
    liability: LiabilityVector,
    q_star: ScenarioMeasure,
    w: Distortion,
    tol: float = TOL,
) -> PremiumAllocation:
    """Premia from the pricing measure: equity for the insurer, expected
    loss under ``q_star`` for each agent.

    ``q_star`` must attain the value of the total loss; any such measure
    yields a core allocation.
    """
    total = liability.total_loss()
    value = choquet_value(liability.space, w, total)
    attained = expectation(q_star, total)
    if abs(attained - value) > tol:
        raise NotASubgradient(
            f"measure prices the total loss at {attained!r}, valuation is {value!r}"
        )
    premia = [liability.k0]
    premia.extend(expectation(q_star, loss) for loss in liability.losses)
    return PremiumAllocation(tuple(premia))


def benefit_shares(
    liability: LiabilityVector,
    q_star: ScenarioMeasure,
    w: Distortion,
    tol: float = TOL,
) -> BenefitShares:
    """Fixed surplus shares from expected proportional losses in default.

    Agent ``i`` receives the expected value, under the pricing measure, of
    its claim proportion times the loss past the capital, normalised by
    the value of the loss past the premium pool; the insurer takes the
    remainder.  The ratio uses the convention 0/0 = 0, harmless because
    the excess factor vanishes wherever the total loss is zero.
    """
    agg_total = liability.total_loss()
    pool = choquet_value(liability.space, w, agg_total)
    capital = pool + liability.k0
    denominator = choquet_value(liability.space, w, (agg_total - pool).positive_part())
    if denominator <= tol:
        raise DegeneratePortfolio(
            "total loss never exceeds the premium pool; benefit shares are undetermined"
        )
    excess = (agg_total - capital).positive_part()
    shares = []
    for loss in liability.losses:
        numerator = math.fsum(
            q * (x / s if s > 0.0 else 0.0) * e
            for q, x, s, e in zip(
                q_star.masses, loss.values, agg_total.values, excess.values
            )
        )
        shares.append(numerator / denominator)
    insurer = 1.0 - math.fsum(shares)
    return BenefitShares((insurer,) + tuple(shares))


def standard_payoffs(
    liability: LiabilityVector,
    shares: BenefitShares,
    w: Distortion,
) -> PayoffMatrix:
    """The payoff schedule with fixed surplus shares.

    While the total loss stays within the premium pool, everyone receives
    their claim (equity for the insurer) plus their share of the surplus.
    Past the pool the insurer takes what is left of the capital, if
    anything; past the capital the claimants split it proportionally and
    the dividend is zero.
    """
    if len(shares.alpha) != liability.n_agents + 1:
        raise SpaceMismatch(
            f"{len(shares.alpha)} shares for {liability.n_agents + 1} players"
        )
    total = liability.total_loss()
    pool = choquet_value(liability.space, w, total)
    capital = pool + liability.k0
    m = liability.space.n_outcomes
    insurer_row = []
    for j in range(m):
        s = total.values[j]
        if s <= pool:
            insurer_row.append(liability.k0 + shares.alpha[0] * (pool - s))
        else:
            insurer_row.append(max(capital - s, 0.0))
    rows = [tuple(insurer_row)]
    for i, loss in enumerate(liability.losses):
        row = []
        for j in range(m):
            s = total.values[j]
            if s <= pool:
                row.append(loss.values[j] + shares.alpha[i + 1] * (pool - s))
            else:
                row.append(loss.values[j] * min(capital / s, 1.0))
        rows.append(tuple(row))
    return PayoffMatrix(liability.space, tuple(rows))


def benefit_rows(liability: LiabilityVector, payoffs: PayoffMatrix) -> tuple[tuple[float, ...], ...]:
    """Benefit participation per player: the positive part of payoff minus claim."""
    players = liability.players()
    return tuple(
        tuple(max(y - x, 0.0) for y, x in zip(row, player.values))
        for row, player in zip(payoffs.rows, players)
    )


def admissibility_certificate(
    liability: LiabilityVector,
    payoffs: PayoffMatrix,
    w: Distortion,
    tol: float = TOL,
) -> Certificate:
    """Certify the bankruptcy-priority rules at every outcome and row.

    In default each claimant receives the capital in proportion to its
    claim; while solvent each claimant receives at least its claim; every
    column distributes exactly the capital; entries are nonnegative; and
    each row is determined by its own claim together with the total loss.
    """
    if len(payoffs.rows) != liability.n_agents + 1:
        raise SpaceMismatch(
            f"{len(payoffs.rows)} payoff rows for {liability.n_agents + 1} players"
        )
    total = liability.total_loss()
    pool = choquet_value(liability.space, w, total)
    capital = pool + liability.k0
    m = liability.space.n_outcomes
    tracker = SlackTracker()
    for j in range(m):
        s = total.values[j]
        if s > capital:
            for i, loss in enumerate(liability.losses):
                target = loss.values[j] / s * capital
                tracker.add(
                    f"default rationing, agent {i + 1}, outcome {j}",
                    -abs(payoffs.rows[i + 1][j] - target),
                )
        else:
            for i, loss in enumerate(liability.losses):
                tracker.add(
                    f"indemnity floor, agent {i + 1}, outcome {j}",
                    payoffs.rows[i + 1][j] - loss.values[j],
                )
        tracker.add(f"capital conservation, outcome {j}", -abs(payoffs.column_sum(j) - capital))
        for i, row in enumerate(payoffs.rows):
            tracker.add(f"nonnegative payoff, row {i}, outcome {j}", row[j])
    players = liability.players()
    for i, row_var in enumerate(payoffs.row_variables()):
        defect = measurability_defect(row_var, [players[i], total])
        tracker.add(f"claim-and-total measurability, row {i}", -defect)
    return tracker.certificate(tol)


def payoff_fairness_certificate(
    liability: LiabilityVector,
    premia: PremiumAllocation,
    payoffs: PayoffMatrix,
    w: Distortion,
    tol: float = TOL,
    max_players: int = MAX_PLAYERS,
) -> Certificate:
    """Certify that no coalition beats the contract by going it alone.

    For every nonempty coalition, the cost of insuring its residual claims
    plus its premium total must not exceed its stand-alone cost.  The empty
    coalition's constraint is vacuous and not enumerated.
    """
    n = liability.n_agents + 1
    if len(premia.premia) != n or len(payoffs.rows) != n:
        raise SpaceMismatch("premia, payoffs and portfolio must have matching player counts")
    if n > max_players:
        raise ExhaustionLimitExceeded(f"{n} players exceed the coalition limit {max_players}")
    space = liability.space
    players = liability.players()
    residuals = tuple(
        RandomVariable(space, tuple(x - y for x, y in zip(player.values, row)))
        for player, row in zip(players, payoffs.rows)
    )
    tracker = SlackTracker()
    for mask in range(1, 1 << n):
        stand_alone = choquet_value(space, w, pooled(players, mask))
        residual_cost = choquet_value(space, w, pooled(residuals, mask))
        premium_total = math.fsum(premia.premia[i] for i in range(n) if mask >> i & 1)
        tracker.add(mask_label(mask), stand_alone - premium_total - residual_cost)
    return tracker.certificate(tol)


def maximality_certificate(
    liability: LiabilityVector,
    payoffs: PayoffMatrix,
    w: Distortion,
    tol: float = TOL,
) -> Certificate:
    """Certify that residual risks sit at their comonotone minimum.

    Summed over players, the value of the negative residual parts (the
    benefits handed out) must equal the value of minus the surplus
    ``(pool - total loss)^+``.  Fixed-share schedules make the benefit
    family comonotone so the sum collapses to that single value; schedules
    that split the surplus in outcome-dependent proportions price strictly
    above it and fail.
    """
    if len(payoffs.rows) != liability.n_agents + 1:
        raise SpaceMismatch(
            f"{len(payoffs.rows)} payoff rows for {liability.n_agents + 1} players"
        )
    space = liability.space
    total = liability.total_loss()
    pool = choquet_value(space, w, total)
    players = liability.players()
    handed_out = math.fsum(
        choquet_value(
            space,
            w,
            RandomVariable(space, tuple(-max(y - x, 0.0) for x, y in zip(player.values, row))),
        )
        for player, row in zip(players, payoffs.rows)
    )
    bound = choquet_value(space, w, -(pool - total).positive_part())
    tracker = SlackTracker()
    tracker.add("comonotone residual bound", bound - handed_out)
    return tracker.certificate(tol)


def shareholder_checks(
    liability: LiabilityVector,
    payoffs: PayoffMatrix,
    q_star: ScenarioMeasure,
    w: Distortion,
    tol: float = TOL,
) -> Certificate:
    """Certify the shareholder identities of a fair fixed-share contract.

    The insurer's net position has zero value, and the dividend row is
    worth exactly the equity under the pricing measure.
    """
    space = liability.space
    dividend = RandomVariable(space, payoffs.rows[0])
    net = RandomVariable.constant(space, liability.k0) - dividend
    tracker = SlackTracker()
    tracker.add("insurer net position has zero value", -abs(choquet_value(space, w, net)))
    tracker.add(
        "dividend prices back the equity",
        -abs(liability.k0 - expectation(q_star, dividend)),
    )
    return tracker.certificate(tol)


@dataclass(frozen=True)
class ContractDesign:
    """Everything the pipeline produces for one portfolio."""

    liability: LiabilityVector
    distortion: Distortion
    aggregate: AggregateResult
    q_star: ScenarioMeasure
    premia: PremiumAllocation
    shares: BenefitShares
    payoffs: PayoffMatrix

    def benefits(self) -> tuple[tuple[float, ...], ...]:
        return benefit_rows(self.liability, self.payoffs)


def design_contract(
    liability: LiabilityVector, w: Distortion, tol: float = TOL
) -> ContractDesign:
    """Run the full design pipeline: price, allocate, share, schedule.

    Degenerate portfolios (no possible default) get the whole surplus
    assigned to the insurer and carry the warning from ``aggregate``.
    """
    agg = aggregate(liability, w, tol=tol)
    q_star = subgradient_element(liability.space, w, agg.total_loss)
    premia = fair_premia(liability, q_star, w, tol=tol)
    if agg.degenerate:
        shares = BenefitShares((1.0,) + (0.0,) * liability.n_agents)
    else:
        shares = benefit_shares(liability, q_star, w, tol=tol)
    payoffs = standard_payoffs(liability, shares, w)
    return ContractDesign(liability, w, agg, q_star, premia, shares, payoffs)


def certificate_suite(
    liability: LiabilityVector,
    premia: PremiumAllocation,
    payoffs: PayoffMatrix,
    q_star: ScenarioMeasure,
    w: Distortion,
    tol: float = TOL,
    max_players: int = MAX_PLAYERS,
) -> dict[str, Certificate]:
    """The five contract-level certificates, keyed for reporting."""
    return {
        "core": core_certificate_for(liability, premia, w, tol=tol, max_players=max_players),
        "admissibility": admissibility_certificate(liability, payoffs, w, tol=tol),
        "payoff_fairness": payoff_fairness_certificate(
            liability, premia, payoffs, w, tol=tol, max_players=max_players
        ),
        "maximality": maximality_certificate(liability, payoffs, w, tol=tol),
        "shareholder": shareholder_checks(liability, payoffs, q_star, w, tol=tol),
    }


def core_certificate_for(
    liability: LiabilityVector,
    premia: PremiumAllocation,
    w: Distortion,
    tol: float = TOL,
    max_players: int = MAX_PLAYERS,
) -> Certificate:
    """Core certificate specialised to a liability vector."""
    return core_certificate(
        liability.players(), premia.premia, w, tol=tol, max_players=max_players
    )


def parse_portfolio(data: object) -> tuple[LiabilityVector, Distortion, tuple[str, ...], float | None]:
    """Validate a portfolio record and build the domain objects.

    Expected shape::

        {"probabilities": [...], "k0": number,
         "agents": [{"name": str, "losses": [...]}, ...],
         "distortion": {"kind": ...}, "tolerance"?: number}

    Returns the liability vector, the distortion, the agent names and the
    optional tolerance override.  Raises ``ValidationError`` naming the
    offending field.
    """
    if not isinstance(data, dict):
        raise ValidationError("portfolio", "top-level value must be an object")
    try:
        probabilities = data["probabilities"]
    except KeyError:
        raise ValidationError("probabilities", "missing") from None
    if not isinstance(probabilities, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in probabilities
    ):
        raise ValidationError("probabilities", "must be a list of numbers")
    try:
        space = build_space(probabilities)
    except Exception as exc:
        raise ValidationError("probabilities", str(exc)) from None

    k0 = data.get("k0")
    if not isinstance(k0, (int, float)) or isinstance(k0, bool) or k0 < 0:
        raise ValidationError("k0", f"must be a nonnegative number, got {k0!r}")

    agents = data.get("agents")
    if not isinstance(agents, list) or not agents:
        raise ValidationError("agents", "must be a nonempty list")
    names = []
    losses = []
    for idx, agent in enumerate(agents):
        if not isinstance(agent, dict):
            raise ValidationError(f"agents[{idx}]", "must be an object")
        name = agent.get("name", f"agent {idx + 1}")
        if not isinstance(name, str):
            raise ValidationError(f"agents[{idx}].name", "must be a string")
        loss_values = agent.get("losses")
        if not isinstance(loss_values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in loss_values
        ):
            raise ValidationError(f"agents[{idx}].losses", "must be a list of numbers")
        if len(loss_values) != space.n_outcomes:
            raise ValidationError(
                f"agents[{idx}].losses",
                f"has {len(loss_values)} entries, expected {space.n_outcomes}",
            )
        if any(v < 0 for v in loss_values):
            raise ValidationError(f"agents[{idx}].losses", "entries must be nonnegative")
        names.append(name)
        losses.append(RandomVariable.of(space, loss_values))

    distortion_record = data.get("distortion")
    if not isinstance(distortion_record, dict):
        raise ValidationError("distortion", "must be an object with a 'kind' tag")
    try:
        distortion = Distortion.from_dict(distortion_record)
    except Exception as exc:
        raise ValidationError("distortion", str(exc)) from None

    tolerance = data.get("tolerance")
    if tolerance is not None:
        if not isinstance(tolerance, (int, float)) or isinstance(tolerance, bool) or tolerance <= 0:
            raise ValidationError("tolerance", f"must be a positive number, got {tolerance!r}")
        tolerance = float(tolerance)

    liability = LiabilityVector(space, float(k0), tuple(losses))
    return liability, distortion, tuple(names), tolerance
