"""Design and certification of fair insurance contracts under default risk.

Distortion-based coherent valuation on finite probability spaces, fair
premium and benefit-share allocation via cooperative games (crisp and
fuzzy), standard payoff schedules with bankruptcy priorities, and
exhaustive or sampled certificates for every fairness, admissibility,
core and maximality condition.
"""

from .certificates import Certificate
from .contracts import (
    AggregateResult,
    BenefitShares,
    ContractDesign,
    LiabilityVector,
    PayoffMatrix,
    PremiumAllocation,
    admissibility_certificate,
    aggregate,
    benefit_rows,
    benefit_shares,
    certificate_suite,
    design_contract,
    fair_premia,
    maximality_certificate,
    parse_portfolio,
    payoff_fairness_certificate,
    shareholder_checks,
    standard_payoffs,
)
from .errors import (
    DegeneratePortfolio,
    DegeneratePortfolioWarning,
    DegenerateState,
    DimensionMismatch,
    DomainError,
    ExhaustionLimitExceeded,
    FaircoverError,
    InconsistentRepresentation,
    InputParseError,
    NegativeLiability,
    NonPositiveProbability,
    NotAdmissibleStatePayoff,
    NotASubgradient,
    ProbabilityMassMismatch,
    SpaceMismatch,
    ValidationError,
)
from .game import (
    Coalition,
    Preference,
    coalition_cost,
    core_certificate,
    event_cost,
    fuzzy_core_certificate,
    preference_compare,
    two_alternating_certificate,
)
from .prob_space import (
    Event,
    FiniteProbSpace,
    RandomVariable,
    ScenarioMeasure,
    build_space,
    expectation,
    generated_partition,
    measurability_defect,
    sigma_measurable,
)
from .state_payoffs import (
    CustomStatePayoffs,
    StatePayoffFamily,
    alpha_star,
    fuzzy_fairness_certificate,
    representation_extract,
    state_fairness_certificate,
    state_maximality_certificate,
    state_payoff,
    state_price_allocation,
)
from .valuation import (
    Distortion,
    acceptability,
    choquet_value,
    comonotone,
    distortion_eval,
    scenario_membership,
    subgradient_element,
    subgradient_persistence,
)

__version__ = "0.1.0"
