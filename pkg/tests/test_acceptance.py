"""Acceptance suite: one test per exit criterion, printed pass/fail lines.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
summary.  Every tolerance is pinned here; runtime budgets are asserted.
"""

import json
import random
import time
import warnings
from contextlib import contextmanager

import pytest

from faircover import (
    BenefitShares,
    DegeneratePortfolioWarning,
    LiabilityVector,
    PayoffMatrix,
    RandomVariable,
    ScenarioMeasure,
    admissibility_certificate,
    aggregate,
    alpha_star,
    build_space,
    certificate_suite,
    choquet_value,
    core_certificate,
    design_contract,
    expectation,
    fuzzy_core_certificate,
    fuzzy_fairness_certificate,
    maximality_certificate,
    payoff_fairness_certificate,
    scenario_membership,
    shareholder_checks,
    standard_payoffs,
    state_fairness_certificate,
    state_maximality_certificate,
    state_price_allocation,
    subgradient_element,
    subgradient_persistence,
    two_alternating_certificate,
)
from faircover.cli import main
from faircover.prob_space import Event
from faircover.state_payoffs import CustomStatePayoffs, StatePayoffFamily

from support import (
    comonotone_pair,
    fixture_a,
    permutation_maximum,
    random_distortion,
    random_portfolio,
    random_space,
    random_state_instance,
)


@contextmanager
def criterion(number: int, description: str, budget_seconds: float | None = None):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"[criterion {number}] FAIL  {description}")
        raise
    elapsed = time.perf_counter() - start
    budget = f", budget {budget_seconds:g}s" if budget_seconds else ""
    print(f"[criterion {number}] PASS  {description} ({elapsed:.2f}s{budget})")
    if budget_seconds is not None:
        assert elapsed < budget_seconds, f"criterion {number} blew its runtime budget"


def test_criterion_1_fixture_regression():
    with criterion(1, "canonical fixture regression", budget_seconds=1.0):
        space, w, liability = fixture_a()
        design = design_contract(liability, w)
        assert design.aggregate.premium_pool == pytest.approx(2.7559, abs=1e-4)
        assert design.aggregate.capital == pytest.approx(3.7559, abs=1e-4)
        for got, want in zip(design.premia.premia, (1.0, 1.41421, 1.34164)):
            assert got == pytest.approx(want, abs=1e-4)
        for got, want in zip(design.shares.alpha, (0.44559, 0.22176, 0.33264)):
            assert got == pytest.approx(want, abs=1e-3)
        default_column = tuple(row[2] for row in design.payoffs.rows)
        for got, want in zip(default_column, (0.0, 1.50234, 2.25351)):
            assert got == pytest.approx(want, abs=1e-4)
        dividend = RandomVariable(space, design.payoffs.rows[0])
        net = RandomVariable.constant(space, liability.k0) - dividend
        assert choquet_value(space, w, net) == pytest.approx(0.0, abs=1e-4)
        assert expectation(design.q_star, dividend) == pytest.approx(1.0, abs=1e-4)


def test_criterion_2_contracts_fair_and_maximal_in_bulk():
    with criterion(2, "500 random portfolios pass every contract certificate", 60.0):
        rng = random.Random(20240)
        degenerate = 0
        for _ in range(500):
            liability, w = random_portfolio(rng, max_m=8, max_n=5, k0_choices=(0.0, 1.0, 3.0))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegeneratePortfolioWarning)
                agg = aggregate(liability, w)
                if agg.degenerate:
                    degenerate += 1
                    continue
                design = design_contract(liability, w)
            suite = certificate_suite(
                liability, design.premia, design.payoffs, design.q_star, w, tol=1e-8
            )
            for name, cert in suite.items():
                assert cert.passed, f"{name} failed on {liability}: {cert}"
        assert degenerate < 500


def test_criterion_3_choquet_permutation_oracle():
    with criterion(3, "200 instances match the permutation oracle and scenario set", 30.0):
        rng = random.Random(333)
        for _ in range(200):
            space = random_space(rng, rng.randint(1, 7))
            w = random_distortion(rng)
            values = [rng.uniform(-10, 10) for _ in range(space.n_outcomes)]
            xi = RandomVariable.of(space, values)
            value = choquet_value(space, w, xi)
            assert value == pytest.approx(
                permutation_maximum(space.probabilities, w, values), abs=1e-9
            )
            q = subgradient_element(space, w, xi)
            assert expectation(q, xi) == pytest.approx(value, abs=1e-9)
            assert scenario_membership(space, w, q, tol=1e-9).passed


def test_criterion_4_comonotone_additivity_and_persistence():
    with criterion(4, "comonotone additivity and maximiser persistence", 10.0):
        rng = random.Random(4444)
        for _ in range(500):
            space = random_space(rng, rng.randint(2, 7))
            w = random_distortion(rng)
            xi, eta = comonotone_pair(rng, space)
            total = choquet_value(space, w, xi + eta)
            split = choquet_value(space, w, xi) + choquet_value(space, w, eta)
            assert total == pytest.approx(split, rel=1e-9, abs=1e-9)
        for _ in range(500):
            space = random_space(rng, rng.randint(1, 7))
            w = random_distortion(rng)
            xi = RandomVariable.of(
                space, [rng.uniform(-10, 10) for _ in range(space.n_outcomes)]
            )
            threshold = rng.uniform(-11, 11)
            assert subgradient_persistence(space, w, xi, threshold, tol=1e-9).passed


def test_criterion_5_state_game_suite():
    with criterion(5, "200 random state games pass all state certificates", 60.0):
        rng = random.Random(555)
        for _ in range(200):
            space, w, z, capital = random_state_instance(rng, max_m=6)
            q = subgradient_element(space, w, z)
            pi_star = state_price_allocation(z, q)
            family = alpha_star(z, capital, q, w, tol=1e-8)
            assert two_alternating_certificate(z, w, tol=1e-8).passed
            assert state_fairness_certificate(family, pi_star, w, tol=1e-8).passed
            assert state_maximality_certificate(family, w, seed=1, tol=1e-8).passed
            assert fuzzy_fairness_certificate(
                family, pi_star, w, sample_count=1000, seed=1, tol=1e-8
            ).passed


def test_criterion_6_state_family_matches_contract_payoffs():
    with criterion(6, "state payoffs reproduce contract payoffs without equity", 10.0):
        rng = random.Random(666)
        checked = 0
        while checked < 100:
            liability, w = random_portfolio(rng, k0_choices=(0.0,))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegeneratePortfolioWarning)
                agg = aggregate(liability, w)
                if agg.degenerate:
                    continue
                design = design_contract(liability, w)
            family = alpha_star(agg.total_loss, agg.capital, design.q_star, w)
            for i, loss in enumerate(liability.losses):
                lam = tuple(
                    x / v if v > 0 else 0.0
                    for x, v in zip(loss.values, agg.total_loss.values)
                )
                bridged = family.fuzzy_payoff(lam)
                for got, want in zip(bridged.values, design.payoffs.rows[i + 1]):
                    assert got == pytest.approx(want, abs=1e-10)
            checked += 1


def test_criterion_7_negative_controls():
    with criterion(7, "every certificate rejects its documented perturbation"):
        space, w, liability = fixture_a()
        design = design_contract(liability, w)

        bumped = (design.premia.premia[0], design.premia.premia[1] + 0.1,
                  design.premia.premia[2] - 0.1)
        assert not core_certificate(liability.players(), bumped, w).passed

        rows = [list(r) for r in design.payoffs.rows]
        rows[0][2] += 0.4
        rows[2][2] -= 0.4
        dividend_in_default = PayoffMatrix(space, tuple(map(tuple, rows)))
        assert not admissibility_certificate(liability, dividend_in_default, w).passed

        asym_space = build_space([0.5, 0.3, 0.2])
        asym = LiabilityVector(
            asym_space,
            1.0,
            (
                RandomVariable.of(asym_space, [0, 2, 2]),
                RandomVariable.of(asym_space, [0, 0, 4]),
            ),
        )
        asym_design = design_contract(asym, w)
        alpha = asym_design.shares.alpha
        swapped = standard_payoffs(asym, BenefitShares((alpha[0], alpha[2], alpha[1])), w)
        assert not payoff_fairness_certificate(asym, asym_design.premia, swapped, w).passed

        split_space = build_space([0.4, 0.4, 0.2])
        split = LiabilityVector(
            split_space,
            0.0,
            (
                RandomVariable.of(split_space, [0, 1, 4]),
                RandomVariable.of(split_space, [1, 0, 4]),
            ),
        )
        split_agg = aggregate(split, w)
        surplus = split_agg.premium_pool - 1.0
        ration = split_agg.capital / 8.0
        lopsided = PayoffMatrix(
            split_space,
            (
                (0.0, 0.0, 0.0),
                (surplus, 1.0, 4.0 * ration),
                (1.0, surplus, 4.0 * ration),
            ),
        )
        assert admissibility_certificate(split, lopsided, w).passed
        assert not maximality_certificate(split, lopsided, w).passed

        perturbed = BenefitShares(
            (design.shares.alpha[0] + 0.05, design.shares.alpha[1] - 0.05, design.shares.alpha[2])
        )
        shifted = standard_payoffs(liability, perturbed, w)
        assert not shareholder_checks(liability, shifted, design.q_star, w).passed

        point_mass = ScenarioMeasure.of(build_space([0.5, 0.5]), [1.0, 0.0])
        assert not scenario_membership(build_space([0.5, 0.5]), w, point_mass).passed

        z = RandomVariable.of(space, [1, 3, 6])
        concentrated = (0.0, 0.0, choquet_value(space, w, z))
        assert not fuzzy_core_certificate(z, concentrated, w, sample_count=200, seed=1).passed

        lopsided_z = RandomVariable.of(space, [0, 2, 8])
        q = subgradient_element(space, w, lopsided_z)
        uniform_family = StatePayoffFamily(space, lopsided_z, 4.0, (1 / 3, 1 / 3, 1 / 3))
        assert not state_fairness_certificate(
            uniform_family, state_price_allocation(lopsided_z, q), w
        ).passed

        swap_space = build_space([0.4, 0.4, 0.2])
        swap_z = RandomVariable.of(swap_space, [0, 1, 5])
        swap_capital = choquet_value(swap_space, w, swap_z)

        def swapped_weights(event: Event) -> RandomVariable:
            weights = (
                1.0 if event.members[1] else 0.0,
                1.0 if event.members[0] else 0.0,
                1.0 if event.members[2] else 0.0,
            )
            values = []
            for j in range(3):
                extra = weights[j] * max(swap_capital - swap_z.values[j], 0.0)
                capped = min(swap_z.values[j], swap_capital) if event.members[j] else 0.0
                values.append(extra + capped)
            return RandomVariable.of(swap_space, values)

        crooked = CustomStatePayoffs(swap_space, swap_z, swap_capital, swapped_weights)
        assert not state_maximality_certificate(crooked, w).passed


def test_criterion_8_cli_determinism_and_exit_codes(fixa_file, tmp_path, capsys):
    with criterion(8, "CLI determinism and the 0/1/2 exit-code contract"):
        code_first = main(["analyze", str(fixa_file), "--format", "json"])
        first = capsys.readouterr().out
        code_second = main(["analyze", str(fixa_file), "--format", "json"])
        second = capsys.readouterr().out
        assert code_first == code_second == 0
        assert first == second

        missing = main(["analyze", str(tmp_path / "missing.json")])
        capsys.readouterr()
        assert missing == 1

        failing = main(["certify", str(fixa_file), "--premia", "1", "1.6", "1.15586"])
        capsys.readouterr()
        assert failing == 2
