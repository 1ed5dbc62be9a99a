"""Shared test oracles and random-instance generators.

The Choquet oracles here are deliberately independent of the library's
sorted-sum implementation: one integrates the distorted survival function
layer by layer, the other maximises over every permutation-induced
measure.  Frozen regression constants for the canonical three-outcome
fixture were derived from the layer-cake oracle plus direct arithmetic.
"""

from __future__ import annotations

import math
import random
from itertools import permutations

from faircover import (
    Distortion,
    LiabilityVector,
    RandomVariable,
    build_space,
)

# ---------------------------------------------------------------------------
# Independent Choquet oracles
# ---------------------------------------------------------------------------


def layercake_choquet(probs, w, values) -> float:
    """Signed Choquet integral via the layer-cake representation.

    For the positive layers integrates w(P(xi > a)); for the negative
    layers integrates w(P(xi > a)) - 1.  Exact on finite spaces because
    the integrand is piecewise constant between distinct values.
    """
    pts = sorted(set(values) | {0.0})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        mid = (a + b) / 2.0
        surv = math.fsum(p for p, v in zip(probs, values) if v > mid)
        surv = min(max(surv, 0.0), 1.0)
        if a >= 0:
            total += w(surv) * (b - a)
        else:
            total += (w(surv) - 1.0) * (b - a)
    return total


def permutation_maximum(probs, w, values) -> float:
    """Maximum expectation over all permutation-induced measures.

    Each permutation loads the increments of the distortion along its
    cumulative probabilities; the Choquet value is the maximum over all
    of them.
    """
    best = -math.inf
    for sigma in permutations(range(len(probs))):
        cum = 0.0
        w_prev = 0.0
        total = 0.0
        for j in sigma:
            cum += probs[j]
            w_cur = w(min(cum, 1.0))
            total += (w_cur - w_prev) * values[j]
            w_prev = w_cur
        best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# Canonical fixture: p=(0.5,0.3,0.2), w=sqrt, X1=(0,2,2), X2=(0,0,3), k0=1
# Constants frozen from the layer-cake oracle and direct arithmetic.
# ---------------------------------------------------------------------------

FIXA_PROBS = (0.5, 0.3, 0.2)
FIXA_K0 = 1.0
FIXA_X1 = (0.0, 2.0, 2.0)
FIXA_X2 = (0.0, 0.0, 3.0)
FIXA_SX = (0.0, 2.0, 5.0)

FIXA_POOL = 2.755854348872969            # value of the total loss
FIXA_CAPITAL = 3.755854348872969         # pool + equity
FIXA_QSTAR = (0.2928932188134524, 0.25989318568658965, 0.4472135954999579)
FIXA_PREMIA = (1.0, 1.4142135623730951, 1.3416407864998738)
FIXA_ALPHA = (0.44560387579914457, 0.22175844968034217, 0.33263767452051324)
FIXA_Y0 = (2.228019378995723, 1.3368116273974338, 0.0)
FIXA_Y1 = (0.6111339879508985, 2.167617088590214, 1.5023417395491876)
FIXA_Y2 = (0.9167009819263476, 0.2514256328853211, 2.2535126093237814)
FIXA_EXCESS_VALUE = 0.5563988499661559   # value of (total loss - capital)^+


def fixture_a():
    space = build_space(FIXA_PROBS)
    liability = LiabilityVector(
        space,
        FIXA_K0,
        (RandomVariable.of(space, FIXA_X1), RandomVariable.of(space, FIXA_X2)),
    )
    return space, Distortion.power(0.5), liability


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def random_space(rng: random.Random, m: int):
    raw = [rng.uniform(0.1, 1.0) for _ in range(m)]
    total = math.fsum(raw)
    return build_space([x / total for x in raw])


def random_concave_pwlinear(rng: random.Random) -> Distortion:
    n_interior = rng.randint(1, 3)
    us = sorted(rng.uniform(0.05, 0.95) for _ in range(n_interior))
    us = [0.0] + us + [1.0]
    slopes = sorted((rng.uniform(0.1, 3.0) for _ in range(len(us) - 1)), reverse=True)
    raw = [0.0]
    for (u1, u2), s in zip(zip(us, us[1:]), slopes):
        raw.append(raw[-1] + s * (u2 - u1))
    scale = raw[-1]
    knots = [(u, v / scale) for u, v in zip(us, raw)]
    knots[0] = (0.0, 0.0)
    knots[-1] = (1.0, 1.0)
    return Distortion.piecewise_linear(knots)


def random_distortion(rng: random.Random) -> Distortion:
    kind = rng.randrange(4)
    if kind == 0:
        return Distortion.identity()
    if kind == 1:
        return Distortion.power(rng.uniform(0.2, 1.0))
    if kind == 2:
        return Distortion.expected_shortfall(rng.uniform(0.0, 0.8))
    return random_concave_pwlinear(rng)


def random_portfolio(
    rng: random.Random,
    max_m: int = 8,
    max_n: int = 5,
    k0_choices=(0.0, 1.0, 3.0),
    loss_max: int = 10,
):
    m = rng.randint(2, max_m)
    n = rng.randint(1, max_n)
    space = random_space(rng, m)
    losses = tuple(
        RandomVariable.of(space, [float(rng.randint(0, loss_max)) for _ in range(m)])
        for _ in range(n)
    )
    k0 = float(rng.choice(k0_choices))
    return LiabilityVector(space, k0, losses), random_distortion(rng)


def random_nonneg_variable(rng: random.Random, space, value_max: int = 10) -> RandomVariable:
    return RandomVariable.of(
        space, [float(rng.randint(0, value_max)) for _ in range(space.n_outcomes)]
    )


def comonotone_pair(rng: random.Random, space):
    """Two nondecreasing step functions of one random driver, ties respected."""
    m = space.n_outcomes
    driver = [rng.randint(0, 6) for _ in range(m)]
    levels_f: dict[int, float] = {}
    levels_g: dict[int, float] = {}
    f_val = rng.uniform(-5, 5)
    g_val = rng.uniform(-5, 5)
    for value in sorted(set(driver)):
        f_val += rng.uniform(0, 4)
        g_val += rng.uniform(0, 4)
        levels_f[value] = f_val
        levels_g[value] = g_val
    xi = RandomVariable.of(space, [levels_f[d] for d in driver])
    eta = RandomVariable.of(space, [levels_g[d] for d in driver])
    return xi, eta


def random_state_instance(rng: random.Random, max_m: int = 6):
    """Random nonnegative state liability with capital equal to its value
    and at least one default outcome; retries until default is possible."""
    from faircover import choquet_value

    while True:
        space = random_space(rng, rng.randint(2, max_m))
        w = random_distortion(rng)
        z = random_nonneg_variable(rng, space)
        capital = choquet_value(space, w, z)
        if capital > 1e-9 and z.max_value() > capital + 1e-6:
            return space, w, z, capital
