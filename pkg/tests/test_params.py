from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgtool import (
    ModelParams,
    PolicyConfig,
    StrategySpec,
    ValidationError,
    check_assumptions,
    validate,
)


def _names(violations):
    return {v.name for v in violations}


def test_baseline_scenario_is_valid(example1):
    assert check_assumptions(
        example1.params, example1.strategies, example1.policy
    ) == []
    bundle = validate(example1.params, example1.strategies, example1.policy)
    assert bundle.params is example1.params


def test_death_rate_above_omega_is_rejected(example1):
    bad = ModelParams(gamma=0.1, delta=0.02, zeta=0.0, theta=0.0, psi=0.011)
    names = _names(check_assumptions(bad, example1.strategies, example1.policy))
    assert "delta<omega" in names
    with pytest.raises(ValidationError) as err:
        validate(bad, example1.strategies, example1.policy)
    assert "delta<omega" in str(err.value)


def test_death_rate_above_gamma_is_rejected(example1):
    bad = ModelParams(gamma=0.004, delta=0.005, zeta=0.0, theta=0.0, psi=0.2)
    names = _names(check_assumptions(bad, example1.strategies, example1.policy))
    assert "delta<gamma" in names


def test_zero_death_rate_is_rejected(example1):
    bad = ModelParams(gamma=0.1, delta=0.0, zeta=0.0, theta=0.0, psi=0.011)
    names = _names(check_assumptions(bad, example1.strategies, example1.policy))
    assert "delta>0" in names


def test_three_strategy_slope_condition_accepts_decreasing_slopes(example1):
    # slopes: 0.2/0.03 = 6.67 then 0.2/0.04 = 5.0, strictly decreasing
    s = StrategySpec(betas=(0.12, 0.15, 0.19), costs=(0.4, 0.2, 0.0))
    assert check_assumptions(example1.params, s, PolicyConfig(0.3, 2.0)) == []


def test_three_strategy_slope_condition_rejects_increasing_slopes(example1):
    # slopes: 0.1/0.03 = 3.33 then 0.3/0.04 = 7.5, increasing -> rejected
    s = StrategySpec(betas=(0.12, 0.15, 0.19), costs=(0.4, 0.3, 0.0))
    names = _names(check_assumptions(example1.params, s, PolicyConfig(0.2, 2.0)))
    assert "marginal_cost_decreasing" in names


def test_unsustainable_safest_strategy_is_rejected(example1):
    s = StrategySpec(betas=(0.1, 0.19), costs=(0.2, 0.0))  # betas[0] < sigma
    names = _names(check_assumptions(example1.params, s, example1.policy))
    assert "sigma<beta_1" in names


def test_misordered_menus_are_rejected(example1):
    s = StrategySpec(betas=(0.19, 0.15), costs=(0.2, 0.0))
    names = _names(check_assumptions(example1.params, s, example1.policy))
    assert "betas_increasing" in names
    s = StrategySpec(betas=(0.15, 0.19), costs=(0.0, 0.2))
    names = _names(check_assumptions(example1.params, s, example1.policy))
    assert "costs_decreasing" in names


def test_budget_at_breakpoint_is_flagged(example1):
    for cstar in (0.2, 0.2 + 5e-13, 0.0):
        names = _names(
            check_assumptions(
                example1.params, example1.strategies,
                PolicyConfig(cstar=cstar, upsilon=2.0),
            )
        )
        assert "BudgetAtBreakpoint" in names


def test_budget_and_gain_ranges(example1):
    names = _names(
        check_assumptions(
            example1.params, example1.strategies, PolicyConfig(0.3, 2.0)
        )
    )
    assert "0<cstar<ctilde_1" in names
    names = _names(
        check_assumptions(
            example1.params, example1.strategies, PolicyConfig(0.1, 0.0)
        )
    )
    assert "upsilon>0" in names


def test_cost_offsets_decrease_to_zero(three_strategy):
    ct = three_strategy.strategies.ctilde
    assert ct[-1] == 0.0
    assert all(ct[i] > ct[i + 1] for i in range(len(ct) - 1))
    assert all(v >= 0.0 for v in ct)


def test_strategy_spec_rejects_malformed_input():
    with pytest.raises(ValueError):
        StrategySpec(betas=(0.15,), costs=(0.2,))
    with pytest.raises(ValueError):
        StrategySpec(betas=(0.15, 0.19), costs=(0.2,))
    with pytest.raises(ValueError):
        StrategySpec(betas=(0.15, float("nan")), costs=(0.2, 0.0))
    with pytest.raises(ValueError):
        ModelParams(gamma=float("inf"), delta=0.005)


finite = st.floats(
    allow_nan=False, allow_infinity=False, min_value=-10.0, max_value=10.0
)


@settings(max_examples=200, deadline=None)
@given(
    gamma=finite, delta=finite, zeta=finite, theta=finite, psi=finite,
    b1=finite, b2=finite, c1=finite, c2=finite, cstar=finite, upsilon=finite,
)
def test_checking_is_total_and_idempotent(
    gamma, delta, zeta, theta, psi, b1, b2, c1, c2, cstar, upsilon
):
    """Any well-formed finite input yields a violation list, never an error,
    and validate() succeeds exactly when that list is empty."""
    params = ModelParams(gamma=gamma, delta=delta, zeta=zeta, theta=theta, psi=psi)
    strategies = StrategySpec(betas=(b1, b2), costs=(c1, c2))
    policy = PolicyConfig(cstar=cstar, upsilon=upsilon)
    first = check_assumptions(params, strategies, policy)
    second = check_assumptions(params, strategies, policy)
    assert [str(v) for v in first] == [str(v) for v in second]
    if first:
        with pytest.raises(ValidationError):
            validate(params, strategies, policy)
    else:
        assert validate(params, strategies, policy).policy is policy


def test_derived_rates_match_definitions():
    p = ModelParams(gamma=0.1, delta=0.005, zeta=0.003, theta=0.007, psi=0.011)
    assert math.isclose(p.g, 0.004)
    assert math.isclose(p.sigma_bar, 0.108)
    assert math.isclose(p.sigma, 0.112)
    assert math.isclose(p.omega_bar, 0.014)
    assert math.isclose(p.omega, 0.018)
