from __future__ import annotations

from dataclasses import dataclass

import pytest

from epgtool import (
    EpgState,
    ModelParams,
    OptimalAllocation,
    PayoffMechanism,
    PolicyConfig,
    SmithProtocol,
    StrategySpec,
    ValidatedBundle,
    build_mechanism,
    endemic_state,
    optimal_allocation,
    validate,
)


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run setup shared across tests."""

    params: ModelParams
    strategies: StrategySpec
    policy: PolicyConfig
    bundle: ValidatedBundle
    alloc: OptimalAllocation
    mech: PayoffMechanism
    proto: SmithProtocol
    initial: EpgState


def make_scenario(upsilon=2.0, cstar=0.1, delta=0.005) -> Scenario:
    """Baseline two-strategy scenario: budget halved from the initial spend."""
    params = ModelParams(gamma=0.1, delta=delta, zeta=0.0, theta=0.0, psi=0.011)
    strategies = StrategySpec(betas=(0.15, 0.19), costs=(0.2, 0.0))
    policy = PolicyConfig(cstar=cstar, upsilon=upsilon)
    bundle = validate(params, strategies, policy)
    alloc = optimal_allocation(strategies, policy, params)
    mech = build_mechanism(alloc, strategies, policy, params)
    proto = SmithProtocol(rate_gain=0.1, cap=0.1)
    eq0 = endemic_state(0.15, params, strategies)
    initial = EpgState(I=eq0.I_hat, R=eq0.R_hat, x=(1.0, 0.0), q=0.0)
    return Scenario(
        params=params, strategies=strategies, policy=policy, bundle=bundle,
        alloc=alloc, mech=mech, proto=proto, initial=initial,
    )


@pytest.fixture(scope="session")
def example1() -> Scenario:
    return make_scenario()


@pytest.fixture(scope="session")
def three_strategy() -> Scenario:
    """A three-strategy variant exercising the off-support reward margin."""
    params = ModelParams(gamma=0.1, delta=0.005, zeta=0.0, theta=0.0, psi=0.011)
    strategies = StrategySpec(betas=(0.12, 0.15, 0.19), costs=(0.45, 0.25, 0.05))
    policy = PolicyConfig(cstar=0.3, upsilon=2.0)
    bundle = validate(params, strategies, policy)
    alloc = optimal_allocation(strategies, policy, params)
    mech = build_mechanism(alloc, strategies, policy, params)
    proto = SmithProtocol(rate_gain=0.1, cap=0.1)
    eq0 = endemic_state(0.12, params, strategies)
    initial = EpgState(I=eq0.I_hat, R=eq0.R_hat, x=(1.0, 0.0, 0.0), q=0.0)
    return Scenario(
        params=params, strategies=strategies, policy=policy, bundle=bundle,
        alloc=alloc, mech=mech, proto=proto, initial=initial,
    )
