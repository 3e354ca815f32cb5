"""The dynamic payoff mechanism: reward offsets and the stabilizing feedback.

The planner pays reward ``r = q*betas + rstar``; net of intrinsic costs the
payoff vector is ``p = q*betas + r_o`` with ``r_o = rstar - costs``.  The
scalar mechanism state ``q`` evolves as ``qdot(I, R, x, q)``, chosen as the
negative sensitivity of the epidemic storage (see :mod:`epgtool.bounds`)
with respect to the average transmission rate, which makes the combined
storage a Lyapunov function of the closed loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import OptimalAllocation, endemic_derivatives, endemic_state
from .params import ModelParams, PolicyConfig, StrategySpec

__all__ = [
    "PayoffMechanism",
    "EpidemicStateOutOfDomain",
    "build_mechanism",
]


class EpidemicStateOutOfDomain(ValueError):
    """Epidemic state outside (0, 1] x [0, 1]; the feedback is undefined."""


@dataclass(frozen=True)
class PayoffMechanism:
    """Reward schedule plus the feedback law for the mechanism state ``q``.

    On the support of the optimal mix (and everywhere when n = 2) the reward
    equals the cost offset ``ctilde``, so every supported strategy nets the
    same payoff ``-costs[-1]`` at q = 0; off-support rewards sit strictly
    below their offsets by the policy margin.
    """

    rstar: tuple[float, ...]
    r_o: tuple[float, ...]
    upsilon: float
    alloc: OptimalAllocation
    params: ModelParams
    strategies: StrategySpec

    def payoffs(self, q: float) -> np.ndarray:
        """Net payoff vector ``q*betas + r_o``."""
        return q * np.asarray(self.strategies.betas) + np.asarray(self.r_o)

    def rewards(self, q: float) -> np.ndarray:
        """Gross reward vector ``q*betas + rstar``."""
        return q * np.asarray(self.strategies.betas) + np.asarray(self.rstar)

    def qdot_at_B(self, I: float, R: float, B: float, q: float = 0.0) -> float:
        """Feedback rate for ``q`` given the average transmission rate ``B``.

        Returns

            log(I / I_hat_B) * dI_dB - upsilon^2 * (B - betastar)
            - 0.5 * (2*a_B*dR_dB + (R_hat_B - R)*da_dB) * (R_hat_B - R)

        which equals minus the B-sensitivity of the epidemic storage.  The
        current design does not use ``q``; it stays in the signature because
        the mechanism state is part of the closed-loop state.
        """
        if not I > 0.0:
            raise EpidemicStateOutOfDomain(f"I={I!r} must be positive")
        if I > 1.0 or R < 0.0 or R > 1.0:
            raise EpidemicStateOutOfDomain(f"(I, R)=({I!r}, {R!r}) outside domain")
        eq = endemic_derivatives(
            endemic_state(B, self.params, self.strategies), self.params
        )
        r_dev = eq.R_hat - R
        grad_r = 0.5 * (2.0 * eq.a * eq.dR_dB + r_dev * eq.da_dB)
        return (
            math.log(I / eq.I_hat) * eq.dI_dB
            - self.upsilon ** 2 * (B - self.alloc.betastar)
            - grad_r * r_dev
        )

    def qdot(self, I: float, R: float, x, q: float = 0.0) -> float:
        """Feedback rate for ``q`` at population state ``x``."""
        B = float(np.dot(np.asarray(x, dtype=float), self.strategies.betas))
        return self.qdot_at_B(I, R, B, q)


def build_mechanism(
    alloc: OptimalAllocation,
    strategies: StrategySpec,
    policy: PolicyConfig,
    params: ModelParams,
) -> PayoffMechanism:
    """Construct the reward schedule for a validated configuration.

    Supported strategies (and all strategies when n = 2) receive reward
    equal to their cost offset; unsupported ones are offset-minus-margin so
    adopting them is strictly unattractive at equilibrium.
    """
    ctilde = strategies.ctilde
    n = strategies.n
    margin = policy.offsupport_margin
    rstar = []
    for i in range(n):
        if n == 2 or alloc.xstar[i] > 0.0:
            rstar.append(ctilde[i])
        else:
            rstar.append(ctilde[i] - margin)
    r_o = tuple(rs - c for rs, c in zip(rstar, strategies.costs))
    return PayoffMechanism(
        rstar=tuple(rstar),
        r_o=r_o,
        upsilon=policy.upsilon,
        alloc=alloc,
        params=params,
        strategies=strategies,
    )
