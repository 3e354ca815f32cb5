"""Shared oracles and random generators for the test suite.

Everything here is deliberately independent of the package's own closed
forms: equilibria come from a 1-D root bracket on the raw balance
equations, allocations from a brute-force simplex scan, and peak ratios
from a dense feasibility grid.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from epgtool import (
    ModelParams,
    PolicyConfig,
    StrategySpec,
    check_assumptions,
)


def endemic_by_root_finder(B, params, xtol=1e-14):
    """Solve the endemic balance equations directly, bypassing the quadratic.

    Substitutes the recovered-balance relation R = gamma*I / (omega - delta*I)
    into the infection balance and brackets the root in I on (0, 1).
    """
    gam, d, w, s = params.gamma, params.delta, params.omega, params.sigma

    def residual(I):
        R = gam * I / (w - d * I)
        return (B - s) - (B * (I + R) - d * I)

    I = brentq(residual, 1e-12, 1.0 - 1e-12, xtol=xtol)
    R = gam * I / (w - d * I)
    return I, R


def equilibrium_residuals(I, R, B, params):
    """Residuals of the two endemic balance equations (elementwise)."""
    gam, d, w, s = params.gamma, params.delta, params.omega, params.sigma
    r1 = (B - s) - (B * (I + R) - d * I)
    r2 = gam * I - w * R + d * R * I
    return r1, r2


def brute_force_allocation(strategies, cstar, steps=400):
    """Scan a fine simplex grid for the cheapest-transmission feasible mix.

    The budget constraint carries a 1e-12 slack so grid points that meet it
    exactly in real arithmetic are not dropped to rounding.
    """
    n = strategies.n
    betas = np.asarray(strategies.betas)
    ctilde = np.asarray(strategies.ctilde)
    budget = cstar + 1e-12
    best_x, best_B = None, np.inf
    if n == 2:
        for k in range(steps + 1):
            x = np.array([k / steps, 1.0 - k / steps])
            if ctilde @ x <= budget and betas @ x < best_B:
                best_x, best_B = x, betas @ x
    elif n == 3:
        for i in range(steps + 1):
            x1 = i / steps
            for j in range(steps + 1 - i):
                x2 = j / steps
                x = np.array([x1, x2, 1.0 - x1 - x2])
                if ctilde @ x <= budget and betas @ x < best_B:
                    best_x, best_B = x, betas @ x
    else:
        raise NotImplementedError("oracle covers n in {2, 3}")
    return best_x, best_B


def dense_grid_peak(B, alpha, alloc, params, upsilon, resolution=2000):
    """Largest grid-feasible I on the storage level set at fixed B.

    Feasibility of every (I, R) pair on a resolution x resolution grid over
    (0, 1] x [0, 1 - I] is checked directly against the storage value.
    Returns (I_max, quantum) where quantum is the I-grid spacing, or
    (None, quantum) if no grid point is feasible.
    """
    from epgtool import endemic_state

    eq = endemic_state(float(B), params)
    I_hat, R_hat, a = eq.I_hat, eq.R_hat, eq.a
    base = 0.5 * upsilon ** 2 * (B - alloc.betastar) ** 2
    Is = np.linspace(1.0 / resolution, 1.0, resolution)
    best = None
    for I in Is[::-1]:  # scan from the top; first feasible I is the max
        Rs = np.linspace(0.0, 1.0 - I, resolution)
        val = (
            I_hat * np.log(I_hat / I) - (I_hat - I)
            + 0.5 * a * (R_hat - Rs) ** 2 + base
        )
        if np.any(val <= alpha):
            best = float(I)
            break
    quantum = float(Is[1] - Is[0])
    return best, quantum


def random_bundle(rng, n_choices=(2, 3)):
    """Draw one parameter/strategy/policy triple satisfying every assumption.

    Rates are sampled near plausible per-day magnitudes and the strategy
    costs are built from strictly decreasing marginal slopes, so rejection
    is rare; resampling continues until the bundle validates.
    """
    while True:
        delta = rng.uniform(1e-4, 0.04)
        gamma = rng.uniform(delta * 1.5, 0.5)
        zeta = rng.uniform(0.0, 0.01)
        theta = rng.uniform(0.0, 0.01)
        psi = rng.uniform(delta * 1.2, 0.15)
        params = ModelParams(
            gamma=gamma, delta=delta, zeta=zeta, theta=theta, psi=psi
        )
        n = int(rng.choice(n_choices))
        b1 = params.sigma + rng.uniform(0.02, 0.2)
        gaps = rng.uniform(0.02, 0.1, size=n - 1)
        betas = tuple(np.concatenate([[b1], b1 + np.cumsum(gaps)]))
        # strictly decreasing marginal cost per unit of transmission cut
        slope_steps = rng.uniform(0.2, 2.0, size=n - 1)
        slopes = np.cumsum(slope_steps[::-1])[::-1]  # decreasing, positive
        cn = rng.uniform(0.0, 0.5)
        costs = [cn]
        for i in range(n - 2, -1, -1):
            costs.insert(0, costs[0] + slopes[i] * gaps[i])
        strategies = StrategySpec(betas=betas, costs=tuple(costs))
        ctilde1 = strategies.ctilde[0]
        cstar = rng.uniform(0.05, 0.95) * ctilde1
        if min(abs(cstar - ct) for ct in strategies.ctilde) < 1e-9:
            continue
        policy = PolicyConfig(cstar=cstar, upsilon=rng.uniform(0.2, 8.0))
        if not check_assumptions(params, strategies, policy):
            return params, strategies, policy


def random_simplex(rng, n):
    """Uniform Dirichlet(1) point on the n-simplex."""
    raw = rng.exponential(scale=1.0, size=n)
    return raw / raw.sum()
