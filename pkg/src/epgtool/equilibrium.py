"""Endemic-equilibrium algebra of the normalized SIRS model.

For a transmission rate B the endemic pair (I_hat, R_hat) solves

    B - sigma = B*(I_hat + R_hat) - delta*I_hat
    0         = gamma*I_hat - omega*R_hat + delta*R_hat*I_hat

which reduces to a quadratic in I_hat.  The smaller quadratic root is the
valid one; it is evaluated in the cancellation-free form
``2*omega*(B - sigma) / (b + sqrt(disc))`` so the delta -> 0 limit is exact.
The module also provides the B-derivatives of the equilibrium (a 2x2 linear
solve), the budget-optimal strategy mix, and a uniform positive lower bound
on I_hat over the strategy range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .params import (
    BudgetAtBreakpoint,
    BREAKPOINT_TOL,
    ModelParams,
    PolicyConfig,
    StrategySpec,
)

__all__ = [
    "EquilibriumPoint",
    "OptimalAllocation",
    "OutOfRange",
    "DegenerateDiscriminant",
    "SingularSystem",
    "endemic_state",
    "endemic_derivatives",
    "endemic_curve",
    "optimal_allocation",
    "endemic_infection_floor",
]

SINGULAR_DET_TOL = 1e-14


class OutOfRange(ValueError):
    """Transmission rate outside the domain where the algebra is valid."""


class DegenerateDiscriminant(ArithmeticError):
    """Quadratic discriminant <= 0; signals corrupted parameters."""


class SingularSystem(ArithmeticError):
    """The 2x2 sensitivity system is numerically singular."""


@dataclass(frozen=True)
class EquilibriumPoint:
    """Endemic equilibrium at transmission rate ``B``.

    ``a`` is the recovered-deviation weight ``B / (gamma + delta*R_hat)``;
    ``b`` and ``disc`` are the quadratic coefficient and discriminant. The
    B-derivatives are ``None`` until filled by :func:`endemic_derivatives`.
    """

    B: float
    I_hat: float
    R_hat: float
    a: float
    b: float
    disc: float
    dI_dB: float | None = None
    dR_dB: float | None = None
    da_dB: float | None = None


def _quadratic(B, params: ModelParams):
    """Coefficient b and discriminant of the endemic quadratic (ufunc-safe)."""
    d, w, s, gam = params.delta, params.omega, params.sigma, params.gamma
    b = gam * B + w * (B - d) + d * (B - s)
    disc = b * b - 4.0 * d * w * (B - d) * (B - s)
    return b, disc


def _endemic_raw(B, params: ModelParams):
    """(I_hat, R_hat, a, b, disc) at B; works elementwise on arrays."""
    d, w, s, gam = params.delta, params.omega, params.sigma, params.gamma
    b, disc = _quadratic(B, params)
    sq = np.sqrt(disc)
    # smaller root of the quadratic, written without the b - sqrt(disc)
    # cancellation so it stays exact as delta -> 0
    I_hat = 2.0 * w * (B - s) / (b + sq)
    R_hat = (1.0 - s / B) - (1.0 - d / B) * I_hat
    a = B / (gam + d * R_hat)
    return I_hat, R_hat, a, b, disc


def endemic_state(
    B: float,
    params: ModelParams,
    strategies: StrategySpec | None = None,
) -> EquilibriumPoint:
    """Closed-form endemic equilibrium at transmission rate ``B``.

    ``B`` must exceed ``params.sigma``; when ``strategies`` is given, ``B``
    must additionally lie in ``[betas[0], betas[-1]]``.

    Raises
    ------
    OutOfRange
        If ``B`` is outside the admissible range.
    DegenerateDiscriminant
        If the quadratic discriminant is not positive (cannot happen for
        validated parameters).
    """
    B = float(B)
    if strategies is not None:
        lo, hi = strategies.betas[0], strategies.betas[-1]
        if not lo <= B <= hi:
            raise OutOfRange(f"B={B!r} outside strategy range [{lo!r}, {hi!r}]")
    if not B > params.sigma:
        raise OutOfRange(f"B={B!r} must exceed sigma={params.sigma!r}")
    _, disc = _quadratic(B, params)
    if not disc > 0.0:
        raise DegenerateDiscriminant(
            f"discriminant {disc!r} at B={B!r}; parameters violate the "
            "standing assumptions"
        )
    I_hat, R_hat, a, b, disc = _endemic_raw(B, params)
    return EquilibriumPoint(
        B=B, I_hat=float(I_hat), R_hat=float(R_hat), a=float(a),
        b=float(b), disc=float(disc),
    )


def endemic_derivatives(
    eq: EquilibriumPoint, params: ModelParams
) -> EquilibriumPoint:
    """Fill the B-derivatives of an equilibrium point.

    (dI_dB, dR_dB) solves the linearized equilibrium system

        [ B - delta            B                ] [dI_dB]   [1 - I_hat - R_hat]
        [ gamma + delta*R_hat  -(omega-delta*I) ] [dR_dB] = [0               ]

    and ``da_dB = (gamma + delta*(R_hat - B*dR_dB)) / (gamma + delta*R_hat)^2``.
    """
    d, w, gam = params.delta, params.omega, params.gamma
    B, I_hat, R_hat = eq.B, eq.I_hat, eq.R_hat
    det = -(B - d) * (w - d * I_hat) - B * (gam + d * R_hat)
    if abs(det) < SINGULAR_DET_TOL:
        raise SingularSystem(
            f"sensitivity system determinant {det!r} at B={B!r}"
        )
    rhs = 1.0 - I_hat - R_hat
    dI = -(w - d * I_hat) * rhs / det
    dR = -(gam + d * R_hat) * rhs / det
    denom = gam + d * R_hat
    da = (gam + d * (R_hat - B * dR)) / (denom * denom)
    return replace(eq, dI_dB=dI, dR_dB=dR, da_dB=da)


def endemic_curve(B: np.ndarray, params: ModelParams) -> dict[str, np.ndarray]:
    """Vectorized endemic quantities over an array of transmission rates.

    Returns arrays ``I_hat``, ``R_hat``, ``a``, ``dI_dB``, ``dR_dB``,
    ``da_dB`` (same shape as ``B``).  No range checks beyond ``B > sigma``.
    """
    B = np.asarray(B, dtype=float)
    if np.any(B <= params.sigma):
        raise OutOfRange("every B must exceed sigma")
    d, w, gam = params.delta, params.omega, params.gamma
    I_hat, R_hat, a, _, _ = _endemic_raw(B, params)
    det = -(B - d) * (w - d * I_hat) - B * (gam + d * R_hat)
    rhs = 1.0 - I_hat - R_hat
    dI = -(w - d * I_hat) * rhs / det
    dR = -(gam + d * R_hat) * rhs / det
    da = (gam + d * (R_hat - B * dR)) / (gam + d * R_hat) ** 2
    return {
        "I_hat": I_hat, "R_hat": R_hat, "a": a,
        "dI_dB": dI, "dR_dB": dR, "da_dB": da,
    }


@dataclass(frozen=True)
class OptimalAllocation:
    """Budget-optimal strategy mix and the endemic state it induces.

    ``xstar`` has at most two nonzero entries, at adjacent (0-based) indices
    ``istar`` and ``istar + 1``; ``betastar`` is the induced average
    transmission rate, and ``endemic`` the equilibrium point at ``betastar``
    (with derivatives filled).
    """

    xstar: tuple[float, ...]
    betastar: float
    istar: int
    endemic: EquilibriumPoint


def optimal_allocation(
    strategies: StrategySpec,
    policy: PolicyConfig,
    params: ModelParams,
) -> OptimalAllocation:
    """Cheapest-transmission mix meeting the budget, and its endemic state.

    Locates the adjacent pair with ``ctilde[istar+1] < cstar < ctilde[istar]``
    and interpolates: the minimizer of average transmission subject to the
    cost budget puts all mass on that pair.
    """
    ctilde = strategies.ctilde
    cstar = policy.cstar
    istar = None
    for i in range(strategies.n - 1):
        if abs(cstar - ctilde[i]) <= BREAKPOINT_TOL:
            raise BudgetAtBreakpoint(cstar, i)
        if ctilde[i + 1] < cstar < ctilde[i]:
            istar = i
            break
    if abs(cstar - ctilde[-1]) <= BREAKPOINT_TOL:
        raise BudgetAtBreakpoint(cstar, strategies.n - 1)
    if istar is None:
        raise OutOfRange(
            f"cstar={cstar!r} outside (0, {ctilde[0]!r}); no interior mix"
        )
    weight = (cstar - ctilde[istar + 1]) / (ctilde[istar] - ctilde[istar + 1])
    x = [0.0] * strategies.n
    x[istar] = weight
    x[istar + 1] = 1.0 - weight
    betastar = float(np.dot(x, strategies.betas))
    eq = endemic_derivatives(
        endemic_state(betastar, params, strategies), params
    )
    return OptimalAllocation(
        xstar=tuple(x), betastar=betastar, istar=istar, endemic=eq
    )


def endemic_infection_floor(
    strategies: StrategySpec, params: ModelParams
) -> float:
    """Uniform positive lower bound on I_hat over the strategy range.

    Evaluates the smaller quadratic root with the coefficient taken at the
    largest transmission rate and the discriminant deficit at the smallest,
    which under the standing assumptions under-estimates I_hat for every B
    in ``[betas[0], betas[-1]]``.
    """
    d, w, gam, s = params.delta, params.omega, params.gamma, params.sigma
    b_lo, b_hi = strategies.betas[0], strategies.betas[-1]
    bstar = gam * b_hi + w * (b_hi - d) + d * (b_hi - s)
    delta_star = bstar - math.sqrt(
        bstar * bstar - 4.0 * d * w * (b_lo - d) * (b_lo - s)
    )
    return delta_star / (2.0 * d * (b_hi - d))
