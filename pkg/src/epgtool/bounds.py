"""Anytime peak-infection certification.

The epidemic storage

    I_hat*log(I_hat/I) - (I_hat - I) + (a/2)*(R_hat - R)^2
        + (upsilon^2/2)*(B - betastar)^2

(endemic quantities taken at B) never exceeds the closed-loop Lyapunov
value, which itself never exceeds its initial level ``alpha``.  The largest
infectious fraction compatible with ``storage <= alpha`` therefore bounds
the trajectory peak.  For fixed B the level-set supremum reduces to a
one-dimensional convex problem solved by bisection; maximizing over a
transmission-rate grid yields the certified peak ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import OptimalAllocation, _endemic_raw, endemic_state
from .params import ModelParams

__all__ = [
    "BoundQuery",
    "BoundResult",
    "CertificationReport",
    "AllInfeasible",
    "epidemic_storage",
    "peak_ratio_at",
    "peak_bound",
    "certify_trajectory",
    "default_grid",
]

BISECTION_TOL = 1e-10
DEFAULT_GRID_SIZE = 30


class AllInfeasible(RuntimeError):
    """No grid point admits the requested storage level (defensive)."""


def epidemic_storage(I, R, B, alloc: OptimalAllocation,
                     params: ModelParams, upsilon: float):
    """Epidemic part of the Lyapunov function; elementwise on arrays.

    Nonnegative on the state space, and zero exactly at the target
    equilibrium ``(I_hat_betastar, R_hat_betastar, betastar)``.
    """
    I = np.asarray(I, dtype=float)
    if np.any(I <= 0.0):
        raise ValueError("I must be positive")
    I_hat, R_hat, a, _, _ = _endemic_raw(np.asarray(B, dtype=float), params)
    val = (
        I_hat * np.log(I_hat / I)
        - (I_hat - I)
        + 0.5 * a * (R_hat - np.asarray(R, dtype=float)) ** 2
        + 0.5 * upsilon ** 2 * (np.asarray(B, dtype=float) - alloc.betastar) ** 2
    )
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class BoundQuery:
    """Inputs of a peak-bound computation.

    ``alpha`` is the storage level (typically the Lyapunov value of the
    initial state); ``grid`` the transmission rates at which the per-rate
    convex problems are solved (defaults to ``grid_size`` equidistant points
    spanning the strategy range).
    """

    alloc: OptimalAllocation
    params: ModelParams
    upsilon: float
    alpha: float
    grid: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.size < 2:
            raise ValueError("grid must contain at least two points")
        object.__setattr__(self, "grid", grid)
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha!r}")


def default_grid(strategies, grid_size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Equidistant grid spanning ``[betas[0], betas[-1]]``."""
    return np.linspace(strategies.betas[0], strategies.betas[-1], grid_size)


@dataclass(frozen=True)
class BoundResult:
    """Outcome of :func:`peak_bound`.

    ``per_B`` pairs each grid rate with its peak ratio or ``None`` when the
    level is infeasible there; ``peak_ratio`` is the largest feasible value,
    attained at ``argmax_B``, and ``certified_peak`` the corresponding
    absolute bound on the infectious fraction.
    """

    per_B: tuple[tuple[float, float | None], ...]
    peak_ratio: float
    argmax_B: float
    certified_peak: float
    alpha: float
    upsilon: float

    def as_dict(self) -> dict:
        """JSON-ready mapping: grid, per-rate ratios (null = infeasible),
        the aggregated ratio, and the certified peak."""
        return {
            "upsilon": self.upsilon,
            "alpha": self.alpha,
            "grid": [B for B, _ in self.per_B],
            "per_B": [[B, r] for B, r in self.per_B],
            "peak_ratio": self.peak_ratio,
            "argmax_B": self.argmax_B,
            "certified_peak": self.certified_peak,
        }


def peak_ratio_at(query: BoundQuery, B: float) -> float | None:
    """Largest ``I / I_star`` on the storage level set at fixed ``B``.

    For fixed (I, B) the storage is quadratic in R, minimized at the clamp
    of ``R_hat`` into ``[0, 1 - I]``; substituting gives a convex function
    of I alone, minimized at ``I_hat``.  The supremum is the largest
    ``I in [I_hat, 1]`` keeping that function below ``alpha``, found by
    bisection to ``BISECTION_TOL``; returns ``None`` when even the minimum
    exceeds ``alpha``.
    """
    eq = endemic_state(float(B), query.params)
    I_hat, R_hat, a = eq.I_hat, eq.R_hat, eq.a
    base = 0.5 * query.upsilon ** 2 * (eq.B - query.alloc.betastar) ** 2
    alpha = query.alpha
    I_star = query.alloc.endemic.I_hat

    def g(I: float) -> float:
        pen = R_hat - (1.0 - I)
        pen = pen if pen > 0.0 else 0.0
        return I_hat * math.log(I_hat / I) + I - I_hat + 0.5 * a * pen * pen + base

    slack = alpha - g(I_hat)
    if slack < 0.0:
        return None
    if slack == 0.0:
        return I_hat / I_star
    if g(1.0) <= alpha:
        return 1.0 / I_star
    lo, hi = I_hat, 1.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if g(mid) <= alpha:
            lo = mid
        else:
            hi = mid
    return lo / I_star


def peak_bound(query: BoundQuery) -> BoundResult:
    """Maximize the per-rate peak ratios over the grid.

    Raises :class:`AllInfeasible` if no grid point is feasible, which cannot
    happen when the grid comes near ``betastar``.
    """
    per_B = tuple((float(B), peak_ratio_at(query, B)) for B in query.grid)
    feasible = [(B, r) for B, r in per_B if r is not None]
    if not feasible:
        raise AllInfeasible(
            f"no transmission rate on the grid admits level alpha={query.alpha!r}"
        )
    argmax_B, peak_ratio = max(feasible, key=lambda br: br[1])
    return BoundResult(
        per_B=per_B,
        peak_ratio=peak_ratio,
        argmax_B=argmax_B,
        certified_peak=peak_ratio * query.alloc.endemic.I_hat,
        alpha=query.alpha,
        upsilon=query.upsilon,
    )


@dataclass(frozen=True)
class CertificationReport:
    """Observed trajectory peak versus the certified bound."""

    observed_peak: float
    peak_time: float
    certified_peak: float
    margin: float
    passed: bool
    peak_ratio: float
    alpha: float

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"peak I(t) = {self.observed_peak:.6g} at t = {self.peak_time:.6g} d; "
            f"certified bound {self.certified_peak:.6g} "
            f"(ratio {self.peak_ratio:.4f}, level {self.alpha:.6g}); "
            f"margin {self.margin:+.3g}: {verdict}"
        )


def certify_trajectory(traj, result: BoundResult) -> CertificationReport:
    """Compare a simulated peak against a bound from the same configuration.

    Uses the full-resolution peak tracked during integration, not the
    sampled maximum.
    """
    margin = result.certified_peak - traj.observed_peak
    return CertificationReport(
        observed_peak=traj.observed_peak,
        peak_time=traj.observed_peak_time,
        certified_peak=result.certified_peak,
        margin=margin,
        passed=margin >= 0.0,
        peak_ratio=result.peak_ratio,
        alpha=result.alpha,
    )
