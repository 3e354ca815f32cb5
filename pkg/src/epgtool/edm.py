"""Evolutionary dynamics: revision protocols, mean dynamics, and the
storage/dissipation pair used in the stability analysis.

Agents revise strategies at pairwise-comparison rates that depend only on
positive payoff gaps: ``rate(i -> j) = phi_j(max(p_j - p_i, 0))`` with each
``phi_j`` nondecreasing, zero at zero, and capped at ``cap``.  For this
protocol class the mean dynamics admit the storage function

    S(x, p) = sum_i x_i sum_j Phi_j(max(p_j - p_i, 0)),

with ``Phi_j`` the antiderivative of ``phi_j``, whose payoff gradient equals
the mean vector field and whose decay rate along the flow (at frozen
payoffs) is the dissipation returned by :func:`dissipation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "SmithProtocol",
    "GeneralIPCProtocol",
    "NotIPC",
    "switch_rates",
    "mean_field",
    "best_response",
    "storage",
    "dissipation",
    "check_simplex",
]

BEST_RESPONSE_TOL = 1e-12
SIMPLEX_TOL = 1e-9


class NotIPC(TypeError):
    """Protocol does not expose the pairwise-comparison storage interface."""


@dataclass(frozen=True)
class SmithProtocol:
    """Capped-linear pairwise comparison: ``phi(g) = min(rate_gain*g, cap)``."""

    rate_gain: float = 0.1
    cap: float = 0.1

    def __post_init__(self):
        if not self.rate_gain > 0:
            raise ValueError(f"rate_gain must be positive, got {self.rate_gain!r}")
        if not self.cap > 0:
            raise ValueError(f"cap must be positive, got {self.cap!r}")

    def phi(self, j: int, gap: float) -> float:
        if gap <= 0.0:
            return 0.0
        return min(self.rate_gain * gap, self.cap)

    def phi_integral(self, j: int, gap: float) -> float:
        """Closed-form antiderivative of the capped-linear rate at ``gap``."""
        if gap <= 0.0:
            return 0.0
        knee = self.cap / self.rate_gain
        if gap <= knee:
            return 0.5 * self.rate_gain * gap * gap
        return self.cap * gap - self.cap * self.cap / (2.0 * self.rate_gain)


@dataclass(frozen=True)
class GeneralIPCProtocol:
    """Pairwise comparison with user-supplied rate maps ``phis[j]``.

    Each map must satisfy ``phi(0) = 0``, ``phi(g) > 0`` for ``g > 0``, be
    nondecreasing, and take values in ``[0, cap]``; only the first condition
    is checked here.  Storage antiderivatives are computed by composite
    Simpson quadrature with a fixed panel count, so they are deterministic.
    """

    phis: tuple[Callable[[float], float], ...]
    cap: float
    quadrature_panels: int = 256

    def __post_init__(self):
        object.__setattr__(self, "phis", tuple(self.phis))
        if not self.cap > 0:
            raise ValueError(f"cap must be positive, got {self.cap!r}")
        for j, phi in enumerate(self.phis):
            if phi(0.0) != 0.0:
                raise ValueError(f"phis[{j}](0) must be 0, got {phi(0.0)!r}")

    def phi(self, j: int, gap: float) -> float:
        if gap <= 0.0:
            return 0.0
        return self.phis[j](gap)

    def phi_integral(self, j: int, gap: float) -> float:
        if gap <= 0.0:
            return 0.0
        m = self.quadrature_panels
        xs = np.linspace(0.0, gap, 2 * m + 1)
        ys = np.array([self.phis[j](x) for x in xs])
        h = gap / (2 * m)
        return float(h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1::2].sum()
                                + 2.0 * ys[2:-1:2].sum()))


def check_simplex(x: Sequence[float], tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Return ``x`` as an array after checking it lies on the simplex."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -tol) or np.any(x > 1.0 + tol):
        raise ValueError(f"population state {x!r} has entries outside [0, 1]")
    if abs(float(x.sum()) - 1.0) > tol:
        raise ValueError(f"population state {x!r} does not sum to 1")
    return x


def switch_rates(proto, x, p) -> np.ndarray:
    """n-by-n matrix of revision rates; entry (i, j) is the i -> j rate.

    Diagonal entries are zero.  ``x`` is accepted for signature uniformity
    with state-dependent protocol families but unused by pairwise
    comparison protocols.
    """
    p = np.asarray(p, dtype=float)
    n = p.size
    T = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                T[i, j] = proto.phi(j, p[j] - p[i])
    return T


def mean_field(proto, x, p) -> np.ndarray:
    """Mean dynamics of the strategy shares: inflow minus outflow per strategy.

    Built from the antisymmetric net-flow matrix, so conservation holds at
    the term level: the 2n^2 signed flow terms cancel pairwise.  Components
    are correctly-rounded row sums; their total is exactly zero for n = 2
    and within one rounding per component otherwise.
    """
    x = np.asarray(x, dtype=float)
    T = switch_rates(proto, x, p)
    flow = x[:, None] * T          # flow[i, j]: mass rate moving i -> j
    net = flow.T - flow
    return np.array([math.fsum(row) for row in net])


def best_response(p, tol: float = BEST_RESPONSE_TOL) -> tuple[int, ...]:
    """Indices of maximal payoff entries (ties included within ``tol``)."""
    p = np.asarray(p, dtype=float)
    top = float(p.max())
    return tuple(int(i) for i in np.flatnonzero(p >= top - tol))


def _storage_per_strategy(proto, p) -> np.ndarray:
    """Vector whose k-th entry is ``sum_j Phi_j(max(p_j - p_k, 0))``.

    This is the gradient of :func:`storage` with respect to the population
    state.
    """
    if not hasattr(proto, "phi_integral"):
        raise NotIPC(
            f"{type(proto).__name__} has no storage antiderivative; only "
            "pairwise-comparison protocols are supported"
        )
    p = np.asarray(p, dtype=float)
    n = p.size
    out = np.zeros(n)
    for k in range(n):
        out[k] = sum(
            proto.phi_integral(j, p[j] - p[k]) for j in range(n) if j != k
        )
    return out


def storage(proto, x, p) -> float:
    """Nonnegative storage of the mean dynamics; zero iff the field is zero."""
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, _storage_per_strategy(proto, p)))


def dissipation(proto, x, p) -> float:
    """Decay rate of the storage along the mean dynamics at frozen payoffs.

    Equals ``-grad_x storage . mean_field``; nonnegative, and zero exactly
    where the mean field vanishes.
    """
    psi = _storage_per_strategy(proto, p)
    v = mean_field(proto, x, p)
    return -float(np.dot(psi, v))
