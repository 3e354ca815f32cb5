"""Closed-loop integration of the epidemic population game.

State ``Y = (I, R, x, q)``: infectious and recovered fractions, strategy
shares, and the payoff-mechanism state.  The vector field couples the
normalized SIRS flow (written in deviations from the endemic pair at the
current average transmission rate ``B``), the mean revision dynamics driven
by payoffs ``q*betas + r_o``, and the designed feedback for ``q``.

Integration is fixed-step explicit RK4 so reruns are bit-identical.  After
each step the strategy shares are re-projected onto the simplex
(clip-and-renormalize, rounding noise only) and the infectious fraction is
floored away from zero; violations beyond ``PROJECTION_TOL`` abort with
:class:`StepRejected`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds as _bounds
from . import edm as _edm
from .equilibrium import _endemic_raw
from .payoff import PayoffMechanism

__all__ = [
    "EpgState",
    "IntegratorOptions",
    "Trajectory",
    "LyapunovSeries",
    "StepRejected",
    "state_derivative",
    "simulate",
    "lyapunov_value",
    "lyapunov_series",
    "write_csv",
    "CSV_FLOAT_FORMAT",
]

PROJECTION_TOL = 1e-9
I_FLOOR = 1e-12
CSV_FLOAT_FORMAT = "%.17g"


class StepRejected(RuntimeError):
    """A step left the admissible state space beyond projection tolerances."""

    def __init__(self, t: float, detail: str):
        self.t = t
        super().__init__(f"step rejected at t={t:.6g} d: {detail}; reduce the step size")


@dataclass(frozen=True)
class EpgState:
    """Closed-loop state: fractions (I, R), shares x, mechanism state q.

    ``population`` optionally carries the absolute population size, which is
    tracked observationally (it does not feed back into the dynamics).
    """

    I: float
    R: float
    x: tuple[float, ...]
    q: float
    population: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if not self.I > 0.0:
            raise ValueError(f"I={self.I!r} must be positive")
        if self.I + self.R > 1.0 + PROJECTION_TOL or self.R < -PROJECTION_TOL:
            raise ValueError(f"(I, R)=({self.I!r}, {self.R!r}) not in the state space")
        _edm.check_simplex(self.x)
        if self.population is not None and not self.population > 0.0:
            raise ValueError(f"population={self.population!r} must be positive")


@dataclass(frozen=True)
class IntegratorOptions:
    """Fixed-step RK4 settings.

    ``step`` is the step size in days, ``output_stride`` the number of steps
    between recorded samples, and ``track_population`` enables the
    observational population-size equation.
    """

    step: float = 0.01
    output_stride: int = 10
    track_population: bool = False

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step!r}")
        if self.output_stride < 1:
            raise ValueError("output_stride must be at least 1")


def _make_rhs(mech: PayoffMechanism, proto, track_population: bool):
    """Plain-float vector field for the inner loop.

    Works on a list ``[I, R, x..., q(, N)]``; avoids numpy per-call overhead,
    which dominates at 1e5+ steps.  The endemic closed forms are evaluated
    on their smooth extension (no range checks); invalid stage states
    surface as math-domain errors that :func:`simulate` converts to
    :class:`StepRejected`.
    """
    params = mech.params
    betas = mech.strategies.betas
    r_o = mech.r_o
    n = len(betas)
    d, w, gam, s = params.delta, params.omega, params.gamma, params.sigma
    g_rate = params.g
    ups2 = mech.upsilon ** 2
    bstar = mech.alloc.betastar
    phi = proto.phi

    def rhs(y: list[float]) -> list[float]:
        I, R, q = y[0], y[1], y[2 + n]
        B = 0.0
        for k in range(n):
            B += betas[k] * y[2 + k]
        # endemic pair and derivatives at B (smaller quadratic root,
        # cancellation-free form)
        b = gam * B + w * (B - d) + d * (B - s)
        sq = math.sqrt(b * b - 4.0 * d * w * (B - d) * (B - s))
        I_hat = 2.0 * w * (B - s) / (b + sq)
        R_hat = (1.0 - s / B) - (1.0 - d / B) * I_hat
        det = -(B - d) * (w - d * I_hat) - B * (gam + d * R_hat)
        free = 1.0 - I_hat - R_hat
        dI_dB = -(w - d * I_hat) * free / det
        dR_dB = -(gam + d * R_hat) * free / det
        denom = gam + d * R_hat
        a = B / denom
        da_dB = (gam + d * (R_hat - B * dR_dB)) / (denom * denom)

        i_dev = I_hat - I
        r_dev = R_hat - R
        dI = (B * r_dev + (B - d) * i_dev) * I
        dR = (w - d * I) * r_dev - (gam + d * R_hat) * i_dev

        p = [q * betas[k] + r_o[k] for k in range(n)]
        flow = [[0.0] * n for _ in range(n)]
        for i in range(n):
            xi = y[2 + i]
            for j in range(n):
                if i != j:
                    gap = p[j] - p[i]
                    if gap > 0.0:
                        flow[i][j] = xi * phi(j, gap)
        dx = [0.0] * n
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += flow[j][i] - flow[i][j]
            dx[i] = acc

        dq = (
            math.log(I / I_hat) * dI_dB
            - ups2 * (B - bstar)
            - 0.5 * (2.0 * a * dR_dB + r_dev * da_dB) * r_dev
        )
        out = [dI, dR, *dx, dq]
        if track_population:
            out.append((g_rate - d * I) * y[3 + n])
        return out

    return rhs


def state_derivative(state: EpgState, mech: PayoffMechanism, proto) -> np.ndarray:
    """Time derivative of the packed state ``[I, R, x..., q(, N)]``."""
    track = state.population is not None
    y = [state.I, state.R, *state.x, state.q]
    if track:
        y.append(state.population)
    return np.array(_make_rhs(mech, proto, track)(y))


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of a closed-loop run plus derived series.

    Derived per sample: average transmission rate ``B``, payoffs ``p`` and
    rewards ``r``, instantaneous cost ``r . x``, its running time average,
    the epidemic storage, the protocol storage, and their sum ``lyapunov``.
    ``observed_peak`` is the maximum infectious fraction at full step
    resolution (not just at samples).
    """

    times: np.ndarray
    I: np.ndarray
    R: np.ndarray
    x: np.ndarray
    q: np.ndarray
    B: np.ndarray
    p: np.ndarray
    r: np.ndarray
    cost: np.ndarray
    avg_cost: np.ndarray
    epi_storage: np.ndarray
    proto_storage: np.ndarray
    lyapunov: np.ndarray
    population: np.ndarray | None
    observed_peak: float
    observed_peak_time: float
    mech: PayoffMechanism = field(repr=False)
    proto: object = field(repr=False)
    options: IntegratorOptions = field(repr=False)

    def __len__(self) -> int:
        return len(self.times)

    def state_at(self, k: int) -> EpgState:
        return EpgState(
            I=float(self.I[k]),
            R=float(self.R[k]),
            x=tuple(self.x[k]),
            q=float(self.q[k]),
            population=None if self.population is None else float(self.population[k]),
        )


def simulate(
    initial: EpgState,
    horizon: float,
    mech: PayoffMechanism,
    proto,
    options: IntegratorOptions = IntegratorOptions(),
) -> Trajectory:
    """Integrate the closed loop for ``horizon`` days.

    Deterministic for a fixed configuration: fixed-step RK4 with purely
    sequential float arithmetic.  Raises :class:`StepRejected` when a step
    violates the state-space invariants beyond projection tolerances (the
    projection itself only repairs rounding-level noise).
    """
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    h = options.step
    stride = options.output_stride
    n_steps = int(round(horizon / h))
    if abs(n_steps * h - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError(
            f"horizon {horizon!r} is not an integer number of steps of {h!r}"
        )
    track = options.track_population
    if track and initial.population is None:
        raise ValueError("track_population requires an initial population size")

    params = mech.params
    betas = mech.strategies.betas
    rstar = mech.rstar
    n = len(betas)
    rhs = _make_rhs(mech, proto, track)

    y = [initial.I, initial.R, *initial.x, initial.q]
    if track:
        y.append(initial.population)
    dim = len(y)
    sixth = h / 6.0

    def cost_of(y: list[float]) -> float:
        c = 0.0
        for k in range(n):
            c += (y[2 + n] * betas[k] + rstar[k]) * y[2 + k]
        return c

    rec_t = [0.0]
    rec_y = [list(y)]
    rec_cost = [cost_of(y)]
    rec_avg = [cost_of(y)]  # running average at t=0 defaults to the spot cost
    cost_integral = 0.0
    prev_cost = rec_cost[0]
    peak_I, peak_t = y[0], 0.0

    for step in range(1, n_steps + 1):
        t_next = step * h
        try:
            k1 = rhs(y)
            y2 = [y[i] + 0.5 * h * k1[i] for i in range(dim)]
            k2 = rhs(y2)
            y3 = [y[i] + 0.5 * h * k2[i] for i in range(dim)]
            k3 = rhs(y3)
            y4 = [y[i] + h * k3[i] for i in range(dim)]
            k4 = rhs(y4)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise StepRejected(t_next, f"stage evaluation failed ({exc})") from exc
        y = [
            y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(dim)
        ]

        # project x back onto the simplex; only rounding noise is repaired
        xsum = 0.0
        for k in range(n):
            xk = y[2 + k]
            if xk < 0.0:
                if xk < -PROJECTION_TOL:
                    raise StepRejected(t_next, f"x[{k}]={xk!r} left the simplex")
                y[2 + k] = 0.0
                xk = 0.0
            xsum += xk
        if abs(xsum - 1.0) > PROJECTION_TOL:
            raise StepRejected(t_next, f"sum(x)={xsum!r} drifted off 1")
        if xsum != 1.0:
            for k in range(n):
                y[2 + k] /= xsum
        if y[0] < I_FLOOR:
            if y[0] < -PROJECTION_TOL:
                raise StepRejected(t_next, f"I={y[0]!r} went negative")
            y[0] = I_FLOOR
        if y[1] < 0.0:
            if y[1] < -PROJECTION_TOL:
                raise StepRejected(t_next, f"R={y[1]!r} went negative")
            y[1] = 0.0
        if y[0] + y[1] > 1.0 + PROJECTION_TOL:
            raise StepRejected(t_next, f"I+R={y[0] + y[1]!r} exceeded 1")

        if y[0] > peak_I:
            peak_I, peak_t = y[0], t_next
        c = cost_of(y)
        cost_integral += 0.5 * h * (prev_cost + c)
        prev_cost = c
        if step % stride == 0:
            rec_t.append(t_next)
            rec_y.append(list(y))
            rec_cost.append(c)
            rec_avg.append(cost_integral / t_next)

    times = np.array(rec_t)
    Y = np.array(rec_y)
    I_s, R_s, q_s = Y[:, 0], Y[:, 1], Y[:, 2 + n]
    x_s = Y[:, 2:2 + n]
    pop = Y[:, 3 + n] if track else None
    B_s = x_s @ np.asarray(betas)
    p_s = np.outer(q_s, betas) + np.asarray(mech.r_o)
    r_s = np.outer(q_s, betas) + np.asarray(rstar)
    epi = _bounds.epidemic_storage(
        I_s, R_s, B_s, mech.alloc, params, mech.upsilon
    )
    proto_s = np.array(
        [_edm.storage(proto, x_s[k], p_s[k]) for k in range(len(times))]
    )
    return Trajectory(
        times=times, I=I_s, R=R_s, x=x_s, q=q_s, B=B_s, p=p_s, r=r_s,
        cost=np.array(rec_cost), avg_cost=np.array(rec_avg),
        epi_storage=np.asarray(epi), proto_storage=proto_s,
        lyapunov=np.asarray(epi) + proto_s,
        population=pop,
        observed_peak=peak_I, observed_peak_time=peak_t,
        mech=mech, proto=proto, options=options,
    )


def lyapunov_value(state: EpgState, mech: PayoffMechanism, proto) -> float:
    """Closed-loop Lyapunov value: epidemic storage plus protocol storage."""
    B = float(np.dot(state.x, mech.strategies.betas))
    epi = _bounds.epidemic_storage(
        state.I, state.R, B, mech.alloc, mech.params, mech.upsilon
    )
    return float(epi) + _edm.storage(proto, state.x, mech.payoffs(state.q))


@dataclass(frozen=True)
class LyapunovSeries:
    """Sampled Lyapunov value, its finite-difference slope, and the decrease
    bound ``-dissipation - (B - delta)*i_dev^2 - a*(omega - delta*I)*r_dev^2``.

    ``dvalue_dt`` holds central differences at interior samples (endpoints
    are NaN).  ``violations`` lists ``(index, time, excess)`` where the slope
    exceeds the bound by more than ``fd_tol``.
    """

    times: np.ndarray
    value: np.ndarray
    dvalue_dt: np.ndarray
    decrease_bound: np.ndarray
    fd_tol: float
    violations: tuple[tuple[int, float, float], ...]


def lyapunov_series(traj: Trajectory, fd_tol: float | None = None) -> LyapunovSeries:
    """Differentiate the sampled Lyapunov value and check its decrease bound.

    Bound violations are reported, never raised.  The default tolerance
    ``1e-6 * max(1, value[0])`` absorbs the central-difference error at the
    default sampling stride for runs that start near the endemic curve;
    steep transients sampled coarsely can exceed it by discretization alone,
    in which case record at a finer ``output_stride`` before reading
    anything into the findings.
    """
    L = traj.lyapunov
    t = traj.times
    if fd_tol is None:
        fd_tol = 1e-6 * max(1.0, abs(float(L[0])))
    dL = np.full_like(L, np.nan)
    if len(L) >= 3:
        dL[1:-1] = (L[2:] - L[:-2]) / (t[2:] - t[:-2])

    params = traj.mech.params
    curve = np.asarray(traj.B, dtype=float)
    I_hat, R_hat, a, _, _ = _endemic_raw(curve, params)
    i_dev = I_hat - traj.I
    r_dev = R_hat - traj.R
    diss = np.array(
        [
            _edm.dissipation(traj.proto, traj.x[k], traj.p[k])
            for k in range(len(t))
        ]
    )
    bound = (
        -diss
        - (curve - params.delta) * i_dev ** 2
        - a * (params.omega - params.delta * traj.I) * r_dev ** 2
    )
    violations = []
    for k in range(1, len(t) - 1):
        excess = dL[k] - bound[k]
        if excess > fd_tol:
            violations.append((k, float(t[k]), float(excess)))
    return LyapunovSeries(
        times=t, value=L, dvalue_dt=dL, decrease_bound=bound,
        fd_tol=fd_tol, violations=tuple(violations),
    )


def write_csv(traj: Trajectory, path) -> None:
    """Write the trajectory as CSV.

    Fixed column order: ``t, I, R, x1..xn, q, B, cost, avg_cost, L`` with a
    trailing ``N`` column when the population size was tracked.  Floats are
    rendered with ``CSV_FLOAT_FORMAT`` so identical runs produce identical
    bytes.
    """
    n = traj.x.shape[1]
    header = ["t", "I", "R"] + [f"x{k + 1}" for k in range(n)] + [
        "q", "B", "cost", "avg_cost", "L",
    ]
    cols = [traj.times, traj.I, traj.R] + [traj.x[:, k] for k in range(n)] + [
        traj.q, traj.B, traj.cost, traj.avg_cost, traj.lyapunov,
    ]
    if traj.population is not None:
        header.append("N")
        cols.append(traj.population)
    fmt = CSV_FLOAT_FORMAT
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(fmt % v for v in row) + "\n")
