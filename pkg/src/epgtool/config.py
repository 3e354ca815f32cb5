"""Run configuration: one JSON file per run, plus dotted-path overrides.

Schema (all keys optional unless noted; see README for units):

    {
      "params":     {"gamma", "delta", "zeta", "theta", "psi"},     # required
      "strategies": {"betas": [...], "costs": [...]},               # required
      "policy":     {"cstar", "upsilon", "offsupport_margin"},      # required
      "protocol":   {"kind": "smith", "rate_gain", "cap"},
      "integrator": {"step", "horizon", "output_stride", "track_population"},
      "initial":    {"kind": "endemic", "x" or "B", "q", "population"}
                  | {"kind": "explicit", "I", "R", "x", "q", "population"},
      "bounds":     {"grid_size", "alpha"}
    }

Overrides use ``section.key=value`` with JSON-parsed values, e.g.
``policy.upsilon=6`` or ``strategies.betas=[0.12,0.15,0.19]``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EpgState, IntegratorOptions
from .edm import SmithProtocol
from .equilibrium import OptimalAllocation, endemic_state, optimal_allocation
from .params import (
    ModelParams,
    PolicyConfig,
    StrategySpec,
    ValidatedBundle,
    validate,
)
from .payoff import PayoffMechanism, build_mechanism

__all__ = ["RunConfig", "ResolvedRun", "load_config", "apply_overrides", "resolve"]

_DEFAULTS = {
    "protocol": {"kind": "smith", "rate_gain": 0.1, "cap": 0.1},
    "integrator": {
        "step": 0.01,
        "horizon": 1500.0,
        "output_stride": 10,
        "track_population": False,
    },
    "initial": {"kind": "endemic", "q": 0.0, "population": None},
    "bounds": {"grid_size": 30, "alpha": None},
}


@dataclass
class RunConfig:
    """Raw (unvalidated) configuration mapping, with defaults filled in."""

    data: dict

    @property
    def horizon(self) -> float:
        return float(self.data["integrator"]["horizon"])


def load_config(path) -> RunConfig:
    """Load a JSON run configuration and fill defaults."""
    with open(path) as fh:
        raw = json.load(fh)
    return _from_mapping(raw)


def _from_mapping(raw: dict) -> RunConfig:
    data = copy.deepcopy(raw)
    for section, defaults in _DEFAULTS.items():
        merged = dict(defaults)
        merged.update(data.get(section, {}))
        data[section] = merged
    for section in ("params", "strategies", "policy"):
        if section not in data:
            raise KeyError(f"config is missing the required '{section}' section")
    return RunConfig(data=data)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.key=value`` overrides; values are parsed as JSON."""
    data = copy.deepcopy(cfg.data)
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key.path=value")
        dotted, _, raw_value = item.partition("=")
        keys = dotted.strip().split(".")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        node = data
        for key in keys[:-1]:
            node = node.setdefault(key, {})
        node[keys[-1]] = value
    return RunConfig(data=data)


@dataclass(frozen=True)
class ResolvedRun:
    """Everything needed to run: validated objects, mechanism, initial state."""

    bundle: ValidatedBundle
    alloc: OptimalAllocation
    mech: PayoffMechanism
    proto: SmithProtocol
    initial: EpgState
    integrator: IntegratorOptions
    horizon: float
    grid_size: int
    alpha: float | None
    config: dict = field(repr=False)


def _mix_for_rate(strategies: StrategySpec, B: float) -> tuple[float, ...]:
    """Shares mixing the adjacent strategies that bracket rate ``B``."""
    betas = strategies.betas
    if not betas[0] <= B <= betas[-1]:
        raise ValueError(f"B={B!r} outside strategy range")
    for i in range(strategies.n - 1):
        if betas[i] <= B <= betas[i + 1]:
            w = (betas[i + 1] - B) / (betas[i + 1] - betas[i])
            x = [0.0] * strategies.n
            x[i] = w
            x[i + 1] = 1.0 - w
            return tuple(x)
    raise AssertionError("unreachable")


def resolve(cfg: RunConfig) -> ResolvedRun:
    """Validate the configuration and build the runnable objects.

    Raises :class:`epgtool.params.ValidationError` with the complete list of
    violated assumptions when the configuration is invalid.
    """
    d = cfg.data
    params = ModelParams(**d["params"])
    strategies = StrategySpec(
        betas=tuple(d["strategies"]["betas"]),
        costs=tuple(d["strategies"]["costs"]),
    )
    policy = PolicyConfig(**d["policy"])
    bundle = validate(params, strategies, policy)

    proto_cfg = d["protocol"]
    kind = proto_cfg.get("kind", "smith")
    if kind != "smith":
        raise ValueError(
            f"unknown protocol kind {kind!r}; the configuration file supports "
            "'smith' (general pairwise-comparison protocols are library-only)"
        )
    proto = SmithProtocol(
        rate_gain=float(proto_cfg["rate_gain"]), cap=float(proto_cfg["cap"])
    )

    alloc = optimal_allocation(strategies, policy, params)
    mech = build_mechanism(alloc, strategies, policy, params)

    init_cfg = d["initial"]
    q0 = float(init_cfg.get("q", 0.0))
    pop0 = init_cfg.get("population")
    pop0 = None if pop0 is None else float(pop0)
    if init_cfg["kind"] == "endemic":
        x_given = init_cfg.get("x") is not None
        B_given = init_cfg.get("B") is not None
        if x_given and B_given:
            raise ValueError(
                "endemic initial state takes 'x' or 'B', not both "
                "(override the unused one to null)"
            )
        if x_given:
            x0 = tuple(float(v) for v in init_cfg["x"])
        elif B_given:
            x0 = _mix_for_rate(strategies, float(init_cfg["B"]))
        else:
            raise ValueError("endemic initial state needs 'x' or 'B'")
        B0 = float(np.dot(x0, strategies.betas))
        eq = endemic_state(B0, params, strategies)
        initial = EpgState(I=eq.I_hat, R=eq.R_hat, x=x0, q=q0, population=pop0)
    elif init_cfg["kind"] == "explicit":
        initial = EpgState(
            I=float(init_cfg["I"]),
            R=float(init_cfg["R"]),
            x=tuple(float(v) for v in init_cfg["x"]),
            q=q0,
            population=pop0,
        )
    else:
        raise ValueError(f"unknown initial-state kind {init_cfg['kind']!r}")

    integ = d["integrator"]
    options = IntegratorOptions(
        step=float(integ["step"]),
        output_stride=int(integ["output_stride"]),
        track_population=bool(integ["track_population"]),
    )
    if options.track_population and initial.population is None:
        raise ValueError("track_population requires initial.population")

    bounds_cfg = d["bounds"]
    alpha = bounds_cfg.get("alpha")
    return ResolvedRun(
        bundle=bundle,
        alloc=alloc,
        mech=mech,
        proto=proto,
        initial=initial,
        integrator=options,
        horizon=float(integ["horizon"]),
        grid_size=int(bounds_cfg["grid_size"]),
        alpha=None if alpha is None else float(alpha),
        config=d,
    )
