from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epgtool import (
    GeneralIPCProtocol,
    NotIPC,
    SmithProtocol,
    best_response,
    dissipation,
    mean_field,
    storage,
    switch_rates,
)
from helpers import random_simplex

SMITH = SmithProtocol(rate_gain=0.1, cap=0.1)


def test_equal_payoffs_give_zero_rates():
    T = switch_rates(SMITH, (0.5, 0.5), (-0.3, -0.3))
    assert np.all(T == 0.0)


def test_capped_linear_rate_values():
    T = switch_rates(SMITH, (1.0, 0.0), (0.0, 2.0))
    # gap 2 saturates the cap: min(0.1 * 2, 0.1) = 0.1
    assert T[0, 1] == 0.1
    assert T[1, 0] == 0.0
    assert T[0, 0] == 0.0 and T[1, 1] == 0.0
    T = switch_rates(SMITH, (1.0, 0.0), (0.0, 0.5))
    assert T[0, 1] == pytest.approx(0.05, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(
    p=st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=5),
    seed=st.integers(0, 2**32 - 1),
)
def test_rates_stay_within_cap(p, seed):
    rng = np.random.default_rng(seed)
    x = random_simplex(rng, len(p))
    T = switch_rates(SMITH, x, p)
    assert np.all(T >= 0.0)
    assert np.all(T <= SMITH.cap)


def test_mean_field_single_pair():
    v = mean_field(SMITH, (1.0, 0.0), (0.0, 2.0))
    assert v[0] == pytest.approx(-0.1, rel=1e-15)
    assert v[1] == pytest.approx(0.1, rel=1e-15)


def test_mean_field_zero_at_equal_payoffs():
    v = mean_field(SMITH, (0.3, 0.7), (1.0, 1.0))
    assert np.all(v == 0.0)


@settings(max_examples=150, deadline=None)
@given(
    p=st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=5),
    seed=st.integers(0, 2**32 - 1),
)
def test_mean_field_conserves_mass(p, seed):
    rng = np.random.default_rng(seed)
    n = len(p)
    x = random_simplex(rng, n)
    v = mean_field(SMITH, x, p)
    # term-level conservation is exact: the signed flow terms cancel pairwise
    T = switch_rates(SMITH, x, p)
    flow = x[:, None] * T
    assert math.fsum((flow.T - flow).ravel()) == 0.0
    # component sums carry at most one rounding per strategy
    if n == 2:
        assert math.fsum(v) == 0.0
    else:
        assert abs(math.fsum(v)) <= 1e-15


@settings(max_examples=100, deadline=None)
@given(
    p=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=5),
    seed=st.integers(0, 2**32 - 1),
)
def test_mean_field_points_inward_on_faces(p, seed):
    rng = np.random.default_rng(seed)
    n = len(p)
    x = random_simplex(rng, n)
    dead = int(rng.integers(0, n))
    x[dead] = 0.0
    x /= x.sum()
    v = mean_field(SMITH, x, p)
    assert v[dead] >= 0.0


def test_best_response_reports_ties():
    assert best_response((1.0, 1.0)) == (0, 1)
    assert best_response((0.0, 2.0)) == (1,)
    assert best_response((3.0, 3.0 - 1e-13, 0.0)) == (0, 1)


def test_mass_on_best_response_is_stationary():
    v = mean_field(SMITH, (0.0, 1.0), (0.0, 2.0))
    assert np.all(v == 0.0)


from hypothesis import assume


@settings(max_examples=150, deadline=None)
@given(
    p=st.lists(
        st.floats(-5, 5, allow_nan=False), min_size=2, max_size=5, unique=True
    ),
    seed=st.integers(0, 2**32 - 1),
)
def test_stationarity_iff_support_on_best_response(p, seed):
    # payoffs separated beyond the tie tolerance: gaps inside it would leave
    # a sub-1e-13 residual rate, which is exactly what the tolerance absorbs
    gaps = np.abs(np.subtract.outer(p, p))
    assume(float(np.min(gaps[gaps > 0])) > 1e-6)
    rng = np.random.default_rng(seed)
    n = len(p)
    best = best_response(p)
    # support inside the best-response face -> stationary
    x = np.zeros(n)
    weights = random_simplex(rng, len(best))
    for w, k in zip(weights, best):
        x[k] = w
    assert np.max(np.abs(mean_field(SMITH, x, p))) < 1e-14
    # any mass off the face -> strictly moving
    if len(best) < n:
        x = random_simplex(rng, n)  # interior, so off-face mass exists
        assert np.max(np.abs(mean_field(SMITH, x, p))) > 0.0


def test_storage_equal_payoffs_is_zero():
    assert storage(SMITH, (0.4, 0.6), (1.0, 1.0)) == 0.0


def test_storage_closed_form_beyond_cap_knee():
    # gap 2 exceeds cap/gain = 1: integral is cap*gap - cap^2/(2*gain)
    val = storage(SMITH, (1.0, 0.0), (0.0, 2.0))
    assert val == pytest.approx(0.1 * 2 - 0.01 / 0.2, rel=1e-15)  # 0.15
    # gap below the knee: quadratic branch
    val = storage(SMITH, (1.0, 0.0), (0.0, 0.5))
    assert val == pytest.approx(0.5 * 0.1 * 0.25, rel=1e-15)


@settings(max_examples=150, deadline=None)
@given(
    p=st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_storage_vanishes_exactly_with_the_field(p, seed):
    rng = np.random.default_rng(seed)
    x = random_simplex(rng, len(p))
    S = storage(SMITH, x, p)
    v = mean_field(SMITH, x, p)
    assert S >= 0.0
    if np.max(np.abs(v)) < 1e-15:
        assert S <= 1e-15
    else:
        assert S > 0.0


def test_general_protocol_quadrature_matches_smith_closed_form():
    general = GeneralIPCProtocol(
        phis=(lambda g: min(0.1 * g, 0.1), lambda g: min(0.1 * g, 0.1)),
        cap=0.1,
    )
    for x, p in [
        ((1.0, 0.0), (0.0, 2.0)),
        ((0.3, 0.7), (0.5, -0.2)),
        ((0.5, 0.5), (0.0, 0.6)),
    ]:
        assert storage(general, x, p) == pytest.approx(
            storage(SMITH, x, p), rel=1e-8
        )
        assert dissipation(general, x, p) == pytest.approx(
            dissipation(SMITH, x, p), rel=1e-8
        )


def test_general_protocol_rejects_nonzero_at_origin():
    with pytest.raises(ValueError):
        GeneralIPCProtocol(phis=(lambda g: 0.1, lambda g: 0.0), cap=0.1)


def test_non_ipc_protocol_raises():
    class Imitation:
        def phi(self, j, gap):
            return 0.0

    with pytest.raises(NotIPC):
        storage(Imitation(), (0.5, 0.5), (0.0, 1.0))
    with pytest.raises(NotIPC):
        dissipation(Imitation(), (0.5, 0.5), (0.0, 1.0))


def test_dissipation_zero_at_equal_payoffs():
    assert dissipation(SMITH, (0.5, 0.5), (2.0, 2.0)) == 0.0


@settings(max_examples=150, deadline=None)
@given(
    p=st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=4),
    seed=st.integers(0, 2**32 - 1),
)
def test_dissipation_positive_off_equilibrium(p, seed):
    rng = np.random.default_rng(seed)
    x = random_simplex(rng, len(p))
    P = dissipation(SMITH, x, p)
    v = mean_field(SMITH, x, p)
    assert P >= 0.0
    if np.max(np.abs(v)) > 1e-12:
        assert P > 0.0


def test_dissipation_grows_with_payoff_scaling():
    rng = np.random.default_rng(99)
    for _ in range(300):
        n = int(rng.integers(2, 5))
        x = random_simplex(rng, n)
        p = rng.uniform(-2, 2, size=n)
        base = dissipation(SMITH, x, p)
        for scale in (1.0, 2.0, 5.0):
            assert dissipation(SMITH, x, scale * p) >= base - 1e-12


def test_storage_payoff_gradient_equals_mean_field():
    """Directional payoff derivative of the storage matches u . field."""
    rng = np.random.default_rng(7)
    h = 1e-6
    for _ in range(200):
        n = int(rng.integers(2, 5))
        x = random_simplex(rng, n)
        p = rng.uniform(-2, 2, size=n)
        u = rng.uniform(-1, 1, size=n)
        fd = (storage(SMITH, x, p + h * u) - storage(SMITH, x, p - h * u)) / (2 * h)
        v = mean_field(SMITH, x, p)
        assert abs(fd - float(u @ v)) <= 1e-6


def test_storage_state_gradient_gives_dissipation():
    """Moving the state along the field drains the storage at the
    dissipation rate."""
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(200):
        n = int(rng.integers(2, 5))
        x = random_simplex(rng, n)
        p = rng.uniform(-2, 2, size=n)
        v = mean_field(SMITH, x, p)
        fd = (storage(SMITH, x + h * v, p) - storage(SMITH, x - h * v, p)) / (2 * h)
        P = dissipation(SMITH, x, p)
        assert abs(fd + P) <= 1e-6 * max(1.0, P)
