"""Shared fixtures: reference markets, contracts, and a seeded model factory."""

from __future__ import annotations

import numpy as np
import pytest

from hejdstep import DownOutStepSpec, HejdModel

REFERENCE = dict(r=0.05, delta=0.07, sigma=0.2, K=100.0, L=95.0, RHO=-26.34, T=1.0)


@pytest.fixture(scope="session")
def kou_model() -> HejdModel:
    """Double-exponential market of the lambda-ladder grid (lambda = 1)."""
    return HejdModel(
        r=0.05, delta=0.07, sigma=0.2, lam=1.0,
        up_weights=(0.7,), up_rates=(25.0,),
        down_weights=(0.3,), down_rates=(50.0,),
    )


@pytest.fixture(scope="session")
def bs_model() -> HejdModel:
    """Pure-diffusion degenerate market (empty mixture)."""
    return HejdModel(r=0.05, delta=0.07, sigma=0.2, lam=0.0)


@pytest.fixture(scope="session")
def step_spec() -> DownOutStepSpec:
    return DownOutStepSpec(strike=100.0, barrier=95.0, knock_rate=-26.34)


@pytest.fixture(scope="session")
def standard_spec() -> DownOutStepSpec:
    return DownOutStepSpec(strike=100.0, barrier=95.0, knock_rate=0.0)


@pytest.fixture(scope="session")
def barrier_spec() -> DownOutStepSpec:
    return DownOutStepSpec(strike=100.0, barrier=95.0, knock_rate=-5.0e7)


def random_model(rng: np.random.Generator, max_terms: int = 3, min_delta: float = 0.02) -> HejdModel:
    """Valid HEJD model with up to max_terms mixture components per side.

    Rates are kept apart by at least 1.0 so the interlacing brackets stay
    well separated; the smallest up rate stays above 1.5.
    """
    m = int(rng.integers(1, max_terms + 1))
    n = int(rng.integers(1, max_terms + 1))
    xi = np.sort(rng.uniform(1.5, 60.0, size=m))
    while np.any(np.diff(xi) < 1.0):
        xi = np.sort(rng.uniform(1.5, 60.0, size=m))
    eta = np.sort(rng.uniform(0.8, 60.0, size=n))
    while np.any(np.diff(eta) < 1.0):
        eta = np.sort(rng.uniform(0.8, 60.0, size=n))
    raw = rng.uniform(0.2, 1.0, size=m + n)
    weights = raw / raw.sum()
    return HejdModel(
        r=float(rng.uniform(0.0, 0.08)),
        delta=float(rng.uniform(min_delta, 0.10)),
        sigma=float(rng.uniform(0.15, 0.45)),
        lam=float(rng.uniform(0.1, 8.0)),
        up_weights=tuple(weights[:m]),
        up_rates=tuple(xi),
        down_weights=tuple(weights[m:]),
        down_rates=tuple(eta),
    )


def random_spec(rng: np.random.Generator) -> DownOutStepSpec:
    strike = 100.0
    return DownOutStepSpec(
        strike=strike,
        barrier=float(rng.uniform(0.82, 0.97) * strike),
        knock_rate=float(-rng.uniform(0.5, 60.0)),
    )
