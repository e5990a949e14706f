"""Hyper-exponential jump-diffusion (HEJD) market model and contracts.

The risky asset is S_t = S_0 exp(X_t) where X is a Brownian motion with drift
plus compound-Poisson jumps whose size density is a two-sided mixture of
exponentials:

    f(y) = sum_i p_i xi_i exp(-xi_i y) 1{y>=0} + sum_j q_j eta_j exp(eta_j y) 1{y<0}

The drift is never a free parameter: it is pinned by the martingale condition
Phi_X(1) = r - delta on the Laplace exponent, so the discounted cum-dividend
asset is a martingale by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import PoleError, QuadratureError

__all__ = [
    "HejdModel",
    "DownOutStepSpec",
    "DualModelReport",
    "GeneratorConfig",
    "laplace_exponent",
    "laplace_exponent_derivative",
    "levy_exponent",
    "dual_model",
    "generator_apply",
]

_WEIGHT_SUM_TOL = 1e-12
_POLE_REL_TOL = 1e-14


def _as_float_tuple(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class HejdModel:
    """Immutable HEJD market parameters.

    Parameters are annual: risk-free rate ``r``, dividend yield ``delta``,
    diffusion volatility ``sigma`` (> 0), jump intensity ``lam`` (>= 0).
    ``up_weights``/``up_rates`` and ``down_weights``/``down_rates`` describe
    the exponential mixture; weights must sum to one across both sides, rates
    must be strictly increasing with ``up_rates[0] > 1`` (integrability of
    e^X) and ``down_rates[0] > 0``.  ``lam == 0`` requires empty mixtures and
    degenerates to Black-Scholes.
    """

    r: float
    delta: float
    sigma: float
    lam: float
    up_weights: tuple[float, ...] = ()
    up_rates: tuple[float, ...] = ()
    down_weights: tuple[float, ...] = ()
    down_rates: tuple[float, ...] = ()
    # numpy views of the mixture, precomputed once (hot path in root finding)
    _p: np.ndarray = field(init=False, repr=False, compare=False)
    _xi: np.ndarray = field(init=False, repr=False, compare=False)
    _q: np.ndarray = field(init=False, repr=False, compare=False)
    _eta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "up_weights", _as_float_tuple(self.up_weights))
        object.__setattr__(self, "up_rates", _as_float_tuple(self.up_rates))
        object.__setattr__(self, "down_weights", _as_float_tuple(self.down_weights))
        object.__setattr__(self, "down_rates", _as_float_tuple(self.down_rates))
        for name in ("r", "delta", "sigma", "lam"):
            object.__setattr__(self, name, float(getattr(self, name)))

        if not all(map(math.isfinite, (self.r, self.delta, self.sigma, self.lam))):
            raise ValueError("model scalars must be finite")
        if self.r < 0.0 or self.delta < 0.0:
            raise ValueError("r and delta must be non-negative")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be strictly positive")
        if self.lam < 0.0:
            raise ValueError("lam must be non-negative")
        if len(self.up_weights) != len(self.up_rates):
            raise ValueError("up_weights and up_rates must have equal length")
        if len(self.down_weights) != len(self.down_rates):
            raise ValueError("down_weights and down_rates must have equal length")

        if self.lam == 0.0:
            if self.up_weights or self.down_weights:
                raise ValueError("lam == 0 requires empty jump mixtures")
        else:
            if not (self.up_weights or self.down_weights):
                raise ValueError("lam > 0 requires a jump mixture")
            if any(w <= 0.0 for w in self.up_weights + self.down_weights):
                raise ValueError("mixture weights must be strictly positive")
            total = math.fsum(self.up_weights + self.down_weights)
            if abs(total - 1.0) > _WEIGHT_SUM_TOL:
                raise ValueError(f"mixture weights must sum to 1 (got {total!r})")
            if any(b <= a for a, b in zip(self.up_rates, self.up_rates[1:])):
                raise ValueError("up_rates must be strictly increasing")
            if any(b <= a for a, b in zip(self.down_rates, self.down_rates[1:])):
                raise ValueError("down_rates must be strictly increasing")
            if self.up_rates and self.up_rates[0] <= 1.0:
                raise ValueError("up_rates must exceed 1 (integrability of e^X)")
            if self.down_rates and self.down_rates[0] <= 0.0:
                raise ValueError("down_rates must be positive")

        object.__setattr__(self, "_p", np.asarray(self.up_weights, dtype=float))
        object.__setattr__(self, "_xi", np.asarray(self.up_rates, dtype=float))
        object.__setattr__(self, "_q", np.asarray(self.down_weights, dtype=float))
        object.__setattr__(self, "_eta", np.asarray(self.down_rates, dtype=float))

    @property
    def m(self) -> int:
        return len(self.up_rates)

    @property
    def n(self) -> int:
        return len(self.down_rates)

    @property
    def zeta(self) -> float:
        """Mean percentage jump size E[e^J - 1] (0 for the no-jump model)."""
        if self.m + self.n == 0:
            return 0.0
        return float(
            np.sum(self._p * self._xi / (self._xi - 1.0))
            + np.sum(self._q * self._eta / (self._eta + 1.0))
            - 1.0
        )

    @property
    def drift(self) -> float:
        """Martingale-consistent drift of the log-price."""
        return self.r - self.delta - self.lam * self.zeta - 0.5 * self.sigma**2

    @property
    def poles(self) -> tuple[float, ...]:
        """Poles of the Laplace exponent: the up rates and negated down rates."""
        return self.up_rates + tuple(-e for e in self.down_rates)

    def jump_density(self, y: float) -> float:
        """Mixture density of a single jump (0 everywhere when lam == 0)."""
        if self.m + self.n == 0:
            return 0.0
        if y >= 0.0:
            return float(np.sum(self._p * self._xi * np.exp(-self._xi * y)))
        return float(np.sum(self._q * self._eta * np.exp(self._eta * y)))


@dataclass(frozen=True)
class DownOutStepSpec:
    """Geometric down-and-out step call contract.

    Payoff at exercise time t: exp(knock_rate * (seasoning + occupation time
    below ``barrier``)) * (S_t - strike)^+.  ``knock_rate <= 0`` makes the
    barrier a soft knock-out; ``seasoning`` is occupation time already accrued
    before the valuation date.
    """

    strike: float
    barrier: float
    knock_rate: float = 0.0
    seasoning: float = 0.0

    def __post_init__(self) -> None:
        for name in ("strike", "barrier", "knock_rate", "seasoning"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(
            map(math.isfinite, (self.strike, self.barrier, self.knock_rate, self.seasoning))
        ):
            raise ValueError("contract parameters must be finite")
        if not 0.0 <= self.barrier <= self.strike:
            raise ValueError("need 0 <= barrier <= strike < inf")
        if self.knock_rate > 0.0:
            raise ValueError("knock_rate must be <= 0 (knock-out contract)")
        if self.seasoning < 0.0:
            raise ValueError("seasoning must be >= 0")


@dataclass(frozen=True)
class DualModelReport:
    """Dual market obtained from the put-call duality measure change.

    ``model`` carries the dual dynamics: r and delta exchange roles, the
    diffusion volatility is unchanged, and the jump measure maps through
    Pi_Y(dy) = e^{-y} Pi_X(-dy): down components (rate eta) become up
    components with rate eta + 1, up components (rate xi) become down
    components with rate xi - 1, and the total mass rescales by 1 + zeta.
    """

    model: HejdModel
    intensity: float


def _check_pole(model: HejdModel, theta: float) -> None:
    for pole in model.poles:
        if abs(theta - pole) <= _POLE_REL_TOL * max(1.0, abs(pole)):
            raise PoleError(f"theta={theta!r} is within tolerance of pole {pole!r}")


def _phi_raw(model: HejdModel, theta: float) -> float:
    """Phi without the pole guard; the root solver works legitimately inside
    the public exclusion zone (the subtraction rate - theta stays exact)."""
    value = model.drift * theta + 0.5 * model.sigma**2 * theta * theta
    if model.lam > 0.0:
        value += model.lam * (
            float(np.sum(model._p * model._xi / (model._xi - theta)))
            + float(np.sum(model._q * model._eta / (model._eta + theta)))
            - 1.0
        )
    return value


def _phi_prime_raw(model: HejdModel, theta: float) -> float:
    value = model.drift + model.sigma**2 * theta
    if model.lam > 0.0:
        value += model.lam * (
            float(np.sum(model._p * model._xi / (model._xi - theta) ** 2))
            - float(np.sum(model._q * model._eta / (model._eta + theta) ** 2))
        )
    return value


def laplace_exponent(model: HejdModel, theta: float) -> float:
    """Laplace exponent Phi(theta) = log E[e^{theta X_1}], extended to all
    real theta away from the mixture-rate poles."""
    theta = float(theta)
    _check_pole(model, theta)
    return _phi_raw(model, theta)


def laplace_exponent_derivative(model: HejdModel, theta: float) -> float:
    """d Phi / d theta, same domain as laplace_exponent."""
    theta = float(theta)
    _check_pole(model, theta)
    return _phi_prime_raw(model, theta)


def levy_exponent(model: HejdModel, theta: complex) -> complex:
    """Characteristic (Levy) exponent Psi(theta) = -log E[e^{i theta X_1}];
    satisfies Psi(-i theta) = -Phi(theta) on the strip of definition."""
    theta = complex(theta)
    value = -1j * model.drift * theta + 0.5 * model.sigma**2 * theta * theta
    if model.lam > 0.0:
        value -= model.lam * (
            complex(np.sum(model._p * model._xi / (model._xi - 1j * theta)))
            + complex(np.sum(model._q * model._eta / (model._eta + 1j * theta)))
            - 1.0
        )
    return value


def dual_model(model: HejdModel) -> DualModelReport:
    """Dual market of the put-call duality transform.

    The dual of the dual recovers the original model; the map is well defined
    because up rates exceed 1, so the dual down rates xi - 1 stay positive.
    """
    scale = 1.0 + model.zeta
    up_w = [q * e / ((e + 1.0) * scale) for q, e in zip(model.down_weights, model.down_rates)]
    up_r = [e + 1.0 for e in model.down_rates]
    down_w = [p * x / ((x - 1.0) * scale) for p, x in zip(model.up_weights, model.up_rates)]
    down_r = [x - 1.0 for x in model.up_rates]
    intensity = model.lam * scale
    dual = HejdModel(
        r=model.delta,
        delta=model.r,
        sigma=model.sigma,
        lam=intensity,
        up_weights=up_w,
        up_rates=up_r,
        down_weights=down_w,
        down_rates=down_r,
    )
    return DualModelReport(model=dual, intensity=intensity)


@dataclass(frozen=True)
class GeneratorConfig:
    """Numerical controls for generator_apply.

    ``fd_step`` is the five-point central-difference step in log-price.
    ``breakpoints`` are known kinks of the target function (log-price), passed
    to the adaptive quadrature.  ``growth_pos``/``growth_neg`` bound the
    growth of |V|: |V(x+y)| <= C e^{growth_pos*y} as y -> +inf and
    |V(x-u)| <= C e^{growth_neg*u} as u -> +inf; they control the analytic
    truncation of the jump integral together with ``density_floor``.
    """

    fd_step: float = 1e-4
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    density_floor: float = 1e-16
    breakpoints: tuple[float, ...] = ()
    growth_pos: float = 1.0
    growth_neg: float = 0.0


def _quad_component(
    integrand: Callable[[float], float],
    lo: float,
    hi: float,
    points: list[float],
    cfg: GeneratorConfig,
) -> float:
    result = integrate.quad(
        integrand,
        lo,
        hi,
        points=points or None,
        limit=200,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        full_output=1,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:  # warning message present
        raise QuadratureError(f"jump integral did not converge: {result[3]}")
    if abserr > 100.0 * max(cfg.abs_tol, cfg.rel_tol * abs(value)):
        raise QuadratureError(
            f"jump integral error estimate {abserr:.3e} above tolerance for value {value:.6e}"
        )
    return value


def generator_apply(
    model: HejdModel,
    V: Callable[[float], float],
    x: float,
    cfg: GeneratorConfig | None = None,
) -> float:
    """Apply the infinitesimal generator of the log-price process to V at x.

    Returns sigma^2/2 V'' + drift V' + lam * Int (V(x+y) - V(x)) f(y) dy with
    derivatives by five-point central differences and the jump integral by
    adaptive quadrature, one mixture component at a time, truncated where the
    component density (adjusted for the stated growth of V) falls below
    ``density_floor``.
    """
    cfg = cfg or GeneratorConfig()
    x = float(x)
    h = cfg.fd_step
    v0 = V(x)
    vp1, vm1, vp2, vm2 = V(x + h), V(x - h), V(x + 2 * h), V(x - 2 * h)
    d1 = (-vp2 + 8.0 * vp1 - 8.0 * vm1 + vm2) / (12.0 * h)
    d2 = (-vp2 + 16.0 * vp1 - 30.0 * v0 + 16.0 * vm1 - vm2) / (12.0 * h * h)
    out = 0.5 * model.sigma**2 * d2 + model.drift * d1

    if model.lam == 0.0:
        return out

    log_floor = -math.log(cfg.density_floor)
    jump = 0.0
    for p_i, xi_i in zip(model.up_weights, model.up_rates):
        decay = xi_i - cfg.growth_pos
        if decay <= 0.0:
            raise QuadratureError(
                f"up-jump tail not integrable: rate {xi_i} vs growth bound {cfg.growth_pos}"
            )
        y_max = log_floor / min(xi_i, decay)
        pts = sorted(b - x for b in cfg.breakpoints if 0.0 < b - x < y_max)
        integrand = lambda y, _xi=xi_i: (V(x + y) - v0) * _xi * math.exp(-_xi * y)
        val = _quad_component(integrand, 0.0, y_max, pts, cfg)
        val -= v0 * math.exp(-xi_i * y_max)  # exact tail of the -V(x) part
        jump += p_i * val
    for q_j, eta_j in zip(model.down_weights, model.down_rates):
        decay = eta_j - cfg.growth_neg
        if decay <= 0.0:
            raise QuadratureError(
                f"down-jump tail not integrable: rate {eta_j} vs growth bound {cfg.growth_neg}"
            )
        y_min = -log_floor / min(eta_j, decay)
        pts = sorted(b - x for b in cfg.breakpoints if y_min < b - x < 0.0)
        integrand = lambda y, _eta=eta_j: (V(x + y) - v0) * _eta * math.exp(_eta * y)
        val = _quad_component(integrand, y_min, 0.0, pts, cfg)
        val -= v0 * math.exp(eta_j * y_min)
        jump += q_j * val
    return out + model.lam * jump
