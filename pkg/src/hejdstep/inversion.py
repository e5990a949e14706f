"""Gaver-Stehfest inversion of maturity-randomized quantities.

The randomized European price is the Laplace-Carson transform in maturity of
the calendar-time price, so inverting it on the real axis with the
Gaver-Stehfest weights recovers the time-domain price.  American prices and
early-exercise premiums are not exact transforms, but they carry the same
structure and are inverted with the same weights; the known small bias of
this heuristic is reported, never corrected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .errors import NoBoundaryError, OrderError
from .model import DownOutStepSpec, HejdModel
from .pricing import (
    eval_american_mr,
    eval_eep_split_mr,
    eval_european_mr,
    seasoned_price,
    solve_american_mr,
    solve_european_mr,
)

__all__ = [
    "GsConfig",
    "gs_weights",
    "gs_invert",
    "price_time_domain",
    "price_summary",
    "QUANTITIES",
    "DEFAULT_GS_ORDER",
]

DEFAULT_GS_ORDER = 7
QUANTITIES = ("euro", "amer", "eep", "eep_diffusion", "eep_jump")


@dataclass(frozen=True)
class GsConfig:
    """Inversion order and derived weights.

    ``weights_exact`` holds the weights as exact rationals (the alternating
    binomial sums cancel massively; at order 10 the weights exceed 1e10 and
    float accumulation alone could not certify that they sum to one).
    ``weights`` are their float roundings, used in the inversion sum.
    """

    order: int
    weights: tuple[float, ...]
    weights_exact: tuple[Fraction, ...]

    def weight_sum(self) -> float:
        """Sum of the weights computed in exact arithmetic (must be 1)."""
        return float(sum(self.weights_exact, Fraction(0)))


@lru_cache(maxsize=None)
def gs_weights(order: int) -> GsConfig:
    """Gaver-Stehfest weights of the given order (1..10), exact evaluation
    of the alternating binomial sums in rational arithmetic."""
    if not isinstance(order, int) or isinstance(order, bool):
        raise OrderError(f"order must be an integer, got {order!r}")
    if not 1 <= order <= 10:
        raise OrderError(f"order must lie in [1, 10], got {order}")
    exact: list[Fraction] = []
    n_fact = math.factorial(order)
    for k in range(1, 2 * order + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, order) + 1):
            acc += (
                Fraction(j ** (order + 1), n_fact)
                * math.comb(order, j)
                * math.comb(2 * j, j)
                * math.comb(j, k - j)
            )
        exact.append(Fraction((-1) ** (order + k), k) * acc)
    return GsConfig(order=order, weights=tuple(float(z) for z in exact), weights_exact=tuple(exact))


def gs_invert(F: Callable[[float], float], t: float, cfg: GsConfig | None = None) -> float:
    """Invert the transform F at time t: sum_k zeta_k F(k log2 / t).

    Evaluations run in ascending k and the weighted sum is accumulated with
    fsum, so the result is deterministic regardless of how F parallelizes
    internally.  Errors raised by F are re-raised annotated with the
    offending abscissa.
    """
    t = float(t)
    if not t > 0.0:
        raise ValueError("t must be strictly positive")
    cfg = cfg or gs_weights(DEFAULT_GS_ORDER)
    log2_over_t = math.log(2.0) / t
    terms = []
    for k, zeta_k in enumerate(cfg.weights, start=1):
        theta_k = k * log2_over_t
        try:
            value = F(theta_k)
        except Exception as exc:
            exc.args = tuple(exc.args) + (
                f"while evaluating the transform at theta={theta_k:.9g} (k={k}, t={t})",
            )
            raise
        terms.append(zeta_k * value)
    return math.fsum(terms)


def _transform_function(
    model: HejdModel, spec: DownOutStepSpec, x: float, quantity: str
) -> Callable[[float], float]:
    if quantity == "euro":
        return lambda th: eval_european_mr(solve_european_mr(model, spec, th), x)
    if quantity == "amer":
        return lambda th: eval_american_mr(solve_american_mr(model, spec, th), x)

    def premium_part(th: float, index: int) -> float:
        total, diff, jump = eval_eep_split_mr(solve_american_mr(model, spec, th), x)
        return (total, diff, jump)[index]

    if quantity == "eep":
        return lambda th: premium_part(th, 0)
    if quantity == "eep_diffusion":
        return lambda th: premium_part(th, 1)
    if quantity == "eep_jump":
        return lambda th: premium_part(th, 2)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


def price_time_domain(
    model: HejdModel,
    spec: DownOutStepSpec,
    t: float,
    x: float,
    quantity: str = "euro",
    cfg: GsConfig | None = None,
) -> float:
    """Calendar-time value of the selected quantity at maturity t and spot x.

    Composes the randomized solve/eval at each abscissa with the inversion
    and applies the seasoning factor for already-accrued occupation time.
    The American-family quantities use the heuristic inversion of the
    randomized quantities (they are not strict transforms).
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    if quantity != "euro" and model.delta <= 0.0:
        raise NoBoundaryError("American-family quantities need a positive dividend yield")
    x = float(x)
    if x < 0.0:
        raise ValueError("spot must be non-negative")
    if x == 0.0:
        return 0.0
    raw = gs_invert(_transform_function(model, spec, x, quantity), t, cfg)
    return seasoned_price(raw, spec)


def price_summary(
    model: HejdModel,
    spec: DownOutStepSpec,
    t: float,
    x: float,
    cfg: GsConfig | None = None,
) -> dict[str, float]:
    """euro/amer/eep values plus the premium share of the American price
    (eep_pct) and the diffusion share of the premium (dc_pct), in percent.

    The randomized solves are cached per abscissa, so the five inversions
    share all linear-system work.
    """
    out = {q: price_time_domain(model, spec, t, x, q, cfg) for q in QUANTITIES}
    out["eep_pct"] = 100.0 * out["eep"] / out["amer"] if out["amer"] > 0.0 else math.nan
    out["dc_pct"] = 100.0 * out["eep_diffusion"] / out["eep"] if out["eep"] != 0.0 else math.nan
    return out
