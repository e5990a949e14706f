"""Real roots of Phi(theta) = alpha with interlacing brackets.

For alpha > 0 the equation has exactly m+n+2 real roots: one positive root in
each interval cut by the up rates, (0, xi_1), (xi_1, xi_2), ..., (xi_m, inf),
and one negative root in each interval cut by the negated down rates,
(-eta_1, 0), ..., (-inf, -eta_n).  Each root is isolated by bracketed
bisection on its interval and polished with safeguarded Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, ConvergenceError
from .model import HejdModel, _phi_prime_raw, _phi_raw

__all__ = ["RootSet", "find_roots"]

_MAX_ITER = 200
_POLE_OFFSET_FRAC = 1e-9  # initial interior offset as a fraction of the bracket
_DOUBLING_CAP = 2.0**60


@dataclass(frozen=True, eq=False)
class RootSet:
    """Roots of Phi(theta) = alpha.

    ``betas`` are the m+1 positive roots in increasing order (beta_s sits
    between the up-rate poles xi_{s-1} and xi_s).  ``gammas`` are the n+1
    negative roots ordered from the one closest to zero outward:
    0 > gammas[0] > -eta_1 > gammas[1] > ... > gammas[n] > -inf.
    """

    alpha: float
    betas: np.ndarray
    gammas: np.ndarray
    max_residual: float

    def validate(self, model: HejdModel, residual_tol: float | None = None) -> None:
        """Check count, strict interlacing with the poles, and residuals.

        The default residual tolerance is 1e-10 * max(1, alpha), relaxed only
        by the double-precision conditioning floor |Phi'(root)| * ulp(root)
        (binding for roots pinned against a pole by very large alpha).
        """
        m, n = model.m, model.n
        if len(self.betas) != m + 1 or len(self.gammas) != n + 1:
            raise BracketError("root count does not match mixture size")
        xi = model.up_rates
        for s, beta in enumerate(self.betas):
            lo = 0.0 if s == 0 else xi[s - 1]
            hi = xi[s] if s < m else math.inf
            if not lo < beta < hi:
                raise BracketError(f"beta[{s}]={beta} escapes ({lo}, {hi})")
        eta = model.down_rates
        for u, gamma in enumerate(self.gammas):
            hi = 0.0 if u == 0 else -eta[u - 1]
            lo = -eta[u] if u < n else -math.inf
            if not lo < gamma < hi:
                raise BracketError(f"gamma[{u}]={gamma} escapes ({lo}, {hi})")
        tol = residual_tol if residual_tol is not None else 1e-10 * max(1.0, self.alpha)
        for root in list(self.betas) + list(self.gammas):
            resid = abs(_phi_raw(model, root) - self.alpha)
            floor = 4.0 * abs(_phi_prime_raw(model, root)) * math.ulp(abs(root))
            if resid > max(tol, floor):
                raise ConvergenceError(
                    f"residual {resid:.3e} at root {root!r} exceeds tolerance {tol:.3e}"
                )


def _bisect_newton(model: HejdModel, alpha: float, lo: float, hi: float) -> float:
    """One root of Phi - alpha in (lo, hi), f(lo) < 0 < f(hi) or reversed."""
    f = lambda t: _phi_raw(model, t) - alpha
    fa, fb = f(lo), f(hi)
    if fa == 0.0:
        return lo
    if fb == 0.0:
        return hi
    if fa * fb > 0.0:
        raise BracketError(f"no sign change in ({lo}, {hi}) for alpha={alpha}")
    a, b = lo, hi
    x = 0.5 * (a + b)
    tol = 1e-12 * max(1.0, alpha)
    best_x, best_f = x, math.inf
    for _ in range(_MAX_ITER):
        fx = f(x)
        if abs(fx) < abs(best_f):
            best_x, best_f = x, fx
        if fx == 0.0:
            return x
        if (fx < 0.0) == (fa < 0.0):
            a = x
        else:
            b = x
        width = b - a
        if width <= 2.0 * math.ulp(max(abs(a), abs(b))):
            break
        # Newton step once the bracket is tight enough for it to be safe
        took_newton = False
        if width < 0.125 * (hi - lo):
            dfx = _phi_prime_raw(model, x)
            if dfx != 0.0:
                xn = x - fx / dfx
                if a < xn < b:
                    x = xn
                    took_newton = True
        if not took_newton:
            x = 0.5 * (a + b)
        if abs(fx) <= tol and width <= 1e-9 * max(1.0, abs(x)):
            break
    resid = abs(best_f)
    floor = 4.0 * abs(_phi_prime_raw(model, best_x)) * math.ulp(abs(best_x))
    if resid > max(tol, floor):
        raise ConvergenceError(
            f"root polish stalled at residual {resid:.3e} in ({lo}, {hi}), alpha={alpha}"
        )
    return best_x


def _pole_side_point(
    model: HejdModel,
    alpha: float,
    pole: float,
    direction: float,
    want_positive: bool,
    init_offset: float,
) -> float:
    """Point pole + direction*d where Phi - alpha has the requested sign.

    The limit sign at the pole is known (the mixture term blows up), but a
    vanishing intensity can shrink the region carrying that sign to a sliver;
    the offset halves until the sign shows, down to a few ulps of the pole.
    """
    floor = 4.0 * math.ulp(max(abs(pole), 1.0))
    d = init_offset
    while d >= floor:
        theta = pole + direction * d
        val = _phi_raw(model, theta) - alpha
        if val == 0.0 or (val > 0.0) == want_positive:
            return theta
        d *= 0.5
    raise BracketError(
        f"no point of the required sign next to pole {pole} for alpha={alpha} "
        "(root indistinguishable from the pole at double precision)"
    )


def _interior_root(model: HejdModel, alpha: float, lo: float, hi: float) -> float:
    """Root in a bounded interlacing interval.

    At a pole endpoint the exponent diverges: to -inf just above an up-rate
    pole and just below a down-rate pole, to +inf on the other sides.  At a
    zero endpoint f(0) = -alpha < 0 exactly.
    """
    gap = hi - lo
    if lo == 0.0:
        a = 0.0
    else:
        # lo is an up-rate pole (beta side, limit -inf) or a negated
        # down-rate pole (gamma side, limit +inf)
        a = _pole_side_point(model, alpha, lo, +1.0, want_positive=lo < 0.0,
                             init_offset=_POLE_OFFSET_FRAC * gap)
    if hi == 0.0:
        b = 0.0
    else:
        b = _pole_side_point(model, alpha, hi, -1.0, want_positive=hi > 0.0,
                             init_offset=_POLE_OFFSET_FRAC * gap)
    return _bisect_newton(model, alpha, a, b)


def _outer_root(model: HejdModel, alpha: float, pole: float, positive: bool) -> float:
    """Outermost root beyond the last pole, bracketed by geometric doubling
    (the sigma^2 theta^2 / 2 term dominates far out)."""
    f = lambda t: _phi_raw(model, t) - alpha
    sigma2 = model.sigma**2
    # diffusion-only estimate of the far root, used to seed the doubling
    disc = model.drift**2 + 2.0 * sigma2 * alpha
    seed = (-model.drift + math.sqrt(disc)) / sigma2
    if positive:
        lo = 0.0 if pole == 0.0 else _pole_side_point(
            model, alpha, pole, +1.0, want_positive=False,
            init_offset=_POLE_OFFSET_FRAC * max(1.0, pole),
        )
        hi = max(2.0 * abs(lo), seed, 1.0)
        while f(hi) < 0.0:
            hi *= 2.0
            if hi > _DOUBLING_CAP:
                raise BracketError("outer bracket doubling cap reached (positive side)")
        return _bisect_newton(model, alpha, lo, hi)
    hi = 0.0 if pole == 0.0 else _pole_side_point(
        model, alpha, pole, -1.0, want_positive=False,
        init_offset=_POLE_OFFSET_FRAC * max(1.0, abs(pole)),
    )
    lo = min(2.0 * hi if hi < 0.0 else -1.0, -max(seed, 1.0))
    while f(lo) < 0.0:
        lo *= 2.0
        if -lo > _DOUBLING_CAP:
            raise BracketError("outer bracket doubling cap reached (negative side)")
    return _bisect_newton(model, alpha, lo, hi)


def find_roots(model: HejdModel, alpha: float) -> RootSet:
    """All m+n+2 real roots of Phi(theta) = alpha for alpha > 0."""
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError("alpha must be strictly positive")

    betas: list[float] = []
    edges = (0.0,) + model.up_rates
    for i in range(model.m):
        betas.append(_interior_root(model, alpha, edges[i], edges[i + 1]))
    betas.append(_outer_root(model, alpha, edges[-1], positive=True))

    gammas: list[float] = []
    edges = (0.0,) + tuple(-e for e in model.down_rates)
    for j in range(model.n):
        gammas.append(_interior_root(model, alpha, edges[j + 1], edges[j]))
    gammas.append(_outer_root(model, alpha, edges[-1], positive=False))

    resid = max(
        abs(_phi_raw(model, t) - alpha) for t in betas + gammas
    )
    roots = RootSet(
        alpha=alpha,
        betas=np.asarray(betas, dtype=float),
        gammas=np.asarray(gammas, dtype=float),
        max_residual=resid,
    )
    roots.validate(model)
    return roots
