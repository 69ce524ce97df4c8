"""Characteristic functions of noise and PPP interference, conditioned on r0.

Each interferer contributes sqrt(G E0) r^-alpha z with z = h s circularly
symmetric complex Gaussian of power sigma0, so the real part of z is
N(0, sigma0/2) and E cos(t Re z) = exp(-sigma0 t^2 / 4). Integrating that
over a Poisson annulus gives log-CFs of the form

    lambda p pi [R_hi^2 T(R_hi) - R_lo^2 T(R_lo)],
    T(R) = 2F2(1/2, -1/a; 1/2, 1 - 1/a; -G E0 sigma0 w^2 / (4 R^(2a))) - 1.

Three interchangeable routes evaluate this: ``closed`` (the 2F2 above via
:mod:`specfun`), ``quadrature`` (direct radial integral, the reference) and
``fast`` (vectorized incomplete-gamma form used inside the APEP integrals).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import specfun
from .errors import ParameterError
from .model import AntennaPattern, GainDistribution, LinkBudget, NetworkParams, gain_distribution

ROUTES = ("fast", "closed", "quadrature")
RADIAL_QUAD = specfun.QuadratureConfig(rel_tol=1e-11, abs_tol=1e-300, max_subdivisions=5_000)


@dataclass(frozen=True)
class CfContext:
    params: NetworkParams
    pattern: AntennaPattern
    budget: LinkBudget
    serving_distance: float
    gains: GainDistribution = field(default=None)

    def __post_init__(self):
        if not self.serving_distance >= 0:
            raise ParameterError(f"serving_distance must be >= 0, got {self.serving_distance}")
        if self.gains is None:
            object.__setattr__(self, "gains", gain_distribution(self.pattern))

    def classes(self):
        """(gain, class density) for each thinned interferer PPP."""
        lam = self.params.lambda_bs
        return [(g, lam * p) for _, g, p in self.gains.items()]


def cf_noise(w, budget: LinkBudget):
    w = np.asarray(w, dtype=float)
    out = np.exp(-w * w * budget.noise_level / 4.0)
    return float(out) if out.ndim == 0 else out


def _argument_scale(gain: float, budget: LinkBudget) -> float:
    """G E0 sigma0 / 4, so that the hypergeometric argument is -scale w^2 / R^(2a)."""
    return gain * budget.symbol_energy * budget.fading_power / 4.0


def _tail_closed(radius: float, alpha: float, k: float) -> float:
    """R^2 [2F2(1/2, -1/a; 1/2, 1-1/a; -k R^(-2a)) - 1] via the series route."""
    if math.isinf(radius) or k == 0.0:
        return 0.0
    z = -k * radius ** (-2.0 * alpha)
    return radius * radius * specfun.hyp2f2_minus_one(0.5, -1.0 / alpha, 0.5, 1.0 - 1.0 / alpha, z)


def log_cf_los_closed(w: float, gain: float, class_density: float, ctx: CfContext) -> float:
    params = ctx.params
    r0, rb = ctx.serving_distance, params.ball_radius
    if r0 >= rb or class_density == 0.0 or w == 0.0:
        return 0.0
    k = _argument_scale(gain, ctx.budget) * w * w
    a = params.alpha_los
    return class_density * math.pi * (_tail_closed(rb, a, k) - _tail_closed(r0, a, k))


def cf_los_closed(w: float, gain: float, class_density: float, ctx: CfContext) -> float:
    """LOS-annulus CF for one gain class (hypergeometric closed form)."""
    return math.exp(log_cf_los_closed(w, gain, class_density, ctx))


def log_cf_nlos_closed(w: float, gain: float, class_density: float, ctx: CfContext) -> float:
    params = ctx.params
    lo = max(params.ball_radius, ctx.serving_distance)
    if math.isinf(lo) or class_density == 0.0 or w == 0.0:
        return 0.0
    k = _argument_scale(gain, ctx.budget) * w * w
    return -class_density * math.pi * _tail_closed(lo, params.alpha_nlos, k)


def cf_nlos_closed(w: float, gain: float, class_density: float, ctx: CfContext) -> float:
    """NLOS CF for one gain class; interferers lie beyond max(R_B, r0)."""
    return math.exp(log_cf_nlos_closed(w, gain, class_density, ctx))


def _radial_log_cf(lo, hi, alpha, k, class_density, cfg):
    # 2 pi lam int (exp(-k r^-2a) - 1) r dr, integrand written with expm1
    def f(r):
        return np.expm1(-k * r ** (-2.0 * alpha)) * r

    if math.isinf(hi):
        # panels grow geometrically; the tail decays like r^(1 - 2a)
        integral = specfun.integrate_semi_infinite(f, lo, cfg, panel=max(lo, 1.0), growth=2.0)
    else:
        # the integrand saturates at -r below r ~ k^(1/2a); seed a breakpoint there
        knee = k ** (0.5 / alpha)
        integral = specfun.integrate_finite(f, lo, hi, cfg, points=(knee,))
    return 2.0 * math.pi * class_density * integral


def log_cf_los_quadrature(w: float, gain: float, class_density: float, ctx: CfContext,
                          cfg: specfun.QuadratureConfig = RADIAL_QUAD) -> float:
    params = ctx.params
    r0, rb = ctx.serving_distance, params.ball_radius
    if r0 >= rb or class_density == 0.0 or w == 0.0:
        return 0.0
    k = _argument_scale(gain, ctx.budget) * w * w
    return _radial_log_cf(r0, rb, params.alpha_los, k, class_density, cfg)


def cf_los_quadrature(w: float, gain: float, class_density: float, ctx: CfContext,
                      cfg: specfun.QuadratureConfig = RADIAL_QUAD) -> float:
    """Reference LOS CF by direct radial quadrature with the Gaussian Phi0."""
    return math.exp(log_cf_los_quadrature(w, gain, class_density, ctx, cfg))


def log_cf_nlos_quadrature(w: float, gain: float, class_density: float, ctx: CfContext,
                           cfg: specfun.QuadratureConfig = RADIAL_QUAD) -> float:
    params = ctx.params
    lo = max(params.ball_radius, ctx.serving_distance)
    if math.isinf(lo) or class_density == 0.0 or w == 0.0:
        return 0.0
    k = _argument_scale(gain, ctx.budget) * w * w
    return _radial_log_cf(lo, math.inf, params.alpha_nlos, k, class_density, cfg)


def cf_nlos_quadrature(w: float, gain: float, class_density: float, ctx: CfContext,
                       cfg: specfun.QuadratureConfig = RADIAL_QUAD) -> float:
    return math.exp(log_cf_nlos_quadrature(w, gain, class_density, ctx, cfg))


# --------------------------------------------------------------------------
# vectorized route


def power_tail(radius, alpha: float, k):
    """Vectorized R^2 [1F1(-1/a; 1-1/a; -k R^(-2a)) - 1] (the 2F2 above).

    Written as R^2 expm1(-z) + k^(1/a) Gamma(b) P(b, z) with b = 1 - 1/a and
    z = k R^(-2a): the R^2 z^(1/a) factor is k^(1/a) exactly, so nothing
    overflows as R -> 0 and nothing cancels catastrophically as z -> 0.
    """
    radius = np.asarray(radius, dtype=float)
    k = np.asarray(k, dtype=float)
    b = 1.0 - 1.0 / alpha
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        z = k * radius ** (-2.0 * alpha)
        out = radius * radius * np.expm1(-z) + k ** (1.0 / alpha) * special.gamma(b) * special.gammainc(b, z)
    return np.where(np.isinf(radius) | (k == 0), 0.0, out)


def log_cf_aggregate_fast(w, r0, params: NetworkParams, gains: GainDistribution,
                          budget: LinkBudget):
    """Log-CF of the aggregate interference for broadcastable arrays w, r0."""
    w = np.asarray(w, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    rb = params.ball_radius
    out = np.zeros(np.broadcast(w, r0).shape)
    if params.lambda_bs == 0.0:
        return out
    w2 = w * w
    nlos_lo = np.maximum(rb, r0)
    los = r0 < rb
    for _, g, p in gains.items():
        if p == 0.0:
            continue
        dens = params.lambda_bs * p
        k = _argument_scale(g, budget) * w2
        los_part = power_tail(rb, params.alpha_los, k) - power_tail(r0, params.alpha_los, k)
        out += dens * math.pi * np.where(los, los_part, 0.0)
        out -= dens * math.pi * power_tail(nlos_lo, params.alpha_nlos, k)
    return out


def log_cf_total_fast(w, r0, params, gains, budget):
    w = np.asarray(w, dtype=float)
    return log_cf_aggregate_fast(w, r0, params, gains, budget) - w * w * budget.noise_level / 4.0


# --------------------------------------------------------------------------
# aggregate


def cf_aggregate(w: float, ctx: CfContext, route: str = "fast") -> float:
    """Product over the six thinned PPPs (LOS and NLOS per gain class)."""
    if route == "fast":
        return float(np.exp(log_cf_aggregate_fast(w, ctx.serving_distance, ctx.params,
                                                  ctx.gains, ctx.budget)))
    if route == "closed":
        los, nlos = log_cf_los_closed, log_cf_nlos_closed
        total = 0.0
        for g, dens in ctx.classes():
            total += los(w, g, dens, ctx) + nlos(w, g, dens, ctx)
        return math.exp(total)
    if route == "quadrature":
        out = 1.0
        for g, dens in ctx.classes():
            out *= cf_los_quadrature(w, g, dens, ctx) * cf_nlos_quadrature(w, g, dens, ctx)
        return out
    raise ValueError(f"unknown route {route!r}, expected one of {ROUTES}")


def cf_total(w: float, ctx: CfContext, route: str = "fast") -> float:
    return cf_aggregate(w, ctx, route) * cf_noise(w, ctx.budget)
