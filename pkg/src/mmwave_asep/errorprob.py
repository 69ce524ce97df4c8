"""Pairwise and symbol error probabilities via Gil-Pelaez inversion.

The conditional PEP is F_Re(U)(-d) with d = sqrt(G0 E0) delta |h0| / (2 r0^aL),
computed from the real CF of U = I_agg + n. Averaging over Rayleigh |h0| is
done in closed form; averaging over the serving distance is numerical.

After the substitution v = A delta w, A = sqrt(G0 E0 sigma0) / (4 xi^aL), the
Rayleigh-averaged kernel becomes the fixed weight exp(-v^2) and

    APEP = 1/sqrt(pi) * int f_r0(xi) int_0^inf exp(-v^2) (1 - Phi_U(v / (A delta); xi)) dv dxi

which is evaluated as written (1 - Phi_U via expm1), so small error
probabilities never come out of a cancellation against 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import specfun
from .errors import NumericFailure, ParameterError
from .interference import log_cf_aggregate_fast
from .model import (
    AntennaPattern,
    GainDistribution,
    LinkBudget,
    Modulation,
    NetworkParams,
    gain_distribution,
    serving_distance_cdf,
    serving_distance_pdf,
    serving_distance_quantile,
    three_class,
)

MMWAVE, OMNI = "mmwave", "omni"
# serving-distance mass left beyond the outer integration limit
XI_TAIL_MASS = 1e-10
V_MAX = 7.0  # exp(-49) is far below any tolerance used here
INNER_QUAD = specfun.QuadratureConfig(rel_tol=1e-9, abs_tol=1e-16, max_subdivisions=400)
OUTER_QUAD = specfun.QuadratureConfig(rel_tol=1e-8, abs_tol=1e-15, max_subdivisions=400)
PEP_QUAD = specfun.QuadratureConfig(rel_tol=1e-10, abs_tol=1e-14, tail_threshold=1e-11)


@dataclass(frozen=True)
class Scenario:
    """Everything the analytic pipeline needs for one operating point.

    ``interference=False`` keeps the serving-distance law (driven by
    ``params.lambda_bs``) but drops every interferer, which is the
    noise-only reference used for validation.
    """

    params: NetworkParams
    pattern: AntennaPattern
    budget: LinkBudget
    modulation: Modulation = field(default_factory=lambda: Modulation(2))
    mode: str = MMWAVE
    interference: bool = True

    def __post_init__(self):
        if self.mode not in (MMWAVE, OMNI):
            raise ParameterError(f"mode must be {MMWAVE!r} or {OMNI!r}, got {self.mode!r}")
        if self.mode == OMNI:
            p, pat = self.params, self.pattern
            if not (math.isinf(p.ball_radius) and pat.main_gain == pat.side_gain == 1.0):
                raise ParameterError("omni mode needs unit gains and an infinite LOS ball")

    @classmethod
    def mmwave(cls, lambda_bs, snr_db, main_db=10.0, side_db=-10.0, beamwidth_deg=15.0,
               order=2, ball_radius=141.0, alpha_los=2.1, alpha_nlos=4.0,
               noise_level=1.0, fading_power=1.0, interference=True):
        pattern = AntennaPattern.from_db(main_db, side_db, beamwidth_deg)
        return cls(
            NetworkParams(lambda_bs, ball_radius, alpha_los, alpha_nlos),
            pattern,
            LinkBudget.from_snr_db(snr_db, pattern.serving_gain, noise_level, fading_power),
            Modulation(order),
            MMWAVE,
            interference,
        )

    @classmethod
    def omni(cls, lambda_bs, snr_db, order=2, alpha=2.1, noise_level=1.0,
             fading_power=1.0, interference=True):
        """Non-mmWave baseline: unit gains, every base station LOS."""
        return cls(
            NetworkParams(lambda_bs, math.inf, alpha, alpha),
            AntennaPattern.omnidirectional(),
            LinkBudget.from_snr_db(snr_db, 1.0, noise_level, fading_power),
            Modulation(order),
            OMNI,
            interference,
        )

    @property
    def gains(self) -> GainDistribution:
        return gain_distribution(self.pattern)

    def with_serving_gain(self, gain: float) -> Scenario:
        return replace(self, budget=replace(self.budget, serving_gain=gain))

    def log_cf(self, w, r0):
        """Log-CF of U = I_agg + n at broadcastable (w, r0)."""
        w = np.asarray(w, dtype=float)
        noise = -w * w * self.budget.noise_level / 4.0
        if not self.interference:
            return noise + np.zeros(np.broadcast(w, np.asarray(r0)).shape)
        return noise + log_cf_aggregate_fast(w, r0, self.params, self.gains, self.budget)


@dataclass(frozen=True)
class BeamErrorModel:
    """Zero-mean Gaussian beamsteering error with std ``sigma_be`` radians."""

    sigma_be: float = 0.0

    def __post_init__(self):
        if not self.sigma_be >= 0:
            raise ParameterError(f"sigma_be must be >= 0, got {self.sigma_be}")

    @classmethod
    def from_degrees(cls, sigma_deg: float) -> BeamErrorModel:
        return cls(math.radians(sigma_deg))

    def abs_error_cdf(self, x: float) -> float:
        """P(|eps| <= x) for the half-normal |eps|."""
        if self.sigma_be == 0.0:
            return 1.0 if x >= 0 else 0.0
        return float(specfun.erf(x / (math.sqrt(2.0) * self.sigma_be)))


@dataclass(frozen=True)
class AsepResult:
    value: float
    apep: float
    clamped: bool = False

    @property
    def flags(self) -> str:
        return "asep_clamped" if self.clamped else ""


def _serving_amplitude(scenario: Scenario, r0: float) -> float:
    b = scenario.budget
    return math.sqrt(b.serving_gain * b.symbol_energy) / (2.0 * r0 ** scenario.params.alpha_los)


def _clamp_probability(value: float, hi: float, slack: float) -> float:
    if -slack <= value < 0.0:
        return 0.0
    if hi < value <= hi + slack:
        return hi
    if not 0.0 <= value <= hi:
        raise NumericFailure("probability outside its range", value=value, upper=hi)
    return value


def cdf_ure(u: float, r0: float, scenario: Scenario,
            cfg: specfun.QuadratureConfig = PEP_QUAD) -> float:
    """P(Re U <= u | r0) by Gil-Pelaez inversion of the real CF of U."""
    if not r0 > 0:
        raise ParameterError(f"r0 must be > 0, got {r0}")
    if u == 0.0:
        return 0.5  # circular symmetry
    if math.isinf(u):
        return 1.0 if u > 0 else 0.0
    no_interference = not scenario.interference or scenario.params.lambda_bs == 0.0
    if no_interference and scenario.budget.noise_level == 0.0:
        return 1.0 if u > 0 else 0.0  # U == 0 almost surely
    a = abs(u)

    def f(w):
        return np.sin(a * w) / w * np.exp(scenario.log_cf(w, r0))

    panel = min(math.pi / a, _half_decay(scenario, r0))
    lower = _clamp_probability(0.5 - specfun.integrate_semi_infinite(f, 0.0, cfg, panel=panel) / math.pi,
                               0.5, 1e-9)
    return lower if u < 0 else 1.0 - lower


def pep_conditional(h0_mag: float, r0: float, delta: float, scenario: Scenario,
                    cfg: specfun.QuadratureConfig = PEP_QUAD) -> float:
    """P(s0 -> s0_hat | |h0|, r0) = P(Re U < -sqrt(G0 E0) delta |h0| / (2 r0^aL))."""
    if h0_mag < 0 or delta < 0:
        raise ParameterError("h0_mag and delta must be >= 0")
    if not r0 > 0:
        raise ParameterError(f"r0 must be > 0, got {r0}")
    a = _serving_amplitude(scenario, r0) * delta * h0_mag
    if a == 0.0:
        return 0.5
    return cdf_ure(-a, r0, scenario, cfg)


def _half_decay(scenario: Scenario, r0: float) -> float:
    """A w at which Phi_U(w) has dropped below 1/2 (sets the panel scale)."""
    w = 1e-12
    while scenario.log_cf(w, r0) > -math.log(2.0):
        w *= 2.0
        if w > 1e300:
            raise NumericFailure("characteristic function does not decay", r0=r0)
    return w


def _inner_average(scenario: Scenario, xi: float, delta: float) -> float:
    """int_0^inf exp(-v^2) (1 - Phi_U(v / (A delta); xi)) dv."""
    b = scenario.budget
    scale = math.sqrt(b.serving_gain * b.symbol_energy * b.fading_power) * delta
    scale /= 4.0 * xi ** scenario.params.alpha_los
    if scale == 0.0:
        return 0.5 * math.sqrt(math.pi)
    if math.isinf(scale):
        return 0.0

    def g(v):
        return np.exp(-v * v) * -np.expm1(scenario.log_cf(v / scale, xi))

    return specfun.integrate_finite(g, 0.0, V_MAX, INNER_QUAD)


def apep(delta: float, scenario: Scenario, xi_tail_mass: float = XI_TAIL_MASS) -> float:
    """PEP averaged over Rayleigh |h0| and the nearest-BS distance."""
    if delta < 0:
        raise ParameterError("delta must be >= 0")
    if delta == 0:
        return 0.5
    lam = scenario.params.lambda_bs
    if not lam > 0:
        raise ParameterError("apep needs lambda_bs > 0 for the serving-distance law")
    xi_max = serving_distance_quantile(xi_tail_mass, lam)

    def outer(xis):
        inner = np.array([_inner_average(scenario, x, delta) if x > 0 else 0.0 for x in xis])
        return serving_distance_pdf(xis, lam) * inner

    points = [1.0 / math.sqrt(2.0 * math.pi * lam)]
    if scenario.params.ball_radius < xi_max:
        points.append(scenario.params.ball_radius)
    body = specfun.integrate_finite(outer, 0.0, xi_max, OUTER_QUAD, points=points)
    # beyond xi_max the inner average is essentially frozen at its last value
    tail = (1.0 - serving_distance_cdf(xi_max, lam)) * _inner_average(scenario, xi_max, delta)
    return _clamp_probability((body + tail) / math.sqrt(math.pi), 0.5, 1e-12)


def misalignment_gain_pdf(model: BeamErrorModel, pattern: AntennaPattern) -> GainDistribution:
    """Serving-link gain law when the user's beam misses by a half-normal angle."""
    return three_class(pattern, model.abs_error_cdf(pattern.beamwidth / 2.0))


def apep_with_beam_error(delta: float, scenario: Scenario, model: BeamErrorModel,
                         branch_values: dict | None = None) -> float:
    """Mixture of APEPs over the serving gain; interference law unchanged.

    If ``branch_values`` is a dict it is filled with the per-class APEPs.
    """
    law = misalignment_gain_pdf(model, scenario.pattern)
    total = 0.0
    for name, gain, weight in law.items():
        if weight == 0.0:
            continue
        value = apep(delta, scenario.with_serving_gain(gain))
        if branch_values is not None:
            branch_values[name] = value
        total += weight * value
    return total


def evaluate_asep(scenario: Scenario, beam: BeamErrorModel | None = None) -> AsepResult:
    mod = scenario.modulation
    if beam is None:
        p = apep(mod.min_distance, scenario)
    else:
        p = apep_with_beam_error(mod.min_distance, scenario, beam)
    value = mod.neighbor_count * p
    if value > 1.0:
        return AsepResult(1.0, p, clamped=True)
    return AsepResult(value, p)


def asep(scenario: Scenario, beam: BeamErrorModel | None = None) -> float:
    """Nearest-neighbour ASEP: k_dmin * APEP(d_min), clamped at 1."""
    return evaluate_asep(scenario, beam).value
