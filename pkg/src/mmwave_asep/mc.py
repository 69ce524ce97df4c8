"""Monte Carlo simulator of the downlink model, used as ground truth.

Every trial redraws the whole snapshot: serving distance (unless fixed),
serving fading and symbols, a PPP of interferers on the annulus
[r0, W], their gain classes, LOS/NLOS exponents, Rayleigh fading, random
phases and MPSK symbols, plus complex Gaussian noise. The pairwise decision
uses the ML metric directly,

    error  <=>  |U + c h0 (s0 - s0_hat)|^2 < |U|^2,   c = sqrt(G0 E0) r0^-aL,

so the circular-symmetry reduction used by the analysis is checked, not
assumed. Exact ties (only possible when s0_hat == s0) are broken by a fair
coin, matching the analytic PEP of 1/2 at zero distance.

Interferers beyond W are replaced by a complex Gaussian with the exact
truncated variance. W is chosen per trial so that the truncated mean power is
below ``tail_tolerance`` of the in-window mean power.

Trials are grouped into fixed batches; batch ``b`` draws from
Philox(SeedSequence(seed, spawn_key=(b,))), so results depend only on
(seed, trials, batch) and never on the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errorprob import BeamErrorModel, Scenario, misalignment_gain_pdf
from .errors import ParameterError


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    seed: int = 0
    window_radius: float | None = None  # None: per-trial rule below
    batch: int = 20_000
    jobs: int = 1
    tail_tolerance: float = 1e-6
    max_mean_points: float = 1_000.0

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.batch < 1 or self.jobs < 1:
            raise ParameterError("batch and jobs must be >= 1")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ParameterError("window_radius must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    scale: float = 1.0  # estimate = scale * binomial fraction

    def z_score(self, reference: float) -> float:
        """Standardized deviation from ``reference``.

        With zero or all hits the empirical standard error vanishes; the
        standard error implied by the reference itself is used instead.
        """
        se = self.std_error
        if se == 0.0:
            se = math.sqrt(max(reference * (self.scale - reference), 0.0) / self.trials)
        if se == 0.0:
            return 0.0 if reference == self.mean else math.copysign(math.inf, self.mean - reference)
        return (self.mean - reference) / se


@dataclass
class Snapshot:
    """Interferer field of one or more trials (flattened, with owner index)."""

    r0: np.ndarray
    window: np.ndarray
    owner: np.ndarray
    radius: np.ndarray
    gain_class: np.ndarray
    gain: np.ndarray
    alpha: np.ndarray
    fading: np.ndarray
    symbol: np.ndarray
    tail_variance: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=len(self.r0))


def batch_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


# --------------------------------------------------------------------------
# geometry


def _powint(r, alpha):
    """int r^(1 - 2 alpha) dr antiderivative magnitude: r^(2 - 2a) / (2a - 2)."""
    return r ** (2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0)


def auto_window(r0, scenario: Scenario, cfg: McConfig):
    """Per-trial window radius from the truncated-power rule."""
    p = scenario.params
    r0 = np.asarray(r0, dtype=float)
    far_alpha = p.alpha_los if math.isinf(p.ball_radius) else p.alpha_nlos
    if math.isinf(p.ball_radius):
        inner, start = np.zeros_like(r0), r0
    else:
        inner = np.where(r0 < p.ball_radius,
                         _powint(r0, p.alpha_los) - _powint(p.ball_radius, p.alpha_los), 0.0)
        start = np.maximum(r0, p.ball_radius)
    eps = cfg.tail_tolerance
    # tail(W) <= eps * (inner + nlos(start) - tail(W))
    tail = eps * (inner + _powint(start, far_alpha)) / (1.0 + eps)
    w = (tail * (2.0 * far_alpha - 2.0)) ** (1.0 / (2.0 - 2.0 * far_alpha))
    w = np.maximum(w, start)
    if p.lambda_bs > 0:
        cap = np.sqrt(r0 * r0 + cfg.max_mean_points / (math.pi * p.lambda_bs))
        w = np.minimum(w, np.maximum(cap, start))
    return w


def tail_variance(window, scenario: Scenario):
    """E|sum over interferers beyond W|^2 (complex), W >= max(r0, R_B)."""
    p, b = scenario.params, scenario.budget
    if not scenario.interference or p.lambda_bs == 0.0:
        return np.zeros_like(np.asarray(window, dtype=float))
    far_alpha = p.alpha_los if math.isinf(p.ball_radius) else p.alpha_nlos
    mean_gain = sum(g * q for _, g, q in scenario.gains.items())
    unit = p.lambda_bs * mean_gain * b.symbol_energy * b.fading_power * 2.0 * math.pi
    return unit * _powint(np.asarray(window, dtype=float), far_alpha)


def draw_serving_distance(rng, lambda_bs: float, n: int) -> np.ndarray:
    return np.sqrt(rng.standard_exponential(n) / (math.pi * lambda_bs))


MAX_POINTS = 500_000  # interferers materialized at once


def _layout(rng, scenario: Scenario, n: int, r0, cfg: McConfig):
    """Serving distances, windows and interferer counts for ``n`` trials."""
    p = scenario.params
    if r0 is None:
        r0 = draw_serving_distance(rng, p.lambda_bs, n)
    else:
        r0 = np.broadcast_to(np.asarray(r0, dtype=float), (n,)).copy()
    if cfg.window_radius is None:
        window = auto_window(r0, scenario, cfg)
    else:
        window = np.maximum(cfg.window_radius, r0)
    if scenario.interference and p.lambda_bs > 0:
        counts = rng.poisson(p.lambda_bs * math.pi * (window * window - r0 * r0))
    else:
        counts = np.zeros(n, dtype=np.int64)
    return r0, window, counts


def _points(rng, scenario: Scenario, r0, window, counts) -> Snapshot:
    p = scenario.params
    owner = np.repeat(np.arange(len(r0)), counts)
    lo2 = r0[owner] ** 2
    radius = np.sqrt(lo2 + rng.random(owner.size) * (window[owner] ** 2 - lo2))
    law = scenario.gains
    cum = np.cumsum(law.probabilities)
    gain_class = np.minimum(np.searchsorted(cum, rng.random(owner.size), side="right"), 2)
    gain = np.asarray(law.gains)[gain_class]
    alpha = np.where(radius <= p.ball_radius, p.alpha_los, p.alpha_nlos)
    sigma = math.sqrt(scenario.budget.fading_power)
    magnitude = sigma * np.sqrt(rng.standard_exponential(owner.size))
    fading = magnitude * np.exp(2j * math.pi * rng.random(owner.size))
    mod = scenario.modulation
    symbol = mod.constellation()[rng.integers(0, mod.order, owner.size)]
    return Snapshot(r0, window, owner, radius, gain_class, gain, alpha, fading, symbol,
                    tail_variance(window, scenario))


def sample_batch(rng: np.random.Generator, scenario: Scenario, n: int, r0=None,
                 cfg: McConfig = McConfig()) -> Snapshot:
    """Draw the interferer fields of ``n`` independent trials."""
    return _points(rng, scenario, *_layout(rng, scenario, n, r0, cfg))


def sample_realization(rng: np.random.Generator, scenario: Scenario, r0=None,
                       cfg: McConfig = McConfig()) -> Snapshot:
    """One network snapshot (a batch of size 1)."""
    return sample_batch(rng, scenario, 1, r0, cfg)


def _complex_normal(rng, variance):
    variance = np.asarray(variance, dtype=float)
    scale = np.sqrt(variance / 2.0)
    return scale * rng.standard_normal(variance.shape) + 1j * scale * rng.standard_normal(variance.shape)


def _aggregate(snap: Snapshot, scenario: Scenario) -> np.ndarray:
    amp = np.sqrt(snap.gain * scenario.budget.symbol_energy) * snap.radius ** (-snap.alpha)
    contrib = amp * snap.fading * snap.symbol
    n = len(snap.r0)
    return (np.bincount(snap.owner, weights=contrib.real, minlength=n)
            + 1j * np.bincount(snap.owner, weights=contrib.imag, minlength=n))


def interference_plus_noise(rng, scenario: Scenario, n: int, r0=None, cfg: McConfig = McConfig(),
                            noise: bool = True):
    """Per-trial complex U = I_agg (+ n) and the serving distances used.

    Interferers are materialized in chunks of at most ``MAX_POINTS`` so a
    batch's memory does not scale with its window sizes.
    """
    r0s, window, counts = _layout(rng, scenario, n, r0, cfg)
    u = np.empty(n, dtype=complex)
    edges = np.concatenate([[0], np.cumsum(counts)])
    lo = 0
    while lo < n:
        hi = int(np.searchsorted(edges, edges[lo] + MAX_POINTS, side="right")) - 1
        hi = min(max(hi, lo + 1), n)
        snap = _points(rng, scenario, r0s[lo:hi], window[lo:hi], counts[lo:hi])
        u[lo:hi] = _aggregate(snap, scenario)
        lo = hi
    u += _complex_normal(rng, tail_variance(window, scenario))
    if noise:
        u += _complex_normal(rng, np.full(n, scenario.budget.noise_level))
    return u, r0s


# --------------------------------------------------------------------------
# batch kernels (module level so they pickle for worker processes)


def _pep_batch(args):
    scenario, cfg, index, n, delta, h0_mag, r0, nearest, beam = args
    rng = batch_rng(cfg.seed, index)
    u, r0s = interference_plus_noise(rng, scenario, n, r0, cfg)
    b = scenario.budget
    if h0_mag is None:
        h_mag = math.sqrt(b.fading_power) * np.sqrt(rng.standard_exponential(n))
    else:
        h_mag = np.full(n, float(h0_mag))
    h0 = h_mag * np.exp(2j * math.pi * rng.random(n))
    const = scenario.modulation.constellation()
    s0 = const[rng.integers(0, len(const), n)]
    if nearest:
        step = np.where(rng.random(n) < 0.5, 1.0, -1.0) * 2.0 * math.pi / len(const)
        s_hat = s0 * np.exp(1j * step)
    else:
        s_hat = s0 - delta * np.exp(2j * math.pi * rng.random(n))
    if beam is None:
        serving_gain = b.serving_gain
    else:
        law = misalignment_gain_pdf(beam, scenario.pattern)
        pick = np.minimum(np.searchsorted(np.cumsum(law.probabilities), rng.random(n), side="right"), 2)
        serving_gain = np.asarray(law.gains)[pick]
    c = np.sqrt(serving_gain * b.symbol_energy) * r0s ** (-scenario.params.alpha_los)
    wrong_metric = np.abs(u + c * h0 * (s0 - s_hat)) ** 2
    right_metric = np.abs(u) ** 2
    wrong = wrong_metric < right_metric
    ties = wrong_metric == right_metric  # only when s_hat == s0: fair coin
    if ties.any():
        wrong |= ties & (rng.random(n) < 0.5)
    return int(np.count_nonzero(wrong))


def _cdf_batch(args):
    scenario, cfg, index, n, r0, points = args
    rng = batch_rng(cfg.seed, index)
    u, _ = interference_plus_noise(rng, scenario, n, r0, cfg)
    re = np.sort(u.real)
    return np.searchsorted(re, points, side="right")


def _cf_batch(args):
    scenario, cfg, index, n, r0, w, noise = args
    rng = batch_rng(cfg.seed, index)
    u, _ = interference_plus_noise(rng, scenario, n, r0, cfg, noise=noise)
    c = np.cos(np.outer(w, u.real))
    return c.sum(axis=1), (c * c).sum(axis=1)


def _run_batches(kernel, cfg: McConfig, make_args):
    sizes = [cfg.batch] * (cfg.trials // cfg.batch)
    if cfg.trials % cfg.batch:
        sizes.append(cfg.trials % cfg.batch)
    jobs = [make_args(i, n) for i, n in enumerate(sizes)]
    if cfg.jobs == 1 or len(jobs) == 1:
        return [kernel(a) for a in jobs]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(kernel, jobs))


def _binomial(hits: int, trials: int, scale: float = 1.0) -> McEstimate:
    p = hits / trials
    return McEstimate(scale * p, scale * math.sqrt(p * (1.0 - p) / trials), trials, scale)


# --------------------------------------------------------------------------
# public estimators


def estimate_pep(cfg: McConfig, scenario: Scenario, delta: float, h0_mag=None, r0=None) -> McEstimate:
    """Pairwise error rate; ``h0_mag``/``r0`` of None are redrawn per trial."""
    if r0 is None and not scenario.params.lambda_bs > 0:
        raise ParameterError("random r0 needs lambda_bs > 0")
    parts = _run_batches(_pep_batch, cfg,
                         lambda i, n: (scenario, cfg, i, n, delta, h0_mag, r0, False, None))
    return _binomial(sum(parts), cfg.trials)


def estimate_asep(cfg: McConfig, scenario: Scenario,
                  beam: BeamErrorModel | None = None) -> McEstimate:
    """k_dmin times the nearest-neighbour pairwise error rate.

    This targets the same nearest-neighbour approximation as the analysis,
    not the exact MPSK symbol error rate. With ``beam`` the serving gain is
    redrawn per trial from the misalignment law.
    """
    mod = scenario.modulation
    parts = _run_batches(_pep_batch, cfg,
                         lambda i, n: (scenario, cfg, i, n, mod.min_distance, None, None, True, beam))
    return _binomial(sum(parts), cfg.trials, float(mod.neighbor_count))


def dkw_halfwidth(trials: int, confidence: float = 0.999) -> float:
    """Dvoretzky-Kiefer-Wolfowitz uniform band half-width for an empirical CDF."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * trials))


def estimate_cdf_ure(cfg: McConfig, r0: float, scenario: Scenario, u_points, confidence=0.999):
    """Empirical CDF of Re{U} at ``u_points`` and its DKW half-width."""
    points = np.asarray(u_points, dtype=float)
    parts = _run_batches(_cdf_batch, cfg, lambda i, n: (scenario, cfg, i, n, r0, points))
    counts = np.sum(parts, axis=0)
    return counts / cfg.trials, dkw_halfwidth(cfg.trials, confidence)


def empirical_cf(cfg: McConfig, r0: float, scenario: Scenario, w_points, noise: bool = True):
    """Sample mean of cos(w Re U) and its standard error at each w."""
    w = np.asarray(w_points, dtype=float)
    parts = _run_batches(_cf_batch, cfg, lambda i, n: (scenario, cfg, i, n, r0, w, noise))
    s1 = np.sum([p[0] for p in parts], axis=0)
    s2 = np.sum([p[1] for p in parts], axis=0)
    n = cfg.trials
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    return mean, np.sqrt(var / n)
