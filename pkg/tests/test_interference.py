import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mmwave_asep.interference import (
    CfContext,
    cf_aggregate,
    cf_los_closed,
    cf_los_quadrature,
    cf_nlos_closed,
    cf_nlos_quadrature,
    cf_noise,
    cf_total,
    log_cf_los_closed,
    log_cf_nlos_closed,
)
from mmwave_asep.mc import McConfig, empirical_cf
from mmwave_asep.errorprob import Scenario
from mmwave_asep.model import AntennaPattern, LinkBudget, NetworkParams


def make_ctx(r0, lam=1e-4, snr_db=60.0, main_db=10.0, side_db=-10.0, beam_deg=15.0, **net):
    pattern = AntennaPattern.from_db(main_db, side_db, beam_deg)
    return CfContext(NetworkParams(lam, **net), pattern,
                     LinkBudget.from_snr_db(snr_db, pattern.serving_gain), r0)


def brute_log_cf(lo, hi, alpha, k, dens):
    """2 pi lam int (exp(-k r^-2a) - 1) r dr with scipy, split at the knee."""
    f = lambda r: math.expm1(-k * r ** (-2 * alpha)) * r
    knee = k ** (0.5 / alpha)
    pts = sorted({lo, min(max(knee, lo), hi) if math.isfinite(hi) else max(knee, lo)})
    total = 0.0
    edges = pts + [hi]
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=500)[0]
    return 2 * math.pi * dens * total


@pytest.mark.parametrize("r0", [1.0, 60.0, 300.0])
@pytest.mark.parametrize("w", [1e-2, 1.0, 100.0])
def test_closed_route_against_scipy_radial_integral(r0, w):
    ctx = make_ctx(r0)
    p = ctx.params
    for g, dens in ctx.classes():
        k = g * ctx.budget.symbol_energy * ctx.budget.fading_power * w * w / 4
        los = brute_log_cf(r0, p.ball_radius, p.alpha_los, k, dens) if r0 < p.ball_radius else 0.0
        nlos = brute_log_cf(max(r0, p.ball_radius), np.inf, p.alpha_nlos, k, dens)
        assert log_cf_los_closed(w, g, dens, ctx) == pytest.approx(los, rel=1e-8, abs=1e-14)
        assert log_cf_nlos_closed(w, g, dens, ctx) == pytest.approx(nlos, rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("route", ["closed", "quadrature"])
@pytest.mark.parametrize("r0", [0.5, 40.0, 140.0, 500.0])
def test_fast_route_matches(route, r0):
    ctx = make_ctx(r0, snr_db=80.0)
    for w in np.logspace(-3, 2, 6):
        ref = cf_aggregate(w, ctx, route)
        assert cf_aggregate(w, ctx, "fast") == pytest.approx(ref, rel=1e-8, abs=1e-300)


def test_nlos_free_of_r0_inside_ball():
    vals = [cf_nlos_closed(0.3, 100.0, 1e-4, make_ctx(r0)) for r0 in (1.0, 50.0, 140.0)]
    assert vals[0] == vals[1] == vals[2]
    # beyond the ball the NLOS region starts at r0 instead
    assert cf_nlos_closed(0.3, 100.0, 1e-4, make_ctx(200.0)) > vals[0]


def test_los_factor_trivial_outside_ball():
    ctx = make_ctx(150.0)
    assert cf_los_closed(1.0, 100.0, 1e-4, ctx) == 1.0
    assert cf_los_quadrature(1.0, 100.0, 1e-4, ctx) == 1.0


def test_equal_gains_make_beamwidth_irrelevant():
    a = make_ctx(30.0, main_db=3.0, side_db=3.0, beam_deg=10.0)
    b = make_ctx(30.0, main_db=3.0, side_db=3.0, beam_deg=90.0)
    for w in (0.01, 0.5, 4.0):
        assert cf_aggregate(w, a) == pytest.approx(cf_aggregate(w, b), rel=1e-13)


def test_noise_cf():
    b = LinkBudget(4.0, noise_level=2.0)
    assert cf_noise(1.5, b) == pytest.approx(math.exp(-1.5 ** 2 * 2.0 / 4))


def test_unknown_route():
    with pytest.raises(ValueError):
        cf_aggregate(1.0, make_ctx(10.0), "bogus")


@settings(max_examples=100, deadline=None)
@given(
    lam=st.floats(1e-6, 1e-3), r0=st.floats(0.1, 400.0), w=st.floats(-50.0, 50.0),
    snr=st.floats(-10.0, 100.0), main=st.floats(0.0, 30.0), side=st.floats(-30.0, 0.0),
    beam=st.floats(1.0, 360.0),
)
def test_cf_axioms(lam, r0, w, snr, main, side, beam):
    ctx = make_ctx(r0, lam, snr, main, side, beam)
    v = cf_total(w, ctx)
    assert isinstance(v, float)
    assert 0.0 <= v <= 1.0
    assert cf_total(-w, ctx) == v
    assert cf_total(0.0, ctx) == 1.0


def test_vanishing_density_degenerates_to_noise():
    for lam in (1e-9, 1e-12, 0.0):
        ctx = make_ctx(10.0, lam)
        assert cf_aggregate(2.0, ctx) == pytest.approx(1.0, abs=1e-5 if lam else 0.0)
    assert cf_total(2.0, make_ctx(10.0, 0.0)) == cf_noise(2.0, make_ctx(10.0, 0.0).budget)


@pytest.mark.parametrize("lam,r0", [(1e-4, 20.0), (1e-3, 60.0)])
def test_empirical_cf_matches(lam, r0):
    scenario = Scenario.mmwave(lam, 80.0)
    ctx = CfContext(scenario.params, scenario.pattern, scenario.budget, r0)
    w = np.array([0.1, 0.3, 1.0, 3.0, 10.0])
    mean, se = empirical_cf(McConfig(trials=40_000, seed=11, batch=10_000), r0, scenario, w,
                            noise=False)
    ref = np.array([cf_aggregate(x, ctx) for x in w])
    assert ref.min() < 0.9  # the interference actually matters at these w
    assert np.all(np.abs(mean - ref) <= 3 * se), (mean, ref, se)


@pytest.mark.parametrize("r0", [1.0, 60.0, 140.0, 400.0])
def test_fast_log_cf_matches_closed_log_cf(r0):
    from mmwave_asep.interference import log_cf_aggregate_fast
    ctx = make_ctx(r0, snr_db=80.0)
    for w in np.logspace(-4, 2, 13):
        closed = sum(log_cf_los_closed(w, g, d, ctx) + log_cf_nlos_closed(w, g, d, ctx)
                     for g, d in ctx.classes())
        fast = float(log_cf_aggregate_fast(w, r0, ctx.params, ctx.gains, ctx.budget))
        assert fast == pytest.approx(closed, rel=1e-9)


@pytest.mark.parametrize("z", [1e2, 1e3, 1e4])
@pytest.mark.parametrize("r0,los", [(5.0, True), (60.0, True), (160.0, False)])
def test_routes_agree_in_overlap_band(z, r0, los):
    from mmwave_asep.interference import log_cf_los_quadrature, log_cf_nlos_quadrature
    ctx = make_ctx(r0, snr_db=60.0)
    g, dens = ctx.classes()[0]
    alpha = ctx.params.alpha_los if los else ctx.params.alpha_nlos
    lo = r0 if los else max(r0, ctx.params.ball_radius)
    # choose w so the hypergeometric argument at the inner radius is -z
    k = z * lo ** (2 * alpha)
    w = math.sqrt(4 * k / (g * ctx.budget.symbol_energy * ctx.budget.fading_power))
    closed = (log_cf_los_closed if los else log_cf_nlos_closed)(w, g, dens, ctx)
    quad = (log_cf_los_quadrature if los else log_cf_nlos_quadrature)(w, g, dens, ctx)
    assert closed == pytest.approx(quad, rel=1e-9)
