import math

import numpy as np
import pytest
from scipy import integrate

from mmwave_asep.errors import ParameterError
from mmwave_asep.model import (
    AntennaPattern,
    LinkBudget,
    Modulation,
    NetworkParams,
    gain_distribution,
    path_loss_exponent,
    serving_distance_cdf,
    serving_distance_pdf,
    serving_distance_quantile,
)


def test_gain_law_reference_pattern():
    law = gain_distribution(AntennaPattern.from_db(10, -10, 15))
    assert law.gains == pytest.approx((100.0, 1.0, 0.01))
    assert law.probabilities == pytest.approx((0.001736, 0.079861, 0.918403), abs=5e-7)
    assert math.fsum(law.probabilities) == pytest.approx(1.0, abs=1e-15)


def test_omni_pattern_is_single_class():
    law = gain_distribution(AntennaPattern.omnidirectional())
    assert law.probabilities == (1.0, 0.0, 0.0)
    assert law.gains[0] == 1.0


def test_path_loss_exponent_switches_at_ball():
    p = NetworkParams(1e-4)
    assert path_loss_exponent(141.0, p) == 2.1
    assert path_loss_exponent(141.0001, p) == 4.0
    with pytest.raises(ParameterError):
        path_loss_exponent(-1.0, p)


def test_serving_distance_pdf_normalized_and_mode():
    lam = 1e-4
    total, _ = integrate.quad(serving_distance_pdf, 0, np.inf, args=(lam,))
    assert total == pytest.approx(1.0, abs=1e-10)
    xs = np.linspace(1, 100, 99001)
    assert xs[np.argmax(serving_distance_pdf(xs, lam))] == pytest.approx(39.89, abs=0.01)
    assert serving_distance_cdf(serving_distance_quantile(1e-10, lam), lam) == pytest.approx(1 - 1e-10)


def test_snr_definition():
    b = LinkBudget.from_snr_db(20.0, serving_gain=100.0, fading_power=2.0)
    assert b.snr == pytest.approx(100.0)
    assert b.symbol_energy == pytest.approx(200.0)


@pytest.mark.parametrize("order,dmin,k", [(2, 2.0, 1), (4, math.sqrt(2.0), 2), (8, 2 * math.sin(math.pi / 8), 2)])
def test_modulation_nearest_neighbours(order, dmin, k):
    mod = Modulation(order)
    pts = mod.constellation()
    d = np.abs(pts[:, None] - pts[None, :])
    d[d == 0] = np.inf
    assert d.min() == pytest.approx(dmin)
    assert mod.min_distance == pytest.approx(dmin)
    assert mod.neighbor_count == k


@pytest.mark.parametrize("kwargs", [
    dict(lambda_bs=-1.0), dict(lambda_bs=1e-4, ball_radius=0.0),
    dict(lambda_bs=1e-4, alpha_los=1.0), dict(lambda_bs=1e-4, alpha_nlos=2.0),
])
def test_network_params_rejects(kwargs):
    with pytest.raises(ParameterError):
        NetworkParams(**kwargs)


def test_pattern_and_modulation_reject():
    with pytest.raises(ParameterError):
        AntennaPattern(1.0, 2.0, 1.0)
    with pytest.raises(ParameterError):
        AntennaPattern(2.0, 1.0, 7.0)
    with pytest.raises(ParameterError):
        Modulation(3.5)
