"""System model: network geometry, sectored antennas, link budget, MPSK.

All gains are linear, angles are radians, distances are meters and densities
are base stations per square meter. Conversions from dB/degrees happen only
at the CLI boundary (see :func:`db_to_linear`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

TWO_PI = 2.0 * math.pi
GAIN_CLASSES = ("MM", "Mm", "mm")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class NetworkParams:
    """PPP base-station layout with an equivalent LOS ball.

    ``ball_radius`` may be ``math.inf`` (every base station LOS), which is how
    the omnidirectional baseline is expressed. ``lambda_bs == 0`` is allowed
    so that noise-only limits can be evaluated conditionally on r0.
    """

    lambda_bs: float
    ball_radius: float = 141.0
    alpha_los: float = 2.1
    alpha_nlos: float = 4.0

    def __post_init__(self):
        if not (self.lambda_bs >= 0 and math.isfinite(self.lambda_bs)):
            raise ParameterError(f"lambda_bs must be finite and >= 0, got {self.lambda_bs}")
        if not self.ball_radius > 0:
            raise ParameterError(f"ball_radius must be > 0, got {self.ball_radius}")
        if not self.alpha_los > 1:
            raise ParameterError(f"alpha_los must be > 1, got {self.alpha_los}")
        if not self.alpha_nlos >= self.alpha_los:
            raise ParameterError(
                f"alpha_nlos ({self.alpha_nlos}) must be >= alpha_los ({self.alpha_los})"
            )


@dataclass(frozen=True)
class AntennaPattern:
    """Two-level sectored gain pattern: ``main_gain`` over ``beamwidth`` radians."""

    main_gain: float
    side_gain: float
    beamwidth: float

    def __post_init__(self):
        if not (self.side_gain > 0 and self.main_gain >= self.side_gain):
            raise ParameterError(
                f"need main_gain >= side_gain > 0, got {self.main_gain}, {self.side_gain}"
            )
        if not 0 < self.beamwidth <= TWO_PI:
            raise ParameterError(f"beamwidth must lie in (0, 2pi], got {self.beamwidth}")

    @classmethod
    def from_db(cls, main_db: float, side_db: float, beamwidth_deg: float) -> AntennaPattern:
        return cls(db_to_linear(main_db), db_to_linear(side_db), math.radians(beamwidth_deg))

    @classmethod
    def omnidirectional(cls) -> AntennaPattern:
        return cls(1.0, 1.0, TWO_PI)

    @property
    def serving_gain(self) -> float:
        return self.main_gain * self.main_gain


@dataclass(frozen=True)
class GainDistribution:
    """Discrete law of the effective gain over the classes MM, Mm, mm."""

    gains: tuple[float, float, float]
    probabilities: tuple[float, float, float]

    def __post_init__(self):
        if any(p < 0 for p in self.probabilities):
            raise ParameterError(f"negative probability in {self.probabilities}")
        if abs(math.fsum(self.probabilities) - 1.0) > 1e-12:
            raise ParameterError(f"probabilities sum to {math.fsum(self.probabilities)}")

    def items(self):
        return zip(GAIN_CLASSES, self.gains, self.probabilities)

    def as_dict(self) -> dict[str, tuple[float, float]]:
        return {name: (g, p) for name, g, p in self.items()}


def three_class(pattern: AntennaPattern, f_main: float) -> GainDistribution:
    """Gain law when each end independently hits its main lobe w.p. ``f_main``."""
    q = 1.0 - f_main
    gains = (
        pattern.main_gain * pattern.main_gain,
        pattern.main_gain * pattern.side_gain,
        pattern.side_gain * pattern.side_gain,
    )
    return GainDistribution(gains, (f_main * f_main, 2.0 * f_main * q, q * q))


def gain_distribution(pattern: AntennaPattern) -> GainDistribution:
    """Effective interferer gain for uniformly random beam directions."""
    return three_class(pattern, pattern.beamwidth / TWO_PI)


def path_loss_exponent(distance: float, params: NetworkParams) -> float:
    if distance < 0:
        raise ParameterError(f"distance must be >= 0, got {distance}")
    return params.alpha_los if distance <= params.ball_radius else params.alpha_nlos


def serving_distance_pdf(xi, lambda_bs: float):
    """Density of the nearest-BS distance, 2*pi*lam*xi*exp(-pi*lam*xi^2)."""
    if not lambda_bs > 0:
        raise ParameterError(f"lambda_bs must be > 0, got {lambda_bs}")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ParameterError("xi must be >= 0")
    out = TWO_PI * lambda_bs * xi * np.exp(-math.pi * lambda_bs * xi * xi)
    return float(out) if out.ndim == 0 else out


def serving_distance_cdf(xi, lambda_bs: float):
    xi = np.asarray(xi, dtype=float)
    out = -np.expm1(-math.pi * lambda_bs * xi * xi)
    return float(out) if out.ndim == 0 else out


def serving_distance_quantile(mass: float, lambda_bs: float) -> float:
    """Distance beyond which the serving-distance law leaves ``mass``."""
    return math.sqrt(-math.log(mass) / (math.pi * lambda_bs))


@dataclass(frozen=True)
class LinkBudget:
    symbol_energy: float
    noise_level: float = 1.0
    fading_power: float = 1.0
    serving_gain: float = 1.0

    def __post_init__(self):
        if not self.symbol_energy > 0:
            raise ParameterError(f"symbol_energy must be > 0, got {self.symbol_energy}")
        if not self.noise_level >= 0:
            raise ParameterError(f"noise_level must be >= 0, got {self.noise_level}")
        if not self.fading_power > 0:
            raise ParameterError(f"fading_power must be > 0, got {self.fading_power}")
        if not self.serving_gain > 0:
            raise ParameterError(f"serving_gain must be > 0, got {self.serving_gain}")

    @property
    def snr(self) -> float:
        return self.symbol_energy * self.fading_power / 4.0

    @classmethod
    def from_snr_db(
        cls,
        snr_db: float,
        serving_gain: float,
        noise_level: float = 1.0,
        fading_power: float = 1.0,
    ) -> LinkBudget:
        """Build a budget whose ``snr`` (E0*sigma0/4) equals ``snr_db``."""
        energy = 4.0 * db_to_linear(snr_db) / fading_power
        return cls(energy, noise_level, fading_power, serving_gain)


@dataclass(frozen=True)
class Modulation:
    """MPSK alphabet of ``order`` points on the unit circle."""

    order: int
    min_distance: float = field(init=False)
    neighbor_count: int = field(init=False)

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ParameterError(f"modulation order must be an integer >= 2, got {self.order}")
        if self.order == 2:
            dmin, k = 2.0, 1
        else:
            dmin, k = 2.0 * math.sin(math.pi / self.order), 2
        object.__setattr__(self, "min_distance", dmin)
        object.__setattr__(self, "neighbor_count", k)

    def constellation(self) -> np.ndarray:
        return np.exp(2j * math.pi * np.arange(self.order) / self.order)
