"""Coherent-state amplitudes, loss maps and homodyne measurement.

Quadrature convention: x = (a + a^dag)/2 and p = (a - a^dag)/(2i), so a
coherent state of amplitude alpha has mean quadratures (Re alpha, Im alpha)
and shot-noise variance N0 = 1/4 in both.  With this choice the homodyne mean
of an encoded state is the encoded number itself, with no extra factor.

Pure loss of transmissivity eta maps alpha to sqrt(eta)*alpha and leaves a
coherent state coherent; detector imperfections are not modelled here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

SHOT_NOISE = 0.25


class QuadratureBasis(enum.Enum):
    X = "x"
    P = "p"


@dataclass(frozen=True)
class CoherentAmplitude:
    """Complex amplitude alpha = re + i*im carrying one encoded value."""

    re: float
    im: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"amplitude components must be finite, got ({self.re}, {self.im})")

    def magnitude(self) -> float:
        return math.hypot(self.re, self.im)

    def quadrature_mean(self, basis: QuadratureBasis) -> float:
        return self.re if basis is QuadratureBasis.X else self.im


@dataclass(frozen=True)
class HomodyneOutcome:
    """One quadrature measurement result; ``rescaled`` marks loss compensation."""

    value: float
    basis: QuadratureBasis
    rescaled: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"outcome value must be finite, got {self.value}")


def _check_unit_interval(eta: float, name: str) -> None:
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {eta}")


def attenuate(alpha: CoherentAmplitude, eta: float) -> CoherentAmplitude:
    """Pure-loss map: alpha -> sqrt(eta) * alpha."""
    _check_unit_interval(eta, "eta")
    s = math.sqrt(eta)
    return CoherentAmplitude(s * alpha.re, s * alpha.im)


def beam_splitter(alpha: CoherentAmplitude, eta_e: float) -> tuple[CoherentAmplitude, CoherentAmplitude]:
    """Split alpha on a beam splitter of transmissivity eta_e.

    Returns (transmitted, reflected) = (sqrt(eta_e)*alpha, sqrt(1-eta_e)*alpha);
    energy |alpha|^2 is conserved between the two arms.
    """
    _check_unit_interval(eta_e, "eta_e")
    s_t = math.sqrt(eta_e)
    s_r = math.sqrt(1.0 - eta_e)
    return (
        CoherentAmplitude(s_t * alpha.re, s_t * alpha.im),
        CoherentAmplitude(s_r * alpha.re, s_r * alpha.im),
    )


def homodyne_distribution(alpha: CoherentAmplitude, basis: QuadratureBasis) -> tuple[float, float]:
    """Mean and variance of the homodyne statistic for a coherent state."""
    return alpha.quadrature_mean(basis), SHOT_NOISE


def homodyne_sample(alpha: CoherentAmplitude, basis: QuadratureBasis,
                    rng: np.random.Generator) -> HomodyneOutcome:
    """Draw one homodyne outcome; callers own the random stream."""
    mean, variance = homodyne_distribution(alpha, basis)
    value = rng.normal(mean, math.sqrt(variance))
    return HomodyneOutcome(value=float(value), basis=basis, rescaled=False)


def rescale_outcome(outcome: HomodyneOutcome, eta_total: float) -> HomodyneOutcome:
    """Compensate channel loss: multiply the value by eta_total^(-1/2).

    Amplifies the noise along with the signal (implied variance N0/eta_total).
    Rescaling twice is a usage error.
    """
    if outcome.rescaled:
        raise ValueError("outcome is already rescaled")
    if not (eta_total > 0.0):
        raise ValueError(f"eta_total must be positive, got {eta_total}")
    return HomodyneOutcome(
        value=outcome.value / math.sqrt(eta_total),
        basis=outcome.basis,
        rescaled=True,
    )
