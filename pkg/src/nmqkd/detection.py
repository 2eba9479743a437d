"""Delayed-reference eavesdropper detection and localization.

After disclosure, the reference pulses split into an ordinary-route and a
delayed-route population.  Their rescaled homodyne means differ by

    clean line:     |alpha_0| * (1 - exp(-(Gamma(tau+dt) - Gamma(tau))/2))
    tapped at t_e:  |alpha_0| * (1 - exp(-(Gamma(t_e+dt) - Gamma(t_e))/2))

because a tap that hides itself on the ordinary route is forcibly displaced
by the delay on the other one.  With a time-dependent rate the two shifts
disagree whenever gamma(t_e) != gamma(tau), which both reveals the tap and,
by inverting the shift curve, locates it.  A constant rate makes the two
expressions coincide for every tap position, so uniform-loss lines admit no
such test.

Decisions always use the exact expressions; the first-order forms
|alpha_0 * gamma(t) * dt| are reported alongside for comparison.  The finite
measurement precision enters as a dead-band epsilon added to the statistical
significance band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .adversary import security_threshold
from .decay import DecayModel, accumulated_damping, bracketed_roots, grid_points, rate
from .gaussian import CoherentAmplitude, QuadratureBasis
from .protocol import SessionTranscript


class InsufficientDataError(ValueError):
    """Raised when a population is too small to compare."""


class Verdict(enum.Enum):
    CLEAN = "clean"
    EVE_PRESENT = "eve_present"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DetectionConfig:
    """Test parameters: dead-band epsilon, band width in standard errors,
    and the scan resolution used for discrepancy and localization grids."""

    epsilon: float = 0.0
    significance_sigmas: float = 3.0
    grid_resolution: int | None = None

    def __post_init__(self) -> None:
        if self.epsilon < 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not (self.significance_sigmas > 0.0):
            raise ValueError(f"significance_sigmas must be positive, got {self.significance_sigmas}")


class ShiftPrediction(NamedTuple):
    exact: float
    first_order: float


def _exact_shift_curve(model: DecayModel, magnitude: float, t, delta_t: float):
    t = np.asarray(t, dtype=float)
    delta_gamma = accumulated_damping(model, t + delta_t) - accumulated_damping(model, t)
    return magnitude * np.abs(1.0 - np.exp(-0.5 * delta_gamma))


def expected_shift_clean(model: DecayModel, alpha0: CoherentAmplitude,
                         tau: float, delta_t: float) -> ShiftPrediction:
    """Reference-population mean shift on a clean line (exact and first order)."""
    if not (delta_t > 0.0):
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    mag = alpha0.magnitude()
    exact = float(_exact_shift_curve(model, mag, tau, delta_t))
    first = abs(mag * rate(model, tau) * delta_t)
    return ShiftPrediction(exact=exact, first_order=first)


def expected_shift_attacked(model: DecayModel, alpha0: CoherentAmplitude,
                            t_e: float, delta_t: float) -> ShiftPrediction:
    """Mean shift when a self-hiding tap sits at t_e (exact and first order)."""
    if t_e < 0.0:
        raise ValueError(f"t_e must be nonnegative, got {t_e}")
    if not (delta_t > 0.0):
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    mag = alpha0.magnitude()
    exact = float(_exact_shift_curve(model, mag, t_e, delta_t))
    first = abs(mag * rate(model, t_e) * delta_t)
    return ShiftPrediction(exact=exact, first_order=first)


def informative_bases(alpha0: CoherentAmplitude) -> list[QuadratureBasis]:
    """Bases whose reference mean actually carries the amplitude."""
    bases = []
    if alpha0.re != 0.0:
        bases.append(QuadratureBasis.X)
    if alpha0.im != 0.0:
        bases.append(QuadratureBasis.P)
    return bases


@dataclass(frozen=True)
class BasisComparison:
    basis: QuadratureBasis
    n_ordinary: int
    n_delayed: int
    mean_ordinary: float
    mean_delayed: float
    var_ordinary: float
    var_delayed: float
    diff: float
    standard_error: float
    width_zscore: float


@dataclass(frozen=True)
class SampleComparison:
    """Two-population summary of the disclosed reference pulses.

    ``observed_shift`` is the magnitude of the ordinary-minus-delayed mean
    difference over the informative bases; for a complex reference amplitude
    the two per-basis differences combine in quadrature.
    """

    per_basis: tuple[BasisComparison, ...]
    mean_ordinary: float
    mean_delayed: float
    observed_shift: float
    standard_error: float
    width_zscore: float


def split_and_compare(transcript: SessionTranscript) -> SampleComparison:
    """Compare the ordinary and delayed reference populations after disclosure.

    Only pulses measured in a basis matching an informative quadrature of
    alpha_0 enter; each population needs at least two of them per basis.
    """
    config = transcript.config
    alpha0 = config.reference_amplitude
    bases = informative_bases(alpha0)
    if not bases:
        raise InsufficientDataError("reference amplitude is zero; no informative basis")

    comparisons = []
    for basis in bases:
        in_basis = transcript.basis_is_p if basis is QuadratureBasis.P else ~transcript.basis_is_p
        mask = transcript.is_reference & in_basis
        ordinary = transcript.values[mask & ~transcript.is_delayed]
        delayed = transcript.values[mask & transcript.is_delayed]
        if ordinary.size < 2 or delayed.size < 2:
            raise InsufficientDataError(
                f"need at least 2 usable reference pulses per population in basis "
                f"{basis.value}; got {ordinary.size} ordinary, {delayed.size} delayed"
            )
        var_o = float(np.var(ordinary, ddof=1))
        var_d = float(np.var(delayed, ddof=1))
        se = math.sqrt(var_o / ordinary.size + var_d / delayed.size)
        # Log variance-ratio z-score; unequal widths would signal added
        # time-dependent noise, which this zero-temperature model excludes.
        width_z = 0.0
        if var_o > 0.0 and var_d > 0.0:
            width_z = math.log(var_o / var_d) / math.sqrt(
                2.0 / (ordinary.size - 1) + 2.0 / (delayed.size - 1)
            )
        comparisons.append(BasisComparison(
            basis=basis,
            n_ordinary=ordinary.size,
            n_delayed=delayed.size,
            mean_ordinary=float(np.mean(ordinary)),
            mean_delayed=float(np.mean(delayed)),
            var_ordinary=var_o,
            var_delayed=var_d,
            diff=float(np.mean(ordinary) - np.mean(delayed)),
            standard_error=se,
            width_zscore=width_z,
        ))

    if len(comparisons) == 1:
        c = comparisons[0]
        observed, se = abs(c.diff), c.standard_error
    else:
        cx, cp = comparisons
        observed = math.hypot(cx.diff, cp.diff)
        if observed > 0.0:
            se = math.sqrt((cx.diff * cx.standard_error) ** 2
                           + (cp.diff * cp.standard_error) ** 2) / observed
        else:
            se = max(cx.standard_error, cp.standard_error)
    primary = comparisons[0]
    return SampleComparison(
        per_basis=tuple(comparisons),
        mean_ordinary=primary.mean_ordinary,
        mean_delayed=primary.mean_delayed,
        observed_shift=observed,
        standard_error=se,
        width_zscore=max((abs(c.width_zscore) for c in comparisons), default=0.0),
    )


@dataclass(frozen=True)
class LocalizationCandidate:
    """One solution of the shift equation with a delta-method interval."""

    t_e: float
    lower: float
    upper: float


@dataclass(frozen=True)
class Localization:
    """Candidate tap positions; ``entire_window`` flags a constant rate where
    every position is equally consistent, ``no_solution`` an observed shift
    outside the range of the model curve."""

    candidates: tuple[LocalizationCandidate, ...]
    entire_window: bool = False
    no_solution: bool = False


def _constant_rate(model: DecayModel, grid: np.ndarray) -> bool:
    values = rate(model, grid)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    return float(np.max(values) - np.min(values)) <= 1e-12 * scale


def localize(model: DecayModel, observed_shift: float, alpha0: CoherentAmplitude,
             delta_t: float, tau: float, grid_resolution: int | None = None,
             standard_error: float = 0.0, sigmas: float = 3.0) -> Localization:
    """Invert the exact shift curve to find candidate tap positions in [0, tau].

    Intervals come from propagating the shift's standard error through the
    local slope of the curve; a flat slope widens the interval to the full
    window.
    """
    if observed_shift < 0.0:
        raise ValueError(f"observed_shift must be nonnegative, got {observed_shift}")
    mag = alpha0.magnitude()
    if mag == 0.0:
        raise ValueError("reference amplitude is zero; the shift curve is degenerate")
    n = grid_points(model, tau, grid_resolution)
    grid = np.linspace(0.0, tau, n)
    if _constant_rate(model, np.linspace(0.0, tau + delta_t, n)):
        return Localization(candidates=(), entire_window=True)

    xtol = 1e-12 * tau
    roots = bracketed_roots(
        lambda t: _exact_shift_curve(model, mag, t, delta_t) - observed_shift,
        0.0, tau, n, xtol,
    )
    if not roots:
        return Localization(candidates=(), no_solution=True)

    candidates = []
    for r in roots:
        slope = mag * math.exp(
            -0.5 * (accumulated_damping(model, r + delta_t) - accumulated_damping(model, r))
        ) * (rate(model, r + delta_t) - rate(model, r))
        if slope != 0.0 and standard_error > 0.0:
            half = sigmas * standard_error / abs(slope)
            lower, upper = max(0.0, r - half), min(tau, r + half)
        elif standard_error > 0.0:
            lower, upper = 0.0, tau
        else:
            lower = upper = r
        candidates.append(LocalizationCandidate(t_e=r, lower=lower, upper=upper))
    return Localization(candidates=tuple(candidates))


def min_detectable_attack_time(model: DecayModel, alpha0: CoherentAmplitude,
                               delta_t: float, epsilon: float, tau: float,
                               grid_resolution: int | None = None) -> float:
    """Earliest tap position from which the rate discrepancy stays below epsilon.

    Scans |alpha_0 * delta_t * (gamma(s) - gamma(tau))| on the inversion grid
    and returns the first grid point after the last violation; attacks placed
    later than this are invisible at the given precision.
    """
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    n = grid_points(model, tau, grid_resolution)
    grid = np.linspace(0.0, tau, n)
    discrepancy = alpha0.magnitude() * delta_t * np.abs(rate(model, grid) - rate(model, tau))
    (violations,) = np.nonzero(discrepancy >= epsilon)
    if violations.size == 0:
        return 0.0
    last = violations[-1]
    return float(grid[min(last + 1, n - 1)])


def secure_transmission_bound(model: DecayModel, t_e_star: float) -> float:
    """Security threshold on the overall transmission for taps beyond t_e_star."""
    return security_threshold(model, t_e_star)


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of the delayed-reference check for one session."""

    verdict: Verdict
    observed_shift: float
    standard_error: float
    expected_shift_clean: float
    expected_shift_clean_first_order: float
    band: float
    epsilon: float
    significance_sigmas: float
    max_attack_discrepancy: float
    limiting_factor: str | None
    localization: Localization | None
    t_e_star: float
    threshold_transmission: float
    mean_ordinary: float
    mean_delayed: float
    ordinary_zscore: float
    width_zscore: float
    width_anomaly: bool


def decide(comparison: SampleComparison, model: DecayModel, alpha0: CoherentAmplitude,
           tau: float, delta_t: float, config: DetectionConfig) -> DetectionReport:
    """Turn a population comparison into a verdict, localization and threshold.

    The statistic is the distance of the observed shift from the exact clean
    prediction; the decision band is the wider of significance_sigmas
    standard errors and the precision dead-band epsilon.  A statistic beyond
    the band means a tap is present.  Within the band the line is clean,
    unless the band is too wide to resolve any tap position at all, which is
    reported as inconclusive; a statistic exactly on the edge is also
    inconclusive.  A constant rate has zero discrepancy for every tap
    position, so it degenerates to a plain consistency check.
    """
    clean = expected_shift_clean(model, alpha0, tau, delta_t)
    statistic = abs(comparison.observed_shift - clean.exact)
    band = max(config.significance_sigmas * comparison.standard_error, config.epsilon)

    n = grid_points(model, tau, config.grid_resolution)
    grid = np.linspace(0.0, tau, n)
    discrepancy = np.abs(clean.exact - _exact_shift_curve(model, alpha0.magnitude(), grid, delta_t))
    max_discrепancy = float(np.max(discrepancy))
    degenerate = _constant_rate(model, np.linspace(0.0, tau + delta_t, n))

    limiting: str | None = None
    if statistic > band:
        verdict = Verdict.EVE_PRESENT
    elif statistic == band:
        verdict = Verdict.INCONCLUSIVE
        limiting = "statistic exactly on the decision band edge"
    elif not degenerate and band >= max_discrепancy:
        verdict = Verdict.INCONCLUSIVE
        limiting = (
            f"decision band {band:.6g} cannot resolve any tap position "
            f"(maximal attack discrepancy {max_discrепancy:.6g})"
        )
    else:
        verdict = Verdict.CLEAN

    localization = None
    if verdict is Verdict.EVE_PRESENT:
        localization = localize(
            model, comparison.observed_shift, alpha0, delta_t, tau,
            config.grid_resolution,
            standard_error=comparison.standard_error,
            sigmas=config.significance_sigmas,
        )

    t_e_star = min_detectable_attack_time(
        model, alpha0, delta_t, config.epsilon, tau, config.grid_resolution
    )

    primary = comparison.per_basis[0]
    expected_ordinary = alpha0.quadrature_mean(primary.basis)
    se_ordinary = math.sqrt(primary.var_ordinary / primary.n_ordinary)
    ordinary_z = 0.0
    if se_ordinary > 0.0:
        # A tap with a mistuned splitter leaves its trace here even before
        # the route comparison.
        ordinary_z = (primary.mean_ordinary - expected_ordinary) / se_ordinary

    return DetectionReport(
        verdict=verdict,
        observed_shift=comparison.observed_shift,
        standard_error=comparison.standard_error,
        expected_shift_clean=clean.exact,
        expected_shift_clean_first_order=clean.first_order,
        band=band,
        epsilon=config.epsilon,
        significance_sigmas=config.significance_sigmas,
        max_attack_discrepancy=max_discrепancy,
        limiting_factor=limiting,
        localization=localization,
        t_e_star=t_e_star,
        threshold_transmission=security_threshold(model, t_e_star),
        mean_ordinary=comparison.mean_ordinary,
        mean_delayed=comparison.mean_delayed,
        ordinary_zscore=ordinary_z,
        width_zscore=comparison.width_zscore,
        width_anomaly=abs(comparison.width_zscore) > config.significance_sigmas,
    )
