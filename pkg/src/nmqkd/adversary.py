"""Beam-splitter eavesdropping: attack tuning and information accounting.

Eve taps the line at position t_e (c = 1) with a beam splitter, stores the
reflected arm and forwards the transmitted arm losslessly.  Tuning the
transmissivity to eta_e = exp(-(Gamma(tau) - Gamma(t_e))) reproduces the clean
end-to-end loss on the ordinary route, so the attack is invisible to anyone
who only watches that route.

Information is scored per quadrature for an individual attack: a homodyne
readout of Gaussian modulation of variance v_a through a pure-loss channel of
transmission T carries 0.5*log2(1 + T*v_a/N0) bits.  Eve is assumed to know
the rate law, the line length and all public disclosures, and to measure her
stored arm in the disclosed basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .decay import DecayModel, accumulated_damping
from .gaussian import SHOT_NOISE


@dataclass(frozen=True)
class AttackConfig:
    """Eve's intercept position and beam-splitter transmissivity.

    ``eta_e = None`` means Auto: tune to be undetectable on the ordinary
    route.  The position is validated against the line length at the point of
    use, where tau is known.
    """

    t_e: float
    eta_e: float | None = None

    def __post_init__(self) -> None:
        if not (self.t_e >= 0.0 and math.isfinite(self.t_e)):
            raise ValueError(f"t_e must be nonnegative and finite, got {self.t_e}")
        if self.eta_e is not None and not (0.0 <= self.eta_e <= 1.0):
            raise ValueError(f"eta_e must lie in [0, 1] or be None (auto), got {self.eta_e}")


@dataclass(frozen=True)
class SecurityAssessment:
    """Shannon-information comparison between Bob and Eve for one attack."""

    i_ab: float
    i_ae: float
    margin: float
    secure: bool
    eta_threshold: float


def _check_position(t_e: float, tau: float) -> None:
    if not (0.0 <= t_e <= tau):
        raise ValueError(f"attack position t_e={t_e} outside the line [0, {tau}]")


def optimal_transmissivity(model: DecayModel, t_e: float, tau: float) -> float:
    """Beam-splitter transmissivity that hides the attack on the ordinary route.

    eta_e = exp(-(Gamma(tau) - Gamma(t_e))), the loss Eve must imitate for the
    remainder of the line she bypasses.
    """
    _check_position(t_e, tau)
    return math.exp(-(accumulated_damping(model, tau) - accumulated_damping(model, t_e)))


def eve_effective_transmission(model: DecayModel, t_e: float, tau: float) -> float:
    """Eve's end-to-end share of the signal energy under the tuned attack.

    T_E = exp(-Gamma(t_e)) * (1 - eta_e) = exp(-Gamma(t_e)) - exp(-Gamma(tau)).
    """
    _check_position(t_e, tau)
    eta_e = optimal_transmissivity(model, t_e, tau)
    return math.exp(-accumulated_damping(model, t_e)) * (1.0 - eta_e)


def mutual_information(v_a: float, t_channel: float, n0: float = SHOT_NOISE) -> float:
    """Bits per pulse and quadrature of a homodyne readout through pure loss."""
    if v_a < 0.0:
        raise ValueError(f"modulation variance must be nonnegative, got {v_a}")
    if not (0.0 <= t_channel <= 1.0):
        raise ValueError(f"transmission must lie in [0, 1], got {t_channel}")
    if not (n0 > 0.0):
        raise ValueError(f"shot noise must be positive, got {n0}")
    return 0.5 * math.log2(1.0 + t_channel * v_a / n0)


def security_threshold(model: DecayModel, t_e_star: float) -> float:
    """Minimal overall transmission that keeps the key secure.

    eta_th = 0.5 * exp(-Gamma(t_e_star)): with attacks confined to positions
    later than t_e_star, Bob outperforms Eve whenever exp(-Gamma(tau)) is at
    least this value.  t_e_star = 0 recovers the uniform-loss bound 1/2.
    """
    if t_e_star < 0.0:
        raise ValueError(f"t_e_star must be nonnegative, got {t_e_star}")
    return 0.5 * math.exp(-accumulated_damping(model, t_e_star))


def assess_security(model: DecayModel, t_e: float, tau: float, v_a: float) -> SecurityAssessment:
    """Compare Bob's and Eve's information under the optimally tuned attack.

    Bob sees T_B = exp(-Gamma(tau)); Eve keeps T_E = exp(-Gamma(t_e)) - T_B.
    The key survives iff I_AB >= I_AE, i.e. iff T_B >= 0.5*exp(-Gamma(t_e)).
    ``secure`` is evaluated against that threshold; within one ulp of the
    boundary it may disagree with the sign of ``margin``.
    """
    _check_position(t_e, tau)
    t_b = math.exp(-accumulated_damping(model, tau))
    t_e_trans = math.exp(-accumulated_damping(model, t_e)) - t_b
    i_ab = mutual_information(v_a, t_b)
    i_ae = mutual_information(v_a, t_e_trans)
    eta_threshold = security_threshold(model, t_e)
    return SecurityAssessment(
        i_ab=i_ab,
        i_ae=i_ae,
        margin=i_ab - i_ae,
        secure=t_b >= eta_threshold,
        eta_threshold=eta_threshold,
    )
