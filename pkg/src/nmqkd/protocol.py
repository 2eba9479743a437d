"""Full QKD session simulation over a lossy line with an optional tap.

Alice encodes key values as Gaussian-modulated coherent states and always
sends them down the ordinary line of length tau.  Reference pulses of fixed
amplitude alpha_0 are interleaved at random positions and routed, by a fair
coin, through either the ordinary line or a delayed one of length
tau + delta_t.  Bob never learns the route during the session: he picks a
random quadrature per pulse and rescales every outcome by the clean
ordinary-line loss.  Routes of the reference pulses are disclosed afterwards.

Randomness is drawn from four named Philox streams derived from
``SeedSequence((seed, domain))``:

==================  ====================================================
domain 0 structure  reference positions within the pulse train
domain 1 alice      key re block, key im block, reference route block
domain 2 bob        measurement bases, one bit per pulse
domain 3 noise      standard-normal homodyne noise, one draw per pulse
==================  ====================================================

All draws happen up front in this fixed layout, so a transcript is a pure
function of (config, attack) and is invariant to execution order and worker
count downstream.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adversary import AttackConfig, optimal_transmissivity
from .decay import DampingProfile, OhmicLorentzDrude, accumulated_damping
from .gaussian import SHOT_NOISE, CoherentAmplitude, HomodyneOutcome, QuadratureBasis

_STREAM_STRUCTURE = 0
_STREAM_ALICE = 1
_STREAM_BOB = 2
_STREAM_NOISE = 3


class PulseKind(enum.Enum):
    KEY = "key"
    REFERENCE = "reference"


class Route(enum.Enum):
    ORDINARY = "ordinary"
    DELAYED = "delayed"


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one protocol run.

    ``modulation_variance`` is the variance of each quadrature of the key
    amplitudes; ``reference_amplitude`` is the fixed pilot alpha_0.  The
    delay should stay small against the variation scale of the rate law; a
    warning is issued for Lorentz-Drude models when
    delta_t > 0.1/max(omega_0, omega_c).
    """

    profile: DampingProfile
    delta_t: float
    modulation_variance: float = 10.0 * SHOT_NOISE
    reference_amplitude: CoherentAmplitude = CoherentAmplitude(20.0, 0.0)
    n_key: int = 0
    n_ref: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.delta_t > 0.0 and math.isfinite(self.delta_t)):
            raise ValueError(f"delta_t must be positive and finite, got {self.delta_t}")
        if self.modulation_variance < 0.0:
            raise ValueError(f"modulation_variance must be nonnegative, got {self.modulation_variance}")
        if self.n_key < 0 or self.n_ref < 0:
            raise ValueError("pulse counts must be nonnegative")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        model = self.profile.model
        if isinstance(model, OhmicLorentzDrude):
            scale = 0.1 / max(model.omega_0, model.omega_c)
            if self.delta_t > scale:
                warnings.warn(
                    f"delta_t={self.delta_t:g} exceeds 0.1/max(omega_0, omega_c)={scale:g}; "
                    "first-order shift expressions lose accuracy",
                    UserWarning,
                    stacklevel=2,
                )

    @property
    def tau(self) -> float:
        return self.profile.horizon

    @property
    def n_pulses(self) -> int:
        return self.n_key + self.n_ref


@dataclass(frozen=True)
class PulseRecord:
    """One pulse of a transcript; key pulses always travel the ordinary route."""

    index: int
    kind: PulseKind
    route: Route
    sent: CoherentAmplitude
    basis: QuadratureBasis
    outcome: HomodyneOutcome

    def __post_init__(self) -> None:
        if self.kind is PulseKind.KEY and self.route is not Route.ORDINARY:
            raise ValueError("key pulses must use the ordinary route")
        if not self.outcome.rescaled:
            raise ValueError("transcript outcomes must be rescaled")


@dataclass(frozen=True)
class SessionTranscript:
    """Record of one session, stored columnar for bulk analysis.

    ``disclosure`` maps each reference-pulse index to its route; it is the
    information Alice reveals after the session.  ``records()`` materializes
    the per-pulse view.
    """

    config: SessionConfig
    attack: AttackConfig | None
    is_reference: np.ndarray
    is_delayed: np.ndarray
    sent_re: np.ndarray
    sent_im: np.ndarray
    basis_is_p: np.ndarray
    values: np.ndarray
    disclosure: dict[int, Route] = field(repr=False)

    def __post_init__(self) -> None:
        n = self.config.n_pulses
        for name in ("is_reference", "is_delayed", "sent_re", "sent_im", "basis_is_p", "values"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")
            arr.setflags(write=False)
        if len(self.disclosure) != int(np.count_nonzero(self.is_reference)):
            raise ValueError("disclosure must cover exactly the reference pulses")

    @property
    def n_pulses(self) -> int:
        return self.config.n_pulses

    def pulse(self, i: int) -> PulseRecord:
        kind = PulseKind.REFERENCE if self.is_reference[i] else PulseKind.KEY
        route = Route.DELAYED if self.is_delayed[i] else Route.ORDINARY
        basis = QuadratureBasis.P if self.basis_is_p[i] else QuadratureBasis.X
        return PulseRecord(
            index=i,
            kind=kind,
            route=route,
            sent=CoherentAmplitude(float(self.sent_re[i]), float(self.sent_im[i])),
            basis=basis,
            outcome=HomodyneOutcome(value=float(self.values[i]), basis=basis, rescaled=True),
        )

    def records(self) -> list[PulseRecord]:
        return [self.pulse(i) for i in range(self.n_pulses)]


def _stream(seed: int, domain: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, domain))))


def generate_key_amplitudes(config: SessionConfig, rng: np.random.Generator) -> list[CoherentAmplitude]:
    """Draw Alice's key amplitudes: independent zero-mean Gaussian quadratures.

    The re block is drawn before the im block, matching the session layout.
    """
    sigma = math.sqrt(config.modulation_variance)
    re = rng.normal(0.0, sigma, config.n_key)
    im = rng.normal(0.0, sigma, config.n_key)
    return [CoherentAmplitude(float(r), float(i)) for r, i in zip(re, im)]


def route_reference_pulses(config: SessionConfig, rng: np.random.Generator) -> list[Route]:
    """Fair independent route choice for each reference pulse."""
    u = rng.random(config.n_ref)
    return [Route.DELAYED if x < 0.5 else Route.ORDINARY for x in u]


def effective_transmission(profile: DampingProfile, route: Route,
                           attack: AttackConfig | None, delta_t: float) -> float:
    """End-to-end intensity transmission seen by Bob for one route.

    Clean lines damp over their full length.  Under attack the line damps
    only up to the tap, then Eve's splitter applies eta_e and the rest is
    lossless; on the delayed route the tap position shifts by delta_t.
    """
    if not (delta_t > 0.0):
        raise ValueError(f"delta_t must be positive, got {delta_t}")
    model = profile.model
    tau = profile.horizon
    length = tau if route is Route.ORDINARY else tau + delta_t
    if attack is None:
        return math.exp(-accumulated_damping(model, length))
    if not (0.0 <= attack.t_e <= tau):
        raise ValueError(f"attack position t_e={attack.t_e} outside the line [0, {tau}]")
    eta_e = attack.eta_e
    if eta_e is None:
        eta_e = optimal_transmissivity(model, attack.t_e, tau)
    t_tap = attack.t_e if route is Route.ORDINARY else attack.t_e + delta_t
    return math.exp(-accumulated_damping(model, t_tap)) * eta_e


def run_session(config: SessionConfig, attack: AttackConfig | None = None) -> SessionTranscript:
    """Simulate one full session and return its transcript.

    Bob's side is route-blind: the basis draw and the rescaling factor
    exp(Gamma(tau)/2) depend only on the public line parameters, never on the
    per-pulse route.
    """
    n = config.n_pulses
    n_ref, n_key = config.n_ref, config.n_key

    rng_structure = _stream(config.seed, _STREAM_STRUCTURE)
    rng_alice = _stream(config.seed, _STREAM_ALICE)
    rng_bob = _stream(config.seed, _STREAM_BOB)
    rng_noise = _stream(config.seed, _STREAM_NOISE)

    ref_positions = np.sort(rng_structure.choice(n, size=n_ref, replace=False)) if n_ref else np.empty(0, dtype=np.int64)
    is_reference = np.zeros(n, dtype=bool)
    is_reference[ref_positions] = True

    sigma = math.sqrt(config.modulation_variance)
    key_re = rng_alice.normal(0.0, sigma, n_key)
    key_im = rng_alice.normal(0.0, sigma, n_key)
    ref_delayed = rng_alice.random(n_ref) < 0.5

    sent_re = np.empty(n)
    sent_im = np.empty(n)
    sent_re[~is_reference] = key_re
    sent_im[~is_reference] = key_im
    sent_re[is_reference] = config.reference_amplitude.re
    sent_im[is_reference] = config.reference_amplitude.im

    is_delayed = np.zeros(n, dtype=bool)
    is_delayed[ref_positions] = ref_delayed

    eta_ordinary = effective_transmission(config.profile, Route.ORDINARY, attack, config.delta_t)
    eta_delayed = effective_transmission(config.profile, Route.DELAYED, attack, config.delta_t)
    eta = np.where(is_delayed, eta_delayed, eta_ordinary)

    basis_is_p = rng_bob.integers(0, 2, n).astype(bool)
    encoded = np.where(basis_is_p, sent_im, sent_re)
    raw = np.sqrt(eta) * encoded + math.sqrt(SHOT_NOISE) * rng_noise.standard_normal(n)

    eta_rescale = math.exp(-accumulated_damping(config.profile.model, config.tau))
    values = raw / math.sqrt(eta_rescale)

    disclosure = {
        int(i): (Route.DELAYED if d else Route.ORDINARY)
        for i, d in zip(ref_positions, ref_delayed)
    }
    return SessionTranscript(
        config=config,
        attack=attack,
        is_reference=is_reference,
        is_delayed=is_delayed,
        sent_re=sent_re,
        sent_im=sent_im,
        basis_is_p=basis_is_p,
        values=values,
        disclosure=disclosure,
    )
