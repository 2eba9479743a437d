"""Time-dependent channel decay rates and accumulated damping.

A lossy bosonic channel is described by its decay rate ``gamma(t)``.  Three
rate laws are supported:

* ``Markovian`` -- constant rate ``gamma_m``, uniform loss along the line.
* ``OhmicLorentzDrude`` -- weak coupling to an Ohmic reservoir with a
  Lorentz-Drude cutoff,

      gamma(t) = gamma_m * [1 - exp(-omega_c t) cos(omega_0 t)
                              - (omega_c/omega_0) exp(-omega_c t) sin(omega_0 t)]

  which starts at zero, relaxes to ``gamma_m`` on the reservoir memory scale
  ``1/omega_c`` and oscillates on the way when ``omega_c < omega_0``.
* ``Tabulated`` -- arbitrary sampled rate curves, linearly interpolated.

The damping exponent is ``Gamma(t) = 2 * integral_0^t gamma(s) ds`` and the
intensity transmissivity is ``exp(-Gamma(t))``.  Closed forms are used for the
built-in laws; an adaptive-quadrature path is kept as an independent
cross-check.  Units use c = 1, so times and positions along the line are
interchangeable and rates are inverse times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad


class UnsupportedModelError(TypeError):
    """Raised when an operation does not apply to the given decay model."""


@dataclass(frozen=True)
class Markovian:
    """Constant decay rate ``gamma_m > 0`` (inverse time)."""

    gamma_m: float

    def __post_init__(self) -> None:
        if not (self.gamma_m > 0.0 and np.isfinite(self.gamma_m)):
            raise ValueError(f"gamma_m must be positive and finite, got {self.gamma_m}")


@dataclass(frozen=True)
class OhmicLorentzDrude:
    """Ohmic reservoir with Lorentz-Drude cutoff, weak-coupling rate law.

    ``gamma_m`` is the asymptotic rate, ``omega_0`` the mode angular frequency
    and ``omega_c`` the cutoff angular frequency (all inverse times).  The
    closed-form rate assumes the weak-coupling regime; all positive parameter
    combinations are accepted.
    """

    gamma_m: float
    omega_0: float
    omega_c: float

    def __post_init__(self) -> None:
        for name in ("gamma_m", "omega_0", "omega_c"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class Tabulated:
    """Sampled rate curve, linearly interpolated between knots.

    Times must be strictly increasing and start at 0; rates must be
    nonnegative.  Beyond the last knot the rate is held at its final value.
    """

    times: np.ndarray
    rates: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        if times.ndim != 1 or rates.ndim != 1 or times.size != rates.size:
            raise ValueError("times and rates must be 1-d arrays of equal length")
        if times.size < 2:
            raise ValueError("a tabulated model needs at least two samples")
        if times[0] != 0.0:
            raise ValueError(f"first sample time must be 0, got {times[0]}")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(rates < 0.0) or not np.all(np.isfinite(rates)):
            raise ValueError("rates must be finite and nonnegative")
        times.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rates", rates)
        # Cumulative exact integral of the piecewise-linear rate at each knot.
        cum = np.concatenate(
            ([0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(times)))
        )
        cum.setflags(write=False)
        object.__setattr__(self, "_cum_integral", cum)


DecayModel = Union[Markovian, OhmicLorentzDrude, Tabulated]


@dataclass(frozen=True)
class DampingProfile:
    """A decay model together with the line length tau (c = 1)."""

    model: DecayModel
    horizon: float

    def __post_init__(self) -> None:
        if not (self.horizon > 0.0 and np.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive and finite, got {self.horizon}")


def _check_nonnegative_time(t: np.ndarray) -> None:
    if np.any(t < 0.0):
        raise ValueError("time must be nonnegative")


def rate(model: DecayModel, t):
    """Decay rate ``gamma(t)``.  Accepts scalar or array ``t >= 0``."""
    t_arr = np.asarray(t, dtype=float)
    _check_nonnegative_time(t_arr)
    if isinstance(model, Markovian):
        out = np.full_like(t_arr, model.gamma_m)
    elif isinstance(model, OhmicLorentzDrude):
        a, b = model.omega_c, model.omega_0
        damp = np.exp(-a * t_arr)
        out = model.gamma_m * (
            1.0 - damp * np.cos(b * t_arr) - (a / b) * damp * np.sin(b * t_arr)
        )
    elif isinstance(model, Tabulated):
        out = np.interp(t_arr, model.times, model.rates)
    else:
        raise UnsupportedModelError(f"unknown decay model {type(model).__name__}")
    return out if t_arr.ndim else float(out)


def accumulated_damping(model: DecayModel, t):
    """Damping exponent ``Gamma(t) = 2 * integral_0^t gamma(s) ds``.

    Uses closed forms for the Markovian and Lorentz-Drude laws and the exact
    integral of the linear interpolant for tabulated rates.
    """
    t_arr = np.asarray(t, dtype=float)
    _check_nonnegative_time(t_arr)
    if isinstance(model, Markovian):
        out = 2.0 * model.gamma_m * t_arr
    elif isinstance(model, OhmicLorentzDrude):
        # Elementary antiderivatives of exp(-a s) cos(b s) and exp(-a s) sin(b s)
        # combine into a single damped-oscillation correction to the linear term.
        a, b = model.omega_c, model.omega_0
        w2 = a * a + b * b
        damp = np.exp(-a * t_arr)
        osc = damp * (((b * b - a * a) / b) * np.sin(b * t_arr) - 2.0 * a * np.cos(b * t_arr))
        out = 2.0 * model.gamma_m * (t_arr - (2.0 * a + osc) / w2)
    elif isinstance(model, Tabulated):
        times, rates = model.times, model.rates
        cum = model._cum_integral
        idx = np.clip(np.searchsorted(times, t_arr, side="right") - 1, 0, times.size - 2)
        t0 = times[idx]
        inside = t_arr <= times[-1]
        # Partial trapezoid on the containing segment; constant tail beyond.
        gamma_t = np.interp(t_arr, times, rates)
        partial = 0.5 * (rates[idx] + gamma_t) * (t_arr - t0)
        tail = cum[-1] + rates[-1] * (t_arr - times[-1])
        out = 2.0 * np.where(inside, cum[idx] + partial, tail)
    else:
        raise UnsupportedModelError(f"unknown decay model {type(model).__name__}")
    return out if t_arr.ndim else float(out)


def accumulated_damping_quadrature(model: DecayModel, t: float,
                                   epsabs: float = 1e-12, epsrel: float = 1e-12) -> float:
    """``Gamma(t)`` by adaptive quadrature of the rate; oracle for the closed forms."""
    t = float(t)
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    if t == 0.0:
        return 0.0
    integral, _ = quad(lambda s: rate(model, s), 0.0, t,
                       epsabs=epsabs, epsrel=epsrel, limit=500)
    return 2.0 * integral


def transmissivity(model: DecayModel, t):
    """Channel intensity transmissivity ``exp(-Gamma(t))`` in (0, 1]."""
    return np.exp(-accumulated_damping(model, t))


def reservoir_correlation_time(model: DecayModel) -> float:
    """Reservoir memory time ``1/omega_c``; defined for Lorentz-Drude only."""
    if isinstance(model, OhmicLorentzDrude):
        return 1.0 / model.omega_c
    raise UnsupportedModelError(
        f"reservoir correlation time is undefined for {type(model).__name__}"
    )


@dataclass(frozen=True)
class RateInversion:
    """Roots of ``gamma(t) = target`` in a window.

    ``entire_window`` marks the degenerate case of a constant rate equal to
    the target, where every point solves the equation and localization carries
    no information.
    """

    roots: tuple[float, ...]
    entire_window: bool = False


def grid_points(model: DecayModel, width: float, resolution: int | None) -> int:
    """Grid size for bracketing scans: explicit value, or the default floor.

    The default is 10000 points, raised to keep at least 50 points per
    oscillation period 2*pi/omega_0 so every sign change gets bracketed.
    """
    if resolution is not None:
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        return int(resolution)
    n = 10_000
    if isinstance(model, OhmicLorentzDrude):
        per_period = int(np.ceil(50.0 * width * model.omega_0 / (2.0 * np.pi)))
        n = max(n, per_period)
    return n


def bracketed_roots(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                    n: int, xtol: float) -> list[float]:
    """All roots of a vectorized scalar function found by grid bracketing.

    Sign changes between adjacent grid nodes are refined by bisection to
    ``xtol``; exact zeros sitting on grid nodes are taken once as-is.
    Tangential touches between nodes (no sign change) are not detected.
    """
    grid = np.linspace(lo, hi, n)
    values = f(grid)
    roots = list(grid[values == 0.0])
    strict = values[:-1] * values[1:] < 0.0
    (idx,) = np.nonzero(strict)
    if idx.size:
        lo_b, hi_b = grid[idx], grid[idx + 1]
        f_lo = values[idx]
        for _ in range(100):
            if np.all(hi_b - lo_b <= xtol):
                break
            mid = 0.5 * (lo_b + hi_b)
            f_mid = f(mid)
            left = f_lo * f_mid <= 0.0
            hi_b = np.where(left, mid, hi_b)
            lo_b = np.where(left, lo_b, mid)
            f_lo = np.where(left, f_lo, f_mid)
        roots.extend(0.5 * (lo_b + hi_b))
    roots.sort()
    deduped: list[float] = []
    for r in roots:
        if not deduped or r - deduped[-1] > xtol:
            deduped.append(float(r))
    return deduped


def invert_rate(model: DecayModel, target: float, window: tuple[float, float],
                resolution: int | None = None) -> RateInversion:
    """Solve ``gamma(t) = target`` for t in the window.

    Returns all bracketed roots sorted ascending.  A constant rate equal to
    the target returns the ``entire_window`` marker instead of a root list;
    no root at all is a valid empty result.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"window must be nonempty, got ({lo}, {hi})")
    if lo < 0.0:
        raise ValueError("window must start at a nonnegative time")
    n = grid_points(model, hi - lo, resolution)
    grid = np.linspace(lo, hi, n)
    values = rate(model, grid)
    scale = max(float(np.max(np.abs(values))), abs(target), 1e-300)
    if float(np.max(np.abs(values - target))) <= 1e-12 * scale:
        return RateInversion(roots=(), entire_window=True)
    xtol = 1e-12 * (hi - lo)
    roots = bracketed_roots(lambda t: rate(model, t) - target, lo, hi, n, xtol)
    return RateInversion(roots=tuple(roots), entire_window=False)
