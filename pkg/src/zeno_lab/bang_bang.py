"""Pulsed measurements of an exponentially decaying state with a band-limited detector.

The unstable state |S> decays exactly exponentially with width Gamma into a
continuum of momentum modes |k>.  The amplitude found in mode k after an
undisturbed evolution of length t is

    b(k, t) = sqrt(Gamma/2pi) * (exp(-i k t) - exp(-i(M0 - i Gamma/2) t))
              / (k - M0 + i Gamma/2)

so the mode density is

    |b(k, t)|^2 = (Gamma/2pi) * (1 - 2 e^{-Gamma t/2} cos((k-M0) t) + e^{-Gamma t})
                  / ((k-M0)^2 + Gamma^2/4),

normalized to 1 - e^{-Gamma t} over the full k axis.  A detector that only
registers decay products inside the energy band [center-lam, center+lam]
clicks at a single measurement after a wait of tau with probability

    w(tau) = integral of |b(k, tau)|^2 over the band.

For ideal projective measurements repeated at intervals tau the click
probability at exactly the m-th pulse is p(tau)^(m-1) * w(tau) with
p(tau) = e^{-Gamma tau}, and the cumulative no-click probability after
n pulses is

    1 - w(tau) * (1 - e^{-Gamma n tau}) / (1 - e^{-Gamma tau}).

For a perfect detector (lam -> inf) this collapses algebraically to the
bare survival probability e^{-Gamma t}; for a band-limited one it
saturates at 1 - w(tau)/(1 - e^{-Gamma tau}) and grows toward 1 as
tau -> 0: the measurement-induced freeze survives even though the
undisturbed decay is exactly exponential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, integrate


class BandTooEffective(RuntimeError):
    """Band click probability exceeded its 1 - e^{-Gamma tau} bound.

    This cannot happen for a correct quadrature; it indicates a numerical
    defect upstream, so it is raised rather than clipped.
    """


@dataclass(frozen=True)
class ExponentialDecay:
    """Exponential-limit system: width gamma > 0, reference energy m0."""

    gamma: float
    m0: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class DetectorBand:
    """Detectable energy window [center - lam, center + lam]; lam may be inf."""

    lam: float
    center: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be non-negative")


@dataclass(frozen=True)
class MeasurementSchedule:
    """n ideal pulses at times tau, 2 tau, ..., n tau."""

    tau: float
    n: int

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def total_time(self) -> float:
        return self.n * self.tau


@dataclass(frozen=True)
class ClickRecord:
    """Per-step click probabilities and the cumulative no-click curve."""

    per_step: np.ndarray
    no_click: np.ndarray

    def __post_init__(self):
        ps = np.asarray(self.per_step, dtype=float)
        nc = np.asarray(self.no_click, dtype=float)
        if ps.shape != nc.shape or ps.ndim != 1:
            raise ValueError("per_step and no_click must be 1-d arrays of equal length")
        if np.any(ps < -1e-15) or np.any(ps > 1 + 1e-12):
            raise ValueError("per-step click probabilities outside [0, 1]")
        if np.any(nc < -1e-15) or np.any(nc > 1 + 1e-12):
            raise ValueError("no-click probabilities outside [0, 1]")
        if np.any(np.diff(nc) > 1e-15):
            raise ValueError("no-click curve must be non-increasing")
        if np.max(np.abs(1.0 - np.cumsum(ps) - nc)) > 1e-12:
            raise ValueError("no_click is inconsistent with 1 - cumsum(per_step)")


@dataclass(frozen=True)
class FreezePoint:
    """One point of a no-click-vs-tau scan at fixed total time."""

    tau: float
    n: int
    time: float
    no_click: float


def mode_amplitude(sys: ExponentialDecay, k, t: float):
    """Decay amplitude b(k, t) into mode k; accepts scalar or array k."""
    if t < 0:
        raise ValueError("t must be non-negative")
    g = math.sqrt(sys.gamma)
    pole = sys.m0 - 0.5j * sys.gamma
    return (g / math.sqrt(2 * math.pi)
            * (np.exp(-1j * np.asarray(k, dtype=float) * t) - np.exp(-1j * pole * t))
            / (np.asarray(k) - sys.m0 + 0.5j * sys.gamma))


def mode_density(sys: ExponentialDecay, k, t: float):
    """|b(k, t)|^2 from its explicit closed form (not by squaring the amplitude)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    k = np.asarray(k, dtype=float)
    e_half = math.exp(-0.5 * sys.gamma * t)
    e_full = math.exp(-sys.gamma * t)
    dk = k - sys.m0
    num = 1.0 - 2.0 * e_half * np.cos(dk * t) + e_full
    return (sys.gamma / (2 * math.pi)) * num / (dk**2 + 0.25 * sys.gamma**2)


def band_click_probability(sys: ExponentialDecay, band: DetectorBand, tau: float,
                           spec: QuadratureSpec | None = None) -> float:
    """Single-measurement click probability w(tau) for the given band.

    lam = inf returns the closed form 1 - e^{-Gamma tau} so that the
    perfect-detector reduction is algebraically exact downstream.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if band.lam == 0.0 or tau == 0.0:
        return 0.0
    if math.isinf(band.lam):
        return -math.expm1(-sys.gamma * tau)
    if spec is None:
        spec = QuadratureSpec(oscillatory_hint=tau if tau > 0 else None)
    res = integrate(lambda k: mode_density(sys, k, tau),
                    band.center - band.lam, band.center + band.lam, spec)
    return float(res.value.real)


def total_decay_probability(sys: ExponentialDecay, t: float,
                            core_half_width: float | None = None) -> float:
    """Integral of the mode density over the entire k axis.

    Equals 1 - e^{-Gamma t} identically.  Evaluated as quadrature over a
    wide core [m0 - K, m0 + K] plus the analytic tail of the Lorentzian
    envelope; the oscillatory part of the tail is bounded by
    2 sqrt(p) Gamma / (pi t K^2) and neglected, which keeps the total
    error well under 1e-6 for K >= 5000 Gamma.
    """
    if t == 0.0:
        return 0.0
    gamma = sys.gamma
    K = core_half_width if core_half_width is not None else 5000.0 * gamma
    core = band_click_probability(sys, DetectorBand(lam=K, center=sys.m0), t)
    # Residual mass of the non-oscillating envelope
    # (Gamma/2pi)(1 + e^{-Gamma t}) / ((k-m0)^2 + Gamma^2/4) on both tails
    # |k - m0| > K.
    p = math.exp(-gamma * t)
    tail = 2.0 * (1.0 + p) / math.pi * (math.pi / 2 - math.atan(2.0 * K / gamma))
    return core + tail


def click_probability_at_step(sys: ExponentialDecay, band: DetectorBand,
                              sched: MeasurementSchedule, step: int) -> float:
    """Probability that the detector clicks exactly at pulse number ``step``."""
    if not 1 <= step <= sched.n:
        raise ValueError(f"step must be in 1..{sched.n}")
    w = band_click_probability(sys, band, sched.tau)
    return math.exp(-sys.gamma * sched.tau * (step - 1)) * w


def no_click_probability(sys: ExponentialDecay, band: DetectorBand,
                         sched: MeasurementSchedule) -> ClickRecord:
    """Full click record for the schedule: per-step and cumulative no-click."""
    w = band_click_probability(sys, band, sched.tau)
    bound = -math.expm1(-sys.gamma * sched.tau)
    if w > bound * (1 + 1e-12) + 1e-15:
        raise BandTooEffective(
            f"w = {w!r} exceeds 1 - e^(-Gamma tau) = {bound!r}")
    steps = np.arange(1, sched.n + 1)
    per_step = w * np.exp(-sys.gamma * sched.tau * (steps - 1))
    no_click = 1.0 - np.cumsum(per_step)
    return ClickRecord(per_step=per_step, no_click=no_click)


def no_click_closed_form(sys: ExponentialDecay, w: float, tau: float, n: int) -> float:
    """Cumulative no-click probability from the geometric-sum closed form."""
    p_tau = math.exp(-sys.gamma * tau)
    if math.isinf(n * tau):
        return 1.0 - w / (1.0 - p_tau)
    return 1.0 - w * (1.0 - p_tau**n) / (1.0 - p_tau)


def saturation_value(sys: ExponentialDecay, band: DetectorBand, tau: float) -> float:
    """Late-time limit of the no-click probability, 1 - w/(1 - e^{-Gamma tau})."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    w = band_click_probability(sys, band, tau)
    return 1.0 - w / (-math.expm1(-sys.gamma * tau))


def zeno_freeze_curve(sys: ExponentialDecay, band: DetectorBand,
                      t_total: float, taus) -> list[FreezePoint]:
    """No-click probability at fixed total time for a list of pulse intervals.

    The pulse count is n = round(t_total/tau), clamped to at least one
    pulse; the realized time n*tau is reported with each point so a
    rounding mismatch is never silent.
    """
    points = []
    for tau in taus:
        n = max(1, round(t_total / tau))
        sched = MeasurementSchedule(tau=tau, n=n)
        rec = no_click_probability(sys, band, sched)
        points.append(FreezePoint(tau=tau, n=n, time=sched.total_time,
                                  no_click=float(rec.no_click[-1])))
    return points


def schulman_sigma(tau: float) -> float:
    """Continuous-measurement coupling equivalent to pulse interval tau.

    Annotation only (sigma = 4/tau); no continuous-measurement dynamics
    are implemented here.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    return 4.0 / tau
