"""Adiabatic control pulses: Rabi envelope, detuning sweep and their derivatives.

All frequencies are angular (rad/us), all times are us. Quoted peak amplitudes
refer to a reference protocol duration; when the protocol is stretched or
compressed the amplitudes scale as 1/T_tot and all time scales (pulse width,
phase durations) scale proportionally to T_tot, so the pulse area is preserved.

The protocol has three phases:
  I   - excitation pulse; the detuning sweeps +Delta_max -> -Delta_max through
        resonance (adiabatic rapid passage, |1> -> |r>),
  II  - Rabi field exactly zero; the detuning is continuously reset
        -Delta_max -> +Delta_max so the second sweep can repeat,
  III - de-excitation pulse, an identical sweep completing |r> -> -|1>.

Two alternative detuning shapes are selectable: 'full-sine' (a single
half-cosine over the whole protocol) and 'plateau' (constant +/-Delta_max in
phases I/III with the inversion confined to phase II). Neither alternative
sweeps through resonance while the Rabi field is on, so they do not realize
the controlled-phase gate; they are kept for baseline comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

DETUNING_SHAPES = ("sine", "full-sine", "plateau")


def _sweep(x):
    """Smooth sinusoidal sweep profile mapping [0, 1] onto [+1, -1].

    The profile sin(pi/2 * cos(pi*x)) has vanishing slope at both endpoints,
    so detuning segments join continuously and differentiably across phase
    boundaries, and it keeps the population left behind by the rapid passage
    of the doubly-excited branch below 1e-6 per protocol.
    """
    return np.sin(0.5 * np.pi * np.cos(np.pi * x))


def _sweep_deriv(x):
    """Derivative of the sweep profile with respect to its unit-time argument."""
    return (
        -0.5 * np.pi**2 * np.cos(0.5 * np.pi * np.cos(np.pi * x)) * np.sin(np.pi * x)
    )


@dataclass(frozen=True)
class PulseParams:
    """Quoted pulse parameters.

    omega_max, delta_max : peak angular frequencies (rad/us) quoted at
        ``reference_time``; effective values scale by reference_time/total_time.
    total_time : protocol duration T_tot (us).
    width : Rabi envelope width tau (us) quoted at ``reference_time``.
    phase2_fraction : fraction of T_tot spent in phase II.
    """

    omega_max: float
    delta_max: float
    total_time: float
    width: float
    phase2_fraction: float = 0.1
    reference_time: float = 0.594

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if self.width <= 0:
            raise ValueError("width must be positive")
        if not 0 < self.phase2_fraction < 1:
            raise ValueError("phase2_fraction must lie in (0, 1)")
        if self.reference_time <= 0:
            raise ValueError("reference_time must be positive")

    @property
    def amplitude_scale(self) -> float:
        return self.reference_time / self.total_time

    @property
    def omega_max_eff(self) -> float:
        return self.omega_max * self.amplitude_scale

    @property
    def delta_max_eff(self) -> float:
        return self.delta_max * self.amplitude_scale

    @property
    def width_eff(self) -> float:
        return self.width / self.amplitude_scale


def solve_shape_coefficients(t0: float, tau: float) -> tuple[float, float]:
    """Coefficients (a, b) making the envelope and its slope vanish at t=0.

    The envelope is f(t) = exp(-(t-t0)^4/tau^4) - a - b*t*(t-2*t0); by its
    symmetry about t0 the conditions f(0)=f'(0)=0 also enforce f(2*t0)=0 and
    f'(2*t0)=0.
    """
    if t0 <= 0 or tau <= 0:
        raise ValueError("t0 and tau must be positive")
    e0 = np.exp(-(t0 / tau) ** 4)
    de0 = 4.0 * t0**3 / tau**4 * e0  # d/dt exp(-(t-t0)^4/tau^4) at t=0
    # f(0)  = e0 - a           = 0
    # f'(0) = de0 + 2*b*t0     = 0
    M = np.array([[1.0, 0.0], [0.0, 2.0 * t0]])
    rhs = np.array([e0, -de0])
    a, b = np.linalg.solve(M, rhs)
    return float(a), float(b)


def _raw_segment(s, t0: float, tau: float, a: float, b: float):
    return np.exp(-((s - t0) ** 4) / tau**4) - a - b * s * (s - 2.0 * t0)


def _raw_segment_deriv(s, t0: float, tau: float, a: float, b: float):
    return (
        -4.0 * (s - t0) ** 3 / tau**4 * np.exp(-((s - t0) ** 4) / tau**4)
        - b * (2.0 * s - 2.0 * t0)
    )


def _segment_peak(t0: float, tau: float, a: float, b: float) -> float:
    """Maximum of |raw envelope| over one pulse segment [0, 2*t0]."""
    s = np.linspace(0.0, 2.0 * t0, 4001)
    vals = np.abs(_raw_segment(s, t0, tau, a, b))
    i = int(np.argmax(vals))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, len(s) - 1)]
    res = minimize_scalar(
        lambda x: -abs(_raw_segment(x, t0, tau, a, b)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-14},
    )
    return max(float(-res.fun), float(vals[i]))


@dataclass(frozen=True)
class PulseSchedule:
    """Immutable, fully resolved pulse schedule.

    t1, t2, t3 are the durations of phases I, II, III; segment_center is the
    pulse center within each of phases I and III.
    """

    params: PulseParams
    a: float
    b: float
    norm: float
    t1: float
    t2: float
    t3: float
    segment_center: float
    tau: float
    detuning_shape: str = "sine"

    @property
    def total_time(self) -> float:
        return self.params.total_time

    @property
    def phase_boundaries(self) -> tuple[float, float]:
        """Times at which phase II starts and ends."""
        return self.t1, self.t1 + self.t2

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        T = self.total_time
        if np.any(t < -1e-12) or np.any(t > T + 1e-12):
            raise ValueError(f"time out of protocol range [0, {T}]")
        return np.clip(t, 0.0, T)

    def _segment_local_time(self, t):
        """Local time within the active pulse segment, or NaN in phase II."""
        b1, b2 = self.phase_boundaries
        s = np.where(t <= b1, t, t - b2)
        return s, (t > b1) & (t < b2)

    def omega(self, t):
        """Rabi frequency Omega(t) in rad/us."""
        t = self._check_domain(t)
        s, in_phase2 = self._segment_local_time(t)
        s = np.where(in_phase2, 0.0, s)
        raw = _raw_segment(s, self.segment_center, self.tau, self.a, self.b)
        out = np.where(in_phase2, 0.0, self.params.omega_max_eff / self.norm * raw)
        return out if out.ndim else float(out)

    def delta(self, t):
        """Detuning Delta(t) in rad/us."""
        t = self._check_domain(t)
        dm = self.params.delta_max_eff
        b1, b2 = self.phase_boundaries
        if self.detuning_shape == "full-sine":
            out = dm * np.cos(np.pi * t / self.total_time)
        elif self.detuning_shape == "plateau":
            out = np.where(
                t <= b1,
                dm,
                np.where(t >= b2, -dm, dm * np.cos(np.pi * (t - b1) / self.t2)),
            )
        else:  # "sine": a smooth sinusoidal sweep per phase
            out = np.where(
                t <= b1,
                dm * _sweep(t / self.t1),
                np.where(
                    t >= b2,
                    dm * _sweep((t - b2) / self.t3),
                    -dm * _sweep((t - b1) / self.t2),
                ),
            )
        return out if out.ndim else float(out)

    def omega_dot(self, t):
        """Analytic time derivative of omega."""
        t = self._check_domain(t)
        s, in_phase2 = self._segment_local_time(t)
        s = np.where(in_phase2, 0.0, s)
        raw = _raw_segment_deriv(s, self.segment_center, self.tau, self.a, self.b)
        out = np.where(in_phase2, 0.0, self.params.omega_max_eff / self.norm * raw)
        return out if out.ndim else float(out)

    def delta_dot(self, t):
        """Analytic time derivative of delta."""
        t = self._check_domain(t)
        dm = self.params.delta_max_eff
        b1, b2 = self.phase_boundaries
        if self.detuning_shape == "full-sine":
            out = -dm * np.pi / self.total_time * np.sin(np.pi * t / self.total_time)
        elif self.detuning_shape == "plateau":
            inner = -dm * np.pi / self.t2 * np.sin(np.pi * (t - b1) / self.t2)
            out = np.where((t <= b1) | (t >= b2), 0.0, inner)
        else:
            out = np.where(
                t <= b1,
                dm / self.t1 * _sweep_deriv(t / self.t1),
                np.where(
                    t >= b2,
                    dm / self.t3 * _sweep_deriv((t - b2) / self.t3),
                    -dm / self.t2 * _sweep_deriv((t - b1) / self.t2),
                ),
            )
        return out if out.ndim else float(out)

    def derivatives(self, t):
        """(dOmega/dt, dDelta/dt) at t."""
        return self.omega_dot(t), self.delta_dot(t)


def make_schedule(params: PulseParams, detuning_shape: str = "sine") -> PulseSchedule:
    """Resolve a PulseParams into a concrete schedule.

    Phase II takes phase2_fraction * T_tot; phases I and III split the rest
    equally, each holding one pulse segment centered in the phase.
    """
    if detuning_shape not in DETUNING_SHAPES:
        raise ValueError(f"detuning_shape must be one of {DETUNING_SHAPES}")
    T = params.total_time
    t2 = params.phase2_fraction * T
    t1 = t3 = (T - t2) / 2.0
    t0 = t1 / 2.0
    tau = params.width_eff
    a, b = solve_shape_coefficients(t0, tau)
    norm = _segment_peak(t0, tau, a, b)
    return PulseSchedule(
        params=params,
        a=a,
        b=b,
        norm=norm,
        t1=t1,
        t2=t2,
        t3=t3,
        segment_center=t0,
        tau=tau,
        detuning_shape=detuning_shape,
    )
