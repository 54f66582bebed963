"""Splitting protocols: time-dependent tunnelling, interaction quench, pi/2 pulse.

Units: ``hbar = omega = delta_y = 1``.  A schedule is a chain of segments on
which ``g`` is constant and the tunnelling energy has the form
``amp * exp(-rate * (t - t_start)) + base``; this covers the exponential
splitting ramp, its tail after the quench and a square tunnelling pulse.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .hamiltonian import TwoModeParams, ground_state
from .hilbert import SpinState, expectation, JX, JZ2, ladder_elements, m_values
from .observables import SqueezingReport, squeezing_report

NORM_TOLERANCE = 1e-6
RESIDUAL_AREA_LIMIT = math.pi / 10.0
TAIL_E_FOLDINGS = 30.0


class IntegrationError(RuntimeError):
    """Norm drift beyond tolerance; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Pulse:
    area: float = math.pi / 2.0
    start: float = 0.0
    duration: float = 1.0
    shape: str = "square"

    def __post_init__(self):
        if self.shape != "square":
            raise ConfigurationError(f"unsupported pulse shape {self.shape!r}")
        if not 0.0 < self.area <= math.pi:
            raise ConfigurationError("pulse area must lie in (0, pi]")
        if self.duration <= 0:
            raise ConfigurationError("pulse duration must be positive")


@dataclass(frozen=True)
class SplitProtocol:
    """Exponential splitting ``dE(t) = exp(-d_min^2 - gamma t)`` up to ``tau``.

    At ``tau`` the interaction is switched off.  ``tail`` selects whether the
    tunnelling keeps decaying afterwards (``"continue"``, at rate
    ``post_gamma`` which defaults to ``gamma``) or is cut to zero.  For the
    repulsive protocol ``pulse.area`` is the total tunnelling area
    accumulated after ``tau``, tail included.
    """

    d_min: float
    gamma: float
    tau: float
    g0: float
    target_g_param: float
    pulse: Optional[Pulse] = None
    tail: str = "continue"
    post_gamma: Optional[float] = None

    def __post_init__(self):
        if not (self.d_min > 0 and self.gamma > 0 and self.tau > 0):
            raise ConfigurationError("d_min, gamma and tau must be positive")
        if self.tail not in ("continue", "cut"):
            raise ConfigurationError("tail must be 'continue' or 'cut'")
        if self.post_gamma is not None and self.post_gamma <= 0:
            raise ConfigurationError("post_gamma must be positive")
        if self.pulse is not None and self.pulse.start < self.tau:
            raise ConfigurationError("pulse must start after the quench at tau")

    @property
    def delta_e0(self) -> float:
        return math.exp(-self.d_min**2)

    @property
    def tail_rate(self) -> float:
        return self.gamma if self.post_gamma is None else self.post_gamma

    def g_param(self, n_particles: int, t: float) -> float:
        return 2.0 * self.g0 * n_particles / (self.delta_e0 * math.exp(-self.gamma * t))

    @classmethod
    def for_target(cls, n_particles, d_min, tau, g0, target_g_param, **kwargs) -> SplitProtocol:
        gamma = solve_gamma(n_particles, d_min, tau, g0, target_g_param)
        return cls(d_min, gamma, tau, g0, target_g_param, **kwargs)


def solve_gamma(n_particles: int, d_min: float, tau: float, g0: float, target_g_param: float) -> float:
    """Separation rate that brings ``G(t) = 2 g0 N / dE(t)`` to the target at ``tau``."""
    g_start = 2.0 * g0 * n_particles / math.exp(-d_min**2)
    if g_start == 0 or g_start * target_g_param <= 0:
        raise ConfigurationError("g0 and the target G must be nonzero with equal sign")
    ratio = abs(target_g_param) / abs(g_start)
    if ratio <= 1.0:
        raise ConfigurationError(f"initial |G|={abs(g_start):.4g} already beyond target")
    return math.log(ratio) / tau


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    g: float
    amp: float
    rate: float = 0.0
    base: float = 0.0

    def delta_e(self, t):
        return self.amp * np.exp(-self.rate * (np.asarray(t) - self.t_start)) + self.base

    def area(self, a: float, b: float) -> float:
        a = max(a, self.t_start)
        b = min(b, self.t_end)
        if b <= a:
            return 0.0
        if self.rate == 0.0:
            expo = self.amp * (b - a)
        else:
            expo = self.amp / self.rate * (
                math.exp(-self.rate * (a - self.t_start)) - math.exp(-self.rate * (b - self.t_start))
            )
        return expo + self.base * (b - a)


@dataclass(frozen=True)
class Schedule:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        for s0, s1 in zip(segs, segs[1:]):
            if not math.isclose(s0.t_end, s1.t_start, rel_tol=0, abs_tol=1e-12):
                raise ConfigurationError("segments must be contiguous")
        for s in segs:
            if not s.t_end > s.t_start:
                raise ConfigurationError("segments must have positive length")
        object.__setattr__(self, "segments", segs)

    @property
    def breakpoints(self) -> list[float]:
        return [s.t_start for s in self.segments] + [self.segments[-1].t_end]

    def _seg(self, t: float) -> Segment:
        for s in self.segments:
            if t < s.t_end:
                return s
        return self.segments[-1]

    def g(self, t: float) -> float:
        return self._seg(t).g

    def delta_e(self, t: float) -> float:
        return float(self._seg(t).delta_e(t))

    def area(self, t_from: float, t_to: float) -> float:
        return sum(s.area(t_from, t_to) for s in self.segments)


def pulse_area(schedule: Schedule, t_from: float, t_to: float) -> float:
    """``int dE dt`` over ``[t_from, t_to]``; exact for exponential segments."""
    if t_to < t_from:
        raise ValueError("t_from must not exceed t_to")
    return schedule.area(t_from, t_to)


def delta_e_schedule(protocol: SplitProtocol, t: float, n_particles: Optional[int] = None) -> float:
    """Tunnelling energy at time ``t``.

    Before ``tau`` this is ``exp(-d_min^2 - gamma t)``; afterwards it follows
    the protocol's tail and pulse (``n_particles`` is not needed for either).
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t <= protocol.tau:
        return math.exp(-protocol.d_min**2 - protocol.gamma * t)
    return build_schedule(protocol).delta_e(t)


def residual_tail_area(protocol: SplitProtocol) -> float:
    """``int_tau^inf`` of the tail alone (no pulse)."""
    if protocol.tail == "cut":
        return 0.0
    return delta_e_schedule(protocol, protocol.tau) / protocol.tail_rate


def build_schedule(protocol: SplitProtocol, t_end: Optional[float] = None) -> Schedule:
    tau = protocol.tau
    de_tau = math.exp(-protocol.d_min**2 - protocol.gamma * tau)
    segs = [Segment(0.0, tau, protocol.g0, protocol.delta_e0, protocol.gamma)]
    rate = protocol.tail_rate if protocol.tail == "continue" else 0.0
    tail_amp = de_tau if protocol.tail == "continue" else 0.0
    if t_end is None:
        t_end = tau + (TAIL_E_FOLDINGS / rate if rate else 0.0)
        if protocol.pulse is not None:
            t_end = max(t_end, protocol.pulse.start + protocol.pulse.duration)
        if t_end <= tau:
            t_end = tau + 1.0

    def tail_at(t):
        return tail_amp * math.exp(-rate * (t - tau))

    cuts = [tau]
    pulse_amp = 0.0
    if protocol.pulse is not None:
        p = protocol.pulse
        pulse_amp = (p.area - residual_tail_area(protocol)) / p.duration
        if pulse_amp < 0:
            raise ConfigurationError("tail area alone exceeds the requested pulse area")
        cuts += [p.start, p.start + p.duration]
    cuts.append(t_end)
    cuts = sorted(set(c for c in cuts if tau <= c <= t_end))
    for a, b in zip(cuts, cuts[1:]):
        in_pulse = protocol.pulse is not None and protocol.pulse.start <= a < protocol.pulse.start + protocol.pulse.duration
        segs.append(Segment(a, b, 0.0, tail_at(a), rate, pulse_amp if in_pulse else 0.0))
    return Schedule(tuple(segs))


# --- exact free rotation -------------------------------------------------------

@lru_cache(maxsize=32)
def _jx_eigenbasis(n_particles: int) -> np.ndarray:
    w, z, info = kernels.tql_implicit(np.zeros(n_particles + 1), 0.5 * ladder_elements(n_particles), True)
    if info:
        raise ArithmeticError("Jx diagonalisation failed")
    z = z[:, np.argsort(w)]
    z.setflags(write=False)
    return z


def rotate_x(state: SpinState, angle: float) -> SpinState:
    """``exp(-i angle Jx) |state>``: the evolution under ``dE(t) Jx`` with area ``angle``."""
    v = _jx_eigenbasis(state.n_particles)
    lam = m_values(state.n_particles)
    return SpinState(state.n_particles, v @ (np.exp(-1j * angle * lam) * (v.T @ state.amplitudes)))


# --- propagation -------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    g: float
    delta_e: float
    g_param: float
    report: SqueezingReport
    norm: float
    reference_phase_variance: float = float("nan")
    fidelity: float = float("nan")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[SpinState]
    records: list[TrajectoryRecord]
    warnings: list[str] = field(default_factory=list)
    marks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> SpinState:
        return self.states[-1]

    @property
    def final_report(self) -> SqueezingReport:
        return self.records[-1].report

    def column(self, name: str) -> np.ndarray:
        if hasattr(SqueezingReport, "__dataclass_fields__") and name in SqueezingReport.__dataclass_fields__:
            return np.array([getattr(r.report, name) for r in self.records])
        return np.array([getattr(r, name) for r in self.records])


def default_dt(delta_e0: float, g: float, n_particles: int) -> float:
    return 1e-3 / max(delta_e0, 2.0 * abs(g) * n_particles)


def _record(t, state, g, de):
    n = state.n_particles
    gp = 2.0 * g * n / de if de > 0 else (math.copysign(math.inf, g) if g else 0.0)
    return TrajectoryRecord(t, g, de, gp, squeezing_report(state), state.norm)


def propagate(
    state: SpinState,
    schedule: Schedule,
    t0: float,
    t1: float,
    dt: float,
    stride: int = 100,
    exact_free: bool = True,
) -> Trajectory:
    """Integrate the Schroedinger equation for ``2 g(t) Jz^2 + dE(t) Jx``.

    Interacting stretches use Crank-Nicolson steps with the Hamiltonian taken
    at each step midpoint (unitary to rounding, second order in ``dt``).
    Every breakpoint inside ``[t0, t1]`` is hit exactly, with the step
    shortened so each stretch holds an integer number of steps.  With
    ``exact_free`` the ``g = 0`` stretches are applied as exact rotations
    about x instead of being integrated.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = state.n_particles
    zdiag = 2.0 * m_values(n) ** 2
    xoff = 0.5 * ladder_elements(n)
    psi = np.array(state.amplitudes, dtype=np.complex128)

    times = [t0]
    states = [state]
    records = [_record(t0, state, schedule.g(t0), schedule.delta_e(t0))]

    def push(t, seg):
        s = SpinState(n, psi.copy())
        times.append(t)
        states.append(s)
        records.append(_record(t, s, seg.g, float(seg.delta_e(t))))

    for seg in schedule.segments:
        a = max(seg.t_start, t0)
        b = min(seg.t_end, t1)
        if b <= a:
            continue
        nsteps = max(1, int(math.ceil((b - a) / dt - 1e-9)))
        h = (b - a) / nsteps
        done = 0
        start_state = psi.copy()
        while done < nsteps:
            chunk = min(stride, nsteps - done)
            t_here = a + done * h
            if exact_free and seg.g == 0.0:
                t_next = a + (done + chunk) * h
                rot = rotate_x(SpinState(n, start_state), seg.area(a, t_next))
                psi[:] = rot.amplitudes
            else:
                kernels.cn_evolve(psi, zdiag, xoff, seg.g, seg.amp, seg.rate, seg.base,
                                  t_here - seg.t_start, h, chunk)
            done += chunk
            push(a + done * h if done < nsteps else b, seg)
        drift = abs(records[-1].norm - 1.0)
        if drift > NORM_TOLERANCE:
            traj = Trajectory(np.array(times), states, records)
            raise IntegrationError(
                f"norm drift {drift:.2e} at t={times[-1]:.4g}; reduce dt", traj
            )
    return Trajectory(np.array(times), states, records)


def _attach_reference(traj: Trajectory, protocol: SplitProtocol, n_particles: int):
    out = []
    for rec, st in zip(traj.records, traj.states):
        if rec.t <= protocol.tau + 1e-12:
            de = math.exp(-protocol.d_min**2 - protocol.gamma * rec.t)
            gs = ground_state(TwoModeParams(n_particles, protocol.g0, de), warn=False)
            ref = squeezing_report(gs.state).phase_variance
            fid = abs(gs.state.overlap(st))
            if gs.degenerate:
                fid = math.hypot(fid, abs(gs.partner.overlap(st)))
            out.append(dataclasses.replace(rec, reference_phase_variance=ref, fidelity=fid))
        else:
            out.append(rec)
    traj.records = out


def _run(n_particles, protocol, dt, stride, reference, exact_free):
    de0 = protocol.delta_e0
    init = ground_state(TwoModeParams(n_particles, protocol.g0, de0), warn=False)
    schedule = build_schedule(protocol)
    if dt is None:
        dt = default_dt(de0, protocol.g0, n_particles)
    t_end = schedule.segments[-1].t_end
    traj = propagate(init.state, schedule, 0.0, t_end, dt, stride=stride, exact_free=exact_free)
    idx = int(np.searchsorted(traj.times, protocol.tau - 1e-12))
    traj.marks["initial"] = init.state
    traj.marks["quench"] = traj.states[idx]
    traj.meta.update(
        dt=dt,
        gamma=protocol.gamma,
        residual_area=residual_tail_area(protocol),
        post_quench_area=pulse_area(schedule, protocol.tau, t_end),
        g_param_at_tau=protocol.g_param(n_particles, protocol.tau),
    )
    if reference:
        _attach_reference(traj, protocol, n_particles)
    return traj


def run_attractive_protocol(
    n_particles: int,
    protocol: SplitProtocol,
    dt: Optional[float] = None,
    stride: int = 100,
    reference: bool = True,
    exact_free: bool = True,
) -> Trajectory:
    """Adiabatic splitting towards ``G = -1`` followed by an interaction quench."""
    if protocol.g0 >= 0:
        raise ConfigurationError("attractive protocol needs g0 < 0")
    if protocol.pulse is not None:
        raise ConfigurationError("attractive protocol takes no pulse")
    traj = _run(n_particles, protocol, dt, stride, reference, exact_free)
    resid = traj.meta["residual_area"]
    if resid > RESIDUAL_AREA_LIMIT:
        traj.warnings.append(
            f"residual tunnelling area {resid:.3g} rad after the quench exceeds "
            f"{RESIDUAL_AREA_LIMIT:.3g}; the squeezed quadrature will rotate away"
        )
    return traj


def run_repulsive_protocol(
    n_particles: int,
    protocol: SplitProtocol,
    dt: Optional[float] = None,
    stride: int = 100,
    reference: bool = True,
    exact_free: bool = True,
) -> Trajectory:
    """Splitting towards ``G = N^2/2``, quench, then a tunnelling pulse turning
    number squeezing into phase squeezing."""
    if protocol.g0 <= 0:
        raise ConfigurationError("repulsive protocol needs g0 > 0")
    if protocol.pulse is None:
        raise ConfigurationError("repulsive protocol needs a pulse")
    traj = _run(n_particles, protocol, dt, stride, reference, exact_free)
    p = protocol.pulse
    idx = int(np.searchsorted(traj.times, p.start - 1e-12))
    traj.marks["pre_pulse"] = traj.states[idx]
    return traj


def constant_schedule(t0: float, t1: float, g: float, delta_e: float) -> Schedule:
    return Schedule((Segment(t0, t1, g, 0.0, 0.0, delta_e),))


def energy(state: SpinState, g: float, delta_e: float) -> float:
    return 2.0 * g * expectation(state, JZ2) + delta_e * expectation(state, JX)


def ladder_runs(
    n_particles: int,
    taus: Sequence[float],
    make_protocol,
    runner,
    **kwargs,
) -> list[Trajectory]:
    """Run one protocol per ``tau`` (e.g. an adiabaticity ladder)."""
    return [runner(n_particles, make_protocol(tau), **kwargs) for tau in taus]
