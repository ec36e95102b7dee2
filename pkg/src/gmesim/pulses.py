"""Microwave pulse unitaries, the RWA drive Hamiltonian, state-preparation solver and
compilation of pulse programs with frame-phase tracking."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import constants as K
from .atom import eigensystem
from .dsl import PulseEvent, PulseProgram, pulse
from .frames import FrameSchedule, interact_segment, interaction_unitary, prep_segment
from .qmath import expm_hermitian

AXIS_ANGLE = {"+y": 0.0, "+x": math.pi / 2, "-y": math.pi, "-x": 3 * math.pi / 2}


class PrepSolveError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _unit(k):
    v = np.zeros(4, dtype=complex)
    v[k - 1] = 1
    return v


def gen_y(n, m):
    """``-i|n><m| + i|m><n|``"""
    g = np.zeros((4, 4), dtype=complex)
    g[n - 1, m - 1] = -1j
    g[m - 1, n - 1] = 1j
    return g


def gen_x(n, m):
    g = np.zeros((4, 4), dtype=complex)
    g[n - 1, m - 1] = g[m - 1, n - 1] = 1
    return g


def rotation(transition, axis_angle, angle, half_angle=True):
    n, m = transition
    g = gen_y(n, m) * math.cos(axis_angle) + gen_x(n, m) * math.sin(axis_angle)
    return expm_hermitian(g, angle / 2 if half_angle else angle)


def pulse_unitary(ev, half_angle=True, extra_phase=0.0):
    """Number-basis unitary of a pulse event.

    ``U = exp[-i (G_y cos p + G_x sin p) angle/2]`` with ``p`` the axis angle
    (+y: 0, +x: pi/2, -y: pi, -x: 3pi/2) plus the event phase. ``half_angle=False``
    drops the 1/2 so that labels are read as generator exponents instead.
    """
    if ev.kind != "pulse":
        raise ValueError(f"not a pulse event: {ev.kind}")
    if ev.transition not in K.DRIVEN_TRANSITIONS:
        raise ValueError(f"transition {ev.transition} is not driven")
    return rotation(ev.transition, AXIS_ANGLE[ev.axis] + ev.phase + extra_phase, ev.angle, half_angle)


@dataclass(frozen=True)
class ControlParams:
    c13: complex = 0j
    c23: complex = 0j
    c34: complex = 0j
    rabi: dict = field(default_factory=lambda: dict(K.RABI))

    def __post_init__(self):
        for tr, c in zip(K.DRIVEN_TRANSITIONS, (self.c13, self.c23, self.c34)):
            limit = self.rabi.get(tr, np.inf)
            if 2 * abs(c) > limit * (1 + 1e-12):
                raise ValueError(f"drive on {tr} exceeds the Rabi limit {limit:.4g} rad/s")


def control_hamiltonian(c):
    """``c13|1><3| + c23|2><3| + c34|3><4| + h.c.``"""
    h = np.zeros((4, 4), dtype=complex)
    for (n, m), amp in zip(K.DRIVEN_TRANSITIONS, (c.c13, c.c23, c.c34)):
        h[n - 1, m - 1] += amp
        h[m - 1, n - 1] += np.conj(amp)
    return h


def drive_for(ev, rabi=None, extra_phase=0.0):
    """Drive amplitudes and duration realising ``ev`` at full Rabi frequency.

    A coupling ``c = -i (Omega/2) e^{i p}`` on ``|n><m|`` held for ``angle/Omega``
    reproduces :func:`pulse_unitary`.
    """
    rabi = dict(K.RABI if rabi is None else rabi)
    om = rabi[ev.transition]
    p = AXIS_ANGLE[ev.axis] + ev.phase + extra_phase
    amp = -0.5j * om * np.exp(1j * p)
    kw = {f"c{ev.transition[0]}{ev.transition[1]}": amp}
    return ControlParams(rabi=rabi, **kw), ev.angle / om


@dataclass(frozen=True)
class PrepSolution:
    alpha34: float
    alpha13: float
    alpha23: float
    axes: tuple
    phases: tuple
    residual: float

    def events(self):
        return (
            pulse(3, 4, self.axes[0], self.alpha34, self.phases[0]),
            pulse(1, 3, self.axes[1], self.alpha13, self.phases[1]),
            pulse(2, 3, self.axes[2], self.alpha23, self.phases[2]),
        )


def prep_target(theta):
    """Number-basis amplitudes of the uniform product state (1,1,1,1)/2 (zz basis)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([0.5, (c - s) / 2, (s + c) / 2, 0.5], dtype=complex)


def _apply(events, psi):
    for ev in events:
        psi = pulse_unitary(ev) @ psi
    return psi


def solve_prep(theta):
    """Pulse angles taking |3> to the uniform product state, found by root finding.

    The sequence is 3-4 (+y), 1-3 (-y), 2-3 (-y). Each angle is bracketed and solved
    in turn against the amplitude that pulse is responsible for.
    """
    if not -math.pi < theta < 0:
        raise ValueError("theta must lie in (-pi, 0)")
    target = prep_target(theta)
    axes = ("+y", "-y", "-y")
    psi0 = _unit(3)
    xtol = 1e-15

    def after34(a):
        return _apply([pulse(3, 4, axes[0], a)], psi0)

    a34 = brentq(lambda a: abs(after34(a)[3]) ** 2 - abs(target[3]) ** 2, 0.0, math.pi, xtol=xtol)
    psi1 = after34(a34)

    def after13(a):
        return _apply([pulse(1, 3, axes[1], a)], psi1)

    a13 = brentq(lambda a: abs(after13(a)[0]) ** 2 - abs(target[0]) ** 2, 0.0, math.pi, xtol=xtol)
    psi2 = after13(a13)

    def after23(a):
        return _apply([pulse(2, 3, axes[2], a)], psi2)

    hi = math.nextafter(2 * math.pi, 0.0)
    a23 = brentq(lambda a: after23(a)[2].real - target[2].real, 0.0, hi, xtol=xtol)
    psi = after23(a23)
    residual = 1.0 - abs(np.vdot(target, psi)) ** 2
    if residual > 1e-9:
        raise PrepSolveError("state preparation did not reach the target", residual)
    return PrepSolution(a34, a13, a23, axes, (0.0, 0.0, 0.0), float(residual))


def theta23_closed_form(theta):
    """Alternative printed closed form for the 2-3 angle, kept for comparison only.

    It gives 0 at theta = -pi/2 where a full pi transfer is required, so nothing
    relies on it. Arguments of acos outside [-1, 1] are clipped.
    """
    t = math.atan(theta / 2)
    arg = (-math.sqrt(2) / 2 * (1 - t)) / (math.cos(theta / 2) * t + math.sin(theta / 2))
    return 2 * math.acos(max(-1.0, min(1.0, arg)))


@dataclass(frozen=True, eq=False)
class Step:
    event: PulseEvent
    unitary: np.ndarray  # rotating frame with the ZZ interaction in the wait
    hw_unitary: np.ndarray  # frame co-rotating with every level; waits are free evolution
    duration: float
    phase_shift: float  # extra microwave phase applied in the hardware frame


@dataclass(frozen=True, eq=False)
class CompiledProgram:
    steps: tuple
    schedule: FrameSchedule
    frame_offsets: np.ndarray  # integral of (delta_k - E_k) over the full program

    @property
    def unitaries(self):
        return [s.unitary for s in self.steps]

    @property
    def hw_unitaries(self):
        return [s.hw_unitary for s in self.steps]

    def total(self, hardware=False):
        u = np.eye(4, dtype=complex)
        for s in self.steps:
            u = (s.hw_unitary if hardware else s.unitary) @ u
        return u


def compile_program(prog, atom=None, rabi=None, half_angle=True):
    """Compile ``prog`` into per-event unitaries and the matching frame schedule.

    Pulses that follow a wait inherit the frame-phase difference of their two
    levels: on the hardware side this is an added microwave phase of
    ``offset[m] - offset[n]`` for transition (n, m).
    """
    if not isinstance(prog, PulseProgram):
        raise TypeError("compile_program expects a PulseProgram")
    eig = eigensystem(atom) if atom is not None else None
    energies = eig.energies if eig is not None else np.zeros(4)
    rabi = dict(K.RABI if rabi is None else rabi)
    offsets = np.zeros(4)
    steps, segments = [], []
    seen_wait = False
    for ev in prog.events:
        if ev.kind == "readout":
            continue
        if ev.kind == "pulse":
            if ev.transition not in rabi:
                raise ValueError(f"line {ev.line}: no Rabi frequency for transition {ev.transition}")
            n, m = ev.transition
            shift = offsets[m - 1] - offsets[n - 1]
            duration = ev.angle / rabi[ev.transition]
            u = pulse_unitary(ev, half_angle)
            hw = pulse_unitary(ev, half_angle, extra_phase=shift)
            segments.append(prep_segment(energies, duration, "readout" if seen_wait else "prep"))
            steps.append(Step(ev, u, hw, duration, float(shift)))
        else:
            seen_wait = True
            u = interaction_unitary(ev.delta, ev.tau)
            segments.append(interact_segment(energies, ev.delta, ev.tau))
            offsets[0] -= ev.delta * ev.tau
            offsets[3] -= ev.delta * ev.tau
            steps.append(Step(ev, u, np.eye(4, dtype=complex), ev.tau, 0.0))
    return CompiledProgram(tuple(steps), FrameSchedule(tuple(segments)), offsets)


def prep_program(theta, name="prep"):
    sol = solve_prep(theta)
    return PulseProgram(sol.events(), name=name)

