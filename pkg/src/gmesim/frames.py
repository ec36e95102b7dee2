"""Rotating-frame bookkeeping with piecewise-constant per-level frame frequencies."""
from dataclasses import dataclass, field

import numpy as np

from .qmath import IZ, _require_hermitian, expm_hermitian, tensor


@dataclass(frozen=True)
class Segment:
    name: str  # "prep" | "interact" | "readout"
    duration: float
    deltas: tuple  # four angular frequencies, rad/s

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"segment {self.name!r} has negative duration")
        if len(self.deltas) != 4:
            raise ValueError("a segment needs exactly four level frequencies")
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))


def prep_segment(energies, duration, name="prep"):
    return Segment(name, duration, tuple(energies))


def interact_segment(energies, delta, tau):
    e = np.asarray(energies, dtype=float)
    return Segment("interact", tau, (e[0] - delta, e[1], e[2], e[3] - delta))


@dataclass(frozen=True)
class FrameSchedule:
    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def duration(self):
        return float(sum(s.duration for s in self.segments))

    def _locate(self, t):
        if t < 0 or t > self.duration * (1 + 1e-12) + 1e-18:
            raise ValueError(f"t = {t} outside schedule [0, {self.duration}]")
        start = 0.0
        for seg in self.segments:
            if t < start + seg.duration:
                return seg, start
            start += seg.duration
        if not self.segments:
            return None, 0.0
        return self.segments[-1], start - self.segments[-1].duration

    def deltas(self, t):
        seg, _ = self._locate(t)
        return np.zeros(4) if seg is None else np.array(seg.deltas)

    def phases(self, t):
        """Accumulated frame phase of each level, the integral of delta_k from 0 to t."""
        self._locate(t)
        acc = np.zeros(4)
        start = 0.0
        for seg in self.segments:
            dt = min(seg.duration, t - start)
            if dt <= 0:
                break
            acc += np.array(seg.deltas) * dt
            start += seg.duration
        return acc


def frame_operator(schedule, t):
    """Diagonal frame rotation ``O(t) = exp(i sum_k phi_k(t) |k><k|)``."""
    return np.diag(np.exp(1j * schedule.phases(t)))


def transform_hamiltonian(h, schedule, t):
    """Frame-transformed generator ``O h O^dag + i dO/dt O^dag``.

    For a diagonal frame the second term is ``-diag(delta(t))``.
    """
    h = _require_hermitian(h)
    o = frame_operator(schedule, t)
    return o @ h @ o.conj().T - np.diag(schedule.deltas(t)).astype(complex)


def phase_unitary(phi):
    """``diag(e^{-i phi}, 1, 1, e^{-i phi})``: the interaction with ``delta * tau = phi``."""
    ph = np.exp(-1j * phi)
    return np.diag([ph, 1.0, 1.0, ph]).astype(complex)


def interaction_unitary(delta, tau):
    """ZZ-type evolution ``exp[-i delta (|1><1| + |4><4|) tau]`` in the number basis."""
    if tau < 0:
        raise ValueError("interaction time must be non-negative")
    return phase_unitary(delta * tau)


def zz_unitary(delta, tau):
    """``exp(-i 2 delta Iz Iz tau) exp(-i delta tau / 2)`` built from spin operators."""
    return expm_hermitian(2 * delta * tensor(IZ, IZ), tau) * np.exp(-0.5j * delta * tau)

