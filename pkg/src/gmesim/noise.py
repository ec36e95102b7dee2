"""Pure dephasing: exponential decay of each number-basis coherence, plus a Ramsey simulator."""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit

from . import constants as K
from .pulses import rotation
from .qmath import Basis, DensityMatrix, project_psd


def _key(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class NoiseModel:
    """Coherence time per unordered level pair, seconds. Missing pairs never decay."""

    beta: dict = field(default_factory=lambda: dict(K.T2_STAR))

    def __post_init__(self):
        clean = {}
        for (u, v), b in dict(self.beta).items():
            if u == v or not (1 <= u <= 4 and 1 <= v <= 4):
                raise ValueError(f"invalid level pair ({u}, {v})")
            if not b > 0:
                raise ValueError(f"coherence time for ({u}, {v}) must be positive")
            clean[_key(u, v)] = float(b)
        object.__setattr__(self, "beta", clean)

    @classmethod
    def noiseless(cls):
        return cls({})

    def time(self, u, v):
        return self.beta.get(_key(u, v), math.inf)

    def decay_matrix(self, tau):
        m = np.ones((4, 4))
        for u in range(1, 5):
            for v in range(u + 1, 5):
                b = self.time(u, v)
                m[u - 1, v - 1] = m[v - 1, u - 1] = 0.0 if tau == math.inf else math.exp(-tau / b)
        return m


def apply_dephasing(rho, tau, nm, floor=K.TOL.psd_floor):
    """Scale each coherence ``rho_uv`` by ``exp(-tau / beta_uv)``.

    Elementwise decay with an arbitrary table need not be completely positive. If
    the result dips below ``-floor`` it is projected back to the nearest PSD state
    and a ``RuntimeWarning`` is issued.
    """
    if tau < 0:
        raise ValueError("dephasing time must be non-negative")
    if rho.basis is not Basis.NUMBER:
        raise ValueError("dephasing acts on number-basis density matrices")
    if tau == 0:
        return rho
    out = rho.data * nm.decay_matrix(tau)
    low = np.linalg.eigvalsh(out).min()
    if low < -floor:
        warnings.warn(f"dephased state has eigenvalue {low:.3e}; projecting to PSD", RuntimeWarning, stacklevel=2)
        out = project_psd(out)
    return DensityMatrix(out, Basis.NUMBER)


def ramsey_fringe(transition, delays, detuning, nm):
    """Ramsey signal on a level pair: pi/2, free precession with dephasing, pi/2.

    Returns the population of the upper level ``m`` of ``(n, m)`` after the second
    pulse, which equals ``(1 + exp(-t/beta) cos(detuning t)) / 2`` ideally.
    """
    n, m = _key(*transition)
    half = rotation((n, m), 0.0, math.pi / 2)
    psi = np.zeros(4, dtype=complex)
    psi[n - 1] = 1
    psi = half @ psi
    rho0 = DensityMatrix(np.outer(psi, psi.conj()), Basis.NUMBER)
    out = []
    for t in np.asarray(delays, dtype=float):
        phase = np.ones(4, dtype=complex)
        phase[m - 1] = np.exp(-1j * detuning * t)
        r = (phase[:, None] * rho0.data) * phase.conj()[None, :]
        r = apply_dephasing(DensityMatrix(r, Basis.NUMBER), t, nm).data
        r = half @ r @ half.conj().T
        out.append(r[m - 1, m - 1].real)
    return np.array(out)


def _fringe_model(t, amp, t2, omega, phi, offset):
    return offset + amp * np.exp(-t / t2) * np.cos(omega * t + phi)


def fit_t2(delays, signal, detuning_guess, t2_guess):
    """Least-squares fit of a damped cosine; returns ``(t2, popt)``."""
    p0 = (0.5, t2_guess, detuning_guess, 0.0, 0.5)
    popt, _ = curve_fit(_fringe_model, delays, signal, p0=p0, maxfev=20000)
    return abs(popt[1]), popt
