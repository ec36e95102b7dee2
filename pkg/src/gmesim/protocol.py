"""End-to-end protocol: prepare, interact, dephase, do tomography, score.

Two independent evolutions of a pulse program are provided. One works in the
rotating frame with compiled unitaries. The other propagates in the lab frame
with hardware phases and is mapped into the rotating frame at the end.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .atom import AtomParams, eigensystem, free_hamiltonian
from .dsl import PulseProgram, readout, wait
from .frames import frame_operator, phase_unitary
from .gme import gme_final_state
from .metrics import entanglement_report, fidelity
from .noise import NoiseModel, apply_dephasing
from .pulses import compile_program, control_hamiltonian, drive_for, pulse_unitary, solve_prep
from .qmath import Basis, DensityMatrix, dag, expm_hermitian
from .tomo import measure, measurement_set, reconstruct

TAU_DEFAULT = 2e-6  # s
N_SETTINGS = 16


def ideal_state(phi):
    """Theory state after an interaction phase ``phi`` (zz basis, pure)."""
    return DensityMatrix.from_ket(gme_final_state(phi), Basis.ZZ)


def readout_fragment(element):
    """The pulse fragment that maps ``element`` onto the dark-state population."""
    return dict(measurement_set())[element].events


def fig1c_program(atom=None, delta=None, tau=TAU_DEFAULT, element="Re14"):
    """Prep pulses, one wait, then the analysis pulses and marker for ``element``.

    The default detuning gives ``delta * tau = pi/2``.
    """
    atom = AtomParams() if atom is None else atom
    theta = eigensystem(atom).theta
    delta = math.pi / (2 * tau) if delta is None else delta
    events = solve_prep(theta).events() + (wait(tau, delta),) + tuple(readout_fragment(element))
    return PulseProgram(events + (readout(element),), name="fig1c")


def prepared_state(atom=None):
    """Number-basis ket after the solved prep sequence acting on ``|3>``."""
    atom = AtomParams() if atom is None else atom
    psi = np.zeros(4, dtype=complex)
    psi[2] = 1
    for ev in solve_prep(eigensystem(atom).theta).events():
        psi = pulse_unitary(ev) @ psi
    return psi


def rotating_frame_state(prog, atom=None, noise=None):
    """Final number-basis state of ``prog`` started in ``|3>``, rotating frame.

    Dephasing (if any) acts during waits only.
    """
    atom = AtomParams() if atom is None else atom
    noise = NoiseModel.noiseless() if noise is None else noise
    compiled = compile_program(prog, atom)
    rho = np.zeros((4, 4), dtype=complex)
    rho[2, 2] = 1
    for step in compiled.steps:
        rho = step.unitary @ rho @ dag(step.unitary)
        if step.event.kind == "wait":
            rho = apply_dephasing(DensityMatrix(rho, Basis.NUMBER), step.duration, noise).data
    return DensityMatrix(rho, Basis.NUMBER)


def lab_frame_state(prog, atom=None, noise=None):
    """Same program propagated in the lab frame, then mapped to the rotating frame.

    Pulses use the physical (RWA) drive with its hardware phase and the free
    hyperfine evolution during the pulse. Waits are free evolution under the zz-basis
    hyperfine Hamiltonian; the interaction appears only through the final frame
    transformation. Returns ``(rotating_frame_state, lab_state_zz)``.
    """
    atom = AtomParams() if atom is None else atom
    noise = NoiseModel.noiseless() if noise is None else noise
    eig = eigensystem(atom)
    R, E = eig.R, eig.energies
    hf = free_hamiltonian(atom)
    compiled = compile_program(prog, atom)

    def o_hw(t):
        return np.diag(np.exp(1j * E * t))

    rho = np.zeros((4, 4), dtype=complex)
    rho[2, 2] = 1
    rho = R @ rho @ R.T
    t = 0.0
    for step in compiled.steps:
        ev = step.event
        if ev.kind == "pulse":
            ctrl, dur = drive_for(ev, extra_phase=step.phase_shift)
            u_rot = expm_hermitian(control_hamiltonian(ctrl), dur)
            u = R @ (dag(o_hw(t + dur)) @ u_rot @ o_hw(t)) @ R.T
        else:
            dur = ev.tau
            u = expm_hermitian(hf, dur)
        rho = u @ rho @ dag(u)
        if ev.kind == "wait" and dur > 0:
            # elementwise decay is diagonal-frame invariant, so it can act on the lab state
            num = DensityMatrix(R.T @ rho @ R, Basis.NUMBER)
            rho = R @ apply_dephasing(num, dur, noise).data @ R.T
        t += dur
    number = R.T @ rho @ R
    o = frame_operator(compiled.schedule, t)
    rot = o @ number @ dag(o)
    return DensityMatrix((rot + dag(rot)) / 2, Basis.NUMBER), DensityMatrix(rho, Basis.ZZ)


@dataclass(frozen=True)
class SimulationResult:
    phi: float
    tau: float
    state: DensityMatrix  # exact number-basis state before readout
    records: tuple
    reconstruction: object
    fidelity: float
    report: object
    concurrence_std: float = None  # spread over bootstrap readout seeds
    setting_seeds: tuple = field(default=None, repr=False)


def _setting_seeds(seed, n):
    rng = np.random.default_rng(seed)
    return [int(x) for x in rng.integers(0, 2**63 - 1, size=n)]


def simulate(phi, tau=TAU_DEFAULT, atom=None, noise=None, shots=None, seed=None, n_boot=0):
    """Prep, interaction of phase ``phi`` lasting ``tau``, dephasing, tomography, metrics.

    ``shots=None`` reads exact probabilities. With finite shots the 16 readout seeds
    are drawn from ``default_rng(seed)``; ``n_boot`` further replicates with fresh
    seeds from the same generator give a spread for the concurrence.
    """
    atom = AtomParams() if atom is None else atom
    noise = NoiseModel.noiseless() if noise is None else noise
    if tau < 0:
        raise ValueError("interaction time must be non-negative")
    psi = phase_unitary(phi) @ prepared_state(atom)
    rho = DensityMatrix(np.outer(psi, psi.conj()), Basis.NUMBER)
    rho = apply_dephasing(rho, tau, noise)
    return score(rho, phi, tau, atom, shots, seed, n_boot)


def simulate_program(prog, atom=None, noise=None, shots=None, seed=None, n_boot=0):
    """Run the prep and wait events of ``prog``, then the full tomography.

    The theory state uses the summed phase of all waits.
    """
    body = PulseProgram(prog.body(), name=prog.name)
    waits = [e for e in body.events if e.kind == "wait"]
    if not waits:
        raise ValueError("program has no wait event")
    phi = math.fsum(e.delta * e.tau for e in waits)
    tau = math.fsum(e.tau for e in waits)
    rho = rotating_frame_state(body, atom, noise)
    return score(rho, phi, tau, atom, shots, seed, n_boot)


def score(rho, phi, tau, atom=None, shots=None, seed=None, n_boot=0):
    """Tomography of ``rho`` (number basis) and comparison with the ideal state."""
    atom = AtomParams() if atom is None else atom
    if shots is not None and seed is None:
        raise ValueError("a seed is required for finite-shot runs")
    eig = eigensystem(atom)
    seeds = None
    if shots is not None:
        all_seeds = _setting_seeds(seed, N_SETTINGS * (1 + n_boot))
        seeds = all_seeds[:N_SETTINGS]
    records = measure(rho, shots=shots, seed=seeds)
    rec = reconstruct(records, eig.R)
    report = entanglement_report(rec.zz)
    spread = None
    if shots is not None and n_boot > 0:
        cs = []
        for b in range(1, n_boot + 1):
            sb = all_seeds[N_SETTINGS * b : N_SETTINGS * (b + 1)]
            cs.append(entanglement_report(reconstruct(measure(rho, shots=shots, seed=sb), eig.R).zz).concurrence)
        spread = float(np.std(cs, ddof=1)) if n_boot > 1 else 0.0
    return SimulationResult(
        float(phi),
        float(tau),
        rho,
        tuple(records),
        rec,
        fidelity(rec.zz, ideal_state(phi)),
        report,
        spread,
        tuple(seeds) if seeds is not None else None,
    )


@dataclass(frozen=True)
class SweepPoint:
    index: int
    tau: float
    delta: float
    phi: float
    concurrence: float
    tangle: float
    eof: float
    fidelity: float
    concurrence_std: float = None


def sweep(taus, phi=math.pi / 2, atom=None, noise=None, shots=None, seed=None, n_boot=0, jobs=1):
    """Entanglement versus interaction time at fixed phase, ``delta = phi / tau``.

    Point ``i`` uses its own generator seeded with ``seed + i``; results are
    ordered by index whatever the completion order.
    """
    taus = [float(t) for t in taus]
    noise = NoiseModel() if noise is None else noise

    def one(i):
        t = taus[i]
        s = None if seed is None else seed + i
        r = simulate(phi, t, atom, noise, shots, s, n_boot)
        delta = phi / t if t > 0 else math.inf
        return SweepPoint(
            i, t, delta, phi, r.report.concurrence, r.report.tangle, r.report.eof, r.fidelity, r.concurrence_std
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            points = list(ex.map(one, range(len(taus))))
    else:
        points = [one(i) for i in range(len(taus))]
    return sorted(points, key=lambda p: p.index)
