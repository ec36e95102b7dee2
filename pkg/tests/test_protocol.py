import math

import numpy as np
import pytest

from gmesim.atom import AtomParams, eigensystem
from gmesim.dsl import PulseProgram, parse, pulse, readout, wait
from gmesim.noise import NoiseModel
from gmesim.protocol import (
    fig1c_program, ideal_state, lab_frame_state, prepared_state, rotating_frame_state, simulate, simulate_program,
    sweep,
)
from gmesim.qmath import Basis, DensityMatrix

ATOM = AtomParams()
R = eigensystem(ATOM).R


def test_prepared_state_is_uniform_product():
    assert np.abs(R @ prepared_state(ATOM) - 0.5).max() < 1e-9


def test_fig1c_program_shape():
    prog = fig1c_program()
    kinds = [e.kind for e in prog.events]
    assert kinds == ["pulse"] * 3 + ["wait"] + ["pulse"] * 2 + ["readout"]
    w = prog.events[3]
    assert w.tau == 2e-6 and math.isclose(w.delta * w.tau, math.pi / 2)
    assert prog.events[-1].element == "Re14"


@pytest.mark.parametrize("phi", [0.0, math.pi / 4, math.pi / 2, math.pi])
def test_theory_tangles(phi):
    r = simulate(phi)
    assert abs(r.report.tangle - math.sin(phi) ** 2) < 1e-9
    assert r.fidelity >= 1 - 1e-9


@pytest.mark.parametrize("dt", [0.0, math.pi / 4, math.pi / 2, math.pi])
def test_frame_routes_agree(dt):
    prog = fig1c_program(ATOM, delta=dt / 2e-6)
    body = PulseProgram(prog.body())
    rot = rotating_frame_state(body, ATOM)
    lab_rot, lab = lab_frame_state(body, ATOM)
    assert np.abs(rot.data - lab_rot.data).max() < 1e-8
    assert lab.basis is Basis.ZZ
    assert abs(np.trace(lab.data) - 1) < 1e-12


@pytest.mark.filterwarnings("ignore:dephased state has eigenvalue")  # table is not CP; see test_noise
def test_frame_routes_agree_with_noise_and_readout_pulses():
    prog = parse("pulse 3-4 +y 1.1\npulse 1-3 -y 0.7\npulse 2-3 +x 2.0\nwait 30us detuning 20krad/s\npulse 1-3 +x pi/2\nwait 5us detuning 0rad\npulse 3-4 -x 0.3\n")
    rot = rotating_frame_state(prog, ATOM, NoiseModel())
    lab_rot, _ = lab_frame_state(prog, ATOM, NoiseModel())
    assert np.abs(rot.data - lab_rot.data).max() < 1e-8


def test_simulate_program_matches_simulate():
    a = simulate_program(fig1c_program())
    b = simulate(math.pi / 2)
    assert math.isclose(a.phi, math.pi / 2, rel_tol=1e-14)
    assert np.abs(a.state.data - b.state.data).max() < 1e-9
    with pytest.raises(ValueError):
        simulate_program(PulseProgram((pulse(3, 4, "+y", 1.0), readout("P1"))))


def test_finite_shot_run_is_reproducible():
    a = simulate(math.pi / 2, shots=500, seed=11, n_boot=3)
    b = simulate(math.pi / 2, shots=500, seed=11, n_boot=3)
    assert a.records == b.records and a.setting_seeds == b.setting_seeds
    assert a.concurrence_std == b.concurrence_std and a.concurrence_std > 0
    assert len(set(a.setting_seeds)) == 16
    c = simulate(math.pi / 2, shots=500, seed=12)
    assert c.records != a.records
    assert 0.8 < a.report.concurrence <= 1
    with pytest.raises(ValueError):
        simulate(math.pi / 2, shots=10)
    with pytest.raises(ValueError):
        simulate(math.pi / 2, tau=-1.0)


@pytest.mark.filterwarnings("ignore:dephased state has eigenvalue")  # table is not CP; see test_noise
def test_dephased_run_reports_lower_entanglement():
    r = simulate(math.pi / 2, tau=100e-6, noise=NoiseModel())
    assert 0 < r.report.tangle < 1
    assert r.state.basis is Basis.NUMBER


@pytest.mark.filterwarnings("ignore:dephased state has eigenvalue")  # table is not CP; see test_noise
def test_sweep_shape_and_order():
    taus = np.arange(0, 401, 50) * 1e-6
    pts = sweep(taus)
    assert [p.index for p in pts] == list(range(len(taus)))
    assert math.isclose(pts[0].tangle, 1.0, rel_tol=1e-9)
    assert pts[0].delta == math.inf
    t = [p.tangle for p in pts]
    assert all(x > y for x, y in zip(t, t[1:]))
    assert t[-1] < 0.1
    assert math.isclose(pts[2].tangle, 0.452, abs_tol=0.005)
    par = sweep(taus, jobs=4, shots=200, seed=5)
    ser = sweep(taus, jobs=1, shots=200, seed=5)
    assert par == ser


def test_ideal_state_is_zz():
    s = ideal_state(0.3)
    assert s.basis is Basis.ZZ
    assert isinstance(s, DensityMatrix)
