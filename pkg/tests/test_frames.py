import math

import numpy as np
import pytest
from scipy.integrate import quad

from gmesim.atom import AtomParams, change_basis, eigensystem, free_hamiltonian
from gmesim.frames import (
    FrameSchedule, Segment, frame_operator, interact_segment, interaction_unitary, prep_segment,
    transform_hamiltonian, zz_unitary,
)
from gmesim.qmath import is_unitary


def _schedule():
    e = eigensystem(AtomParams()).energies
    return e, FrameSchedule([prep_segment(e, 3e-6), interact_segment(e, 7e5, 2e-6), prep_segment(e, 1e-6, "readout")])


def test_zero_frame_is_identity():
    s = FrameSchedule([Segment("prep", 1.0, (0, 0, 0, 0))])
    for t in (0.0, 0.3, 1.0):
        assert np.allclose(frame_operator(s, t), np.eye(4))


def test_constant_frame():
    d = np.array([1.0, -2.0, 3.0, 0.5])
    s = FrameSchedule([Segment("prep", 2.0, d)])
    assert np.allclose(frame_operator(s, 1.3), np.diag(np.exp(1j * d * 1.3)))


def test_piecewise_phases_match_numeric_integral():
    _, s = _schedule()
    bounds = np.cumsum([0] + [g.duration for g in s.segments])
    for t in (0.5e-6, 3e-6, 4.2e-6, 6e-6):
        for k in range(4):
            # integrate each constant piece separately and rescale so quad sees O(1) numbers
            acc = 0.0
            for g, lo in zip(s.segments, bounds[:-1]):
                hi = min(lo + g.duration, t)
                if hi > lo:
                    acc += quad(lambda x: s.deltas(x * 1e-6)[k] * 1e-6, lo * 1e6, hi * 1e6, points=None)[0]
            assert math.isclose(s.phases(t)[k], acc, rel_tol=1e-12)


def test_schedule_domain():
    _, s = _schedule()
    with pytest.raises(ValueError):
        frame_operator(s, -1e-9)
    with pytest.raises(ValueError):
        frame_operator(s, 1.0)
    with pytest.raises(ValueError):
        Segment("prep", -1.0, (0, 0, 0, 0))


def test_interact_segment_frequencies():
    e = np.array([4.0, 3.0, 2.0, 1.0])
    seg = interact_segment(e, 0.25, 1.0)
    assert seg.deltas == (3.75, 3.0, 2.0, 0.75)


def test_transform_cancels_free_evolution():
    p = AtomParams()
    eig = eigensystem(p)
    hn = eig.R.T @ free_hamiltonian(p) @ eig.R
    s = FrameSchedule([prep_segment(eig.energies, 1e-6)])
    out = transform_hamiltonian(hn, s, 0.4e-6)
    assert np.abs(out).max() < 1e-12 * np.abs(hn).max()


def test_transform_interact_gives_zz_form():
    e = np.array([5.0, 1.0, -7.0, 2.0])
    delta = 0.3
    s = FrameSchedule([interact_segment(e, delta, 1.0)])
    out = transform_hamiltonian(np.diag(e), s, 0.5)
    assert np.allclose(out, np.diag([delta, 0, 0, delta]))


def test_transform_without_frame_is_identity_map():
    h = np.array([[1, 2j, 0, 0], [-2j, 3, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    s = FrameSchedule([Segment("prep", 1.0, (0, 0, 0, 0))])
    assert np.allclose(transform_hamiltonian(h, s, 0.2), h)


def test_interaction_unitary_examples():
    assert np.allclose(interaction_unitary(123.0, 0.0), np.eye(4))
    assert np.allclose(interaction_unitary(math.pi / 2, 1.0), np.diag([-1j, 1, 1, -1j]))
    with pytest.raises(ValueError):
        interaction_unitary(1.0, -1.0)


def test_interaction_unitary_factorization():
    R = eigensystem(AtomParams()).R
    for delta in (0.0, 1e5, 7.85e5, 3e6):
        for tau in (0.0, 1e-6, 2e-6, 5e-5):
            u_num = interaction_unitary(delta, tau)
            u_zz = change_basis(u_num, "number", "zz", R)
            assert np.abs(u_zz - zz_unitary(delta, tau)).max() < 1e-12


def test_interaction_unitary_grid():
    for delta in np.linspace(0, 2 * math.pi * 1e6, 20):
        for tau in np.linspace(0, 1e-4, 20):
            u = interaction_unitary(delta, tau)
            assert np.count_nonzero(u - np.diag(np.diag(u))) == 0
            assert is_unitary(u)
            assert np.abs(u - zz_unitary(delta, tau)).max() < 1e-11
