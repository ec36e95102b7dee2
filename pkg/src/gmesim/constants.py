"""Shared numerical tolerances, physical constants and hardware defaults.

All frequencies are angular (rad/s) unless a name says otherwise.
"""
from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    unitary: float = 1e-10
    reconstruction: float = 1e-9
    state_norm: float = 1e-10
    trace: float = 1e-12
    psd_floor: float = 1e-10
    entangled: float = 1e-9


TOL = Tolerances()

# CODATA values via scipy
G = _sc.G
HBAR = _sc.hbar
C_LIGHT = _sc.c
MU0 = _sc.mu_0

# 171Yb+ ground manifold defaults
HYPERFINE_A = TWO_PI * 12.642812e9
OMEGA0 = TWO_PI * 12.61157173e9
B0_GAUSS = 5.615
GAMMA_NUCLEAR = TWO_PI * 0.752e3  # rad/s per gauss, 171Yb nucleus
GAMMA_ELECTRON = -TWO_PI * 2.802495e6  # rad/s per gauss, negative moment

# transition offsets omega' above OMEGA0, rad/s
TRANSITION_OFFSETS = {
    (1, 3): TWO_PI * 39.1096e6,
    (2, 3): TWO_PI * 31.2500e6,
    (3, 4): TWO_PI * 23.3814e6,
}

# |Omega| per driven transition, rad/s
RABI = {
    (1, 3): TWO_PI * 49.6e3,
    (2, 3): TWO_PI * 107.8e3,
    (3, 4): TWO_PI * 55.2e3,
}

# Ramsey T2* per level pair, seconds; (2, 3) is effectively infinite
T2_STAR = {
    (1, 3): 404.3e-6,
    (2, 3): np.inf,
    (3, 4): 403.9e-6,
    (1, 2): 410.9e-6,
    (2, 4): 440.7e-6,
    (1, 4): 138.5e-6,
}

DRIVEN_TRANSITIONS = ((1, 3), (2, 3), (3, 4))
