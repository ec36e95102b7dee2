"""Four-level hyperfine model of a spin-1/2 nucleus (a) coupled to a spin-1/2 electron (b)."""
import warnings
from dataclasses import dataclass

import numpy as np

from . import constants as K
from .qmath import IX, IY, IZ, I2, Basis, DensityMatrix, tensor


@dataclass(frozen=True)
class AtomParams:
    """Hyperfine constant ``A`` and Zeeman parameters, angular units.

    ``gamma_a``/``gamma_b`` are in rad/s per gauss, ``B0`` in gauss.
    """

    A: float = K.HYPERFINE_A
    B0: float = K.B0_GAUSS
    gamma_a: float = K.GAMMA_NUCLEAR
    gamma_b: float = K.GAMMA_ELECTRON
    omega0: float = K.OMEGA0

    def __post_init__(self):
        if self.A < 0:
            raise ValueError("hyperfine constant A must be non-negative")
        if self.B0 < 0:
            raise ValueError("B0 must be non-negative")
        zeeman = self.B0 * max(abs(self.gamma_a), abs(self.gamma_b))
        if zeeman > 0 and self.A / zeeman < 10:
            warnings.warn(
                f"A / (B0*gamma) = {self.A / zeeman:.3g} < 10; weak-field picture no longer holds",
                stacklevel=2,
            )


@dataclass(frozen=True, eq=False)
class EigenSystem:
    energies: np.ndarray  # E1..E4 in number-basis order
    theta: float
    lam: float
    R: np.ndarray

    def transition(self, n, m):
        """Angular frequency ``E_n - E_m`` for 1-based level labels."""
        return float(self.energies[n - 1] - self.energies[m - 1])


def free_hamiltonian(p):
    """Hyperfine plus Zeeman Hamiltonian in the zz basis."""
    hf = p.A * (tensor(IX, IX) + tensor(IY, IY) + tensor(IZ, IZ))
    zeeman = p.B0 * (p.gamma_a * tensor(IZ, I2) + p.gamma_b * tensor(I2, IZ))
    return hf - zeeman


def mixing_lambda(p):
    if p.A == 0:
        raise ValueError("A = 0: mixing parameter lambda is undefined")
    ga, gb, b = p.gamma_a, p.gamma_b, p.B0
    root = np.sqrt(p.A**2 + b**2 * ga**2 + b**2 * gb**2 - 2 * b**2 * ga * gb)
    return (-b * ga + b * gb - root) / p.A


def mapping_operator(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[1, 0, 0, 0], [0, c, s, 0], [0, -s, c, 0], [0, 0, 0, 1]], dtype=float
    )


def eigensystem(p):
    """Closed-form eigensystem of :func:`free_hamiltonian`.

    Levels are labelled by the columns of the mapping operator R rather than by
    sorting eigenvalues, so the degenerate B0 = 0 triplet keeps a fixed labelling.
    """
    lam = mixing_lambda(p)
    theta = 2 * np.arctan(lam)
    R = mapping_operator(theta)
    hn = R.T @ free_hamiltonian(p) @ R
    off = hn - np.diag(np.diag(hn))
    if np.abs(off).max() > 1e-9 * max(1.0, np.abs(hn).max()):
        raise ArithmeticError("mapping operator failed to diagonalise the free Hamiltonian")
    return EigenSystem(energies=np.diag(hn).real.copy(), theta=float(theta), lam=float(lam), R=R)


def change_basis(x, src, dst, R):
    """Convert a ket, operator or :class:`DensityMatrix` between number and zz bases.

    Kets transform as ``R @ psi`` (number -> zz) and operators as ``R M R^T``.
    """
    if R is None:
        raise ValueError("change_basis needs the mapping operator R")
    src, dst = Basis(src), Basis(dst)
    if src is dst:
        raise ValueError("source and target basis are the same")
    T = R if dst is Basis.ZZ else R.T
    if isinstance(x, DensityMatrix):
        if x.basis is not src:
            raise ValueError(f"state is tagged {x.basis.value}, not {src.value}")
        return DensityMatrix(T @ x.data @ T.T, dst)
    x = np.asarray(x)
    if x.ndim == 1:
        return T @ x
    return T @ x @ T.T
