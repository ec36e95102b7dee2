"""Small dense complex linear algebra for two-spin (4x4) and single-spin (2x2) objects.

Matrices are plain ``numpy`` arrays. Two-spin operators use the product ordering
(up-up, up-down, down-up, down-down) with spin ``a`` as the left factor.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import TOL


class Basis(str, Enum):
    NUMBER = "number"
    ZZ = "zz"


# spin-1/2 angular momentum operators (hbar = 1)
IX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
IY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
IZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)


def _check_square(m, dims=(2, 4)):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise ValueError(f"expected a square matrix of size {dims}, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(h, tol=TOL.hermitian):
    h = np.asarray(h)
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    return bool(np.abs(h - h.conj().T).max(initial=0.0) <= tol * scale)


def _require_hermitian(h):
    h = _check_square(h)
    if not is_hermitian(h):
        raise ValueError("matrix is not Hermitian")
    return h


def dag(m):
    return np.asarray(m).conj().T


def ket(*amps):
    return np.asarray(amps, dtype=complex)


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def tensor(a, b):
    """Kronecker product of two 2x2 operators (or two 2-vectors)."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.shape not in ((2, 2), (2,)):
        raise ValueError(f"tensor expects two 2x2 matrices or 2-vectors, got {a.shape} and {b.shape}")
    return np.kron(a, b).astype(complex)


def _fix_phase(vecs):
    # largest-magnitude component made real positive; ties go to the lowest index
    out = np.array(vecs, dtype=complex)
    for k in range(out.shape[1]):
        col = out[:, k]
        mags = np.abs(col)
        idx = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


def eig_hermitian(h):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Each eigenvector column is phased so that its largest-magnitude component is
    real and positive.
    """
    h = _require_hermitian(h)
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return vals, _fix_phase(vecs)


def expm_hermitian(h, t=1.0):
    """Return ``exp(-i h t)`` for Hermitian ``h`` by exact eigendecomposition."""
    h = _require_hermitian(h)
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def is_unitary(u, tol=TOL.unitary):
    u = np.asarray(u)
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < tol)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A 4x4 two-spin density matrix tagged with the basis it is written in."""

    data: np.ndarray
    basis: Basis = Basis.NUMBER

    def __post_init__(self):
        m = _check_square(np.array(self.data, dtype=complex), dims=(4,))
        m.setflags(write=False)
        object.__setattr__(self, "data", m)
        object.__setattr__(self, "basis", Basis(self.basis))

    @classmethod
    def from_ket(cls, psi, basis=Basis.NUMBER):
        psi = np.asarray(psi, dtype=complex)
        norm = np.vdot(psi, psi).real
        if abs(norm - 1.0) > TOL.state_norm:
            raise ValueError(f"state is not normalised (|psi|^2 = {norm})")
        return cls(proj(psi), basis)

    def validate(self, tol=TOL.psd_floor):
        """Raise ``ValueError`` unless Hermitian, unit trace and PSD within ``tol``."""
        m = self.data
        if not is_hermitian(m, tol):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"density matrix trace is {tr}")
        floor = np.linalg.eigvalsh((m + dag(m)) / 2).min()
        if floor < -tol:
            raise ValueError(f"density matrix has negative eigenvalue {floor:.3e}")
        return self

    def with_data(self, data):
        return DensityMatrix(data, self.basis)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


def partial_trace(rho, subsystem):
    """Trace out spin ``subsystem`` ('a' or 'b') of a zz-basis density matrix."""
    if not isinstance(rho, DensityMatrix) or rho.basis is not Basis.ZZ:
        raise ValueError("partial_trace needs a DensityMatrix tagged with the zz basis")
    t = rho.data.reshape(2, 2, 2, 2)
    if subsystem == "b":
        return np.einsum("ijkj->ik", t)
    if subsystem == "a":
        return np.einsum("jijk->ik", t)
    raise ValueError(f"subsystem must be 'a' or 'b', got {subsystem!r}")


def project_psd(m):
    """Nearest unit-trace PSD matrix by eigenvalue truncation and renormalisation."""
    m = np.asarray(m, dtype=complex)
    vals, vecs = np.linalg.eigh((m + dag(m)) / 2)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        raise ValueError("cannot project a matrix with no positive spectrum")
    vals /= vals.sum()
    out = (vecs * vals) @ dag(vecs)
    return (out + dag(out)) / 2  # exactly Hermitian
