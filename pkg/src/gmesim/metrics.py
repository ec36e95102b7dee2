"""State overlap fidelity and two-qubit entanglement measures."""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import TOL
from .qmath import Basis, DensityMatrix

SY_SY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def fidelity(a, b):
    """Normalised Hilbert-Schmidt overlap ``|Tr(a b)| / sqrt(Tr(a^2) Tr(b^2))``.

    This is not the Uhlmann fidelity; for two pure states it reduces to ``|<a|b>|^2``.
    """
    if a.basis is not b.basis:
        raise ValueError(f"basis mismatch: {a.basis.value} vs {b.basis.value}")
    ra, rb = a.data, b.data
    num = abs(np.trace(ra @ rb))
    den = math.sqrt(np.trace(ra @ ra).real * np.trace(rb @ rb).real)
    return float(min(1.0, num / den))


def _as_zz(rho):
    if isinstance(rho, DensityMatrix):
        if rho.basis is not Basis.ZZ:
            raise ValueError("concurrence needs a zz-basis (product) density matrix")
        return rho.data
    return np.asarray(rho, dtype=complex)


def concurrence(rho):
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    The ``l_i`` are computed as singular values of ``V^T (sy x sy) V`` with
    ``rho = V V^dag``, which equal the square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)`` but avoid taking square roots of tiny numbers.
    """
    r = _as_zz(rho)
    r = (r + r.conj().T) / 2
    vals, vecs = np.linalg.eigh(r)
    scale = max(1.0, abs(vals).max())
    if vals.min() < -1e-8 * scale:
        raise ValueError(f"density matrix is not PSD (eigenvalue {vals.min():.3e})")
    v = vecs * np.sqrt(np.clip(vals, 0.0, None))
    lam = np.linalg.svd(v.T @ SY_SY @ v, compute_uv=False)
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))


def binary_entropy(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def eof_from_concurrence(c):
    c = min(1.0, max(0.0, c))
    return binary_entropy((1 + math.sqrt(1 - c * c)) / 2)


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    tangle: float
    eof: float
    entangled: bool

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def entanglement_report(rho, threshold=TOL.entangled):
    c = concurrence(rho)
    return EntanglementReport(c, c * c, eof_from_concurrence(c), c > threshold)
