"""Fluorescence readout and four-level state tomography.

Only ``|3><3|`` is observed directly (dark state). Every other density-matrix element
is rotated onto it by a short pulse fragment; the full set of 16 settings fixes all
16 real parameters of the state, which is then recovered by linear inversion.
"""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dsl import PulseProgram, pulse
from .pulses import pulse_unitary
from .qmath import Basis, DensityMatrix, dag, project_psd

PI = math.pi
HALF = math.pi / 2


@dataclass(frozen=True)
class ReadoutResult:
    shots: int
    bright: int
    p_bright: float


def simulate_readout(rho, shots, seed):
    """Bright/dark readout: bright with probability ``1 - rho_33`` per shot."""
    if shots < 1:
        raise ValueError("need at least one shot")
    p = _bright_probability(rho)
    rng = np.random.default_rng(seed)
    bright = int(rng.binomial(shots, p))
    return ReadoutResult(shots, bright, bright / shots)


def _bright_probability(rho):
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(min(1.0, max(0.0, 1.0 - data[2, 2].real)))


def measurement_set():
    """The 16 tomography settings as ``(element, fragment)`` pairs.

    Populations are swapped into |3> by a pi pulse. Coherences on a driven transition
    are read with a pi/2 pulse about +y (real part) and +x (imaginary part). The
    (1,4), (1,2) and (2,4) coherences first move one level into |3> with a pi pulse
    and then use a pi/2 analysis pulse on the other transition.
    """
    sets = [
        ("P3", ()),
        ("P1", (pulse(1, 3, "+y", PI),)),
        ("P2", (pulse(2, 3, "+y", PI),)),
        ("P4", (pulse(3, 4, "+y", PI),)),
    ]
    for n, m in ((1, 3), (2, 3), (3, 4)):
        sets.append((f"Re{n}{m}", (pulse(n, m, "+y", HALF),)))
        sets.append((f"Im{n}{m}", (pulse(n, m, "+x", HALF),)))
    composite = {
        "14": (pulse(3, 4, "+y", PI), (1, 3)),
        "12": (pulse(2, 3, "+y", PI), (1, 3)),
        "24": (pulse(2, 3, "+y", PI), (3, 4)),
    }
    for key, (mapping, (n, m)) in composite.items():
        sets.append((f"Re{key}", (mapping, pulse(n, m, "+y", HALF))))
        sets.append((f"Im{key}", (mapping, pulse(n, m, "+x", HALF))))
    return [(el, PulseProgram(frag, name=el)) for el, frag in sets]


def fragment_unitary(fragment):
    u = np.eye(4, dtype=complex)
    for ev in fragment.events:
        if ev.kind == "pulse":
            u = pulse_unitary(ev) @ u
    return u


def measurement_operator(fragment):
    """POVM element for 'dark' after ``fragment``: ``V^dag |3><3| V``."""
    v = fragment_unitary(fragment)
    return dag(v)[:, 2:3] @ v[2:3, :]


def re14_from_populations(p1, p4, p3_after):
    """Real part of <1|rho|4> from the Re14 readout and the two populations."""
    return (p1 + p4) / 2 - p3_after


@dataclass(frozen=True)
class TomographyRecord:
    element: str
    value: float  # dark-state (|3>) population after the fragment
    shots: int = None  # None: exact probability
    seed: int = None


def measure(rho, settings=None, shots=None, seed=None):
    """Run every tomography setting on ``rho`` (number basis).

    With ``shots=None`` the exact probabilities are returned. Otherwise setting ``k``
    draws its shots from a generator seeded with ``seed + k``, or with ``seed[k]``
    when a sequence of per-setting seeds is given.
    """
    if rho.basis is not Basis.NUMBER:
        raise ValueError("tomography simulation expects a number-basis state")
    if shots is not None and seed is None:
        raise ValueError("a seed is required for finite-shot readout")
    settings = measurement_set() if settings is None else settings
    if shots is not None:
        if np.ndim(seed) == 0:
            seeds = [int(seed) + k for k in range(len(settings))]
        else:
            seeds = [int(x) for x in seed]
            if len(seeds) != len(settings):
                raise ValueError("need one seed per tomography setting")
    records = []
    for k, (el, frag) in enumerate(settings):
        v = fragment_unitary(frag)
        after = v @ rho.data @ dag(v)
        if shots is None:
            records.append(TomographyRecord(el, float(after[2, 2].real)))
        else:
            res = simulate_readout(after, shots, seeds[k])
            records.append(TomographyRecord(el, 1.0 - res.p_bright, shots, seeds[k]))
    return records


def _hermitian_basis():
    basis = []
    for i in range(4):
        b = np.zeros((4, 4), dtype=complex)
        b[i, i] = 1
        basis.append(b)
    for i in range(4):
        for j in range(i + 1, 4):
            b = np.zeros((4, 4), dtype=complex)
            b[i, j] = b[j, i] = 1
            basis.append(b)
            b = np.zeros((4, 4), dtype=complex)
            b[i, j], b[j, i] = -1j, 1j
            basis.append(b)
    return basis


_BASIS = _hermitian_basis()
_FRAGMENTS = dict(measurement_set())


def sensing_matrix(elements):
    """Real matrix mapping the 16 state parameters to the listed settings' outcomes."""
    rows = []
    for el in elements:
        if el not in _FRAGMENTS:
            raise ValueError(f"unknown tomography element {el!r}")
        e = measurement_operator(_FRAGMENTS[el])
        rows.append([np.trace(e @ b).real for b in _BASIS])
    return np.array(rows)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    number: DensityMatrix
    zz: DensityMatrix
    raw: np.ndarray  # linear-inversion estimate before projection


def reconstruct(records, R):
    """Linear inversion of tomography records, then projection to a physical state.

    The zz-basis twin is ``R rho R^T``.
    """
    if R is None:
        raise ValueError("reconstruct needs the mapping operator R")
    elements = [r.element for r in records]
    a = sensing_matrix(elements)
    if np.linalg.matrix_rank(a, tol=1e-9) < 16:
        raise ValueError("tomography records are incomplete: sensing matrix is rank deficient")
    p = np.array([r.value for r in records])
    x, *_ = np.linalg.lstsq(a, p, rcond=None)
    raw = sum(xj * b for xj, b in zip(x, _BASIS))
    rho = project_psd(raw)
    number = DensityMatrix(rho, Basis.NUMBER)
    return Reconstruction(number, DensityMatrix(R @ rho @ R.T, Basis.ZZ), raw)


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["element", "value", "shots", "seed"])
    for r in records:
        w.writerow([r.element, repr(r.value), "" if r.shots is None else r.shots, "" if r.seed is None else r.seed])
    return buf.getvalue()


def records_from_csv(text):
    rows = csv.DictReader(io.StringIO(text))
    return [
        TomographyRecord(
            row["element"],
            float(row["value"]),
            int(row["shots"]) if row["shots"] else None,
            int(row["seed"]) if row["seed"] else None,
        )
        for row in rows
    ]


def records_to_json(records):
    return json.dumps([asdict(r) for r in records], indent=2)


def records_from_json(text):
    return [TomographyRecord(**d) for d in json.loads(text)]
